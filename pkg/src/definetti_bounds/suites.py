"""Grid verification suites run by ``definetti-bounds verify``.

Each suite sweeps a family of instances, checks every applicable bound or
identity, and records per-check counts plus a serialised witness for each
failure.  ``fast`` uses reduced grids; ``full`` the complete ones
(urns with c <= 4, n <= 10; 200 random models; distinct-colour urns up to
n = 8).
"""

from __future__ import annotations

import time
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable

from .arith import DEFAULT_BITS, PrecisionFloat, falling_factorial, format_rational
from .bounds import CheckEntry, VerificationReport, verify_instance
from .divergences import kl_terms, pinsker_holds, total_variation
from .exchangeable import (
    DEFAULT_SEED,
    empirical_mixing,
    iid_mixture_dist,
    marginal,
    model_from_weights,
    model_random_permutation,
    model_to_dict,
    random_models,
)
from .urns import (
    UrnComposition,
    enumerate_compositions,
    hypergeom_composition,
    hypergeom_sequence,
    multinom_composition,
    multinom_sequence,
)

__all__ = ["SCOPES", "ScopeConfig", "SuiteResult", "run_scope"]


@dataclass(frozen=True)
class ScopeConfig:
    c_max: int
    n_max: int
    distinct_n_max: int
    model_count: int
    binary_count: int
    seed: int = DEFAULT_SEED


SCOPES = {
    "fast": ScopeConfig(c_max=3, n_max=7, distinct_n_max=6, model_count=40, binary_count=40),
    "full": ScopeConfig(c_max=4, n_max=10, distinct_n_max=8, model_count=200, binary_count=200),
}


@dataclass
class SuiteResult:
    name: str
    checks: Counter = field(default_factory=Counter)
    failed: Counter = field(default_factory=Counter)
    failures: list[dict[str, Any]] = field(default_factory=list)
    seconds: float = 0.0

    def record(self, check: str, ok: bool, witness: Callable[[], dict[str, Any]]) -> None:
        self.checks[check] += 1
        if not ok:
            self.failed[check] += 1
            self.failures.append({"suite": self.name, "check": check, **witness()})

    @property
    def ok(self) -> bool:
        return not self.failures


def _fmt(x: Fraction | PrecisionFloat | None) -> str | None:
    if x is None:
        return None
    if isinstance(x, PrecisionFloat):
        return x.format()
    return format_rational(x)


def _record_report(result: SuiteResult, report: VerificationReport, subject: dict[str, Any]) -> None:
    for entry in report.entries:
        if entry.status not in ("pass", "fail"):
            continue
        result.record(entry.bound_id, entry.status == "pass",
                      lambda e=entry: _witness(report, e, subject))


def _witness(report: VerificationReport, entry: CheckEntry, subject: dict[str, Any]) -> dict[str, Any]:
    return {
        "subject": subject,
        "k": report.k,
        "metric": entry.metric,
        "divergence": _fmt(entry.divergence),
        "bound_value": _fmt(entry.bound.value if entry.bound else None),
    }


def _pinsker(result: SuiteResult, report: VerificationReport, subject: dict[str, Any]) -> None:
    tv, kl = report.divergences.get("TV_L1"), report.divergences.get("KL")
    if tv is None or kl is None:
        return
    result.record("pinsker", pinsker_holds(tv, kl),
                  lambda: {"subject": subject, "k": report.k, "tv": _fmt(tv), "kl": _fmt(kl)})


_URN_BOUNDS = ["df_sampling", "stam", "harremoes_matus", "jgk_urn"]
_DISTINCT_BOUNDS = ["freedman_upper", "freedman_lower", "exact_tv_uniform", "exact_kl_uniform",
                    "yu_converse"]
_MODEL_BOUNDS = ["df_general", "df_finite", "new1", "new2", "with_olly", "song"]


def _urns(c_max: int, n_max: int):
    for c in range(1, c_max + 1):
        for n in range(1, n_max + 1):
            for counts in enumerate_compositions(c, n):
                yield UrnComposition(counts)


def suite_sampling(cfg: ScopeConfig, bits: int) -> SuiteResult:
    """Sampling bounds and the sequence/composition equivalence on every urn."""
    result = SuiteResult("sampling")
    for urn in _urns(cfg.c_max, cfg.n_max):
        subject = {"urn": list(urn.counts)}
        for k in range(1, urn.n + 1):
            report = verify_instance(urn, k, _URN_BOUNDS + ["exact_kl_uniform", "exact_tv_uniform"], bits)
            _record_report(result, report, subject)
            _pinsker(result, report, subject)
            seq = kl_terms(hypergeom_sequence(urn, k), multinom_sequence(urn, k))
            comp = kl_terms(hypergeom_composition(urn, k), multinom_composition(urn, k))
            result.record("stam_equivalence", Counter(seq) == Counter(comp),
                          lambda: {"subject": subject, "k": k})
    return result


def suite_distinct_colours(cfg: ScopeConfig, bits: int) -> SuiteResult:
    """Urn of n distinct colours: exact TV/KL values and Freedman's sandwich."""
    result = SuiteResult("distinct_colours")
    for n in range(1, cfg.distinct_n_max + 1):
        urn = UrnComposition((1,) * n)
        subject = {"urn": list(urn.counts)}
        for k in range(1, n + 1):
            report = verify_instance(urn, k, _DISTINCT_BOUNDS, bits)
            _record_report(result, report, subject)
            _pinsker(result, report, subject)
            tv_seq = total_variation(hypergeom_sequence(urn, k), multinom_sequence(urn, k))
            expected = 2 * (1 - Fraction(falling_factorial(n, k), n ** k))
            result.record("exact_tv_sequence_level", tv_seq == expected,
                          lambda: {"subject": subject, "k": k, "tv": _fmt(tv_seq)})
    return result


def _index_vector_ok(model, k: int) -> bool:
    p_k = marginal(model, k)
    m_k = iid_mixture_dist(empirical_mixing(model), k)
    factor = Fraction(falling_factorial(model.n, k), model.n ** k)
    return all(m_k.class_mass(s) >= factor * p_k.class_mass(s) for s in p_k.per_sequence)


def suite_models(cfg: ScopeConfig, bits: int) -> SuiteResult:
    """De Finetti gaps of seeded random models against every model bound."""
    result = SuiteResult("definetti_models")
    for model in random_models(cfg.model_count, cfg.seed):
        subject = {"model": model_to_dict(model)}
        for k in range(1, model.n + 1):
            report = verify_instance(model, k, _MODEL_BOUNDS, bits)
            _record_report(result, report, subject)
            _pinsker(result, report, subject)
            result.record("index_vector", _index_vector_ok(model, k),
                          lambda: {"subject": subject, "k": k})
    return result


def suite_binary(cfg: ScopeConfig, bits: int) -> SuiteResult:
    result = SuiteResult("binary_models")
    for model in random_models(cfg.binary_count, cfg.seed + 1, c_min=2, c_max=2):
        subject = {"model": model_to_dict(model)}
        for k in range(1, model.n):
            _record_report(result, verify_instance(model, k, ["gk_binary"], bits), subject)
    return result


def suite_tightness(cfg: ScopeConfig, bits: int) -> SuiteResult:
    """Instances where an upper bound meets a lower bound or an exact value."""
    result = SuiteResult("tightness")
    pair = model_from_weights(2, 2, {(1, 1): 1})
    report = verify_instance(pair, 2, ["new2"], bits)
    _record_report(result, report, {"model": model_to_dict(pair)})
    result.record("pair_tight", report.entry("new2").tight, lambda: {"model": model_to_dict(pair), "k": 2})
    for n in range(2, cfg.distinct_n_max + 1):
        model = model_random_permutation(n)
        subject = {"permutation": n}
        for k in range(2, n):
            report = verify_instance(model, k, ["new2", "yu_converse", "exact_kl_uniform",
                                                "exact_tv_uniform"], bits)
            _record_report(result, report, subject)
            _pinsker(result, report, subject)
            result.record("permutation_tight",
                          all(report.entry(b).tight for b in ("new2", "yu_converse", "exact_kl_uniform")),
                          lambda: {"subject": subject, "k": k})
    return result


SUITES = [suite_distinct_colours, suite_sampling, suite_models, suite_binary, suite_tightness]


def run_scope(scope: str, min_bits: int = DEFAULT_BITS) -> list[SuiteResult]:
    try:
        cfg = SCOPES[scope]
    except KeyError:
        raise ValueError(f"unknown scope {scope!r} (choose from {', '.join(SCOPES)})") from None
    results = []
    for suite in SUITES:
        start = time.perf_counter()
        res = suite(cfg, min_bits)
        res.seconds = time.perf_counter() - start
        results.append(res)
    return results
