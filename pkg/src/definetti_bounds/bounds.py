"""Closed-form bounds on sampling and de Finetti divergences.

Every bound lives in a read-only registry keyed by a short id.  Evaluators
return a :class:`BoundResult`; bounds free of transcendental functions come
back as exact Fractions, the rest as :class:`PrecisionFloat` enclosures.
All total-variation values use the L1 convention (range [0, 2]).

:func:`verify_instance` computes the relevant divergence for an urn (H vs B)
or an exchangeable model (P_k vs M_{k,mu_n}) and checks it against each
applicable bound.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from types import MappingProxyType
from typing import Callable, Iterable, Mapping, Sequence, Union

from .arith import DEFAULT_BITS, PrecisionFloat, exp_rational, falling_factorial, log_rational
from .divergences import KL, TV_L1, divergence
from .exchangeable import (
    ExchangeableModel,
    empirical_mixing,
    entropy_first_coordinate,
    iid_mixture_dist,
    marginal,
)
from .urns import UrnComposition, hypergeom_composition, multinom_composition

__all__ = [
    "BoundParams",
    "BoundResult",
    "BoundSpec",
    "CheckEntry",
    "REGISTRY",
    "VerificationReport",
    "evaluate_bound",
    "evaluate_kl_bound",
    "evaluate_kl_lower_bound",
    "evaluate_tv_bound",
    "registry_json",
    "subject_id",
    "verify_instance",
]

UPPER, LOWER, EXACT = "upper", "lower", "exact"

Value = Union[Fraction, PrecisionFloat]


@dataclass(frozen=True)
class BoundParams:
    """Inputs a bound may need; ``urn`` fills in ``c`` and ``n`` when given."""

    c: int | None = None
    n: int | None = None
    k: int | None = None
    urn: tuple[int, ...] | None = None
    entropy: PrecisionFloat | None = None

    def __post_init__(self) -> None:
        if self.urn is not None:
            urn = tuple(int(x) for x in self.urn)
            object.__setattr__(self, "urn", urn)
            for name, derived in (("c", len(urn)), ("n", sum(urn))):
                given = getattr(self, name)
                if given is None:
                    object.__setattr__(self, name, derived)
                elif given != derived:
                    raise ValueError(f"{name}={given} disagrees with urn {urn}")


@dataclass(frozen=True)
class BoundSpec:
    id: str
    metric: str
    kind: str
    params: tuple[str, ...]
    validity: str
    source: str
    formula: Callable[[BoundParams, int], Value] = field(repr=False, compare=False)
    check: Callable[[BoundParams], str | None] = field(repr=False, compare=False)
    convention_note: str = ""
    extras: Callable[[BoundParams, int], dict[str, Value]] | None = field(
        default=None, repr=False, compare=False)


@dataclass(frozen=True)
class BoundResult:
    spec_id: str
    metric: str
    kind: str
    value: Value | None
    valid: bool
    reason: str = ""
    convention: str = "L1"
    extras: Mapping[str, Value] = field(default_factory=dict)


# --- validity predicates ------------------------------------------------------

def _need(p: BoundParams, names: Iterable[str]) -> str | None:
    for name in names:
        if getattr(p, name) is None:
            return f"missing parameter {name}"
    return None


def _k_range(p: BoundParams, lo: int, hi: int, text: str) -> str | None:
    if p.k < 1 or p.k < lo or p.k > hi:
        return f"requires {text} (got k={p.k}, n={p.n})"
    return None


def _basic(p: BoundParams, names=("n", "k")) -> str | None:
    return _need(p, names) or (None if p.n >= 1 else "requires n >= 1") or \
        _k_range(p, 1, p.n, "1 <= k <= n")


def _check_k_le_n(p: BoundParams) -> str | None:
    return _basic(p)


def _check_ckn(p: BoundParams) -> str | None:
    return _basic(p, ("c", "n", "k"))


def _check_stam(p: BoundParams) -> str | None:
    return _basic(p, ("c", "n", "k")) or (None if p.n >= 2 else "requires n >= 2")


def _check_k_lt_n(p: BoundParams) -> str | None:
    return _basic(p) or _k_range(p, 1, p.n - 1, "1 <= k <= n-1")


def _check_hm(p: BoundParams) -> str | None:
    return _need(p, ("c",)) or _check_k_lt_n(p)


def _check_jgk(p: BoundParams) -> str | None:
    reason = _need(p, ("urn", "k"))
    if reason:
        return reason
    if any(x < 1 for x in p.urn):
        return "requires every colour count >= 1"
    if p.n < 2:
        return "requires n >= 2"
    return _k_range(p, 1, p.n // 2, "1 <= k <= floor(n/2)")


def _check_gk_binary(p: BoundParams) -> str | None:
    reason = _need(p, ("c",)) or _check_k_lt_n(p)
    if reason:
        return reason
    return None if p.c == 2 else f"requires a binary alphabet (got c={p.c})"


def _check_gkb(p: BoundParams) -> str | None:
    return _need(p, ("entropy",)) or _basic(p) or _k_range(p, 1, p.n - 2, "1 <= k <= n-2")


# --- formulas -----------------------------------------------------------------

def _pairs(p: BoundParams) -> Fraction:
    return Fraction(p.k * (p.k - 1))


def _df_general(p: BoundParams, bits: int) -> Value:
    return _pairs(p) / p.n


def _df_general_extras(p: BoundParams, bits: int) -> dict[str, Value]:
    return {"half_l1_value": _pairs(p) / (2 * p.n)}


def _two_ck_over_n(p: BoundParams, bits: int) -> Value:
    return Fraction(2 * p.c * p.k, p.n)


def _freedman_upper(p: BoundParams, bits: int) -> Value:
    return _pairs(p) / p.n


def _freedman_lower(p: BoundParams, bits: int) -> Value:
    return (1 - exp_rational(-_pairs(p) / (2 * p.n), bits)) * 2


def _no_collision(p: BoundParams) -> Fraction:
    """n! / ((n-k)! n^k): chance that k uniform draws from n are all distinct."""
    return Fraction(falling_factorial(p.n, p.k), p.n ** p.k)


def _exact_tv_uniform(p: BoundParams, bits: int) -> Value:
    return 2 * (1 - _no_collision(p))


def _stam(p: BoundParams, bits: int) -> Value:
    return Fraction((p.c - 1) * p.k * (p.k - 1), 2 * (p.n - 1) * (p.n - p.k + 1))


def _harremoes_matus(p: BoundParams, bits: int) -> Value:
    n, k = p.n, p.k
    inner = log_rational(Fraction(n - 1, n - k), bits) - Fraction(k, n) + Fraction(1, n - k + 1)
    return inner * (p.c - 1)


def _jgk_urn(p: BoundParams, bits: int) -> Value:
    n, k, c = p.n, p.k, p.c
    first = (log_rational(Fraction(n, n - k), bits) - Fraction(k, n - 1)) * Fraction(c - 1, 2)
    inverse_sum = sum((Fraction(n, ell) for ell in p.urn), Fraction(0))
    cube_sum = sum((Fraction(n, ell) ** 3 for ell in p.urn), Fraction(0))
    second = Fraction(k * (2 * n + 1), 12 * n * (n - 1) * (n - k)) * inverse_sum
    third = Fraction(1, 360) * (Fraction(1, (n - k) ** 3) - Fraction(1, n ** 3)) * cube_sum
    return first + second + third


def _log_inverse_no_collision(p: BoundParams, bits: int) -> Value:
    return log_rational(1 / _no_collision(p), bits)


def _relaxed_extras(p: BoundParams, bits: int) -> dict[str, Value]:
    ratio = _pairs(p) / (2 * p.n)
    if ratio >= 1:
        return {}
    return {"relaxed_value": log_rational(1 / (1 - ratio), bits)}


def _gk_binary(p: BoundParams, bits: int) -> Value:
    return log_rational(p.n, bits) * Fraction(5 * p.k * p.k, p.n - p.k)


def _gkb_entropy(p: BoundParams, bits: int) -> Value:
    return p.entropy * (_pairs(p) / (2 * (p.n - p.k - 1)))


def _new1(p: BoundParams, bits: int) -> Value:
    return _pairs(p) / (2 * (p.n - p.k + 1))


_HALF_L1_NOTE = (
    "the classical statement k(k-1)/(2n) bounds the half-L1 (sup over events) "
    "distance; reported here in the L1 convention as k(k-1)/n, the half-L1 "
    "number is kept as half_l1_value"
)

_SPECS = [
    BoundSpec("df_general", TV_L1, UPPER, ("n", "k"), "1 <= k <= n",
              "Diaconis & Freedman (1980), exchangeable vectors on any space",
              _df_general, _check_k_le_n, _HALF_L1_NOTE, _df_general_extras),
    BoundSpec("df_finite", TV_L1, UPPER, ("c", "n", "k"), "1 <= k <= n",
              "Diaconis & Freedman (1980), finite alphabet of size c",
              _two_ck_over_n, _check_ckn),
    BoundSpec("df_sampling", TV_L1, UPPER, ("c", "n", "k"), "1 <= k <= n",
              "Diaconis & Freedman (1980), sampling without vs with replacement",
              _two_ck_over_n, _check_ckn),
    BoundSpec("freedman_upper", TV_L1, UPPER, ("n", "k"), "1 <= k <= n; urn of n distinct colours",
              "Freedman (1977), birthday-problem comparison",
              _freedman_upper, _check_k_le_n),
    BoundSpec("freedman_lower", TV_L1, LOWER, ("n", "k"), "1 <= k <= n; urn of n distinct colours",
              "Freedman (1977), birthday-problem comparison",
              _freedman_lower, _check_k_le_n),
    BoundSpec("exact_tv_uniform", TV_L1, EXACT, ("n", "k"), "1 <= k <= n; urn of n distinct colours",
              "repeated colours are impossible without replacement",
              _exact_tv_uniform, _check_k_le_n),
    BoundSpec("stam", KL, UPPER, ("c", "n", "k"), "n >= 2, 1 <= k <= n",
              "Stam (1978), relative entropy of sampling without vs with replacement",
              _stam, _check_stam),
    BoundSpec("harremoes_matus", KL, UPPER, ("c", "n", "k"), "1 <= k <= n-1",
              "Harremoës & Matúš (2020), sampling without replacement",
              _harremoes_matus, _check_hm,
              "the logarithmic term diverges at k = n, so k = n is excluded"),
    BoundSpec("jgk_urn", KL, UPPER, ("urn", "k"), "1 <= k <= floor(n/2), every count >= 1",
              "urn-dependent refinement of Stam's bound",
              _jgk_urn, _check_jgk,
              "the colour sum in the middle term runs over j = 1..c"),
    BoundSpec("exact_kl_uniform", KL, EXACT, ("n", "k"), "1 <= k <= n; urn of n distinct colours",
              "exact relative entropy for an urn of n distinct colours",
              _log_inverse_no_collision, _check_k_le_n),
    BoundSpec("gk_binary", KL, UPPER, ("c", "n", "k"), "c = 2, 1 <= k <= n-1",
              "binary-alphabet bound with the empirical mixing measure",
              _gk_binary, _check_gk_binary),
    BoundSpec("gkb_entropy", KL, UPPER, ("n", "k", "entropy"), "1 <= k <= n-2",
              "entropy-weighted bound for an alternative mixing measure",
              _gkb_entropy, _check_gkb,
              "holds for a different mixing measure than the empirical one; evaluated, never asserted"),
    BoundSpec("with_olly", KL, UPPER, ("c", "n", "k"), "n >= 2, 1 <= k <= n",
              "Stam's bound averaged over the empirical mixing measure (finite alphabet)",
              _stam, _check_stam),
    BoundSpec("song", KL, UPPER, ("n", "k"), "1 <= k <= n-1",
              "Song, Attiah & Yu (2024), alphabet-free bound",
              _log_inverse_no_collision, _check_k_lt_n,
              "relaxed_value = -log(1 - k(k-1)/(2n)) is reported when k(k-1) < 2n",
              _relaxed_extras),
    BoundSpec("new1", KL, UPPER, ("n", "k"), "1 <= k <= n",
              "joint convexity of relative entropy plus Stam's bound with c <= n",
              _new1, _check_k_le_n),
    BoundSpec("new2", KL, UPPER, ("n", "k"), "1 <= k <= n",
              "uniform index-vector comparison plus the partition characterisation of relative entropy",
              _log_inverse_no_collision, _check_k_le_n,
              "relaxed_value = -log(1 - k(k-1)/(2n)) is reported when k(k-1) < 2n",
              _relaxed_extras),
    BoundSpec("yu_converse", KL, LOWER, ("n", "k"), "1 <= k <= n-1; distinct-colour urn law",
              "Song, Attiah & Yu (2024), converse for every mixing measure",
              _log_inverse_no_collision, _check_k_lt_n),
]

_REGISTRY: dict[str, BoundSpec] = {spec.id: spec for spec in _SPECS}
REGISTRY: Mapping[str, BoundSpec] = MappingProxyType(_REGISTRY)
BOUND_IDS: tuple[str, ...] = tuple(_REGISTRY)


def registry_json() -> list[dict[str, object]]:
    """Documentation view of the registry (no callables)."""
    return [
        {
            "id": spec.id,
            "metric": spec.metric,
            "kind": spec.kind,
            "params": list(spec.params),
            "validity": spec.validity,
            "convention": "L1" if spec.metric == TV_L1 else "nats",
            "convention_note": spec.convention_note,
            "source": spec.source,
        }
        for spec in REGISTRY.values()
    ]


def _spec(bound_id: str) -> BoundSpec:
    try:
        return REGISTRY[bound_id]
    except KeyError:
        raise ValueError(f"unknown bound id {bound_id!r}") from None


def evaluate_bound(bound_id: str, params: BoundParams | None = None, *,
                   min_bits: int = DEFAULT_BITS, **kwargs) -> BoundResult:
    spec = _spec(bound_id)
    if params is None:
        params = BoundParams(**kwargs)
    elif kwargs:
        raise TypeError("pass either a BoundParams or keyword parameters, not both")
    conv = "L1" if spec.metric == TV_L1 else "nats"
    reason = spec.check(params)
    if reason:
        return BoundResult(spec.id, spec.metric, spec.kind, None, False, reason, conv)
    extras = spec.extras(params, min_bits) if spec.extras else {}
    return BoundResult(spec.id, spec.metric, spec.kind, spec.formula(params, min_bits), True,
                       convention=conv, extras=MappingProxyType(extras))


def evaluate_tv_bound(bound_id: str, params: BoundParams | None = None, **kwargs) -> BoundResult:
    if _spec(bound_id).metric != TV_L1:
        raise ValueError(f"{bound_id!r} is not a total-variation bound")
    return evaluate_bound(bound_id, params, **kwargs)


def evaluate_kl_bound(bound_id: str, params: BoundParams | None = None, **kwargs) -> BoundResult:
    spec = _spec(bound_id)
    if spec.metric != KL or spec.kind == LOWER:
        raise ValueError(f"{bound_id!r} is not a relative-entropy upper/exact bound")
    return evaluate_bound(bound_id, params, **kwargs)


def evaluate_kl_lower_bound(bound_id: str, params: BoundParams | None = None, **kwargs) -> BoundResult:
    spec = _spec(bound_id)
    if spec.metric != KL or spec.kind != LOWER:
        raise ValueError(f"{bound_id!r} is not a relative-entropy lower bound")
    return evaluate_bound(bound_id, params, **kwargs)


# --- instance verification ----------------------------------------------------

_URN_IDS = frozenset({"df_sampling", "stam", "harremoes_matus", "jgk_urn"})
_MODEL_IDS = frozenset({"df_general", "df_finite", "new1", "new2", "with_olly", "song",
                        "gk_binary", "gkb_entropy"})
_DISTINCT_COLOUR_IDS = frozenset({"freedman_upper", "freedman_lower", "exact_tv_uniform",
                                  "exact_kl_uniform", "yu_converse"})
_EVALUATE_ONLY = frozenset({"gkb_entropy"})

Subject = Union[UrnComposition, ExchangeableModel]


@dataclass(frozen=True)
class CheckEntry:
    """Outcome of one bound on one instance.

    ``status`` is ``pass``, ``fail``, ``skipped`` (invalid parameters or an
    evaluate-only bound) or ``n/a`` (bound does not concern this kind of
    subject).  ``slack`` is the exact difference of centre values, oriented so that a
    satisfied bound has nonnegative slack; ``error_bound`` is the combined
    enclosure radius of divergence and bound.
    """

    bound_id: str
    metric: str
    kind: str
    status: str
    divergence: Value | None = None
    bound: BoundResult | None = None
    slack: Fraction | None = None
    error_bound: Fraction = Fraction(0)
    tight: bool = False
    reason: str = ""

    @property
    def widened_slack(self) -> Fraction | None:
        return None if self.slack is None else self.slack + self.error_bound


@dataclass(frozen=True)
class VerificationReport:
    subject_id: str
    c: int
    n: int
    k: int
    entries: tuple[CheckEntry, ...]
    divergences: Mapping[str, Value] = field(default_factory=dict)

    @property
    def failures(self) -> list[CheckEntry]:
        return [e for e in self.entries if e.status == "fail"]

    @property
    def ok(self) -> bool:
        return not self.failures

    def entry(self, bound_id: str) -> CheckEntry:
        for e in self.entries:
            if e.bound_id == bound_id:
                return e
        raise KeyError(bound_id)


def subject_id(subject: Subject) -> str:
    if isinstance(subject, UrnComposition):
        return f"urn:{subject}"
    support = ";".join(f"{','.join(map(str, u.counts))}@{w}" for u, w in subject.type_weights.support)
    return f"model:c={subject.c},n={subject.n}:{support}"


def _interval(x: Value) -> tuple[Fraction, Fraction | None]:
    if isinstance(x, PrecisionFloat):
        if x.infinite:
            return Fraction(0), None
        return x.lower, x.upper
    return x, x


def _centre(x: Value) -> Fraction:
    return x.value if isinstance(x, PrecisionFloat) else x


def _radius(x: Value) -> Fraction:
    return x.abs_error_bound if isinstance(x, PrecisionFloat) else Fraction(0)


def _judge(div: Value, bound: Value, kind: str) -> str:
    """'pass', 'fail' or 'unsure' (enclosures overlap for an inequality)."""
    d_lo, d_hi = _interval(div)
    b_lo, b_hi = _interval(bound)
    if kind == UPPER:
        if d_hi is None:
            return "fail"
        if d_hi <= b_lo:
            return "pass"
        return "fail" if d_lo > b_hi else "unsure"
    if kind == LOWER:
        if d_hi is None or d_lo >= b_hi:
            return "pass"
        return "fail" if d_hi < b_lo else "unsure"
    if d_hi is None:
        return "fail"
    return "pass" if d_lo <= b_hi and b_lo <= d_hi else "fail"


def _applicable(bound_id: str, subject: Subject) -> str | None:
    is_urn = isinstance(subject, UrnComposition)
    if bound_id in _DISTINCT_COLOUR_IDS:
        distinct = subject.is_uniform() if is_urn else subject.is_permutation()
        return None if distinct else "requires n balls of n distinct colours"
    if is_urn and bound_id not in _URN_IDS:
        return "applies to exchangeable models, not urn pairs"
    if not is_urn and bound_id not in _MODEL_IDS:
        return "applies to urn pairs, not exchangeable models"
    return None


def verify_instance(subject: Subject, k: int, bound_ids: Sequence[str] | None = None,
                    min_bits: int = DEFAULT_BITS, max_bits: int | None = None) -> VerificationReport:
    """Check the divergence of one instance against each requested bound.

    For an urn the divergence is between sampling without and with
    replacement; for a model it is the de Finetti gap at ``k``.  An
    inequality whose enclosures overlap is recomputed at doubled precision
    (up to ``max_bits``, default ``4 * min_bits``); if it stays undecided the
    two sides agree to within the error bounds and the check passes as tight.
    """
    ids = list(BOUND_IDS if bound_ids is None else bound_ids)
    for bid in ids:
        _spec(bid)
    max_bits = 4 * min_bits if max_bits is None else max_bits

    if isinstance(subject, UrnComposition):
        if not 1 <= k <= subject.n:
            raise ValueError(f"need 1 <= k <= n = {subject.n}, got k = {k}")
        p, q = hypergeom_composition(subject, k), multinom_composition(subject, k)
        c, n = subject.c, subject.n
        urn = subject.counts
    elif isinstance(subject, ExchangeableModel):
        p = marginal(subject, k)
        q = iid_mixture_dist(empirical_mixing(subject), k)
        c, n = subject.c, subject.n
        urn = None
    else:
        raise TypeError(f"cannot verify a {type(subject).__name__}")

    div_cache: dict[tuple[str, int], Value] = {}

    def div_at(metric: str, bits: int) -> Value:
        key = (metric, bits if metric == KL else 0)
        if key not in div_cache:
            div_cache[key] = divergence(p, q, metric, bits).value
        return div_cache[key]

    entropy_cache: dict[int, PrecisionFloat] = {}

    def params_at(bits: int) -> BoundParams:
        entropy = None
        if isinstance(subject, ExchangeableModel) and "gkb_entropy" in ids:
            if bits not in entropy_cache:
                entropy_cache[bits] = entropy_first_coordinate(subject, bits)
            entropy = entropy_cache[bits]
        return BoundParams(c=c, n=n, k=k, urn=urn, entropy=entropy)

    entries = []
    for bid in sorted(set(ids), key=BOUND_IDS.index):
        spec = REGISTRY[bid]
        reason = _applicable(bid, subject)
        if reason:
            entries.append(CheckEntry(bid, spec.metric, spec.kind, "n/a", reason=reason))
            continue
        bits = min_bits
        result = evaluate_bound(bid, params_at(bits), min_bits=bits)
        if not result.valid:
            entries.append(CheckEntry(bid, spec.metric, spec.kind, "skipped", bound=result,
                                      reason=result.reason))
            continue
        div = div_at(spec.metric, bits)
        if bid in _EVALUATE_ONLY:
            entries.append(CheckEntry(bid, spec.metric, spec.kind, "skipped", div, result,
                                      reason="evaluated only: holds for a different mixing measure"))
            continue
        verdict = _judge(div, result.value, spec.kind)
        while verdict == "unsure" and bits * 2 <= max_bits:
            bits *= 2
            result = evaluate_bound(bid, params_at(bits), min_bits=bits)
            div = div_at(spec.metric, bits)
            verdict = _judge(div, result.value, spec.kind)
        tight = verdict == "unsure" or spec.kind == EXACT
        status = "fail" if verdict == "fail" else "pass"
        centre_gap = _centre(result.value) - _centre(div) if not (
            isinstance(div, PrecisionFloat) and div.infinite) else None
        if centre_gap is not None:
            if spec.kind == LOWER:
                centre_gap = -centre_gap
            elif spec.kind == EXACT:
                centre_gap = -abs(centre_gap)
        entries.append(CheckEntry(bid, spec.metric, spec.kind, status, div, result, centre_gap,
                                  _radius(div) + _radius(result.value), tight and status == "pass"))

    divs = {metric: div_at(metric, min_bits) for metric in (TV_L1, KL)}
    return VerificationReport(subject_id(subject), c, n, k, tuple(entries), MappingProxyType(divs))
