"""Finite exchangeable laws as mixtures over type classes.

An exchangeable law of ``X_1..X_n`` on colours ``0..c-1`` is determined by
the law of its empirical type: pick a composition ``l`` of ``n`` with
probability ``w(l)``, then a uniformly random sequence with that
composition.  Its ``k``-marginal is therefore a mixture of draws without
replacement from the urns ``l``, and the matching i.i.d. mixture (same
weights, draws with replacement) is the natural de Finetti approximant.
"""

from __future__ import annotations

import json
import random
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from os import PathLike
from typing import Any, Iterable, Mapping, Sequence, Union

from .arith import DEFAULT_BITS, PrecisionFloat, format_rational, log_rational, multinomial_coeff, parse_rational
from .divergences import KL, TV_L1, DivergenceValue, divergence
from .urns import (
    Composition,
    SequenceTypeDist,
    UrnComposition,
    canonical_key,
    enumerate_compositions,
    hypergeom_sequence,
    multinom_sequence,
)

__all__ = [
    "DEFAULT_SEED",
    "ExchangeableModel",
    "MixingMeasure",
    "definetti_gap",
    "dump_model",
    "empirical_mixing",
    "entropy_first_coordinate",
    "iid_mixture_dist",
    "load_model",
    "marginal",
    "model_from_dict",
    "model_from_joint_pmf",
    "model_from_weights",
    "model_iid_mixture",
    "model_random_permutation",
    "model_to_dict",
    "random_models",
]

DEFAULT_SEED = 1729

WeightsLike = Union["MixingMeasure", Mapping[Sequence[int], Any], Iterable[tuple[Sequence[int], Any]]]


@dataclass(frozen=True)
class MixingMeasure:
    """Finitely supported law on n-types, stored as (urn, weight) pairs."""

    support: tuple[tuple[UrnComposition, Fraction], ...]

    def __post_init__(self) -> None:
        cleaned: dict[tuple[int, ...], Fraction] = {}
        shapes = set()
        for urn, weight in self.support:
            if not isinstance(urn, UrnComposition):
                urn = UrnComposition(tuple(urn))
            weight = Fraction(weight)
            if weight < 0:
                raise ValueError(f"negative weight {weight} on type {urn.counts}")
            if urn.counts in cleaned:
                raise ValueError(f"type {urn.counts} listed twice")
            shapes.add((urn.c, urn.n))
            cleaned[urn.counts] = weight
        if not cleaned:
            raise ValueError("mixing measure has empty support")
        if len(shapes) > 1:
            raise ValueError(f"types disagree on (c, n): {sorted(shapes)}")
        total = sum(cleaned.values(), Fraction(0))
        if total != 1:
            raise ValueError(f"type_weights sum ≠ 1 (got {total})")
        ordered = sorted(((UrnComposition(s), w) for s, w in cleaned.items() if w != 0),
                         key=lambda item: canonical_key(item[0].counts))
        object.__setattr__(self, "support", tuple(ordered))

    @property
    def c(self) -> int:
        return self.support[0][0].c

    @property
    def n(self) -> int:
        return self.support[0][0].n

    def weight(self, counts: Sequence[int]) -> Fraction:
        counts = tuple(counts)
        for urn, w in self.support:
            if urn.counts == counts:
                return w
        return Fraction(0)

    def mean(self) -> tuple[Fraction, ...]:
        """The average n-type, i.e. the law of a single draw."""
        acc = [Fraction(0)] * self.c
        for urn, w in self.support:
            for j, q in enumerate(urn.ntype()):
                acc[j] += w * q
        return tuple(acc)


@dataclass(frozen=True)
class ExchangeableModel:
    c: int
    n: int
    type_weights: MixingMeasure

    def __post_init__(self) -> None:
        if (self.type_weights.c, self.type_weights.n) != (self.c, self.n):
            raise ValueError(
                f"types have (c, n) = {(self.type_weights.c, self.type_weights.n)}, "
                f"model declares {(self.c, self.n)}"
            )

    def is_permutation(self) -> bool:
        """True for the law of a uniformly random permutation of 0..n-1."""
        support = self.type_weights.support
        return self.c == self.n and len(support) == 1 and support[0][0].is_uniform()


def _as_measure(weights: WeightsLike) -> MixingMeasure:
    if isinstance(weights, MixingMeasure):
        return weights
    items = weights.items() if isinstance(weights, Mapping) else weights
    return MixingMeasure(tuple((UrnComposition(tuple(s)), Fraction(w)) for s, w in items))


def model_from_weights(c: int, n: int, weights: WeightsLike) -> ExchangeableModel:
    measure = _as_measure(weights)
    for urn, _ in measure.support:
        if urn.c != c:
            raise ValueError(f"type {urn.counts} has {urn.c} colours, alphabet_size is {c}")
        if urn.n != n:
            raise ValueError(f"type {urn.counts} sums to {urn.n}, n is {n}")
    return ExchangeableModel(c, n, measure)


def model_random_permutation(n: int) -> ExchangeableModel:
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    return model_from_weights(n, n, {(1,) * n: 1})


def model_iid_mixture(components: Sequence[tuple[Sequence[Any], Any]], n: int) -> ExchangeableModel:
    """Exchangeable law of ``n`` draws from a finite mixture of i.i.d. laws.

    Each component is ``(probability vector, weight)``; the type weight of
    ``l`` is the mixture probability of observing composition ``l``.
    """
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    if not components:
        raise ValueError("need at least one component")
    vectors = [tuple(Fraction(x) for x in vec) for vec, _ in components]
    weights = [Fraction(w) for _, w in components]
    c = len(vectors[0])
    for vec in vectors:
        if len(vec) != c:
            raise ValueError("component vectors differ in length")
        if any(x < 0 for x in vec) or sum(vec) != 1:
            raise ValueError(f"component {vec} is not a probability vector")
    if any(w < 0 for w in weights) or sum(weights) != 1:
        raise ValueError(f"component weights {weights} are not a probability vector")
    type_weights: dict[Composition, Fraction] = defaultdict(Fraction)
    for vec, w in zip(vectors, weights):
        caps = tuple(n if x > 0 else 0 for x in vec)
        for ell in enumerate_compositions(c, n, caps):
            mass = Fraction(multinomial_coeff(n, ell))
            for x, part in zip(vec, ell):
                mass *= x ** part
            type_weights[ell] += w * mass
    return model_from_weights(c, n, type_weights)


def model_from_joint_pmf(c: int, n: int, pmf: Mapping[Sequence[int], Any]) -> ExchangeableModel:
    """Collapse a joint p.m.f. on sequences to type weights.

    The p.m.f. must be exchangeable: constant on every type class (missing
    sequences count as probability zero).
    """
    by_class: dict[Composition, dict[tuple[int, ...], Fraction]] = defaultdict(dict)
    for seq, p in pmf.items():
        seq = tuple(seq)
        p = Fraction(p)
        if len(seq) != n or any(not 0 <= x < c for x in seq):
            raise ValueError(f"{seq} is not a sequence of length {n} over {c} colours")
        if p < 0:
            raise ValueError(f"negative probability at {seq}")
        counts = [0] * c
        for x in seq:
            counts[x] += 1
        by_class[tuple(counts)][seq] = p
    weights = {}
    for ell, members in by_class.items():
        mass = sum(members.values(), Fraction(0))
        if mass == 0:
            continue
        values = set(members.values())
        if len(values) != 1 or len(members) != multinomial_coeff(n, ell):
            raise ValueError(f"p.m.f. is not exchangeable: not constant on the type class {ell}")
        weights[ell] = mass
    return model_from_weights(c, n, weights)


@lru_cache(maxsize=8192)
def _h(urn: UrnComposition, k: int) -> SequenceTypeDist:
    return hypergeom_sequence(urn, k)


@lru_cache(maxsize=8192)
def _b(urn: UrnComposition, k: int) -> SequenceTypeDist:
    return multinom_sequence(urn, k)


def _check_k(k: int, n: int) -> None:
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n = {n}, got k = {k}")


def marginal(model: ExchangeableModel, k: int) -> SequenceTypeDist:
    """Law P_k of the first ``k`` coordinates: a mixture of draws without replacement."""
    _check_k(k, model.n)
    per: dict[Composition, Fraction] = defaultdict(Fraction)
    for urn, w in model.type_weights.support:
        for s, v in _h(urn, k).per_sequence.items():
            per[s] += w * v
    return SequenceTypeDist(model.c, k, per, label=f"P_{k}")


def empirical_mixing(model: ExchangeableModel) -> MixingMeasure:
    """Law of the empirical type, which is exactly the type-weight measure."""
    return model.type_weights


def iid_mixture_dist(mu: MixingMeasure, k: int) -> SequenceTypeDist:
    """M_{k,mu}: average over mu of the product laws Q**k."""
    if k < 1:
        raise ValueError(f"need k >= 1, got {k}")
    per: dict[Composition, Fraction] = defaultdict(Fraction)
    for urn, w in mu.support:
        for s, v in _b(urn, k).per_sequence.items():
            per[s] += w * v
    return SequenceTypeDist(mu.c, k, per, label=f"M_{k}")


def definetti_gap(model: ExchangeableModel, k: int, metric: str = KL,
                  min_bits: int = DEFAULT_BITS) -> DivergenceValue:
    """Divergence between P_k and the i.i.d. mixture under the empirical mixing measure."""
    if metric not in (KL, TV_L1):
        raise ValueError(f"unknown metric {metric!r}")
    p_k = marginal(model, k)
    m_k = iid_mixture_dist(empirical_mixing(model), k)
    return divergence(p_k, m_k, metric, min_bits)


def entropy_first_coordinate(model: ExchangeableModel, min_bits: int = DEFAULT_BITS) -> PrecisionFloat:
    """Shannon entropy (nats) of X_1."""
    total = PrecisionFloat.exact(0)
    for p in model.type_weights.mean():
        if p > 0:
            total = total + log_rational(1 / p, min_bits) * p
    return total


def model_to_dict(model: ExchangeableModel) -> dict[str, Any]:
    return {
        "alphabet_size": model.c,
        "n": model.n,
        "type_weights": [
            {"counts": list(urn.counts), "weight": format_rational(w)}
            for urn, w in model.type_weights.support
        ],
    }


def _require_int(data: Mapping[str, Any], key: str) -> int:
    if key not in data:
        raise ValueError(f"model is missing {key!r}")
    value = data[key]
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise ValueError(f"{key} must be a positive integer, got {value!r}")
    return value


def model_from_dict(data: Mapping[str, Any]) -> ExchangeableModel:
    """Validate and load the JSON model schema."""
    if not isinstance(data, Mapping):
        raise ValueError("model must be a JSON object")
    c = _require_int(data, "alphabet_size")
    n = _require_int(data, "n")
    entries = data.get("type_weights")
    if not isinstance(entries, list) or not entries:
        raise ValueError("type_weights must be a nonempty list")
    weights = []
    for entry in entries:
        if not isinstance(entry, Mapping) or "counts" not in entry or "weight" not in entry:
            raise ValueError(f"type_weights entry {entry!r} needs 'counts' and 'weight'")
        counts = entry["counts"]
        if not isinstance(counts, list) or not all(isinstance(x, int) and not isinstance(x, bool) for x in counts):
            raise ValueError(f"counts must be a list of integers, got {counts!r}")
        weights.append((tuple(counts), parse_rational(entry["weight"])))
    return model_from_weights(c, n, weights)


def load_model(path: str | PathLike[str]) -> ExchangeableModel:
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"invalid JSON in {path}: {exc}") from exc
    return model_from_dict(data)


def dump_model(model: ExchangeableModel) -> str:
    return json.dumps(model_to_dict(model), indent=2, sort_keys=True) + "\n"


def _random_vector(rng: random.Random, c: int, denom: int) -> tuple[Fraction, ...]:
    cuts = sorted(rng.randint(0, denom) for _ in range(c - 1))
    edges = [0, *cuts, denom]
    return tuple(Fraction(b - a, denom) for a, b in zip(edges, edges[1:]))


def random_models(count: int, seed: int = DEFAULT_SEED, *, c_max: int = 3, n_max: int = 10,
                  c_min: int = 2, n_min: int = 2) -> list[ExchangeableModel]:
    """Reproducible pseudo-random exchangeable models with rational weights.

    About three quarters put random integer weights on a random handful of
    type classes; the rest are finite i.i.d. mixtures with random rational
    components, which spread mass over every type.
    """
    rng = random.Random(seed)
    models = []
    for _ in range(count):
        c = rng.randint(c_min, c_max)
        n = rng.randint(n_min, n_max)
        if rng.random() < 0.25:
            parts = rng.randint(1, 3)
            raw = [rng.randint(1, 5) for _ in range(parts)]
            comps = [(_random_vector(rng, c, rng.randint(1, 6)), Fraction(r, sum(raw))) for r in raw]
            models.append(model_iid_mixture(comps, n))
            continue
        types = enumerate_compositions(c, n)
        chosen = rng.sample(types, rng.randint(1, min(len(types), 6)))
        raw = [rng.randint(1, 12) for _ in chosen]
        models.append(model_from_weights(c, n, {s: Fraction(r, sum(raw)) for s, r in zip(chosen, raw)}))
    return models
