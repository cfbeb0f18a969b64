"""Total variation and relative entropy between exchangeable laws.

Total variation uses the L1 convention throughout: the sum of absolute
pointwise differences, i.e. twice the largest difference over events, with
range [0, 2].  For sequence-level laws every composition class contributes
its multiplicity times the per-sequence term, so nothing is ever summed over
all ``c**k`` sequences.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

from .arith import DEFAULT_BITS, PrecisionFloat, log_rational, multinomial_coeff, sqrt_rational
from .urns import Composition, CompositionDist, SequenceTypeDist, canonical_key

__all__ = [
    "DivergenceValue",
    "PinskerRecord",
    "coarsen",
    "divergence",
    "kl_from_masses",
    "kl_terms",
    "pinsker_holds",
    "pinsker_slack",
    "relative_entropy",
    "total_variation",
    "tv_from_masses",
]

Dist = Union[CompositionDist, SequenceTypeDist]

TV_L1 = "TV_L1"
KL = "KL"


@dataclass(frozen=True)
class DivergenceValue:
    metric: str
    value: Fraction | PrecisionFloat

    @property
    def infinite(self) -> bool:
        return isinstance(self.value, PrecisionFloat) and self.value.infinite


def _check_pair(p: Dist, q: Dist) -> None:
    if type(p) is not type(q):
        raise TypeError(f"cannot compare {type(p).__name__} with {type(q).__name__}")
    if (p.c, p.k) != (q.c, q.k):
        raise ValueError(f"context mismatch: (c, k) = {(p.c, p.k)} vs {(q.c, q.k)}")


def _values(d: Dist):
    return d.probs if isinstance(d, CompositionDist) else d.per_sequence


def _multiplicity(d: Dist, s: Composition) -> int:
    """Number of outcomes in the class of ``s``: 1 at composition level."""
    return 1 if isinstance(d, CompositionDist) else multinomial_coeff(d.k, s)


def _union_keys(p: Dist, q: Dist) -> list[Composition]:
    return sorted(set(_values(p)) | set(_values(q)), key=canonical_key)


def total_variation(p: Dist, q: Dist) -> Fraction:
    """Exact L1 distance between two laws of the same kind and shape."""
    _check_pair(p, q)
    vp, vq = _values(p), _values(q)
    zero = Fraction(0)
    return sum((_multiplicity(p, s) * abs(vp.get(s, zero) - vq.get(s, zero))
                for s in _union_keys(p, q)), zero)


def kl_terms(p: Dist, q: Dist) -> list[tuple[Fraction, Fraction | None]]:
    """The terms of D(p||q) as (mass, likelihood ratio) pairs.

    One pair per outcome class with p > 0, in canonical order; the ratio is
    ``None`` where q vanishes.  The divergence is
    ``sum(mass * log(ratio))``.
    """
    _check_pair(p, q)
    vp, vq = _values(p), _values(q)
    terms = []
    for s, pv in vp.items():
        qv = vq.get(s, 0)
        terms.append((_multiplicity(p, s) * pv, pv / qv if qv else None))
    return terms


def _kl_from_terms(terms: Iterable[tuple[Fraction, Fraction | None]], min_bits: int) -> PrecisionFloat:
    grouped: dict[Fraction, Fraction] = defaultdict(Fraction)
    for mass, ratio in terms:
        if mass == 0:
            continue
        if ratio is None:
            return PrecisionFloat.inf()
        grouped[ratio] += mass
    total = PrecisionFloat.exact(0)
    for ratio in sorted(grouped):
        total = total + log_rational(ratio, min_bits) * grouped[ratio]
    return total


def relative_entropy(p: Dist, q: Dist, min_bits: int = DEFAULT_BITS) -> PrecisionFloat:
    """D(p||q) in nats, with an accumulated absolute error bound.

    Likelihood ratios are formed exactly; terms sharing a ratio are merged
    before taking a single logarithm.
    """
    return _kl_from_terms(kl_terms(p, q), min_bits)


def tv_from_masses(a: Sequence[Fraction], b: Sequence[Fraction]) -> Fraction:
    if len(a) != len(b):
        raise ValueError("mass vectors differ in length")
    return sum((abs(x - y) for x, y in zip(a, b)), Fraction(0))


def kl_from_masses(a: Sequence[Fraction], b: Sequence[Fraction],
                   min_bits: int = DEFAULT_BITS) -> PrecisionFloat:
    """D(a||b) for two plain probability vectors (e.g. coarsened laws)."""
    if len(a) != len(b):
        raise ValueError("mass vectors differ in length")
    return _kl_from_terms(((x, x / y if y else None) for x, y in zip(a, b)), min_bits)


def divergence(p: Dist, q: Dist, metric: str, min_bits: int = DEFAULT_BITS) -> DivergenceValue:
    if metric == TV_L1:
        return DivergenceValue(TV_L1, total_variation(p, q))
    if metric == KL:
        return DivergenceValue(KL, relative_entropy(p, q, min_bits))
    raise ValueError(f"unknown metric {metric!r}")


def pinsker_holds(tv: Fraction, kl: PrecisionFloat) -> bool:
    """TV <= sqrt(2 KL), decided exactly as TV**2 <= 2 * (upper end of KL)."""
    if kl.infinite:
        return True
    return tv * tv <= 2 * kl.upper


@dataclass(frozen=True)
class PinskerRecord:
    tv: Fraction
    sqrt_2kl: PrecisionFloat
    holds: bool


def pinsker_slack(p: Dist, q: Dist, min_bits: int = DEFAULT_BITS) -> PinskerRecord:
    tv = total_variation(p, q)
    kl = relative_entropy(p, q, min_bits)
    return PinskerRecord(tv, sqrt_rational(kl * 2, min_bits), pinsker_holds(tv, kl))


def coarsen(p: Dist, partition: Sequence[Iterable[Composition]]) -> tuple[Fraction, ...]:
    """Masses of ``p`` on the cells of a partition of composition classes.

    Cells must be pairwise disjoint and together cover the support of ``p``.
    To compare two laws, coarsen both with one partition covering the union
    of their supports.
    """
    cells = [frozenset(tuple(s) for s in cell) for cell in partition]
    seen: set[Composition] = set()
    for cell in cells:
        overlap = seen & cell
        if overlap:
            raise ValueError(f"partition cells overlap on {sorted(overlap)[0]}")
        seen |= cell
    values = _values(p)
    uncovered = set(values) - seen
    if uncovered:
        raise ValueError(f"partition does not cover {sorted(uncovered, key=canonical_key)[0]}")
    return tuple(
        sum((_multiplicity(p, s) * values[s] for s in cell if s in values), Fraction(0))
        for cell in cells
    )
