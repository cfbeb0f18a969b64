"""Sampling with and without replacement from a finite coloured urn.

An urn holds ``counts[j]`` balls of colour ``j``.  Drawing ``k`` balls
without replacement gives the multivariate hypergeometric law, drawing with
replacement the multinomial law.  Both are kept at composition level (how
many balls of each colour were drawn); the sequence-level laws are
exchangeable, hence constant on each composition class, and are stored as
one probability per class rather than materialised over all ``c**k``
sequences.

Compositions are plain tuples of ints and are always listed in the same
deterministic order: first part descending, then recursively.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence, Tuple

from .arith import binomial, falling_factorial, multinomial_coeff

__all__ = [
    "Composition",
    "CompositionDist",
    "SequenceTypeDist",
    "UrnComposition",
    "canonical_key",
    "enumerate_compositions",
    "hypergeom_composition",
    "hypergeom_sequence",
    "multinom_composition",
    "multinom_sequence",
    "to_composition_level",
    "to_sequence_level",
    "urn_from_ntype",
]

Composition = Tuple[int, ...]


def canonical_key(s: Composition) -> tuple[int, ...]:
    """Sort key reproducing the enumeration order of compositions."""
    return tuple(-x for x in s)


@dataclass(frozen=True)
class UrnComposition:
    """Colour counts of an urn; colours with zero balls are allowed."""

    counts: tuple[int, ...]

    def __post_init__(self) -> None:
        counts = tuple(int(x) for x in self.counts)
        object.__setattr__(self, "counts", counts)
        if len(counts) < 1:
            raise ValueError("an urn needs at least one colour")
        if any(x < 0 for x in counts):
            raise ValueError(f"negative colour count in {counts}")
        if sum(counts) < 1:
            raise ValueError("an urn needs at least one ball")

    @property
    def c(self) -> int:
        return len(self.counts)

    @property
    def n(self) -> int:
        return sum(self.counts)

    def ntype(self) -> tuple[Fraction, ...]:
        """The n-type Q with Q(j) = counts[j] / n."""
        n = self.n
        return tuple(Fraction(x, n) for x in self.counts)

    def is_uniform(self) -> bool:
        """True for the urn of n balls in n distinct colours."""
        return all(x == 1 for x in self.counts)

    def __str__(self) -> str:
        return ",".join(str(x) for x in self.counts)


@lru_cache(maxsize=4096)
def _compositions(c: int, k: int, caps: tuple[int, ...] | None) -> tuple[Composition, ...]:
    if c == 1:
        if caps is not None and k > caps[0]:
            return ()
        return ((k,),)
    top = k if caps is None else min(k, caps[0])
    rest_caps = None if caps is None else caps[1:]
    out: list[Composition] = []
    for first in range(top, -1, -1):
        for tail in _compositions(c - 1, k - first, rest_caps):
            out.append((first,) + tail)
    return tuple(out)


def enumerate_compositions(
    c: int, k: int, caps: UrnComposition | Sequence[int] | None = None
) -> list[Composition]:
    """All compositions of ``k`` into ``c`` nonnegative parts.

    With ``caps`` only those with ``s[j] <= caps[j]`` are kept; infeasible
    caps give an empty list.
    """
    if c < 1:
        raise ValueError(f"need c >= 1, got {c}")
    if k < 0:
        raise ValueError(f"need k >= 0, got {k}")
    cap_tuple = None
    if caps is not None:
        cap_tuple = tuple(caps.counts if isinstance(caps, UrnComposition) else caps)
        if len(cap_tuple) != c:
            raise ValueError(f"caps {cap_tuple} do not have {c} parts")
    return list(_compositions(c, k, cap_tuple))


def _validate_keys(entries: Mapping[Composition, Fraction], c: int, k: int) -> None:
    for s, p in entries.items():
        if len(s) != c or sum(s) != k or any(x < 0 for x in s):
            raise ValueError(f"key {s} is not a composition of {k} into {c} parts")
        if p < 0:
            raise ValueError(f"negative probability {p} at {s}")


def _freeze(entries: Mapping[Composition, Fraction]) -> Mapping[Composition, Fraction]:
    ordered = sorted(((tuple(s), Fraction(p)) for s, p in entries.items() if p != 0),
                     key=lambda item: canonical_key(item[0]))
    return MappingProxyType(dict(ordered))


@dataclass(frozen=True)
class CompositionDist:
    """Law of the colour composition of ``k`` draws over ``c`` colours.

    Only strictly positive entries are stored; a missing key has
    probability zero.  ``n`` records the urn size when there is one.
    """

    c: int
    k: int
    probs: Mapping[Composition, Fraction]
    n: int | None = None
    label: str = field(default="", compare=False)

    def __post_init__(self) -> None:
        _validate_keys(self.probs, self.c, self.k)
        object.__setattr__(self, "probs", _freeze(self.probs))
        total = sum(self.probs.values(), Fraction(0))
        if total != 1:
            raise ValueError(f"probabilities sum to {total}, not 1")

    def __getitem__(self, s: Composition) -> Fraction:
        return self.probs.get(tuple(s), Fraction(0))

    def support(self) -> list[Composition]:
        return list(self.probs)


@dataclass(frozen=True)
class SequenceTypeDist:
    """An exchangeable law on sequences of length ``k``.

    ``per_sequence[s]`` is the probability of any single sequence whose
    composition is ``s``; the class of ``s`` holds
    ``multinomial_coeff(k, s)`` such sequences.
    """

    c: int
    k: int
    per_sequence: Mapping[Composition, Fraction]
    label: str = field(default="", compare=False)

    def __post_init__(self) -> None:
        _validate_keys(self.per_sequence, self.c, self.k)
        object.__setattr__(self, "per_sequence", _freeze(self.per_sequence))
        total = sum((multinomial_coeff(self.k, s) * p for s, p in self.per_sequence.items()),
                    Fraction(0))
        if total != 1:
            raise ValueError(f"class masses sum to {total}, not 1")

    def __getitem__(self, s: Composition) -> Fraction:
        return self.per_sequence.get(tuple(s), Fraction(0))

    def class_mass(self, s: Composition) -> Fraction:
        return multinomial_coeff(self.k, s) * self[s]

    def sequence_prob(self, x: Iterable[int]) -> Fraction:
        """Probability of the colour sequence ``x`` (colours 0..c-1)."""
        x = tuple(x)
        if len(x) != self.k:
            raise ValueError(f"sequence {x} does not have length {self.k}")
        counts = [0] * self.c
        for colour in x:
            counts[colour] += 1
        return self[tuple(counts)]


def _check_draws(urn: UrnComposition, k: int, *, with_replacement: bool) -> None:
    if k < 0:
        raise ValueError(f"need k >= 0, got {k}")
    if not with_replacement and k > urn.n:
        raise ValueError(f"cannot draw k={k} balls without replacement from n={urn.n}")


def hypergeom_composition(urn: UrnComposition, k: int) -> CompositionDist:
    """Composition law of ``k`` draws without replacement."""
    _check_draws(urn, k, with_replacement=False)
    total = binomial(urn.n, k)
    probs = {}
    for s in enumerate_compositions(urn.c, k, urn.counts):
        num = 1
        for ell, part in zip(urn.counts, s):
            num *= binomial(ell, part)
        probs[s] = Fraction(num, total)
    return CompositionDist(urn.c, k, probs, urn.n, label=f"H({urn};k={k})")


def _present_caps(urn: UrnComposition, k: int) -> tuple[int, ...]:
    return tuple(k if ell > 0 else 0 for ell in urn.counts)


def multinom_composition(urn: UrnComposition, k: int) -> CompositionDist:
    """Composition law of ``k`` draws with replacement."""
    _check_draws(urn, k, with_replacement=True)
    total = urn.n ** k
    probs = {}
    for s in enumerate_compositions(urn.c, k, _present_caps(urn, k)):
        num = multinomial_coeff(k, s)
        for ell, part in zip(urn.counts, s):
            num *= ell ** part
        probs[s] = Fraction(num, total)
    return CompositionDist(urn.c, k, probs, urn.n, label=f"B({urn};k={k})")


def hypergeom_sequence(urn: UrnComposition, k: int) -> SequenceTypeDist:
    """Sequence-level law without replacement via falling factorials.

    A particular ordered draw of composition ``s`` has probability
    ``prod_j (l_j)_(s_j) / (n)_k``.
    """
    _check_draws(urn, k, with_replacement=False)
    total = falling_factorial(urn.n, k)
    per = {}
    for s in enumerate_compositions(urn.c, k, urn.counts):
        num = 1
        for ell, part in zip(urn.counts, s):
            num *= falling_factorial(ell, part)
        per[s] = Fraction(num, total)
    return SequenceTypeDist(urn.c, k, per, label=f"h({urn};k={k})")


def multinom_sequence(urn: UrnComposition, k: int) -> SequenceTypeDist:
    """Sequence-level law with replacement, the product law Q**k."""
    _check_draws(urn, k, with_replacement=True)
    total = urn.n ** k
    per = {}
    for s in enumerate_compositions(urn.c, k, _present_caps(urn, k)):
        num = 1
        for ell, part in zip(urn.counts, s):
            num *= ell ** part
        per[s] = Fraction(num, total)
    return SequenceTypeDist(urn.c, k, per, label=f"b({urn};k={k})")


def to_sequence_level(dist: CompositionDist) -> SequenceTypeDist:
    per = {s: p / multinomial_coeff(dist.k, s) for s, p in dist.probs.items()}
    return SequenceTypeDist(dist.c, dist.k, per, label=dist.label.lower())


def to_composition_level(dist: SequenceTypeDist, n: int | None = None) -> CompositionDist:
    probs = {s: dist.class_mass(s) for s in dist.per_sequence}
    return CompositionDist(dist.c, dist.k, probs, n, label=dist.label.upper())


def urn_from_ntype(q: Sequence[Fraction | int | str], n: int) -> UrnComposition:
    """Turn an n-type into colour counts ``n * Q(j)``."""
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    q = [Fraction(x) for x in q]
    if sum(q) != 1:
        raise ValueError(f"Q sums to {sum(q)}, not 1")
    counts = []
    for j, qj in enumerate(q):
        scaled = qj * n
        if qj < 0 or scaled.denominator != 1:
            raise ValueError(f"Q is not an {n}-type: n*Q({j}) = {scaled}")
        counts.append(int(scaled))
    return UrnComposition(tuple(counts))
