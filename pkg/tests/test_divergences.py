from collections import Counter
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from definetti_bounds.arith import PrecisionFloat
from definetti_bounds.divergences import (
    KL,
    TV_L1,
    coarsen,
    divergence,
    kl_from_masses,
    kl_terms,
    pinsker_holds,
    pinsker_slack,
    relative_entropy,
    total_variation,
    tv_from_masses,
)
from definetti_bounds.urns import (
    CompositionDist,
    UrnComposition,
    enumerate_compositions,
    hypergeom_composition,
    hypergeom_sequence,
    multinom_composition,
    multinom_sequence,
)
from oracles import kl as kl_oracle
from oracles import sequence_law_with, sequence_law_without, set_partitions
from oracles import tv as tv_oracle

F = Fraction
# mpmath at 40 digits, frozen: (1/3)log(2/3) + (2/3)log(4/3).
KL_22 = "0.05663301226513249096680829884110190881169"
SQRT_2KL_22 = "0.336550181295843282945810315309337238282"


def encloses(x: PrecisionFloat, ref) -> bool:
    with mpmath.workdps(60):
        ref = mpmath.mpf(ref)
        return (mpmath.mpf(x.lower.numerator) / x.lower.denominator <= ref
                <= mpmath.mpf(x.upper.numerator) / x.upper.denominator)


def pair(counts, k, level="composition"):
    urn = UrnComposition(counts)
    if level == "composition":
        return hypergeom_composition(urn, k), multinom_composition(urn, k)
    return hypergeom_sequence(urn, k), multinom_sequence(urn, k)


URNS = [counts for c in (1, 2, 3) for n in range(1, 6) for counts in enumerate_compositions(c, n)]


def test_identical_laws():
    h, _ = pair((2, 2), 2)
    assert total_variation(h, h) == 0
    assert relative_entropy(h, h).value == 0
    record = pinsker_slack(h, h)
    assert record.tv == 0 and record.sqrt_2kl.value == 0 and record.holds


def test_urn_22_pair():
    h, b = pair((2, 2), 2)
    assert total_variation(h, b) == F(1, 3) == 2 * abs(F(1, 6) - F(1, 4)) + abs(F(2, 3) - F(1, 2))
    kl = relative_entropy(h, b)
    assert encloses(kl, KL_22)
    record = pinsker_slack(h, b)
    assert record.holds and encloses(record.sqrt_2kl, SQRT_2KL_22)
    assert divergence(h, b, TV_L1).value == F(1, 3)
    assert divergence(h, b, KL).value == kl


def test_uniform_urn_sequence_tv():
    h, b = pair((1, 1, 1), 2, "sequence")
    assert total_variation(h, b) == F(2, 3) == 2 * (1 - F(6, 9))


def test_kl_infinite_without_absolute_continuity():
    h, b = pair((1, 1, 1), 2, "sequence")
    assert relative_entropy(b, h).infinite
    assert divergence(b, h, KL).infinite
    assert pinsker_holds(F(2), relative_entropy(b, h))


def test_context_mismatch():
    h2, _ = pair((2, 2), 2)
    h1, _ = pair((2, 2), 1)
    hs, _ = pair((2, 2), 2, "sequence")
    with pytest.raises(ValueError):
        total_variation(h2, h1)
    with pytest.raises(TypeError):
        relative_entropy(h2, hs)
    with pytest.raises(ValueError):
        divergence(h2, h2, "hellinger")


def test_sequence_level_against_brute_force():
    for counts in URNS:
        for k in range(1, sum(counts) + 1):
            h, b = pair(counts, k, "sequence")
            h_ref, b_ref = sequence_law_without(counts, k), sequence_law_with(counts, k)
            assert total_variation(h, b) == tv_oracle(h_ref, b_ref)
            assert encloses(relative_entropy(h, b), kl_oracle(h_ref, b_ref))


def test_sequence_and_composition_levels_agree():
    for counts in URNS:
        for k in range(1, sum(counts) + 1):
            hs, bs = pair(counts, k, "sequence")
            hc, bc = pair(counts, k)
            assert total_variation(hs, bs) == total_variation(hc, bc)
            assert Counter(kl_terms(hs, bs)) == Counter(kl_terms(hc, bc))
            assert relative_entropy(hs, bs) == relative_entropy(hc, bc)


def test_tv_symmetry_and_triangle():
    for counts in URNS:
        n = sum(counts)
        for k in range(1, n + 1):
            h, b = pair(counts, k)
            uniform = CompositionDist(len(counts), k, {
                s: F(1, len(enumerate_compositions(len(counts), k))) for s in enumerate_compositions(len(counts), k)})
            assert total_variation(h, b) == total_variation(b, h)
            assert total_variation(h, b) <= total_variation(h, uniform) + total_variation(uniform, b)
            assert 0 <= total_variation(h, uniform) <= 2


def test_pinsker_on_small_urns():
    for counts in URNS:
        for k in range(1, sum(counts) + 1):
            assert pinsker_slack(*pair(counts, k)).holds


def test_coarsen_examples():
    h, b = pair((2, 2), 2)
    support = enumerate_compositions(2, 2)
    assert coarsen(h, [support]) == (1,)
    assert coarsen(h, [[s] for s in support]) == tuple(h[s] for s in support)
    assert coarsen(h, [[(2, 0), (0, 2)], [(1, 1)]]) == (F(1, 3), F(2, 3))
    with pytest.raises(ValueError):
        coarsen(h, [[(2, 0), (1, 1)], [(1, 1), (0, 2)]])
    with pytest.raises(ValueError):
        coarsen(h, [[(2, 0)], [(1, 1)]])


def test_data_processing_over_every_partition():
    checked = 0
    for counts in URNS:
        for k in range(1, sum(counts) + 1):
            h, b = pair(counts, k)
            cells = sorted(set(h.support()) | set(b.support()))
            if len(cells) > 6:
                continue
            tv, kl = total_variation(h, b), relative_entropy(h, b)
            for partition in set_partitions(cells):
                ch, cb = coarsen(h, partition), coarsen(b, partition)
                assert tv_from_masses(ch, cb) <= tv
                coarse = kl_from_masses(ch, cb)
                assert coarse.lower <= kl.upper
                checked += 1
    assert checked > 1000


def test_mass_vector_length_mismatch():
    with pytest.raises(ValueError):
        tv_from_masses([F(1)], [F(1, 2), F(1, 2)])
    with pytest.raises(ValueError):
        kl_from_masses([F(1)], [F(1, 2), F(1, 2)])


laws = st.sampled_from([(counts, 2) for counts in URNS if len(counts) == 2 and sum(counts) >= 2])


@settings(max_examples=200, deadline=None)
@given(laws, laws, st.fractions(min_value=0, max_value=1))
def test_joint_convexity(first, second, lam):
    p1, q1 = pair(*first)
    p2, q2 = pair(*second)

    def mix(a, b):
        keys = set(a.support()) | set(b.support())
        return CompositionDist(2, 2, {s: lam * a[s] + (1 - lam) * b[s] for s in keys})

    lhs = relative_entropy(mix(p1, p2), mix(q1, q2))
    rhs = relative_entropy(p1, q1) * lam + relative_entropy(p2, q2) * (1 - lam)
    assert lhs.lower <= rhs.upper
    assert total_variation(mix(p1, p2), mix(q1, q2)) <= \
        lam * total_variation(p1, q1) + (1 - lam) * total_variation(p2, q2)
