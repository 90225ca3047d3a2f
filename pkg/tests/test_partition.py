import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from widthlab import (
    DyadicCube,
    SolverError,
    build_partition,
    entropy_slope,
    lebesgue,
)
from widthlab.coarse import j_log2
from widthlab.measures import AtomicMeasure, IfsMap, IfsMeasure


def naive_partition(model, rho, t, max_level=16):
    """Independent oracle: level-filter construction straight from the rule."""
    out = []
    frontier = [(DyadicCube(0, (0,) * model.m), Fraction(1))]
    if math.log2(t) > 0:
        return [DyadicCube(0, (0,) * model.m)]
    for _ in range(max_level + 1):
        nxt = []
        for cube, mass in frontier:
            for child in [c for c in _children_with_mass(model, cube)]:
                cc, mu = child
                if j_log2(model, cc, rho) < math.log2(t):
                    if j_log2(model, cube, rho) >= math.log2(t):
                        out.append(cc)
                else:
                    nxt.append(child)
        frontier = nxt
        if not frontier:
            break
    assert not frontier, "oracle ran past max_level"
    return sorted(out, key=lambda c: (c.level, c.index))


def _children_with_mass(model, cube):
    return model.positive_children(cube)


def test_lebesgue_partition_example(leb1):
    part = build_partition(leb1, 1.0, 2.0**-6)
    assert part.card == 16
    assert part.min_level == part.max_level == 4
    assert not part.degenerate


def test_degenerate_threshold(leb1):
    part = build_partition(leb1, 1.0, 2.0)
    assert part.degenerate and part.card == 1
    assert part.cells[0] == DyadicCube(0, (0,))


def test_quarter_cantor_partition_derived(quarter_cantor):
    # level-3 cells have mass 1/4, J = 2^-5 < 2^-4 while their level-2
    # parents have J = 2^-3 >= 2^-4: the partition stops at level 3
    part = build_partition(quarter_cantor, 1.0, 2.0**-4)
    assert part.card == 4
    assert part.min_level == part.max_level == 3
    assert part.cells == tuple(naive_partition(quarter_cantor, 1.0, 2.0**-4))


def test_partition_matches_naive_oracle(tetrahedron, quarter_cantor, binomial_cascade):
    cases = [
        (lebesgue(2), 1.0, 0.01),
        (quarter_cantor, 1.0, 2.0**-7),
        (binomial_cascade, 0.5, 2.0**-5),
        (tetrahedron, 2.0, 2.0**-9),
    ]
    for model, rho, t in cases:
        part = build_partition(model, rho, t)
        assert part.cells == tuple(naive_partition(model, rho, t))


def test_partition_invariants(binomial_cascade):
    rho, t = 1.0, 2.0**-8
    part = build_partition(binomial_cascade, rho, t)
    log_t = math.log2(t)
    total = Fraction(0)
    for cell in part.cells:
        assert j_log2(binomial_cascade, cell, rho) < log_t
        assert j_log2(binomial_cascade, cell.parent(), rho) >= log_t
        total += binomial_cascade.mass(cell)
    assert total == 1
    # pairwise disjoint: no cell is an ancestor of another
    for i, a in enumerate(part.cells):
        for b in part.cells[i + 1 :]:
            lo, hi = (a, b) if a.level <= b.level else (b, a)
            assert hi.ancestor(lo.level) != lo


def test_monotone_j_along_refinement(binomial_cascade):
    for cube, _ in binomial_cascade.enumerate_positive(5):
        parent_j = j_log2(binomial_cascade, cube.parent(), 1.0)
        assert j_log2(binomial_cascade, cube, 1.0) <= parent_j + 1e-12


def test_card_nonincreasing_in_t(quarter_cantor):
    ts = [2.0**-k for k in range(2, 12)]
    cards = [build_partition(quarter_cantor, 1.0, t).card for t in ts]
    assert all(a <= b for a, b in zip(cards, cards[1:]))


def test_level_spread_bounded_for_single_ratio(quarter_cantor):
    spreads = [
        (lambda p: p.max_level - p.min_level)(
            build_partition(quarter_cantor, 1.0, 2.0**-k)
        )
        for k in range(3, 16)
    ]
    assert max(spreads) <= 2


def test_entropy_slope_lebesgue(leb1):
    fit = entropy_slope(leb1, 1.0, [4.0**-k for k in range(2, 11)])
    assert fit.slope == pytest.approx(0.5, abs=0.02)


def test_entropy_slope_quarter_cantor(quarter_cantor):
    fit = entropy_slope(quarter_cantor, 1.0, [2.0**-k for k in range(3, 18)])
    assert fit.slope == pytest.approx(1 / 3, abs=0.03)


def test_entropy_slope_tetrahedron(tetrahedron):
    from widthlab import closed_form_spectrum, s_b_solve

    fit = entropy_slope(tetrahedron, 2.0, [2.0**-(3 * k) for k in range(2, 9)])
    target = s_b_solve(closed_form_spectrum(tetrahedron), 2.0)
    assert fit.slope == pytest.approx(target, abs=0.05)


def test_entropy_slope_needs_enough_points(leb1):
    with pytest.raises(SolverError):
        entropy_slope(leb1, 1.0, [0.1, 0.01])
    with pytest.raises(SolverError):
        entropy_slope(leb1, 1.0, [0.5, 0.25, 0.125])  # under three decades


@given(st.integers(1, 9), st.integers(2, 10))
@settings(max_examples=25, deadline=None)
def test_partition_oracle_randomized(num, k):
    a = Fraction(num, 10)
    model = IfsMeasure([IfsMap(1, (0,)), IfsMap(1, (1,))], [a, 1 - a])
    t = 2.0**-k
    part = build_partition(model, 1.0, t)
    assert part.cells == tuple(naive_partition(model, 1.0, t))
