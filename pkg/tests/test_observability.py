"""Observability vectors, zero-injection refinement, and optimal placement."""

from itertools import combinations

import pytest

from pmugame.grid import GridError, Placement
from pmugame.observability import (
    attack_observing_count,
    observability_vector,
    observing_count,
    optimal_placement,
    zib_observability,
)

from conftest import make_grid


def test_fourbus_direct_observability(fourbus):
    # [DERIVED] PMU at 1 sees itself plus neighbors 2 and 3; bus 4 is dark.
    g = observability_vector(fourbus, Placement(pmu_buses=frozenset({1})))
    assert g == {1: 1, 2: 1, 3: 1, 4: 0}


def test_fourbus_zib_refinement(fourbus):
    # [DERIVED] bus 4 neighbors {2, 3} are observable and bus 3 is a ZIB, so
    # KCL inference closes the last gap.
    g = observability_vector(fourbus, Placement(pmu_buses=frozenset({1})))
    gp = zib_observability(fourbus, g)
    assert gp == {1: 1, 2: 1, 3: 1, 4: 1}


def test_zib_refinement_monotone_and_idempotent(small_grids):
    for grid in small_grids:
        for pmu in grid.buses:
            g = observability_vector(grid, Placement(pmu_buses=frozenset({pmu})))
            gp = zib_observability(grid, g)
            assert all(gp[b] >= g[b] for b in grid.buses)
            assert zib_observability(grid, gp) == gp


def test_zib_refinement_is_identity_without_zibs():
    g = make_grid([1, 2, 3], [(1, 2, 0.1), (2, 3, 0.1)])
    vec = observability_vector(g, Placement(pmu_buses=frozenset({1})))
    assert zib_observability(g, vec) == vec


def _oracle_placement(grid, use_zib):
    """[DERIVED] oracle: exhaustive enumeration over every PMU subset."""
    best = None
    for r in range(1, len(grid.buses) + 1):
        for combo in combinations(sorted(grid.buses), r):
            g = observability_vector(grid, Placement(pmu_buses=frozenset(combo)))
            if use_zib:
                g = zib_observability(grid, g)
            if not all(g.values()):
                continue
            cost = sum(grid.weight(b) for b in combo)
            key = (cost, tuple(sorted(combo)))
            if best is None or key < best:
                best = key
    return best


@pytest.mark.parametrize("use_zib", [False, True])
def test_optimal_placement_matches_exhaustive_oracle(small_grids, use_zib):
    for grid in small_grids:
        expected_cost, expected_set = _oracle_placement(grid, use_zib)
        got = optimal_placement(grid, use_zib=use_zib)
        assert tuple(sorted(got.pmu_buses)) == expected_set
        assert got.cost() == pytest.approx(expected_cost)


def test_fourbus_optimal_placements(fourbus):
    # [DERIVED] from the exhaustive oracle; the ZIB at bus 3 drops one PMU.
    assert sorted(optimal_placement(fourbus, use_zib=False).pmu_buses) == [1, 2]
    assert sorted(optimal_placement(fourbus, use_zib=True).pmu_buses) == [1]


def test_weights_steer_the_placement():
    # [DERIVED] hand check: with bus 2 priced out, covering via 1 and 3 wins.
    grid = make_grid(
        [1, 2, 3, 4],
        [(1, 2, 0.1), (2, 3, 0.1), (3, 4, 0.1)],
        weights={2: 10.0},
    )
    assert sorted(optimal_placement(grid).pmu_buses) == [1, 3]


def test_placement_deterministic_across_runs(ieee14):
    a = optimal_placement(ieee14, use_zib=False)
    b = optimal_placement(ieee14, use_zib=False)
    assert a.pmu_buses == b.pmu_buses


def test_observing_count_examples(fourbus):
    # [PAPER] worked example: bus 2 is seen once by {1} and twice by {1, 4}.
    assert observing_count(fourbus, Placement(pmu_buses=frozenset({1})), 2) == 1
    assert observing_count(fourbus, Placement(pmu_buses=frozenset({1, 4})), 2) == 2
    # The bus itself counts as an observer site.
    assert observing_count(fourbus, Placement(pmu_buses=frozenset({2})), 2) == 1
    with pytest.raises(GridError):
        observing_count(fourbus, Placement(pmu_buses=frozenset({1})), 99)


def test_attack_observing_count(fourbus):
    p = Placement(pmu_buses=frozenset({1, 4}))
    # [DERIVED] region of {2} is {1, 2, 4}: both PMUs observe it.
    assert attack_observing_count(fourbus, p, {2}) == 2
    assert attack_observing_count(fourbus, p, {2, 3}) == 2
    with pytest.raises(GridError):
        attack_observing_count(fourbus, p, set())
    with pytest.raises(GridError):
        attack_observing_count(fourbus, p, {99})


def test_observability_monotone_under_added_pmus(small_grids):
    # [DERIVED] invariant: an extra PMU never reduces any count or flag.
    for grid in small_grids:
        buses = sorted(grid.buses)
        base = Placement(pmu_buses=frozenset(buses[:1]))
        bigger = Placement(pmu_buses=frozenset(buses[:2]))
        gb = observability_vector(grid, base)
        gB = observability_vector(grid, bigger)
        assert all(gB[b] >= gb[b] for b in grid.buses)
        for b in grid.buses:
            assert observing_count(grid, bigger, b) >= observing_count(grid, base, b)


def test_single_line_grid_places_one_pmu():
    grid = make_grid([1, 2], [(1, 2, 0.1)])
    assert sorted(optimal_placement(grid).pmu_buses) == [1]
