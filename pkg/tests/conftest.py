"""Shared fixtures: bundled grids, small synthetic grids, and solved states."""

import pytest

from pmugame import data_path
from pmugame.grid import dc_power_flow, load_grid
from pmugame.observability import optimal_placement


def make_grid(buses, lines, injections=None, zib=(), slack=None, weights=None):
    """Build a grid document from terse tuples and parse it."""
    injections = injections or {}
    doc = {
        "buses": [
            {"id": b, "injection": injections.get(b, 0.0), "zib": b in zib}
            for b in buses
        ],
        "lines": [{"from": i, "to": j, "x": x} for i, j, x in lines],
        "slack": slack if slack is not None else buses[0],
    }
    if weights:
        doc["pmu_weights"] = {str(b): w for b, w in weights.items()}
    return load_grid(doc)


@pytest.fixture(scope="session")
def fourbus():
    return load_grid(data_path("fourbus.grid"))


@pytest.fixture(scope="session")
def ieee14():
    return load_grid(data_path("ieee14.grid"))


@pytest.fixture(scope="session")
def fourbus_base(fourbus):
    return dc_power_flow(fourbus)


@pytest.fixture(scope="session")
def ieee14_base(ieee14):
    return dc_power_flow(ieee14)


@pytest.fixture(scope="session")
def ieee14_placement(ieee14):
    return optimal_placement(ieee14, use_zib=False)


@pytest.fixture(scope="session")
def ieee14_placement_zib(ieee14):
    return optimal_placement(ieee14, use_zib=True)


@pytest.fixture(scope="session")
def ieee14_defenses(ieee14, ieee14_placement):
    from pmugame.game import defense_candidates

    return defense_candidates(ieee14, ieee14_placement)


@pytest.fixture(scope="session")
def ieee14_matrix(ieee14, ieee14_base, ieee14_placement, ieee14_defenses):
    from pmugame.game import AttackModel, build_payoff_matrix, enumerate_attacks

    attacks = enumerate_attacks(ieee14, ieee14_placement)
    return build_payoff_matrix(
        ieee14, ieee14_base, ieee14_placement, attacks, ieee14_defenses, AttackModel()
    )


@pytest.fixture(scope="session")
def twobus():
    # [TRIVIAL] single line forces the flow by KCL.
    return make_grid(
        [1, 2], [(1, 2, 0.1)], injections={1: 1.0, 2: -1.0}, slack=2
    )


@pytest.fixture(scope="session")
def small_grids(fourbus):
    """Grids of at most 12 buses for exhaustive-enumeration oracles."""
    path6 = make_grid(
        [1, 2, 3, 4, 5, 6],
        [(1, 2, 0.1), (2, 3, 0.2), (3, 4, 0.1), (4, 5, 0.3), (5, 6, 0.1)],
        injections={1: 0.5, 3: -0.2, 6: -0.3},
    )
    star7 = make_grid(
        [1, 2, 3, 4, 5, 6, 7],
        [(1, k, 0.1 * k) for k in range(2, 8)],
        injections={2: 0.6, 5: -0.6},
        zib=(1,),
    )
    ring8 = make_grid(
        list(range(1, 9)),
        [(k, k + 1, 0.1) for k in range(1, 8)] + [(1, 8, 0.2)],
        injections={1: 1.0, 4: -0.4, 6: -0.6},
        zib=(3, 7),
    )
    weighted5 = make_grid(
        [1, 2, 3, 4, 5],
        [(1, 2, 0.1), (2, 3, 0.1), (3, 4, 0.1), (4, 5, 0.1), (2, 4, 0.2)],
        injections={1: 0.3, 5: -0.3},
        weights={2: 5.0, 4: 0.5},
    )
    return [fourbus, path6, star7, ring8, weighted5]
