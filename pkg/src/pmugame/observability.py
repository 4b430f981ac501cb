"""Bus observability predicates, observation counts, and minimal-cost PMU placement.

A bus is directly observable when it hosts a PMU or neighbors one.  Zero
injection buses extend observability: when every neighbor of a bus is
observable and the bus or one of its neighbors has zero injection, Kirchhoff's
current law pins down the remaining angle.  The refinement is iterated to a
fixpoint so that inferred buses can enable further inference.
"""

from __future__ import annotations

from .grid import Grid, GridError, Placement

__all__ = [
    "observability_vector",
    "zib_observability",
    "optimal_placement",
    "observing_count",
    "attack_observing_count",
]


def observability_vector(grid: Grid, placement: Placement) -> dict[int, int]:
    """Direct observability flag per bus: PMU on the bus or on a neighbor."""
    placement.validate(grid)
    adj = grid.adjacency_map()
    pmus = placement.pmu_buses
    return {
        m: 1 if (m in pmus or adj[m] & pmus) else 0
        for m in grid.buses
    }


def zib_observability(grid: Grid, g: dict[int, int]) -> dict[int, int]:
    """Refine an observability vector with zero-injection KCL inference.

    Iterates until no further bus becomes observable; a single pass would
    miss chains where one inferred bus unlocks the next.
    """
    adj = grid.adjacency_map()
    gp = dict(g)
    changed = True
    while changed:
        changed = False
        for m in grid.buses:
            if gp[m]:
                continue
            neighbors_ok = all(gp[k] for k in adj[m])
            near_zib = bool((adj[m] | {m}) & grid.zib)
            if neighbors_ok and near_zib:
                gp[m] = 1
                changed = True
    return gp


def _full(grid: Grid, pmus: frozenset[int], use_zib: bool) -> bool:
    g = observability_vector(grid, Placement(pmu_buses=pmus))
    if use_zib:
        g = zib_observability(grid, g)
    return all(g.values())


def optimal_placement(grid: Grid, use_zib: bool = False) -> Placement:
    """Minimal-weight PMU set achieving full (optionally ZIB-refined) observability.

    Exact branch-and-bound over the binary placement vector.  Buses are
    explored in descending degree order; a branch is pruned when its partial
    cost cannot beat the incumbent.  Cost ties resolve to the
    lexicographically smallest bus set.
    """
    if not grid.buses:
        raise GridError("cannot place PMUs on an empty grid")
    adj = grid.adjacency_map()
    order = sorted(grid.buses, key=lambda b: (-len(adj[b]), b))
    weights = {b: grid.weight(b) for b in grid.buses}

    best_cost = sum(weights.values())
    best_set = frozenset(grid.buses)
    if not _full(grid, best_set, use_zib):
        raise GridError("grid cannot be made fully observable")

    def lex_key(s):
        return tuple(sorted(s))

    def recurse(idx, chosen, cost):
        nonlocal best_cost, best_set
        if cost > best_cost + 1e-12:
            return
        if _full(grid, frozenset(chosen), use_zib):
            cand = frozenset(chosen)
            if cost < best_cost - 1e-12 or (
                abs(cost - best_cost) <= 1e-12 and lex_key(cand) < lex_key(best_set)
            ):
                best_cost, best_set = cost, cand
            return
        if idx == len(order):
            return
        b = order[idx]
        # Include-first ordering finds covers early and tightens the bound.
        chosen.append(b)
        recurse(idx + 1, chosen, cost + weights[b])
        chosen.pop()
        recurse(idx + 1, chosen, cost)

    recurse(0, [], 0.0)
    result = Placement(pmu_buses=best_set, weights=weights)
    assert _full(grid, result.pmu_buses, use_zib)
    return result


def observing_count(grid: Grid, placement: Placement, k: int) -> int:
    """Number of PMUs observing bus k: PMUs on k itself or adjacent to it."""
    if k not in set(grid.buses):
        raise GridError(f"unknown bus id {k}")
    adj = grid.adjacency_map()
    return len(placement.pmu_buses & (adj[k] | {k}))


def attack_observing_count(grid: Grid, placement: Placement, affected) -> int:
    """PMUs observing any bus in the affected set."""
    affected = set(affected)
    if not affected:
        raise GridError("affected bus set is empty")
    bus_set = set(grid.buses)
    if not affected <= bus_set:
        raise GridError(f"affected set contains unknown buses {sorted(affected - bus_set)}")
    adj = grid.adjacency_map()
    region = set()
    for i in affected:
        region |= adj[i] | {i}
    return len(placement.pmu_buses & region)
