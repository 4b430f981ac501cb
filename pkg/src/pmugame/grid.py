"""Power network model and base-case DC power flow.

Buses are integer ids, lines are undirected with a per-unit reactance, and
all angles are radians.  Lines are stored with canonical (min, max) endpoint
ordering; the sign of a line flow follows that direction.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "GridError",
    "Grid",
    "Placement",
    "BaseState",
    "load_grid",
    "adjacency",
    "dc_power_flow",
    "propagate_angle",
]


class GridError(ValueError):
    """Raised on malformed grid documents or invariant violations."""


def _canon(i, j):
    return (i, j) if i < j else (j, i)


@dataclass(frozen=True)
class Grid:
    """Immutable bus/line model with injections and zero-injection flags."""

    buses: tuple[int, ...]
    lines: tuple[tuple[int, int, float], ...]  # (i, j, x) with i < j
    injections: dict[int, float]
    zib: frozenset[int]
    slack: int
    weights: dict[int, float] = field(default_factory=dict)

    def __post_init__(self):
        bus_set = set(self.buses)
        if len(bus_set) != len(self.buses):
            raise GridError("duplicate bus ids")
        if self.slack not in bus_set:
            raise GridError(f"slack bus {self.slack} is not a bus")
        seen = set()
        for i, j, x in self.lines:
            if i == j:
                raise GridError(f"line {i}-{j} has identical endpoints")
            if i not in bus_set or j not in bus_set:
                raise GridError(f"line {i}-{j} references unknown bus")
            if (i, j) != _canon(i, j):
                raise GridError(f"line {i}-{j} not canonically ordered")
            if (i, j) in seen:
                raise GridError(f"duplicate line {i}-{j}")
            seen.add((i, j))
            if not x > 0:
                raise GridError(f"line {i}-{j} has nonpositive reactance {x}")
        for b in self.zib:
            if b not in bus_set:
                raise GridError(f"zib bus {b} is not a bus")
            if self.injections.get(b, 0.0) != 0.0:
                raise GridError(f"zib bus {b} has nonzero injection")
        for b, w in self.weights.items():
            if b not in bus_set:
                raise GridError(f"weight for unknown bus {b}")
            if w < 0:
                raise GridError(f"negative placement weight on bus {b}")
        if not self._connected():
            raise GridError("grid graph is disconnected")

    def _connected(self):
        if not self.buses:
            return True
        adj = self.adjacency_map()
        seen = {self.buses[0]}
        stack = [self.buses[0]]
        while stack:
            for nb in adj[stack.pop()]:
                if nb not in seen:
                    seen.add(nb)
                    stack.append(nb)
        return len(seen) == len(self.buses)

    def adjacency_map(self) -> dict[int, set[int]]:
        adj = {b: set() for b in self.buses}
        for i, j, _ in self.lines:
            adj[i].add(j)
            adj[j].add(i)
        return adj

    def reactance(self, i: int, j: int) -> float:
        a, b = _canon(i, j)
        for li, lj, x in self.lines:
            if (li, lj) == (a, b):
                return x
        raise GridError(f"no line between {i} and {j}")

    def weight(self, bus: int) -> float:
        return self.weights.get(bus, 1.0)

    @property
    def n(self):
        return len(self.buses)


@dataclass(frozen=True)
class Placement:
    """A set of PMU-hosting buses plus per-bus installation weights."""

    pmu_buses: frozenset[int]
    weights: dict[int, float] = field(default_factory=dict)

    def cost(self) -> float:
        return sum(self.weights.get(b, 1.0) for b in self.pmu_buses)

    def validate(self, grid: Grid):
        unknown = self.pmu_buses - set(grid.buses)
        if unknown:
            raise GridError(f"placement references unknown buses {sorted(unknown)}")

    def non_pmu(self, grid: Grid) -> list[int]:
        return sorted(set(grid.buses) - self.pmu_buses)

    def to_document(self, zib_used: bool) -> dict:
        return {
            "pmu_buses": sorted(self.pmu_buses),
            "cost": self.cost(),
            "zib_used": bool(zib_used),
        }


@dataclass(frozen=True)
class BaseState:
    """Solved phase angles and the line flows they imply."""

    theta: dict[int, float]
    flows: dict[tuple[int, int], float]  # keyed by canonical (i, j)

    def flow(self, i: int, j: int) -> float:
        """Signed flow from i to j."""
        a, b = _canon(i, j)
        f = self.flows[(a, b)]
        return f if (i, j) == (a, b) else -f


def load_grid(source) -> Grid:
    """Parse a grid document (JSON text, path, or parsed dict) into a Grid.

    Raises GridError with the offending field named for both parse and
    validation failures.
    """
    if isinstance(source, dict):
        doc = source
    else:
        text = source
        if hasattr(source, "read"):
            text = source.read()
        elif "\n" not in str(source) and str(source).endswith(".grid"):
            with open(source) as fh:
                text = fh.read()
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise GridError(f"grid document is not valid JSON: {exc}") from exc

    for key in ("buses", "lines", "slack"):
        if key not in doc:
            raise GridError(f"grid document missing required key '{key}'")

    buses, injections, zib = [], {}, set()
    for k, entry in enumerate(doc["buses"]):
        try:
            bid = int(entry["id"])
        except (KeyError, TypeError, ValueError) as exc:
            raise GridError(f"buses[{k}]: missing or bad 'id'") from exc
        buses.append(bid)
        injections[bid] = float(entry.get("injection", 0.0))
        if entry.get("zib", False):
            zib.add(bid)

    lines = []
    for k, entry in enumerate(doc["lines"]):
        try:
            i, j = int(entry["from"]), int(entry["to"])
            x = float(entry["x"])
        except (KeyError, TypeError, ValueError) as exc:
            raise GridError(f"lines[{k}]: needs integer 'from'/'to' and numeric 'x'") from exc
        a, b = _canon(i, j)
        lines.append((a, b, x))

    weights = {int(k): float(v) for k, v in doc.get("pmu_weights", {}).items()}
    return Grid(
        buses=tuple(buses),
        lines=tuple(lines),
        injections=injections,
        zib=frozenset(zib),
        slack=int(doc["slack"]),
        weights=weights,
    )


def adjacency(grid: Grid, i: int) -> set[int]:
    """Buses sharing a line with bus i."""
    if i not in set(grid.buses):
        raise GridError(f"unknown bus id {i}")
    return grid.adjacency_map()[i]


def dc_power_flow(grid: Grid, tol: float = 1e-6) -> BaseState:
    """Solve the DC power-flow system with the slack angle pinned to zero.

    Injections must balance to zero within `tol`; the residual is charged to
    the slack bus.
    """
    total = sum(grid.injections.get(b, 0.0) for b in grid.buses)
    if abs(total) > tol:
        raise GridError(f"injections sum to {total:.3e}, exceeding tolerance {tol}")

    order = list(grid.buses)
    pos = {b: k for k, b in enumerate(order)}
    n = len(order)
    B = np.zeros((n, n))
    for i, j, x in grid.lines:
        b = 1.0 / x
        B[pos[i], pos[i]] += b
        B[pos[j], pos[j]] += b
        B[pos[i], pos[j]] -= b
        B[pos[j], pos[i]] -= b

    keep = [k for k in range(n) if order[k] != grid.slack]
    P = np.array([grid.injections.get(order[k], 0.0) for k in keep])
    Bred = B[np.ix_(keep, keep)]
    try:
        sol = np.linalg.solve(Bred, P)
    except np.linalg.LinAlgError as exc:
        raise GridError("DC power-flow system is singular (disconnected grid?)") from exc

    theta = {grid.slack: 0.0}
    for k, val in zip(keep, sol):
        theta[order[k]] = float(val)
    flows = {
        (i, j): (theta[i] - theta[j]) / x for i, j, x in grid.lines
    }
    return BaseState(theta=theta, flows=flows)


def propagate_angle(theta_i: float, p_ij: float, x_ij: float) -> float:
    """Phase angle at the far end of a line, given the near angle and flow."""
    if not x_ij > 0:
        raise GridError(f"nonpositive reactance {x_ij}")
    return theta_i - p_ij * x_ij
