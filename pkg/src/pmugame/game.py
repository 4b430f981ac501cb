"""Attacker/defender action sets and the zero-sum payoff matrix.

The attacker picks one PMU bus and corrupts a nonempty subset of its
measurements (the bus angle and the flows of incident lines).  The defender
picks one extra PMU site.  An attack is detected when more than one PMU
observes the affected region; undetected attacks are scored by the norm of
the induced state-estimation error.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .grid import BaseState, Grid, GridError, Placement, propagate_angle
from .observability import attack_observing_count

__all__ = [
    "AttackAction",
    "DefenseAction",
    "AttackModel",
    "PayoffMatrix",
    "enumerate_attacks",
    "defense_candidates",
    "affected_buses",
    "attack_effect",
    "build_payoff_matrix",
]

THETA = "theta"  # marker for the angle measurement in `manipulated`


@dataclass(frozen=True)
class AttackAction:
    """Attack on PMU bus `u` corrupting the listed measurements.

    `manipulated` holds neighbor bus ids for flow measurements plus the
    THETA marker when the bus angle itself is corrupted.
    """

    u: int
    manipulated: tuple

    def __post_init__(self):
        if not self.manipulated:
            raise GridError("attack must manipulate at least one measurement")

    @property
    def flows(self) -> tuple[int, ...]:
        return tuple(m for m in self.manipulated if m != THETA)

    @property
    def hits_theta(self) -> bool:
        return THETA in self.manipulated

    def label(self) -> str:
        parts = [f"p{self.u}-{k}" for k in self.flows]
        if self.hits_theta:
            parts.append(f"theta{self.u}")
        return f"{self.u}:{{{','.join(parts)}}}"


@dataclass(frozen=True)
class DefenseAction:
    """Placement of the single additional PMU."""

    d: int

    def label(self) -> str:
        return str(self.d)


@dataclass(frozen=True)
class AttackModel:
    """Magnitude model for injected measurement biases.

    `absolute` mode adds fixed biases (epsilon_theta radians on an angle,
    epsilon_flow per-unit on a flow).  `relative` mode scales the bias with
    the true measurement (epsilon * measurement), which ties attack impact
    to the operating point.
    """

    epsilon_theta: float = 0.05
    epsilon_flow: float = 0.1
    norm: str = "l2"
    bias: str = "absolute"

    def __post_init__(self):
        if not (self.epsilon_theta > 0 and self.epsilon_flow > 0):
            raise GridError("attack model epsilons must be positive")
        if self.norm not in ("l1", "l2", "linf"):
            raise GridError(f"unknown norm '{self.norm}'")
        if self.bias not in ("absolute", "relative"):
            raise GridError(f"unknown bias mode '{self.bias}'")

    def flow_bias(self, true_flow: float) -> float:
        if self.bias == "absolute":
            return self.epsilon_flow
        return self.epsilon_flow * true_flow

    def theta_bias(self, true_theta: float) -> float:
        if self.bias == "absolute":
            return self.epsilon_theta
        return self.epsilon_theta * true_theta

    def reduce(self, vec: np.ndarray) -> float:
        if self.norm == "l1":
            return float(np.abs(vec).sum())
        if self.norm == "l2":
            return float(np.linalg.norm(vec))
        return float(np.abs(vec).max()) if vec.size else 0.0


@dataclass(frozen=True)
class PayoffMatrix:
    """Attacker rewards (rows: attacks, columns: defenses) with detection flags."""

    attacks: tuple[AttackAction, ...]
    defenses: tuple[DefenseAction, ...]
    values: np.ndarray  # attacker reward F_A >= 0
    detected: np.ndarray  # boolean, True forces value 0

    def __post_init__(self):
        if self.values.shape != (len(self.attacks), len(self.defenses)):
            raise GridError("payoff matrix shape mismatch")
        if self.detected.shape != self.values.shape:
            raise GridError("detection matrix shape mismatch")
        if np.any(self.values[self.detected] != 0.0):
            raise GridError("detected cells must have zero attacker reward")

    @property
    def defender_values(self) -> np.ndarray:
        return -self.values

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["attack"] + [d.label() for d in self.defenses])
        for ai, a in enumerate(self.attacks):
            row = [a.label()]
            for di in range(len(self.defenses)):
                flag = "1" if self.detected[ai, di] else "0"
                row.append(f"{self.values[ai, di]:.12g}|{flag}")
            writer.writerow(row)
        return buf.getvalue()


def enumerate_attacks(grid: Grid, placement: Placement) -> list[AttackAction]:
    """All nonempty measurement subsets for every PMU bus, in deterministic order.

    Subsets follow binary-counting order over the measurement list
    [flow to smallest neighbor, ..., flow to largest neighbor, theta].
    """
    if not placement.pmu_buses:
        raise GridError("placement has no PMUs")
    placement.validate(grid)
    adj = grid.adjacency_map()
    attacks = []
    for u in sorted(placement.pmu_buses):
        meas = [k for k in sorted(adj[u])] + [THETA]
        for mask in range(1, 1 << len(meas)):
            sub = tuple(meas[b] for b in range(len(meas)) if mask >> b & 1)
            attacks.append(AttackAction(u=u, manipulated=sub))
    return attacks


def defense_candidates(grid: Grid, placement: Placement) -> list[DefenseAction]:
    """Screen non-PMU buses down to distinct redundancy providers.

    For each candidate site the set B of singly-observed non-PMU buses that
    would become doubly observed is computed; candidates whose B sets are
    equal or nested are grouped (transitively) and only the one with the
    largest B survives, smallest bus id on ties.
    """
    non_pmu = placement.non_pmu(grid)
    if not non_pmu:
        raise GridError("no non-PMU buses available for defense")
    adj = grid.adjacency_map()
    pmus = placement.pmu_buses

    single = {
        k for k in non_pmu
        if len(pmus & (adj[k] | {k})) == 1
    }
    bsets = {
        a: frozenset(k for k in single if a in (adj[k] | {k}))
        for a in non_pmu
    }

    # Transitive closure of the "equal or nested" relation via union-find.
    parent = {a: a for a in non_pmu}

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for a1 in non_pmu:
        for a2 in non_pmu:
            if a1 < a2 and (bsets[a1] <= bsets[a2] or bsets[a2] <= bsets[a1]):
                parent[find(a1)] = find(a2)

    groups: dict[int, list[int]] = {}
    for a in non_pmu:
        groups.setdefault(find(a), []).append(a)

    chosen = []
    for members in groups.values():
        members.sort(key=lambda a: (-len(bsets[a]), a))
        chosen.append(members[0])
    return [DefenseAction(d=d) for d in sorted(chosen)]


def affected_buses(grid: Grid, placement: Placement, a: AttackAction) -> set[int]:
    """Buses whose estimated angle an attack corrupts.

    A corrupted flow measurement hits the bus at the far end of the line; a
    corrupted bus angle hits the PMU bus and every neighbor estimated from it.
    """
    adj = grid.adjacency_map()
    if a.u not in placement.pmu_buses:
        raise GridError(f"attack targets non-PMU bus {a.u}")
    for k in a.flows:
        if k not in adj[a.u]:
            raise GridError(f"attack references missing line {a.u}-{k}")
    affected = set(a.flows)
    if a.hits_theta:
        affected |= adj[a.u] | {a.u}
    return affected


def _estimate_angles(grid, base, pmus, biased_theta, biased_flow, model):
    """Re-run the one-hop angle estimation chain with possibly biased measurements.

    PMU buses report their own angle; every other bus takes the estimate of
    its lowest-indexed observing PMU via the line equation; buses with no
    direct observer fall back to KCL inference at zero-injection buses.
    """
    adj = grid.adjacency_map()
    est: dict[int, float] = {}
    for m in grid.buses:
        if m in pmus:
            theta = base.theta[m]
            if m in biased_theta:
                theta += model.theta_bias(base.theta[m])
            est[m] = theta
    for m in grid.buses:
        if m in est:
            continue
        observers = sorted(pmus & adj[m])
        if observers:
            i = observers[0]
            p = base.flow(i, m)
            if (i, m) in biased_flow:
                p += model.flow_bias(base.flow(i, m))
            est[m] = propagate_angle(est[i], p, grid.reactance(i, m))

    # KCL fallback for buses only observable through a zero-injection bus.
    pending = [m for m in grid.buses if m not in est]
    progress = True
    while pending and progress:
        progress = False
        for m in list(pending):
            for z in (adj[m] | {m}) & grid.zib:
                ring = adj[z]
                if z == m:
                    # The unobserved bus is itself the ZIB: KCL over its
                    # incident lines determines its angle directly.
                    if not all(b in est for b in ring):
                        continue
                    weights = {b: 1.0 / grid.reactance(b, m) for b in ring}
                    est[m] = sum(est[b] * w for b, w in weights.items()) / sum(
                        weights.values()
                    )
                elif all(b in est for b in (ring - {m}) | {z}):
                    # Flows into the ZIB sum to zero; solve for the one
                    # unknown incident flow, then propagate the angle.
                    known = sum(
                        (est[b] - est[z]) / grid.reactance(b, z)
                        for b in ring - {m}
                    )
                    p_mz = -known  # flow m -> z
                    est[m] = est[z] + p_mz * grid.reactance(m, z)
                else:
                    continue
                pending.remove(m)
                progress = True
                break
    if pending:
        raise GridError(f"buses {sorted(pending)} are not observable under this placement")
    return est


def attack_effect(
    grid: Grid,
    base: BaseState,
    placement: Placement,
    a: AttackAction,
    model: AttackModel,
    defense: DefenseAction | None = None,
) -> dict[int, float]:
    """Per-bus estimation error E = theta_true - theta_bad caused by an attack.

    Only buses in the affected set carry nonzero entries; everything else is
    pinned to zero by construction.
    """
    pmus = set(placement.pmu_buses)
    if defense is not None:
        pmus.add(defense.d)
    affected = affected_buses(grid, placement, a)
    biased_theta = {a.u} if a.hits_theta else set()
    biased_flow = {(a.u, k) for k in a.flows}
    bad = _estimate_angles(grid, base, frozenset(pmus), biased_theta, biased_flow, model)
    return {
        m: (base.theta[m] - bad[m]) if m in affected else 0.0
        for m in grid.buses
    }


def build_payoff_matrix(
    grid: Grid,
    base: BaseState,
    placement: Placement,
    attacks: list[AttackAction],
    defenses: list[DefenseAction],
    model: AttackModel,
) -> PayoffMatrix:
    """Assemble attacker rewards and detection flags for every action pair."""
    if not attacks or not defenses:
        raise GridError("action sets must be nonempty")
    values = np.zeros((len(attacks), len(defenses)))
    detected = np.zeros_like(values, dtype=bool)
    for ai, a in enumerate(attacks):
        affected = affected_buses(grid, placement, a)
        for di, d in enumerate(defenses):
            augmented = Placement(pmu_buses=placement.pmu_buses | {d.d})
            if attack_observing_count(grid, augmented, affected) > 1:
                detected[ai, di] = True
            else:
                effect = attack_effect(grid, base, placement, a, model, defense=d)
                vec = np.array([effect[m] for m in grid.buses])
                values[ai, di] = model.reduce(vec)
    return PayoffMatrix(
        attacks=tuple(attacks),
        defenses=tuple(defenses),
        values=values,
        detected=detected,
    )
