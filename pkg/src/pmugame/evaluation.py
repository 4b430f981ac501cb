"""Detection-rate metrics and scenario report assembly.

Rates are exact expectations over the detection indicator matrix, never
Monte-Carlo estimates.  The report aggregates attack rows whose entire
payoff/detection columns coincide, mirroring how grouped line attacks are
usually presented.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .game import PayoffMatrix

__all__ = [
    "DetectionReport",
    "detection_rate",
    "naive_detection_rate",
    "aggregate_rows",
    "build_report",
]


def _simplex(p, size, name):
    p = np.asarray(p, dtype=float)
    if p.shape != (size,):
        raise ValueError(f"{name} has wrong dimension {p.shape}, expected {size}")
    if np.any(p < -1e-9) or abs(p.sum() - 1.0) > 1e-9:
        raise ValueError(f"{name} is not a probability distribution")
    return p


def detection_rate(M: PayoffMatrix, sigma_a, sigma_d) -> float:
    """Probability that the sampled attack/defense pair is detected."""
    ra = _simplex(sigma_a, len(M.attacks), "attacker strategy")
    rd = _simplex(sigma_d, len(M.defenses), "defender strategy")
    return float(ra @ M.detected.astype(float) @ rd)


def naive_detection_rate(M: PayoffMatrix, sigma_a) -> float:
    """Detection rate against a uniformly random extra-PMU site."""
    if not M.defenses:
        raise ValueError("no defense actions")
    uniform = np.full(len(M.defenses), 1.0 / len(M.defenses))
    return detection_rate(M, sigma_a, uniform)


def aggregate_rows(M: PayoffMatrix, sigma_a):
    """Merge attack rows with identical payoff and detection columns.

    Returns a list of (label, probability) with labels joining the merged
    actions, ordered by first appearance.
    """
    ra = _simplex(sigma_a, len(M.attacks), "attacker strategy")
    groups: dict[tuple, list[int]] = {}
    order = []
    for i in range(len(M.attacks)):
        key = (tuple(np.round(M.values[i], 12)), tuple(M.detected[i]))
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(i)
    out = []
    for key in order:
        idx = groups[key]
        label = " + ".join(M.attacks[i].label() for i in idx)
        out.append((label, float(ra[idx].sum())))
    return out


@dataclass(frozen=True)
class DetectionReport:
    scenario: str
    sigma_a: np.ndarray
    sigma_d: np.ndarray
    rate: float
    naive_rate: float
    no_defense_rate: float
    attacker_table: list
    defender_table: list

    def __post_init__(self):
        for r in (self.rate, self.naive_rate, self.no_defense_rate):
            if not 0.0 <= r <= 1.0 + 1e-12:
                raise ValueError(f"rate {r} outside [0, 1]")

    @property
    def improvement(self) -> float:
        """NE-vs-naive gain in percentage points."""
        return 100.0 * (self.rate - self.naive_rate)

    def to_document(self) -> dict:
        return {
            "scenario": self.scenario,
            "detection_rate": round(self.rate, 4),
            "naive_detection_rate": round(self.naive_rate, 4),
            "no_defense_rate": round(self.no_defense_rate, 4),
            "improvement_pp": round(self.improvement, 4),
            "attacker_strategy": [
                {"action": lab, "probability": round(p, 4)}
                for lab, p in self.attacker_table
                if p > 5e-5
            ],
            "defender_strategy": [
                {"action": lab, "probability": round(p, 4)}
                for lab, p in self.defender_table
                if p > 5e-5
            ],
        }

    def render_text(self) -> str:
        lines = [f"scenario: {self.scenario}", ""]
        lines.append("attacker strategy")
        for lab, p in self.attacker_table:
            if p > 5e-5:
                lines.append(f"  {lab:<40s} {p:8.4f}")
        lines.append("defender strategy")
        for lab, p in self.defender_table:
            if p > 5e-5:
                lines.append(f"  bus {lab:<36s} {p:8.4f}")
        lines.append("")
        lines.append(f"detection rate (strategy pair): {100 * self.rate:6.2f}%")
        lines.append(f"detection rate (naive uniform): {100 * self.naive_rate:6.2f}%")
        lines.append(f"detection rate (no defense):    {100 * self.no_defense_rate:6.2f}%")
        lines.append(f"improvement over naive:         {self.improvement:6.2f} pp")
        return "\n".join(lines) + "\n"


def build_report(scenario: str, M: PayoffMatrix, sigma_a, sigma_d) -> DetectionReport:
    """Assemble detection metrics and aggregated strategy tables for a scenario."""
    ra = _simplex(sigma_a, len(M.attacks), "attacker strategy")
    rd = _simplex(sigma_d, len(M.defenses), "defender strategy")
    rate = detection_rate(M, ra, rd)
    naive = naive_detection_rate(M, ra)
    defender_table = [
        (M.defenses[j].label(), float(rd[j])) for j in range(len(M.defenses))
    ]
    return DetectionReport(
        scenario=scenario,
        sigma_a=ra,
        sigma_d=rd,
        rate=rate,
        naive_rate=naive,
        no_defense_rate=0.0,  # without the extra PMU no attack is ever seen twice
        attacker_table=aggregate_rows(M, ra),
        defender_table=defender_table,
    )
