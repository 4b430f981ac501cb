"""Mixed equilibria of the attacker/defender matrix game.

Two routes to the same object: the exact minimax linear program (von Neumann
duality gives both players' strategies from one solve), and two EXP3 bandit
learners playing each other with each side seeing only its own realized
reward.  The time-averaged EXP3 play frequencies converge to an equilibrium.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .lp import simplex_maximize

__all__ = [
    "EquilibriumResult",
    "Exp3Schedules",
    "Exp3State",
    "expected_payoff",
    "solve_minimax",
    "exploitability",
    "exp3_step",
    "exp3_selfplay",
]

SIMPLEX_TOL = 1e-9


def _as_matrix(M) -> np.ndarray:
    if hasattr(M, "values"):
        return np.asarray(M.values, dtype=float)
    return np.asarray(M, dtype=float)


def _check_simplex(p: np.ndarray, name: str):
    if np.any(p < -SIMPLEX_TOL):
        raise ValueError(f"{name} has negative entries")
    if abs(p.sum() - 1.0) > SIMPLEX_TOL:
        raise ValueError(f"{name} does not sum to 1 (sum={p.sum()!r})")


def expected_payoff(M, sigma_a, sigma_d) -> float:
    """Attacker's expected reward under independent mixed strategies."""
    A = _as_matrix(M)
    ra = np.asarray(sigma_a, dtype=float)
    rd = np.asarray(sigma_d, dtype=float)
    if ra.shape != (A.shape[0],) or rd.shape != (A.shape[1],):
        raise ValueError("strategy dimensions do not match the matrix")
    _check_simplex(ra, "attacker strategy")
    _check_simplex(rd, "defender strategy")
    return float(ra @ A @ rd)


def exploitability(M, sigma_a, sigma_d) -> float:
    """Best-response gap: zero exactly at a Nash equilibrium."""
    A = _as_matrix(M)
    ra = np.asarray(sigma_a, dtype=float)
    rd = np.asarray(sigma_d, dtype=float)
    best_attack = float(np.max(A @ rd))
    best_defense = float(np.min(ra @ A))
    return best_attack - best_defense


@dataclass(frozen=True)
class EquilibriumResult:
    sigma_a: np.ndarray
    sigma_d: np.ndarray
    value: float
    gap: float

    def to_document(self, attack_labels, defense_labels, iterations=None, seed=None):
        doc = {
            "attacker": {
                "actions": list(attack_labels),
                "probabilities": [round(float(p), 12) for p in self.sigma_a],
            },
            "defender": {
                "actions": list(defense_labels),
                "probabilities": [round(float(p), 12) for p in self.sigma_d],
            },
            "value": round(float(self.value), 12),
            "exploitability": round(float(self.gap), 12),
        }
        if iterations is not None:
            doc["iterations"] = int(iterations)
        if seed is not None:
            doc["seed"] = int(seed)
        return doc


def solve_minimax(M) -> EquilibriumResult:
    """Exact mixed equilibrium of the zero-sum matrix game via the minimax LP.

    The matrix is shifted positive, the defender's normalized program
    max 1.y s.t. M y <= 1 is solved with the dense simplex, and the
    attacker's strategy is recovered from the dual multipliers.
    """
    A = _as_matrix(M)
    m, k = A.shape
    shift = 1.0 - float(A.min())
    Ap = A + shift

    y, total, duals = simplex_maximize(np.ones(k), Ap, np.ones(m))
    value_shifted = 1.0 / total
    sigma_d = np.clip(y * value_shifted, 0.0, None)
    sigma_d /= sigma_d.sum()
    sigma_a = np.clip(duals * value_shifted, 0.0, None)
    sigma_a /= sigma_a.sum()

    value = float(sigma_a @ A @ sigma_d)
    gap = exploitability(A, sigma_a, sigma_d)
    return EquilibriumResult(sigma_a=sigma_a, sigma_d=sigma_d, value=value, gap=gap)


@dataclass(frozen=True)
class Exp3Schedules:
    """Anytime learning-rate schedules; overridable per run.

    Defaults: eta_t = min(1, sqrt(ln K / (K t))), gamma_t = min(1,
    sqrt(K ln K / t)), beta_t = 1 / (K sqrt(t)).
    """

    eta: object = None
    gamma: object = None
    beta: object = None

    def rates(self, k: int, t: int) -> tuple[float, float, float]:
        if t < 1:
            raise ValueError("iteration index starts at 1")
        lnk = math.log(k) if k > 1 else 1.0
        eta = self.eta(k, t) if self.eta else min(1.0, math.sqrt(lnk / (k * t)))
        gamma = self.gamma(k, t) if self.gamma else min(1.0, math.sqrt(k * lnk / t))
        beta = self.beta(k, t) if self.beta else 1.0 / (k * math.sqrt(t))
        if not (eta > 0 and beta > 0 and 0 < gamma <= 1):
            raise ValueError("invalid schedule parameters")
        return eta, gamma, beta


@dataclass
class Exp3State:
    """One learner's cumulative scores and play-frequency accumulators."""

    k: int
    schedules: Exp3Schedules = field(default_factory=Exp3Schedules)
    scores: np.ndarray = None
    sigma: np.ndarray = None
    freq_accum: np.ndarray = None
    weight_sum: float = 0.0
    t: int = 1

    def __post_init__(self):
        if self.scores is None:
            self.scores = np.zeros(self.k)
        if self.freq_accum is None:
            self.freq_accum = np.zeros(self.k)
        if self.sigma is None:
            self.sigma = self._distribution()

    def _distribution(self, t: int | None = None) -> np.ndarray:
        _, gamma, _ = self.schedules.rates(self.k, t if t is not None else self.t)
        g = self.scores - self.scores.max()
        soft = np.exp(g)
        soft /= soft.sum()
        return gamma / self.k + (1.0 - gamma) * soft

    def empirical_frequency(self) -> np.ndarray:
        if self.weight_sum == 0.0:
            return self.sigma.copy()
        return self.freq_accum / self.weight_sum


def exp3_step(state: Exp3State, chosen: int, reward: float) -> Exp3State:
    """Advance one EXP3 round: estimate, score, re-mix, accumulate frequency."""
    if not 0.0 <= reward <= 1.0:
        raise ValueError(f"reward {reward} outside [0, 1]")
    eta, _, beta = state.schedules.rates(state.k, state.t)
    prob = state.sigma[chosen]
    assert prob > 0.0, "chosen action has zero probability"

    estimate = np.full(state.k, beta) / state.sigma
    estimate[chosen] += reward / prob

    state.freq_accum += eta * state.sigma
    state.weight_sum += eta
    state.scores = state.scores + eta * estimate
    # The re-mix uses this round's exploration rate, then the clock advances.
    state.sigma = state._distribution(t=state.t)
    state.t += 1
    return state


def exp3_selfplay(
    M,
    iterations: int,
    seed: int,
    schedules_a: Exp3Schedules | None = None,
    schedules_d: Exp3Schedules | None = None,
    trace_points: int = 100,
):
    """Run attacker and defender EXP3 learners against each other.

    Each learner samples an action and observes only its own realized,
    [0, 1]-normalized reward.  Attacker rewards are scaled by the largest
    undetected payoff in the matrix; the defender sees the complement.
    Returns (sigma_a_bar, sigma_d_bar, diagnostics).
    """
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    A = _as_matrix(M)
    m, k = A.shape
    vmax = float(A.max())
    scale = vmax if vmax > 0 else 1.0

    rng = np.random.default_rng(seed)
    attacker = Exp3State(k=m, schedules=schedules_a or Exp3Schedules())
    defender = Exp3State(k=k, schedules=schedules_d or Exp3Schedules())

    stride = max(1, iterations // max(1, trace_points))
    trace = []
    for t in range(1, iterations + 1):
        ai = min(int(np.searchsorted(np.cumsum(attacker.sigma), rng.random())), m - 1)
        di = min(int(np.searchsorted(np.cumsum(defender.sigma), rng.random())), k - 1)
        r = A[ai, di] / scale
        exp3_step(attacker, ai, r)
        exp3_step(defender, di, 1.0 - r)
        if t % stride == 0 or t == iterations:
            ra = attacker.empirical_frequency()
            rd = defender.empirical_frequency()
            trace.append(
                (t, exploitability(A, ra, rd), float(ra @ A @ rd))
            )

    sigma_a = attacker.empirical_frequency()
    sigma_d = defender.empirical_frequency()
    diagnostics = {
        "trace": trace,
        "final_sigma_a": attacker.sigma.copy(),
        "final_sigma_d": defender.sigma.copy(),
        "scale": scale,
    }
    return sigma_a, sigma_d, diagnostics
