"""Self-contained dense simplex solver for small linear programs.

Solves max c.x subject to A x <= b, x >= 0 with b >= 0, which is all the
zero-sum game reduction needs (the slack basis is immediately feasible).
Bland's rule keeps degenerate problems from cycling.
"""

from __future__ import annotations

import numpy as np

__all__ = ["SimplexError", "simplex_maximize"]


class SimplexError(RuntimeError):
    pass


def simplex_maximize(c, A, b, max_iter: int = 100_000):
    """Return (x, objective, duals) for max c.x s.t. A x <= b, x >= 0.

    `duals` are the optimal dual multipliers of the row constraints, read off
    the slack columns of the final tableau.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    c = np.asarray(c, dtype=float)
    m, n = A.shape
    if b.shape != (m,) or c.shape != (n,):
        raise SimplexError("dimension mismatch")
    if np.any(b < 0):
        raise SimplexError("rhs must be nonnegative for the slack start")

    # Tableau: [A | I | b] with objective row [-c | 0 | 0] appended last.
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A
    T[:m, n:n + m] = np.eye(m)
    T[:m, -1] = b
    T[m, :n] = -c
    basis = list(range(n, n + m))

    for _ in range(max_iter):
        # Bland: entering variable = lowest index with negative reduced cost.
        reduced = T[m, :n + m]
        entering = -1
        for j in range(n + m):
            if reduced[j] < -1e-10:
                entering = j
                break
        if entering < 0:
            break
        col = T[:m, entering]
        ratios = np.full(m, np.inf)
        positive = col > 1e-12
        ratios[positive] = T[:m, -1][positive] / col[positive]
        if not np.any(positive):
            raise SimplexError("linear program is unbounded")
        best = np.min(ratios)
        # Bland again: among minimal ratios, leave the lowest basis index.
        leaving = min(
            (basis[i], i) for i in range(m) if positive[i] and ratios[i] <= best + 1e-12
        )[1]
        pivot = T[leaving, entering]
        T[leaving] /= pivot
        for r in range(m + 1):
            if r != leaving and T[r, entering] != 0.0:
                T[r] -= T[r, entering] * T[leaving]
        basis[leaving] = entering
    else:
        raise SimplexError("simplex iteration limit reached")

    x = np.zeros(n)
    for i, bv in enumerate(basis):
        if bv < n:
            x[bv] = T[i, -1]
    duals = T[m, n:n + m].copy()
    return x, float(T[m, -1]), duals
