"""Dense phase-1 simplex for small equality-constrained feasibility problems.

Finds ``x >= 0`` with ``A x = b`` or reports the smallest total artificial
slack it could reach.  Pivoting follows Bland's rule, so the method
terminates even on the degenerate systems produced by redundant marginal
constraints.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PIVOT_TOL = 1e-9


@dataclass
class Phase1Result:
    x: np.ndarray
    residual: float  # optimal phase-1 objective: sum of artificial variables
    pivots: int


def phase1(A, b, tol: float = PIVOT_TOL, max_pivots: int = 10_000) -> Phase1Result:
    A = np.array(A, dtype=float)
    b = np.array(b, dtype=float)
    m, n = A.shape
    if b.shape != (m,):
        raise ValueError("b must have one entry per row of A")

    neg = b < 0
    A[neg] *= -1.0
    b[neg] *= -1.0

    # columns: n structural variables, then m artificials; last column is the rhs
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A
    T[:m, n : n + m] = np.eye(m)
    T[:m, -1] = b
    basis = list(range(n, n + m))
    # objective row holds reduced costs of "minimize sum of artificials"
    T[m, :n] = -A.sum(axis=0)
    T[m, -1] = -b.sum()

    pivots = 0
    while True:
        entering = next((j for j in range(n + m) if T[m, j] < -tol), None)
        if entering is None:
            break
        col = T[:m, entering]
        rows = [i for i in range(m) if col[i] > tol]
        if not rows:
            # cannot happen for a bounded phase-1 problem
            raise RuntimeError("phase-1 objective unbounded")
        ratios = [T[i, -1] / col[i] for i in rows]
        best = min(ratios)
        # Bland: among ties, the row whose basic variable has the smallest index
        leaving = min(
            (i for i, r in zip(rows, ratios) if r <= best + tol),
            key=lambda i: basis[i],
        )
        _pivot(T, leaving, entering)
        basis[leaving] = entering
        pivots += 1
        if pivots > max_pivots:
            raise RuntimeError("pivot limit exceeded")

    x = np.zeros(n + m)
    for i, j in enumerate(basis):
        x[j] = T[i, -1]
    residual = float(x[n:].sum())
    return Phase1Result(x=x[:n], residual=residual, pivots=pivots)


def _pivot(T: np.ndarray, r: int, c: int) -> None:
    T[r] /= T[r, c]
    for i in range(T.shape[0]):
        if i != r and T[i, c] != 0.0:
            T[i] -= T[i, c] * T[r]
