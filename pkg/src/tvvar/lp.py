"""Standard-form LP representation and a deterministic two-phase simplex.

The solver targets the small dense sub-problems produced by the
l1-minimization estimator: 2d variables, 4d inequality rows, d <= 64.
It runs a primal tableau simplex with Bland's anti-cycling rule in both
phases (the sub-problems are frequently degenerate at small tau, where
anti-cycling correctness matters more than pivot speed), slack-variable
phase 1 for feasibility, and dense row updates.  All pivoting choices
are index-based, so identical inputs produce bit-identical solutions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from tvvar.kernel import SmoothedCov

FEASIBILITY_TOL = 1e-8
OPTIMALITY_TOL = 1e-9
_PIVOT_TOL = 1e-11
_MAX_PIVOTS = 200_000

_OPTIMAL, _UNBOUNDED, _STALLED = 0, 1, 2


@dataclass(frozen=True)
class StandardFormLP:
    """min cost . x  s.t.  constraint_matrix @ x <= rhs,  x >= 0."""

    cost: np.ndarray
    constraint_matrix: np.ndarray
    rhs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.cost, dtype=np.float64)
        G = np.asarray(self.constraint_matrix, dtype=np.float64)
        h = np.asarray(self.rhs, dtype=np.float64)
        if G.ndim != 2 or c.ndim != 1 or h.ndim != 1:
            raise ValueError("cost/rhs must be vectors and the matrix 2-D")
        if G.shape != (h.size, c.size):
            raise ValueError(
                f"constraint matrix {G.shape} does not match "
                f"{h.size} rows x {c.size} vars"
            )
        for arr in (c, G, h):
            if not np.all(np.isfinite(arr)):
                raise ValueError("LP data contains non-finite entries")
        object.__setattr__(self, "cost", c)
        object.__setattr__(self, "constraint_matrix", G)
        object.__setattr__(self, "rhs", h)

    @property
    def num_vars(self) -> int:
        return self.cost.size

    @property
    def num_constraints(self) -> int:
        return self.rhs.size

    def to_debug_text(self) -> str:
        """Plain-text dump for failure triage."""
        lines = [
            f"minimize {np.array2string(self.cost, max_line_width=10**9)}",
            "subject to (<=), x >= 0:",
        ]
        for i in range(self.num_constraints):
            row = np.array2string(
                self.constraint_matrix[i], max_line_width=10**9
            )
            lines.append(f"  [{i:3d}] {row} <= {self.rhs[i]!r}")
        return "\n".join(lines)


@dataclass(frozen=True)
class LPResult:
    """Solver outcome; solution/objective only populated when optimal."""

    status: str
    x: np.ndarray | None = None
    objective: float | None = None
    reduced_costs: np.ndarray | None = None
    basis: np.ndarray | None = None


@njit(cache=True)
def _bland_loop(T, basis, n_enterable, tol_cost, tol_pivot, max_pivots):
    """Pivot the tableau to optimality with anti-cycling safeguards.

    T rows: m constraint rows then the reduced-cost row; last column is
    the rhs.  Entering columns are restricted to indices below
    n_enterable (used to lock artificial columns out of phase 2).

    Pricing starts with Dantzig's most-negative rule and switches
    permanently to Bland's lowest-index rule once a run of degenerate
    (zero-progress) pivots is detected, so cycling is impossible while
    typical solves stay fast.  Both rules and the ratio-test tie-break
    (smallest basis index) are index-deterministic.
    """
    m = T.shape[0] - 1
    last = T.shape[1] - 1
    bland = False
    stall = 0
    stall_limit = 3 * (m + 2)
    for _ in range(max_pivots):
        enter = -1
        if bland:
            for j in range(n_enterable):
                if T[m, j] < -tol_cost:
                    enter = j
                    break
        else:
            most = -tol_cost
            for j in range(n_enterable):
                if T[m, j] < most:
                    most = T[m, j]
                    enter = j
        if enter < 0:
            return _OPTIMAL
        # ratio test; ties resolved toward the smallest basis index
        leave = -1
        best = np.inf
        for i in range(m):
            a = T[i, enter]
            if a > tol_pivot:
                ratio = T[i, last] / a
                if ratio < best - 1e-12 or (
                    ratio < best + 1e-12
                    and (leave < 0 or basis[i] < basis[leave])
                ):
                    if ratio < best:
                        best = ratio
                    leave = i
        if leave < 0:
            return _UNBOUNDED
        if not bland:
            if best <= 1e-12:
                stall += 1
                if stall >= stall_limit:
                    bland = True
            else:
                stall = 0
        piv = T[leave, enter]
        for j in range(last + 1):
            T[leave, j] /= piv
        for i in range(m + 1):
            if i == leave:
                continue
            f = T[i, enter]
            if f != 0.0:
                for j in range(last + 1):
                    T[i, j] -= f * T[leave, j]
                T[i, enter] = 0.0
        T[leave, enter] = 1.0
        basis[leave] = enter
    return _STALLED


def _price_out(T, basis, cost):
    """Install a cost row consistent with the current basis."""
    m = T.shape[0] - 1
    T[m, :] = 0.0
    T[m, : cost.size] = cost
    for i in range(m):
        cb = T[m, basis[i]]
        if cb != 0.0:
            T[m, :] -= cb * T[i, :]


def solve_simplex(lp: StandardFormLP) -> LPResult:
    """Two-phase primal simplex (Dantzig pricing, Bland anti-cycling).

    Returns status "optimal" with the basic solution, "infeasible" when
    the phase-1 optimum stays above 1e-9, or "unbounded" when an
    improving ray is found.
    """
    G, h, c = lp.constraint_matrix, lp.rhs, lp.cost
    m, n = G.shape
    flip = h < 0.0
    art_rows = np.flatnonzero(flip)
    n_art = art_rows.size
    ncols = n + m + n_art

    T = np.zeros((m + 1, ncols + 1))
    T[:m, :n] = np.where(flip[:, None], -G, G)
    T[:m, n : n + m] = np.diag(np.where(flip, -1.0, 1.0))
    T[:m, ncols] = np.where(flip, -h, h)

    basis = np.empty(m, dtype=np.int64)
    basis[:] = n + np.arange(m)
    for k, i in enumerate(art_rows):
        T[i, n + m + k] = 1.0
        basis[i] = n + m + k

    if n_art:
        phase1_cost = np.zeros(ncols)
        phase1_cost[n + m :] = 1.0
        _price_out(T, basis, phase1_cost)
        status = _bland_loop(T, basis, ncols, OPTIMALITY_TOL, _PIVOT_TOL, _MAX_PIVOTS)
        if status != _OPTIMAL:
            # the phase-1 objective is bounded below by zero, so
            # anything but optimality signals a numerical breakdown
            raise RuntimeError("simplex failed to solve phase 1")
        phase1_obj = -T[m, ncols]
        if phase1_obj > 1e-9:
            return LPResult(status="infeasible")
        # drive any basic artificial (at value zero) out of the basis
        for i in range(m):
            if basis[i] >= n + m:
                pivoted = False
                for j in range(n + m):
                    if abs(T[i, j]) > _PIVOT_TOL:
                        piv = T[i, j]
                        T[i, :] /= piv
                        for r in range(m + 1):
                            if r != i and T[r, j] != 0.0:
                                T[r, :] -= T[r, j] * T[i, :]
                                T[r, j] = 0.0
                        T[i, j] = 1.0
                        basis[i] = j
                        pivoted = True
                        break
                if not pivoted:
                    # redundant row; artificial stays basic at zero and
                    # is barred from re-entering below
                    pass

    _price_out(T, basis, c)
    status = _bland_loop(T, basis, n + m, OPTIMALITY_TOL, _PIVOT_TOL, _MAX_PIVOTS)
    if status == _STALLED:
        raise RuntimeError("simplex exceeded the pivot limit in phase 2")
    if status == _UNBOUNDED:
        return LPResult(status="unbounded")

    x = np.zeros(n)
    for i in range(m):
        if basis[i] < n:
            x[basis[i]] = T[i, ncols]
    reduced = T[m, : n + m].copy()
    return LPResult(
        status="optimal",
        x=x,
        objective=float(c @ x),
        reduced_costs=reduced,
        basis=basis.copy(),
    )


def build_clime_subproblem(cov0, cov1_col_j, covm1_row_j, tau: float) -> StandardFormLP:
    """LP encoding of one l1-minimization row sub-problem.

    With u = v - w split into nonnegative parts, minimizes
    |v|_1 + |w|_1 subject to the two-sided element-wise constraints

        | b - S u |_inf   <= tau      (lag-one column block)
        | c - u^T S |_inf <= tau      (lag-minus-one row block)

    where S is the lag-zero smoothed estimate, b the j-th column of the
    lag-one estimate and c the j-th row of the lag-minus-one estimate.
    """
    S = cov0.matrix if isinstance(cov0, SmoothedCov) else np.asarray(cov0, dtype=np.float64)
    b = np.asarray(cov1_col_j, dtype=np.float64)
    cvec = np.asarray(covm1_row_j, dtype=np.float64)
    d = S.shape[0]
    if S.shape != (d, d) or b.shape != (d,) or cvec.shape != (d,):
        raise ValueError("covariance blocks have mismatched dimensions")
    if tau <= 0:
        raise ValueError("tau must be positive")
    St = S.T
    G = np.vstack(
        [
            np.hstack([S, -S]),
            np.hstack([-S, S]),
            np.hstack([St, -St]),
            np.hstack([-St, St]),
        ]
    )
    h = np.concatenate([tau + b, tau - b, tau + cvec, tau - cvec])
    return StandardFormLP(cost=np.ones(2 * d), constraint_matrix=G, rhs=h)


def solve_clime_subproblem(cov0, cov1_col_j, covm1_row_j, tau: float):
    """Solve one row sub-problem; returns (u, LPResult)."""
    lp = build_clime_subproblem(cov0, cov1_col_j, covm1_row_j, tau)
    res = solve_simplex(lp)
    if res.status != "optimal":
        return None, res
    d = lp.num_vars // 2
    return res.x[:d] - res.x[d:], res
