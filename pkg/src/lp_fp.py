"""
Floating-point bounded-variable primal simplex.

Every row i gets an activity variable w_i with A x - w = 0, so the sense of
the row becomes a pair of bounds on w_i. The solver then works on the box
constrained system over (x, w) with a dense explicit basis inverse.
"""

import logging
from dataclasses import dataclass
from typing import List, Mapping, Optional, Tuple

import numpy as np

from .core_model import GE, LE, MAXIMIZE, LinearProgram

logger = logging.getLogger('wnd_accuracy')

BASIC = 'basic'
AT_LOWER = 'at_lower'
AT_UPPER = 'at_upper'

OPTIMAL = 'optimal'
INFEASIBLE = 'infeasible'
UNBOUNDED = 'unbounded'
ITERATION_LIMIT = 'iteration_limit'

PIVOT_TOL = 1e-9
DUAL_TOL = 1e-9
DEGENERATE_STREAK = 20
REFACTOR_INTERVAL = 50


@dataclass(frozen=True)
class Basis:
    """Basis status per structural variable and per row activity."""

    variables: Tuple[str, ...]
    rows: Tuple[str, ...]

    def statuses(self) -> List[str]:
        """Statuses in the combined (variables, rows) index space."""
        return list(self.variables) + list(self.rows)

    def basic_indices(self) -> List[int]:
        return [i for i, s in enumerate(self.statuses()) if s == BASIC]

    @classmethod
    def slack(cls, n: int, m: int) -> 'Basis':
        """All row activities basic, structurals at their lower bound."""
        return cls((AT_LOWER,) * n, (BASIC,) * m)


@dataclass(frozen=True)
class FpLpResult:
    status: str
    point: Tuple[float, ...]
    basis: Optional[Basis]
    objective: Optional[float]
    iterations: int = 0


def row_bounds(sense: str, rhs: float) -> Tuple[float, float]:
    """Bounds on the activity variable of a row."""
    if sense == GE:
        return rhs, np.inf
    if sense == LE:
        return -np.inf, rhs
    return rhs, rhs


BoundOverrides = Mapping[int, Tuple[float, Optional[float]]]


class FloatSimplex:
    """
    Reusable solver context for one LP.

    The float arrays are built once; every solve() may override structural
    bounds (branching) and start from a given basis. A context must not be
    shared between threads while solving.
    """

    def __init__(self, lp: LinearProgram, eps: float = 1e-6, iteration_limit: int = 20000):
        if eps <= 0:
            raise ValueError(f"Feasibility tolerance must be positive, got: {eps}")
        self.lp = lp
        self.eps = float(eps)
        self.iteration_limit = iteration_limit
        self.dual_tol = min(self.eps, DUAL_TOL)

        n, m = lp.num_variables, lp.num_rows
        self.n, self.m = n, m
        self._A = np.zeros((m, n + m))
        self._lower = np.empty(n + m)
        self._upper = np.empty(n + m)

        for j, var in enumerate(lp.variables):
            self._lower[j] = float(var.lower)
            self._upper[j] = np.inf if var.upper is None else float(var.upper)
        for i, row in enumerate(lp.rows):
            for idx, coef in row.coefficients:
                self._A[i, idx] = float(coef)
            self._A[i, n + i] = -1.0
            self._lower[n + i], self._upper[n + i] = row_bounds(row.sense, float(row.rhs))

        sign = -1.0 if lp.sense == MAXIMIZE else 1.0
        self._sign = sign
        self._cost = np.zeros(n + m)
        for idx, coef in lp.objective:
            self._cost[idx] = sign * float(coef)

    def _refactor(self, basic: List[int]) -> np.ndarray:
        if self.m == 0:
            return np.zeros((0, 0))
        return np.linalg.inv(self._A[:, basic])

    def _initial_basis(self, warm_basis: Optional[Basis], lo: np.ndarray, up: np.ndarray):
        n, m = self.n, self.m
        if warm_basis is not None:
            statuses = warm_basis.statuses()
            basic = [i for i, s in enumerate(statuses) if s == BASIC]
            if len(statuses) == n + m and len(basic) == m:
                try:
                    binv = self._refactor(basic)
                    at_upper = np.array([s == AT_UPPER for s in statuses], dtype=bool)
                    return basic, binv, at_upper
                except np.linalg.LinAlgError:
                    logger.debug("Warm basis is singular, falling back to slack basis")
            else:
                logger.debug("Warm basis does not match the LP dimensions, ignoring it")
        basic = list(range(n, n + m))
        return basic, -np.eye(m), np.zeros(n + m, dtype=bool)

    def solve(
        self,
        bounds: Optional[BoundOverrides] = None,
        warm_basis: Optional[Basis] = None
    ) -> FpLpResult:
        """
        Run the simplex method.

        Args:
            bounds: Optional structural bound overrides {index: (lower, upper)}
            warm_basis: Optional starting basis

        Returns:
            FpLpResult
        """
        n, m = self.n, self.m
        lo = self._lower.copy()
        up = self._upper.copy()
        for idx, (lower, upper) in (bounds or {}).items():
            lo[idx] = float(lower)
            up[idx] = np.inf if upper is None else float(upper)
        if np.any(lo > up):
            return FpLpResult(INFEASIBLE, tuple(float(v) for v in lo[:n]), None, None, 0)

        basic, binv, at_upper = self._initial_basis(warm_basis, lo, up)
        is_basic = np.zeros(n + m, dtype=bool)
        is_basic[basic] = True
        # nonbasic variables sit on a finite bound
        at_upper &= np.isfinite(up)
        at_upper |= ~is_basic & ~np.isfinite(lo)
        fixed = lo == up

        A = self._A
        x = np.where(at_upper, up, lo)
        iterations = 0
        since_refactor = 0
        degenerate = 0
        use_bland = False

        while True:
            x[basic] = 0.0
            x_b = -binv @ (A @ x) if m else np.zeros(0)
            x[basic] = x_b
            lo_b, up_b = lo[basic], up[basic]
            below = x_b < lo_b - self.eps
            above = x_b > up_b + self.eps
            phase1 = bool(below.any() or above.any())

            if phase1:
                c_b = np.where(below, -1.0, np.where(above, 1.0, 0.0))
                c_full = np.zeros(n + m)
                c_full[basic] = c_b
            else:
                c_full = self._cost
                c_b = c_full[basic]

            y = c_b @ binv if m else np.zeros(0)
            d = c_full - (y @ A if m else np.zeros(n + m))
            d[basic] = 0.0

            eligible = ~is_basic & ~fixed & (
                (~at_upper & (d < -self.dual_tol)) | (at_upper & (d > self.dual_tol))
            )
            candidates = np.flatnonzero(eligible)
            if candidates.size == 0:
                status = INFEASIBLE if phase1 else OPTIMAL
                break

            if iterations >= self.iteration_limit:
                status = ITERATION_LIMIT
                logger.warning(f"LP iteration limit {self.iteration_limit} reached")
                break

            if use_bland:
                j = int(candidates[0])
            else:
                j = int(candidates[np.argmax(np.abs(d[candidates]))])
            sigma = -1.0 if at_upper[j] else 1.0

            alpha = binv @ A[:, j] if m else np.zeros(0)
            rate = -sigma * alpha

            best_t = None
            best_row = -1
            best_var = -1
            leave_upper = False
            for i in range(m):
                r = rate[i]
                if abs(r) <= PIVOT_TOL:
                    continue
                v = basic[i]
                t = None
                hits_upper = False
                if phase1 and below[i]:
                    if r > 0:
                        t = (lo_b[i] - x_b[i]) / r
                elif phase1 and above[i]:
                    if r < 0:
                        t = (x_b[i] - up_b[i]) / -r
                        hits_upper = True
                elif r < 0 and np.isfinite(lo_b[i]):
                    t = max(0.0, (x_b[i] - lo_b[i]) / -r)
                elif r > 0 and np.isfinite(up_b[i]):
                    t = max(0.0, (up_b[i] - x_b[i]) / r)
                    hits_upper = True
                if t is None:
                    continue
                tie = 1e-12 * max(1.0, abs(best_t)) if best_t is not None else 0.0
                if best_t is None or t < best_t - tie or (t <= best_t + tie and v < best_var):
                    best_t, best_row, best_var, leave_upper = t, i, v, hits_upper

            flip_t = up[j] - lo[j] if np.isfinite(up[j]) and np.isfinite(lo[j]) else None
            iterations += 1

            if flip_t is not None and (best_t is None or flip_t <= best_t):
                at_upper[j] = not at_upper[j]
                x[j] = up[j] if at_upper[j] else lo[j]
                degenerate = 0
                continue

            if best_t is None:
                if phase1:
                    logger.warning("Phase 1 found an unbounded improving ray; reporting infeasible")
                    status = INFEASIBLE
                else:
                    status = UNBOUNDED
                break

            # pivot: j enters at position best_row, best_var leaves on the bound it hit
            leaving = best_var
            pivot = alpha[best_row]
            eta_row = binv[best_row] / pivot
            binv -= np.outer(alpha, eta_row)
            binv[best_row] = eta_row

            basic[best_row] = j
            is_basic[j] = True
            at_upper[j] = False
            is_basic[leaving] = False
            at_upper[leaving] = leave_upper
            x[leaving] = up[leaving] if leave_upper else lo[leaving]

            since_refactor += 1
            if since_refactor >= REFACTOR_INTERVAL:
                try:
                    binv = self._refactor(basic)
                except np.linalg.LinAlgError:
                    logger.warning("Basis refactorization failed, keeping product-form inverse")
                since_refactor = 0

            degenerate = degenerate + 1 if best_t <= 1e-12 else 0
            if degenerate >= DEGENERATE_STREAK and not use_bland:
                logger.debug(f"Switching to Bland's rule after {degenerate} degenerate pivots")
                use_bland = True

        statuses = [
            BASIC if is_basic[i] else (AT_UPPER if at_upper[i] else AT_LOWER)
            for i in range(n + m)
        ]
        basis = Basis(tuple(statuses[:n]), tuple(statuses[n:]))
        point = tuple(float(v) for v in x[:n])
        objective = None
        if status == OPTIMAL:
            objective = self._sign * float(self._cost[:n] @ x[:n])
        logger.debug(f"LP solve: {status} after {iterations} iterations")
        return FpLpResult(status, point, basis, objective, iterations)


def solve_lp_fp(
    lp: LinearProgram,
    eps: float = 1e-6,
    iteration_limit: int = 20000,
    warm_basis: Optional[Basis] = None
) -> FpLpResult:
    """
    Solve an LP in double precision.

    Args:
        lp: Linear program (exact data converted to floats once)
        eps: Absolute primal feasibility tolerance on row activities and bounds
        iteration_limit: Maximum number of simplex iterations
        warm_basis: Optional starting basis

    Returns:
        FpLpResult with status optimal, infeasible, unbounded or iteration_limit

    Raises:
        ValueError: If eps <= 0
    """
    return FloatSimplex(lp, eps, iteration_limit).solve(warm_basis=warm_basis)


def point_from_basis(lp: LinearProgram, basis: Basis) -> np.ndarray:
    """
    Recompute the structural point of a basis by a fresh factorization.

    Returns:
        Array of structural values
    """
    context = FloatSimplex(lp)
    n, m = context.n, context.m
    statuses = basis.statuses()
    basic = [i for i, s in enumerate(statuses) if s == BASIC]
    x = np.array([
        context._upper[i] if s == AT_UPPER else context._lower[i]
        for i, s in enumerate(statuses)
    ])
    x[~np.isfinite(x)] = 0.0
    if m:
        x[basic] = 0.0
        x[basic] = np.linalg.solve(context._A[:, basic], -(context._A @ x))
    return x[:n]
