"""
Exact rational LP solving and certificate checking.

The engine is the bounded-variable primal simplex of lp_fp carried out in
Fractions with Bland's rule throughout and zero tolerances. A basis from
the floating-point solver can be handed in; when it is already exactly
feasible no pivot is performed.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .core_model import EQ, GE, LE, MAXIMIZE, LinearProgram
from .lp_fp import AT_LOWER, AT_UPPER, BASIC, Basis
from .utils import Rational, to_fraction

logger = logging.getLogger('wnd_accuracy')

FEASIBLE = 'feasible'
INFEASIBLE = 'infeasible'
OPTIMAL = 'optimal'
UNBOUNDED = 'unbounded'

ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass(frozen=True)
class FarkasCertificate:
    """
    Infeasibility proof in canonical >=-form.

    row_multipliers are nonnegative on inequality rows (<= rows negated) and
    free on equality rows. bound_multipliers are the aggregated coefficients
    sum_i y_i a_ij that the variable box has to absorb. core lists the rows
    with a nonzero multiplier.
    """

    row_multipliers: Tuple[Fraction, ...]
    bound_multipliers: Tuple[Fraction, ...]
    core: Tuple[int, ...]


@dataclass(frozen=True)
class ExactLpResult:
    status: str
    point: Optional[Tuple[Fraction, ...]] = None
    certificate: Optional[FarkasCertificate] = None
    pivots_after_warmstart: int = 0
    objective: Optional[Fraction] = None
    basis: Optional[Basis] = None


@dataclass(frozen=True)
class BoundCheck:
    """Exact verdict for one row or variable bound; violation <= 0 means satisfied."""

    name: str
    satisfied: bool
    violation: Fraction


def _invert(columns: List[Dict[int, Fraction]], m: int) -> Optional[List[List[Fraction]]]:
    """Gauss-Jordan inverse of the matrix with the given sparse columns, None if singular."""
    rows = [[ZERO] * m + [ONE if i == k else ZERO for k in range(m)] for i in range(m)]
    for k, col in enumerate(columns):
        for i, v in col.items():
            rows[i][k] = v
    for k in range(m):
        pivot_row = next((i for i in range(k, m) if rows[i][k] != 0), None)
        if pivot_row is None:
            return None
        rows[k], rows[pivot_row] = rows[pivot_row], rows[k]
        pivot = rows[k][k]
        rows[k] = [v / pivot for v in rows[k]]
        nonzero = [c for c, v in enumerate(rows[k]) if v != 0]
        for i in range(m):
            factor = rows[i][k]
            if i != k and factor != 0:
                row_i = rows[i]
                for c in nonzero:
                    row_i[c] -= factor * rows[k][c]
    return [row[m:] for row in rows]


class ExactSimplex:
    """Single-use exact solver context for one LP."""

    def __init__(self, lp: LinearProgram):
        self.lp = lp
        n, m = lp.num_variables, lp.num_rows
        self.n, self.m = n, m

        self.columns: List[Dict[int, Fraction]] = [dict() for _ in range(n + m)]
        self.lower: List[Optional[Fraction]] = []
        self.upper: List[Optional[Fraction]] = []
        for var in lp.variables:
            self.lower.append(var.lower)
            self.upper.append(var.upper)
        for i, row in enumerate(lp.rows):
            for idx, coef in row.coefficients:
                self.columns[idx][i] = coef
            self.columns[n + i][i] = -ONE
            if row.sense == GE:
                self.lower.append(row.rhs)
                self.upper.append(None)
            elif row.sense == LE:
                self.lower.append(None)
                self.upper.append(row.rhs)
            else:
                self.lower.append(row.rhs)
                self.upper.append(row.rhs)

        sign = -ONE if lp.sense == MAXIMIZE else ONE
        self.cost = [ZERO] * (n + m)
        for idx, coef in lp.objective:
            self.cost[idx] = sign * coef

    def _start(self, warm_basis: Optional[Basis]):
        n, m = self.n, self.m
        if warm_basis is not None:
            statuses = warm_basis.statuses()
            basic = [i for i, s in enumerate(statuses) if s == BASIC]
            if len(statuses) == n + m and len(basic) == m:
                binv = _invert([self.columns[j] for j in basic], m)
                if binv is not None:
                    at_upper = [s == AT_UPPER for s in statuses]
                    return basic, binv, at_upper
                logger.debug("Warm basis is singular in exact arithmetic, using slack basis")
            else:
                logger.debug("Warm basis does not match the LP dimensions, using slack basis")
        basic = list(range(n, n + m))
        binv = [[-ONE if i == k else ZERO for k in range(m)] for i in range(m)]
        return basic, binv, [False] * (n + m)

    def solve(self, warm_basis: Optional[Basis] = None, optimize: bool = False) -> ExactLpResult:
        n, m = self.n, self.m
        lower, upper = self.lower, self.upper

        basic, binv, at_upper = self._start(warm_basis)
        is_basic = [False] * (n + m)
        for j in basic:
            is_basic[j] = True
        for j in range(n + m):
            if is_basic[j]:
                at_upper[j] = False
            elif at_upper[j] and upper[j] is None:
                at_upper[j] = False
            elif not at_upper[j] and lower[j] is None:
                at_upper[j] = True

        def nonbasic_value(j: int) -> Fraction:
            return upper[j] if at_upper[j] else lower[j]

        pivots = 0
        while True:
            # x_B = -B^-1 N x_N
            residual = [ZERO] * m
            for j in range(n + m):
                if is_basic[j]:
                    continue
                value = nonbasic_value(j)
                if value != 0:
                    for i, a in self.columns[j].items():
                        residual[i] += a * value
            nz = [(k, r) for k, r in enumerate(residual) if r != 0]
            x_b = [-sum((row[k] * r for k, r in nz), ZERO) for row in binv]

            below = [lower[v] is not None and x_b[i] < lower[v] for i, v in enumerate(basic)]
            above = [upper[v] is not None and x_b[i] > upper[v] for i, v in enumerate(basic)]
            phase1 = any(below) or any(above)
            if not phase1 and not optimize:
                status = FEASIBLE
                break

            if phase1:
                c_b = [-ONE if below[i] else (ONE if above[i] else ZERO) for i in range(m)]
                cost = None
            else:
                c_b = [self.cost[v] for v in basic]
                cost = self.cost
            c_nz = [(i, c) for i, c in enumerate(c_b) if c != 0]
            y = [sum((c * binv[i][k] for i, c in c_nz), ZERO) for k in range(m)]

            entering = None
            for j in range(n + m):
                if is_basic[j]:
                    continue
                if lower[j] is not None and lower[j] == upper[j]:
                    continue
                d = (cost[j] if cost is not None else ZERO) - sum(
                    (y[i] * a for i, a in self.columns[j].items()), ZERO
                )
                if (not at_upper[j] and d < 0) or (at_upper[j] and d > 0):
                    entering = j
                    break

            if entering is None:
                if phase1:
                    status = INFEASIBLE
                    certificate = self._certificate(y)
                    logger.debug(f"Exact LP infeasible after {pivots} pivots, core size {len(certificate.core)}")
                    return ExactLpResult(
                        INFEASIBLE, certificate=certificate, pivots_after_warmstart=pivots,
                        basis=self._basis(is_basic, at_upper)
                    )
                status = OPTIMAL
                break

            j = entering
            sigma = -ONE if at_upper[j] else ONE
            col = self.columns[j]
            alpha = [sum((binv[i][k] * a for k, a in col.items()), ZERO) for i in range(m)]

            best_t = None
            best_row = -1
            leave_upper = False
            for i in range(m):
                rate = -sigma * alpha[i]
                if rate == 0:
                    continue
                v = basic[i]
                t = None
                hits_upper = False
                if phase1 and below[i]:
                    if rate > 0:
                        t = (lower[v] - x_b[i]) / rate
                elif phase1 and above[i]:
                    if rate < 0:
                        t = (x_b[i] - upper[v]) / -rate
                        hits_upper = True
                elif rate < 0 and lower[v] is not None:
                    t = (x_b[i] - lower[v]) / -rate
                elif rate > 0 and upper[v] is not None:
                    t = (upper[v] - x_b[i]) / rate
                    hits_upper = True
                if t is None:
                    continue
                if best_t is None or t < best_t or (t == best_t and v < basic[best_row]):
                    best_t, best_row, leave_upper = t, i, hits_upper

            flip_t = None
            if lower[j] is not None and upper[j] is not None:
                flip_t = upper[j] - lower[j]
            pivots += 1

            if flip_t is not None and (best_t is None or flip_t <= best_t):
                at_upper[j] = not at_upper[j]
                continue

            if best_t is None:
                status = UNBOUNDED
                break

            leaving = basic[best_row]
            pivot = alpha[best_row]
            eta = [v / pivot for v in binv[best_row]]
            eta_nz = [(k, v) for k, v in enumerate(eta) if v != 0]
            for i in range(m):
                if i == best_row or alpha[i] == 0:
                    continue
                factor = alpha[i]
                row_i = binv[i]
                for k, v in eta_nz:
                    row_i[k] -= factor * v
            binv[best_row] = eta

            basic[best_row] = j
            is_basic[j] = True
            at_upper[j] = False
            is_basic[leaving] = False
            at_upper[leaving] = leave_upper

        values = [ZERO] * (n + m)
        for j in range(n + m):
            if not is_basic[j]:
                values[j] = nonbasic_value(j)
        for i, v in enumerate(basic):
            values[v] = x_b[i]
        point = tuple(values[:n])
        basis = self._basis(is_basic, at_upper)

        if status == UNBOUNDED:
            return ExactLpResult(UNBOUNDED, point=point, pivots_after_warmstart=pivots, basis=basis)
        objective = self.lp.objective_value(point) if optimize else None
        return ExactLpResult(status, point=point, pivots_after_warmstart=pivots,
                             objective=objective, basis=basis)

    def _basis(self, is_basic: List[bool], at_upper: List[bool]) -> Basis:
        statuses = [
            BASIC if is_basic[j] else (AT_UPPER if at_upper[j] else AT_LOWER)
            for j in range(self.n + self.m)
        ]
        return Basis(tuple(statuses[:self.n]), tuple(statuses[self.n:]))

    def _certificate(self, y: List[Fraction]) -> FarkasCertificate:
        # y is sign-compatible with the stated senses; <= rows flip to canonical form
        multipliers = []
        for value, row in zip(y, self.lp.rows):
            multipliers.append(-value if row.sense == LE else value)
        aggregated = _aggregate(self.lp, multipliers)[0]
        core = tuple(i for i, v in enumerate(multipliers) if v != 0)
        return FarkasCertificate(tuple(multipliers), tuple(aggregated), core)


def solve_lp_exact(
    lp: LinearProgram,
    warm_basis: Optional[Basis] = None,
    optimize: bool = False
) -> ExactLpResult:
    """
    Decide feasibility of an LP exactly.

    Args:
        lp: Linear program with exact data
        warm_basis: Optional starting basis, typically from solve_lp_fp
        optimize: Also run phase 2 for an exact optimal vertex

    Returns:
        ExactLpResult. Status is feasible or infeasible; with optimize=True
        it is optimal, infeasible or unbounded.
    """
    return ExactSimplex(lp).solve(warm_basis=warm_basis, optimize=optimize)


def check_point_exact(lp: LinearProgram, x: Sequence[Rational]) -> List[BoundCheck]:
    """
    Substitute a point into every row and bound with zero tolerance.

    Args:
        lp: Linear program
        x: Point, converted exactly

    Returns:
        One BoundCheck per row (in row order) followed by two per variable
        (lower, then upper when finite)

    Raises:
        ValueError: On dimension mismatch
    """
    if len(x) != lp.num_variables:
        raise ValueError(f"Point has {len(x)} entries, expected {lp.num_variables}")
    point = [to_fraction(v) for v in x]
    checks = []
    for i, row in enumerate(lp.rows):
        activity = row.activity(point)
        if row.sense == GE:
            violation = row.rhs - activity
        elif row.sense == LE:
            violation = activity - row.rhs
        else:
            violation = abs(activity - row.rhs)
        checks.append(BoundCheck(row.name or f"row[{i}]", violation <= 0, violation))
    for var, value in zip(lp.variables, point):
        violation = var.lower - value
        checks.append(BoundCheck(f"{var.name}>=lb", violation <= 0, violation))
        if var.upper is not None:
            violation = value - var.upper
            checks.append(BoundCheck(f"{var.name}<=ub", violation <= 0, violation))
    return checks


def max_violation(lp: LinearProgram, x: Sequence[Rational]) -> Fraction:
    """Largest exact violation over rows and bounds, zero when none is violated."""
    return max([ZERO] + [check.violation for check in check_point_exact(lp, x)])


def _aggregate(lp: LinearProgram, y: Sequence[Fraction]) -> Tuple[List[Fraction], Fraction]:
    coefficients = [ZERO] * lp.num_variables
    rhs = ZERO
    for value, row in zip(y, lp.rows):
        if value == 0:
            continue
        flip = -ONE if row.sense == LE else ONE
        for idx, coef in row.coefficients:
            coefficients[idx] += value * flip * coef
        rhs += value * flip * row.rhs
    return coefficients, rhs


def check_farkas(lp: LinearProgram, y: Sequence[Rational]) -> bool:
    """
    Verify an infeasibility certificate exactly.

    Rows are taken in >=-form (<= rows negated). The aggregated inequality
    sum_i y_i a_i x >= sum_i y_i b_i is contradicted when its left side,
    maximized over the variable box, stays below the right side.

    Args:
        lp: Linear program
        y: One multiplier per row, nonnegative on inequality rows

    Returns:
        True iff the certificate proves infeasibility

    Raises:
        ValueError: On dimension mismatch or a negative inequality multiplier
    """
    if len(y) != lp.num_rows:
        raise ValueError(f"Certificate has {len(y)} multipliers, expected {lp.num_rows}")
    multipliers = [to_fraction(v) for v in y]
    for value, row in zip(multipliers, lp.rows):
        if row.sense != EQ and value < 0:
            raise ValueError(f"Negative multiplier {value} on inequality row {row.name!r}")

    coefficients, rhs = _aggregate(lp, multipliers)
    best = ZERO
    for coef, var in zip(coefficients, lp.variables):
        if coef > 0:
            if var.upper is None:
                return False
            best += coef * var.upper
        elif coef < 0:
            best += coef * var.lower
    return best < rhs
