"""LP iterative refinement: accurate primal points from repeated double-precision solves."""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Tuple

from .core_model import LinearProgram, LinearRow, Variable
from .lp_exact import max_violation
from .lp_fp import OPTIMAL, Basis, FloatSimplex
from .utils import Rational, Stopwatch, format_sci, tolerance_fraction

logger = logging.getLogger('wnd_accuracy')

SUCCESS = 'success'
MAX_ROUNDS = 'max_rounds'
FAILED = 'failed'

DEFAULT_SCALING_CAP = Fraction(2) ** 40
REFINE_EPS = 1e-9


@dataclass(frozen=True)
class RefineResult:
    """
    Outcome of a refinement run.

    per_round_violations holds the exact max violation after every
    floating-point solve; its last entry equals max_violation.
    """

    status: str
    point: Optional[Tuple[Fraction, ...]]
    max_violation: Optional[Fraction]
    rounds: int
    per_round_violations: Tuple[Fraction, ...] = ()
    basis: Optional[Basis] = None
    elapsed: float = 0.0
    message: str = ''


def scaling_factor(violation: Fraction, cap: Fraction) -> Fraction:
    """
    Power of two close to 1/violation, at least 1 and at most cap.

    Args:
        violation: Positive exact violation
        cap: Largest allowed factor

    Returns:
        Fraction 2**k
    """
    if violation <= 0:
        return Fraction(1)
    inverse = 1 / violation
    k = inverse.numerator.bit_length() - inverse.denominator.bit_length()
    if Fraction(2) ** k > inverse:
        k -= 1
    factor = Fraction(2) ** max(k, 0)
    while factor > cap and factor > 1:
        factor /= 2
    return factor


def correction_lp(lp: LinearProgram, x: List[Fraction], delta: Fraction) -> LinearProgram:
    """
    Residual system for a correction x_hat, shifted to x and scaled by delta:
    rows a x_hat <sense> delta (b - a x), bounds delta (l - x) <= x_hat <= delta (u - x).
    """
    variables = []
    for var, value in zip(lp.variables, x):
        upper = None if var.upper is None else delta * (var.upper - value)
        lower = delta * (var.lower - value)
        variables.append(Variable(var.name, lower, upper))
    rows = [
        LinearRow(row.coefficients, row.sense, delta * (row.rhs - row.activity(x)), row.tag, row.name)
        for row in lp.rows
    ]
    return LinearProgram(tuple(variables), tuple(rows), lp.objective, lp.sense)


def refine_lp(
    lp: LinearProgram,
    tol: Rational = '1e-25',
    max_rounds: int = 10,
    scaling_cap: Rational = DEFAULT_SCALING_CAP,
    eps: float = REFINE_EPS,
    iteration_limit: int = 20000,
    warm_basis: Optional[Basis] = None
) -> RefineResult:
    """
    Refine the floating-point optimum of an LP until its exact violation
    drops to tol.

    Each round solves in double precision, computes the exact residuals of
    the accumulated point, and solves the residual system scaled by a power
    of two so that its data is of order one again. Corrections are added
    back exactly.

    Args:
        lp: Linear program
        tol: Absolute target violation (exact)
        max_rounds: Maximum number of floating-point solves
        scaling_cap: Upper limit of the per-round scaling factor
        eps: Feasibility tolerance of the floating-point solves
        iteration_limit: Simplex iteration limit per solve
        warm_basis: Optional basis for the first solve

    Returns:
        RefineResult with status success, max_rounds or failed

    Raises:
        ValueError: If tol <= 0 or max_rounds < 1
    """
    tol = tolerance_fraction(tol)
    if tol <= 0:
        raise ValueError(f"Refinement tolerance must be positive, got: {tol}")
    if max_rounds < 1:
        raise ValueError(f"max_rounds must be at least 1, got: {max_rounds}")
    cap = tolerance_fraction(scaling_cap)
    if cap < 1:
        raise ValueError(f"Scaling cap must be at least 1, got: {cap}")

    stopwatch = Stopwatch()
    trace: List[Fraction] = []

    result = FloatSimplex(lp, eps, iteration_limit).solve(warm_basis=warm_basis)
    if result.status != OPTIMAL:
        message = f"Initial floating-point solve returned {result.status}"
        logger.warning(f"Refinement failed: {message}")
        return RefineResult(FAILED, None, None, 1, (), None, stopwatch.elapsed(), message)

    point = [Fraction(v) for v in result.point]
    basis = result.basis
    violation = max_violation(lp, point)
    trace.append(violation)
    rounds = 1
    logger.debug(f"Refinement round 1: max violation {format_sci(violation)}")

    while violation > tol and rounds < max_rounds:
        delta = scaling_factor(violation, cap)
        shifted = correction_lp(lp, point, delta)
        correction = FloatSimplex(shifted, eps, iteration_limit).solve(warm_basis=basis)
        rounds += 1
        if correction.status != OPTIMAL:
            message = f"Correction solve in round {rounds} returned {correction.status}"
            logger.warning(f"Refinement failed: {message}")
            return RefineResult(
                FAILED, tuple(point), violation, rounds, tuple(trace), basis,
                stopwatch.elapsed(), message
            )
        point = [p + Fraction(c) / delta for p, c in zip(point, correction.point)]
        basis = correction.basis
        violation = max_violation(lp, point)
        trace.append(violation)
        logger.debug(
            f"Refinement round {rounds}: scale 2^{delta.numerator.bit_length() - 1}, "
            f"max violation {format_sci(violation)}"
        )

    status = SUCCESS if violation <= tol else MAX_ROUNDS
    if status == MAX_ROUNDS:
        logger.warning(
            f"Refinement stopped after {rounds} rounds at violation {format_sci(violation)}"
        )
    return RefineResult(
        status, tuple(point), violation, rounds, tuple(trace), basis, stopwatch.elapsed()
    )
