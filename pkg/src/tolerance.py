"""
Feasibility semantics of floating-point solvers and SIR violation analysis.

relative_violation mirrors what a solver sees: the row is evaluated in
double precision and the violation is measured relative to
max{|activity|, |rhs|, 1}. sir_violation_from_linear is the exact ground
truth for the same point.
"""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, Sequence

from .core_model import GE, LE, Instance, LinearRow, interference, linearized_sir_row, sir_value
from .utils import Rational, to_fraction

logger = logging.getLogger('wnd_accuracy')

DEFAULT_TOLERANCES = (1e-9, 1e-6)


@dataclass(frozen=True)
class ViolationMeasure:
    """Violation of one row in canonical <=-form, as a solver would measure it."""

    absolute_violation: float
    relative_violation: float
    satisfied_at: Dict[float, bool] = field(default_factory=dict)


@dataclass(frozen=True)
class SirViolationPair:
    """
    Exact violations of the linear SIR row and of the SIR ratio itself.

    eps_sir * (N + I) == eps_linear holds exactly; amplification is 1/(N + I).
    """

    receiver: str
    server: str
    eps_linear: Fraction
    eps_sir: Fraction
    amplification: Fraction


def _float_terms(row: LinearRow, x: Sequence[Rational]):
    terms = []
    for idx, coef in row.coefficients:
        if idx >= len(x):
            raise ValueError(
                f"Point has {len(x)} entries but row {row.name!r} references variable {idx}"
            )
        terms.append(float(coef) * float(x[idx]))
    return terms


def _violations(row: LinearRow, x: Sequence[Rational]):
    terms = _float_terms(row, x)
    activity = math.fsum(terms)
    rhs = float(row.rhs)
    # activity - rhs, summed with a single rounding
    excess = math.fsum(terms + [-rhs])
    if row.sense == LE:
        absolute = excess
    elif row.sense == GE:
        absolute = -excess
    else:
        absolute = abs(excess)
    denominator = max(abs(activity), abs(rhs), 1.0)
    return absolute, absolute / denominator


def relative_violation(row: LinearRow, x: Sequence[Rational]) -> float:
    """
    Relative violation (activity - rhs) / max{|activity|, |rhs|, 1} of a row
    in <=-form, computed in floating point.

    >= rows are negated first; equality rows report the worse of their two
    inequalities. Zero or negative means satisfied.

    Args:
        row: Linear row
        x: Point covering every variable of the row

    Returns:
        Relative violation as float

    Raises:
        ValueError: If x is too short for the row
    """
    return _violations(row, x)[1]


def is_row_satisfied(row: LinearRow, x: Sequence[Rational], eps: float) -> bool:
    """True iff relative_violation(row, x) <= eps."""
    if eps <= 0:
        raise ValueError(f"Feasibility tolerance must be positive, got: {eps}")
    return relative_violation(row, x) <= eps


def measure_violation(
    row: LinearRow,
    x: Sequence[Rational],
    tolerances: Iterable[float] = DEFAULT_TOLERANCES
) -> ViolationMeasure:
    """
    Absolute and relative violation of a row plus the verdict per tolerance.

    Args:
        row: Linear row
        x: Point
        tolerances: Feasibility tolerances to evaluate

    Returns:
        ViolationMeasure
    """
    absolute, relative = _violations(row, x)
    verdicts = {}
    for eps in tolerances:
        if eps <= 0:
            raise ValueError(f"Feasibility tolerance must be positive, got: {eps}")
        verdicts[eps] = relative <= eps
    return ViolationMeasure(absolute, relative, verdicts)


def sir_violation_from_linear(
    inst: Instance,
    p: Sequence[Rational],
    r_id: str,
    s_id: str
) -> SirViolationPair:
    """
    Exact violation of the linear SIR row and of the SIR ratio for r served by s.

    eps_linear = delta N - (a_rs p_s - delta sum_{t != s} a_rt p_t) and
    eps_sir = delta - sir_value. The two share sign and differ by the factor
    N + I, so a linear violation of 1e-10 becomes an SIR violation of order 1
    when N + I is of order 1e-10.

    Args:
        inst: Instance
        p: Power vector, converted exactly
        r_id: Receiver id
        s_id: Serving transmitter id

    Returns:
        SirViolationPair
    """
    power = [to_fraction(v) for v in p]
    row = linearized_sir_row(inst, r_id, s_id)
    eps_linear = row.rhs - row.activity(power)
    receiver = inst.receiver(r_id)
    eps_sir = receiver.delta - sir_value(inst, power, r_id, s_id)
    denominator = receiver.noise + interference(inst, power, r_id, s_id)
    return SirViolationPair(r_id, s_id, eps_linear, eps_sir, 1 / denominator)
