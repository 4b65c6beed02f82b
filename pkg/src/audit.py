"""A-posteriori auditing, exact verification and power repair of coverage plans."""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Tuple

from .core_model import Assignment, Instance, build_pap, scale_rows
from .lp_exact import FEASIBLE, FarkasCertificate, solve_lp_exact
from .lp_fp import OPTIMAL, FloatSimplex
from .lp_refine import SUCCESS, RefineResult, refine_lp
from .mip_bnb import SOURCE_EXACT, SOURCE_REFINED, Solution
from .tolerance import sir_violation_from_linear
from .utils import Rational, Stopwatch, format_duration, format_sci, to_fraction, tolerance_fraction

logger = logging.getLogger('wnd_accuracy')

DEFAULT_SERVE_TOL = 1e-6
DEFAULT_WARM_START_SCALE = Fraction(10) ** 12


@dataclass(frozen=True)
class ReceiverAudit:
    receiver: str
    server: str
    eps_linear: Fraction
    eps_sir: Fraction
    sir: Fraction
    served: bool


@dataclass(frozen=True)
class AuditReport:
    """
    Violation statistics of one solution.

    Only receivers the solution claims to serve are audited. Maxima are
    None when nothing is claimed.
    """

    objective_claimed: Fraction
    max_linear_violation: Optional[Fraction]
    max_sir_violation: Optional[Fraction]
    served: int
    unserved: int
    per_receiver: Tuple[ReceiverAudit, ...] = ()
    serve_tol: Fraction = Fraction(1, 10 ** 6)

    @property
    def claimed(self) -> int:
        return self.served + self.unserved

    @property
    def passed(self) -> bool:
        return self.unserved == 0


@dataclass(frozen=True)
class VerificationResult:
    status: str
    power: Optional[Tuple[Fraction, ...]] = None
    certificate: Optional[FarkasCertificate] = None
    time: float = 0.0
    pivots: int = 0
    row_tags: Tuple[Tuple[str, str], ...] = field(default_factory=tuple)


def audit_solution(inst: Instance, sol: Solution, serve_tol: Rational = DEFAULT_SERVE_TOL) -> AuditReport:
    """
    Check a returned coverage plan against the exact SIR conditions.

    A claimed receiver counts as served when its SIR is at least
    delta - serve_tol at the solution's power vector.

    Args:
        inst: Instance
        sol: Solution to audit
        serve_tol: Served-count tolerance (exact decimal of the given value)

    Returns:
        AuditReport

    Raises:
        ValueError: If the power vector or the assignment does not match inst
    """
    tol = tolerance_fraction(serve_tol)
    if tol < 0:
        raise ValueError(f"serve_tol must be nonnegative, got: {serve_tol}")
    if len(sol.p) != len(inst.transmitters):
        raise ValueError(
            f"Solution has {len(sol.p)} power values, instance has {len(inst.transmitters)} transmitters"
        )
    sol.x.validate(inst)

    rows = []
    for receiver in inst.receivers:
        server = sol.x.server_of(receiver.id)
        if server is None:
            continue
        pair = sir_violation_from_linear(inst, sol.p, receiver.id, server)
        rows.append(ReceiverAudit(
            receiver.id, server, pair.eps_linear, pair.eps_sir,
            receiver.delta - pair.eps_sir, pair.eps_sir <= tol
        ))

    served = sum(1 for row in rows if row.served)
    report = AuditReport(
        objective_claimed=Fraction(sol.objective_claimed),
        max_linear_violation=max((row.eps_linear for row in rows), default=None),
        max_sir_violation=max((row.eps_sir for row in rows), default=None),
        served=served,
        unserved=len(rows) - served,
        per_receiver=tuple(rows),
        serve_tol=tol
    )
    logger.info(
        f"Audit: {report.claimed} claimed, {report.served} served, "
        f"linear viol. {format_sci(report.max_linear_violation)}, "
        f"SIR viol. {format_sci(report.max_sir_violation)}"
    )
    return report


def verify_assignment_exact(
    inst: Instance,
    asg: Assignment,
    warm_start_scale: Optional[Rational] = DEFAULT_WARM_START_SCALE,
    eps: float = 1e-6
) -> VerificationResult:
    """
    Fix the assignment and decide exactly whether some power vector serves
    every claimed receiver.

    The PAP is first solved in floating point (rows scaled by
    warm_start_scale) and its basis seeds the exact solver.

    Args:
        inst: Instance
        asg: Assignment to verify
        warm_start_scale: Row scaling of the floating-point warm start, None to skip it
        eps: Feasibility tolerance of the warm start solve

    Returns:
        VerificationResult with a rational power vector or a Farkas certificate
    """
    stopwatch = Stopwatch()
    lp = build_pap(inst, asg)

    basis = None
    if warm_start_scale is not None and lp.num_rows:
        scaled = scale_rows(lp, to_fraction(warm_start_scale))
        start = FloatSimplex(scaled, eps).solve()
        if start.status == OPTIMAL:
            basis = start.basis
        else:
            logger.debug(f"Warm start solve returned {start.status}; starting exact solve cold")

    result = solve_lp_exact(lp, warm_basis=basis)
    elapsed = stopwatch.elapsed()
    tags = tuple(row.tag for row in lp.rows)
    logger.info(
        f"Exact verification of {len(asg)} assignments: {result.status} "
        f"({result.pivots_after_warmstart} pivots after warm start, {format_duration(elapsed)})"
    )
    if result.status == FEASIBLE:
        return VerificationResult(FEASIBLE, power=result.point, time=elapsed,
                                  pivots=result.pivots_after_warmstart, row_tags=tags)
    return VerificationResult(result.status, certificate=result.certificate, time=elapsed,
                              pivots=result.pivots_after_warmstart, row_tags=tags)


def repair_from_verification(sol: Solution, verification: VerificationResult) -> Solution:
    """Substitute the exact power vector of a feasible verification."""
    if verification.status != FEASIBLE:
        raise ValueError(f"Cannot repair from a {verification.status} verification")
    return sol.with_power(verification.power, SOURCE_EXACT)


def refine_solution(
    inst: Instance,
    sol: Solution,
    scale: Rational = 1,
    tol: Rational = '1e-25',
    max_rounds: int = 10,
    scaling_cap: Rational = Fraction(2) ** 40
) -> Tuple[Solution, RefineResult]:
    """
    Recompute the power vector of a solution by iterative refinement on
    its PAP (rows scaled by scale). The assignment is left unchanged.

    Returns:
        (repaired solution, refinement result); the solution keeps its old
        power vector unless refinement succeeded
    """
    lp = scale_rows(build_pap(inst, sol.x), to_fraction(scale))
    result = refine_lp(lp, tol=tol, max_rounds=max_rounds, scaling_cap=scaling_cap)
    if result.status != SUCCESS:
        return sol, result
    return sol.with_power(result.point, SOURCE_REFINED), result


def format_audit_table(report: AuditReport, label: str = '') -> str:
    """Summary line layout of the accuracy tables plus one line per claimed receiver."""
    header = f"{'instance':<16}{'obj.':>8}{'linear viol.':>14}{'SIR viol.':>12}{'served':>8}{'unserved':>10}"
    summary = (
        f"{label:<16}{str(report.objective_claimed):>8}"
        f"{format_sci(report.max_linear_violation):>14}"
        f"{format_sci(report.max_sir_violation):>12}"
        f"{report.served:>8}{report.unserved:>10}"
    )
    lines = [header, summary]
    if report.per_receiver:
        lines.append('')
        lines.append(f"{'receiver':<12}{'server':<12}{'eps_linear':>12}{'eps_SIR':>12}{'SIR':>12}  served")
        for row in report.per_receiver:
            lines.append(
                f"{row.receiver:<12}{row.server:<12}{format_sci(row.eps_linear):>12}"
                f"{format_sci(row.eps_sir):>12}{format_sci(row.sir, 3):>12}  {'yes' if row.served else 'NO'}"
            )
    return '\n'.join(lines)
