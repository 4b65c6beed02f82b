"""Accuracy suite: generate, solve, audit, verify and refine a grid of instances."""

import logging
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence

from tqdm import tqdm

from .audit import audit_solution, refine_solution, verify_assignment_exact
from .core_model import build_spap, coefficient_range, model_dimensions, scale_rows
from .instgen import GenParams, generate_instance
from .lp_exact import FEASIBLE
from .mip_bnb import solve_spap_bnb
from .utils import Stopwatch, format_rational, to_fraction

logger = logging.getLogger('wnd_accuracy')


@dataclass(frozen=True)
class SuiteCase:
    params: GenParams
    scale: Fraction


def run_case(case: SuiteCase, config) -> Dict:
    """
    Run the full pipeline on one generated instance at one scale factor.

    Args:
        case: Generator parameters and scale factor
        config: Config with tolerances and limits

    Returns:
        Dictionary with one row of the accuracy and refinement tables
    """
    params = case.params
    inst = generate_instance(params)
    mip = build_spap(inst)
    scaled = scale_rows(mip, case.scale) if case.scale != 1 else mip
    alpha_min, alpha_max = coefficient_range(scaled)
    variables, constraints, nonzeros = model_dimensions(scaled)

    result = solve_spap_bnb(
        scaled,
        eps=config.feasibility_tol,
        node_limit=config.node_limit,
        time_limit=config.time_limit,
        int_tol=config.integrality_tol,
        lp_iteration_limit=config.lp_iteration_limit,
        provenance={'seed': params.seed, 'scale_factor': case.scale}
    )
    row = {
        'receivers': params.receivers,
        'transmitters': params.transmitters,
        'seed': params.seed,
        'scale': format_rational(case.scale),
        'variables': variables,
        'constraints': constraints,
        'nonzeros': nonzeros,
        'alpha_min': float(alpha_min) if alpha_min is not None else None,
        'alpha_max': float(alpha_max) if alpha_max is not None else None,
        'mip_status': result.status,
        'nodes': result.nodes,
        'mip_time': result.elapsed,
    }
    sol = result.solution
    if sol is None:
        row['exact_status'] = 'no solution'
        return row

    report = audit_solution(inst, sol, config.serve_tol)
    row.update({
        'objective': int(sol.objective_claimed) if sol.objective_claimed.denominator == 1
        else float(sol.objective_claimed),
        'linear_violation': None if report.max_linear_violation is None
        else float(report.max_linear_violation),
        'sir_violation': None if report.max_sir_violation is None
        else float(report.max_sir_violation),
        'served': report.served,
        'unserved': report.unserved,
    })

    verification = verify_assignment_exact(inst, sol.x, warm_start_scale=to_fraction(config.scale_factor))
    row['exact_status'] = verification.status
    row['exact_time'] = verification.time
    row['exact_pivots'] = verification.pivots

    if verification.status == FEASIBLE:
        stopwatch = Stopwatch()
        _, refinement = refine_solution(
            inst, sol,
            scale=case.scale,
            tol=config.refine_tol,
            max_rounds=config.refine_max_rounds,
            scaling_cap=config.refine_scaling_cap
        )
        refine_time = stopwatch.elapsed()
        row.update({
            'refine_status': refinement.status,
            'refine_rounds': refinement.rounds,
            'refine_violation': None if refinement.max_violation is None
            else float(refinement.max_violation),
            'refine_time': refine_time,
            'time_difference_pct': (
                (verification.time - refine_time) / verification.time * 100.0
                if verification.time > 0 else None
            ),
        })
    return row


def run_accuracy_suite(
    specs: Sequence[GenParams],
    scale_factors: Sequence,
    config,
    max_workers: Optional[int] = None
) -> List[Dict]:
    """
    Run every generator parameter set at every scale factor.

    Args:
        specs: Generator parameters, one per instance
        scale_factors: Row scaling factors (1 means unscaled)
        config: Config with tolerances and limits
        max_workers: Thread count, config.max_workers by default

    Returns:
        Rows in (parameter set, scale) input order
    """
    cases = [SuiteCase(params, to_fraction(scale)) for params in specs for scale in scale_factors]
    rows: List[Optional[Dict]] = [None] * len(cases)
    workers = max_workers or config.max_workers

    logger.info(f"Running accuracy suite: {len(specs)} instances x {len(scale_factors)} scale factors")
    with ThreadPoolExecutor(max_workers=workers) as executor:
        futures = {executor.submit(run_case, case, config): i for i, case in enumerate(cases)}

        with tqdm(total=len(cases), desc="Accuracy suite") as pbar:
            for future in as_completed(futures):
                i = futures[future]
                case = cases[i]
                try:
                    rows[i] = future.result()
                except Exception as e:
                    logger.error(
                        f"Suite case seed {case.params.seed}, scale {format_rational(case.scale)} failed: {e}"
                    )
                    rows[i] = {
                        'receivers': case.params.receivers,
                        'transmitters': case.params.transmitters,
                        'seed': case.params.seed,
                        'scale': format_rational(case.scale),
                        'exact_status': 'error',
                        'error': str(e),
                    }
                finally:
                    pbar.update(1)

    logger.info(f"✓ Completed {len(rows)} suite runs")
    return rows
