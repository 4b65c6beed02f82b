"""Command-line pipeline: generate, solve, audit, verify, refine."""

import argparse
import os
import sys
import time
from fractions import Fraction

from config import load_config, validate_config
from src import __version__
from src.audit import (
    audit_solution,
    format_audit_table,
    refine_solution,
    repair_from_verification,
    verify_assignment_exact
)
from src.core_model import Assignment, build_pap, build_spap, scale_rows
from src.excel_exporter import ExcelExporter
from src.experiments import run_accuracy_suite
from src.file_formats import (
    load_instance,
    load_solution,
    save_certificate,
    save_instance,
    save_report,
    save_solution,
    write_mps
)
from src.instgen import GenParams, generate_instance
from src.lp_exact import FEASIBLE
from src.lp_fp import OPTIMAL, solve_lp_fp
from src.lp_refine import SUCCESS
from src.mip_bnb import STATUS_OPTIMAL, MipResult, Solution, brute_force_spap, solve_spap_bnb
from src.utils import (
    format_duration,
    format_rational,
    format_sci,
    generate_output_filename,
    setup_logging,
    to_fraction
)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description='Exact accuracy auditing for wireless network design models'
    )
    parser.add_argument('--log-level', help='Override WND_LOG_LEVEL')
    sub = parser.add_subparsers(dest='command', required=True)

    gen = sub.add_parser('gen', help='Generate a seeded instance')
    gen.add_argument('--receivers', type=int, required=True)
    gen.add_argument('--transmitters', type=int, required=True)
    gen.add_argument('--seed', type=int, default=0)
    gen.add_argument('--area-size', type=float, default=10000.0)
    gen.add_argument('--pathloss-exponent', type=float, default=3.5)
    gen.add_argument('--reference-fading-db', type=float, default=-30.0)
    gen.add_argument('--noise-dbmw', type=float, default=-120.0)
    gen.add_argument('--delta-db', type=float, default=8.0)
    gen.add_argument('--pmax-dbmw', type=float, default=30.0)
    gen.add_argument('--shadowing-sigma-db', type=float, default=0.0)
    gen.add_argument('--near-receivers', type=int, default=0,
                     help='Receivers placed within --near-radius of a transmitter')
    gen.add_argument('--near-radius', type=float, default=5.0)
    gen.add_argument('-o', '--output', required=True)

    solve = sub.add_parser('solve', help='Solve PAP or SPAP in floating point')
    solve.add_argument('instance')
    solve.add_argument('--model', choices=['pap', 'spap'], default='spap')
    solve.add_argument('--assignment', help='Solution file whose assignment the PAP serves')
    solve.add_argument('--scale', help='Row scaling factor (default WND_SCALE_FACTOR)')
    solve.add_argument('--eps', type=float, help='Feasibility tolerance')
    solve.add_argument('--node-limit', type=int)
    solve.add_argument('--time-limit', type=float)
    solve.add_argument('--verify-exact', action='store_true',
                       help='Accept incumbents only after exact verification')
    solve.add_argument('--brute-force', action='store_true',
                       help='Enumerate every assignment with exact PAP solves (small instances)')
    solve.add_argument('-o', '--output', required=True)

    audit = sub.add_parser('audit', help='Check a solution against the exact SIR conditions')
    audit.add_argument('instance')
    audit.add_argument('solution')
    audit.add_argument('--serve-tol', help='Served-count tolerance')
    audit.add_argument('--label', default='')
    audit.add_argument('-o', '--output', help='Report JSON path')

    verify = sub.add_parser('verify', help='Exactly verify the assignment of a solution')
    verify.add_argument('instance')
    verify.add_argument('solution')
    verify.add_argument('-o', '--output', help='Repaired solution path (feasible case)')
    verify.add_argument('--certificate', help='Certificate path (infeasible case)')

    refine = sub.add_parser('refine', help='Repair the power vector by iterative refinement')
    refine.add_argument('instance')
    refine.add_argument('solution')
    refine.add_argument('--tol', help='Target absolute violation')
    refine.add_argument('--max-rounds', type=int)
    refine.add_argument('--scale', help='Row scaling factor of the refined PAP')
    refine.add_argument('-o', '--output', required=True)

    mps = sub.add_parser('export-mps', help='Write the model as a lossy MPS file')
    mps.add_argument('instance')
    mps.add_argument('--model', choices=['pap', 'spap'], default='spap')
    mps.add_argument('--assignment', help='Solution file whose assignment the PAP serves')
    mps.add_argument('--scale', default='1')
    mps.add_argument('-o', '--output', required=True)

    suite = sub.add_parser('suite', help='Run the accuracy suite and write an Excel workbook')
    suite.add_argument('--receivers', type=int, nargs='+', required=True)
    suite.add_argument('--transmitters', type=int, nargs='+', required=True)
    suite.add_argument('--seeds', type=int, nargs='+', default=[1])
    suite.add_argument('--scales', nargs='+', default=['1', '1e12'])
    suite.add_argument('--delta-db', type=float, default=8.0)
    suite.add_argument('--near-receivers', type=int, default=0)
    suite.add_argument('--node-limit', type=int)
    suite.add_argument('--max-workers', type=int)
    suite.add_argument('-o', '--output', help='Workbook path')

    return parser


def log_header(logger, title: str, **provenance) -> None:
    logger.info("=" * 70)
    logger.info(f"wnd-accuracy {__version__} - {title}")
    for key, value in provenance.items():
        if value is not None:
            logger.info(f"  {key}: {value}")
    logger.info("=" * 70)


def _assignment_from(inst, path: str) -> Assignment:
    return load_solution(inst, path).x


def cmd_gen(args, config, logger) -> int:
    params = GenParams(
        receivers=args.receivers,
        transmitters=args.transmitters,
        area_size=args.area_size,
        pathloss_exponent=args.pathloss_exponent,
        reference_fading_db=args.reference_fading_db,
        noise_dbmw=args.noise_dbmw,
        delta_db=args.delta_db,
        pmax_dbmw=args.pmax_dbmw,
        seed=args.seed,
        shadowing_sigma_db=args.shadowing_sigma_db,
        near_receivers=args.near_receivers,
        near_radius=args.near_radius
    )
    log_header(logger, 'gen', seed=params.seed, receivers=params.receivers,
               transmitters=params.transmitters, delta_db=params.delta_db)
    inst = generate_instance(params)
    save_instance(inst, args.output)
    return EXIT_OK


def cmd_solve(args, config, logger) -> int:
    scale = to_fraction(args.scale or config.scale_factor)
    eps = args.eps if args.eps is not None else config.feasibility_tol
    node_limit = args.node_limit or config.node_limit
    time_limit = args.time_limit or config.time_limit
    inst = load_instance(args.instance)
    log_header(logger, f'solve {args.model}', instance=args.instance, seed=_seed(inst),
               scale=format_rational(scale), eps=eps, node_limit=node_limit, time_limit=time_limit)

    if args.model == 'spap':
        if args.brute_force:
            result = brute_force_spap(inst, limit=config.brute_force_limit)
            logger.info(f"Brute force: objective {result.solution.objective_claimed}, {result.nodes} exact PAP solves")
            save_solution(inst, result.solution, args.output, result)
            return EXIT_OK
        mip = scale_rows(build_spap(inst), scale)
        result = solve_spap_bnb(
            mip, eps=eps, node_limit=node_limit, time_limit=time_limit,
            int_tol=config.integrality_tol, verify_exact=args.verify_exact,
            lp_iteration_limit=config.lp_iteration_limit,
            provenance={'scale_factor': scale, 'instance': args.instance, 'seed': _seed(inst)}
        )
        if result.solution is None:
            logger.error(f"No solution found ({result.status})")
            return EXIT_FAILED
        save_solution(inst, result.solution, args.output, result)
        return EXIT_OK

    if not args.assignment:
        logger.error("--model pap needs --assignment SOLUTION_FILE")
        return EXIT_USAGE
    asg = _assignment_from(inst, args.assignment)
    lp = scale_rows(build_pap(inst, asg), scale)
    fp = solve_lp_fp(lp, eps, config.lp_iteration_limit)
    if fp.status != OPTIMAL:
        logger.error(f"PAP solve returned {fp.status}")
        return EXIT_USAGE
    claimed = asg.revenue(inst)
    sol = Solution(
        tuple(Fraction(v) for v in fp.point), asg, claimed,
        {'solver': 'pap', 'eps': eps, 'scale_factor': scale, 'instance': args.instance}
    )
    result = MipResult(STATUS_OPTIMAL, sol, 0, fp.objective)
    save_solution(inst, sol, args.output, result)
    return EXIT_OK


def cmd_audit(args, config, logger) -> int:
    serve_tol = args.serve_tol if args.serve_tol is not None else config.serve_tol
    inst = load_instance(args.instance)
    sol = load_solution(inst, args.solution)
    log_header(logger, 'audit', instance=args.instance, solution=args.solution,
               serve_tol=serve_tol, scale=sol.provenance.get('scale_factor'))
    report = audit_solution(inst, sol, serve_tol)
    for line in format_audit_table(report, args.label or os.path.basename(args.solution)).splitlines():
        logger.info(line)
    if args.output:
        save_report(report, args.output, args.label)
    if not report.passed:
        logger.warning(f"{report.unserved} of {report.claimed} claimed receivers violate their SIR threshold")
        return EXIT_FAILED
    return EXIT_OK


def cmd_verify(args, config, logger) -> int:
    inst = load_instance(args.instance)
    sol = load_solution(inst, args.solution)
    log_header(logger, 'verify', instance=args.instance, solution=args.solution,
               warm_start_scale=config.scale_factor)
    verification = verify_assignment_exact(
        inst, sol.x, warm_start_scale=to_fraction(config.scale_factor), eps=config.feasibility_tol
    )
    logger.info(f"Exact verdict: {verification.status} in {format_duration(verification.time)}")
    if verification.status == FEASIBLE:
        if args.output:
            save_solution(inst, repair_from_verification(sol, verification), args.output)
        return EXIT_OK

    certificate_path = args.certificate or f"{os.path.splitext(args.solution)[0]}.certificate.json"
    save_certificate(inst, verification, certificate_path)
    return EXIT_FAILED


def cmd_refine(args, config, logger) -> int:
    tol = args.tol or config.refine_tol
    max_rounds = args.max_rounds or config.refine_max_rounds
    scale = to_fraction(args.scale or config.scale_factor)
    inst = load_instance(args.instance)
    sol = load_solution(inst, args.solution)
    log_header(logger, 'refine', instance=args.instance, solution=args.solution,
               tol=tol, max_rounds=max_rounds, scale=format_rational(scale))
    repaired, result = refine_solution(
        inst, sol, scale=scale, tol=tol, max_rounds=max_rounds,
        scaling_cap=config.refine_scaling_cap
    )
    for i, violation in enumerate(result.per_round_violations, 1):
        logger.info(f"  round {i}: max violation {format_sci(violation)}")
    logger.info(f"Refinement {result.status} after {result.rounds} rounds")
    save_solution(inst, repaired, args.output, refinement=result)
    return EXIT_OK if result.status == SUCCESS else EXIT_FAILED


def cmd_export_mps(args, config, logger) -> int:
    scale = to_fraction(args.scale)
    inst = load_instance(args.instance)
    log_header(logger, f'export-mps {args.model}', instance=args.instance, scale=format_rational(scale))
    if args.model == 'spap':
        problem = scale_rows(build_spap(inst), scale)
    else:
        if not args.assignment:
            logger.error("--model pap needs --assignment SOLUTION_FILE")
            return EXIT_USAGE
        problem = scale_rows(build_pap(inst, _assignment_from(inst, args.assignment)), scale)
    write_mps(problem, args.output)
    return EXIT_OK


def cmd_suite(args, config, logger) -> int:
    if len(args.receivers) != len(args.transmitters):
        logger.error("--receivers and --transmitters need the same number of values")
        return EXIT_USAGE
    if args.node_limit:
        config.node_limit = args.node_limit
    specs = [
        GenParams(receivers=r, transmitters=t, seed=seed, delta_db=args.delta_db,
                  near_receivers=args.near_receivers)
        for r, t in zip(args.receivers, args.transmitters)
        for seed in args.seeds
    ]
    output = args.output or os.path.join(config.output_dir, generate_output_filename('accuracy_tables', 'xlsx'))
    log_header(logger, 'suite', instances=len(specs), scales=' '.join(args.scales),
               eps=config.feasibility_tol, node_limit=config.node_limit, output=output)

    rows = run_accuracy_suite(specs, args.scales, config, args.max_workers)

    exporter = ExcelExporter(output)
    for scale in args.scales:
        label = format_rational(to_fraction(scale))
        title = 'Unscaled' if to_fraction(scale) == 1 else f'Scaled {scale}'
        exporter.create_accuracy_sheet(title, [row for row in rows if row.get('scale') == label])
    exporter.create_refinement_sheet(rows)
    exporter.create_summary_sheet(rows)
    exporter.apply_formatting()
    os.makedirs(os.path.dirname(output) or '.', exist_ok=True)
    exporter.save()
    return EXIT_OK


def _seed(inst):
    return inst.meta.get('generator', {}).get('seed')


COMMANDS = {
    'gen': cmd_gen,
    'solve': cmd_solve,
    'audit': cmd_audit,
    'verify': cmd_verify,
    'refine': cmd_refine,
    'export-mps': cmd_export_mps,
    'suite': cmd_suite,
}


def main(argv=None) -> int:
    """Main execution flow; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE

    start_time = time.time()
    logger = setup_logging('INFO')

    try:
        config = load_config()
        if args.log_level:
            config.log_level = args.log_level.upper()
        validate_config(config)
        logger = setup_logging(config.log_level)

        code = COMMANDS[args.command](args, config, logger)
        logger.info(f"Finished {args.command} in {format_duration(time.time() - start_time)} (exit {code})")
        return code

    except KeyboardInterrupt:
        logger.info("\nExecution cancelled by user")
        return EXIT_FAILED

    except (ValueError, FileNotFoundError) as e:
        logger.error(f"✗ {args.command} failed: {e}")
        return EXIT_USAGE


if __name__ == '__main__':
    sys.exit(main())
