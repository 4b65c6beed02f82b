"""
JSON file formats for instances, solutions, audit reports and certificates,
plus a lossy MPS writer.

Every number that takes part in exact arithmetic is written as an exact
decimal string or as "num/den", so loading a file gives back the same
rationals.
"""

import json
import logging
import os
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Tuple

from . import __version__
from .audit import AuditReport, VerificationResult
from .core_model import (
    EQ, GE, LE, MAXIMIZE, Assignment, Instance, LinearProgram, MipProblem, Receiver, Transmitter
)
from .lp_refine import RefineResult
from .mip_bnb import MipResult, Solution
from .utils import format_rational, parse_rational

logger = logging.getLogger('wnd_accuracy')

TOOL_NAME = 'wnd-accuracy'


def _json_default(value):
    if isinstance(value, Fraction):
        return format_rational(value)
    if isinstance(value, (set, frozenset, tuple)):
        return list(value)
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


def _write_json(data: dict, path: str) -> None:
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, 'w') as f:
        json.dump(data, f, indent=2, default=_json_default)
    logger.debug(f"Wrote {path}")


def _read_json(path: str, kind: str) -> dict:
    try:
        with open(path, 'r') as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise ValueError(f"Invalid {kind} file {path}: {e}")


def _header(extra: Optional[Mapping[str, object]] = None) -> dict:
    meta = {'tool': TOOL_NAME, 'version': __version__}
    meta.update(extra or {})
    return meta


def _rational(value) -> Fraction:
    if isinstance(value, bool) or not isinstance(value, (str, int)):
        raise ValueError(f"expected a rational string, got {value!r}")
    return parse_rational(str(value))


def _optional(value: Optional[Fraction]) -> Optional[str]:
    return None if value is None else format_rational(value)


# Instances

def instance_to_dict(inst: Instance) -> dict:
    return {
        'meta': _header(dict(inst.meta)),
        'transmitters': [
            {'id': t.id, 'pmax_mw': format_rational(t.p_max)} for t in inst.transmitters
        ],
        'receivers': [
            {
                'id': r.id,
                'noise_mw': format_rational(r.noise),
                'delta': format_rational(r.delta),
                'revenue': format_rational(r.revenue),
            }
            for r in inst.receivers
        ],
        'fading': [[format_rational(a) for a in row] for row in inst.fading],
    }


def instance_from_dict(data: dict) -> Instance:
    meta = dict(data.get('meta', {}))
    meta.pop('tool', None)
    meta.pop('version', None)
    transmitters = tuple(
        Transmitter(str(t['id']), _rational(t['pmax_mw'])) for t in data['transmitters']
    )
    receivers = tuple(
        Receiver(
            str(r['id']), _rational(r['noise_mw']), _rational(r['delta']),
            _rational(r.get('revenue', '1'))
        )
        for r in data['receivers']
    )
    fading = tuple(tuple(_rational(a) for a in row) for row in data['fading'])
    return Instance(transmitters, receivers, fading, meta)


def save_instance(inst: Instance, path: str) -> None:
    _write_json(instance_to_dict(inst), path)
    logger.info(
        f"Instance with {len(inst.receivers)} receivers and {len(inst.transmitters)} "
        f"transmitters saved: {path}"
    )


def load_instance(path: str) -> Instance:
    """
    Load an instance file.

    Raises:
        FileNotFoundError: If the file does not exist
        ValueError: If the file is not a valid instance file
    """
    data = _read_json(path, 'instance')
    try:
        return instance_from_dict(data)
    except (KeyError, TypeError, ValueError) as e:
        raise ValueError(f"Invalid instance file {path}: {e}")


# Solutions

def solution_to_dict(
    inst: Instance,
    sol: Solution,
    result: Optional[MipResult] = None,
    refinement: Optional[RefineResult] = None
) -> dict:
    data = {
        'meta': _header({'provenance': dict(sol.provenance)}),
        'objective_claimed': format_rational(sol.objective_claimed),
        'power_source': sol.power_source,
        'power': {t.id: format_rational(p) for t, p in zip(inst.transmitters, sol.p)},
        'assignment': {r_id: t_id for r_id, t_id in sol.x.items()},
    }
    if result is not None:
        data['status'] = result.status
        data['nodes'] = result.nodes
        data['dual_bound'] = result.dual_bound
        data['elapsed'] = result.elapsed
    if refinement is not None:
        data['refinement'] = refinement_to_dict(refinement)
    return data


def solution_from_dict(inst: Instance, data: dict) -> Solution:
    power_map = data['power']
    missing = [t.id for t in inst.transmitters if t.id not in power_map]
    if missing:
        raise ValueError(f"no power value for transmitters {missing}")
    p = tuple(_rational(power_map[t.id]) for t in inst.transmitters)
    asg = Assignment({str(r): str(t) for r, t in data['assignment'].items()})
    asg.validate(inst)
    provenance = data.get('meta', {}).get('provenance', {})
    return Solution(
        p, asg, _rational(data['objective_claimed']), provenance,
        data.get('power_source', 'floating-point')
    )


def save_solution(
    inst: Instance,
    sol: Solution,
    path: str,
    result: Optional[MipResult] = None,
    refinement: Optional[RefineResult] = None
) -> None:
    _write_json(solution_to_dict(inst, sol, result, refinement), path)
    logger.info(f"Solution saved: {path}")


def load_solution(inst: Instance, path: str) -> Solution:
    """
    Load a solution file for an instance.

    Raises:
        ValueError: If the file is malformed or does not match the instance
    """
    data = _read_json(path, 'solution')
    try:
        return solution_from_dict(inst, data)
    except (KeyError, TypeError, ValueError, AttributeError) as e:
        raise ValueError(f"Invalid solution file {path}: {e}")


# Reports and certificates

def report_to_dict(report: AuditReport, label: str = '') -> dict:
    return {
        'meta': _header({'label': label}),
        'objective_claimed': format_rational(report.objective_claimed),
        'max_linear_violation': _optional(report.max_linear_violation),
        'max_sir_violation': _optional(report.max_sir_violation),
        'served': report.served,
        'unserved': report.unserved,
        'serve_tol': format_rational(report.serve_tol),
        'per_receiver': [
            {
                'receiver': row.receiver,
                'server': row.server,
                'eps_linear': format_rational(row.eps_linear),
                'eps_sir': format_rational(row.eps_sir),
                'sir': format_rational(row.sir),
                'served': row.served,
            }
            for row in report.per_receiver
        ],
    }


def save_report(report: AuditReport, path: str, label: str = '') -> None:
    _write_json(report_to_dict(report, label), path)
    logger.info(f"Audit report saved: {path}")


def refinement_to_dict(result: RefineResult) -> dict:
    return {
        'status': result.status,
        'rounds': result.rounds,
        'max_violation': _optional(result.max_violation),
        'per_round_violations': [format_rational(v) for v in result.per_round_violations],
        'elapsed': result.elapsed,
    }


def certificate_to_dict(inst: Instance, verification: VerificationResult) -> dict:
    """Farkas multipliers keyed by SIR row, plus the bound multipliers per transmitter."""
    cert = verification.certificate
    if cert is None:
        raise ValueError(f"No certificate for a {verification.status} verification")
    rows = {}
    for (r_id, t_id), value in zip(verification.row_tags, cert.row_multipliers):
        rows[f"sir[{r_id},{t_id}]"] = format_rational(value)
    bounds = {t.id: format_rational(v) for t, v in zip(inst.transmitters, cert.bound_multipliers)}
    return {
        'meta': _header(),
        'status': verification.status,
        'sense': 'rows in >=-form, multipliers nonnegative',
        'row_multipliers': rows,
        'bound_multipliers': bounds,
        'core': [f"sir[{verification.row_tags[i][0]},{verification.row_tags[i][1]}]" for i in cert.core],
    }


def load_certificate(path: str) -> Dict[str, Fraction]:
    """Row multipliers of a certificate file keyed by row name."""
    data = _read_json(path, 'certificate')
    try:
        return {name: _rational(v) for name, v in data['row_multipliers'].items()}
    except (KeyError, TypeError, ValueError, AttributeError) as e:
        raise ValueError(f"Invalid certificate file {path}: {e}")


def save_certificate(inst: Instance, verification: VerificationResult, path: str) -> None:
    _write_json(certificate_to_dict(inst, verification), path)
    logger.info(f"Infeasibility certificate saved: {path}")


def save_verification(inst: Instance, verification: VerificationResult, path: str) -> None:
    data = {
        'meta': _header(),
        'status': verification.status,
        'time': verification.time,
        'pivots_after_warmstart': verification.pivots,
    }
    if verification.power is not None:
        data['power'] = {
            t.id: format_rational(p) for t, p in zip(inst.transmitters, verification.power)
        }
    _write_json(data, path)
    logger.info(f"Verification result saved: {path}")


# MPS

def _mps_name(name: str) -> str:
    return name.replace(' ', '_')


def write_mps(problem, path: str, name: str = 'WND') -> None:
    """
    Write an LP or MIP in free MPS format with double-precision numbers.

    The export is lossy: coefficients are rounded to the nearest double.
    Binaries are enclosed in MARKER INTORG/INTEND blocks.

    Args:
        problem: LinearProgram or MipProblem
        path: Output path
        name: Problem name
    """
    lp = problem.lp if isinstance(problem, MipProblem) else problem
    binaries = problem.binaries if isinstance(problem, MipProblem) else frozenset()
    row_names = [_mps_name(row.name or f"r{i}") for i, row in enumerate(lp.rows)]
    col_names = [_mps_name(var.name) for var in lp.variables]
    sense_code = {GE: 'G', LE: 'L', EQ: 'E'}

    columns: List[List[Tuple[str, float]]] = [[] for _ in lp.variables]
    objective = dict(lp.objective)
    for idx, coef in objective.items():
        columns[idx].append(('OBJ', float(coef)))
    for row_name, row in zip(row_names, lp.rows):
        for idx, coef in row.coefficients:
            columns[idx].append((row_name, float(coef)))

    lines = [
        f"* {TOOL_NAME} {__version__}: LOSSY export, exact rationals rounded to doubles",
        f"NAME {name}",
        "OBJSENSE",
        "    MAX" if lp.sense == MAXIMIZE else "    MIN",
        "ROWS",
        " N OBJ",
    ]
    lines.extend(f" {sense_code[row.sense]} {rn}" for rn, row in zip(row_names, lp.rows))
    lines.append("COLUMNS")
    in_marker = False
    for idx, col in enumerate(columns):
        is_int = idx in binaries
        if is_int and not in_marker:
            lines.append("    MARKER 'MARKER' 'INTORG'")
            in_marker = True
        elif not is_int and in_marker:
            lines.append("    MARKER 'MARKER' 'INTEND'")
            in_marker = False
        if not col:
            lines.append(f"    {col_names[idx]} OBJ 0")
        for row_name, value in col:
            lines.append(f"    {col_names[idx]} {row_name} {value!r}")
    if in_marker:
        lines.append("    MARKER 'MARKER' 'INTEND'")

    lines.append("RHS")
    for rn, row in zip(row_names, lp.rows):
        if row.rhs != 0:
            lines.append(f"    RHS {rn} {float(row.rhs)!r}")

    lines.append("BOUNDS")
    for cn, var in zip(col_names, lp.variables):
        if var.upper is not None and var.lower == var.upper:
            lines.append(f" FX BND {cn} {float(var.lower)!r}")
            continue
        if var.lower != 0:
            lines.append(f" LO BND {cn} {float(var.lower)!r}")
        if var.upper is None:
            lines.append(f" PL BND {cn}")
        else:
            lines.append(f" UP BND {cn} {float(var.upper)!r}")
    lines.append("ENDATA")

    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, 'w') as f:
        f.write('\n'.join(lines) + '\n')
    logger.info(f"MPS file saved (lossy): {path}")
