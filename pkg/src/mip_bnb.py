"""
Branch-and-bound for SPAP and an exhaustive exact oracle.

The search accepts incumbents the way floating-point MIP solvers do: a
rounded point is kept when every row passes the relative tolerance test.
On unscaled models this lets through power vectors that serve nobody;
verify_exact=True replaces the test by an exact LP solve.
"""

import heapq
import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Tuple

from .core_model import Assignment, Instance, MipProblem, build_pap, fix_assignment
from .lp_exact import FEASIBLE, solve_lp_exact
from .lp_fp import INFEASIBLE, ITERATION_LIMIT, OPTIMAL, Basis, FloatSimplex, solve_lp_fp
from .tolerance import is_row_satisfied
from .utils import Stopwatch, format_duration

logger = logging.getLogger('wnd_accuracy')

STATUS_OPTIMAL = 'optimal'
STATUS_LIMIT = 'feasible_limit'
STATUS_INFEASIBLE = 'infeasible'

SOURCE_FP = 'floating-point'
SOURCE_EXACT = 'exact'
SOURCE_REFINED = 'refined'

DEFAULT_BRUTE_FORCE_LIMIT = 100000


@dataclass(frozen=True)
class Solution:
    """
    A coverage plan: power per transmitter (transmitter order), the
    assignment, the claimed objective and where the numbers came from.
    """

    p: Tuple[Fraction, ...]
    x: Assignment
    objective_claimed: Fraction
    provenance: Mapping[str, object] = field(default_factory=dict)
    power_source: str = SOURCE_FP

    def with_power(self, p, source: str) -> 'Solution':
        """Same assignment and claim with a repaired power vector."""
        return Solution(tuple(Fraction(v) for v in p), self.x, self.objective_claimed,
                        dict(self.provenance), source)


@dataclass(frozen=True)
class MipResult:
    status: str
    solution: Optional[Solution]
    nodes: int
    dual_bound: Optional[float]
    elapsed: float = 0.0


@dataclass
class _Node:
    bounds: Dict[int, Tuple[int, int]]
    bound: float
    basis: Optional[Basis]
    depth: int = 0


class _Incumbents:
    """Turns rounded relaxation points into solutions of the MIP."""

    def __init__(self, mip: MipProblem, eps: float, verify_exact: bool, iteration_limit: int):
        self.mip = mip
        self.eps = eps
        self.verify_exact = verify_exact
        self.iteration_limit = iteration_limit
        self.keep = [i for i in range(mip.lp.num_variables) if i not in mip.binaries]
        new_index = {old: new for new, old in enumerate(self.keep)}
        self.power_positions = [new_index[idx] for idx in mip.power_index.values()]
        self.revenue = dict(mip.lp.objective)

    def claimed(self, asg: Assignment) -> Fraction:
        return sum(
            (self.revenue.get(self.mip.assignment_index[pair], Fraction(0)) for pair in asg.items()),
            Fraction(0)
        )

    def accept(self, asg: Assignment, point=None) -> Optional[Tuple[Tuple[Fraction, ...], str]]:
        """
        Power vector supporting asg, or None when the candidate is rejected.

        Without a point the fixed LP is solved directly.
        """
        fixed = fix_assignment(self.mip, asg)
        if self.verify_exact:
            result = solve_lp_exact(fixed)
            if result.status != FEASIBLE:
                return None
            return tuple(result.point[k] for k in self.power_positions), SOURCE_EXACT

        if point is not None:
            reduced = [point[i] for i in self.keep]
            if all(is_row_satisfied(row, reduced, self.eps) for row in fixed.rows):
                return tuple(Fraction(reduced[k]) for k in self.power_positions), SOURCE_FP

        result = solve_lp_fp(fixed, self.eps, self.iteration_limit)
        if result.status != OPTIMAL:
            return None
        return tuple(Fraction(result.point[k]) for k in self.power_positions), SOURCE_FP

    def strongest_links(self) -> List[Tuple[Fraction, str, str]]:
        """(fading, receiver, transmitter) of each receiver's best link, strongest first."""
        best: Dict[str, Tuple[Fraction, str]] = {}
        for row in self.mip.lp.rows:
            if row.tag is None:
                continue
            r_id, s_id = row.tag
            gain = row.as_dict().get(self.mip.power_index[s_id], Fraction(0))
            if gain > 0 and (r_id not in best or gain > best[r_id][0]):
                best[r_id] = (gain, s_id)
        links = [(gain, r_id, s_id) for r_id, (gain, s_id) in best.items()]
        links.sort(key=lambda link: (-link[0], link[1]))
        return links

    def greedy(self, out_of_time) -> Tuple[Assignment, Optional[Tuple[Tuple[Fraction, ...], str]]]:
        """
        Add receivers one at a time, strongest link first, keeping each
        one whose fixed LP is still accepted.
        """
        pairs: Dict[str, str] = {}
        accepted = None
        for _, r_id, s_id in self.strongest_links():
            if out_of_time():
                break
            trial = dict(pairs)
            trial[r_id] = s_id
            outcome = self.accept(Assignment(trial))
            if outcome is not None:
                pairs, accepted = trial, outcome
        return Assignment(pairs), accepted


def _branching_variable(
    mip: MipProblem,
    point,
    int_tol: float
) -> Tuple[Optional[int], bool]:
    """(index, fractional) of the binary to branch on; most fractional first, lowest index on ties."""
    best = None
    best_frac = int_tol
    for idx in sorted(mip.binaries):
        value = point[idx]
        frac = min(value, 1.0 - value)
        if frac > best_frac:
            best, best_frac = idx, frac
    return best, best is not None


def _fallback_branching(mip: MipProblem, point, bounds: Dict[int, Tuple[int, int]]) -> Optional[int]:
    unfixed = [idx for idx in sorted(mip.binaries) if idx not in bounds]
    for idx in unfixed:
        if point[idx] >= 0.5:
            return idx
    return unfixed[0] if unfixed else None


def solve_spap_bnb(
    mip: MipProblem,
    eps: float = 1e-6,
    node_limit: int = 2000,
    time_limit: float = 300.0,
    int_tol: float = 1e-6,
    verify_exact: bool = False,
    lp_iteration_limit: int = 20000,
    provenance: Optional[Mapping[str, object]] = None,
    greedy_start: bool = True
) -> MipResult:
    """
    Best-bound branch-and-bound over the LP relaxation of an SPAP model.

    After branching the search plunges into the up child; the down child
    waits in the best-bound queue. Relaxation points are rounded (binaries
    at 1 kept, fractional ones dropped) and the resulting assignment is
    accepted when every row of the fixed LP passes the relative tolerance
    test at eps, or when the fixed LP solves in floating point.
    Before the search a greedy pass adds receivers strongest link first,
    re-solving the fixed LP after each one, and seeds the incumbent.
    greedy_start=False leaves a pure branch-and-bound.

    Args:
        mip: Problem from build_spap, possibly scaled
        eps: Feasibility tolerance of LP solves and incumbent checks
        node_limit: Maximum number of LP relaxations
        time_limit: Wall-clock limit in seconds
        int_tol: Integrality tolerance on binaries
        verify_exact: Accept incumbents only after an exact LP solve
        lp_iteration_limit: Simplex iteration limit per relaxation
        provenance: Extra provenance entries (scale factor, source file)
        greedy_start: Seed the incumbent with the greedy pass

    Returns:
        MipResult
    """
    if eps <= 0:
        raise ValueError(f"Feasibility tolerance must be positive, got: {eps}")
    if node_limit < 1:
        raise ValueError(f"Node limit must be positive, got: {node_limit}")

    stopwatch = Stopwatch()
    context = FloatSimplex(mip.lp, eps, lp_iteration_limit)
    incumbents = _Incumbents(mip, eps, verify_exact, lp_iteration_limit)
    info = {
        'solver': 'bnb',
        'eps': eps,
        'int_tol': int_tol,
        'node_limit': node_limit,
        'time_limit': time_limit,
        'verify_exact': verify_exact,
        'greedy_start': greedy_start,
    }
    info.update(provenance or {})

    best: Optional[Solution] = None
    best_value = float('-inf')

    def prunable(bound: float) -> bool:
        if best is None:
            return False
        return bound <= best_value + 1e-9 * max(1.0, abs(best_value))

    def offer(asg: Assignment, point) -> None:
        nonlocal best, best_value
        claimed = incumbents.claimed(asg)
        if best is not None and float(claimed) <= best_value:
            return
        accepted = incumbents.accept(asg, point)
        if accepted is None:
            return
        power, source = accepted
        best = Solution(power, asg, claimed, info, source)
        best_value = float(claimed)
        logger.debug(f"New incumbent with objective {claimed} after {nodes} nodes")

    nodes = 0
    counter = itertools.count()
    heap: List[Tuple[float, int, _Node]] = []
    plunge: Optional[_Node] = _Node({}, float('inf'), None)
    limit_hit = False

    # the all-zero assignment is a candidate at any node
    offer(Assignment({}), [0.0] * mip.lp.num_variables)

    if greedy_start:
        greedy_asg, greedy_power = incumbents.greedy(lambda: stopwatch.elapsed() > time_limit)
        claimed = incumbents.claimed(greedy_asg)
        if greedy_power is not None and float(claimed) > best_value:
            best = Solution(greedy_power[0], greedy_asg, claimed, info, greedy_power[1])
            best_value = float(claimed)
            logger.debug(f"Greedy incumbent with objective {claimed}")

    while plunge is not None or heap:
        if nodes >= node_limit or stopwatch.elapsed() > time_limit:
            limit_hit = True
            break

        if plunge is not None:
            node, plunge = plunge, None
        else:
            _, _, node = heapq.heappop(heap)
        if prunable(node.bound):
            continue

        result = context.solve(bounds=node.bounds, warm_basis=node.basis)
        nodes += 1
        if result.status == INFEASIBLE:
            continue
        if result.status == ITERATION_LIMIT:
            logger.warning(f"Node at depth {node.depth} hit the LP iteration limit; dropping it")
            continue
        if result.status != OPTIMAL:
            logger.warning(f"Node at depth {node.depth} returned {result.status}; dropping it")
            continue

        bound = result.objective
        if prunable(bound):
            continue

        point = result.point
        branch_idx, fractional = _branching_variable(mip, point, int_tol)
        if fractional:
            offer(Assignment.from_binary(mip, point, int_tol), point)
        else:
            asg = Assignment.from_binary(mip, point, int_tol)
            offer(asg, point)
            if best is not None and best.x == asg:
                continue
            branch_idx = _fallback_branching(mip, point, node.bounds)
            if branch_idx is None:
                continue

        down = dict(node.bounds)
        down[branch_idx] = (0, 0)
        up = dict(node.bounds)
        up[branch_idx] = (1, 1)
        heapq.heappush(heap, (-bound, next(counter), _Node(down, bound, result.basis, node.depth + 1)))
        plunge = _Node(up, bound, result.basis, node.depth + 1)

    elapsed = stopwatch.elapsed()
    if limit_hit:
        open_bounds = [-key for key, _, _ in heap]
        if plunge is not None:
            open_bounds.append(plunge.bound)
        if nodes == 0:
            # no relaxation was solved
            dual_bound = None
        else:
            dual_bound = max([best_value] + open_bounds) if best is not None else max(open_bounds, default=None)
        status = STATUS_LIMIT
        logger.warning(f"Branch-and-bound stopped at a limit after {nodes} nodes ({format_duration(elapsed)})")
    else:
        dual_bound = best_value if best is not None else None
        status = STATUS_OPTIMAL if best is not None else STATUS_INFEASIBLE

    if best is not None:
        logger.info(
            f"Branch-and-bound {status}: objective {best.objective_claimed}, "
            f"{len(best.x)} receivers claimed, {nodes} nodes, {format_duration(elapsed)}"
        )
    return MipResult(status, best, nodes, dual_bound, elapsed)


def brute_force_spap(inst: Instance, limit: int = DEFAULT_BRUTE_FORCE_LIMIT) -> MipResult:
    """
    Exhaustive exact oracle for SPAP.

    Assignments are tried in order of decreasing revenue, ties broken by
    their encoding; the first one whose PAP is exactly feasible is optimal.
    Candidates containing the infeasible core of an earlier candidate are
    skipped without solving.

    Args:
        inst: Instance
        limit: Largest number of assignments to enumerate

    Returns:
        MipResult with an exact power vector

    Raises:
        ValueError: If (|T| + 1)^|R| exceeds limit
    """
    n_t = len(inst.transmitters)
    n_r = len(inst.receivers)
    count = (n_t + 1) ** n_r
    if count > limit:
        raise ValueError(
            f"Brute force would enumerate {count} assignments for {n_r} receivers and "
            f"{n_t} transmitters, limit is {limit}"
        )

    stopwatch = Stopwatch()
    revenues = [r.revenue for r in inst.receivers]

    def revenue(encoding: Tuple[int, ...]) -> Fraction:
        return sum((revenues[i] for i, t in enumerate(encoding) if t < n_t), Fraction(0))

    candidates = sorted(
        itertools.product(range(n_t + 1), repeat=n_r),
        key=lambda enc: (-revenue(enc), enc)
    )

    cores: List[frozenset] = []
    solves = 0
    for encoding in candidates:
        pairs = frozenset(
            (inst.receivers[i].id, inst.transmitters[t].id)
            for i, t in enumerate(encoding) if t < n_t
        )
        if any(core <= pairs for core in cores):
            continue
        asg = Assignment(dict(pairs))
        lp = build_pap(inst, asg)
        result = solve_lp_exact(lp)
        solves += 1
        if result.status == FEASIBLE:
            objective = revenue(encoding)
            solution = Solution(
                result.point, asg, objective,
                {'solver': 'brute_force', 'limit': limit}, SOURCE_EXACT
            )
            logger.debug(f"Brute force: objective {objective} after {solves} exact solves")
            return MipResult(STATUS_OPTIMAL, solution, solves, float(objective), stopwatch.elapsed())
        core = frozenset(lp.rows[i].tag for i in result.certificate.core)
        if core:
            cores.append(core)

    # unreachable: the empty assignment has no rows
    return MipResult(STATUS_INFEASIBLE, None, solves, None, stopwatch.elapsed())
