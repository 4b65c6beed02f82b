"""Instance builders and exact oracles shared by the test modules."""

import itertools
import random
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from src.audit import verify_assignment_exact
from src.core_model import EQ, GE, LE, MAXIMIZE, Assignment, Instance, LinearProgram, LinearRow, Variable
from src.lp_exact import FEASIBLE


def tiny1() -> Instance:
    """One receiver, two transmitters, linear data of order 1e-12."""
    return Instance.build(
        [('t1', 1), ('t2', 1)],
        [('r1', '1e-12', 2)],
        [['1e-9', '1e-10']],
    )


def two_cell() -> Instance:
    """Two well-conditioned cells, each receiver near its own transmitter."""
    return Instance.build(
        [('t1', 1), ('t2', 1)],
        [('r1', '1/100', 2), ('r2', '1/100', 2)],
        [['1/2', '1/10'], ['1/10', '1/2']],
    )


def random_instance(rng: random.Random, n_r: int, n_t: int) -> Instance:
    """Small instance with rational data of moderate size."""
    transmitters = [(f"t{j + 1}", Fraction(rng.randint(1, 5))) for j in range(n_t)]
    receivers = [
        (f"r{i + 1}", Fraction(rng.randint(1, 10), 100), Fraction(rng.randint(10, 30), 10), rng.randint(1, 3))
        for i in range(n_r)
    ]
    fading = [[Fraction(rng.randint(0, 100), 100) for _ in range(n_t)] for _ in range(n_r)]
    return Instance.build(transmitters, receivers, fading)


def random_tiny_lp(
    rng: random.Random,
    max_vars: int = 4,
    max_rows: int = 4,
    with_objective: bool = False
) -> LinearProgram:
    """Random LP with integer data and a finite box, minimizing an integer objective if asked."""
    n = rng.randint(1, max_vars)
    m = rng.randint(1, max_rows)
    variables = []
    for j in range(n):
        lower = rng.randint(-3, 1)
        variables.append(Variable(f"x{j}", lower, lower + rng.randint(0, 4)))
    rows = []
    for i in range(m):
        coefficients = tuple((j, rng.randint(-3, 3)) for j in range(n))
        sense = rng.choice([GE, GE, LE, LE, EQ])
        rows.append(LinearRow(coefficients, sense, rng.randint(-6, 6), name=f"c{i}"))
    objective = tuple((j, rng.randint(-3, 3)) for j in range(n)) if with_objective else ()
    return LinearProgram(tuple(variables), tuple(rows), objective)


def _solve_square(matrix: List[List[Fraction]], rhs: List[Fraction]) -> Optional[List[Fraction]]:
    n = len(matrix)
    aug = [list(row) + [b] for row, b in zip(matrix, rhs)]
    for k in range(n):
        pivot = next((i for i in range(k, n) if aug[i][k] != 0), None)
        if pivot is None:
            return None
        aug[k], aug[pivot] = aug[pivot], aug[k]
        for i in range(n):
            if i != k and aug[i][k] != 0:
                factor = aug[i][k] / aug[k][k]
                aug[i] = [a - factor * b for a, b in zip(aug[i], aug[k])]
    return [aug[i][n] / aug[i][i] for i in range(n)]


def _satisfies(lp: LinearProgram, x: Sequence[Fraction]) -> bool:
    for var, value in zip(lp.variables, x):
        if value < var.lower or (var.upper is not None and value > var.upper):
            return False
    for row in lp.rows:
        activity = row.activity(x)
        if row.sense == GE and activity < row.rhs:
            return False
        if row.sense == LE and activity > row.rhs:
            return False
        if row.sense == EQ and activity != row.rhs:
            return False
    return True


def vertex_oracle(lp: LinearProgram) -> Optional[List[Fraction]]:
    """
    Feasible vertex of an LP over a finite box, None when infeasible.

    Every choice of n tight hyperplanes among rows and bounds is solved
    exactly; a bounded nonempty polyhedron always has such a vertex.
    """
    n = lp.num_variables
    hyperplanes = []
    for row in lp.rows:
        coefs = [Fraction(0)] * n
        for idx, coef in row.coefficients:
            coefs[idx] = coef
        hyperplanes.append((coefs, row.rhs))
    for j, var in enumerate(lp.variables):
        unit = [Fraction(int(k == j)) for k in range(n)]
        hyperplanes.append((unit, var.lower))
        hyperplanes.append((unit, var.upper))

    for combo in itertools.combinations(hyperplanes, n):
        x = _solve_square([h[0] for h in combo], [h[1] for h in combo])
        if x is not None and _satisfies(lp, x):
            return x
    return None


def optimal_vertex(lp: LinearProgram) -> Optional[Tuple[List[Fraction], Fraction]]:
    """
    (point, objective) of an optimal vertex of an LP over a finite box, None
    when infeasible.

    A vertex has k tight rows and n - k variables at a bound. For every such
    choice the k free variables are solved from the tight rows exactly.
    """
    n = lp.num_variables
    dense = []
    for row in lp.rows:
        coefs = [Fraction(0)] * n
        for idx, coef in row.coefficients:
            coefs[idx] = coef
        dense.append(coefs)

    best = None
    for k in range(min(len(lp.rows), n) + 1):
        for tight in itertools.combinations(range(len(lp.rows)), k):
            for free in itertools.combinations(range(n), k):
                at_bound = [j for j in range(n) if j not in free]
                choices = [sorted({lp.variables[j].lower, lp.variables[j].upper}) for j in at_bound]
                for values in itertools.product(*choices):
                    x = [Fraction(0)] * n
                    for j, value in zip(at_bound, values):
                        x[j] = value
                    matrix = [[dense[i][j] for j in free] for i in tight]
                    rhs = [
                        lp.rows[i].rhs - sum((dense[i][j] * x[j] for j in at_bound), Fraction(0))
                        for i in tight
                    ]
                    solved = _solve_square(matrix, rhs)
                    if solved is None:
                        continue
                    for j, value in zip(free, solved):
                        x[j] = value
                    if not _satisfies(lp, x):
                        continue
                    objective = lp.objective_value(x)
                    if best is None or (objective > best[1] if lp.sense == MAXIMIZE else objective < best[1]):
                        best = (x, objective)
    return best


def greedy_assignment(inst: Instance, limit: Optional[int] = None) -> Assignment:
    """Serve receivers by their strongest transmitter while the PAP stays exactly feasible."""
    served = {}
    for receiver in inst.receivers[:limit]:
        row = inst.fading[inst.receiver_index(receiver.id)]
        best = max(range(len(row)), key=lambda t: row[t])
        trial = dict(served)
        trial[receiver.id] = inst.transmitters[best].id
        if verify_assignment_exact(inst, Assignment(trial)).status == FEASIBLE:
            served = trial
    return Assignment(served)
