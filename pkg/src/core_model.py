"""Instances and optimization models for power assignment (PAP) and
scheduling-and-power-assignment (SPAP).

All model data is held as exact rationals. Floating-point views are derived
only at the solver boundary (see lp_fp).
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from types import MappingProxyType
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from .utils import Rational, to_fraction

logger = logging.getLogger('wnd_accuracy')

GE = '>='
LE = '<='
EQ = '='
SENSES = (GE, LE, EQ)

MINIMIZE = 'min'
MAXIMIZE = 'max'


@dataclass(frozen=True)
class Transmitter:
    """A transmitter with its maximum emission power in mW."""

    id: str
    p_max: Fraction


@dataclass(frozen=True)
class Receiver:
    """A receiver with noise (mW), linear SIR threshold and revenue."""

    id: str
    noise: Fraction
    delta: Fraction
    revenue: Fraction = Fraction(1)


@dataclass(frozen=True)
class Instance:
    """
    A wireless network design instance.

    fading[r][t] is the attenuation from transmitter t to receiver r,
    rows in receiver order, columns in transmitter order.
    """

    transmitters: Tuple[Transmitter, ...]
    receivers: Tuple[Receiver, ...]
    fading: Tuple[Tuple[Fraction, ...], ...]
    meta: Mapping[str, object] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, 'transmitters', tuple(self.transmitters))
        object.__setattr__(self, 'receivers', tuple(self.receivers))
        object.__setattr__(
            self, 'fading',
            tuple(tuple(to_fraction(a) for a in row) for row in self.fading)
        )
        object.__setattr__(self, 'meta', MappingProxyType(dict(self.meta)))

        t_ids = [t.id for t in self.transmitters]
        r_ids = [r.id for r in self.receivers]
        if len(set(t_ids)) != len(t_ids):
            raise ValueError(f"Duplicate transmitter ids: {t_ids}")
        if len(set(r_ids)) != len(r_ids):
            raise ValueError(f"Duplicate receiver ids: {r_ids}")

        for t in self.transmitters:
            if t.p_max <= 0:
                raise ValueError(f"p_max must be positive for transmitter {t.id}, got: {t.p_max}")
        for r in self.receivers:
            if r.noise <= 0:
                raise ValueError(f"noise must be positive for receiver {r.id}, got: {r.noise}")
            if r.delta <= 0:
                raise ValueError(f"delta must be positive for receiver {r.id}, got: {r.delta}")
            if r.revenue < 0:
                raise ValueError(f"revenue must be nonnegative for receiver {r.id}, got: {r.revenue}")

        if len(self.fading) != len(self.receivers):
            raise ValueError(
                f"Fading matrix has {len(self.fading)} rows, expected {len(self.receivers)}"
            )
        for r, row in zip(self.receivers, self.fading):
            if len(row) != len(self.transmitters):
                raise ValueError(
                    f"Fading row of receiver {r.id} has {len(row)} entries, "
                    f"expected {len(self.transmitters)}"
                )
            for a in row:
                if a < 0 or a > 1:
                    raise ValueError(f"Fading coefficient out of [0, 1] for receiver {r.id}: {a}")

        object.__setattr__(self, '_t_index', {tid: i for i, tid in enumerate(t_ids)})
        object.__setattr__(self, '_r_index', {rid: i for i, rid in enumerate(r_ids)})

    @classmethod
    def build(
        cls,
        transmitters: Iterable[Tuple[str, Rational]],
        receivers: Iterable[Tuple],
        fading: Sequence[Sequence[Rational]],
        meta: Optional[Mapping[str, object]] = None
    ) -> 'Instance':
        """
        Build an instance from plain tuples.

        Args:
            transmitters: (id, p_max) pairs
            receivers: (id, noise, delta) or (id, noise, delta, revenue) tuples
            fading: Matrix a[r][t]
            meta: Optional metadata (seed, generator parameters)

        Returns:
            Instance
        """
        txs = tuple(Transmitter(str(tid), to_fraction(p)) for tid, p in transmitters)
        rxs = []
        for entry in receivers:
            rid, noise, delta = entry[0], entry[1], entry[2]
            revenue = entry[3] if len(entry) > 3 else 1
            rxs.append(Receiver(str(rid), to_fraction(noise), to_fraction(delta), to_fraction(revenue)))
        return cls(txs, tuple(rxs), tuple(tuple(row) for row in fading), meta or {})

    @property
    def transmitter_ids(self) -> List[str]:
        return [t.id for t in self.transmitters]

    @property
    def receiver_ids(self) -> List[str]:
        return [r.id for r in self.receivers]

    def transmitter_index(self, t_id: str) -> int:
        try:
            return self._t_index[t_id]
        except KeyError:
            raise ValueError(f"Unknown transmitter id: {t_id!r}")

    def receiver_index(self, r_id: str) -> int:
        try:
            return self._r_index[r_id]
        except KeyError:
            raise ValueError(f"Unknown receiver id: {r_id!r}")

    def receiver(self, r_id: str) -> Receiver:
        return self.receivers[self.receiver_index(r_id)]

    def fading_of(self, r_id: str, t_id: str) -> Fraction:
        return self.fading[self.receiver_index(r_id)][self.transmitter_index(t_id)]


@dataclass(frozen=True)
class LinearRow:
    """
    A linear constraint sum(coef * x[idx]) <sense> rhs.

    tag is (receiver id, transmitter id) for SIR rows, None otherwise.
    """

    coefficients: Tuple[Tuple[int, Fraction], ...]
    sense: str
    rhs: Fraction
    tag: Optional[Tuple[str, str]] = None
    name: str = ''

    def __post_init__(self):
        if self.sense not in SENSES:
            raise ValueError(f"Row sense must be one of {SENSES}, got: {self.sense!r}")
        seen = set()
        cleaned = []
        for idx, coef in self.coefficients:
            if idx in seen:
                raise ValueError(f"Duplicate variable index {idx} in row {self.name!r}")
            seen.add(idx)
            coef = to_fraction(coef)
            if coef != 0:
                cleaned.append((int(idx), coef))
        object.__setattr__(self, 'coefficients', tuple(cleaned))
        object.__setattr__(self, 'rhs', to_fraction(self.rhs))

    def as_dict(self) -> Dict[int, Fraction]:
        return dict(self.coefficients)

    def activity(self, x: Sequence[Rational]) -> Fraction:
        """Exact row activity at x."""
        return sum((coef * to_fraction(x[idx]) for idx, coef in self.coefficients), Fraction(0))

    def scaled(self, factor: Fraction) -> 'LinearRow':
        return LinearRow(
            tuple((idx, coef * factor) for idx, coef in self.coefficients),
            self.sense,
            self.rhs * factor,
            self.tag,
            self.name
        )


@dataclass(frozen=True)
class Variable:
    """A decision variable; upper=None means unbounded above."""

    name: str
    lower: Fraction
    upper: Optional[Fraction]

    def __post_init__(self):
        if self.lower is None:
            raise ValueError(f"Variable {self.name} needs a finite lower bound")
        object.__setattr__(self, 'lower', to_fraction(self.lower))
        if self.upper is not None:
            object.__setattr__(self, 'upper', to_fraction(self.upper))
            if self.lower > self.upper:
                raise ValueError(
                    f"Variable {self.name} has lower bound {self.lower} above upper bound {self.upper}"
                )


@dataclass(frozen=True)
class LinearProgram:
    """A row-form linear program with exact data."""

    variables: Tuple[Variable, ...]
    rows: Tuple[LinearRow, ...]
    objective: Tuple[Tuple[int, Fraction], ...] = ()
    sense: str = MINIMIZE

    def __post_init__(self):
        object.__setattr__(self, 'variables', tuple(self.variables))
        object.__setattr__(self, 'rows', tuple(self.rows))
        object.__setattr__(
            self, 'objective',
            tuple((int(i), to_fraction(c)) for i, c in self.objective if to_fraction(c) != 0)
        )
        if self.sense not in (MINIMIZE, MAXIMIZE):
            raise ValueError(f"Objective sense must be 'min' or 'max', got: {self.sense!r}")
        n = len(self.variables)
        for row in self.rows:
            for idx, _ in row.coefficients:
                if not 0 <= idx < n:
                    raise ValueError(f"Row {row.name!r} references variable {idx} outside 0..{n - 1}")
        for idx, _ in self.objective:
            if not 0 <= idx < n:
                raise ValueError(f"Objective references variable {idx} outside 0..{n - 1}")

    @property
    def num_variables(self) -> int:
        return len(self.variables)

    @property
    def num_rows(self) -> int:
        return len(self.rows)

    @property
    def num_nonzeros(self) -> int:
        return sum(len(row.coefficients) for row in self.rows)

    def variable_index(self, name: str) -> int:
        for i, var in enumerate(self.variables):
            if var.name == name:
                return i
        raise ValueError(f"Unknown variable: {name!r}")

    def objective_value(self, x: Sequence[Rational]) -> Fraction:
        return sum((c * to_fraction(x[i]) for i, c in self.objective), Fraction(0))

    def with_bounds(self, overrides: Mapping[int, Tuple[Fraction, Optional[Fraction]]]) -> 'LinearProgram':
        """Copy of the LP with some variable bounds replaced."""
        variables = list(self.variables)
        for idx, (lower, upper) in overrides.items():
            variables[idx] = Variable(variables[idx].name, lower, upper)
        return LinearProgram(tuple(variables), self.rows, self.objective, self.sense)


@dataclass(frozen=True)
class MipProblem:
    """
    A linear program with binary markers.

    power_index maps transmitter id to the p variable, assignment_index maps
    (receiver id, transmitter id) to the x variable.
    """

    lp: LinearProgram
    binaries: frozenset
    power_index: Mapping[str, int] = field(default_factory=dict)
    assignment_index: Mapping[Tuple[str, str], int] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, 'binaries', frozenset(self.binaries))
        object.__setattr__(self, 'power_index', MappingProxyType(dict(self.power_index)))
        object.__setattr__(self, 'assignment_index', MappingProxyType(dict(self.assignment_index)))
        for idx in self.binaries:
            var = self.lp.variables[idx]
            if var.lower != 0 or var.upper != 1:
                raise ValueError(f"Binary variable {var.name} must have bounds [0, 1]")


@dataclass(frozen=True)
class Assignment:
    """Partial map receiver id -> serving transmitter id."""

    served: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, 'served', MappingProxyType(dict(self.served)))

    def __len__(self) -> int:
        return len(self.served)

    def __contains__(self, r_id: str) -> bool:
        return r_id in self.served

    def __eq__(self, other) -> bool:
        if not isinstance(other, Assignment):
            return NotImplemented
        return dict(self.served) == dict(other.served)

    def __hash__(self) -> int:
        return hash(frozenset(self.served.items()))

    def server_of(self, r_id: str) -> Optional[str]:
        return self.served.get(r_id)

    def items(self) -> List[Tuple[str, str]]:
        return list(self.served.items())

    def validate(self, inst: Instance) -> None:
        """Raise ValueError if the assignment references unknown ids."""
        for r_id, t_id in self.served.items():
            inst.receiver_index(r_id)
            inst.transmitter_index(t_id)

    def revenue(self, inst: Instance) -> Fraction:
        return sum((inst.receiver(r_id).revenue for r_id in self.served), Fraction(0))

    def encoding(self, inst: Instance) -> Tuple[int, ...]:
        """Per receiver: serving transmitter position, |T| when unserved."""
        unserved = len(inst.transmitters)
        return tuple(
            inst.transmitter_index(self.served[r.id]) if r.id in self.served else unserved
            for r in inst.receivers
        )

    @classmethod
    def from_binary(cls, mip: MipProblem, x: Sequence[Rational], tol: float = 1e-6) -> 'Assignment':
        """
        Round the binary part of a MIP point to an assignment.

        Args:
            mip: Problem produced by build_spap
            x: Point over all MIP variables
            tol: Integrality tolerance

        Returns:
            Assignment with r -> t for every x_rt rounded to 1

        Raises:
            ValueError: If a receiver gets more than one server
        """
        served = {}
        for (r_id, t_id), idx in mip.assignment_index.items():
            if float(x[idx]) >= 1 - tol:
                if r_id in served:
                    raise ValueError(
                        f"Receiver {r_id} assigned to both {served[r_id]} and {t_id} (GUB violated)"
                    )
                served[r_id] = t_id
        return cls(served)


def _check_power_vector(inst: Instance, p: Sequence[Rational]) -> List[Fraction]:
    if len(p) != len(inst.transmitters):
        raise ValueError(
            f"Power vector has {len(p)} entries, expected {len(inst.transmitters)}"
        )
    return [to_fraction(v) for v in p]


def interference(inst: Instance, p: Sequence[Rational], r_id: str, s_id: str) -> Fraction:
    """Exact interference sum over t != s of a[r][t] * p[t]."""
    power = _check_power_vector(inst, p)
    r = inst.receiver_index(r_id)
    s = inst.transmitter_index(s_id)
    return sum(
        (inst.fading[r][t] * power[t] for t in range(len(power)) if t != s),
        Fraction(0)
    )


def sir_value(inst: Instance, p: Sequence[Rational], r_id: str, s_id: str) -> Fraction:
    """
    Signal-to-interference ratio of receiver r served by s, exactly.

    Args:
        inst: Instance
        p: Power vector (mW), one entry per transmitter
        r_id: Receiver id
        s_id: Serving transmitter id

    Returns:
        a[r][s] p[s] / (N_r + sum_{t != s} a[r][t] p[t])
    """
    power = _check_power_vector(inst, p)
    r = inst.receiver_index(r_id)
    s = inst.transmitter_index(s_id)
    denominator = inst.receivers[r].noise + interference(inst, power, r_id, s_id)
    return inst.fading[r][s] * power[s] / denominator


def linearized_sir_row(inst: Instance, r_id: str, s_id: str) -> LinearRow:
    """
    Linear SIR inequality over the power variables (indexed by transmitter
    position): a_rs p_s - delta * sum_{t != s} a_rt p_t >= delta * N.
    """
    r = inst.receiver_index(r_id)
    s = inst.transmitter_index(s_id)
    receiver = inst.receivers[r]
    coefficients = []
    for t, a in enumerate(inst.fading[r]):
        coef = a if t == s else -receiver.delta * a
        coefficients.append((t, coef))
    return LinearRow(
        tuple(coefficients), GE, receiver.delta * receiver.noise,
        tag=(r_id, s_id), name=f"sir[{r_id},{s_id}]"
    )


def big_m(inst: Instance, r_id: str, s_id: str) -> Fraction:
    """
    Tightest M deactivating the SIR row of (r, s) when x_rs = 0:
    delta N + delta * sum_{t != s} a_rt p_max_t.
    """
    r = inst.receiver_index(r_id)
    s = inst.transmitter_index(s_id)
    receiver = inst.receivers[r]
    worst = sum(
        (inst.fading[r][t] * inst.transmitters[t].p_max
         for t in range(len(inst.transmitters)) if t != s),
        Fraction(0)
    )
    return receiver.delta * receiver.noise + receiver.delta * worst


def _power_variables(inst: Instance) -> List[Variable]:
    return [Variable(f"p[{t.id}]", Fraction(0), t.p_max) for t in inst.transmitters]


def build_pap(inst: Instance, asg: Assignment) -> LinearProgram:
    """
    Power assignment LP: minimize total power serving every receiver of asg.

    Args:
        inst: Instance
        asg: Assignment of receivers to servers

    Returns:
        LinearProgram over p_t in [0, p_max_t] with one SIR row per served receiver
    """
    asg.validate(inst)
    rows = [
        linearized_sir_row(inst, r.id, asg.server_of(r.id))
        for r in inst.receivers if r.id in asg
    ]
    objective = tuple((t, Fraction(1)) for t in range(len(inst.transmitters)))
    return LinearProgram(tuple(_power_variables(inst)), tuple(rows), objective, MINIMIZE)


def build_spap(inst: Instance) -> MipProblem:
    """
    Scheduling and power assignment MILP with big-M SIR rows.

    Variables: p_t for every transmitter, then x_rt for every receiver and
    transmitter (receiver-major). Rows: one big-M SIR row per (r, s), then
    one GUB row per receiver.

    Args:
        inst: Instance

    Returns:
        MipProblem maximizing served revenue
    """
    n_t = len(inst.transmitters)
    variables = _power_variables(inst)
    power_index = {t.id: i for i, t in enumerate(inst.transmitters)}
    assignment_index = {}
    for r in inst.receivers:
        for t in inst.transmitters:
            assignment_index[(r.id, t.id)] = len(variables)
            variables.append(Variable(f"x[{r.id},{t.id}]", Fraction(0), Fraction(1)))

    sir_rows = []
    gub_rows = []
    objective = []
    for r in inst.receivers:
        for s in inst.transmitters:
            base = linearized_sir_row(inst, r.id, s.id)
            m_value = big_m(inst, r.id, s.id)
            x_idx = assignment_index[(r.id, s.id)]
            # a p_s - delta sum a p_t + M (1 - x) >= delta N, with M moved to the rhs
            sir_rows.append(LinearRow(
                base.coefficients + ((x_idx, -m_value),),
                GE, base.rhs - m_value,
                tag=(r.id, s.id), name=base.name
            ))
            objective.append((x_idx, r.revenue))
        gub_rows.append(LinearRow(
            tuple((assignment_index[(r.id, t.id)], Fraction(1)) for t in inst.transmitters),
            LE, Fraction(1), name=f"gub[{r.id}]"
        ))

    lp = LinearProgram(tuple(variables), tuple(sir_rows + gub_rows), tuple(objective), MAXIMIZE)
    logger.debug(
        f"Built SPAP: {lp.num_variables} variables, {lp.num_rows} rows, {lp.num_nonzeros} nonzeros"
    )
    return MipProblem(
        lp, frozenset(range(n_t, len(variables))), power_index, assignment_index
    )


ProblemT = Union[LinearProgram, MipProblem]


def scale_rows(problem: ProblemT, factor: Rational) -> ProblemT:
    """
    Multiply every SIR-tagged row (coefficients and rhs) by factor, exactly.

    Args:
        problem: LinearProgram or MipProblem
        factor: Positive scaling factor S

    Returns:
        Problem of the same type; bounds, GUB rows and objective unchanged

    Raises:
        ValueError: If factor <= 0
    """
    factor = to_fraction(factor)
    if factor <= 0:
        raise ValueError(f"Scaling factor must be positive, got: {factor}")

    lp = problem.lp if isinstance(problem, MipProblem) else problem
    rows = tuple(row.scaled(factor) if row.tag is not None else row for row in lp.rows)
    scaled_lp = LinearProgram(lp.variables, rows, lp.objective, lp.sense)

    if isinstance(problem, MipProblem):
        return MipProblem(scaled_lp, problem.binaries, problem.power_index, problem.assignment_index)
    return scaled_lp


def fix_assignment(mip: MipProblem, asg: Assignment) -> LinearProgram:
    """
    Fix the binaries of an SPAP model to an assignment and drop them.

    Active SIR rows lose their M-term; rows of unassigned pairs are dropped
    (big_m makes them vacuous). The result is build_pap(inst, asg) up to row
    order, scaled like the input.

    Args:
        mip: Problem from build_spap (possibly scaled)
        asg: Assignment respecting the GUB rows

    Returns:
        LinearProgram over the continuous variables, minimizing their sum

    Raises:
        ValueError: If asg references pairs the model does not have
    """
    receivers = {r_id for r_id, _ in mip.assignment_index}
    for r_id, t_id in asg.items():
        if r_id not in receivers:
            raise ValueError(f"Unknown receiver id: {r_id!r}")
        if (r_id, t_id) not in mip.assignment_index:
            raise ValueError(f"Unknown transmitter id {t_id!r} for receiver {r_id!r}")

    lp = mip.lp
    values = {}
    for (r_id, t_id), idx in mip.assignment_index.items():
        values[idx] = Fraction(1) if asg.server_of(r_id) == t_id else Fraction(0)

    keep = [i for i in range(lp.num_variables) if i not in mip.binaries]
    new_index = {old: new for new, old in enumerate(keep)}

    rows = []
    for row in lp.rows:
        if row.tag is None:
            continue  # GUB rows hold by construction
        r_id, s_id = row.tag
        if asg.server_of(r_id) != s_id:
            continue
        rhs = row.rhs
        coefficients = []
        for idx, coef in row.coefficients:
            if idx in mip.binaries:
                rhs -= coef * values[idx]
            else:
                coefficients.append((new_index[idx], coef))
        rows.append(LinearRow(tuple(coefficients), row.sense, rhs, row.tag, row.name))

    variables = tuple(lp.variables[i] for i in keep)
    objective = tuple((new_index[i], Fraction(1)) for i in keep)
    return LinearProgram(variables, tuple(rows), objective, MINIMIZE)


def coefficient_range(problem: ProblemT) -> Tuple[Optional[Fraction], Optional[Fraction]]:
    """
    Smallest and largest absolute nonzero value among the power
    coefficients and right-hand sides of the SIR rows.

    Returns:
        (alpha_min, alpha_max), (None, None) when there are no SIR rows
    """
    lp = problem.lp if isinstance(problem, MipProblem) else problem
    binaries = problem.binaries if isinstance(problem, MipProblem) else frozenset()
    values = []
    for row in lp.rows:
        if row.tag is None:
            continue
        values.extend(abs(c) for idx, c in row.coefficients if idx not in binaries)
        if isinstance(problem, MipProblem):
            # The stored rhs carries -M; report the SIR rhs delta*N
            m_term = sum((c for idx, c in row.coefficients if idx in binaries), Fraction(0))
            rhs = row.rhs - m_term
        else:
            rhs = row.rhs
        if rhs != 0:
            values.append(abs(rhs))
    if not values:
        return None, None
    return min(values), max(values)


def model_dimensions(problem: ProblemT) -> Tuple[int, int, int]:
    """(variables, constraints, nonzeros) of a model."""
    lp = problem.lp if isinstance(problem, MipProblem) else problem
    return lp.num_variables, lp.num_rows, lp.num_nonzeros
