from fractions import Fraction

import pytest
from hypothesis import assume, given, settings, strategies as st

from src.core_model import EQ, GE, LE, Instance, LinearRow, linearized_sir_row, sir_value
from src.tolerance import (
    is_row_satisfied,
    measure_violation,
    relative_violation,
    sir_violation_from_linear
)

SCALE = Fraction(10 ** 12)

positive = st.fractions(min_value=Fraction(1, 10 ** 6), max_value=10, max_denominator=10 ** 6)
unit = st.fractions(min_value=0, max_value=1, max_denominator=10 ** 6)


@st.composite
def sir_samples(draw):
    """(instance, power vector, receiver id, server id) with rational data."""
    n_t = draw(st.integers(min_value=1, max_value=4))
    p_max = [draw(positive) for _ in range(n_t)]
    noise = draw(positive)
    delta = draw(positive)
    fading = [draw(unit) for _ in range(n_t)]
    inst = Instance.build(
        [(f"t{j}", p_max[j]) for j in range(n_t)],
        [('r', noise, delta)],
        [fading],
    )
    p = [draw(st.fractions(min_value=0, max_value=p_max[j], max_denominator=10 ** 6)) for j in range(n_t)]
    s = draw(st.integers(min_value=0, max_value=n_t - 1))
    return inst, p, 'r', f"t{s}"


@settings(max_examples=1000, deadline=None)
@given(sir_samples())
def test_ratio_and_linear_forms_agree(sample):
    inst, p, r_id, s_id = sample
    row = linearized_sir_row(inst, r_id, s_id)
    ratio_ok = sir_value(inst, p, r_id, s_id) >= inst.receiver(r_id).delta
    linear_ok = row.activity(p) >= row.rhs
    assert ratio_ok == linear_ok


@settings(max_examples=1000, deadline=None)
@given(sir_samples())
def test_violation_amplification_identity(sample):
    inst, p, r_id, s_id = sample
    pair = sir_violation_from_linear(inst, p, r_id, s_id)
    assert pair.eps_sir / pair.amplification == pair.eps_linear
    assert (pair.eps_sir > 0) == (pair.eps_linear > 0)


UNIT = Fraction(1, 10 ** 24)


@st.composite
def tiny_rows(draw):
    """
    A row with terms below 1e-13 and a right-hand side placed d units of
    1e-24 away from the activity, so the violation is exactly d * 1e-24.
    """
    n = draw(st.integers(min_value=1, max_value=4))
    coefficients = tuple(
        (j, Fraction(draw(st.integers(min_value=-10 ** 8, max_value=10 ** 8)), 10 ** 21)) for j in range(n)
    )
    x = [Fraction(draw(st.integers(min_value=0, max_value=1000)), 1000) for _ in range(n)]
    activity = sum((c * x[j] for j, c in coefficients), Fraction(0))
    d = draw(st.integers(min_value=-5000, max_value=5000))
    sense = draw(st.sampled_from([GE, LE]))
    rhs = activity + d * UNIT if sense == GE else activity - d * UNIT
    return LinearRow(coefficients, sense, rhs), x, d


@settings(max_examples=1000, deadline=None)
@given(tiny_rows())
def test_scaling_tightens_the_tolerance(sample):
    row, x, d = sample
    assume(abs(SCALE * row.activity(x)) < 1 and abs(SCALE * row.rhs) < 1)
    assume(d != 1000)
    scaled = row.scaled(SCALE)
    assert is_row_satisfied(scaled, x, 1e-9) == is_row_satisfied(row, x, 1e-21)
    assert is_row_satisfied(row, x, 1e-21) == (d < 1000)


class TestRelativeViolation:
    def test_tiny_rows_pass_any_practical_tolerance(self, tiny_instance):
        row = linearized_sir_row(tiny_instance, 'r1', 't1')
        assert relative_violation(row, [0, 0]) == pytest.approx(2e-12)
        assert is_row_satisfied(row, [0, 0], 1e-6)
        assert is_row_satisfied(row, [0, 0], 1e-9)
        assert not is_row_satisfied(row, [0, 0], 1e-13)

    def test_satisfied_row_is_negative(self, tiny_instance):
        row = linearized_sir_row(tiny_instance, 'r1', 't1')
        assert relative_violation(row, [1, 1]) == pytest.approx(-7.98e-10)

    def test_denominator_uses_activity_and_rhs(self):
        row = LinearRow(((0, 1),), LE, 100)
        # (110 - 100) / 110
        assert relative_violation(row, [110]) == pytest.approx(10 / 110)

    def test_equality_row(self):
        row = LinearRow(((0, 1),), EQ, 1)
        assert relative_violation(row, ['0.5']) == pytest.approx(0.5)
        assert relative_violation(row, ['1.5']) == pytest.approx(0.5 / 1.5)

    def test_eps_must_be_positive(self, tiny_instance):
        row = linearized_sir_row(tiny_instance, 'r1', 't1')
        with pytest.raises(ValueError):
            is_row_satisfied(row, [0, 0], 0)

    def test_short_point(self, tiny_instance):
        row = linearized_sir_row(tiny_instance, 'r1', 't1')
        with pytest.raises(ValueError):
            relative_violation(row, [0])

    def test_measure_violation(self, tiny_instance):
        row = linearized_sir_row(tiny_instance, 'r1', 't1')
        measure = measure_violation(row, [0, 0], (1e-13, 1e-9, 1e-6))
        assert measure.absolute_violation == pytest.approx(2e-12)
        assert measure.satisfied_at == {1e-13: False, 1e-9: True, 1e-6: True}


def test_amplification_on_tiny_instance(tiny_instance):
    pair = sir_violation_from_linear(tiny_instance, [0, 0], 'r1', 't1')
    assert pair.eps_linear == Fraction(2, 10 ** 12)
    assert pair.eps_sir == 2
    assert pair.amplification == 10 ** 12
