from fractions import Fraction

import pytest

from src.audit import (
    audit_solution,
    format_audit_table,
    refine_solution,
    repair_from_verification,
    verify_assignment_exact
)
from src.core_model import Assignment, Instance, build_pap
from src.lp_exact import FEASIBLE, INFEASIBLE, check_farkas, max_violation
from src.lp_refine import FAILED, SUCCESS
from src.mip_bnb import SOURCE_EXACT, SOURCE_FP, SOURCE_REFINED, Solution

SERVE_R1 = Assignment({'r1': 't1'})


def _unservable():
    return Instance.build(
        [('t1', '1e-3'), ('t2', '1e-3')],
        [('r1', '1e-12', 2)],
        [['1e-9', '1e-10']],
    )


class TestAudit:
    def test_zero_power_claim_is_unserved(self, tiny_instance):
        sol = Solution((Fraction(0), Fraction(0)), SERVE_R1, Fraction(1))
        report = audit_solution(tiny_instance, sol)
        assert report.claimed == 1
        assert report.served == 0
        assert report.unserved == 1
        assert not report.passed
        assert report.max_linear_violation == Fraction(2, 10 ** 12)
        # amplified by 1 / (N + I) = 1e12
        assert report.max_sir_violation == 2
        assert report.per_receiver[0].sir == 0

    def test_exact_power_is_served(self, tiny_instance):
        sol = Solution((Fraction(1, 500), Fraction(0)), SERVE_R1, Fraction(1))
        report = audit_solution(tiny_instance, sol)
        assert report.passed
        assert report.served == 1
        assert report.max_sir_violation == 0
        assert report.per_receiver[0].sir == 2

    def test_serve_tolerance(self, tiny_instance):
        # SIR 1.999999 misses delta by exactly 1e-6
        p = Fraction(1999999, 10 ** 9)
        sol = Solution((p, Fraction(0)), SERVE_R1, Fraction(1))
        assert audit_solution(tiny_instance, sol, serve_tol=1e-6).served == 1
        assert audit_solution(tiny_instance, sol, serve_tol=1e-7).served == 0

    def test_nothing_claimed(self, tiny_instance):
        sol = Solution((Fraction(0), Fraction(0)), Assignment({}), Fraction(0))
        report = audit_solution(tiny_instance, sol)
        assert report.claimed == 0
        assert report.max_linear_violation is None
        assert report.max_sir_violation is None
        assert report.passed

    def test_power_length_mismatch(self, tiny_instance):
        sol = Solution((Fraction(0),), SERVE_R1, Fraction(1))
        with pytest.raises(ValueError):
            audit_solution(tiny_instance, sol)

    def test_unknown_transmitter(self, tiny_instance):
        sol = Solution((Fraction(0), Fraction(0)), Assignment({'r1': 't9'}), Fraction(1))
        with pytest.raises(ValueError):
            audit_solution(tiny_instance, sol)

    def test_negative_serve_tol(self, tiny_instance):
        sol = Solution((Fraction(0), Fraction(0)), SERVE_R1, Fraction(1))
        with pytest.raises(ValueError):
            audit_solution(tiny_instance, sol, serve_tol=-1e-6)


class TestVerification:
    def test_feasible_assignment(self, tiny_instance):
        result = verify_assignment_exact(tiny_instance, SERVE_R1)
        assert result.status == FEASIBLE
        assert result.power == (Fraction(1, 500), Fraction(0))
        assert result.certificate is None
        assert result.row_tags == (('r1', 't1'),)

    def test_cold_start(self, tiny_instance):
        result = verify_assignment_exact(tiny_instance, SERVE_R1, warm_start_scale=None)
        assert result.status == FEASIBLE
        assert max_violation(build_pap(tiny_instance, SERVE_R1), result.power) == 0

    def test_infeasible_assignment_has_certificate(self):
        inst = _unservable()
        result = verify_assignment_exact(inst, SERVE_R1)
        assert result.status == INFEASIBLE
        assert result.power is None
        assert check_farkas(build_pap(inst, SERVE_R1), result.certificate.row_multipliers)

    def test_empty_assignment_is_feasible(self, tiny_instance):
        assert verify_assignment_exact(tiny_instance, Assignment({})).status == FEASIBLE


class TestRepair:
    def test_repair_substitutes_exact_power(self, tiny_instance):
        sol = Solution((Fraction(0), Fraction(0)), SERVE_R1, Fraction(1), {'solver': 'bnb'})
        repaired = repair_from_verification(sol, verify_assignment_exact(tiny_instance, SERVE_R1))
        assert repaired.power_source == SOURCE_EXACT
        assert repaired.x == sol.x
        assert repaired.provenance == {'solver': 'bnb'}
        assert audit_solution(tiny_instance, repaired).passed

    def test_repair_from_infeasible_raises(self):
        inst = _unservable()
        sol = Solution((Fraction(0), Fraction(0)), SERVE_R1, Fraction(1))
        with pytest.raises(ValueError):
            repair_from_verification(sol, verify_assignment_exact(inst, SERVE_R1))

    def test_refine_solution(self, tiny_instance):
        sol = Solution((Fraction(0), Fraction(0)), SERVE_R1, Fraction(1))
        refined, result = refine_solution(tiny_instance, sol, scale=10 ** 12)
        assert result.status == SUCCESS
        assert refined.power_source == SOURCE_REFINED
        assert result.max_violation <= Fraction(1, 10 ** 25)
        report = audit_solution(tiny_instance, refined)
        assert report.served == report.claimed == 1

    def test_failed_refinement_keeps_the_solution(self):
        inst = _unservable()
        sol = Solution((Fraction(0), Fraction(0)), SERVE_R1, Fraction(1))
        kept, result = refine_solution(inst, sol, scale=10 ** 12)
        assert result.status == FAILED
        assert kept is sol
        assert kept.power_source == SOURCE_FP


def test_format_audit_table(tiny_instance):
    sol = Solution((Fraction(0), Fraction(0)), SERVE_R1, Fraction(1))
    table = format_audit_table(audit_solution(tiny_instance, sol), label='tiny')
    lines = table.splitlines()
    assert lines[0].split() == ['instance', 'obj.', 'linear', 'viol.', 'SIR', 'viol.', 'served', 'unserved']
    assert lines[1].split()[0] == 'tiny'
    assert lines[1].split()[-2:] == ['0', '1']
    assert lines[-1].endswith('NO')
