import json
from fractions import Fraction

import pytest
from openpyxl import load_workbook

from main import EXIT_FAILED, EXIT_OK, EXIT_USAGE, main
from src.core_model import Assignment, Instance
from src.file_formats import load_instance, load_solution, save_instance, save_solution
from src.mip_bnb import SOURCE_EXACT, Solution


@pytest.fixture
def tiny_files(tiny_instance, tmp_path):
    """Instance file plus solutions claiming r1 with zero and with exact power."""
    inst_path = tmp_path / 'tiny.json'
    save_instance(tiny_instance, str(inst_path))
    asg = Assignment({'r1': 't1'})
    zero = tmp_path / 'zero.json'
    save_solution(tiny_instance, Solution((Fraction(0), Fraction(0)), asg, Fraction(1)), str(zero))
    exact = tmp_path / 'exact.json'
    save_solution(tiny_instance, Solution((Fraction(1, 500), Fraction(0)), asg, Fraction(1)), str(exact))
    return str(inst_path), str(zero), str(exact)


def test_help_and_usage_errors():
    assert main(['--help']) == EXIT_OK
    assert main([]) == EXIT_USAGE
    assert main(['solve']) == EXIT_USAGE


def test_missing_instance(tmp_path):
    assert main(['audit', str(tmp_path / 'nope.json'), str(tmp_path / 'sol.json')]) == EXIT_USAGE


def test_invalid_log_level(tiny_files):
    inst, zero, _ = tiny_files
    assert main(['--log-level', 'loud', 'audit', inst, zero]) == EXIT_USAGE


def test_gen(tmp_path):
    out = tmp_path / 'gen.json'
    assert main(['gen', '--receivers', '5', '--transmitters', '2', '--seed', '4', '-o', str(out)]) == EXIT_OK
    inst = load_instance(str(out))
    assert len(inst.receivers) == 5
    assert inst.meta['generator']['seed'] == 4


def test_gen_near_receivers(tmp_path):
    out = tmp_path / 'gen.json'
    code = main(['gen', '--receivers', '5', '--transmitters', '2', '--near-receivers', '2', '-o', str(out)])
    assert code == EXIT_OK
    assert load_instance(str(out)).meta['generator']['near_receivers'] == 2


def test_gen_rejects_bad_parameters(tmp_path):
    out = tmp_path / 'gen.json'
    assert main(['gen', '--receivers', '0', '--transmitters', '2', '-o', str(out)]) == EXIT_USAGE
    assert not out.exists()


class TestSolve:
    def test_spap(self, tiny_files, tmp_path):
        inst, _, _ = tiny_files
        out = tmp_path / 'solved.json'
        assert main(['solve', inst, '--eps', '1e-6', '-o', str(out)]) == EXIT_OK
        data = json.loads(out.read_text())
        assert data['objective_claimed'] == '1'
        assert data['meta']['provenance']['scale_factor'] == '1000000000000'

    def test_spap_verified(self, tiny_files, tmp_path):
        inst, _, _ = tiny_files
        out = tmp_path / 'solved.json'
        assert main(['solve', inst, '--verify-exact', '-o', str(out)]) == EXIT_OK
        data = json.loads(out.read_text())
        assert data['power_source'] == SOURCE_EXACT

    def test_pap(self, tiny_files, tmp_path):
        inst, zero, _ = tiny_files
        out = tmp_path / 'pap.json'
        assert main(['solve', inst, '--model', 'pap', '--assignment', zero, '-o', str(out)]) == EXIT_OK
        data = json.loads(out.read_text())
        assert data['meta']['provenance']['solver'] == 'pap'
        assert data['objective_claimed'] == '1'

    def test_pap_needs_assignment(self, tiny_files, tmp_path):
        inst, _, _ = tiny_files
        assert main(['solve', inst, '--model', 'pap', '-o', str(tmp_path / 'x.json')]) == EXIT_USAGE

    def test_pap_for_an_unservable_assignment(self, tmp_path):
        inst = Instance.build([('t1', 1)], [('r1', 1, 2)], [['1/10']])
        inst_path = tmp_path / 'weak.json'
        claim = tmp_path / 'claim.json'
        save_instance(inst, str(inst_path))
        save_solution(inst, Solution((Fraction(0),), Assignment({'r1': 't1'}), Fraction(1)), str(claim))
        out = tmp_path / 'pap.json'
        code = main(['solve', str(inst_path), '--model', 'pap', '--assignment', str(claim), '-o', str(out)])
        assert code == EXIT_USAGE
        assert not out.exists()

    def test_brute_force(self, tiny_files, tmp_path):
        inst, _, _ = tiny_files
        out = tmp_path / 'exact.json'
        assert main(['solve', inst, '--brute-force', '-o', str(out)]) == EXIT_OK
        data = json.loads(out.read_text())
        assert data['meta']['provenance']['solver'] == 'brute_force'
        assert data['power_source'] == SOURCE_EXACT
        assert data['objective_claimed'] == '1'

    def test_brute_force_respects_the_limit(self, tiny_files, tmp_path, monkeypatch):
        inst, _, _ = tiny_files
        monkeypatch.setenv('WND_BRUTE_FORCE_LIMIT', '2')
        out = tmp_path / 'exact.json'
        assert main(['solve', inst, '--brute-force', '-o', str(out)]) == EXIT_USAGE
        assert not out.exists()


class TestAudit:
    def test_violating_solution_fails(self, tiny_files, tmp_path):
        inst, zero, _ = tiny_files
        report = tmp_path / 'report.json'
        assert main(['audit', inst, zero, '-o', str(report)]) == EXIT_FAILED
        assert json.loads(report.read_text())['unserved'] == 1

    def test_exact_solution_passes(self, tiny_files):
        inst, _, exact = tiny_files
        assert main(['audit', inst, exact]) == EXIT_OK

    def test_serve_tolerance_flag(self, tiny_files):
        inst, zero, _ = tiny_files
        # SIR violation at zero power is exactly 2
        assert main(['audit', inst, zero, '--serve-tol', '2']) == EXIT_OK


class TestVerify:
    def test_feasible_writes_repaired_solution(self, tiny_instance, tiny_files, tmp_path):
        inst, zero, _ = tiny_files
        out = tmp_path / 'repaired.json'
        assert main(['verify', inst, zero, '-o', str(out)]) == EXIT_OK
        repaired = load_solution(tiny_instance, str(out))
        assert repaired.p == (Fraction(1, 500), Fraction(0))
        assert repaired.power_source == SOURCE_EXACT

    def test_infeasible_writes_certificate(self, tmp_path):
        inst = Instance.build(
            [('t1', '1e-3'), ('t2', '1e-3')],
            [('r1', '1e-12', 2)],
            [['1e-9', '1e-10']],
        )
        inst_path = tmp_path / 'bad.json'
        sol_path = tmp_path / 'claim.json'
        save_instance(inst, str(inst_path))
        save_solution(inst, Solution((Fraction(0), Fraction(0)), Assignment({'r1': 't1'}), Fraction(1)),
                      str(sol_path))
        assert main(['verify', str(inst_path), str(sol_path)]) == EXIT_FAILED
        cert = json.loads((tmp_path / 'claim.certificate.json').read_text())
        assert cert['status'] == 'infeasible'
        assert cert['core'] == ['sir[r1,t1]']


def test_refine(tiny_instance, tiny_files, tmp_path):
    inst, zero, _ = tiny_files
    out = tmp_path / 'refined.json'
    assert main(['refine', inst, zero, '--tol', '1e-25', '-o', str(out)]) == EXIT_OK
    data = json.loads(out.read_text())
    assert data['refinement']['status'] == 'success'
    assert data['power_source'] == 'refined'
    assert main(['audit', inst, str(out)]) == EXIT_OK


class TestExportMps:
    def test_spap(self, tiny_files, tmp_path):
        inst, _, _ = tiny_files
        out = tmp_path / 'model.mps'
        assert main(['export-mps', inst, '-o', str(out)]) == EXIT_OK
        assert out.read_text().rstrip().endswith('ENDATA')

    def test_pap_needs_assignment(self, tiny_files, tmp_path):
        inst, _, _ = tiny_files
        assert main(['export-mps', inst, '--model', 'pap', '-o', str(tmp_path / 'pap.mps')]) == EXIT_USAGE


class TestSuite:
    def test_writes_workbook(self, tmp_path):
        out = tmp_path / 'tables.xlsx'
        code = main([
            'suite', '--receivers', '3', '--transmitters', '1', '--seeds', '1',
            '--node-limit', '50', '--max-workers', '1', '-o', str(out)
        ])
        assert code == EXIT_OK
        assert load_workbook(out).sheetnames == ['Summary', 'Unscaled', 'Scaled 1e12', 'Refinement']

    def test_mismatched_sizes(self, tmp_path):
        code = main(['suite', '--receivers', '3', '4', '--transmitters', '1', '-o', str(tmp_path / 't.xlsx')])
        assert code == EXIT_USAGE
