import json
from fractions import Fraction

import pytest

from src.audit import audit_solution, verify_assignment_exact
from src.core_model import Assignment, Instance, build_pap, build_spap
from src.file_formats import (
    load_certificate,
    load_instance,
    load_solution,
    save_certificate,
    save_instance,
    save_report,
    save_solution,
    save_verification,
    write_mps
)
from src.lp_exact import check_farkas
from src.mip_bnb import SOURCE_EXACT, Solution, solve_spap_bnb


class TestInstanceFiles:
    def test_generated_instance_survives_exactly(self, small_generated, tmp_path):
        path = tmp_path / 'inst.json'
        save_instance(small_generated, str(path))
        loaded = load_instance(str(path))
        assert loaded == small_generated
        assert loaded.meta['generator']['seed'] == 5

    def test_numbers_are_strings(self, tiny_instance, tmp_path):
        path = tmp_path / 'inst.json'
        save_instance(tiny_instance, str(path))
        data = json.loads(path.read_text())
        assert data['meta']['tool'] == 'wnd-accuracy'
        assert data['receivers'][0]['noise_mw'] == '0.000000000001'
        assert data['fading'][0] == ['0.000000001', '0.0000000001']

    def test_creates_parent_directories(self, tiny_instance, tmp_path):
        path = tmp_path / 'a' / 'b' / 'inst.json'
        save_instance(tiny_instance, str(path))
        assert path.exists()

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_instance(str(tmp_path / 'missing.json'))

    @pytest.mark.parametrize('content', [
        'not json',
        '{"transmitters": []}',
        '{"transmitters": [{"id": "t1", "pmax_mw": 1.5}], "receivers": [], "fading": []}',
        '{"transmitters": [{"id": "t1", "pmax_mw": "-1"}], "receivers": [], "fading": []}',
    ])
    def test_invalid_files(self, tmp_path, content):
        path = tmp_path / 'bad.json'
        path.write_text(content)
        with pytest.raises(ValueError, match='Invalid instance file'):
            load_instance(str(path))


class TestSolutionFiles:
    def test_solution_round_trip(self, two_cell_instance, tmp_path):
        result = solve_spap_bnb(build_spap(two_cell_instance), verify_exact=True, provenance={'seed': 1})
        path = tmp_path / 'sol.json'
        save_solution(two_cell_instance, result.solution, str(path), result)
        loaded = load_solution(two_cell_instance, str(path))
        assert loaded.p == result.solution.p
        assert loaded.x == result.solution.x
        assert loaded.objective_claimed == 2
        assert loaded.power_source == SOURCE_EXACT
        data = json.loads(path.read_text())
        assert data['status'] == 'optimal'
        assert data['meta']['provenance']['seed'] == 1

    def test_missing_power_value(self, tiny_instance, tmp_path):
        path = tmp_path / 'sol.json'
        path.write_text(json.dumps({
            'objective_claimed': '1',
            'power': {'t1': '0'},
            'assignment': {'r1': 't1'},
        }))
        with pytest.raises(ValueError, match='Invalid solution file'):
            load_solution(tiny_instance, str(path))

    def test_unknown_receiver(self, tiny_instance, tmp_path):
        path = tmp_path / 'sol.json'
        path.write_text(json.dumps({
            'objective_claimed': '1',
            'power': {'t1': '0', 't2': '0'},
            'assignment': {'r7': 't1'},
        }))
        with pytest.raises(ValueError):
            load_solution(tiny_instance, str(path))


class TestReportsAndCertificates:
    def test_report(self, tiny_instance, tmp_path):
        sol = Solution((Fraction(0), Fraction(0)), Assignment({'r1': 't1'}), Fraction(1))
        path = tmp_path / 'report.json'
        save_report(audit_solution(tiny_instance, sol), str(path), label='tiny')
        data = json.loads(path.read_text())
        assert data['meta']['label'] == 'tiny'
        assert data['max_linear_violation'] == '0.000000000002'
        assert data['max_sir_violation'] == '2'
        assert data['unserved'] == 1
        assert data['per_receiver'][0]['served'] is False

    def test_certificate(self, tmp_path):
        inst = Instance.build(
            [('t1', '1e-3'), ('t2', '1e-3')],
            [('r1', '1e-12', 2)],
            [['1e-9', '1e-10']],
        )
        asg = Assignment({'r1': 't1'})
        verification = verify_assignment_exact(inst, asg)
        path = tmp_path / 'cert.json'
        save_certificate(inst, verification, str(path))
        multipliers = load_certificate(str(path))
        assert list(multipliers) == ['sir[r1,t1]']
        assert check_farkas(build_pap(inst, asg), list(multipliers.values()))
        data = json.loads(path.read_text())
        assert data['core'] == ['sir[r1,t1]']
        assert set(data['bound_multipliers']) == {'t1', 't2'}

    def test_no_certificate_for_feasible(self, tiny_instance, tmp_path):
        verification = verify_assignment_exact(tiny_instance, Assignment({'r1': 't1'}))
        with pytest.raises(ValueError):
            save_certificate(tiny_instance, verification, str(tmp_path / 'cert.json'))

    def test_verification(self, tiny_instance, tmp_path):
        verification = verify_assignment_exact(tiny_instance, Assignment({'r1': 't1'}))
        path = tmp_path / 'verify.json'
        save_verification(tiny_instance, verification, str(path))
        data = json.loads(path.read_text())
        assert data['status'] == 'feasible'
        assert data['power'] == {'t1': '0.002', 't2': '0'}


class TestMps:
    def test_spap_export(self, tiny_instance, tmp_path):
        path = tmp_path / 'spap.mps'
        write_mps(build_spap(tiny_instance), str(path))
        lines = path.read_text().splitlines()
        assert 'LOSSY' in lines[0]
        assert lines[1] == 'NAME WND'
        assert lines[3].strip() == 'MAX'
        assert lines[-1] == 'ENDATA'
        text = '\n'.join(lines)
        assert text.count("'INTORG'") == 1
        assert text.count("'INTEND'") == 1
        assert ' G sir[r1,t1]' in lines

    def test_pap_export(self, tiny_instance, tmp_path):
        path = tmp_path / 'pap.mps'
        write_mps(build_pap(tiny_instance, Assignment({'r1': 't1'})), str(path), name='PAP')
        text = path.read_text()
        assert 'NAME PAP' in text
        assert 'MARKER' not in text
        assert '    MIN' in text
        assert 'RHS sir[r1,t1] 2e-12' in text
