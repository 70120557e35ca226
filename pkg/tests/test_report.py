"""Tests for run reports and the application entry point."""
import json
from fractions import Fraction

import pytest

from cartankit.app import main
from cartankit.core.exactlin import IntMatrix
from cartankit.ui.report import FAIL, PASS, SKIP, RunReport, jsonable


def test_jsonable():
    assert jsonable(Fraction(3, 4)) == "3/4"
    assert jsonable(Fraction(8, 4)) == 2
    assert jsonable({'m': IntMatrix.from_rows([[1, 2]]), 1: (True, None)}) == {'m': [[1, 2]], '1': [True, None]}
    with pytest.raises(TypeError):
        jsonable(0.5)


def test_verdicts():
    report = RunReport('demo')
    report.add_verdict('first', True)
    report.add_verdict('second', SKIP)
    assert report.passed
    report.add_verdict('third', False)
    assert not report.passed
    assert report.verdicts == [('first', PASS), ('second', SKIP), ('third', FAIL)]
    with pytest.raises(ValueError):
        report.add_verdict('fourth', 'maybe')


def test_json_round_trip():
    report = RunReport('qform min', inputs={'form': [[2, 1], [1, 2]]}, results={'value': Fraction(3, 2)},
                       timing_ms=12)
    report.add_verdict('minimum-equals-3/2', True)
    data = json.loads(report.render_json())
    assert data['results'] == {'value': '3/2'}
    assert data['timing_ms'] == 12
    again = RunReport.from_dict(data)
    assert again.verdicts == report.verdicts
    assert again.render_json() == report.render_json()
    assert 'timing_ms' not in json.loads(report.render_json(include_timing=False))


def test_text_rendering():
    report = RunReport('exactlin snf', inputs={'matrix': IntMatrix.from_rows([[10, 2], [3, 4]])},
                       results={'diagonal': [1, 34], 'ok': True, 'missing': None}, error="none")
    text = report.render_text()
    assert text.splitlines()[0] == "cartankit exactlin snf"
    assert "    10  2" in text
    assert "  diagonal: [1, 34]" in text
    assert "  ok: yes" in text
    assert "  missing: -" in text
    assert "error: none" in text


def test_pdf_export(tmp_path):
    report = RunReport('block inventory', results={'rows': [{'rep': [i, 0], 'l': i} for i in range(120)]})
    target = tmp_path / "inventory.pdf"
    report.export_pdf(str(target))
    assert target.read_bytes().startswith(b"%PDF")


def test_main_returns_exit_code(monkeypatch, tmp_path, capsys):
    monkeypatch.setenv('CARTANKIT_HOME', str(tmp_path))
    assert main(['block', 'mod8', '--d-order', '4', '--e', '3', '--json']) == 0
    assert json.loads(capsys.readouterr().out)['results'] == {'candidates': [3], 'l': 3}
    assert main(['block', 'ibr', '--d-order', '16', '--e', '3', '--l', '5']) == 1
