"""
Tests for the ``incompat`` command line: argument validation, report formats
and exit codes.
"""

import json

import pytest

from incompat import __version__
from incompat.cli import EXIT_INPUT, EXIT_OK, main
from incompat.config import get_settings


def _run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


# ---------------------------------------------------------------------------
# Closed-form subcommands
# ---------------------------------------------------------------------------


def test_witness_trivial(capsys):
    code, out, _ = _run(capsys, "witness", "--sr", "0", "--k", "2")
    payload = json.loads(out)
    assert code == EXIT_OK
    assert payload["dimension_bound"] == pytest.approx(1.0)
    assert payload["certified_dimension"] == 1
    assert payload["version"] == __version__


def test_witness_qutrit(capsys):
    code, out, _ = _run(capsys, "witness", "--sr", "0.4432", "--k", "3")
    payload = json.loads(out)
    assert code == EXIT_OK
    assert payload["dimension_bound"] == pytest.approx(3.0, abs=1e-3)
    assert payload["certified_dimension"] == 3


def test_witness_out_of_range(capsys):
    code, _, err = _run(capsys, "witness", "--sr", "2.9", "--k", "3")
    assert code == EXIT_INPUT
    assert "no finite dimension" in err


def test_bounds_report(capsys):
    code, out, _ = _run(capsys, "bounds", "--k", "5", "--m", "4")
    payload = json.loads(out)
    assert code == EXIT_OK
    assert payload["deg3_g"] == pytest.approx(0.5303, abs=1e-4)
    assert payload["deg2_g"] == pytest.approx(0.5)
    assert payload["mub_deg4"]["construction"] == "deg4_mub"
    assert "anticommuting" not in payload


def test_bounds_for_dichotomic(capsys):
    code, out, _ = _run(capsys, "bounds", "--k", "4", "--m", "2")
    assert code == EXIT_OK
    assert json.loads(out)["anticommuting"]["g"] == pytest.approx(0.75)


def test_tables_check(capsys):
    code, out, err = _run(capsys, "tables", "Ia", "--check")
    assert code == EXIT_OK
    assert out.splitlines()[0] == "k,d,value,construction"
    assert len(out.splitlines()) == 26
    assert "max |delta|" in err


def test_tables_to_file(capsys, tmp_path):
    target = tmp_path / "II.csv"
    code, out, _ = _run(capsys, "tables", "II", "--output", str(target))
    assert code == EXIT_OK
    assert out == ""
    assert target.read_text().startswith("k,d,value,construction\n2,2,0.7071,deg4_mub")


# ---------------------------------------------------------------------------
# Input errors
# ---------------------------------------------------------------------------


def test_mub_family_needs_dimension(capsys):
    code, _, err = _run(capsys, "robustness", "--family", "mub", "--k", "2")
    assert code == EXIT_INPUT
    assert "--k and --d" in err


def test_tolerance_range(capsys):
    code, _, _ = _run(capsys, "witness", "--sr", "0.1", "--k", "2", "--tol", "1")
    assert code == EXIT_INPUT


def test_invalid_measurement_file(capsys, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"dim": 1, "measurements": [[[[[0.5, 0.0]]]]]}))
    code, _, err = _run(capsys, "robustness", "--family", "file", "--path", str(path))
    assert code == EXIT_INPUT
    assert "completeness" in err


def test_missing_measurement_file(capsys, tmp_path):
    code, _, _ = _run(capsys, "robustness", "--family", "file", "--path", str(tmp_path / "none.json"))
    assert code == EXIT_INPUT


def test_invalid_environment_exits_with_input_error(capsys, monkeypatch):
    monkeypatch.setenv("INCOMPAT_TOL", "tight")
    get_settings.cache_clear()
    code, out, err = _run(capsys, "witness", "--sr", "0", "--k", "2")
    assert code == EXIT_INPUT
    assert out == ""
    assert "invalid setting" in err


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as info:
        main(["--version"])
    assert info.value.code == 0
    assert __version__ in capsys.readouterr().out


# ---------------------------------------------------------------------------
# Solver-backed subcommands
# ---------------------------------------------------------------------------


@pytest.mark.solver
def test_robustness_pauli_depolarising(capsys):
    code, out, _ = _run(capsys, "robustness", "--family", "pauli", "--measure", "d")
    payload = json.loads(out)
    assert code == EXIT_OK
    assert payload["eta"] == pytest.approx(0.5774, abs=1e-4)
    assert payload["status"] in ("optimal", "inaccurate")
    assert "upper_bound" not in payload


@pytest.mark.solver
def test_robustness_pauli_generalised_has_spectral_bound(capsys):
    code, out, _ = _run(capsys, "robustness", "--family", "pauli", "--measure", "g")
    payload = json.loads(out)
    assert code == EXIT_OK
    assert payload["eta"] == pytest.approx(0.7887, abs=1e-4)
    assert payload["upper_bound"] >= payload["eta"] - 1e-6


@pytest.mark.solver
def test_robustness_csv(capsys):
    code, out, _ = _run(capsys, "robustness", "--family", "anticommuting", "--k", "3", "--measure", "g", "--format", "csv")
    header, row = out.splitlines()
    assert code == EXIT_OK
    assert header == "measure,eta,status,residual,time_s"
    assert row.startswith("g,0.788")


@pytest.mark.solver
def test_hierarchy_export(capsys, tmp_path):
    target = tmp_path / "k3m2t1.dat-s"
    code, out, _ = _run(capsys, "hierarchy", "--k", "3", "--m", "2", "--level", "1", "--export-sdpa", str(target))
    assert code == EXIT_OK
    assert json.loads(out)["level"] == 1
    assert target.read_text().startswith('"incompat')
