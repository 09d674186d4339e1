import json
import math

import pytest

from apekit import cli
from apekit.geon import GeonSpec, geon_normal_series
from apekit.serialize import to_dict


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_geon_report(capsys):
    code, out, _ = run(capsys, "geon", "--n", "3", "--periods", "1")
    assert code == 0
    rep = json.loads(out)
    assert rep["mass"] == pytest.approx(-4 * math.pi / 3, abs=1e-12)
    assert rep["max_scalar_curvature_residual"] < 1e-9


def test_yamabe_zero_bump(capsys):
    code, out, _ = run(capsys, "yamabe", "--n", "3", "--bump", "0")
    assert code == 0
    rep = json.loads(out)
    assert rep["c_n"] == 0.0 and rep["mass_before"] == rep["mass_after"]


def test_yamabe_bump_and_csv_profile(capsys, tmp_path):
    path = tmp_path / "profile.csv"
    code, _, _ = run(capsys, "yamabe", "--bump", "0.1", "--format", "csv", "--out", str(path))
    assert code == 0
    lines = path.read_text().splitlines()
    assert lines[0] == "rho,x,phi"
    assert all(0 < float(l.split(",")[2]) < 1 for l in lines[1:])


def test_static_soliton(capsys):
    code, out, _ = run(capsys, "static", "--preset", "soliton", "--n", "4")
    assert code == 0
    rep = json.loads(out)
    assert rep["max_residual"] < 1e-9
    assert rep["lapse_coefficient"] == pytest.approx(rep["lapse_coefficient_expected"], abs=1e-12)


@pytest.mark.parametrize("command", ["curvature", "mass", "fermat"])
def test_input_file(capsys, tmp_path, command):
    m = geon_normal_series(GeonSpec(3, (1.0,)))
    spec = tmp_path / "metric.json"
    spec.write_text(json.dumps({"n": 3, "lam": 0, "h": to_dict(m.h)}))
    code, out, _ = run(capsys, command, "--input", str(spec))
    assert code == 0
    rep = json.loads(out)
    if command == "curvature":
        assert rep["ape_order"] == 3
    if command == "mass":
        assert rep["mass"] == pytest.approx(-4 * math.pi / 3)
    if command == "fermat":
        assert rep["leading_verdict"] == "inconclusive-at-leading-order"
        assert rep["expected_mean_curvature"] == pytest.approx(3.0)


def test_geon_input_record_and_fermat_chart(capsys, tmp_path):
    spec = tmp_path / "geon.json"
    spec.write_text(json.dumps({"geon": {"n": 4, "periods": [1.0, 2.0]}}))
    code, out, _ = run(capsys, "fermat", "--input", str(spec))
    assert code == 0
    assert json.loads(out)["chart_verdict"] == "semidefinite"


def test_gauge_command(capsys):
    code, out, _ = run(capsys, "gauge", "--samples", "16", "--amplitude", "0.1")
    assert code == 0
    rep = json.loads(out)
    assert rep["weight_identity_max_abs"] < 1e-8 and rep["partially_even"]


def test_deterministic_output(capsys, monkeypatch, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    monkeypatch.setenv("APEKIT_THREADS", "3")
    run(capsys, "geon", "--n", "4", "--out", str(a))
    monkeypatch.setenv("APEKIT_THREADS", "1")
    run(capsys, "geon", "--n", "4", "--out", str(b))
    assert a.read_bytes() == b.read_bytes()


def test_exit_codes(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, _, err = run(capsys, "mass", "--input", str(bad))
    assert code == 2 and "malformed JSON" in err
    code, _, _ = run(capsys, "mass", "--input", str(tmp_path / "missing.json"))
    assert code == 2
    wrong = tmp_path / "wrong.json"
    wrong.write_text(json.dumps({"n": 3}))
    assert run(capsys, "curvature", "--input", str(wrong))[0] == 2
    assert run(capsys, "geon", "--n", "3", "--K", "2")[0] == 2
    assert run(capsys, "geon", "--n", "4", "--periods", "1")[0] == 2
    assert run(capsys, "gauge", "--n", "4")[0] == 2
    assert run(capsys, "yamabe", "--bump", "0.5", "--max-iter", "1")[0] == 3


def test_bad_thread_setting(capsys, monkeypatch):
    monkeypatch.setenv("APEKIT_THREADS", "many")
    assert run(capsys, "geon")[0] == 2


def test_csv_key_value(capsys):
    code, out, _ = run(capsys, "mass", "--format", "csv")
    assert code == 0
    rows = out.splitlines()
    assert rows[0] == "key,value"
    assert any(r.startswith("mass,") for r in rows)
