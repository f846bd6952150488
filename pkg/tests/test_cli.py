import json

import pytest

from turingfold import io
from turingfold.cli import main, parse_range


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_parse_range():
    assert parse_range("-1:2") == (-1.0, 2.0)
    assert parse_range("0.1:0.3:0.1", True) == [0.1, 0.2, 0.3]


def test_locate_then_coeffs(tmp_path, capsys):
    code, out, _ = run(capsys, "locate", "--model", "scalar6", "--out", str(tmp_path))
    assert code == 0
    assert "mu*=-1" in out and "audit=pass" in out
    doc = io.load_json(tmp_path / "report.json")
    assert doc["report"]["k_star"] == pytest.approx(1.0)
    code, out, _ = run(capsys, "coeffs", "--report", str(tmp_path / "report.json"), "--out", str(tmp_path))
    assert code == 0
    coeffs = io.load_json(tmp_path / "coefficients.json")
    assert [coeffs[k] for k in ("alpha", "d", "beta")] == pytest.approx([0.5, 0.5, 8.0])
    assert io.load_json(tmp_path / "manifest.json")["command"] == "coeffs"


def test_locate_with_parameter_override(tmp_path, capsys):
    code, out, _ = run(capsys, "locate", "--model", "extended", "--param", "gamma=-0.684", "--out", str(tmp_path))
    assert code == 0
    assert io.load_json(tmp_path / "report.json")["report"]["nu_star"] == pytest.approx(1.684)


def test_malformed_model_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{oops")
    code, _, err = run(capsys, "locate", "--model", str(bad), "--out", str(tmp_path))
    assert code == 2
    assert "error" in err
    code, _, _ = run(capsys, "locate", "--model", "no_such_model", "--out", str(tmp_path))
    assert code == 2
    code, _, _ = run(capsys, "busse", "--alpha", "1", "--out", str(tmp_path))
    assert code == 2


def test_report_without_model_is_rejected(tmp_path, capsys):
    p = tmp_path / "r.json"
    p.write_text(json.dumps({"report": {}}))
    code, _, err = run(capsys, "coeffs", "--report", str(p), "--out", str(tmp_path))
    assert code == 2
    assert "not a report" in err


def test_busse_accepts_negative_ranges_and_replays(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    code, out, _ = run(capsys, "busse", "--alpha", "1", "--d", "1", "--beta", "1", "--K", "-1.2:1.2",
                       "--R", "-0.5:3", "--nK", "9", "--nR", "7", "--out", str(a))
    assert code == 0
    rows = io.read_csv(a / "busse.csv")
    assert len(rows) == 63
    assert float(rows[0]["K"]) == -1.2
    code, _, _ = run(capsys, "busse", "--config", str(a / "manifest.json"), "--out", str(b))
    assert code == 0
    assert (a / "busse.csv").read_bytes() == (b / "busse.csv").read_bytes()
    # flags beat the config file
    run(capsys, "busse", "--config", str(a / "manifest.json"), "--nK", "3", "--out", str(b))
    assert len(io.read_csv(b / "busse.csv")) == 21


def test_config_with_unknown_keys_is_rejected(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"params": {"bogus": 1}}))
    with pytest.raises(SystemExit) as exc:
        main(["busse", "--config", str(cfg)])
    assert exc.value.code == 2


def test_tip_ode(tmp_path, capsys):
    code, out, _ = run(capsys, "tip", "--mode", "ode", "--out", str(tmp_path))
    assert code == 0
    assert "collapsed" in out
    man = io.load_json(tmp_path / "manifest.json")
    assert man["outcome"] == "collapsed"
    assert man["collapse_mu"] == pytest.approx(-1.0, abs=0.02)


def test_simulate_ab(tmp_path, capsys):
    code, _, _ = run(capsys, "simulate", "ab", "--alpha", "1", "--d", "1", "--beta", "1", "--R", "0.5",
                     "--K0", "0.1", "--L", "62.83185307179586", "--N", "32", "--t-end", "2", "--record-every", "1",
                     "--stride", "4", "--out", str(tmp_path))
    assert code == 0
    assert len(io.read_csv(tmp_path / "trajectory.csv")) == 2 * 8
    assert len(io.read_csv(tmp_path / "norms.csv")) == 2


def test_simulate_pde_needs_model(tmp_path, capsys):
    code, _, err = run(capsys, "simulate", "pde", "--out", str(tmp_path))
    assert code == 2
    code, _, _ = run(capsys, "simulate", "pde", "--model", "scalar6", "--param", "mu=-0.5", "--param", "nu=0.9",
                     "--u0", "1.7", "--N", "32", "--t-end", "1", "--record-every", "0.5", "--out", str(tmp_path))
    assert code == 0
    assert len(io.read_csv(tmp_path / "norms.csv")) == 2


def test_converge_single_delta(tmp_path, capsys):
    code, out, _ = run(capsys, "converge", "--K", "0", "--deltas", "0.1", "--out", str(tmp_path))
    assert code == 0
    row, = io.read_csv(tmp_path / "convergence.csv")
    assert float(row["norm_diff"]) == pytest.approx(0.0441612, rel=1e-4)


def test_gl_embed(tmp_path, capsys):
    code, out, _ = run(capsys, "gl-embed", "--model", "scalar6", "--out", str(tmp_path))
    assert code == 0
    row, = io.read_csv(tmp_path / "gl_embedding.csv")
    assert float(row["deviation"]) < 0.1


def test_chaos_pair_defaults(tmp_path, capsys):
    code, _, _ = run(capsys, "chaos-pair", "--tau-max", "2", "--stride", "16", "--out", str(tmp_path))
    assert code == 0
    assert io.read_csv(tmp_path / "chaos_pair.csv")
