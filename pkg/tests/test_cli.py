import subprocess
import sys
import textwrap

import pytest

from volterra_ces.cli import main
from volterra_ces.config import ConfigError, load_config

IDE = """
[scenario]
kind = ide
step = 1e-2
horizon = 200
forcing = 0.7
{extra}

[measure]
atoms = [[0, -2]]
density = exp(-s)

[analysis]
checks = {checks}
"""


def _write(tmp_path, name="s.ini", extra="", checks="forcing_limit, resolvent_integrals", body=IDE):
    p = tmp_path / name
    p.write_text(textwrap.dedent(body.format(extra=extra, checks=checks)))
    return p


def _report(out_dir):
    return (out_dir / "report.txt").read_text().splitlines()


def test_run_pass_writes_outputs(tmp_path):
    cfg = _write(tmp_path)
    out = tmp_path / "out"
    assert main(["run", str(cfg), "--out", str(out)]) == 0
    for name in ("solution.csv", "running_mean.csv", "report.txt"):
        assert (out / name).exists()
    lines = _report(out)
    keys = [ln.split(" = ")[0] for ln in lines if " = " in ln]
    assert keys[:3] == ["scenario", "kind", "r_integrable"]
    assert keys[-1] == "exit_status"
    assert "x_limit_predicted = 0.7" in lines
    assert any(ln.startswith("x_limit_verdict = pass") for ln in lines)


def test_csv_format(tmp_path):
    out = tmp_path / "out"
    main(["run", str(_write(tmp_path)), "--out", str(out)])
    raw = (out / "solution.csv").read_bytes()
    assert b"\r\n" not in raw
    head = raw.decode().splitlines()
    assert head[0].startswith("t,")
    assert head[1].split(",")[0] == "0"


def test_outputs_are_reproducible(tmp_path):
    cfg = _write(tmp_path)
    a, b = tmp_path / "a", tmp_path / "b"
    main(["run", str(cfg), "--out", str(a)])
    main(["run", str(cfg), "--out", str(b)])
    for name in ("solution.csv", "running_mean.csv", "report.txt"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_failing_check_exits_2(tmp_path):
    cfg = _write(tmp_path, extra="", checks="forcing_limit")
    assert main(["run", str(cfg), "--out", str(tmp_path / "o"), "--tol", "1e-12"]) == 2
    assert "exit_status = 2" in _report(tmp_path / "o")


def test_bad_theta_exits_1(tmp_path, capsys):
    body = IDE + "thetas = 0.5, 1.5\n"
    cfg = _write(tmp_path, checks="interval_averages", body=body)
    assert main(["run", str(cfg), "--out", str(tmp_path / "o")]) == 1
    assert "theta = 1.5 is outside (0, 1]" in capsys.readouterr().err


@pytest.mark.parametrize("extra,checks,msg", [
    ("", "no_such_check", "unknown check"),
    ("", "delay_equivalence", "does not apply"),
    ("forcing_family = pathological\nalpha = 1\nstep = 0.01", "forcing_limit", "sampling bound"),
])
def test_config_errors(tmp_path, extra, checks, msg):
    body = IDE.replace("step = 1e-2\n", "") if "step" in extra else IDE
    cfg = _write(tmp_path, extra=extra, checks=checks, body=body)
    with pytest.raises(ConfigError, match=msg):
        load_config(cfg)
    assert main(["run", str(cfg), "--out", str(tmp_path / "o")]) == 1


def test_missing_file_exits_1(tmp_path):
    assert main(["run", str(tmp_path / "nope.ini")]) == 1


def test_overrides(tmp_path):
    cfg = load_config(_write(tmp_path), step=0.05, horizon=100.0, tol=0.5)
    assert cfg.scenario.h == 0.05 and cfg.scenario.T == 100.0
    assert cfg.tol("forcing_limit") == 0.5


def test_solve_to_stdout(tmp_path, capsys):
    assert main(["solve", str(_write(tmp_path)), "--horizon", "2"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0].startswith("t,x")
    assert any(ln.startswith("# ") for ln in out)


def test_resolvent_and_cesaro(tmp_path, capsys):
    cfg = _write(tmp_path)
    assert main(["resolvent", str(cfg), "--horizon", "100"]) == 0
    assert main(["cesaro", str(cfg)]) == 0
    out = capsys.readouterr().out
    assert "converged" in out


def test_example_then_cesaro(tmp_path, capsys):
    csv = tmp_path / "f.csv"
    assert main(["example", "--family", "pathological", "--horizon", "200",
                 "--out", str(csv)]) == 0
    capsys.readouterr()
    main(["cesaro", str(csv)])
    assert "not_converged" in capsys.readouterr().out
    with pytest.raises(SystemExit):
        main(["example", "--family", "bogus"])


def test_roots_and_meansquare(tmp_path, capsys):
    fde = tmp_path / "d.ini"
    fde.write_text(textwrap.dedent("""
        [scenario]
        kind = fde
        step = 1e-2
        horizon = 100
        history = 1
        forcing = 0.3
        [measure]
        atoms = [[-1, -0.3]]
    """))
    assert main(["roots", str(fde)]) == 0
    assert "-0.48940222718" in capsys.readouterr().out
    assert main(["meansquare", str(_write(tmp_path)), "--horizon", "10", "--sigma", "1"]) == 0


def test_console_script_help():
    r = subprocess.run([sys.executable, "-m", "volterra_ces.cli", "--help"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and "run" in r.stdout
