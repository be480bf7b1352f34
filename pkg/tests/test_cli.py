import json

import pytest

from swme import cli, solver
from swme.errors import ConfigError, NonFinite
from swme.io import RunConfig


def small_config(tmp_path, **kw):
    cfg = RunConfig(resolution=32, t_out=(0.01, 0.02), order=1, out_dir=str(tmp_path / "run"), **kw)
    path = tmp_path / "run.ini"
    path.write_text(cfg.to_ini())
    return path


def test_simulate_writes_outputs(tmp_path, capsys):
    code = cli.main(["simulate", "--config", str(small_config(tmp_path))])
    assert code == 0
    out = tmp_path / "run"
    names = sorted(p.name for p in out.iterdir())
    assert "config.ini" in names and "conservation.csv" in names and "report.txt" in names
    assert "snapshot_t0.0100.csv" in names and "cut_diagonal_t0.0200.csv" in names
    report = (out / "report.txt").read_text()
    assert "config_hash" in report and "t_end 0.02" in report
    assert RunConfig.load(out / "config.ini").resolution == 32
    assert "mass_drift" in capsys.readouterr().out


def test_simulate_flags_override_config(tmp_path):
    path = small_config(tmp_path)
    other = tmp_path / "other"
    assert cli.main(["simulate", "--config", str(path), "--out", str(other), "--variant", "beta"]) == 0
    assert RunConfig.load(other / "config.ini").variant == "beta"


def test_simulate_is_reproducible(tmp_path):
    path = small_config(tmp_path)
    cli.main(["simulate", "--config", str(path), "--out", str(tmp_path / "a")])
    cli.main(["simulate", "--config", str(path), "--out", str(tmp_path / "b")])
    for name in ("snapshot_t0.0200.csv", "cut_y0.5_t0.0200.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


@pytest.mark.parametrize("argv", [
    ["simulate", "--resolution", "8"],
    ["simulate", "--cfl", "2"],
    ["simulate", "--config", "/does/not/exist.ini"],
    ["simulate", "--variant", "nonsense"],
    ["certify", "--orders", "0-2"],
    ["build-closure", "--target", "weird"],
    ["build-closure", "--order", "2", "--target", "legendre:1,2"],
    ["eigen-table", "--state", "h=1,zz=3"],
])
def test_usage_errors_exit_2(tmp_path, argv):
    assert cli.main(argv + ["--out", str(tmp_path)]) == 2


def test_argparse_errors_exit_2():
    with pytest.raises(SystemExit) as exc:
        cli.main(["frobnicate"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        cli.main(["simulate", "--resolution", "many"])
    assert exc.value.code == 2


def test_numerical_failure_exits_3(tmp_path, monkeypatch):
    def boom(*a, **k):
        raise NonFinite(1, 2, 0.5)

    monkeypatch.setattr(solver, "run", boom)
    assert cli.main(["simulate", "--config", str(small_config(tmp_path))]) == 3


def test_certify_report(tmp_path):
    code = cli.main(["certify", "--variant", "HSWME,global", "--orders", "1-2", "--samples", "3",
                     "--far-samples", "2", "--angles", "2", "--out", str(tmp_path)])
    assert code == 0
    text = (tmp_path / "certify_report.txt").read_text()
    assert "[HSWME N=1]" in text and "[GloballyHyperbolic N=2]" in text
    assert "contradictions 0" in text


def test_certify_contradiction_exits_3(tmp_path, monkeypatch):
    from swme import certify
    from swme.spectral import Classification

    monkeypatch.setattr(certify, "expected_class", lambda *a: Classification.NON)
    code = cli.main(["certify", "--variant", "HSWME", "--orders", "1", "--samples", "1",
                     "--far-samples", "0", "--angles", "1", "--out", str(tmp_path)])
    assert code == 3


def test_build_closure_outputs(tmp_path):
    assert cli.main(["build-closure", "--order", "3", "--target", "lobatto", "--out", str(tmp_path)]) == 0
    data = json.loads((tmp_path / "closure_N3.json").read_text())
    assert data["N"] == 3 and len(data["last_row_A22"]) == 4
    assert data["last_row_A22"][-1] == "u_m"
    text = (tmp_path / "closure_N3.txt").read_text()
    assert "invariance_residual" in text and "beta1=0.5: WeaklyHyperbolic" in text


def test_build_closure_default_is_fixed_point(tmp_path):
    assert cli.main(["build-closure", "--order", "2", "--out", str(tmp_path)]) == 0
    data = json.loads((tmp_path / "closure_N2.json").read_text())
    assert data["last_row_A22"] == ["0", "2/3*alpha1", "u_m"]  # unchanged hyperbolic row


def test_eigen_table(tmp_path):
    assert cli.main(["eigen-table", "--variant", "HSWME", "--order", "1", "--out", str(tmp_path)]) == 0
    lines = (tmp_path / "eigen_HSWME_N1.csv").read_text().splitlines()
    rows = [l for l in lines if l[:1].isdigit()]
    assert len(rows) == 5
    dev = float(lines[-1].split()[1])
    assert dev < 1e-12


def test_eigen_table_without_closed_form(tmp_path):
    assert cli.main(["eigen-table", "--variant", "SWME", "--order", "2",
                     "--state", "h=1,alpha1=0.5,beta2=0.1", "--out", str(tmp_path)]) == 0
    assert "n/a" in (tmp_path / "eigen_SWME_N2.csv").read_text()


def test_helpers():
    assert cli.parse_orders("1-3,7") == [1, 2, 3, 7]
    V, th = cli.parse_state("h=2,gh=4,um=0.5,alpha2=0.1,theta=0.3", 2)
    assert V.g == 2.0 and V.alpha == (0.0, 0.1) and th == 0.3
    with pytest.raises(ConfigError):
        cli.parse_orders("")
