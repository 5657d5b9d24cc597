import hashlib
import json

import pytest

from selfsim import __version__
from selfsim.cli import main
from selfsim.exponents import derived_constants


@pytest.fixture
def outdir(tmp_path, monkeypatch):
    monkeypatch.setenv("SELFSIM_OUTDIR", str(tmp_path))
    return tmp_path


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_exponents_json(capsys):
    code, out, _ = run(capsys, "exponents", "--n", "11")
    assert code == 0 and json.loads(out)["p_L"] == 7


def test_exponents_inf_token(capsys):
    code, out, _ = run(capsys, "exponents", "--n", "3")
    assert code == 0 and json.loads(out)["p_JL"] == "inf"


@pytest.mark.parametrize("n", ["0", "-2", "3.5"])
def test_exponents_invalid(capsys, n):
    assert run(capsys, "exponents", "--n", n)[0] == 2


def test_exponents_real_n_override(capsys):
    code, out, _ = run(capsys, "exponents", "--n", "3.5", "--allow-real-n")
    assert code == 0 and json.loads(out)["n"] == 3.5


def test_shoot_forward(capsys, outdir):
    code, out, _ = run(capsys, "shoot", "--n", "3", "--p", "5", "--kind", "forward",
                       "--a", "1", "--r-end", "50", "--gnuplot")
    assert code == 0
    tag, ell = out.split()
    assert tag == "PositiveDecaying" and float(ell.split("=")[1]) > 0
    man = json.loads((outdir / "shoot_forward_n3_p5.manifest.json").read_text())
    assert man["error"] is None and man["version"] == __version__
    for name in man["outputs"]:
        assert (outdir / name).is_file()
    assert "shoot_forward_n3_p5.gp" in man["outputs"]


def test_shoot_singular_zero(capsys, outdir):
    code, out, _ = run(capsys, "shoot", "--n", "11", "--p", "7", "--kind", "steady",
                       "--singular", "0", "--r-end", "10")
    assert code == 0 and out.startswith("PositiveDecaying")
    L = derived_constants(11, 7).L
    rows = (outdir / "shoot_steady_n11_p7.csv").read_text().splitlines()[1:]
    assert all(float(r.split(",")[1]) == L for r in rows)


def test_shoot_backward_kappa(capsys, outdir):
    kappa = derived_constants(11, 2).kappa
    code, out, _ = run(capsys, "shoot", "--n", "11", "--p", "2", "--kind", "backward",
                       "--a", repr(kappa), "--name", "kappa")
    assert code == 0 and out.startswith("PositiveDecaying")
    summary = json.loads((outdir / "kappa.summary.json").read_text())
    assert summary["residual"] < 1e-12 and "constant" in summary["note"]


def test_shoot_undetermined_exit(capsys, outdir):
    code, out, _ = run(capsys, "shoot", "--n", "3", "--p", "5", "--kind", "forward",
                       "--a", "1", "--max-steps", "2", "--name", "short")
    assert code == 3 and out.startswith("Undetermined")
    assert (outdir / "short.csv").is_file()
    assert (outdir / "short.manifest.json").is_file()


def test_shoot_error_still_writes_manifest(capsys, outdir):
    code, _, err = run(capsys, "shoot", "--n", "3", "--p", "2", "--kind", "steady",
                       "--singular", "0.1", "--name", "bad")
    assert code == 2 and "L exists" in err
    assert json.loads((outdir / "bad.manifest.json").read_text())["error"]


def test_verify_exponents(capsys):
    code, out, _ = run(capsys, "verify", "exponents")
    assert code == 0 and json.loads(out)["passed"] is True


def test_verify_identities(capsys):
    code, out, _ = run(capsys, "verify", "identities")
    report = json.loads(out)
    assert [c["id"] for c in report["checks"]] == ["AC3", "AC5", "AC6"]
    assert code == (0 if report["passed"] else 1)


def test_verify_unknown(capsys):
    assert run(capsys, "verify", "unknown")[0] == 2


SWEEP = """[sweep]
n = 3
p = 5
kind = forward
a_grid = geomspace 0.25 4 5
"""


def test_sweep_five_points(capsys, outdir, tmp_path):
    cfg = tmp_path / "five.ini"
    cfg.write_text(SWEEP)
    code, out, _ = run(capsys, "sweep", str(cfg))
    assert code == 0
    rows = (outdir / "five.csv").read_text().splitlines()[1:]
    assert len(rows) == 5 and all(",PositiveDecaying," in r for r in rows)
    man = json.loads((outdir / "five.manifest.json").read_text())
    assert man["config_digest"] == hashlib.sha256(cfg.read_bytes()).hexdigest()
    assert sorted(man["outputs"]) == ["five.csv", "five.summary.json"]


def test_sweep_is_bit_identical(capsys, outdir, tmp_path):
    cfg = tmp_path / "rep.ini"
    cfg.write_text(SWEEP.replace("geomspace 0.25 4 5", "0.5, 1, 2") + "workers = 2\n")
    run(capsys, "sweep", str(cfg), "--name", "one")
    run(capsys, "sweep", str(cfg), "--name", "two")
    for ext in (".csv", ".summary.json"):
        assert (outdir / f"one{ext}").read_bytes() == (outdir / f"two{ext}").read_bytes()


def test_sweep_empty_grid(capsys, outdir, tmp_path):
    cfg = tmp_path / "empty.ini"
    cfg.write_text(SWEEP.replace("geomspace 0.25 4 5", ""))
    code, _, err = run(capsys, "sweep", str(cfg))
    assert code == 2 and "empty.ini:5" in err and "a_grid" in err
    assert json.loads((outdir / "empty.manifest.json").read_text())["error"]


def test_sweep_bad_value_has_context(capsys, outdir, tmp_path):
    cfg = tmp_path / "bad.ini"
    cfg.write_text(SWEEP.replace("p = 5", "p = five"))
    code, _, err = run(capsys, "sweep", str(cfg))
    assert code == 2 and "bad.ini:3" in err and "'p'" in err


def test_sweep_unknown_key(capsys, outdir, tmp_path):
    cfg = tmp_path / "key.ini"
    cfg.write_text(SWEEP + "colour = blue\n")
    code, _, err = run(capsys, "sweep", str(cfg))
    assert code == 2 and "colour" in err


def test_sweep_duplicates_warn(capsys, outdir, tmp_path):
    cfg = tmp_path / "dup.ini"
    cfg.write_text(SWEEP.replace("geomspace 0.25 4 5", "1, 0.5, 1"))
    with pytest.warns(UserWarning, match="duplicate"):
        code, _, _ = run(capsys, "sweep", str(cfg))
    assert code == 0
    assert len((outdir / "dup.csv").read_text().splitlines()) == 3


def test_sweep_delta_grid(capsys, outdir, tmp_path):
    cfg = tmp_path / "delta.ini"
    cfg.write_text("[sweep]\nn = 11\np = 7\nkind = steady\ndelta_grid = -1e-3, 0, 1e-3\n"
                   "[options]\nr_end = 10\n")
    code, out, _ = run(capsys, "sweep", str(cfg))
    assert code == 0 and len(out.splitlines()) == 3
