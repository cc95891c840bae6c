import io
import subprocess
import sys

import numpy as np
import pytest

from sparsevine import persist
from sparsevine.bicop import BicopModel
from sparsevine.cli import main
from sparsevine.criteria import CriterionConfig, ModelTally, mbicv
from sparsevine.fit import VineModel, evaluate
from sparsevine.risk import ArmaGarchParams, simulate_panel
from sparsevine.sim import rvine_sample
from sparsevine.structure import dvine
from test_fit import sparse_truth


def write_csv(path, names, values, labels=None):
    with open(path, "w") as fh:
        if labels is None:
            persist.write_table(fh, names, values)
        else:
            fh.write(",".join(["date", *names]) + "\n")
            for lab, row in zip(labels, values.tolist()):
                fh.write(",".join([lab, *map(repr, row)]) + "\n")
    return str(path)


@pytest.fixture(scope="module")
def copula_csv(tmp_path_factory):
    u = rvine_sample(sparse_truth(), 600, seed=8)
    return write_csv(tmp_path_factory.mktemp("d") / "u.csv", [f"x{k}" for k in range(8)], u), u


@pytest.fixture(scope="module")
def returns_csv(tmp_path_factory):
    s = dvine(3)
    vine = VineModel(s, {e: BicopModel("gaussian", 0, (0.4,)) if e.tree_level == 1 else BicopModel() for e in s.all_edges()})
    p = ArmaGarchParams(0.0, 0.05, 0.0, 0.05, 0.08, 0.85, 6.0)
    x = simulate_panel([p] * 3, vine, 420, seed=2)
    labels = [f"d{t:04d}" for t in range(len(x))]
    return write_csv(tmp_path_factory.mktemp("r") / "r.csv", ["a", "b", "c"], x, labels)


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_fit_auto_round_trip(copula_csv, tmp_path, capsys):
    path, u = copula_csv
    model_path = tmp_path / "m.json"
    code, out, _ = run(["fit", "-i", path, "--criterion", "mbicv", "--psi0", "0.9", "--threshold", "auto",
                        "-o", model_path], capsys)
    assert code == 0
    assert out.startswith("# selected:")
    assert out.splitlines()[1] == "step,theta,trunc_level,mbicv,q,q_over_qmax"
    model, meta = persist.load_model(model_path)
    assert meta["names"] == [f"x{k}" for k in range(8)]
    assert evaluate(model, u).mbicv == pytest.approx(model.mbicv, rel=1e-8)


def test_fit_threshold_one_is_independence(copula_csv, tmp_path, capsys):
    path, u = copula_csv
    code, _, _ = run(["fit", "-i", path, "--threshold", "1.0", "-o", tmp_path / "m.json"], capsys)
    assert code == 0
    model, _ = persist.load_model(tmp_path / "m.json")
    assert model.q == 0
    assert model.mbicv == pytest.approx(mbicv(ModelTally(0.0, 0, len(u), 8), CriterionConfig()))


def test_bic_selects_denser_model(copula_csv, tmp_path, capsys):
    path, _ = copula_csv
    q = {}
    for crit in ("bic", "mbicv"):
        assert run(["fit", "-i", path, "--criterion", crit, "--threshold", "auto", "-o", tmp_path / f"{crit}.json"],
                   capsys)[0] == 0
        q[crit] = persist.load_model(tmp_path / f"{crit}.json")[0].q
    assert q["bic"] >= q["mbicv"]


def test_fit_truncation_cv_diagnostics(copula_csv, tmp_path, capsys):
    path, _ = copula_csv
    diag = tmp_path / "diag.csv"
    code, _, _ = run(["fit", "-i", path, "--families", "gaussian,clayton", "--truncation", "auto", "--cv",
                      "--diagnostics", diag, "-o", tmp_path / "m.json"], capsys)
    assert code == 0
    table = persist.read_table(diag)
    assert table.names[-1] == "cv_loglik"
    assert list(table.values[:, 2]) == list(range(1, len(table.values) + 1))


def test_fit_raw_returns(returns_csv, tmp_path, capsys):
    code, _, _ = run(["fit", "-i", returns_csv, "--raw", "--families", "gaussian", "-o", tmp_path / "m.json"], capsys)
    assert code == 0
    assert persist.load_model(tmp_path / "m.json")[1]["input"] == "returns"


def test_simulate(copula_csv, tmp_path, capsys):
    path, _ = copula_csv
    model_path = tmp_path / "m.json"
    run(["fit", "-i", path, "--families", "gaussian", "-o", model_path], capsys)
    a = run(["simulate", "-i", model_path, "--n", 200, "--seed", 4], capsys)[1]
    b = run(["simulate", "-i", model_path, "--n", 200, "--seed", 4], capsys)[1]
    assert a == b
    t = persist.read_table(io.StringIO(a))
    assert t.values.shape == (200, 8) and t.names[0] == "x0"


def test_simulate_independence_taus(copula_csv, tmp_path, capsys):
    from scipy import stats

    path, _ = copula_csv
    run(["fit", "-i", path, "--threshold", "1", "-o", tmp_path / "m.json"], capsys)
    out = tmp_path / "s.csv"
    assert run(["simulate", "-i", tmp_path / "m.json", "--n", 20000, "-o", out], capsys)[0] == 0
    v = persist.read_table(out).values
    assert max(abs(stats.kendalltau(v[:, 0], v[:, k]).statistic) for k in range(1, 8)) < 3 / np.sqrt(20000) * 1.5


def test_simstudy_cli(tmp_path, capsys):
    args = ["simstudy", "--regimes", "0.25", "--sizes", "500", "--reps", 1, "--seed", 2]
    code, a, _ = run(args, capsys)
    assert code == 0
    rows = [ln.split(",") for ln in a.splitlines() if not ln.startswith("#")][1:]
    assert {r[4] for r in rows} <= {"0.000000", "1.000000"}
    assert run(args + ["--threads", 2], capsys)[1] == a


def test_backtest_cli(returns_csv, capsys):
    args = ["backtest", "-i", returns_csv, "--train", 300, "--test", 60, "--draws", 1000, "--families", "gaussian"]
    code, a, _ = run(args, capsys)
    assert code == 0
    lines = [ln for ln in a.splitlines() if not ln.startswith("#")]
    assert lines[0].startswith("row,bic@0.9") and "truncation@0.99" in lines[0]
    assert run(args + ["--threads", 2], capsys)[1] == a


@pytest.mark.parametrize("argv,code", [
    (["fit", "-i", "/nonexistent.csv", "-o", "{out}"], 2),
    (["fit", "-i", "{bad}", "-o", "{out}"], 2),
    (["fit", "-i", "{bad}", "--threshold", "-1", "-o", "{out}"], 4),
    (["fit", "-i", "{bad}", "--threads", "0", "-o", "{out}"], 4),
    (["simulate", "-i", "{bad}", "--n", "5"], 2),
    (["backtest", "-i", "{returns}", "--test", "0"], 4),
    (["backtest", "-i", "{returns}", "--train", "5000"], 4),
    (["backtest", "-i", "{returns}", "--models", "garch"], 4),
])
def test_exit_codes(argv, code, tmp_path, returns_csv, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("x,y\n0.1,0.2\n0.3,oops\n")
    subs = {"{bad}": str(bad), "{returns}": returns_csv, "{out}": str(tmp_path / "m.json")}
    assert main([subs.get(a, a) for a in argv]) == code
    err = capsys.readouterr().err
    if argv[:3] == ["fit", "-i", "{bad}"] and code == 2:
        assert "line 3, column 2" in err


def test_parser_errors_exit_with_config_code(capsys):
    for argv in (["nonsense"], ["fit"], ["simulate", "-i", "m.json", "--n", "many"], ["fit", "-i", "u.csv", "--truncation", "zero"]):
        with pytest.raises(SystemExit) as exc:
            main(argv)
        assert exc.value.code == 4
    capsys.readouterr()


def test_corrupt_model_file(tmp_path, capsys):
    bad = tmp_path / "m.json"
    bad.write_text('{"format": "sparsevine-model", "version": 1}')
    assert main(["simulate", "-i", str(bad), "--n", "5"]) == 2
    assert "FormatError" in capsys.readouterr().err


def test_console_entry_point(copula_csv, tmp_path):
    path, _ = copula_csv
    res = subprocess.run([sys.executable, "-m", "sparsevine", "fit", "-i", path, "--families", "gaussian",
                          "--threshold", "0.3", "-o", str(tmp_path / "m.json")], capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
