import csv
import io
import json
import math
from pathlib import Path

import numpy as np
import pytest

from oracles import coupon_failure_enumeration
from wlsample.cli import coupon_failure_probability, main
from wlsample.config import ConfigError, parse_config
from wlsample.sampling import minimal_budget

CONFIGS = Path(__file__).resolve().parents[1] / "configs"
SAMPLE_CFG = str(CONFIGS / "sample_conditioned.json")


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def rows(text):
    body = [line for line in text.splitlines() if not line.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(body))))


def write_config(tmp_path, data, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


def test_weights_fourier(capsys):
    code, out, _ = run(["weights", "--basis", "fourier", "--n", "3", "--grid-size", "11"], capsys)
    assert code == 0
    table = rows(out)
    assert len(table) == 11 and list(table[0]) == ["x", "sum_Lj_sq", "w"]
    assert all(abs(float(r["w"]) - 1) <= 1e-12 for r in table)


def test_weights_legendre(capsys):
    _, out, _ = run(["weights", "--basis", "legendre", "--n", "2", "--grid-size", "3"], capsys)
    w = {float(r["x"]): float(r["w"]) for r in rows(out)}
    assert w[-1.0] == pytest.approx(0.5) and w[0.0] == pytest.approx(2.0) and w[1.0] == pytest.approx(0.5)


def test_weights_single_row(capsys):
    _, out, _ = run(["weights", "--basis", "legendre", "--n", "2", "--grid-size", "1"], capsys)
    assert [float(r["x"]) for r in rows(out)] == [0.0]
    _, out, _ = run(["weights", "--basis", "piecewise_constant", "--n", "2", "--grid-size", "1"], capsys)
    assert [float(r["x"]) for r in rows(out)] == [0.5]


def test_weights_bad_args(capsys):
    with pytest.raises(SystemExit) as info:
        main(["weights", "--basis", "fourier", "--n", "4"])
    assert info.value.code == 2
    with pytest.raises(SystemExit) as info:
        main(["weights", "--basis", "chebyshev", "--n", "4"])
    assert info.value.code == 2


def test_schedule(capsys):
    _, out, _ = run(["schedule", "--n", "4", "--m", "600"], capsys)
    s = json.loads(out)
    assert (s["L"], s["c0"], s["C0"]) == (0, 0.5, 300.0)
    _, out, _ = run(["schedule", "--n", "1", "--m", "256"], capsys)
    s = json.loads(out)
    assert s["L"] == 1 and s["c0"] == pytest.approx(35.72, abs=1e-2)
    assert len(s["alphas"]) == 2
    with pytest.raises(SystemExit) as info:
        main(["schedule", "--n", "5", "--m", "4"])
    assert info.value.code == 2


def test_sample_budget_rows_and_footer(capsys):
    code, out, _ = run(["sample", "--config", SAMPLE_CFG], capsys)
    assert code == 0
    table = rows(out)
    assert len(table) == minimal_budget(4, 0.5) == 111
    assert {r["provenance"] for r in table} == {"conditioned"}
    footer = [line for line in out.splitlines() if line.startswith("#")]
    assert len(footer) == 1 and footer[0].startswith("# gram_spectral_distance=")
    assert float(footer[0].split("=")[1]) <= 0.5


def test_sample_determinism(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        assert main(["sample", "--config", SAMPLE_CFG, "--seed", "5", "--out", str(path)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert b"\r\n" not in a.read_bytes()
    main(["sample", "--config", SAMPLE_CFG, "--seed", "6", "--out", str(b)])
    assert a.read_bytes() != b.read_bytes()


def test_floats_round_trip(capsys):
    _, out, _ = run(["sample", "--config", SAMPLE_CFG, "--pipeline", "bss"], capsys)
    for r in rows(out):
        assert float(r["x"]) == float(format(float(r["x"]), ".17g"))
        assert r["provenance"] == "bss"


def test_experiment_pipeline_matrix(tmp_path, capsys):
    cfg = write_config(tmp_path, {
        "space": {"basis": "legendre", "n": 4},
        "pipelines": ["conditioned", "subsampled", "bss", "greedy_removed"],
        "m": 111, "trials": 4, "seed": 3,
    })
    out = tmp_path / "run.csv"
    assert main(["experiment", "--config", cfg, "--out", str(out)]) == 0
    table = rows(out.read_text())
    assert [r["pipeline"] for r in table] == sum(([p] * 4 for p in
                                                  ["conditioned", "subsampled", "bss", "greedy_removed"]), [])
    for key in ("trial", "m_final", "error_sq", "e_n_sq", "ratio", "lambda_min", "redraws", "split_failures"):
        assert key in table[0]
    summary = json.loads(out.with_suffix(".json").read_text())
    assert summary["seed"] == 3 and summary["config"]["trials"] == 4
    sub = summary["pipelines"]["subsampled"]
    assert len(sub["achieved_constants"]) == 4
    assert all(c0 > 0 and C0 >= c0 for c0, C0 in sub["achieved_constants"])
    assert "mean_ratio" in summary["pipelines"]["bss"] and "se_ratio" in summary["pipelines"]["bss"]


def test_experiment_byte_determinism(tmp_path):
    cfg = write_config(tmp_path, {"space": {"basis": "fourier", "n": 3}, "target": {"name": "step"},
                                  "pipelines": ["conditioned", "greedy_removed"], "trials": 5, "seed": 9})
    outs = []
    for name in ("a.csv", "b.csv"):
        path = tmp_path / name
        main(["experiment", "--config", cfg, "--out", str(path)])
        outs.append((path.read_bytes(), path.with_suffix(".json").read_bytes()))
    assert outs[0] == outs[1]


def test_experiment_trials_override(tmp_path, capsys):
    cfg = write_config(tmp_path, {"space": {"basis": "legendre", "n": 2}, "trials": 50})
    code, out, err = run(["experiment", "--config", cfg, "--trials", "3", "--seed", "1"], capsys)
    assert code == 0 and len(rows(out)) == 3
    assert json.loads(err)["seed"] == 1


def test_coupon_probability_oracle():
    for n, m in [(2, 2), (3, 3), (3, 5), (4, 4), (4, 6), (5, 5)]:
        assert coupon_failure_probability(n, m) == pytest.approx(coupon_failure_enumeration(n, m), abs=1e-14)
    assert coupon_failure_probability(8, 8) == pytest.approx(1 - math.factorial(8) / 8 ** 8, abs=1e-15)


def test_coupon_preset(tmp_path, capsys):
    code, _, err = run(["experiment", "--config", str(CONFIGS / "coupon.json"), "--trials", "40"], capsys)
    summary = json.loads(err)
    iid = summary["pipelines"]["iid"]
    assert iid["expected_failure_fraction"] == pytest.approx(1 - math.factorial(8) / 8 ** 8)
    assert "failure_fraction" in iid
    assert summary["pipelines"]["subsampled"]["failures"] == 0


def test_harness_error_exit(tmp_path, capsys):
    cfg = write_config(tmp_path, {"space": {"basis": "piecewise_constant", "n": 6}, "target": {"name": "random_vn"},
                                  "pipelines": ["iid"], "m": 2, "trials": 3})
    code, out, _ = run(["experiment", "--config", cfg], capsys)
    assert code == 1
    record = json.loads(out[out.index('{\n  "error"'):])
    assert record["error"] == "HarnessError"


@pytest.mark.parametrize("data", [
    {"space": {"basis": "legendre", "n": 4}, "bogus": 1},
    {"space": {"basis": "legendre", "n": 4, "colour": "red"}},
    {"pipelines": ["teleport"]},
    {"m": "budget(2)"},
    {"m": 0},
    {"space": {"basis": "fourier", "n": 2}},
    {"sparsify": {"strategy": "guess"}},
    {"target": {"name": "sinc"}},
    {"trials": 0},
])
def test_config_errors(tmp_path, data):
    with pytest.raises(ConfigError):
        parse_config(data)
    with pytest.raises(SystemExit) as info:
        main(["experiment", "--config", write_config(tmp_path, data)])
    assert info.value.code == 2


def test_missing_config(capsys):
    with pytest.raises(SystemExit) as info:
        main(["sample", "--config", "/nonexistent.json"])
    assert info.value.code == 2


def test_target_coefficients(tmp_path, capsys):
    cfg = write_config(tmp_path, {"space": {"basis": "legendre", "n": 2}, "target": {"coeffs": [1.0, [0, 2]]},
                                  "trials": 2})
    code, out, _ = run(["experiment", "--config", cfg], capsys)
    assert code == 0
    assert all(float(r["error_sq"]) <= 1e-16 and r["ratio"] == "" for r in rows(out))
    np.testing.assert_array_equal([r["failed"] for r in rows(out)], ["0", "0"])
