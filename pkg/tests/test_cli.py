import json

import numpy as np
import pytest

from flatdpp import ensembles, flatlimit, sampling
from flatdpp.cli import main
from flatdpp.geometry import uniform_points
from flatdpp.kernels import builtin_kernel


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_limit_fixed_size(capsys, tmp_path):
    out = tmp_path / "lim.json"
    code, _, err = run(capsys, "limit", "--gen", "uniform", "--n", "8", "--dim", "1",
                       "--seed", "42", "--kernel", "gaussian", "--m", "5",
                       "--out", str(out))
    assert code == 0
    assert "ProjectionSmooth(k=4)" in err
    obj = json.loads(out.read_text())
    assert obj["fixed_size"] == 5
    assert obj["metadata"]["bracket"] == [4, 5]


def test_limit_exponential_regime(capsys):
    code, out, err = run(capsys, "limit", "--gen", "uniform", "--n", "8",
                         "--kernel", "exponential", "--m", "5")
    assert code == 0
    assert "FiniteSmoothness(r=1)" in err
    assert json.loads(out)["regime"] == "FiniteSmoothness"


def test_limit_varying_fixed_pair(capsys):
    code, out, err = run(capsys, "limit", "--gen", "uniform", "--n", "6", "--dim", "1",
                         "--kernel", "gaussian", "--vary", "--p", "3", "--alpha", "1")
    assert code == 0
    assert json.loads(out)["fixed_size"] == 2


def test_limit_points_csv(capsys, tmp_path):
    pts = tmp_path / "pts.csv"
    pts.write_text("0.0\n0.25\n0.5\n0.75\n1.0\n")
    code, out, _ = run(capsys, "limit", "--points", str(pts), "--kernel",
                       "exponential", "--m", "3")
    assert code == 0
    assert json.loads(out)["nnp"]["n"] == 5


def test_unknown_kernel_is_domain_error(capsys):
    code, _, err = run(capsys, "limit", "--kernel", "nosuch", "--m", "3")
    assert code == 2
    assert "unknown kernel" in err


def test_missing_points_file_is_io_error(capsys):
    code, _, err = run(capsys, "limit", "--points", "/nonexistent/p.csv",
                       "--kernel", "gaussian", "--m", "3")
    assert code == 1


def test_oversized_m_is_domain_error(capsys):
    code, _, _ = run(capsys, "limit", "--gen", "uniform", "--n", "4",
                     "--kernel", "gaussian", "--m", "9")
    assert code == 2


def test_sample_round_trip_byte_identical(capsys, tmp_path):
    lim = tmp_path / "lim.json"
    run(capsys, "limit", "--gen", "uniform", "--n", "8", "--dim", "1", "--seed", "42",
        "--kernel", "gaussian", "--m", "5", "--out", str(lim))
    s1 = tmp_path / "s1.csv"
    s2 = tmp_path / "s2.csv"
    for path in (s1, s2):
        code, _, _ = run(capsys, "sample", "--ensemble", str(lim), "--samples", "40",
                         "--seed", "7", "--out", str(path))
        assert code == 0
    assert s1.read_bytes() == s2.read_bytes()

    # identical to in-process draws with the same seed
    res = flatlimit.fixed_size_limit(uniform_points(8, 1, 42),
                                     builtin_kernel("gaussian"), 5)
    rng = sampling.rng_from_seed(7)
    draws = [sampling.sample_fixed(res.process, 5, rng) for _ in range(40)]
    got = [line.split(",")[3] for line in s1.read_text().splitlines()[1:]]
    assert got == [";".join(str(i) for i in X) for X in draws]


def test_size_dist_round_trip(capsys, tmp_path):
    lim = tmp_path / "lim.json"
    run(capsys, "limit", "--gen", "uniform", "--n", "6", "--dim", "1", "--seed", "11",
        "--kernel", "exponential", "--vary", "--p", "1", "--out", str(lim))
    code, out, _ = run(capsys, "size-dist", "--ensemble", str(lim))
    assert code == 0
    rows = [line.split(",") for line in out.splitlines()[1:]]
    vec = np.array([float(v) for _, v in rows])
    obj = json.loads(lim.read_text())
    e = ensembles.nnp_from_dict(obj["nnp"])
    np.testing.assert_allclose(vec, ensembles.size_distribution(e), rtol=1e-12)


def test_size_dist_limit_and_eps_paths(capsys):
    code, out, _ = run(capsys, "size-dist", "--gen", "uniform", "--n", "5",
                       "--dim", "1", "--seed", "3", "--kernel", "exponential",
                       "--vary", "--p", "1")
    assert code == 0
    vec_lim = np.array([float(r.split(",")[1]) for r in out.splitlines()[1:]])
    code, out, _ = run(capsys, "size-dist", "--gen", "uniform", "--n", "5",
                       "--dim", "1", "--seed", "3", "--kernel", "exponential",
                       "--vary", "--p", "1", "--eps", "1e-3")
    assert code == 0
    vec_eps = np.array([float(r.split(",")[1]) for r in out.splitlines()[1:]])
    assert np.sum(np.abs(vec_lim - vec_eps)) <= 0.05


def test_cond_density_columns(capsys):
    code, out, _ = run(capsys, "cond-density", "--kernel", "exponential",
                       "--Y", "0.1,0.3,0.5,0.9", "--grid", "25",
                       "--eps", "4,0.5", "--limit")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "x,density_eps_4,density_eps_0.5,density_limit"
    assert len(lines) == 26
    cols = np.array([[float(v) for v in line.split(",")] for line in lines[1:]])
    np.testing.assert_allclose(cols[:, 1:].sum(axis=0), 1.0, atol=1e-9)


def test_inclusion_command(capsys):
    code, out, _ = run(capsys, "inclusion", "--gen", "uniform", "--n", "7",
                       "--dim", "1", "--seed", "5", "--kernel", "exponential",
                       "--m", "3", "--eps", "2.0", "--limit")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "point-index,inclusion_eps_2,inclusion_limit"
    cols = np.array([[float(v) for v in line.split(",")] for line in lines[1:]])
    np.testing.assert_allclose(cols[:, 1].sum(), 3.0, atol=1e-6)
    np.testing.assert_allclose(cols[:, 2].sum(), 3.0, atol=1e-6)


def test_converge_command(capsys):
    code, out, err = run(capsys, "converge", "--gen", "uniform", "--n", "6",
                         "--dim", "1", "--seed", "9", "--kernel", "gaussian",
                         "--mode", "full-law", "--m", "3", "--eps", "2,0.2,0.02")
    assert code == 0
    assert "target:" in err
    rows = [line.split(",") for line in out.splitlines()[1:]]
    tvs = [float(tv) for _, tv in rows]
    assert tvs[-1] <= tvs[0]


def test_oracle_command(capsys):
    code, out, _ = run(capsys, "oracle", "--n", "5", "--samples", "4000",
                       "--seed", "1")
    assert code == 0
    assert "varying-size sampler" in out and "fixed-size sampler" in out
    tvs = [float(tok.split("=")[1]) for line in out.splitlines()
           for tok in line.split() if tok.startswith("tv=")]
    assert all(tv <= 0.2 for tv in tvs)


def test_json_format_output(capsys):
    code, out, _ = run(capsys, "size-dist", "--gen", "uniform", "--n", "4",
                       "--dim", "1", "--seed", "2", "--kernel", "gaussian",
                       "--vary", "--p", "2", "--format", "json")
    assert code == 0
    obj = json.loads(out)
    assert obj["columns"] == ["m", "probability"]
    assert sum(v for _, v in obj["rows"]) == pytest.approx(1.0, abs=1e-10)


def test_psd_tol_override_accepted(capsys, tmp_path):
    lim = tmp_path / "lim.json"
    run(capsys, "limit", "--gen", "uniform", "--n", "5", "--dim", "1", "--seed", "4",
        "--kernel", "exponential", "--m", "3", "--out", str(lim))
    code, out, _ = run(capsys, "size-dist", "--ensemble", str(lim),
                       "--psd-tol", "1e-6")
    assert code == 0
    assert len(out.splitlines()) == 7


def test_outputs_deterministic(capsys):
    args = ("inclusion", "--gen", "uniform", "--n", "6", "--dim", "1",
            "--seed", "5", "--kernel", "gaussian", "--m", "2", "--eps", "1.0")
    _, out1, _ = run(capsys, *args)
    _, out2, _ = run(capsys, *args)
    assert out1 == out2
