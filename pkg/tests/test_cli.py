import csv
import json

import numpy as np
import pytest

from utamp import load_matrix, save_matrix, save_vector, generate_matrix, EnsembleSpec
from utamp.cli import main, parse_ensemble, parse_prior, CliError
from utamp.denoisers import BernoulliGaussianPrior, GaussianPrior


# ------------------------------------------------------------- parsing


def test_parse_prior_forms():
    g = parse_prior("gauss")
    assert isinstance(g, GaussianPrior)
    g2 = parse_prior("gauss:mean=1.5,var=0.25")
    assert np.isclose(g2.x0, 1.5) and np.isclose(g2.tau0, 0.25)
    bg = parse_prior("bg:rho=0.2,mu=0.3,v=2.0")
    assert isinstance(bg, BernoulliGaussianPrior)
    assert bg.rho == 0.2 and bg.mu == 0.3 and bg.v == 2.0
    for bad in ["laplace", "bg", "bg:rho=2", "gauss:scale=1", "gauss:var=oops"]:
        with pytest.raises(CliError):
            parse_prior(bad)


def test_parse_ensemble_forms():
    spec = parse_ensemble(["ill_conditioned", "20", "10", "kappa=1e3", "seed=4"])
    assert spec.kind == "ill_conditioned" and spec.M == 20 and spec.N == 10
    assert spec.condition_number == 1e3 and spec.seed == 4
    spec2 = parse_ensemble(["circulant", "4", "4", "taps=2,1,0,1"])
    assert np.array_equal(spec2.taps, [2.0, 1.0, 0.0, 1.0])
    for bad in [["iid_gaussian"], ["mystery", "4", "4"], ["iid_gaussian", "a", "4"],
                ["iid_gaussian", "4", "4", "flavor=hot"], ["iid_gaussian", "4", "4", "seed"]]:
        with pytest.raises(CliError):
            parse_ensemble(bad)


# ------------------------------------------------------------- gen


def test_gen_writes_loadable_matrix(tmp_path, capsys):
    out = tmp_path / "A.txt"
    code = main(["gen", "ill_conditioned", "16", "12", "kappa=100", "seed=2", "--out", str(out)])
    assert code == 0
    msg = capsys.readouterr().out
    assert "16 x 12" in msg and "condition number" in msg
    A = load_matrix(out)
    assert A.shape == (16, 12)
    s = np.linalg.svd(A, compute_uv=False)
    assert np.isclose(s[0] / s[-1], 100.0, rtol=1e-6)


def test_gen_matches_library_generation(tmp_path):
    out = tmp_path / "A.txt"
    main(["gen", "iid_gaussian", "8", "6", "seed=3", "--out", str(out)])
    want = generate_matrix(EnsembleSpec(kind="iid_gaussian", M=8, N=6, seed=3))
    assert np.allclose(load_matrix(out), want, atol=1e-15)


# ------------------------------------------------------------- solve


def test_solve_ensemble_writes_traces(tmp_path, capsys):
    code = main([
        "solve", "iid_gaussian", "30", "20", "seed=1",
        "--sigma2", "0.05", "--algorithms", "all", "--out", str(tmp_path / "tr"),
    ])
    assert code == 0
    out = capsys.readouterr().out
    assert "utamp" in out and "amp-vec" in out and "amp-scalar" in out
    for name in ["utamp", "amp-vec", "amp-scalar"]:
        path = tmp_path / "tr" / f"trace_{name}.csv"
        assert path.exists(), name
        rows = list(csv.reader(path.open()))
        assert rows[0] == ["t", "tau_x", "tau_q", "residual", "rel_change", "mse"]
        assert len(rows) > 2


def test_solve_matrix_file_with_observations(tmp_path, capsys):
    rng = np.random.default_rng(0)
    A = rng.standard_normal((10, 6)) / 3.0
    y = rng.standard_normal(10)
    save_matrix(tmp_path / "A.txt", A)
    save_vector(tmp_path / "y.txt", y)
    code = main([
        "solve", "--matrix", str(tmp_path / "A.txt"), "--observations", str(tmp_path / "y.txt"),
        "--sigma2", "0.1", "--algorithms", "utamp", "--out", str(tmp_path / "tr"),
    ])
    assert code == 0
    out = capsys.readouterr().out
    assert "file:" in out
    rows = list(csv.reader((tmp_path / "tr" / "trace_utamp.csv").open()))
    assert all(row[5] == "" for row in rows[1:]), "mse column must stay empty without ground truth"


def test_solve_exit_two_when_everything_diverges(tmp_path):
    code = main([
        "solve", "nonzero_mean", "30", "20", "--sigma2", "0.01",
        "--algorithms", "amp-vec,amp-scalar", "--max-iters", "100",
    ])
    assert code == 2


def test_solve_circulant_uses_fft_route(capsys):
    code = main(["solve", "circulant", "32", "32", "seed=5", "--sigma2", "0.05", "--algorithms", "utamp"])
    assert code == 0


def test_solve_dft_on_noncirculant_fails(tmp_path, capsys):
    rng = np.random.default_rng(1)
    save_matrix(tmp_path / "A.txt", rng.standard_normal((6, 6)))
    code = main([
        "solve", "--matrix", str(tmp_path / "A.txt"), "--factorization", "dft", "--algorithms", "utamp",
    ])
    assert code == 1
    assert "circulant" in capsys.readouterr().err


def test_solve_input_errors(tmp_path, capsys):
    assert main(["solve", "--matrix", str(tmp_path / "missing.txt")]) == 1
    assert main(["solve"]) == 1
    assert main(["solve", "iid_gaussian", "8", "8", "--algorithms", "sorcery"]) == 1
    assert main(["solve", "iid_gaussian", "8", "8", "--matrix", "x.txt"]) == 1
    capsys.readouterr()


def test_solve_bg_prior(capsys):
    code = main([
        "solve", "iid_gaussian", "60", "100", "seed=2", "--prior", "bg:rho=0.1",
        "--sigma2", "1e-4", "--algorithms", "utamp",
    ])
    assert code == 0
    assert "converged" in capsys.readouterr().out


# ------------------------------------------------------------- certify


def test_certify_prints_report(tmp_path, capsys):
    out = tmp_path / "report.txt"
    code = main(["certify", "ill_conditioned", "12", "9", "kappa=1e4", "--sigma2", "0.02",
                 "--check-numeric", "--out", str(out)])
    assert code == 0
    text = capsys.readouterr().out
    assert "spectral radius" in text and "verdict: converges" in text
    assert "discrepancy" in text
    assert out.read_text().strip() in text


def test_certify_matrix_file(tmp_path, capsys):
    A = generate_matrix(EnsembleSpec(kind="iid_gaussian", M=8, N=8, seed=1))
    save_matrix(tmp_path / "A.txt", A)
    assert main(["certify", "--matrix", str(tmp_path / "A.txt"), "--sigma2", "0.1"]) == 0
    capsys.readouterr()


def test_certify_rejects_bg_prior(capsys):
    assert main(["certify", "iid_gaussian", "8", "8", "--prior", "bg:rho=0.5"]) == 1
    assert "Gaussian" in capsys.readouterr().err


# ------------------------------------------------------------- compare


def test_compare_writes_summary(tmp_path, capsys):
    code = main([
        "compare", "ill_conditioned", "24", "18", "kappa=1e4", "seed=3",
        "--sigma2", "0.05", "--out", str(tmp_path),
    ])
    assert code == 0
    out = capsys.readouterr().out
    assert "certificate" in out, "gaussian-prior comparison must include the certificate"
    path = tmp_path / "compare.csv"
    rows = list(csv.DictReader(path.open()))
    assert {r["algorithm"] for r in rows} == {"utamp", "amp-vec", "amp-scalar"}
    ut = next(r for r in rows if r["algorithm"] == "utamp")
    assert ut["status"] == "converged"
    assert float(ut["lmmse_gap"]) < 1e-6


def test_compare_needs_two_algorithms(capsys):
    assert main(["compare", "iid_gaussian", "8", "8", "--algorithms", "utamp"]) == 1
    capsys.readouterr()


def test_compare_exit_two_when_all_diverge(capsys):
    code = main([
        "compare", "nonzero_mean", "30", "20", "--sigma2", "0.01",
        "--algorithms", "amp-vec,amp-scalar", "--max-iters", "80",
    ])
    assert code == 2
    capsys.readouterr()


# ------------------------------------------------------------- misc


def test_config_file_supplies_defaults(tmp_path, capsys):
    conf = tmp_path / "conf.json"
    conf.write_text(json.dumps({"sigma2": 0.5, "max_iters": 5}))
    code = main(["solve", "iid_gaussian", "10", "8", "--config", str(conf), "--algorithms", "utamp"])
    assert code == 0
    out = capsys.readouterr().out
    assert "sigma2 = 0.5" in out
    assert "max_iters" in out  # capped run reports max_iters status


def test_config_flag_is_overridden_by_cli(tmp_path, capsys):
    conf = tmp_path / "conf.json"
    conf.write_text(json.dumps({"sigma2": 0.5}))
    main(["solve", "iid_gaussian", "10", "8", "--config", str(conf), "--sigma2", "0.125",
          "--algorithms", "utamp"])
    assert "sigma2 = 0.125" in capsys.readouterr().out


def test_config_errors(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["solve", "iid_gaussian", "8", "8", "--config", str(bad)]) == 1
    bad2 = tmp_path / "list.json"
    bad2.write_text("[1, 2]")
    assert main(["solve", "iid_gaussian", "8", "8", "--config", str(bad2)]) == 1
    capsys.readouterr()


def test_usage_errors_exit_one():
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 1
    with pytest.raises(SystemExit) as exc2:
        main(["gen", "iid_gaussian", "4", "4"])  # missing --out
    assert exc2.value.code == 1
