"""Command-line harness.

Subcommands:

* gen      draw a matrix from a named ensemble and write it to a text file
* solve    run one or more solvers on an instance, write iteration traces
* certify  print the transform-domain convergence certificate for a matrix
* compare  run several solvers on one instance and tabulate the outcomes

Problems come either from a matrix file (--matrix, optionally --observations
for a measured y) or from an ensemble description given as positional tokens,
e.g. ``ill_conditioned 80 60 kappa=1e4 seed=3``.  Exit codes: 0 on success,
1 on invalid input or usage, 2 when no requested solver converged (solve,
compare) or the certificate is not contractive (certify).
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from pathlib import Path

import numpy as np

from .denoisers import BernoulliGaussianPrior, GaussianPrior
from .ensembles import ENSEMBLE_KINDS, EnsembleSpec, generate_matrix, synthesize_instance
from .matrixio import load_matrix, load_vector, save_matrix
from .model import FactorizationError, LinearModel, circulant_factorize, svd_factorize
from .solvers import lmmse_solve, run
from .spectral import UnsupportedPriorError, certify

__all__ = ["main", "console_main", "build_parser"]

# CLI algorithm names -> library kernel names
_ALGO_NAMES = {"amp-vec": "vector", "amp-scalar": "scalar", "utamp": "utamp"}


class _Parser(argparse.ArgumentParser):
    # invalid usage exits 1, not argparse's default 2
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


class CliError(Exception):
    """Input problems discovered after argument parsing."""


def _parse_kv(token: str, context: str) -> tuple[str, str]:
    if "=" not in token:
        raise CliError(f"{context}: expected key=value, got {token!r}")
    key, _, value = token.partition("=")
    return key.strip(), value.strip()


def parse_prior(text: str):
    """'gauss[:mean=0,var=1]' or 'bg:rho=0.1[,mu=0,v=1]'."""
    name, _, params = text.partition(":")
    name = name.strip().lower()
    kv = {}
    if params:
        for tok in params.split(","):
            k, v = _parse_kv(tok, f"prior {text!r}")
            kv[k] = v
    try:
        if name in ("gauss", "gaussian"):
            allowed = {"mean", "var"}
            extra = set(kv) - allowed
            if extra:
                raise CliError(f"unknown gaussian prior parameters: {sorted(extra)}")
            return GaussianPrior(x0=float(kv.get("mean", 0.0)), tau0=float(kv.get("var", 1.0)))
        if name in ("bg", "bernoulli-gaussian"):
            allowed = {"rho", "mu", "v"}
            extra = set(kv) - allowed
            if extra:
                raise CliError(f"unknown bernoulli-gaussian prior parameters: {sorted(extra)}")
            if "rho" not in kv:
                raise CliError("bernoulli-gaussian prior needs rho, e.g. bg:rho=0.1")
            return BernoulliGaussianPrior(
                rho=float(kv["rho"]), mu=float(kv.get("mu", 0.0)), v=float(kv.get("v", 1.0))
            )
    except ValueError as exc:
        raise CliError(f"bad prior {text!r}: {exc}") from None
    raise CliError(f"unknown prior {name!r}, expected 'gauss' or 'bg'")


_ENSEMBLE_ALIASES = {
    "kappa": "condition_number",
    "condition_number": "condition_number",
    "rank": "rank",
    "r": "rank",
    "rho_c": "correlation",
    "correlation": "correlation",
    "mean_shift": "mean_shift",
    "mu_a": "mean_shift",
    "seed": "seed",
    "taps": "taps",
}


def parse_ensemble(tokens: list[str]) -> EnsembleSpec:
    """Positional form: KIND M N [key=value ...]."""
    if len(tokens) < 3:
        raise CliError("ensemble description needs at least: KIND M N")
    kind = tokens[0]
    if kind not in ENSEMBLE_KINDS:
        raise CliError(f"unknown ensemble kind {kind!r}, expected one of {ENSEMBLE_KINDS}")
    try:
        m, n = int(tokens[1]), int(tokens[2])
    except ValueError:
        raise CliError(f"M and N must be integers, got {tokens[1]!r} {tokens[2]!r}") from None
    kw: dict = {}
    for tok in tokens[3:]:
        key, value = _parse_kv(tok, "ensemble option")
        if key not in _ENSEMBLE_ALIASES:
            raise CliError(f"unknown ensemble option {key!r}")
        field = _ENSEMBLE_ALIASES[key]
        try:
            if field == "seed" or field == "rank":
                kw[field] = int(value)
            elif field == "taps":
                kw[field] = np.array([float(v) for v in value.split(",")])
            else:
                kw[field] = float(value)
        except ValueError:
            raise CliError(f"bad value for {key}: {value!r}") from None
    try:
        return EnsembleSpec(kind=kind, M=m, N=n, **kw)
    except ValueError as exc:
        raise CliError(str(exc)) from None


def _is_circulant(A: np.ndarray) -> bool:
    if A.shape[0] != A.shape[1]:
        return False
    n = A.shape[0]
    idx = (np.arange(n)[:, None] - np.arange(n)[None, :]) % n
    return bool(np.allclose(A, A[:, 0][idx], rtol=1e-10, atol=1e-12))


def _resolve_problem(args, prior):
    """Build (model, fact, kind_label) from either --matrix or ensemble tokens."""
    circulant_known = False
    if args.matrix is not None:
        if args.ensemble:
            raise CliError("give either --matrix or an ensemble description, not both")
        A = load_matrix(args.matrix)
        label = f"file:{args.matrix}"
        circulant_known = bool(getattr(args, "circulant", False))
    else:
        if not args.ensemble:
            raise CliError("need a problem: either --matrix FILE or an ensemble description (KIND M N ...)")
        spec = parse_ensemble(args.ensemble)
        A = generate_matrix(spec)
        label = spec.kind
        circulant_known = spec.kind == "circulant"

    if np.iscomplexobj(A):
        prior.complex_valued = True

    y = None
    x_true = None
    if getattr(args, "observations", None):
        y = load_vector(args.observations)
        if y.shape[0] != A.shape[0]:
            raise CliError(f"observations have length {y.shape[0]}, matrix has {A.shape[0]} rows")
        model = LinearModel(A=A, y=y, sigma2=args.sigma2, x_true=None)
    else:
        model = synthesize_instance(A, prior, sigma2=args.sigma2, seed=args.seed)

    choice = getattr(args, "factorization", "auto")
    if choice == "auto":
        choice = "dft" if circulant_known and _is_circulant(A) else "svd"
    if choice == "dft":
        if not _is_circulant(A):
            raise CliError("--factorization dft needs a circulant matrix (first column must generate it)")
        fact = circulant_factorize(A[:, 0])
    else:
        fact = svd_factorize(A)
    return model, fact, label


def _parse_algorithms(text: str) -> list[str]:
    names = [t.strip() for t in text.split(",") if t.strip()]
    if not names:
        raise CliError("empty algorithm list")
    if names == ["all"]:
        names = list(_ALGO_NAMES)
    out = []
    for name in names:
        if name not in _ALGO_NAMES:
            raise CliError(f"unknown algorithm {name!r}, expected one of {sorted(_ALGO_NAMES)} or 'all'")
        if name not in out:
            out.append(name)
    return out


def _nmse_db(x, x_true):
    if x_true is None:
        return None
    num = float(np.sum(np.abs(x - x_true) ** 2))
    den = float(np.sum(np.abs(x_true) ** 2))
    if den == 0:
        return None
    return 10.0 * np.log10(max(num / den, 1e-300))


def _run_algorithms(model, fact, prior, names, args, out_dir):
    xstar = lmmse_solve(model, prior) if isinstance(prior, GaussianPrior) else None
    rows = []
    for name in names:
        kernel = _ALGO_NAMES[name]
        t0 = time.perf_counter()
        state, trace = run(
            kernel,
            model,
            prior,
            fact=fact if kernel == "utamp" else None,
            max_iters=args.max_iters,
            x_tol=args.x_tol,
        )
        elapsed = time.perf_counter() - t0
        finite = bool(np.all(np.isfinite(state.x)))
        row = {
            "algorithm": name,
            "status": trace.status,
            "iterations": state.t,
            "residual": trace.last()["residual"],
            "nmse_db": _nmse_db(state.x, model.x_true) if finite else None,
            "lmmse_gap": float(np.max(np.abs(state.x - xstar))) if (xstar is not None and finite) else None,
            "seconds": elapsed,
        }
        rows.append(row)
        if out_dir is not None:
            trace.to_csv(out_dir / f"trace_{name}.csv")
    return rows


def _print_rows(rows):
    def fmt(v, spec=".3e"):
        return "-" if v is None else f"{v:{spec}}"

    header = f"{'algorithm':<12} {'status':<10} {'iters':>6} {'residual':>11} {'nmse_db':>9} {'lmmse_gap':>11} {'seconds':>8}"
    print(header)
    for r in rows:
        print(
            f"{r['algorithm']:<12} {r['status']:<10} {r['iterations']:>6d} "
            f"{fmt(r['residual']):>11} {fmt(r['nmse_db'], '.1f'):>9} "
            f"{fmt(r['lmmse_gap']):>11} {r['seconds']:>8.3f}"
        )


def cmd_gen(args) -> int:
    spec = parse_ensemble(args.ensemble)
    A = generate_matrix(spec)
    save_matrix(args.out, A)
    s = np.linalg.svd(A, compute_uv=False)
    tol = s.max() * max(A.shape) * np.finfo(float).eps if s.size else 0.0
    rank = int(np.sum(s > tol))
    cond = s[0] / s[rank - 1] if rank else np.inf
    print(f"wrote {A.shape[0]} x {A.shape[1]} {spec.kind} matrix to {args.out}")
    print(f"  seed {spec.seed}, rank {rank}, condition number {cond:.6g}")
    return 0


def cmd_solve(args) -> int:
    prior = parse_prior(args.prior)
    model, fact, label = _resolve_problem(args, prior)
    out_dir = None
    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
    names = _parse_algorithms(args.algorithms)
    print(f"problem: {label}, {model.M} x {model.N}, sigma2 = {model.sigma2:.6g}")
    rows = _run_algorithms(model, fact, prior, names, args, out_dir)
    _print_rows(rows)
    if out_dir is not None:
        print(f"traces written to {out_dir}")
    if all(r["status"] == "diverged" for r in rows):
        return 2
    return 0


def cmd_certify(args) -> int:
    prior = parse_prior(args.prior)
    if not isinstance(prior, GaussianPrior):
        raise CliError("certification needs a Gaussian prior (--prior gauss[:mean=..,var=..])")
    if args.matrix is not None:
        if args.ensemble:
            raise CliError("give either --matrix or an ensemble description, not both")
        A = load_matrix(args.matrix)
    else:
        if not args.ensemble:
            raise CliError("need a matrix: either --matrix FILE or an ensemble description")
        A = generate_matrix(parse_ensemble(args.ensemble))
    cert = certify(A, prior, sigma2=args.sigma2, check_numeric=args.check_numeric)
    report = cert.report()
    print(report)
    if args.out:
        Path(args.out).write_text(report + "\n")
    return 0 if cert.converges else 2


def cmd_compare(args) -> int:
    names = _parse_algorithms(args.algorithms)
    if len(names) < 2:
        raise CliError("compare needs at least two algorithms")
    prior = parse_prior(args.prior)
    model, fact, label = _resolve_problem(args, prior)
    out_dir = None
    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
    print(f"problem: {label}, {model.M} x {model.N}, sigma2 = {model.sigma2:.6g}")
    rows = _run_algorithms(model, fact, prior, names, args, out_dir)
    _print_rows(rows)
    if isinstance(prior, GaussianPrior) and "utamp" in names:
        cert = certify(model.A, prior, sigma2=model.sigma2)
        print(
            f"certificate: spectral radius {cert.spectral_radius:.6g} "
            f"({'contractive' if cert.converges else 'NOT contractive'})"
        )
    if out_dir is not None:
        path = out_dir / "compare.csv"
        with open(path, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
            w.writeheader()
            for r in rows:
                w.writerow({k: ("" if v is None else v) for k, v in r.items()})
        print(f"summary written to {path}")
    if all(r["status"] == "diverged" for r in rows):
        return 2
    return 0


def _add_problem_arguments(p, with_solver_options):
    p.add_argument("ensemble", nargs="*", metavar="ENSEMBLE",
                   help="ensemble description: KIND M N [key=value ...]")
    p.add_argument("--matrix", help="read the matrix from this text file instead")
    p.add_argument("--sigma2", type=float, default=0.01, help="noise variance (default 0.01)")
    p.add_argument("--prior", default="gauss",
                   help="prior: gauss[:mean=..,var=..] or bg:rho=..[,mu=..,v=..] (default gauss)")
    if with_solver_options:
        p.add_argument("--observations", help="read y from this vector file (skips synthesis)")
        p.add_argument("--seed", type=int, default=0, help="seed for signal and noise synthesis")
        p.add_argument("--factorization", choices=("auto", "svd", "dft"), default="auto",
                       help="transform used by utamp (auto picks dft for circulant inputs)")
        p.add_argument("--circulant", action="store_true",
                       help="treat the --matrix file as circulant (enables the FFT path)")
        p.add_argument("--max-iters", type=int, default=1000)
        p.add_argument("--x-tol", type=float, default=1e-10)
        p.add_argument("--out", help="directory for iteration trace CSV files")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="utamp", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--config", help="JSON file with default option values")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_gen = sub.add_parser("gen", help="generate a test matrix and write it to a file")
    p_gen.add_argument("ensemble", nargs="+", metavar="ENSEMBLE", help="KIND M N [key=value ...]")
    p_gen.add_argument("--out", required=True, help="output matrix file")

    p_solve = sub.add_parser("solve", help="run solvers on one instance")
    _add_problem_arguments(p_solve, with_solver_options=True)
    p_solve.add_argument("--algorithms", default="utamp",
                         help="comma-separated subset of utamp,amp-vec,amp-scalar or 'all' (default utamp)")

    p_cert = sub.add_parser("certify", help="print the convergence certificate for a matrix")
    _add_problem_arguments(p_cert, with_solver_options=False)
    p_cert.add_argument("--check-numeric", action="store_true",
                        help="cross-check closed-form eigenvalues against a dense eigendecomposition")
    p_cert.add_argument("--out", help="also write the report to this file")

    p_cmp = sub.add_parser("compare", help="run several solvers on the same instance")
    _add_problem_arguments(p_cmp, with_solver_options=True)
    p_cmp.add_argument("--algorithms", default="all",
                       help="comma-separated list, at least two (default all)")

    for sp in (p_gen, p_solve, p_cert, p_cmp):
        sp.add_argument("--config", help="JSON file with default option values")
    return parser


def _apply_config(parser, argv):
    # --config JSON supplies defaults; explicit flags still win
    if argv and "--config" in argv:
        i = argv.index("--config")
        if i + 1 >= len(argv):
            raise CliError("--config needs a file path")
        path = argv[i + 1]
        try:
            with open(path) as fh:
                values = json.load(fh)
        except OSError as exc:
            raise CliError(f"cannot read config {path}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise CliError(f"config {path} is not valid JSON: {exc}") from None
        if not isinstance(values, dict):
            raise CliError(f"config {path} must hold a JSON object")
        for sp in parser._subparsers._group_actions[0].choices.values():
            known = {a.dest for a in sp._actions}
            sp.set_defaults(**{k: v for k, v in values.items() if k in known})


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
        args = parser.parse_args(argv)
        handler = {"gen": cmd_gen, "solve": cmd_solve, "certify": cmd_certify, "compare": cmd_compare}[args.command]
        return handler(args)
    except (CliError, FactorizationError, UnsupportedPriorError, ValueError, OSError) as exc:
        print(f"utamp: error: {exc}", file=sys.stderr)
        return 1


def console_main() -> None:
    raise SystemExit(main())
