"""Message-passing solvers for y = A x + n.

Three step kernels share one loop driver:

* vector stepsize: per-element variances, couples through |A|^2 matvecs;
* scalar stepsize: |A|^2 collapsed to its average via the Frobenius norm,
  one variance scalar per side;
* transform domain: scalar variances on the estimate, per-element variances
  in the measurement domain, iterating on r = U^H y = Lam V x + w so the
  per-iteration cost is two unitary applies (FFTs in the circulant case).

All kernels are plain functions from (state, problem, prior) to
(state, scratch); the scratch carries every intermediate so tests and demos
can inspect a single step.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .denoisers import GaussianPrior
from .model import Factorization, LinearModel, TransformedModel, scaled_gram_diagonal, svd_factorize, unitary_transform

__all__ = [
    "ALGORITHMS",
    "SolverState",
    "StepScratch",
    "Trace",
    "vector_amp_step",
    "scalar_amp_step",
    "ut_amp_step",
    "initial_state",
    "run",
    "lmmse_solve",
]

ALGORITHMS = ("vector", "scalar", "utamp")


@dataclass(eq=False)
class SolverState:
    """x is the current estimate, tau_x its error variance (length-N vector
    for the vector kernel, scalar otherwise), s the dual variable carried
    across iterations, t the number of completed iterations."""

    x: np.ndarray
    tau_x: np.ndarray | float
    s: np.ndarray
    t: int = 0

    def tau_x_mean(self) -> float:
        return float(np.mean(self.tau_x))


@dataclass(eq=False)
class StepScratch:
    """Per-iteration intermediates, in computation order."""

    tau_p: np.ndarray | float
    p: np.ndarray
    tau_s: np.ndarray | float
    s: np.ndarray
    tau_q: np.ndarray | float
    q: np.ndarray


def _guarded_correction(x, tau_q, corr):
    # x + tau_q * corr with tau_q = inf treated as "no update" so that
    # inf * 0 never produces a nan
    tau_q_arr = np.asarray(tau_q, dtype=float)
    finite = np.isfinite(tau_q_arr)
    if tau_q_arr.ndim == 0:
        return x + float(tau_q_arr) * corr if finite else x + 0.0 * corr
    return x + np.where(finite, tau_q_arr, 0.0) * np.where(finite, corr, 0.0 * corr)


def vector_amp_step(state: SolverState, model: LinearModel, prior) -> tuple[SolverState, StepScratch]:
    """One iteration with per-element variances.

    Variance propagation uses |A|^2 as the coupling matrix in both
    directions; the pseudo-observation variance is the elementwise
    reciprocal of |A^H|^2 tau_s.
    """
    A = model.A
    tau_p = scaled_gram_diagonal(A, np.asarray(state.tau_x, dtype=float))
    p = A @ state.x - tau_p * state.s
    tau_s = 1.0 / (tau_p + model.sigma2)
    s = tau_s * (model.y - p)
    col = model.abs2.T @ tau_s
    with np.errstate(divide="ignore"):
        tau_q = np.where(col > 0, 1.0 / np.where(col > 0, col, 1.0), np.inf)
    q = _guarded_correction(state.x, tau_q, A.conj().T @ s)
    out = prior.denoise(q, tau_q)
    new = SolverState(x=out.mean, tau_x=out.var, s=s, t=state.t + 1)
    return new, StepScratch(tau_p=tau_p, p=p, tau_s=tau_s, s=s, tau_q=tau_q, q=q)


def scalar_amp_step(state: SolverState, model: LinearModel, prior) -> tuple[SolverState, StepScratch]:
    """One iteration with |A|^2 replaced by its mean: row sums become
    ||A||_F^2 / M, column sums ||A||_F^2 / N, making every stepsize a
    scalar."""
    A = model.A
    tau_x = float(np.mean(state.tau_x))
    tau_p = model.frob2 / model.M * tau_x
    p = A @ state.x - tau_p * state.s
    tau_s = 1.0 / (tau_p + model.sigma2)
    s = tau_s * (model.y - p)
    denom = model.frob2 / model.N * tau_s
    tau_q = 1.0 / denom if denom > 0 else np.inf
    q = _guarded_correction(state.x, tau_q, A.conj().T @ s)
    out = prior.denoise(q, tau_q)
    new = SolverState(x=out.mean, tau_x=out.var_scalar, s=s, t=state.t + 1)
    return new, StepScratch(tau_p=tau_p, p=p, tau_s=tau_s, s=s, tau_q=tau_q, q=q)


def ut_amp_step(state: SolverState, tmodel: TransformedModel, prior) -> tuple[SolverState, StepScratch]:
    """One transform-domain iteration.

    The estimate-side variance is a scalar, but the measurement-side
    variances stay per element: tau_p = tau_x * lam_p, where lam_p holds the
    squared singular values padded to length M.  The pseudo-observation
    variance is N / <lam_p, tau_s>.
    """
    fact = tmodel.fact
    tau_x = float(np.mean(state.tau_x))
    tau_p = tau_x * tmodel.lam_p
    p = fact.apply_av(state.x) - tau_p * state.s
    tau_s = 1.0 / (tau_p + tmodel.sigma2)
    s = tau_s * (tmodel.r - p)
    denom = float(np.dot(tmodel.lam_p, tau_s))
    tau_q = tmodel.N / denom if denom > 0 else np.inf
    q = _guarded_correction(state.x, tau_q, fact.apply_avh(s))
    out = prior.denoise(q, tau_q)
    new = SolverState(x=out.mean, tau_x=out.var_scalar, s=s, t=state.t + 1)
    return new, StepScratch(tau_p=tau_p, p=p, tau_s=tau_s, s=s, tau_q=tau_q, q=q)


@dataclass(eq=False)
class Trace:
    """Iteration history plus the final status.

    One record per recorded state: the initial state at t = 0 (tau_q and
    rel_change undefined there) and one per completed iteration.  status is
    "converged", "max_iters", or "diverged".
    """

    columns = ("t", "tau_x", "tau_q", "residual", "rel_change", "mse")

    records: list[dict] = field(default_factory=list)
    status: str = "max_iters"

    def append(self, **kw) -> None:
        self.records.append(kw)

    def last(self) -> dict:
        return self.records[-1]

    def column(self, name: str) -> list:
        return [r.get(name) for r in self.records]

    def to_csv_string(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for r in self.records:
            row = []
            for c in self.columns:
                v = r.get(c)
                if v is None:
                    row.append("")
                elif c == "t":
                    row.append(str(int(v)))
                else:
                    row.append(f"{v:.17g}")
            w.writerow(row)
        return buf.getvalue()

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_csv_string())


def initial_state(algorithm: str, n: int, m: int, prior, dtype=float) -> SolverState:
    """Prior-mean start: x = E[x], tau_x = Var[x] (per element or averaged),
    dual variable zero."""
    x = prior.mean_vector(n).astype(np.result_type(dtype, prior.mean_vector(1).dtype))
    var = prior.variance_vector(n)
    if algorithm == "vector":
        tau_x = var
    else:
        tau_x = float(np.mean(var))
    s = np.zeros(m, dtype=np.result_type(dtype, float))
    return SolverState(x=x, tau_x=tau_x, s=s, t=0)


def run(
    algorithm: str,
    model: LinearModel,
    prior,
    fact: Factorization | None = None,
    *,
    max_iters: int = 1000,
    x_tol: float = 1e-10,
    divergence_norm: float = 1e12,
) -> tuple[SolverState, Trace]:
    """Drive one of the three kernels to termination.

    Stops when the relative change of x drops to x_tol (converged), after
    max_iters iterations (max_iters), or when the estimate blows past
    divergence_norm or goes non-finite (diverged).  max_iters = 0 is valid
    and returns the initial state untouched.
    """
    if algorithm not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {algorithm!r}, expected one of {ALGORITHMS}")
    if max_iters < 0:
        raise ValueError(f"max_iters must be >= 0, got {max_iters}")
    if not x_tol > 0:
        raise ValueError(f"x_tol must be positive, got {x_tol}")

    if algorithm == "utamp":
        if fact is None:
            fact = svd_factorize(model.A)
        tmodel = unitary_transform(model, fact)
        problem = tmodel
        dtype = np.result_type(tmodel.r.dtype, float)
        step = ut_amp_step

        def residual(x):
            return float(np.linalg.norm(tmodel.r - fact.apply_av(x)))

    else:
        problem = model
        dtype = np.result_type(model.A.dtype, model.y.dtype)
        step = vector_amp_step if algorithm == "vector" else scalar_amp_step

        def residual(x):
            return float(np.linalg.norm(model.y - model.A @ x))

    state = initial_state(algorithm, model.N, model.M, prior, dtype=dtype)
    trace = Trace()

    def mse(x):
        if model.x_true is None:
            return None
        return float(np.mean(np.abs(x - model.x_true) ** 2))

    trace.append(
        t=0,
        tau_x=state.tau_x_mean(),
        tau_q=None,
        residual=residual(state.x),
        rel_change=None,
        mse=mse(state.x),
    )

    for _ in range(max_iters):
        prev_x = state.x
        state, scratch = step(state, problem, prior)
        norm = float(np.linalg.norm(state.x))
        rel = float(np.linalg.norm(state.x - prev_x)) / max(norm, 1e-300)
        tau_q_mean = float(np.mean(scratch.tau_q))
        trace.append(
            t=state.t,
            tau_x=state.tau_x_mean(),
            tau_q=tau_q_mean,
            residual=residual(state.x),
            rel_change=rel,
            mse=mse(state.x),
        )
        if not np.all(np.isfinite(state.x)) or norm > divergence_norm:
            trace.status = "diverged"
            return state, trace
        if rel <= x_tol:
            trace.status = "converged"
            return state, trace

    trace.status = "max_iters"
    return state, trace


def lmmse_solve(model: LinearModel, prior: GaussianPrior) -> np.ndarray:
    """Exact Gaussian posterior mean by dense linear solve.

    Solves (Diag(1/tau0) + A^H A / sigma2) x = A^H y / sigma2 + x0 / tau0,
    which is the stationarity condition of the Gaussian posterior and the
    fixed point the solvers should reach under a Gaussian prior.
    """
    if not isinstance(prior, GaussianPrior):
        raise TypeError("lmmse_solve needs a Gaussian prior")
    A, y, sigma2 = model.A, model.y, model.sigma2
    n = model.N
    tau0 = prior.variance_vector(n)
    x0 = prior.mean_vector(n)
    lhs = A.conj().T @ A / sigma2
    lhs[np.diag_indices(n)] += 1.0 / tau0
    rhs = A.conj().T @ y / sigma2 + x0 / tau0
    return np.linalg.solve(lhs, rhs)
