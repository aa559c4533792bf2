"""Convergence certification for the transform-domain solver.

Under a Gaussian prior the stepsize recursion decouples from the estimates,
so it can be run to its fixed point (tau_x, tau_q) ahead of time.  Freezing
the stepsizes there makes one solver iteration an affine map of the stacked
state (s, x); its iteration matrix has closed-form eigenvalues driven by two
ingredients:

  beta_i = tau_x |lam_i|^2 / (tau_x |lam_i|^2 + sigma2)   per singular value,
  alpha  = mean of the beta_i padded with zeros to length N.

Each singular direction contributes the two roots of
eta^2 - alpha * eta + alpha * beta_i; leftover measurement directions
contribute zeros and leftover estimate directions contribute alpha.  The
certificate reports the spectral radius and whether it is below one, which
holds for every matrix since alpha * beta_i < 1; the API still checks rather
than asserts so the numeric cross-check stays meaningful.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .denoisers import GaussianPrior
from .model import Factorization, LinearModel, svd_factorize

__all__ = [
    "UnsupportedPriorError",
    "VarianceFixedPoint",
    "SpectralCoefficients",
    "ConvergenceCertificate",
    "variance_fixed_point",
    "spectral_coefficients",
    "closed_form_eigenvalues",
    "numeric_iteration_matrix",
    "eigenvalue_discrepancy",
    "certify",
]


class UnsupportedPriorError(TypeError):
    """The certification analysis only covers Gaussian priors."""


@dataclass(eq=False)
class VarianceFixedPoint:
    """Limit of the stepsize recursion.  tau_q is +inf when the matrix is
    identically zero (no information ever flows back)."""

    tau_x: float
    tau_q: float
    iterations: int
    converged: bool


@dataclass(eq=False)
class SpectralCoefficients:
    """alpha and the per-singular-value betas (length min(M, N))."""

    alpha: float
    betas: np.ndarray
    shape: tuple[int, int]
    tau_x: float
    sigma2: float

    @property
    def M(self) -> int:
        return self.shape[0]

    @property
    def N(self) -> int:
        return self.shape[1]


@dataclass(eq=False)
class ConvergenceCertificate:
    fixed_point: VarianceFixedPoint
    coefficients: SpectralCoefficients
    eigenvalues: np.ndarray
    spectral_radius: float
    converges: bool
    case: str
    numeric_discrepancy: float | None = None

    def report(self) -> str:
        c = self.coefficients
        m, n = c.shape
        lines = [
            "transform-domain convergence certificate",
            f"  shape: {m} x {n} ({self.case})",
            f"  noise variance: {c.sigma2:.6g}",
            f"  stepsize fixed point: tau_x = {self.fixed_point.tau_x:.6g}, "
            f"tau_q = {self.fixed_point.tau_q:.6g} "
            f"({self.fixed_point.iterations} iterations)",
            f"  alpha = {c.alpha:.6g}",
            f"  spectral radius = {self.spectral_radius:.6g} "
            f"({self.eigenvalues.size} closed-form eigenvalues)",
        ]
        if self.numeric_discrepancy is not None:
            lines.append(f"  numeric cross-check: max eigenvalue discrepancy {self.numeric_discrepancy:.3g}")
        verdict = "converges (spectral radius < 1)" if self.converges else "NOT certified (spectral radius >= 1)"
        lines.append(f"  verdict: {verdict}")
        return "\n".join(lines)


def variance_fixed_point(
    lam,
    sigma2: float,
    prior: GaussianPrior,
    shape: tuple[int, int],
    tol: float = 1e-14,
    max_iters: int = 100000,
) -> VarianceFixedPoint:
    """Iterate the stepsize recursion to convergence.

    tau_q = N / sum_i |lam_i|^2 / (tau_x |lam_i|^2 + sigma2), then tau_x is
    the average of the per-element Gaussian posterior variances
    tau0_i tau_q / (tau0_i + tau_q).  Monotone and bounded, so it converges
    for any spectrum; tol is on the relative change of tau_x.
    """
    if not isinstance(prior, GaussianPrior):
        raise UnsupportedPriorError(f"need a Gaussian prior, got {type(prior).__name__}")
    m, n = shape
    lam2 = np.abs(np.asarray(lam)) ** 2
    if lam2.size != min(m, n):
        raise ValueError(f"expected {min(m, n)} singular values for shape {shape}, got {lam2.size}")
    if not sigma2 > 0:
        raise ValueError(f"sigma2 must be positive, got {sigma2}")
    tau0 = prior.variance_vector(n)
    tau_x = float(np.mean(tau0))

    if not np.any(lam2 > 0):
        return VarianceFixedPoint(tau_x=tau_x, tau_q=np.inf, iterations=0, converged=True)

    for it in range(1, max_iters + 1):
        inv_tau_q = float(np.sum(lam2 / (tau_x * lam2 + sigma2))) / n
        tau_q = 1.0 / inv_tau_q
        tau_x_next = float(np.mean(tau0 * tau_q / (tau0 + tau_q)))
        done = abs(tau_x_next - tau_x) <= tol * max(tau_x, 1e-300)
        tau_x = tau_x_next
        if done:
            return VarianceFixedPoint(tau_x=tau_x, tau_q=tau_q, iterations=it, converged=True)
    return VarianceFixedPoint(tau_x=tau_x, tau_q=tau_q, iterations=max_iters, converged=False)


def spectral_coefficients(
    fp: VarianceFixedPoint, lam, sigma2: float, shape: tuple[int, int]
) -> SpectralCoefficients:
    """beta_i per singular value and their zero-padded mean alpha."""
    m, n = shape
    lam2 = np.abs(np.asarray(lam)) ** 2
    if lam2.size != min(m, n):
        raise ValueError(f"expected {min(m, n)} singular values for shape {shape}, got {lam2.size}")
    betas = fp.tau_x * lam2 / (fp.tau_x * lam2 + sigma2)
    alpha = float(np.sum(betas)) / n
    return SpectralCoefficients(alpha=alpha, betas=betas, shape=(m, n), tau_x=fp.tau_x, sigma2=float(sigma2))


def closed_form_eigenvalues(coeff: SpectralCoefficients) -> np.ndarray:
    """All M + N eigenvalues of the frozen-stepsize iteration matrix.

    Per singular value the quadratic eta^2 - alpha*eta + alpha*beta_i has
    roots (alpha +- sqrt(alpha^2 - 4*alpha*beta_i)) / 2; a negative
    discriminant yields a conjugate pair of modulus sqrt(alpha * beta_i).
    Measurement directions beyond the rank contribute eigenvalue 0,
    estimate directions beyond the rank contribute alpha.
    """
    m, n = coeff.shape
    k = min(m, n)
    alpha = coeff.alpha
    disc = np.asarray(alpha * alpha - 4.0 * alpha * coeff.betas, dtype=complex)
    root = np.sqrt(disc)
    pairs = np.concatenate([(alpha + root) / 2.0, (alpha - root) / 2.0])
    extras = np.concatenate([np.zeros(m - k, dtype=complex), np.full(n - k, alpha, dtype=complex)])
    return np.concatenate([pairs, extras])


def numeric_iteration_matrix(
    fact: Factorization, coeff: SpectralCoefficients
) -> np.ndarray:
    """Densify the frozen-stepsize iteration matrix on the stacked (s, x)
    state and return it; eigendecomposing it is the independent check on
    the closed form.

    With D = (tau_x Lam Lam^H + sigma2 I)^{-1} the blocks are

        [ tau_x D Lam Lam^H              -D Lam V                      ]
        [ tau_x^2 V^H Lam^H D Lam Lam^H   alpha I - tau_x V^H Lam^H D Lam V ]
    """
    m, n = fact.shape
    k = min(m, n)
    tau_x, sigma2, alpha = coeff.tau_x, coeff.sigma2, coeff.alpha

    lam_p = np.zeros(m)
    lam_p[:k] = np.abs(fact.lam) ** 2
    d = 1.0 / (tau_x * lam_p + sigma2)

    v = fact.V
    lv = np.zeros((m, n), dtype=np.result_type(fact.lam, v))
    lv[:k] = fact.lam[:, None] * v[:k]

    c_a = np.diag(tau_x * d * lam_p).astype(lv.dtype)
    c_b = -d[:, None] * lv
    c_c = tau_x**2 * (lv.conj().T * (d * lam_p)[None, :])
    c_d = alpha * np.eye(n, dtype=lv.dtype) - tau_x * (lv.conj().T @ (d[:, None] * lv))
    return np.block([[c_a, c_b], [c_c, c_d]])


def eigenvalue_discrepancy(a, b) -> float:
    """Max absolute difference under the optimal one-to-one matching of two
    eigenvalue multisets (they come in arbitrary order)."""
    a = np.asarray(a, dtype=complex).ravel()
    b = np.asarray(b, dtype=complex).ravel()
    if a.size != b.size:
        raise ValueError(f"eigenvalue counts differ: {a.size} vs {b.size}")
    cost = np.abs(a[:, None] - b[None, :])
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].max())


def _case(m: int, n: int) -> str:
    if m == n:
        return "square"
    return "tall" if m > n else "wide"


def certify(
    target,
    prior: GaussianPrior,
    sigma2: float | None = None,
    check_numeric: bool = False,
) -> ConvergenceCertificate:
    """Build the convergence certificate for a matrix.

    target may be a model (its noise variance is used unless sigma2
    overrides it), a factorization, or a raw matrix; the latter two require
    sigma2.  check_numeric additionally eigendecomposes the dense iteration
    matrix and records the worst matched eigenvalue discrepancy.
    """
    if not isinstance(prior, GaussianPrior):
        raise UnsupportedPriorError(
            f"certification covers Gaussian priors only, got {type(prior).__name__}"
        )
    if isinstance(target, LinearModel):
        fact = svd_factorize(target.A)
        if sigma2 is None:
            sigma2 = target.sigma2
    elif isinstance(target, Factorization):
        fact = target
    else:
        fact = svd_factorize(np.asarray(target))
    if sigma2 is None:
        raise ValueError("sigma2 is required when certifying a bare matrix or factorization")

    fp = variance_fixed_point(fact.lam, sigma2, prior, fact.shape)
    if not np.isfinite(fp.tau_q):
        # zero matrix: the iteration map is identically the prior mean
        coeff = SpectralCoefficients(
            alpha=0.0,
            betas=np.zeros(min(fact.shape)),
            shape=fact.shape,
            tau_x=fp.tau_x,
            sigma2=float(sigma2),
        )
    else:
        coeff = spectral_coefficients(fp, fact.lam, sigma2, fact.shape)
    eigs = closed_form_eigenvalues(coeff)
    radius = float(np.max(np.abs(eigs))) if eigs.size else 0.0
    cert = ConvergenceCertificate(
        fixed_point=fp,
        coefficients=coeff,
        eigenvalues=eigs,
        spectral_radius=radius,
        converges=bool(radius < 1.0),
        case=_case(*fact.shape),
    )
    if check_numeric:
        dense = numeric_iteration_matrix(fact, coeff)
        numeric = np.linalg.eigvals(dense)
        cert.numeric_discrepancy = eigenvalue_discrepancy(eigs, numeric)
    return cert
