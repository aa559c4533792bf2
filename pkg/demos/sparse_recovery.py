"""Sparse signals through the spike-and-slab denoiser.

Swapping the Gaussian denoiser for a Bernoulli-Gaussian one turns the same
solver loop into a compressed-sensing decoder.  The transform-domain kernel
keeps working when the sensing matrix stops being iid, which is where the
classic kernel gives up.
"""

import numpy as np

from utamp import (
    BernoulliGaussianPrior,
    EnsembleSpec,
    generate_matrix,
    run,
    synthesize_instance,
)

prior = BernoulliGaussianPrior(rho=0.1, mu=0.0, v=1.0)  # 10% occupancy
N = 256
SIGMA2 = 1e-4


def nmse_db(x, x_true):
    return 10 * np.log10(np.sum(np.abs(x - x_true) ** 2) / np.sum(np.abs(x_true) ** 2))


def cell(state, trace, model):
    # diverged runs blow past 1e12, their NMSE carries no information
    if trace.status == "diverged":
        return f"{'diverged':>12}"
    mark = " " if trace.status == "converged" else "*"
    return f"{nmse_db(state.x, model.x_true):9.1f} dB{mark}"


print("undersampling sweep, iid Gaussian sensing matrix:")
print(f"{'M/N':>6} {'amp-vec':>13} {'utamp':>13}")
for frac in (0.2, 0.3, 0.4, 0.6):
    m = int(frac * N)
    A = generate_matrix(EnsembleSpec(kind="iid_gaussian", M=m, N=N, seed=3))
    model = synthesize_instance(A, prior, sigma2=SIGMA2, seed=3)
    cells = []
    for algorithm in ("vector", "utamp"):
        state, trace = run(algorithm, model, prior, max_iters=400)
        cells.append(cell(state, trace, model))
    print(f"{frac:>6.1f} {cells[0]:>13} {cells[1]:>13}")

print()
print("The knee between 0.2 and 0.3 is the usual sparse-recovery phase")
print("transition; both kernels sit on it for iid matrices.")
print()

print("same sweep with a mean-shifted sensing matrix (entrywise mean 10):")
print(f"{'M/N':>6} {'amp-vec':>13} {'utamp':>13}")
for frac in (0.3, 0.4, 0.6):
    m = int(frac * N)
    A = generate_matrix(EnsembleSpec(kind="nonzero_mean", M=m, N=N, seed=3))
    model = synthesize_instance(A, prior, sigma2=SIGMA2, seed=3)
    cells = []
    for algorithm in ("vector", "utamp"):
        state, trace = run(algorithm, model, prior, max_iters=400)
        cells.append(cell(state, trace, model))
    print(f"{frac:>6.1f} {cells[0]:>13} {cells[1]:>13}")

print()
print("A rank-one mean component wrecks the iid calibration of the classic")
print("kernel, while the transformed model absorbs it into one singular")
print("direction and keeps decoding.")
print()
print("* the iterate was still moving when the budget ran out.  The fixed-")
print("  point guarantee certified elsewhere covers Gaussian priors; with a")
print("  spike-and-slab denoiser the iterates can keep jittering at the few-")
print("  percent level even after the estimate has reached the noise floor,")
print("  so the starred NMSE values are already as good as the converged ones.")
