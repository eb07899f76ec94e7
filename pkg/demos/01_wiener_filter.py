"""Reconstruct a signal from noisy linear data with the generalized Wiener filter.

Sets up a small Gaussian inverse problem d = R s + n, computes the posterior
in both filter representations, and checks the information Hamiltonian
bookkeeping.  Run from the repository root:

    python3 demos/01_wiener_filter.py
"""

import numpy as np

from infodyn import gaussian
from infodyn.gaussian import GaussianDensity, LinearMeasurement

rng = np.random.default_rng(21)

# A six-dimensional signal observed through four smoothing-ish channels.
n, y = 6, 4
prior = GaussianDensity(
    mean=np.zeros(n),
    cov=np.diag(1.0 / (1.0 + np.arange(n)) ** 2),
)
response = rng.standard_normal((y, n)) / np.sqrt(n)
meas = LinearMeasurement(response=response, noise_cov=0.01 * np.eye(y))

truth = gaussian.sample(prior, 1, seed=7)[0]
noise = np.sqrt(0.01) * rng.standard_normal(y)
data = response @ truth + noise

print("truth          :", np.array2string(truth, precision=3))
print("data           :", np.array2string(data, precision=3))

# The filter has two algebraically equal forms: one inverts an n x n matrix
# in signal space, the other a y x y matrix in data space.
w_signal = gaussian.wiener_filter(prior, meas, "signal_space")
w_data = gaussian.wiener_filter(prior, meas, "data_space")
print("\nfilter representations agree to "
      f"{np.max(np.abs(w_signal - w_data)):.2e}")

post = gaussian.posterior(prior, meas, data)
print("posterior mean :", np.array2string(post.mean, precision=3))
print("reconstruction error |m - s| =", f"{np.linalg.norm(post.mean - truth):.3f}")
print("prior error          |0 - s| =", f"{np.linalg.norm(truth):.3f}")

# Posterior variances never exceed prior variances: measuring can only
# sharpen a Gaussian belief.
shrink = np.diag(post.cov) / np.diag(prior.cov)
print("variance shrink factors:", np.array2string(shrink, precision=3))

# Evidence: the data seen before measuring, N(R psi, R Phi R^T + N).
ev = gaussian.evidence(prior, meas)
print("\nevidence log-density at observed data:",
      f"{float(ev.log_density(data)):.4f}")

# log posterior + log evidence = -H(d, s): joint bookkeeping closes.
h_joint = gaussian.info_hamiltonian(prior, meas, data, truth)
closure = post.log_density(truth) + ev.log_density(data) + h_joint
print("information Hamiltonian closure (should be ~0):", f"{float(closure):.2e}")
