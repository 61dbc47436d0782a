"""The localization process: Gaussian tilts that concentrate a measure.

Simulates the tilt SDE on a box, compares the terminal tilt center
against its exact law (uniform point plus Gaussian noise), checks the
covariance bound 1/t along the way, and runs the one-dimensional grid
variant with its conjugacy and Lipschitz identities.
"""

import numpy as np
from scipy import stats as sps

from convexwalk import (ConvexBody, Grid1D, direct_center_sample,
                        energy_two_sample_test, gaussian_tilt, sample_tilt_center,
                        shell_mass, simulate_sl_paths, stream, tilt_functional_lipschitz,
                        tilted_target, variance_decay_curve)

rng = stream(7, "demo-localization")
box = ConvexBody.box([-1.0] * 4, [1.0] * 4)

# Run the Euler scheme to time T = 2 on a batch of paths.  At time t the
# current measure is the Gaussian with mean c_t/t and variance 1/t
# truncated to the box.
T = 2.0
snaps = simulate_sl_paths(box, [1.0, 2.0], 1 / 64, 400, rng,
                          inner_samples=64, inner_burnin=16)
for t, c in sorted(snaps.items()):
    masses = [tilted_target(box, ci, t).axis_tail_prob(0, 0.0) for ci in c]
    print(f"t={t:g}: mean localized mass of {{x_1 > 0}} = {np.mean(masses):.4f} "
          f"(martingale: stays at 0.500)")

# The re-centered terminal tilt c_T/T has an exact sampler: X + Z with X
# uniform on the box and Z Gaussian.  An energy-distance permutation test
# cannot tell the two collections apart.
sde = snaps[T] / T
direct = direct_center_sample(box, T, rng, 400)
stat, p = energy_two_sample_test(sde, direct, n_permutations=199, rng=rng)
print(f"energy two-sample test SDE vs direct law: statistic={stat:.5f}, p={p:.3f}")

# Localized measures concentrate in a thin shell around their center: for
# precision m = n most of the mass sits at distance (1/sqrt2, sqrt2).
n = 64
big = ConvexBody.box([-np.sqrt(3.0)] * n, [np.sqrt(3.0)] * n)
beta = direct_center_sample(big, float(n), rng, 1)[0]
est = shell_mass(big, beta, float(n), 2000, rng)
print(f"shell mass in dimension {n}: {est.estimate:.4f} +- {est.se:.4f} "
      f"(bound 1 - e^-2 = {1 - np.exp(-2):.4f})")

# The one-dimensional analogue lives on a grid.  Tilting a standard
# Gaussian is conjugate: the result is again Gaussian.
g = Grid1D.from_density(sps.norm(0, 1).pdf, -8, 8, 4096)
tilted = gaussian_tilt(g, y=0.8, tau=3.0)
print(f"conjugate tilt: mean={tilted.mean():.4f} (exact {3.0 * 0.8 / 4.0:.4f}), "
      f"var={tilted.var():.4f} (exact {1 / 4.0:.4f})")

# The terminal tilt center in 1-d has law (base density) * Gaussian noise.
ys = sample_tilt_center(g, alpha=2.0, sigma2=1.0, rng=rng, size=100_000)
print(f"1-d center law variance: {ys.var():.4f} (exact {g.var() + 0.5:.4f})")

# The map y -> tilted expectation of any [0,1] weight vector is Lipschitz
# with constant sqrt(alpha sigma^2).
h = (g.centers() >= 0).astype(float)
pairs = list(zip(rng.uniform(-3, 3, 500), rng.uniform(-3, 3, 500)))
ratio = tilt_functional_lipschitz(g, 2.0, 1.0, h, pairs)
print(f"max finite-difference ratio {ratio:.4f} <= sqrt(2) = {np.sqrt(2):.4f}")

# Expected variance of the 1-d process never increases.
curve = variance_decay_curve(g, 1.0, 1.0, 64, 1024, rng)
print("expected variance at t=0, 1/2, 1:",
      [f"{curve.mean_variance[i]:.3f}" for i in (0, len(curve.times) // 2, -1)],
      "(Gaussian closed form: 1, 2/3, 1/2)")
