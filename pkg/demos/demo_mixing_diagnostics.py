"""Mixing and conductance measurement for the lazy hit-and-run chain.

Builds a 2-warm start on an isotropic box, tracks marginal TV along the
chain, estimates the s-conductance of a halfspace cut, and plugs it into
the conductance-based TV upper bound.
"""

import numpy as np

from convexwalk import (ChainConfig, ConvexBody, Halfspace, Target,
                        conductance_mixing_bound, mixing_curve, s_conductance,
                        step_size_quantile, stream, warm_start)

rng = stream(7, "demo-diagnostics")
SQ3 = np.sqrt(3.0)

body = ConvexBody.box([-SQ3] * 4, [SQ3] * 4)
target = Target.uniform(body)

# A 2-warm start: uniform on the half of the body below the median cut.
warm = warm_start(body, 2.0, rng)
print(f"2-warm start cut: direction {warm.direction}, offset {warm.offset:.4f}")

# March the ensemble and watch the marginal TV fall to the noise floor.
report = mixing_curve(ChainConfig(lazy=True), target, warm,
                      [1, 2, 4, 8, 16, 32, 64], 4000, rng, epsilon=0.1)
for step, tv, se in zip(report.steps, report.tv, report.se):
    print(f"  step {step:3d}: marginal TV = {tv:.4f} +- {se:.4f}")
print(f"empirical 0.1-mixing time: {report.mixing_time} steps")

# The s-conductance of the median halfspace cut for the same chain.
part = Halfspace(np.array([1.0, 0.0, 0.0, 0.0]), 0.0)
phi = s_conductance(ChainConfig(lazy=True), target, part, 0.05, 200_000, rng)
print(f"s-conductance (s=0.05, lazy): {phi.estimate:.4f} +- {phi.se:.4f}")

# Conductance turns into a TV upper bound after N lazy steps.
for n_steps in (10, 100, 1000):
    bound = conductance_mixing_bound(2.0, 0.05, phi.estimate, n_steps)
    print(f"  TV bound after {n_steps:4d} steps: {bound:.4f}")

# The local step-size scale of hit-and-run: the 1/8-quantile of the
# one-step displacement.  On the unit disc from the center it is 1/8.
disc = ConvexBody.ball([0.0, 0.0], 1.0)
fu = step_size_quantile(Target.uniform(disc), [0.0, 0.0], 100_000, rng)
print(f"step-size quantile on the disc: {fu.estimate:.4f} +- {fu.se:.4f} (exactly 1/8)")
