"""Mixing and conductance measurement.

Total variation is measured on axis marginals against closed-form
reference CDFs (exact for boxes and balls); marginal TV lower-bounds the
joint TV and every advertised threshold refers to the marginal variant.
Conductance numerators are one-step escape probabilities from exact
target samples; partitions are restricted to halfspace cuts, the
canonical hard family for convex bodies.
"""

from dataclasses import dataclass

import numpy as np

from . import chains
from .errors import PreconditionError
from .geometry import classify_core_point
from .stats import MCEstimate, bootstrap_quantile_se

DEFAULT_CORE_OVERLAP_SAMPLES = 4096


@dataclass(frozen=True)
class Halfspace:
    """The partition {a.x <= b} / {a.x > b} of a body; |a| = 1."""

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        normal = np.asarray(self.normal, dtype=float)
        if abs(np.linalg.norm(normal) - 1.0) > 1e-9:
            raise ValueError("partition normal must be a unit vector")
        object.__setattr__(self, "normal", normal)

    def side_one(self, points):
        """Boolean mask of membership in S1 = {a.x <= b}."""
        return np.atleast_2d(points) @ self.normal <= self.offset


@dataclass
class TVResult:
    tv: float
    noise_floor: float
    per_axis: np.ndarray

    def __float__(self):
        return self.tv


def reference_marginals(target):
    """Per-axis (cdf, lo, hi) triples for targets with closed-form marginals."""
    lo, hi = target.body.bounding_box()
    out = []
    for axis in range(target.body.dim):
        out.append((target.axis_marginal_cdf(axis), float(lo[axis]), float(hi[axis])))
    return out


def tv_marginal(samples, reference_cdf_per_axis, n_bins):
    """Max over axes of the binned TV between samples and reference marginals.

    ``reference_cdf_per_axis`` is a list of (cdf, lo, hi) triples (see
    :func:`reference_marginals`).  The result reports the statistic, the
    per-axis values and a conservative noise floor computed from a
    self-split of the sample.
    """
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 2:
        raise ValueError("samples must be a 2-d array")
    if len(samples) < 1000:
        raise ValueError("need at least 1000 samples for a stable TV estimate")
    n_axes = samples.shape[1]
    if len(reference_cdf_per_axis) != n_axes:
        raise ValueError("need one reference CDF per axis")
    per_axis = np.zeros(n_axes)
    floors = np.zeros(n_axes)
    half = len(samples) // 2
    for axis in range(n_axes):
        cdf, lo, hi = reference_cdf_per_axis[axis]
        col = samples[:, axis]
        edges = np.linspace(min(lo, col.min()), max(hi, col.max()), n_bins + 1)
        ref = np.diff(cdf(edges))
        ref = np.clip(ref, 0.0, None)
        ref = ref / ref.sum()
        hist, _ = np.histogram(col, bins=edges)
        emp = hist / hist.sum()
        per_axis[axis] = 0.5 * np.abs(emp - ref).sum()
        h1, _ = np.histogram(col[:half], bins=edges)
        h2, _ = np.histogram(col[half:2 * half], bins=edges)
        floors[axis] = 0.5 * np.abs(h1 / h1.sum() - h2 / h2.sum()).sum()
    return TVResult(tv=float(per_axis.max()), noise_floor=float(floors.max()), per_axis=per_axis)


# ---------------------------------------------------------------- warm start


@dataclass
class WarmStart:
    """Sampler for the uniform law on the sub-body {x in K : a.x <= q}.

    The density ratio against the uniform target is exactly the
    warmness M on its support.
    """

    body: object
    direction: np.ndarray
    offset: float
    warmness: float

    def sample(self, n_samples, rng, max_rounds=10_000):
        out = np.empty((n_samples, self.body.dim))
        have = 0
        for _ in range(max_rounds):
            chunk = max(int(1.5 * self.warmness * (n_samples - have)), 256)
            cand = self.body.sample_uniform(chunk, rng)
            cand = cand[cand @ self.direction <= self.offset]
            take = min(len(cand), n_samples - have)
            out[have:have + take] = cand[:take]
            have += take
            if have == n_samples:
                return out
        raise PreconditionError("warm-start sub-body appears numerically empty")

    def __call__(self, n_samples, rng):
        return self.sample(n_samples, rng)


def warm_start(body, warmness, rng, direction=None, n_calibration=200_000):
    """Build an M-warm initial sampler by halfspace truncation.

    The cut offset is calibrated so the sub-body {a.x <= q} carries
    uniform measure 1/M (Monte Carlo quantile of a.x).  M = 1 returns a
    sampler for the target itself.
    """
    if warmness < 1:
        raise ValueError("warmness must be >= 1")
    direction = np.zeros(body.dim) if direction is None else np.asarray(direction, dtype=float)
    if not direction.any():
        direction = np.eye(body.dim)[0]
    direction = direction / np.linalg.norm(direction)
    if warmness == 1:
        return WarmStart(body, direction, np.inf, 1.0)
    if n_calibration < 50 * warmness:
        raise PreconditionError("warmness too large for the calibration budget")
    proj = body.sample_uniform(n_calibration, rng) @ direction
    q = float(np.quantile(proj, 1.0 / warmness))
    if q <= proj.min():
        raise PreconditionError("sub-body is numerically empty at this warmness")
    return WarmStart(body, direction, q, float(warmness))


# --------------------------------------------------------------- conductance


def _one_step(config, target, x, rng):
    """One batched chain step honoring kind and laziness."""
    if config.kind == "hit_and_run":
        y, _ = chains._hit_and_run_batch(target, x, rng, on_exhaust="keep")
    else:
        y, _ = chains._ball_walk_batch(target, x, config.delta, rng)
    if config.lazy:
        stay = rng.random(len(x)) < 0.5
        y[stay] = x[stay]
    return y


def dirichlet_form_indicator(config, target, partition, n_samples, rng, step_fn=None):
    """Estimate the escape flux integral_{S1} P(x -> S2) d nu (an MCEstimate).

    Draws exact target samples, advances each one step, and averages the
    indicator of crossing from S1 into S2.  ``step_fn(x_batch, rng)``
    overrides the chain step (used by tests with synthetic kernels).
    """
    x = target.exact_sample(n_samples, rng)
    y = step_fn(x, rng) if step_fn is not None else _one_step(config, target, x, rng)
    crossed = partition.side_one(x) & ~partition.side_one(y)
    p = crossed.mean()
    se = np.sqrt(max(p * (1 - p), 0.0) / n_samples)
    return MCEstimate(float(p), float(se), int(n_samples))


def s_conductance(config, target, partition, s, n_samples, rng, step_fn=None):
    """Estimate the s-conductance of the chain for a halfspace partition.

    The numerator is the one-step escape flux from S1; the denominator
    is min(nu(S1), nu(S2)) - s, with nu(S1) estimated from the same
    sample budget.  Raises PreconditionError unless the estimated
    partition measure lies strictly inside (s, 1-s).
    """
    if not 0 <= s < 0.5:
        raise ValueError("s must lie in [0, 1/2)")
    x = target.exact_sample(n_samples, rng)
    in_one = partition.side_one(x)
    p1 = in_one.mean()
    if not (s < p1 < 1.0 - s):
        raise PreconditionError(
            f"partition measure {p1:.4f} outside the admissible window ({s}, {1 - s})")
    y = step_fn(x, rng) if step_fn is not None else _one_step(config, target, x, rng)
    crossed = in_one & ~partition.side_one(y)
    num = crossed.mean()
    se_num = np.sqrt(max(num * (1 - num), 0.0) / n_samples)
    den = min(p1, 1.0 - p1) - s
    se_p1 = np.sqrt(max(p1 * (1 - p1), 0.0) / n_samples)
    phi = num / den
    rel = np.sqrt((se_num / num) ** 2 + (se_p1 / den) ** 2) if num > 0 else np.inf
    return MCEstimate(float(phi), float(abs(phi) * rel), int(n_samples))


def conductance_mixing_bound(warmness, s, phi_s, n_steps):
    """TV upper bound M*s + M*(1 - phi_s^2/2)^N after N lazy reversible steps."""
    if not 0 < s < 0.5:
        raise ValueError("s must lie in (0, 1/2)")
    if not 0 < phi_s <= 1:
        raise ValueError("phi_s must lie in (0, 1]")
    if warmness < 1 or n_steps < 0:
        raise ValueError("need warmness >= 1 and n_steps >= 0")
    log_decay = n_steps * np.log1p(-0.5 * phi_s * phi_s)
    return float(warmness * s + warmness * np.exp(log_decay))


# ------------------------------------------------------------ step geometry


def step_size_quantile(target, u, n_samples, rng, q=0.125, n_boot=200):
    """The q-quantile (default 1/8) of the one-step displacement |Y - u|.

    Returns an MCEstimate whose standard error comes from an
    order-statistic bootstrap.
    """
    u = np.asarray(u, dtype=float)
    y = chains.one_step_samples(u, target, n_samples, rng)
    r = np.linalg.norm(y - u, axis=1)
    est = float(np.quantile(r, q))
    se = bootstrap_quantile_se(r, q, n_boot=n_boot, rng=rng)
    return MCEstimate(est, se, int(n_samples))


def kernel_overlap_tv(target, u, v, grid, n_samples=None, rng=None, n_angles=8192):
    """TV distance between the one-step kernels started at u and at v.

    By default integrates the transition density over the grid for both
    start points (the kernels are atomless, so the grid masses capture
    everything); pass ``n_samples`` and ``rng`` to use sampled
    histograms instead.  Dimensions 2 and 3 only.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if isinstance(grid, int):
        grid = chains.RegularGrid.for_body(target.body, grid)
    if np.array_equal(u, v):
        return 0.0
    if n_samples is None:
        p_u = chains.kernel_cell_probabilities(u, target, grid, n_angles=n_angles)
        p_v = chains.kernel_cell_probabilities(v, target, grid, n_angles=n_angles)
    else:
        p_u = grid.histogram(chains.one_step_samples(u, target, n_samples, rng))
        p_v = grid.histogram(chains.one_step_samples(v, target, n_samples, rng))
    return 0.5 * float(np.abs(p_u - p_v).sum())


def core_mass(body, r, n_points, rng, overlap_samples=DEFAULT_CORE_OVERLAP_SAMPLES):
    """Fraction of uniform body samples classified as core points at scale r.

    A point counts only when its 99% overlap band clears the 63/64
    threshold, so the estimate is a conservative lower bound on the core
    measure.
    """
    pts = body.sample_uniform(n_points, rng)
    hits = 0
    for p in pts:
        if classify_core_point(body, p, r, overlap_samples, rng) == "in":
            hits += 1
    frac = hits / n_points
    se = np.sqrt(max(frac * (1 - frac), 0.0) / n_points)
    return MCEstimate(float(frac), float(se), int(n_points))


# ------------------------------------------------------------- mixing curve


@dataclass
class MixingReport:
    """TV-against-target trajectory of a replica ensemble."""

    steps: list
    tv: list
    se: list
    noise_floor: list
    epsilon: float
    mixing_time: int = None
    phi_s: float = None
    dirichlet: float = None

    def to_dict(self):
        return {
            "steps": list(map(int, self.steps)),
            "tv": list(map(float, self.tv)),
            "se": list(map(float, self.se)),
            "noise_floor": list(map(float, self.noise_floor)),
            "epsilon": float(self.epsilon),
            "mixing_time": None if self.mixing_time is None else int(self.mixing_time),
            "phi_s": None if self.phi_s is None else float(self.phi_s),
            "dirichlet": None if self.dirichlet is None else float(self.dirichlet),
        }


def _bootstrap_tv_se(samples, refs, n_bins, rng, n_boot=64):
    n = len(samples)
    vals = np.empty(n_boot)
    for i in range(n_boot):
        idx = rng.integers(0, n, size=n)
        vals[i] = tv_marginal(samples[idx], refs, n_bins).tv
    return float(vals.std(ddof=1))


def mixing_curve(config, target, init_sampler, checkpoints, n_replicas, rng,
                 n_bins=20, epsilon=0.1):
    """Advance an ensemble and record marginal TV at each checkpoint.

    ``init_sampler(n, rng)`` provides the initial points.  The report's
    ``mixing_time`` is the first checkpoint whose TV drops to at most
    ``epsilon`` (None if never).  Deterministic given the stream.
    """
    checkpoints = [int(c) for c in checkpoints]
    if any(b <= a for a, b in zip(checkpoints, checkpoints[1:])) or not checkpoints:
        raise ValueError("checkpoints must be strictly increasing and nonempty")
    refs = reference_marginals(target)
    x = init_sampler(n_replicas, rng)
    report = MixingReport(steps=[], tv=[], se=[], noise_floor=[], epsilon=float(epsilon))
    prev = 0
    for step in checkpoints:
        x = chains.run_chain_batch(target, x, step - prev, rng, lazy=config.lazy,
                                   kind=config.kind, delta=config.delta)
        prev = step
        res = tv_marginal(x, refs, n_bins)
        report.steps.append(step)
        report.tv.append(res.tv)
        report.noise_floor.append(res.noise_floor)
        report.se.append(_bootstrap_tv_se(x, refs, n_bins, rng))
        if report.mixing_time is None and res.tv <= epsilon:
            report.mixing_time = step
    return report
