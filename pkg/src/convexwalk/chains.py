"""Markov-chain steps on convex bodies and the evaluable one-step kernel.

The hit-and-run step draws a uniform direction, intersects the body
with the induced line, and resamples the position along the chord from
the target's exact one-dimensional restriction.  The ball walk proposes
a uniform point in a fixed-radius ball and accepts it when the target
density allows (plain containment for uniform targets, a Metropolis
ratio for truncated Gaussians).  A lazy wrapper stays put with
probability exactly 1/2.

For verification the module also evaluates the one-step hit-and-run
transition density

    p(u -> x) = (2 / (n * pi_n)) * nu(x) / (nu(line(u, x)) * |u - x|^(n-1)),

where pi_n is the unit-ball volume and nu(line) the 1-d integral of the
(unnormalized) target density along the line through u and x; the ratio
is normalization-free.  ``kernel_cell_probabilities`` integrates this
density over a regular grid by a polar change of variables around u,
which removes the |u - x|^(1-n) singularity exactly: along each ray the
cell masses are closed-form interval masses of the chord law, so the
only numerical error is the angular quadrature.

Everything randomized takes an explicit numpy Generator.  Batched
variants advance many replicas in lock step and are the workhorses of
the diagnostics; they draw from a single stream, which is statistically
equivalent to per-replica streams and keeps runs reproducible.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .errors import DomainError, StepError
from .geometry import uniform_directions
from .targets import DEGENERATE_CHORD_FRACTION, TruncGauss1D, UniformSegment, truncnorm_sample

DEFAULT_MAX_CHORD_RETRIES = 16


@dataclass(frozen=True)
class ChainConfig:
    """Which chain to run and how."""

    kind: str = "hit_and_run"  # "hit_and_run" | "ball_walk"
    delta: float = 0.1  # ball-walk proposal radius
    lazy: bool = False
    max_chord_retries: int = DEFAULT_MAX_CHORD_RETRIES

    def __post_init__(self):
        if self.kind not in ("hit_and_run", "ball_walk"):
            raise ValueError("kind must be 'hit_and_run' or 'ball_walk'")
        if self.kind == "ball_walk" and self.delta <= 0:
            raise ValueError("ball walk needs delta > 0")
        if self.max_chord_retries < 1:
            raise ValueError("max_chord_retries must be >= 1")


@dataclass
class RunStats:
    """Per-run summary used by the trace outputs."""

    n_steps: int
    acceptance_rate: float
    degenerate_chords: int


def unit_ball_volume(n):
    """Volume of the unit ball in R^n."""
    return float(np.exp(0.5 * n * np.log(np.pi) - gammaln(0.5 * n + 1.0)))


# ------------------------------------------------------------------- steps


def hit_and_run_step(x, target, rng, max_chord_retries=DEFAULT_MAX_CHORD_RETRIES):
    """One hit-and-run step from x; the output is again in the body.

    Degenerate chords (possible only when x sits numerically on a face)
    are retried with a fresh direction; after ``max_chord_retries``
    failures a StepError is raised rather than silently staying put.
    """
    x = np.asarray(x, dtype=float)
    y, _ = _hit_and_run_batch(target, x[None, :], rng, max_chord_retries, on_exhaust="raise")
    return y[0]


def ball_walk_step(x, target, delta, rng):
    """One ball-walk step: uniform proposal in B(x, delta), Metropolis accept."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    x = np.asarray(x, dtype=float)
    from .geometry import sample_unit_ball

    y = x + delta * sample_unit_ball(rng, x.size, 1)[0]
    if target.is_uniform:
        return y if target.body.contains(y) else x
    log_ratio = target.log_density(y) - target.log_density(x)
    if log_ratio >= 0 or np.log(rng.random()) < log_ratio:
        return y
    return x


def lazy_step(x, inner_step, rng):
    """With probability exactly 1/2 return x unchanged, else delegate."""
    if rng.random() < 0.5:
        return np.asarray(x, dtype=float).copy()
    return inner_step(x, rng)


def run_chain(config, target, init, n_steps, thin, rng):
    """Run one chain and keep every ``thin``-th state.

    Returns (samples, stats, moved): samples is an array whose first row
    is the initial state, followed by the states after thin, 2*thin, ...
    steps; stats carries the ball-walk acceptance rate and the number of
    degenerate chords encountered; moved flags whether each kept state
    differs from its predecessor.  Deterministic given the stream.
    """
    init = np.asarray(init, dtype=float)
    if not target.body.contains(init):
        raise DomainError("initial point is outside the body")
    if n_steps < 0:
        raise ValueError("n_steps must be >= 0")
    thin = max(int(thin), 1)
    x = init.copy()
    kept = [init.copy()]
    accepted = 0
    moved_flags = [0]
    degenerate = 0

    def plain_step(pt, stream):
        nonlocal degenerate, accepted
        if config.kind == "hit_and_run":
            y, dropped = _hit_and_run_batch(target, pt[None, :], stream,
                                            config.max_chord_retries, on_exhaust="raise")
            degenerate += dropped
            return y[0]
        y = ball_walk_step(pt, target, config.delta, stream)
        if not np.array_equal(y, pt):
            accepted += 1
        return y

    for step in range(1, int(n_steps) + 1):
        if config.lazy:
            x_new = lazy_step(x, plain_step, rng)
        else:
            x_new = plain_step(x, rng)
        if step % thin == 0:
            kept.append(x_new.copy())
            moved_flags.append(int(not np.array_equal(x_new, x)))
        x = x_new
    samples = np.asarray(kept)
    acc = accepted / n_steps if (config.kind == "ball_walk" and n_steps > 0) else float("nan")
    stats = RunStats(n_steps=int(n_steps), acceptance_rate=acc, degenerate_chords=degenerate)
    return samples, stats, np.asarray(moved_flags)


# ------------------------------------------------------------ batch engine


def _chord_params(target, base, theta):
    """Chord bounds plus 1-d law parameters for batched (base, theta) rows."""
    t_lo, t_hi = target.body.chord_bounds_batch(base, theta)
    if target.is_uniform:
        return t_lo, t_hi, None
    c = np.einsum("ij,ij->i", target.beta[None, :] - base, theta)
    return t_lo, t_hi, c


def hit_and_run_step_rows(body, x, rng, beta=None, m=None,
                          max_chord_retries=DEFAULT_MAX_CHORD_RETRIES,
                          on_exhaust="raise"):
    """Advance every row of x by one hit-and-run step (single stream).

    ``beta`` may be None (uniform target), an (n,) vector, or an (N, n)
    array giving each row its own Gaussian center; ``m`` is the common
    precision.  Returns (new_x, degenerate_count).  Rows whose chord
    stays degenerate after ``max_chord_retries`` direction redraws raise
    a StepError (or are left in place when on_exhaust="keep").
    """
    x = np.asarray(x, dtype=float)
    n_rows, dim = x.shape
    tol = DEGENERATE_CHORD_FRACTION * body.scale()
    theta = uniform_directions(rng, dim, n_rows)
    t_lo, t_hi = body.chord_bounds_batch(x, theta)
    degenerate_total = 0
    bad = (t_hi - t_lo) < tol
    retries = 0
    while np.any(bad):
        degenerate_total += int(bad.sum())
        retries += 1
        if retries > max_chord_retries:
            if on_exhaust == "raise":
                raise StepError("chord stayed degenerate after direction retries")
            break
        theta[bad] = uniform_directions(rng, dim, int(bad.sum()))
        t_lo_new, t_hi_new = body.chord_bounds_batch(x[bad], theta[bad])
        t_lo[bad] = t_lo_new
        t_hi[bad] = t_hi_new
        bad = (t_hi - t_lo) < tol
    if beta is None:
        t = t_lo + (t_hi - t_lo) * rng.random(n_rows)
    else:
        beta = np.asarray(beta, dtype=float)
        if beta.ndim == 1:
            beta = beta[None, :]
        c = np.einsum("ij,ij->i", beta - x, theta)
        s = 1.0 / np.sqrt(m)
        t = truncnorm_sample(c, s, t_lo, t_hi, rng)
    if np.any(bad):  # rows kept in place (on_exhaust="keep")
        t = np.where(bad, 0.0, t)
    return x + t[:, None] * theta, degenerate_total


def _hit_and_run_batch(target, x, rng, max_chord_retries=DEFAULT_MAX_CHORD_RETRIES,
                       on_exhaust="raise"):
    beta = None if target.is_uniform else target.beta
    return hit_and_run_step_rows(target.body, x, rng, beta=beta, m=target.m,
                                 max_chord_retries=max_chord_retries, on_exhaust=on_exhaust)


def _ball_walk_batch(target, x, delta, rng):
    """One batched ball-walk step for every row of x."""
    from .geometry import sample_unit_ball

    x = np.asarray(x, dtype=float)
    proposal = x + delta * sample_unit_ball(rng, x.shape[1], len(x))
    if target.is_uniform:
        accept = target.body.contains_batch(proposal)
    else:
        log_ratio = target.log_density_batch(proposal) - target.log_density_batch(x)
        accept = np.log(rng.random(len(x))) < log_ratio
    return np.where(accept[:, None], proposal, x), accept


def one_step_samples(u, target, n_samples, rng):
    """n_samples independent one-step hit-and-run outputs from a fixed u."""
    u = np.asarray(u, dtype=float)
    if not target.body.contains(u):
        raise DomainError("starting point is outside the body")
    base = np.broadcast_to(u, (int(n_samples), u.size)).copy()
    y, _ = _hit_and_run_batch(target, base, rng)
    return y


def run_chain_batch(target, x0, n_steps, rng, lazy=False, callback=None,
                    kind="hit_and_run", delta=0.1):
    """Advance N replicas in lock step for n_steps chain steps.

    ``callback(step, X)`` fires after every step when given; the final
    state array is returned.  Lazy replicas flip independent coins.
    """
    x = np.array(x0, dtype=float)
    for step in range(1, int(n_steps) + 1):
        if kind == "hit_and_run":
            y, _ = _hit_and_run_batch(target, x, rng, on_exhaust="keep")
        else:
            y, _ = _ball_walk_batch(target, x, delta, rng)
        if lazy:
            stay = rng.random(len(x)) < 0.5
            y[stay] = x[stay]
        x = y
        if callback is not None:
            callback(step, x)
    return x


# ------------------------------------------------------- transition kernel


def transition_density(u, x, target):
    """Evaluate the one-step hit-and-run transition density p(u -> x).

    Both points must lie in the body and differ; x outside the body has
    density 0, and x == u raises (the kernel is singular there).
    """
    u = np.asarray(u, dtype=float)
    x = np.asarray(x, dtype=float)
    if not target.body.contains(u):
        raise DomainError("kernel base point must lie in the body")
    d = float(np.linalg.norm(x - u))
    if d == 0.0:
        raise ValueError("transition density is singular at x == u")
    if not target.body.contains(x):
        return 0.0
    n = target.body.dim
    theta = (x - u) / d
    chord = target.body.chord(u, theta)
    law = target.restrict_to_chord(chord)
    if isinstance(law, UniformSegment):
        log_ratio = -np.log(law.mass())
    else:
        z = (d - law.c) / law.s
        log_mass = np.log(law.s * np.sqrt(2 * np.pi)) + _log_phi(law)
        log_ratio = -0.5 * z * z - log_mass
    prefactor = 2.0 / (n * unit_ball_volume(n))
    return float(prefactor * np.exp(log_ratio) / d ** (n - 1))


def _log_phi(law):
    from .targets import _log_phi_interval

    return _log_phi_interval((law.a - law.c) / law.s, (law.b - law.c) / law.s)


# ------------------------------------------------------------ regular grids


@dataclass(frozen=True)
class RegularGrid:
    """Axis-aligned regular grid of cells covering a rectangle."""

    lower: np.ndarray
    upper: np.ndarray
    shape: tuple

    @classmethod
    def for_body(cls, body, cells_per_axis):
        lo, hi = body.bounding_box()
        return cls(np.asarray(lo, dtype=float), np.asarray(hi, dtype=float),
                   tuple([int(cells_per_axis)] * body.dim))

    @property
    def dim(self):
        return len(self.shape)

    @property
    def n_cells(self):
        return int(np.prod(self.shape))

    def edges(self, axis):
        return np.linspace(self.lower[axis], self.upper[axis], self.shape[axis] + 1)

    def spacing(self):
        return (self.upper - self.lower) / np.asarray(self.shape, dtype=float)

    def flat_index(self, points):
        """Flat cell index per point; points outside clamp to edge cells."""
        points = np.atleast_2d(points)
        h = self.spacing()
        idx = np.floor((points - self.lower) / h).astype(int)
        idx = np.clip(idx, 0, np.asarray(self.shape) - 1)
        return np.ravel_multi_index(tuple(idx.T), self.shape)

    def histogram(self, points):
        """Normalized histogram (probability per cell) of the points."""
        counts = np.bincount(self.flat_index(points), minlength=self.n_cells)
        return counts.astype(float) / len(points)


def _sphere_nodes(dim, n_angles):
    """Equal-weight direction nodes for the uniform sphere measure."""
    if dim == 2:
        phi = (np.arange(n_angles) + 0.5) * (2.0 * np.pi / n_angles)
        return np.column_stack([np.cos(phi), np.sin(phi)])
    if dim == 3:
        n_z = max(int(np.sqrt(n_angles / 2)), 8)
        n_phi = 2 * n_z
        z = -1.0 + (np.arange(n_z) + 0.5) * (2.0 / n_z)
        phi = (np.arange(n_phi) + 0.5) * (2.0 * np.pi / n_phi)
        zz, pp = np.meshgrid(z, phi, indexing="ij")
        s = np.sqrt(1.0 - zz ** 2)
        return np.column_stack([(s * np.cos(pp)).ravel(), (s * np.sin(pp)).ravel(), zz.ravel()])
    raise ValueError("kernel grid quadrature supports dimensions 2 and 3 only")


def kernel_cell_probabilities(u, target, grid, n_angles=8192):
    """Exact-in-radius grid integration of the one-step kernel from u.

    For every direction node the ray from u is cut at the grid lines and
    the chord-law mass of each radial segment is accumulated into the
    cell the segment crosses.  This integrates the transition density in
    polar coordinates, where the radial factor cancels analytically, so
    the singular cell around u needs no special treatment.

    Returns a flat array of cell probabilities summing to 1 (up to the
    angular quadrature error).
    """
    u = np.asarray(u, dtype=float)
    body = target.body
    if body.dim not in (2, 3):
        raise ValueError("kernel grid quadrature supports dimensions 2 and 3 only")
    if not body.contains(u):
        raise DomainError("kernel base point must lie in the body")
    dirs = _sphere_nodes(body.dim, n_angles)
    base = np.broadcast_to(u, dirs.shape).copy()
    t_lo, t_hi, c = _chord_params(target, base, dirs)
    s = None if target.is_uniform else 1.0 / np.sqrt(target.m)
    edges = [grid.edges(a) for a in range(grid.dim)]
    probs = np.zeros(grid.n_cells)
    shape_arr = np.asarray(grid.shape)
    spacing = grid.spacing()
    for k in range(len(dirs)):
        omega = dirs[k]
        reach = t_hi[k]
        if reach <= 0.0:
            continue
        cuts = [np.array([0.0, reach])]
        for a in range(grid.dim):
            if omega[a] != 0.0:
                r = (edges[a] - u[a]) / omega[a]
                cuts.append(r[(r > 0.0) & (r < reach)])
        rho = np.sort(np.concatenate(cuts))
        lo, hi = rho[:-1], rho[1:]
        keep = hi > lo
        lo, hi = lo[keep], hi[keep]
        if len(lo) == 0:
            continue
        if target.is_uniform:
            w = (hi - lo) / (t_hi[k] - t_lo[k])
        else:
            law = TruncGauss1D(float(c[k]), s, float(t_lo[k]), float(t_hi[k]))
            w = np.asarray(law.interval_fraction(lo, hi), dtype=float)
        mids = u[None, :] + (0.5 * (lo + hi))[:, None] * omega[None, :]
        idx = np.floor((mids - grid.lower) / spacing).astype(int)
        idx = np.clip(idx, 0, shape_arr - 1)
        flat = np.ravel_multi_index(tuple(idx.T), grid.shape)
        np.add.at(probs, flat, w)
    return 2.0 * probs / len(dirs)


def empirical_kernel_tv(u, target, n_samples, grid, rng, n_angles=8192):
    """TV between sampled one-step outputs and the grid-integrated kernel.

    Histograms ``n_samples`` procedural one-step draws from u on the
    grid and compares them against the cell probabilities obtained from
    the transition-density quadrature.  Supported for dimensions 2 and 3.
    """
    if isinstance(grid, int):
        grid = RegularGrid.for_body(target.body, grid)
    probs = kernel_cell_probabilities(u, target, grid, n_angles=n_angles)
    samples = one_step_samples(u, target, n_samples, rng)
    hist = grid.histogram(samples)
    return 0.5 * float(np.abs(hist - probs).sum())
