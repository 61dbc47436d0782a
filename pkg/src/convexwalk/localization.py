"""Measure-valued localization of a uniform body density by Gaussian tilts.

The n-dimensional process keeps a tilt vector c and a time t; the
current measure is the body's uniform density multiplied by
exp(c.x - t|x|^2/2), i.e. the Gaussian with mean c/t and variance 1/t
truncated to the body (the uniform density itself at t = 0).  The tilt
evolves by the Euler-Maruyama recursion

    c <- c + sqrt(h) xi + h * b_hat,      t <- t + h,

with xi standard normal and b_hat a hit-and-run estimate of the current
measure's center of mass.  Run to time T, the re-centered tilt c_T/T has
the same law as X + Z with X uniform on the body and Z ~ N(0, I/T),
which `direct_center_sample` draws directly; the two routes are compared
in the tests.

The one-dimensional counterpart lives on a Grid1D: `gaussian_tilt`
applies the deterministic tilt exp(-(tau/2)(z - y)^2) (the 1/2
convention is used everywhere), `sample_tilt_center` draws the terminal
tilt center y, whose law is the base density convolved with
N(0, 1/(alpha sigma^2)), and `variance_decay_curve` simulates the
grid-mass SDE by plain Euler steps to exhibit the decay of the expected
variance.
"""

from dataclasses import dataclass

import numpy as np

from .chains import hit_and_run_step_rows
from .errors import NumericalError
from .grid1d import Grid1D, gaussian_tilt
from .stats import MCEstimate
from .targets import Target

DEFAULT_INNER_SAMPLES = 256
DEFAULT_INNER_BURNIN = 64

SHELL_LOW = np.sqrt(2.0) / 2.0
SHELL_HIGH = np.sqrt(2.0)


def tilted_target(body, c, t):
    """The measure after time t of tilting: uniform at t=0, else nu_{c/t, t}."""
    if t < 0:
        raise ValueError("t must be >= 0")
    if t == 0.0:
        return Target.uniform(body)
    return Target.truncated_gaussian(body, np.asarray(c, dtype=float) / t, t)


@dataclass
class SLState:
    """State of one localization path: tilt vector, elapsed time, inner chain."""

    body: object
    c: np.ndarray
    t: float
    x_inner: np.ndarray = None
    inner_samples: int = DEFAULT_INNER_SAMPLES
    inner_burnin: int = DEFAULT_INNER_BURNIN

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float)
        if self.x_inner is None:
            self.x_inner = self.body.center()

    @classmethod
    def initial(cls, body, **kwargs):
        return cls(body=body, c=np.zeros(body.dim), t=0.0, **kwargs)

    def target(self):
        return tilted_target(self.body, self.c, self.t)


def sl_step(state, h, rng):
    """One Euler-Maruyama update of the localization tilt.

    The drift (the current measure's center of mass) is estimated by
    averaging ``state.inner_samples`` hit-and-run samples of the current
    measure, warm-started from the previous inner point.
    """
    if h <= 0:
        raise ValueError("step size must be positive")
    beta = None if state.t == 0.0 else state.c / state.t
    m = None if state.t == 0.0 else state.t
    x = state.x_inner[None, :].copy()
    for _ in range(state.inner_burnin):
        x, _ = hit_and_run_step_rows(state.body, x, rng, beta=beta, m=m)
    acc = np.zeros(state.body.dim)
    for _ in range(state.inner_samples):
        x, _ = hit_and_run_step_rows(state.body, x, rng, beta=beta, m=m)
        acc += x[0]
    b_hat = acc / state.inner_samples
    xi = rng.standard_normal(state.body.dim)
    c_new = state.c + np.sqrt(h) * xi + h * b_hat
    return SLState(body=state.body, c=c_new, t=state.t + h, x_inner=x[0],
                   inner_samples=state.inner_samples, inner_burnin=state.inner_burnin)


def simulate_sl_paths(body, times, h, n_paths, rng,
                      inner_samples=DEFAULT_INNER_SAMPLES,
                      inner_burnin=DEFAULT_INNER_BURNIN):
    """Run many localization paths in lock step; snapshot c at the times.

    Every requested time must be an integer multiple of h.  Returns a
    dict {time: (n_paths, dim) array of tilt vectors}.  All paths share
    one stream; each keeps its own warm-started inner chain point.
    """
    times = sorted(float(t) for t in times)
    for t in times:
        if abs(t / h - round(t / h)) > 1e-9:
            raise ValueError("every snapshot time must be a multiple of h")
    n_steps = int(round(times[-1] / h)) if times else 0
    want = {int(round(t / h)): t for t in times}
    c = np.zeros((n_paths, body.dim))
    x = np.tile(body.center(), (n_paths, 1))
    out = {}
    if 0 in want:
        out[want[0]] = c.copy()
    t = 0.0
    for k in range(1, n_steps + 1):
        beta = None if t == 0.0 else c / t
        m = None if t == 0.0 else t
        for _ in range(inner_burnin):
            x, _ = hit_and_run_step_rows(body, x, rng, beta=beta, m=m)
        acc = np.zeros((n_paths, body.dim))
        for _ in range(inner_samples):
            x, _ = hit_and_run_step_rows(body, x, rng, beta=beta, m=m)
            acc += x
        b_hat = acc / inner_samples
        c = c + np.sqrt(h) * rng.standard_normal((n_paths, body.dim)) + h * b_hat
        t = k * h
        if k in want:
            out[want[k]] = c.copy()
    return out


def direct_center_sample(body, t_total, rng, n_samples=1):
    """Exact draws of the re-centered terminal tilt c_T / T.

    Returns X + Z with X uniform on the body (exact sampling) and
    Z ~ N(0, I / t_total); one row per sample.
    """
    if t_total <= 0:
        raise ValueError("t_total must be positive")
    x = body.sample_uniform(n_samples, rng)
    z = rng.standard_normal((n_samples, body.dim)) / np.sqrt(t_total)
    return x + z


# ------------------------------------------------------------- shell masses


def _interior_start(body, beta):
    """A chain start point inside the body, as close to beta as convenient."""
    beta = np.asarray(beta, dtype=float)
    if body.contains(beta):
        return beta.copy()
    if body.kind == "box":
        lo, hi = body.bounding_box()
        margin = 1e-9 * (hi - lo)
        return np.clip(beta, lo + margin, hi - margin)
    return body.center()


def shell_mass(body, beta, m, n_samples, rng, method="chain", burn_in=256):
    """P(sqrt(2)/2 < |x - beta| < sqrt(2)) under the Gaussian nu_{beta, m}.

    method="chain" runs a hit-and-run chain with burn-in (block standard
    error); method="rejection" uses exact samples and serves as the
    cross-check.
    """
    target = Target.truncated_gaussian(body, beta, m)
    if method == "rejection":
        pts = target.exact_sample(n_samples, rng)
        r = np.linalg.norm(pts - np.asarray(beta, dtype=float), axis=1)
        inside = (r > SHELL_LOW) & (r < SHELL_HIGH)
        p = inside.mean()
        return MCEstimate(float(p), float(np.sqrt(max(p * (1 - p), 0) / n_samples)), n_samples)
    if method != "chain":
        raise ValueError("method must be 'chain' or 'rejection'")
    est = shell_mass_batch(body, np.asarray(beta, dtype=float)[None, :], m,
                           n_samples, rng, burn_in=burn_in)
    return est[0]


def shell_mass_batch(body, betas, m, n_samples, rng, burn_in=256):
    """Chain-based shell masses for many centers at once.

    Each row of ``betas`` gets its own chain (warm-started near its
    center); estimates use block standard errors to account for the
    serial correlation of chain indicators.
    """
    betas = np.asarray(betas, dtype=float)
    n_rows = len(betas)
    x = np.vstack([_interior_start(body, b) for b in betas])
    for _ in range(int(burn_in)):
        x, _ = hit_and_run_step_rows(body, x, rng, beta=betas, m=m)
    n_blocks = 16
    hits = np.zeros(n_rows)
    block_means = np.zeros((n_blocks, n_rows))
    per_block = max(int(n_samples) // n_blocks, 1)
    total = n_blocks * per_block
    for blk in range(n_blocks):
        acc = np.zeros(n_rows)
        for _ in range(per_block):
            x, _ = hit_and_run_step_rows(body, x, rng, beta=betas, m=m)
            r = np.linalg.norm(x - betas, axis=1)
            acc += ((r > SHELL_LOW) & (r < SHELL_HIGH)).astype(float)
        block_means[blk] = acc / per_block
        hits += acc
    p = hits / total
    se = block_means.std(axis=0, ddof=1) / np.sqrt(n_blocks)
    return [MCEstimate(float(p[i]), float(se[i]), total) for i in range(n_rows)]


# --------------------------------------------------- one-dimensional process


def sample_tilt_center(omega0, alpha, sigma2, rng, size=None):
    """Draw the terminal tilt center y of the 1-d process.

    Its law is the base density convolved with N(0, 1/(alpha sigma^2)):
    a draw from the grid plus independent Gaussian noise.
    """
    if alpha * sigma2 <= 0:
        raise ValueError("need alpha * sigma2 > 0")
    z = omega0.sample(rng, size=size)
    noise_sd = 1.0 / np.sqrt(alpha * sigma2)
    if size is None:
        return float(z + noise_sd * rng.standard_normal())
    return z + noise_sd * rng.standard_normal(size)


def tilt_functional_lipschitz(omega0, alpha, sigma2, weights, y_pairs):
    """Max finite-difference ratio of y -> tilted-expectation of ``weights``.

    For per-cell weights in [0, 1] the map y -> E_{tilt(y)}[weights] is
    Lipschitz with constant sqrt(alpha sigma^2); the returned maximum of
    |G(y) - G(y~)| / |y - y~| over the supplied pairs checks that bound
    on the grid.
    """
    weights = np.asarray(weights, dtype=float)
    if np.any(weights < 0) or np.any(weights > 1):
        raise ValueError("weights must lie in [0, 1]")
    tau = alpha * sigma2

    def g(y):
        return gaussian_tilt(omega0, y, tau).expectation(weights)

    best = 0.0
    for y1, y2 in y_pairs:
        if y1 == y2:
            continue
        ratio = abs(g(y1) - g(y2)) / abs(y1 - y2)
        best = max(best, ratio)
    return best


@dataclass
class DecayCurve:
    """Per-time path averages of the simulated 1-d grid-mass process."""

    times: np.ndarray
    mean_variance: np.ndarray
    se_variance: np.ndarray
    mean_center: np.ndarray
    mean_functional: np.ndarray = None


def variance_decay_curve(omega0, sigma2, alpha, n_paths, n_steps, rng, weights=None):
    """Euler simulation of the 1-d grid-mass process; expected variance per time.

    The masses follow d omega = sigma (z - mean) dW omega, discretized as
    omega <- omega * (1 + sigma (z - mean) sqrt(h) xi) with h = alpha/n_steps
    (total mass is conserved exactly).  Returns a :class:`DecayCurve`
    including t = 0; when per-cell ``weights`` are given, the path
    average of their expectation is tracked as well.  Raises
    NumericalError when a step would drive a cell holding non-negligible
    mass negative (reduce the step size); cells below the dead-mass
    floor are clamped at zero instead, which perturbs the total by less
    than the float resolution.
    """
    if omega0.var() <= 0:
        raise ValueError("base density must have positive variance")
    dead_mass = 1e-9
    h = float(alpha) / int(n_steps)
    z = omega0.centers()
    mass = np.tile(omega0.mass, (int(n_paths), 1))
    times = [0.0]
    variances = [np.full(int(n_paths), omega0.var())]
    centers = [np.full(int(n_paths), omega0.mean())]
    functionals = None
    if weights is not None:
        weights = np.asarray(weights, dtype=float)
        functionals = [np.full(int(n_paths), omega0.expectation(weights))]
    sigma = np.sqrt(sigma2)
    scale = sigma * np.sqrt(h)
    for k in range(1, int(n_steps) + 1):
        mean = mass @ z
        xi = rng.standard_normal(int(n_paths))
        centered = z[None, :] - mean[:, None]
        factor = 1.0 + scale * xi[:, None] * centered
        if factor.min() < 0.0:
            if np.any((factor < 0) & (mass > dead_mass)):
                raise NumericalError("grid mass went negative: reduce the step size")
            np.maximum(factor, 0.0, out=factor)
        mass = mass * factor
        mass /= mass.sum(axis=1, keepdims=True)
        mean = mass @ z
        var = np.einsum("pc,pc->p", mass, (z[None, :] - mean[:, None]) ** 2)
        times.append(k * h)
        variances.append(var)
        centers.append(mean)
        if functionals is not None:
            functionals.append(mass @ weights)
    variances = np.asarray(variances)
    return DecayCurve(
        times=np.asarray(times),
        mean_variance=variances.mean(axis=1),
        se_variance=variances.std(axis=1, ddof=1) / np.sqrt(int(n_paths)),
        mean_center=np.asarray(centers).mean(axis=1),
        mean_functional=None if functionals is None else np.asarray(functionals).mean(axis=1),
    )


__all__ = [
    "SLState", "sl_step", "simulate_sl_paths", "tilted_target",
    "direct_center_sample", "shell_mass", "shell_mass_batch",
    "Grid1D", "gaussian_tilt", "sample_tilt_center",
    "tilt_functional_lipschitz", "variance_decay_curve",
    "SHELL_LOW", "SHELL_HIGH",
]
