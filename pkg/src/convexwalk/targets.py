"""Target densities on a convex body and their one-dimensional chord laws.

Two target families are supported: the uniform density on a body K and
the Gaussian with mean parameter ``beta`` and variance ``1/m`` truncated
to K.  Densities are kept unnormalized (the uniform density is 1 on K,
the truncated Gaussian is exp(-m/2 |x-beta|^2) on K): every quantity the
samplers and the transition kernel need is a ratio, so the normalizing
constant -- which is not generally computable -- never enters.

Restricting a target to a chord gives an explicit one-dimensional law
(a uniform segment, or a truncated Gaussian in the chord parameter),
which is sampled exactly by inverse CDF.  The truncated-Gaussian
inverse CDF mirrors the interval onto the half-axis where the Gaussian
CDF is well conditioned, so chords whose standardized endpoints are as
far out as +-37 are handled without endpoint atoms.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import log_ndtr, ndtr, ndtri

from .errors import DegenerateChordError, NumericalError

_SQRT_2PI = np.sqrt(2.0 * np.pi)

# Chords shorter than this fraction of the body scale are degenerate.
DEGENERATE_CHORD_FRACTION = 1e-12


# ------------------------------------------------------------ stable normals


def phi_interval(lo, hi):
    """Phi(hi) - Phi(lo) for the standard normal, stable in both tails."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    # evaluate on the side where the CDF is far from 1
    right = lo >= 0.0
    a = np.where(right, -hi, lo)
    b = np.where(right, -lo, hi)
    return ndtr(b) - ndtr(a)


def _log_phi_interval(lo, hi):
    """log(Phi(hi) - Phi(lo)), scalar, for underflow fallbacks."""
    if lo >= 0.0:
        lo, hi = -hi, -lo
    la, lb = log_ndtr(lo), log_ndtr(hi)
    with np.errstate(divide="ignore"):
        return lb + np.log1p(-np.exp(la - lb))


def truncnorm_sample(c, s, a, b, rng, size=None):
    """Exact draws from N(c, s^2) conditioned on [a, b].

    All of ``c``, ``a``, ``b`` may be arrays (broadcast together); the
    inverse-CDF evaluation works on the mirrored interval so that far
    one-sided truncations (standardized bounds up to ~37) produce no
    endpoint atoms.
    """
    c = np.asarray(c, dtype=float)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    alpha = (a - c) / s
    beta = (b - c) / s
    shape = np.broadcast_shapes(alpha.shape, beta.shape) if size is None else (size,)
    u = rng.random(shape)
    with np.errstate(invalid="ignore"):
        flip = (alpha + beta) > 0.0  # NaN (doubly infinite) -> no flip
    lo = np.where(flip, -beta, alpha)
    hi = np.where(flip, -alpha, beta)
    p_lo = ndtr(lo)
    p_hi = ndtr(hi)
    p = p_hi - u * (p_hi - p_lo)  # uniform on (p_lo, p_hi]
    p = np.maximum(p, 5e-324)
    z = ndtri(p)
    z = np.where(flip, -z, z)
    out = c + s * z
    return np.clip(out, a, b)


# --------------------------------------------------------------- chord laws


@dataclass(frozen=True)
class UniformSegment:
    """Uniform law of the chord parameter t on [a, b]."""

    a: float
    b: float

    def __post_init__(self):
        if not self.a < self.b:
            raise ValueError("need a < b")

    def sample(self, rng, size=None):
        return self.a + (self.b - self.a) * rng.random(size)

    def mass(self):
        """Unnormalized 1-d integral along the chord (here: the length)."""
        return self.b - self.a

    def interval_fraction(self, lo, hi):
        """Fraction of the law's mass on [lo, hi]."""
        lo = np.maximum(lo, self.a)
        hi = np.minimum(hi, self.b)
        return np.maximum(hi - lo, 0.0) / (self.b - self.a)


@dataclass(frozen=True)
class TruncGauss1D:
    """Law of t on [a, b] proportional to exp(-(t - c)^2 / (2 s^2))."""

    c: float
    s: float
    a: float
    b: float

    def __post_init__(self):
        if not self.a < self.b:
            raise ValueError("need a < b")
        if not self.s > 0:
            raise ValueError("need s > 0")

    def _std(self, t):
        return (np.asarray(t, dtype=float) - self.c) / self.s

    def sample(self, rng, size=None):
        return truncnorm_sample(self.c, self.s, self.a, self.b, rng, size=size)

    def mass(self):
        """Unnormalized integral: s * sqrt(2 pi) * (Phi(b~) - Phi(a~))."""
        return float(self.s * _SQRT_2PI * phi_interval(self._std(self.a), self._std(self.b)))

    def interval_fraction(self, lo, hi):
        lo = np.maximum(lo, self.a)
        hi = np.maximum(np.minimum(hi, self.b), lo)
        num = phi_interval(self._std(lo), self._std(hi))
        den = phi_interval(self._std(self.a), self._std(self.b))
        if np.ndim(den) == 0 and den == 0.0:
            return self._interval_fraction_log(lo, hi)
        with np.errstate(invalid="ignore", divide="ignore"):
            frac = np.where(den > 0.0, num / np.where(den > 0.0, den, 1.0), 0.0)
        return frac

    def _interval_fraction_log(self, lo, hi):
        log_den = _log_phi_interval(self._std(self.a), self._std(self.b))
        if not np.isfinite(log_den):
            raise NumericalError("chord carries no representable mass")
        lo_arr = np.atleast_1d(lo)
        hi_arr = np.atleast_1d(hi)
        out = np.zeros(lo_arr.shape)
        for i in np.ndindex(lo_arr.shape):
            if hi_arr[i] > lo_arr[i]:
                log_num = _log_phi_interval(self._std(lo_arr[i]), self._std(hi_arr[i]))
                out[i] = np.exp(log_num - log_den) if np.isfinite(log_num) else 0.0
        return out if np.ndim(lo) else float(out[0])


# ------------------------------------------------------------------ targets


class Target:
    """A sampling target: Uniform(K) or a Gaussian truncated to K.

    Construct with :meth:`uniform` or :meth:`truncated_gaussian`.  The
    mean parameter ``beta`` of the truncated Gaussian need not lie in
    the body; ``m`` is the precision (variance ``1/m`` per axis).
    """

    def __init__(self, body, kind, beta=None, m=None):
        self.body = body
        self.kind = kind
        self.beta = None if beta is None else np.asarray(beta, dtype=float)
        self.m = None if m is None else float(m)
        if kind == "truncated_gaussian":
            if self.m is None or self.m <= 0:
                raise ValueError("truncated Gaussian needs m > 0")
            if self.beta is None or self.beta.shape != (body.dim,):
                raise ValueError("beta must have the body dimension")

    @classmethod
    def uniform(cls, body):
        return cls(body, "uniform")

    @classmethod
    def truncated_gaussian(cls, body, beta, m):
        return cls(body, "truncated_gaussian", beta=beta, m=m)

    @property
    def is_uniform(self):
        return self.kind == "uniform"

    # -------------------------------------------------------------- density

    def log_density(self, x):
        """Unnormalized log density (0 or -m/2 |x-beta|^2 inside; -inf outside)."""
        return float(self.log_density_batch(np.asarray(x, dtype=float)[None, :])[0])

    def log_density_batch(self, x):
        x = np.asarray(x, dtype=float)
        inside = self.body.contains_batch(x)
        if self.is_uniform:
            vals = np.zeros(len(x))
        else:
            d = x - self.beta
            vals = -0.5 * self.m * np.einsum("ij,ij->i", d, d)
        return np.where(inside, vals, -np.inf)

    # ---------------------------------------------------------- chord laws

    def restrict_to_chord(self, chord):
        """Exact law of the chord parameter t under this target.

        Raises DegenerateChordError for numerically zero-length chords.
        """
        if chord.length < DEGENERATE_CHORD_FRACTION * self.body.scale():
            raise DegenerateChordError("chord has numerically zero length")
        if self.is_uniform:
            return UniformSegment(chord.t_minus, chord.t_plus)
        c = float(np.dot(self.beta - chord.base, chord.direction))
        s = 1.0 / np.sqrt(self.m)
        return TruncGauss1D(c, s, chord.t_minus, chord.t_plus)

    # ------------------------------------------------------- exact sampling

    def exact_sample(self, n_samples, rng, max_proposals=50_000_000):
        """Exact (non-chain) samples; used by diagnostics as ground truth.

        Uniform targets sample the body directly (rejection from the
        bounding box where no direct scheme exists).  Truncated
        Gaussians on boxes factor into per-axis truncated normals; on
        other bodies the untruncated Gaussian serves as the rejection
        envelope, which is exact as well.
        """
        if self.is_uniform:
            return self.body.sample_uniform(n_samples, rng, max_proposals=max_proposals)
        if self.body.kind == "box":
            lo, hi = self.body.bounding_box()
            s = 1.0 / np.sqrt(self.m)
            cols = [truncnorm_sample(np.full(n_samples, self.beta[i]), s, lo[i], hi[i], rng)
                    for i in range(self.body.dim)]
            return np.column_stack(cols)
        out = np.empty((n_samples, self.body.dim))
        have = 0
        proposed = 0
        s = 1.0 / np.sqrt(self.m)
        while have < n_samples:
            chunk = max(n_samples - have, 1024)
            proposed += chunk
            if proposed > max_proposals:
                raise NumericalError("Gaussian rejection exceeded the proposal cap")
            cand = self.beta + s * rng.standard_normal((chunk, self.body.dim))
            cand = cand[self.body.contains_batch(cand)]
            take = min(len(cand), n_samples - have)
            out[have:have + take] = cand[:take]
            have += take
        return out

    # ----------------------------------------------------- axis marginals

    def axis_marginal_cdf(self, axis):
        """Closed-form CDF of coordinate ``axis`` under the target.

        Available for uniform boxes, uniform balls and truncated
        Gaussians on boxes; raises ValueError otherwise.
        """
        body = self.body
        if self.is_uniform and body.kind == "box":
            lo, hi = body.bounding_box()
            a, b = lo[axis], hi[axis]
            return lambda x: np.clip((np.asarray(x, dtype=float) - a) / (b - a), 0.0, 1.0)
        if self.is_uniform and body.kind == "ball":
            from scipy.stats import beta as beta_dist

            c = body._params["center"][axis]
            r = body._params["radius"]
            half = (body.dim + 1) / 2.0
            return lambda x: beta_dist.cdf((np.asarray(x, dtype=float) - c + r) / (2 * r), half, half)
        if not self.is_uniform and body.kind == "box":
            lo, hi = body.bounding_box()
            s = 1.0 / np.sqrt(self.m)
            c = self.beta[axis]
            a, b = lo[axis], hi[axis]
            den = phi_interval((a - c) / s, (b - c) / s)
            if den == 0.0:
                raise NumericalError("axis marginal mass underflows")

            def cdf(x):
                x = np.clip(np.asarray(x, dtype=float), a, b)
                return phi_interval((a - c) / s, (x - c) / s) / den

            return cdf
        raise ValueError(f"no closed-form axis marginal for {self.kind} on {body.kind}")

    def axis_tail_prob(self, axis, threshold):
        """P(x_axis > threshold) where the axis marginal has a closed form."""
        cdf = self.axis_marginal_cdf(axis)
        return float(1.0 - cdf(threshold))
