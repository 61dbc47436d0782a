"""Convex-body oracles and geometric estimators.

A :class:`ConvexBody` bundles the oracles the samplers need: membership,
closed-form line intersection (chords), a bounding box, and an interior
point.  Supported kinds are balls, axis-aligned boxes, the solid simplex
{x >= 0, sum(x) <= scale}, H-polytopes {A x <= b} and ellipsoids
{(x-c)^T M (x-c) <= 1}.  All bodies are treated as closed sets:
membership at the exact boundary is true.

The module also provides the geometric Monte Carlo estimators used by
the diagnostics: spherical-cap fractions, the fraction of a ball around
a point covered by the body, and the classification of "core" points
(points whose 2r-ball overlaps the body in at least a 63/64 volume
fraction; that set is convex by Brunn-Minkowski).
"""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NumericalError
from .stats import MCEstimate, wilson_interval

# Volume-overlap threshold defining a "core" point: a point u is in the
# core at scale r when vol(K intersect B(u, 2r)) / vol(B(u, 2r)) >= 63/64.
CORE_OVERLAP_THRESHOLD = 63.0 / 64.0

_UNIT_NORM_TOL = 1e-12


@dataclass(frozen=True)
class Chord:
    """Intersection of a line {base + t * direction} with a body.

    The intersection is the parameter interval [t_minus, t_plus]; when
    the base point is inside the body, t_minus <= 0 <= t_plus.
    """

    base: np.ndarray
    direction: np.ndarray
    t_minus: float
    t_plus: float

    @property
    def length(self):
        return self.t_plus - self.t_minus

    def point_at(self, t):
        return self.base + t * self.direction


@dataclass(frozen=True)
class AffineMap:
    """x -> linear @ (x - shift), with an invertible linear part."""

    linear: np.ndarray
    shift: np.ndarray

    def __post_init__(self):
        cond = np.linalg.cond(self.linear)
        if not np.isfinite(cond) or cond > 1e12:
            raise NumericalError("linear part is singular or near-singular")

    def apply(self, x):
        x = np.asarray(x, dtype=float)
        return (x - self.shift) @ self.linear.T

    def inverse(self):
        inv = np.linalg.inv(self.linear)
        return AffineMap(linear=inv, shift=-self.linear @ self.shift)


class ConvexBody:
    """A compact, full-dimensional convex set with analytic oracles.

    Use the classmethod constructors (:meth:`ball`, :meth:`box`,
    :meth:`simplex`, :meth:`hpolytope`, :meth:`ellipsoid`).  Instances
    are immutable and safe to share across threads.
    """

    def __init__(self, kind, dim, params, r_inscribed_hint=None, R_circum_hint=None):
        self.kind = kind
        self.dim = int(dim)
        self._params = params
        self.r_inscribed_hint = r_inscribed_hint
        self.R_circum_hint = R_circum_hint
        self._bbox = None
        if self.dim < 1:
            raise ValueError("dimension must be >= 1")
        if r_inscribed_hint is not None and r_inscribed_hint <= 0:
            raise ValueError("r_inscribed_hint must be positive")
        if R_circum_hint is not None and R_circum_hint <= 0:
            raise ValueError("R_circum_hint must be positive")
        if (r_inscribed_hint is not None and R_circum_hint is not None
                and r_inscribed_hint > R_circum_hint):
            raise ValueError("r_inscribed_hint must not exceed R_circum_hint")
        if not self.contains(self.center()):
            raise ValueError("body is empty or degenerate: center fails membership")

    # ---------------------------------------------------------------- kinds

    @classmethod
    def ball(cls, center, radius, **hints):
        center = np.asarray(center, dtype=float)
        if radius <= 0:
            raise ValueError("radius must be positive")
        hints.setdefault("r_inscribed_hint", float(radius))
        hints.setdefault("R_circum_hint", float(radius))
        return cls("ball", center.size, {"center": center, "radius": float(radius)}, **hints)

    @classmethod
    def box(cls, lower, upper, **hints):
        lower = np.asarray(lower, dtype=float)
        upper = np.asarray(upper, dtype=float)
        if lower.shape != upper.shape or lower.ndim != 1:
            raise ValueError("lower and upper must be 1-d arrays of equal length")
        if np.any(lower >= upper):
            raise ValueError("box must have positive extent on every axis")
        n = lower.size
        a = np.vstack([np.eye(n), -np.eye(n)])
        b = np.concatenate([upper, -lower])
        params = {"lower": lower, "upper": upper, "A": a, "b": b}
        hints.setdefault("r_inscribed_hint", float(np.min(upper - lower) / 2))
        hints.setdefault("R_circum_hint", float(np.linalg.norm(upper - lower) / 2))
        return cls("box", n, params, **hints)

    @classmethod
    def simplex(cls, dim, scale=1.0, **hints):
        if scale <= 0:
            raise ValueError("scale must be positive")
        n = int(dim)
        a = np.vstack([-np.eye(n), np.ones((1, n))])
        b = np.concatenate([np.zeros(n), [float(scale)]])
        params = {"scale": float(scale), "A": a, "b": b}
        return cls("simplex", n, params, **hints)

    @classmethod
    def hpolytope(cls, a, b, **hints):
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        if a.ndim != 2 or b.ndim != 1 or a.shape[0] != b.size:
            raise ValueError("need A with shape (m, n) and b with shape (m,)")
        norms = np.linalg.norm(a, axis=1)
        if np.any(norms == 0):
            raise ValueError("every halfspace row must have a nonzero normal")
        return cls("hpolytope", a.shape[1], {"A": a, "b": b}, **hints)

    @classmethod
    def ellipsoid(cls, center, shape, **hints):
        center = np.asarray(center, dtype=float)
        shape = np.asarray(shape, dtype=float)
        if shape.shape != (center.size, center.size):
            raise ValueError("shape matrix must be n x n")
        if not np.allclose(shape, shape.T, atol=1e-12):
            raise ValueError("shape matrix must be symmetric")
        eigvals = np.linalg.eigvalsh(shape)
        if np.min(eigvals) <= 0:
            raise ValueError("shape matrix must be positive definite")
        return cls("ellipsoid", center.size, {"center": center, "shape": shape}, **hints)

    # ----------------------------------------------------------- membership

    def contains(self, x):
        """Closed-set membership test for a single point."""
        return bool(self.contains_batch(np.asarray(x, dtype=float)[None, :])[0])

    def contains_batch(self, x):
        """Vectorized membership for an (N, dim) array of points."""
        x = np.asarray(x, dtype=float)
        if x.ndim != 2 or x.shape[1] != self.dim:
            raise ValueError(f"points must have shape (N, {self.dim})")
        p = self._params
        if self.kind == "ball":
            return np.linalg.norm(x - p["center"], axis=1) <= p["radius"]
        if self.kind == "ellipsoid":
            d = x - p["center"]
            return np.einsum("ij,jk,ik->i", d, p["shape"], d) <= 1.0
        return np.all(x @ p["A"].T <= p["b"] + 0.0, axis=1)

    # --------------------------------------------------------------- chords

    def chord(self, u, theta):
        """Intersect the line {u + t*theta} with the body.

        Parameters
        ----------
        u : array
            A point of the body (raises DomainError otherwise).
        theta : array
            A unit vector (|theta| = 1 within 1e-12).

        Returns
        -------
        Chord
            With t_minus <= 0 <= t_plus.  A degenerate chord (numerically
            zero length) is returned as-is; callers that cannot use it
            are expected to resample the direction.
        """
        u = np.asarray(u, dtype=float)
        theta = np.asarray(theta, dtype=float)
        norm = np.linalg.norm(theta)
        if norm == 0.0:
            raise ValueError("direction must be nonzero")
        if abs(norm - 1.0) > _UNIT_NORM_TOL:
            raise ValueError("direction must be a unit vector")
        if not self.contains(u):
            raise DomainError("chord base point is outside the body")
        t_lo, t_hi = self.chord_bounds_batch(u[None, :], theta[None, :])
        return Chord(u, theta, float(t_lo[0]), float(t_hi[0]))

    def chord_bounds_batch(self, u, theta):
        """Chord parameter bounds for batched base points and directions.

        Both arguments have shape (N, dim); the base points are assumed
        to lie in the body.  Returns (t_minus, t_plus) arrays clipped so
        that t_minus <= 0 <= t_plus.
        """
        u = np.asarray(u, dtype=float)
        theta = np.asarray(theta, dtype=float)
        p = self._params
        if self.kind in ("ball", "ellipsoid"):
            c = p["center"]
            if self.kind == "ball":
                d = u - c
                a = np.ones(len(u))
                bq = 2.0 * np.einsum("ij,ij->i", d, theta)
                cq = np.einsum("ij,ij->i", d, d) - p["radius"] ** 2
            else:
                m = p["shape"]
                d = u - c
                md = d @ m
                a = np.einsum("ij,jk,ik->i", theta, m, theta)
                bq = 2.0 * np.einsum("ij,ij->i", md, theta)
                cq = np.einsum("ij,ij->i", md, d) - 1.0
            disc = np.maximum(bq * bq - 4.0 * a * cq, 0.0)
            root = np.sqrt(disc)
            t_lo = (-bq - root) / (2.0 * a)
            t_hi = (-bq + root) / (2.0 * a)
        else:
            at = theta @ p["A"].T
            slack = p["b"][None, :] - u @ p["A"].T
            with np.errstate(divide="ignore", invalid="ignore"):
                ratio = slack / at
            t_hi = np.min(np.where(at > 0, ratio, np.inf), axis=1)
            t_lo = np.max(np.where(at < 0, ratio, -np.inf), axis=1)
            if np.any(np.isinf(t_hi)) or np.any(np.isinf(t_lo)):
                raise NumericalError("polytope is unbounded along a chord direction")
        return np.minimum(t_lo, 0.0), np.maximum(t_hi, 0.0)

    # ------------------------------------------------------------- geometry

    def center(self):
        """An interior point (the natural center of each kind)."""
        p = self._params
        if self.kind in ("ball", "ellipsoid"):
            return p["center"].copy()
        if self.kind == "box":
            return (p["lower"] + p["upper"]) / 2.0
        if self.kind == "simplex":
            return np.full(self.dim, p["scale"] / (self.dim + 1.0))
        return self._chebyshev_center()

    def _chebyshev_center(self):
        from scipy.optimize import linprog

        p = self._params
        norms = np.linalg.norm(p["A"], axis=1)
        a_ub = np.hstack([p["A"], norms[:, None]])
        c = np.zeros(self.dim + 1)
        c[-1] = -1.0
        res = linprog(c, A_ub=a_ub, b_ub=p["b"], bounds=[(None, None)] * self.dim + [(0, None)],
                      method="highs")
        if not res.success or res.x[-1] <= 0:
            raise ValueError("polytope is empty or not full-dimensional")
        return res.x[:-1]

    def bounding_box(self):
        """Axis-aligned bounding box (lower, upper)."""
        if self._bbox is not None:
            return self._bbox
        p = self._params
        if self.kind == "box":
            bbox = (p["lower"].copy(), p["upper"].copy())
        elif self.kind == "ball":
            c, r = p["center"], p["radius"]
            bbox = (c - r, c + r)
        elif self.kind == "ellipsoid":
            half = np.sqrt(np.diag(np.linalg.inv(p["shape"])))
            bbox = (p["center"] - half, p["center"] + half)
        elif self.kind == "simplex":
            bbox = (np.zeros(self.dim), np.full(self.dim, p["scale"]))
        else:
            bbox = self._polytope_bbox()
        self._bbox = bbox
        return bbox

    def _polytope_bbox(self):
        from scipy.optimize import linprog

        p = self._params
        lower = np.empty(self.dim)
        upper = np.empty(self.dim)
        for i in range(self.dim):
            c = np.zeros(self.dim)
            for sign, out in ((1.0, lower), (-1.0, upper)):
                c[i] = sign
                res = linprog(c, A_ub=p["A"], b_ub=p["b"],
                              bounds=[(None, None)] * self.dim, method="highs")
                if not res.success:
                    raise NumericalError("polytope appears unbounded")
                out[i] = sign * res.fun if sign > 0 else -res.fun
            c[i] = 0.0
        return lower, upper

    def scale(self):
        """A characteristic length (bounding-box half-diagonal)."""
        lo, hi = self.bounding_box()
        return float(np.linalg.norm(hi - lo) / 2.0)

    def sample_uniform(self, n_samples, rng, max_proposals=50_000_000):
        """Exact uniform samples from the body.

        Boxes, balls, ellipsoids and simplices are sampled directly;
        H-polytopes fall back to rejection from the bounding box (a
        NumericalError is raised if the proposal cap is exhausted).
        """
        p = self._params
        if self.kind == "box":
            return rng.uniform(p["lower"], p["upper"], size=(n_samples, self.dim))
        if self.kind == "ball":
            z = sample_unit_ball(rng, self.dim, n_samples)
            return p["center"] + p["radius"] * z
        if self.kind == "ellipsoid":
            z = sample_unit_ball(rng, self.dim, n_samples)
            lam, vec = np.linalg.eigh(p["shape"])
            half_axes = vec @ np.diag(1.0 / np.sqrt(lam)) @ vec.T
            return p["center"] + z @ half_axes.T
        if self.kind == "simplex":
            e = rng.standard_exponential(size=(n_samples, self.dim + 1))
            return p["scale"] * e[:, :-1] / e.sum(axis=1, keepdims=True)
        lo, hi = self.bounding_box()
        out = np.empty((n_samples, self.dim))
        have = 0
        proposed = 0
        while have < n_samples:
            chunk = max(n_samples - have, 1024)
            proposed += chunk
            if proposed > max_proposals:
                raise NumericalError("rejection sampling exceeded the proposal cap")
            cand = rng.uniform(lo, hi, size=(chunk, self.dim))
            cand = cand[self.contains_batch(cand)]
            take = min(len(cand), n_samples - have)
            out[have:have + take] = cand[:take]
            have += take
        return out


# ---------------------------------------------------------------- directions


def uniform_direction(rng, n):
    """One direction drawn uniformly from the unit sphere in R^n."""
    return uniform_directions(rng, n, 1)[0]


def uniform_directions(rng, n, size):
    """(size, n) array of iid uniform unit vectors."""
    if n < 1:
        raise ValueError("dimension must be >= 1")
    v = rng.standard_normal(size=(size, n))
    norms = np.linalg.norm(v, axis=1)
    while np.any(norms == 0.0):  # probability zero, but stay exact
        bad = norms == 0.0
        v[bad] = rng.standard_normal(size=(int(bad.sum()), n))
        norms = np.linalg.norm(v, axis=1)
    return v / norms[:, None]


def sample_unit_ball(rng, n, size):
    """(size, n) array of iid uniform points in the unit ball."""
    d = uniform_directions(rng, n, size)
    r = rng.random(size) ** (1.0 / n)
    return d * r[:, None]


# ---------------------------------------------------------------- estimators


def cap_fraction(n, cos_phi, n_samples, rng):
    """Monte Carlo fraction of sphere directions with <theta, e> >= cos_phi.

    The exact fraction is bounded by exp(-n * cos_phi^2 / 2); the
    estimate comes back as an :class:`MCEstimate` so callers can test
    that bound against the sampling error.
    """
    if not 0.0 < cos_phi < 1.0:
        raise ValueError("cos_phi must lie strictly between 0 and 1")
    if n_samples <= 0:
        raise ValueError("n_samples must be positive")
    hits = 0
    remaining = int(n_samples)
    while remaining > 0:
        chunk = min(remaining, 500_000)
        d = uniform_directions(rng, n, chunk)
        hits += int(np.count_nonzero(d[:, 0] >= cos_phi))
        remaining -= chunk
    p = hits / n_samples
    se = np.sqrt(max(p * (1 - p), 0.0) / n_samples)
    return MCEstimate(float(p), float(se), int(n_samples))


def ball_overlap_fraction(body, u, t, n_samples, rng):
    """Estimate vol(K intersect B(u, t)) / vol(B(u, t)) by sampling in the ball."""
    if t <= 0:
        raise ValueError("ball radius must be positive")
    if n_samples <= 0:
        raise ValueError("n_samples must be positive")
    u = np.asarray(u, dtype=float)
    hits = 0
    remaining = int(n_samples)
    while remaining > 0:
        chunk = min(remaining, 500_000)
        pts = u + t * sample_unit_ball(rng, body.dim, chunk)
        hits += int(np.count_nonzero(body.contains_batch(pts)))
        remaining -= chunk
    p = hits / n_samples
    se = np.sqrt(max(p * (1 - p), 0.0) / n_samples)
    return MCEstimate(float(p), float(se), int(n_samples))


def classify_core_point(body, u, r, n_samples, rng, confidence_z=2.576):
    """Test whether the 2r-ball around u overlaps the body by >= 63/64.

    Returns "in", "out" or "undecided"; the undecided verdict means the
    99% confidence band of the overlap estimate straddles the threshold.
    """
    u = np.asarray(u, dtype=float)
    if r <= 0:
        raise ValueError("r must be positive")
    if not body.contains(u):
        raise DomainError("core classification needs a point of the body")
    est = ball_overlap_fraction(body, u, 2.0 * r, n_samples, rng)
    lo, hi = wilson_interval(est.estimate * est.n_samples, est.n_samples, confidence_z)
    if lo > CORE_OVERLAP_THRESHOLD:
        return "in"
    if hi < CORE_OVERLAP_THRESHOLD:
        return "out"
    return "undecided"


def isotropic_rescale(samples):
    """Affine map sending a sample cloud to (approximately) isotropic position.

    Fits the empirical mean m and covariance S and returns the map
    x -> S^{-1/2} (x - m).  Raises NumericalError when the empirical
    covariance is (numerically) singular.
    """
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 2 or samples.shape[0] < samples.shape[1] + 1:
        raise ValueError("need at least n+1 samples of dimension n")
    mean = samples.mean(axis=0)
    cov = np.cov(samples, rowvar=False)
    cov = np.atleast_2d(cov)
    lam, vec = np.linalg.eigh(cov)
    if np.min(lam) <= 1e-12 * max(np.max(lam), 1e-300):
        raise NumericalError("empirical covariance is singular: degenerate data")
    inv_sqrt = vec @ np.diag(1.0 / np.sqrt(lam)) @ vec.T
    return AffineMap(linear=inv_sqrt, shift=mean)
