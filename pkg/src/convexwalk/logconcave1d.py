"""One-dimensional logconcave densities and numeric oracles for their
universal properties.

Every isotropic (mean-0, variance-1) logconcave density on the line
satisfies a list of classical bounds: its maximum is at most 1, its
value at 0 is at least 1/8, its tails decay like exp(-t+1), its value
at the delta-quantiles is at least delta/(8e) with derivative bounded
by 2/delta there, and its half-line isoperimetric ratio is at least
log(2)/2.  The checks in this module evaluate those quantities
numerically for a density library (Gaussian, uniform, Laplace,
logistic, and gridded fits); they must pass for every library member,
so a failure flags an implementation bug rather than new mathematics.

Closed-form comparisons use tolerance 1e-9; grid/quadrature comparisons
use 1e-6.  The tolerances are deliberately fixed, not configurable, so
the checks are stable across runs.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy import stats as sps
from scipy.integrate import quad

from .errors import PreconditionError
from .grid1d import Grid1D

CLOSED_FORM_TOL = 1e-9
GRID_TOL = 1e-6
DENSITY_AT_ZERO_BOUND = 0.125
CHEEGER_BOUND = np.log(2.0) / 2.0
QUANTILE_DENSITY_FACTOR = 1.0 / (8.0 * np.e)


@dataclass
class CheckResult:
    """Outcome of one numeric check: value compared against bound."""

    name: str
    passed: bool
    value: float
    bound: float
    direction: str  # "le" or "ge"
    detail: dict = field(default_factory=dict)

    @property
    def margin(self):
        return self.bound - self.value if self.direction == "le" else self.value - self.bound

    def to_dict(self):
        return {"check": self.name, "value": float(self.value), "bound": float(self.bound),
                "direction": self.direction, "margin": float(self.margin),
                "passed": bool(self.passed)}


class Density1D:
    """Base class: a density on the line with pdf/cdf/quantiles/moments."""

    kind = "abstract"

    def pdf(self, x):
        raise NotImplementedError

    def cdf(self, x):
        raise NotImplementedError

    def ppf(self, q):
        raise NotImplementedError

    def mean(self):
        raise NotImplementedError

    def var(self):
        raise NotImplementedError

    def support(self):
        """Numeric support (lo, hi); quantile-clipped for infinite tails."""
        return float(self.ppf(1e-12)), float(self.ppf(1.0 - 1e-12))

    @property
    def is_isotropic(self):
        return abs(self.mean()) <= 1e-8 and abs(self.var() - 1.0) <= 1e-8

    def interior_grid(self, n_points=8193, q_clip=1e-9):
        lo, hi = float(self.ppf(q_clip)), float(self.ppf(1.0 - q_clip))
        pad = 1e-9 * (hi - lo)
        return np.linspace(lo + pad, hi - pad, n_points)

    def validate(self, logconcave_tol=CLOSED_FORM_TOL, n_points=4097):
        """Assert unit mass (quadrature) and grid logconcavity of log pdf."""
        lo, hi = self.support()
        total, _ = quad(self.pdf, lo, hi, limit=200)
        if abs(total - 1.0) > 1e-10 + 1e-12:
            raise ValueError(f"density integrates to {total}, not 1")
        z = self.interior_grid(n_points)
        logp = np.log(np.maximum(self.pdf(z), 1e-300))
        second = np.diff(logp, 2)
        if np.max(second) > logconcave_tol:
            raise ValueError("density is not logconcave on the grid")
        return True


class _ScipyDensity(Density1D):
    """Density backed by a frozen scipy distribution."""

    def __init__(self, dist):
        self._dist = dist

    def pdf(self, x):
        return self._dist.pdf(x)

    def cdf(self, x):
        return self._dist.cdf(x)

    def ppf(self, q):
        return self._dist.ppf(q)

    def mean(self):
        return float(self._dist.mean())

    def var(self):
        return float(self._dist.var())


class Gaussian1D(_ScipyDensity):
    kind = "gaussian"

    def __init__(self, sigma=1.0):
        if sigma <= 0:
            raise ValueError("sigma must be positive")
        self.sigma = float(sigma)
        super().__init__(sps.norm(0.0, sigma))

    def standardized(self):
        return Gaussian1D(1.0)


class Uniform1D(_ScipyDensity):
    kind = "uniform"

    def __init__(self, a, b):
        if not a < b:
            raise ValueError("need a < b")
        self.a, self.b = float(a), float(b)
        super().__init__(sps.uniform(a, b - a))

    def support(self):
        return self.a, self.b

    def standardized(self):
        half = np.sqrt(3.0)
        return Uniform1D(-half, half)


class Laplace1D(_ScipyDensity):
    kind = "laplace"

    def __init__(self, scale=1.0):
        if scale <= 0:
            raise ValueError("scale must be positive")
        self.scale = float(scale)
        super().__init__(sps.laplace(0.0, scale))

    def standardized(self):
        return Laplace1D(1.0 / np.sqrt(2.0))  # variance 2 b^2 = 1


class Logistic1D(_ScipyDensity):
    kind = "logistic"

    def __init__(self, scale=1.0):
        if scale <= 0:
            raise ValueError("scale must be positive")
        self.scale = float(scale)
        super().__init__(sps.logistic(0.0, scale))

    def standardized(self):
        return Logistic1D(np.sqrt(3.0) / np.pi)  # variance s^2 pi^2 / 3 = 1


class GridDensity1D(Density1D):
    """Piecewise-constant density defined by a Grid1D mass vector."""

    kind = "grid"

    def __init__(self, grid):
        if not isinstance(grid, Grid1D):
            raise ValueError("GridDensity1D wraps a Grid1D")
        self.grid = grid
        self._cum = np.concatenate([[0.0], grid.cdf_values()])
        self._edges = np.linspace(grid.z_min, grid.z_max, grid.n_cells + 1)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        idx = np.clip(np.floor((x - self.grid.z_min) / self.grid.spacing).astype(int),
                      0, self.grid.n_cells - 1)
        dens = self.grid.density()[idx]
        inside = (x >= self.grid.z_min) & (x <= self.grid.z_max)
        return np.where(inside, dens, 0.0)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.interp(x, self._edges, self._cum)

    def ppf(self, q):
        # the grid CDF is piecewise linear, so interpolation inverts it
        # exactly (well below the 1e-10 probability tolerance)
        q = np.asarray(q, dtype=float)
        return np.interp(q, self._cum, self._edges)

    def support(self):
        return self.grid.z_min, self.grid.z_max

    def mean(self):
        return self.grid.mean()

    def var(self):
        return self.grid.var()

    def standardized(self):
        return GridDensity1D(self.grid.standardized())

    def validate(self, logconcave_tol=CLOSED_FORM_TOL, n_points=None):
        # cell masses sum to 1 exactly by construction; logconcavity is
        # checked on the log cell masses over the positive support
        mass = self.grid.mass
        if abs(mass.sum() - 1.0) > 1e-10:
            raise ValueError("grid masses do not sum to 1")
        positive = mass > 0
        logp = np.where(positive, np.log(np.maximum(mass, 1e-300)), np.nan)
        second = logp[2:] - 2 * logp[1:-1] + logp[:-2]
        second = second[~np.isnan(second)]
        if second.size and np.max(second) > logconcave_tol:
            raise ValueError("density is not logconcave on the grid")
        return True


def standardize(density):
    """Affine rescaling to mean 0, variance 1 (within 1e-8)."""
    if density.var() <= 0 or not np.isfinite(density.var()):
        raise ValueError("density has degenerate variance")
    out = density.standardized()
    if not out.is_isotropic:
        raise ValueError("standardization failed to reach isotropic position")
    return out


def standard_library():
    """The four analytic library densities, already standardized."""
    return [standardize(Gaussian1D(1.0)), standardize(Uniform1D(0.0, 1.0)),
            standardize(Laplace1D(1.0)), standardize(Logistic1D(1.0))]


def _require_isotropic(density):
    if not density.is_isotropic:
        raise ValueError("check requires an isotropized density")


# -------------------------------------------------------------------- checks


def check_max_density(density, tol=CLOSED_FORM_TOL):
    """Grid maximum of the density; must be at most 1."""
    _require_isotropic(density)
    z = density.interior_grid()
    vals = np.asarray(density.pdf(z))
    k = int(np.argmax(vals))
    value = float(vals[k])
    return CheckResult("max-density", value <= 1.0 + tol, value, 1.0, "le",
                       {"argmax": float(z[k])})


def check_density_at_zero(density, tol=CLOSED_FORM_TOL):
    """Density at the origin; must be at least 1/8."""
    _require_isotropic(density)
    value = float(density.pdf(0.0))
    return CheckResult("density-at-zero", value >= DENSITY_AT_ZERO_BOUND - tol,
                       value, DENSITY_AT_ZERO_BOUND, "ge")


def check_tail(density, t_grid, tol=CLOSED_FORM_TOL):
    """Two-sided tail mass P(|X| >= t) against exp(-t + 1), per t."""
    _require_isotropic(density)
    worst = None
    for t in t_grid:
        tail = float(1.0 - density.cdf(t) + density.cdf(-t))
        bound = float(np.exp(-t + 1.0))
        res = CheckResult("tail", tail <= bound + tol, tail, bound, "le", {"t": float(t)})
        if worst is None or res.margin < worst.margin:
            worst = res
    return worst


def check_quantile_density(density, delta, density_tol=CLOSED_FORM_TOL,
                           derivative_tol=GRID_TOL):
    """Density and derivative bounds at (and between) the delta-quantiles.

    The density at the delta- and (1-delta)-quantiles, and at grid
    points between them, must be at least delta/(8e); the derivative
    magnitude at the quantiles must not exceed 2/delta (finite
    differences strictly inside the support).
    """
    _require_isotropic(density)
    if not 0.0 < delta <= 1.0 / np.e:
        raise ValueError("delta must lie in (0, 1/e]")
    lo_q = float(density.ppf(delta))
    hi_q = float(density.ppf(1.0 - delta))
    bound = QUANTILE_DENSITY_FACTOR * delta
    grid = np.linspace(lo_q, hi_q, 2049)
    dens = np.asarray(density.pdf(grid))
    min_density = float(dens.min())
    density_ok = min_density >= bound - density_tol

    sup_lo, sup_hi = density.support()
    h = max((sup_hi - sup_lo) * 1e-6, 1e-9)
    deriv_bound = 2.0 / delta
    max_abs_deriv = 0.0
    for zq in (lo_q, hi_q):
        a = max(zq - h, sup_lo + h)
        b = min(zq + h, sup_hi - h)
        if b <= a:
            continue
        d = abs(float(density.pdf(b)) - float(density.pdf(a))) / (b - a)
        max_abs_deriv = max(max_abs_deriv, d)
    deriv_ok = max_abs_deriv <= deriv_bound + derivative_tol
    return CheckResult("quantile-density", bool(density_ok and deriv_ok),
                       min_density, bound, "ge",
                       {"delta": float(delta), "quantiles": [lo_q, hi_q],
                        "max_abs_derivative": max_abs_deriv,
                        "derivative_bound": deriv_bound})


def cheeger_constant(density, n_points=8193):
    """Half-line isoperimetric constant inf_c p(c)/min(F(c), 1-F(c)).

    For one-dimensional logconcave measures the infimum over all cuts is
    attained on half-lines, so scanning cut points on a fine grid
    evaluates the constant itself.
    """
    _require_isotropic(density)
    lo, hi = float(density.ppf(1e-4)), float(density.ppf(1.0 - 1e-4))
    c = np.linspace(lo, hi, n_points)
    p = np.asarray(density.pdf(c))
    f = np.clip(np.asarray(density.cdf(c)), 1e-300, 1.0)
    ratio = p / np.minimum(f, 1.0 - f + 1e-300)
    return float(ratio.min())


def check_cheeger(density, tol=GRID_TOL):
    value = cheeger_constant(density)
    return CheckResult("cheeger", value >= CHEEGER_BOUND - tol, value, CHEEGER_BOUND, "ge")


def interval_overlap_check(p, p_tilde, delta, n_quad=1 << 16):
    """Pointwise closeness of two logconcave densities between quantiles.

    Requires TV(p, p~) < delta^2 / 1e5 (verified here by quadrature;
    PreconditionError otherwise).  The check then asserts
    p~(z) / p(z) > 0.9 on a grid spanning the delta and (1 - delta)
    quantiles of p.
    """
    _require_isotropic(p)
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    lo = min(p.support()[0], p_tilde.support()[0])
    hi = max(p.support()[1], p_tilde.support()[1])
    z = np.linspace(lo, hi, n_quad + 1)
    tv = 0.5 * float(np.trapezoid(np.abs(np.asarray(p.pdf(z)) - np.asarray(p_tilde.pdf(z))), z))
    threshold = delta * delta / 1e5
    if tv >= threshold:
        raise PreconditionError(
            f"TV {tv:.3e} is not below the admissible threshold {threshold:.3e}")
    a = float(p.ppf(delta))
    b = float(p.ppf(1.0 - delta))
    grid = np.linspace(a, b, 4097)
    ratio = np.asarray(p_tilde.pdf(grid)) / np.asarray(p.pdf(grid))
    value = float(ratio.min())
    return CheckResult("interval-overlap", value > 0.9, value, 0.9, "ge",
                       {"tv": tv, "delta": float(delta), "interval": [a, b]})


def run_all_checks(densities=None, deltas=(0.05, 0.1, 0.3), t_grid=(1.0, 2.0, 3.0, 5.0),
                   density_tol=CLOSED_FORM_TOL, grid_tol=GRID_TOL):
    """Evaluate the full check table for a density library.

    Returns a list of rows {density, check, value, bound, margin,
    passed} ready for JSON serialization.
    """
    if densities is None:
        densities = standard_library()
    rows = []
    for d in densities:
        results = [check_max_density(d, tol=density_tol),
                   check_density_at_zero(d, tol=density_tol),
                   check_tail(d, t_grid, tol=density_tol),
                   check_cheeger(d, tol=grid_tol)]
        for delta in deltas:
            results.append(check_quantile_density(d, delta, density_tol=density_tol,
                                                  derivative_tol=grid_tol))
        for res in results:
            row = res.to_dict()
            row["density"] = d.kind
            rows.append(row)
    return rows
