"""Gridded one-dimensional densities.

A Grid1D stores per-cell probability mass on an equally spaced grid.
Cell masses are midpoint values of the density times the spacing,
renormalized; tilting and functionals below follow the same midpoint
convention, so discretization errors cancel in conjugacy identities.
"""

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError

MIN_CELLS = 64


@dataclass(frozen=True)
class Grid1D:
    """Probability masses on the cells of an equal-spacing grid."""

    z_min: float
    z_max: float
    mass: np.ndarray

    def __post_init__(self):
        mass = np.asarray(self.mass, dtype=float)
        if mass.ndim != 1 or mass.size < MIN_CELLS:
            raise ValueError(f"need at least {MIN_CELLS} cells")
        if np.any(mass < 0):
            raise ValueError("cell masses must be nonnegative")
        total = mass.sum()
        if not np.isfinite(total) or abs(total - 1.0) > 1e-12:
            raise ValueError("cell masses must sum to 1 (renormalize first)")
        if not self.z_min < self.z_max:
            raise ValueError("need z_min < z_max")
        object.__setattr__(self, "mass", mass)

    @classmethod
    def from_density(cls, pdf, z_min, z_max, n_cells):
        """Discretize a density by midpoint evaluation and renormalization."""
        z = cls._centers(z_min, z_max, n_cells)
        vals = np.asarray(pdf(z), dtype=float)
        if np.any(vals < 0):
            raise ValueError("density must be nonnegative")
        total = vals.sum()
        if total <= 0:
            raise NumericalError("density mass underflows on the grid")
        return cls(float(z_min), float(z_max), vals / total)

    @classmethod
    def from_samples(cls, samples, n_cells, z_min=None, z_max=None):
        """Histogram samples into a Grid1D."""
        samples = np.asarray(samples, dtype=float)
        lo = samples.min() if z_min is None else z_min
        hi = samples.max() if z_max is None else z_max
        counts, _ = np.histogram(samples, bins=n_cells, range=(lo, hi))
        total = counts.sum()
        if total == 0:
            raise ValueError("no samples fall inside the grid")
        return cls(float(lo), float(hi), counts / total)

    @staticmethod
    def _centers(z_min, z_max, n_cells):
        h = (z_max - z_min) / n_cells
        return z_min + h * (np.arange(n_cells) + 0.5)

    @property
    def n_cells(self):
        return self.mass.size

    @property
    def spacing(self):
        return (self.z_max - self.z_min) / self.n_cells

    def centers(self):
        return self._centers(self.z_min, self.z_max, self.n_cells)

    def density(self):
        """Per-cell density values (mass / spacing)."""
        return self.mass / self.spacing

    def mean(self):
        return float(np.dot(self.centers(), self.mass))

    def var(self):
        z = self.centers()
        m = self.mean()
        return float(np.dot((z - m) ** 2, self.mass))

    def expectation(self, weights):
        """Sum of weights * mass; the grid analogue of integrating a [0,1] function."""
        weights = np.asarray(weights, dtype=float)
        if weights.shape != self.mass.shape:
            raise ValueError("weights must match the number of cells")
        return float(np.dot(weights, self.mass))

    def cdf_values(self):
        return np.cumsum(self.mass)

    def sample(self, rng, size=None):
        """Draws from the piecewise-constant density (cell + in-cell uniform)."""
        n = 1 if size is None else int(size)
        idx = rng.choice(self.n_cells, size=n, p=self.mass)
        vals = self.z_min + (idx + rng.random(n)) * self.spacing
        return float(vals[0]) if size is None else vals

    def standardized(self):
        """Affinely rescaled copy with mean 0 and variance 1."""
        sd = np.sqrt(self.var())
        if sd <= 0:
            raise NumericalError("grid density has degenerate variance")
        m = self.mean()
        return Grid1D((self.z_min - m) / sd, (self.z_max - m) / sd, self.mass.copy())


def gaussian_tilt(omega, y, tau):
    """Multiply a Grid1D by exp(-(tau/2) (z - y)^2) and renormalize.

    tau accumulates (time x sigma^2) of the one-dimensional localization;
    tau = 0 returns the input unchanged.  Raises NumericalError when the
    tilt pushes all representable mass off the grid.
    """
    if tau < 0:
        raise ValueError("tau must be >= 0")
    if tau == 0.0:
        return omega
    z = omega.centers()
    log_w = -0.5 * tau * (z - y) ** 2
    if log_w.max() < -700.0:
        # even the nearest cell keeps less than exp(-700) of its mass: the
        # grid no longer carries representable mass under this tilt
        raise NumericalError("tilt underflow: center lies too far outside the grid")
    log_w -= log_w.max()
    w = omega.mass * np.exp(log_w)
    total = w.sum()
    if total <= 0 or not np.isfinite(total):
        raise NumericalError("tilt underflow: center lies too far outside the grid")
    return Grid1D(omega.z_min, omega.z_max, w / total)
