"""Geometric random walks on convex bodies.

Hit-and-run and ball-walk samplers with exact chord laws, a
stochastic-localization simulator, mixing/conductance diagnostics, and
a library of one-dimensional logconcave densities with numeric oracles
for their universal properties.
"""

from .chains import (ChainConfig, RegularGrid, ball_walk_step, empirical_kernel_tv,
                     hit_and_run_step, kernel_cell_probabilities, lazy_step,
                     one_step_samples, run_chain, run_chain_batch, transition_density,
                     unit_ball_volume)
from .diagnostics import (Halfspace, MixingReport, conductance_mixing_bound, core_mass,
                          dirichlet_form_indicator, kernel_overlap_tv, mixing_curve,
                          reference_marginals, s_conductance, step_size_quantile,
                          tv_marginal, warm_start)
from .errors import (DegenerateChordError, DomainError, NumericalError,
                     PreconditionError, StepError)
from .geometry import (AffineMap, Chord, ConvexBody, ball_overlap_fraction, cap_fraction,
                       classify_core_point, isotropic_rescale, sample_unit_ball,
                       uniform_direction, uniform_directions)
from .grid1d import Grid1D, gaussian_tilt
from .localization import (SLState, direct_center_sample, sample_tilt_center, shell_mass,
                           shell_mass_batch, simulate_sl_paths, sl_step,
                           tilt_functional_lipschitz, tilted_target, variance_decay_curve)
from .logconcave1d import (Density1D, Gaussian1D, GridDensity1D, Laplace1D, Logistic1D,
                           Uniform1D, check_cheeger, check_density_at_zero,
                           check_max_density, check_quantile_density, check_tail,
                           cheeger_constant, interval_overlap_check, run_all_checks,
                           standard_library, standardize)
from .seeding import stream
from .stats import MCEstimate, energy_two_sample_test
from .targets import Target, TruncGauss1D, UniformSegment, truncnorm_sample

__version__ = "0.1.0"

__all__ = [
    "AffineMap", "ChainConfig", "Chord", "ConvexBody", "DegenerateChordError",
    "Density1D", "DomainError", "Gaussian1D", "Grid1D", "GridDensity1D", "Halfspace",
    "Laplace1D", "Logistic1D", "MCEstimate", "MixingReport", "NumericalError",
    "PreconditionError", "RegularGrid", "SLState", "StepError", "Target",
    "TruncGauss1D", "Uniform1D", "UniformSegment", "ball_overlap_fraction",
    "ball_walk_step", "cap_fraction", "check_cheeger", "check_density_at_zero",
    "check_max_density", "check_quantile_density", "check_tail", "cheeger_constant",
    "classify_core_point", "conductance_mixing_bound", "core_mass",
    "dirichlet_form_indicator", "direct_center_sample", "empirical_kernel_tv",
    "energy_two_sample_test", "gaussian_tilt", "hit_and_run_step",
    "interval_overlap_check", "isotropic_rescale", "kernel_cell_probabilities",
    "kernel_overlap_tv", "lazy_step", "mixing_curve", "one_step_samples",
    "reference_marginals", "run_all_checks", "run_chain", "run_chain_batch",
    "s_conductance", "sample_tilt_center", "sample_unit_ball", "shell_mass",
    "shell_mass_batch", "simulate_sl_paths", "sl_step", "standard_library",
    "standardize", "step_size_quantile", "stream", "tilt_functional_lipschitz",
    "tilted_target", "transition_density", "truncnorm_sample", "tv_marginal",
    "uniform_direction", "uniform_directions", "unit_ball_volume",
    "variance_decay_curve", "warm_start",
]
