import numpy as np
import pytest

from convexwalk.chains import ChainConfig
from convexwalk.diagnostics import (Halfspace, conductance_mixing_bound, core_mass,
                                    dirichlet_form_indicator, kernel_overlap_tv,
                                    mixing_curve, reference_marginals, s_conductance,
                                    step_size_quantile, tv_marginal, warm_start)
from convexwalk.errors import PreconditionError
from convexwalk.geometry import ConvexBody
from convexwalk.targets import Target

from conftest import rng_for

SQ3 = np.sqrt(3.0)


def square(half=1.0):
    return ConvexBody.box([-half, -half], [half, half])


def axis_partition(offset=0.0, dim=2):
    normal = np.zeros(dim)
    normal[0] = 1.0
    return Halfspace(normal, offset)


# ---------------------------------------------------------------- tv marginal


def test_tv_marginal_reference_self():
    rng = rng_for("tv-self")
    body = square()
    target = Target.uniform(body)
    samples = target.exact_sample(100_000, rng)
    res = tv_marginal(samples, reference_marginals(target), 20)
    assert res.tv <= res.noise_floor + 0.01
    assert res.tv <= 0.015  # multinomial fluctuation level at this budget


def test_tv_marginal_disjoint_supports():
    rng = rng_for("tv-shift")
    samples = rng.uniform(0.0, 1.0, size=(100_000, 1))
    ref = [(lambda x: np.clip(np.asarray(x, dtype=float) - 0.5, 0.0, 1.0), 0.5, 1.5)]
    res = tv_marginal(samples, ref, 30)
    assert res.tv == pytest.approx(0.5, abs=0.02)


def test_tv_marginal_input_validation():
    with pytest.raises(ValueError):
        tv_marginal(np.zeros((10, 2)), [], 10)


# ----------------------------------------------------------------- warm start


def test_warm_start_m1_is_target():
    rng = rng_for("warm-1")
    body = square()
    ws = warm_start(body, 1.0, rng)
    pts = ws.sample(50_000, rng)
    res = tv_marginal(pts, reference_marginals(Target.uniform(body)), 20)
    assert res.tv < 0.02


def test_warm_start_halving_and_support():
    rng = rng_for("warm-2")
    body = square()
    ws = warm_start(body, 2.0, rng)
    assert ws.offset == pytest.approx(0.0, abs=0.02)
    pts = ws.sample(50_000, rng)
    assert body.contains_batch(pts).all()
    assert (pts @ ws.direction <= ws.offset).all()


def test_warm_start_density_ratio_bounded():
    rng = rng_for("warm-ratio")
    body = square()
    m = 2.0
    ws = warm_start(body, m, rng)
    warm = ws.sample(200_000, rng)
    exact = body.sample_uniform(200_000, rng)
    bins = np.linspace(-1.0, 1.0, 21)
    h_warm, _ = np.histogram(warm[:, 0], bins=bins, density=True)
    h_exact, _ = np.histogram(exact[:, 0], bins=bins, density=True)
    occupied = h_warm > 0
    ratio = h_warm[occupied] / h_exact[occupied]
    assert ratio.max() <= m * 1.05


def test_warm_start_too_warm():
    rng = rng_for("warm-big")
    with pytest.raises(PreconditionError):
        warm_start(square(), 1e7, rng)


# ---------------------------------------------------------------- conductance


def test_s_conductance_independence_kernel():
    rng = rng_for("cond-indep")
    body = square()
    target = Target.uniform(body)
    part = axis_partition(0.0)
    resample = lambda x, r: target.exact_sample(len(x), r)
    est0 = s_conductance(ChainConfig(), target, part, 0.0, 400_000, rng, step_fn=resample)
    assert est0.estimate == pytest.approx(0.5, abs=3 * est0.se)
    est5 = s_conductance(ChainConfig(), target, part, 0.05, 400_000, rng, step_fn=resample)
    assert est5.estimate == pytest.approx(0.25 / 0.45, abs=3 * est5.se)


def test_s_conductance_lazy_halves():
    rng = rng_for("cond-lazy")
    body = square()
    target = Target.uniform(body)
    part = axis_partition(0.0)
    plain = s_conductance(ChainConfig(lazy=False), target, part, 0.0, 400_000, rng)
    lazy = s_conductance(ChainConfig(lazy=True), target, part, 0.0, 400_000, rng)
    assert lazy.estimate == pytest.approx(plain.estimate / 2,
                                          abs=3 * np.hypot(lazy.se, plain.se / 2))


def test_s_conductance_precondition():
    rng = rng_for("cond-precond")
    body = square()
    with pytest.raises(PreconditionError):
        s_conductance(ChainConfig(), Target.uniform(body), axis_partition(5.0), 0.05,
                      10_000, rng)


def test_dirichlet_form_lazy_halving():
    rng = rng_for("dirichlet-lazy")
    body = square()
    target = Target.uniform(body)
    part = axis_partition(0.0)
    plain = dirichlet_form_indicator(ChainConfig(lazy=False), target, part, 400_000, rng)
    lazy = dirichlet_form_indicator(ChainConfig(lazy=True), target, part, 400_000, rng)
    assert lazy.estimate == pytest.approx(plain.estimate / 2,
                                          abs=3 * np.hypot(lazy.se, plain.se / 2))


# -------------------------------------------------------------- mixing bound


def test_mixing_bound_values():
    assert conductance_mixing_bound(2.0, 0.05, 0.1, 0) == pytest.approx(2.1)
    val = conductance_mixing_bound(2.0, 0.05, 0.1, 1000)
    assert val == pytest.approx(0.1 + 2.0 * (1 - 0.005) ** 1000, rel=1e-12)
    assert val == pytest.approx(0.1133, abs=2e-4)


def test_mixing_bound_monotonicity():
    grid_n = [0, 10, 100, 1000, 10_000]
    vals = [conductance_mixing_bound(3.0, 0.02, 0.2, n) for n in grid_n]
    assert all(b <= a for a, b in zip(vals, vals[1:]))
    assert vals[-1] == pytest.approx(3.0 * 0.02, abs=1e-6)
    phis = [0.05, 0.1, 0.2, 0.5, 1.0]
    vals_phi = [conductance_mixing_bound(3.0, 0.02, p, 200) for p in phis]
    assert all(b <= a for a, b in zip(vals_phi, vals_phi[1:]))
    with pytest.raises(ValueError):
        conductance_mixing_bound(2.0, 0.7, 0.1, 10)


# ------------------------------------------------------------- step quantile


def test_step_quantile_disc():
    rng = rng_for("fu-disc")
    est = step_size_quantile(Target.uniform(ConvexBody.ball([0.0, 0.0], 1.0)),
                             [0.0, 0.0], 100_000, rng)
    assert est.estimate == pytest.approx(0.125, abs=0.005)
    assert 0 < est.se < 0.005


def test_step_quantile_scale_equivariance():
    rng = rng_for("fu-scale")
    lam = 2.5
    small = square(1.0)
    big = square(lam)
    u_small = np.array([0.3, -0.4])
    est_small = step_size_quantile(Target.uniform(small), u_small, 60_000, rng)
    est_big = step_size_quantile(Target.uniform(big), lam * u_small, 60_000, rng)
    tol = 2 * (lam * est_small.se + est_big.se)
    assert est_big.estimate == pytest.approx(lam * est_small.estimate, abs=tol)


def test_step_quantile_lower_bound_instance():
    rng = rng_for("fu-bound")
    n = 4
    body = ConvexBody.box([-SQ3] * n, [SQ3] * n)
    r = 1.0 / (32.0 * np.sqrt(n))
    target = Target.truncated_gaussian(body, np.zeros(n), float(n))
    bound = (1.0 / 128.0) * min(2 * r, 1.0 / (8.0 * np.sqrt(n)))
    for _ in range(5):
        u = rng.standard_normal(n)
        u *= rng.random() ** (1 / n) * np.sqrt(2.0) / np.linalg.norm(u)
        assert body.contains(u)
        est = step_size_quantile(target, u, 20_000, rng)
        assert est.estimate >= bound


# -------------------------------------------------------------- kernel overlap


def test_kernel_overlap_identical_points():
    body = ConvexBody.ball([0.0, 0.0], 1.0)
    assert kernel_overlap_tv(Target.uniform(body), [0.0, 0.0], [0.0, 0.0], 30) == 0.0


def test_kernel_overlap_close_points_small():
    body = ConvexBody.ball([0.0, 0.0], 1.0)
    tv = kernel_overlap_tv(Target.uniform(body), [0.0, 0.0], [0.01, 0.0], 50)
    assert tv < 0.2


def test_kernel_overlap_distant_points_large():
    body = ConvexBody.box([-1.0, -0.05], [1.0, 0.05])
    tv = kernel_overlap_tv(Target.uniform(body), [-0.9, 0.0], [0.9, 0.0], 50)
    assert tv > 0.8


def test_kernel_overlap_bounded_away_from_one():
    # close core points under a localized Gaussian keep overlapping kernels
    rng = rng_for("overlap-conclusion")
    n = 2
    body = ConvexBody.box([-SQ3] * n, [SQ3] * n)
    beta = np.zeros(n)
    target = Target.truncated_gaussian(body, beta, float(n))
    u = np.array([0.8, 0.1])  # |u - beta| inside (1/sqrt2, sqrt2)
    fu = step_size_quantile(target, u, 40_000, rng)
    v = u + np.array([1.0, 0.0]) * min(2.0 / np.sqrt(n) * min(fu.estimate, 1.0), 0.05) / 2
    tv = kernel_overlap_tv(target, u, v, 50)
    assert tv < 1.0 - 0.01 * min(np.sqrt(n) * fu.estimate, 1.0)


def test_kernel_overlap_sampled_route():
    rng = rng_for("overlap-sampled")
    body = ConvexBody.ball([0.0, 0.0], 1.0)
    target = Target.uniform(body)
    quad = kernel_overlap_tv(target, [0.0, 0.0], [0.4, 0.0], 40)
    sampled = kernel_overlap_tv(target, [0.0, 0.0], [0.4, 0.0], 40,
                                n_samples=400_000, rng=rng)
    assert sampled == pytest.approx(quad, abs=0.02)


# ------------------------------------------------------------------ core mass


def test_core_mass_small_radius_near_one():
    rng = rng_for("core-tiny")
    body = ConvexBody.box([-SQ3, -SQ3], [SQ3, SQ3])
    est = core_mass(body, 0.01, 200, rng)
    assert est.estimate >= 0.97


def test_core_mass_lower_bound_box():
    rng = rng_for("core-bound")
    body = ConvexBody.box([-SQ3, -SQ3], [SQ3, SQ3])
    r = 0.05
    est = core_mass(body, r, 300, rng)
    assert est.estimate >= 1.0 - 2.0 * np.sqrt(2.0) * r - 3.0 * est.se


# ---------------------------------------------------------------- mixing curve


def test_mixing_curve_stationary_start():
    rng = rng_for("mix-stationary")
    body = square()
    target = Target.uniform(body)
    sampler = lambda n, r: target.exact_sample(n, r)
    report = mixing_curve(ChainConfig(lazy=True), target, sampler, [1, 4, 16], 4000, rng)
    for tv, floor in zip(report.tv, report.noise_floor):
        assert tv <= floor + 0.015


def test_mixing_curve_warm_start_decreasing():
    rng = rng_for("mix-warm")
    body = ConvexBody.box([-SQ3, -SQ3], [SQ3, SQ3])
    target = Target.uniform(body)
    warm = warm_start(body, 2.0, rng)
    report = mixing_curve(ChainConfig(lazy=True), target, warm, [1, 2, 4, 8, 16, 32],
                          4000, rng)
    for i in range(len(report.tv) - 1):
        assert report.tv[i + 1] <= report.tv[i] + 3 * np.hypot(report.se[i],
                                                               report.se[i + 1])
    assert report.mixing_time is not None


def test_mixing_curve_determinism():
    body = square()
    target = Target.uniform(body)
    sampler = lambda n, r: target.exact_sample(n, r)
    rep1 = mixing_curve(ChainConfig(), target, sampler, [2, 5], 2000,
                        rng_for("mix-seeded"))
    rep2 = mixing_curve(ChainConfig(), target, sampler, [2, 5], 2000,
                        rng_for("mix-seeded"))
    assert rep1.tv == rep2.tv and rep1.se == rep2.se


def test_mixing_curve_checkpoint_validation():
    body = square()
    target = Target.uniform(body)
    sampler = lambda n, r: target.exact_sample(n, r)
    with pytest.raises(ValueError):
        mixing_curve(ChainConfig(), target, sampler, [5, 5], 2000, rng_for("mix-bad"))
