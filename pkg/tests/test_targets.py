import numpy as np
import pytest
from scipy import stats as sps
from scipy.integrate import quad
from scipy.special import erfcx

from convexwalk.errors import DegenerateChordError
from convexwalk.geometry import Chord, ConvexBody
from convexwalk.stats import block_se
from convexwalk.targets import Target, TruncGauss1D, UniformSegment, phi_interval

from conftest import rng_for


def unit_ball2():
    return ConvexBody.ball([0.0, 0.0], 1.0)


# -------------------------------------------------------------------- density


def test_log_density_trivials():
    box = ConvexBody.box([-1.0, -1.0], [1.0, 1.0])
    uni = Target.uniform(box)
    assert uni.log_density([0.0, 0.0]) == 0.0
    assert uni.log_density([2.0, 0.0]) == -np.inf

    tg_mode = Target.truncated_gaussian(box, [0.25, -0.5], 3.0)
    assert tg_mode.log_density([0.25, -0.5]) == 0.0

    ball = unit_ball2()
    tg = Target.truncated_gaussian(ball, [0.0, 0.0], 4.0)
    assert tg.log_density([0.5, 0.0]) == pytest.approx(-0.5, abs=1e-14)


def test_target_validation():
    box = ConvexBody.box([-1.0], [1.0])
    with pytest.raises(ValueError):
        Target.truncated_gaussian(box, [0.0], 0.0)
    with pytest.raises(ValueError):
        Target.truncated_gaussian(box, [0.0, 0.0], 1.0)  # wrong beta dimension
    # beta outside the body is legitimate
    Target.truncated_gaussian(box, [5.0], 1.0)


# --------------------------------------------------------------- restriction


def test_restrict_uniform_and_centered():
    ball = unit_ball2()
    chord = ball.chord(np.zeros(2), np.array([1.0, 0.0]))
    law = Target.uniform(ball).restrict_to_chord(chord)
    assert isinstance(law, UniformSegment)
    assert (law.a, law.b) == (chord.t_minus, chord.t_plus)

    u = np.array([0.3, -0.2])
    chord = ball.chord(u, np.array([0.0, 1.0]))
    law = Target.truncated_gaussian(ball, u, 7.0).restrict_to_chord(chord)
    assert law.c == pytest.approx(0.0, abs=1e-14)  # beta == u projects to zero


def test_restrict_truncated_gaussian_projection():
    ball = unit_ball2()
    u = np.array([0.5, 0.0])
    chord = ball.chord(u, np.array([1.0, 0.0]))
    law = Target.truncated_gaussian(ball, [0.0, 0.0], 1.0).restrict_to_chord(chord)
    assert isinstance(law, TruncGauss1D)
    assert law.c == pytest.approx(-0.5, abs=1e-14)
    assert law.s == pytest.approx(1.0, abs=1e-14)
    assert law.a == pytest.approx(-1.5, abs=1e-12)
    assert law.b == pytest.approx(0.5, abs=1e-12)


def test_restrict_degenerate_chord():
    ball = unit_ball2()
    chord = Chord(np.array([1.0, 0.0]), np.array([0.0, 1.0]), 0.0, 1e-15)
    with pytest.raises(DegenerateChordError):
        Target.uniform(ball).restrict_to_chord(chord)


# ------------------------------------------------------------------- sampling


def test_uniform_segment_moments():
    rng = rng_for("seg-moments")
    law = UniformSegment(-1.0, 1.0)
    t = law.sample(rng, size=1_000_000)
    assert t.mean() == pytest.approx(0.0, abs=0.003)
    assert t.var() == pytest.approx(1.0 / 3.0, abs=0.003)
    assert ((t >= -1) & (t <= 1)).all()


def test_half_normal_mean():
    rng = rng_for("half-normal")
    law = TruncGauss1D(0.0, 1.0, 0.0, 50.0)  # upper bound far enough to be +inf
    t = law.sample(rng, size=1_000_000)
    assert t.mean() == pytest.approx(np.sqrt(2.0 / np.pi), abs=0.003)


def test_symmetric_truncation_mean():
    rng = rng_for("sym-trunc")
    t = TruncGauss1D(0.0, 1.0, -1.0, 1.0).sample(rng, size=1_000_000)
    assert t.mean() == pytest.approx(0.0, abs=0.003)
    assert ((t >= -1) & (t <= 1)).all()


def test_truncnorm_ks_against_analytic_cdf():
    rng = rng_for("trunc-ks")
    c, s, a, b = 0.3, 0.7, -1.0, 0.9
    law = TruncGauss1D(c, s, a, b)
    t = law.sample(rng, size=100_000)
    za, zb = (a - c) / s, (b - c) / s

    def cdf(x):
        z = (np.asarray(x) - c) / s
        return (sps.norm.cdf(z) - sps.norm.cdf(za)) / (sps.norm.cdf(zb) - sps.norm.cdf(za))

    ks = sps.kstest(t, cdf)
    assert ks.statistic < 0.006


def test_far_tail_no_endpoint_atoms():
    rng = rng_for("far-tail")
    law = TruncGauss1D(0.0, 1.0, 37.0, 39.0)
    t = law.sample(rng, size=200_000)
    assert t.min() >= 37.0 and t.max() <= 39.0
    assert np.count_nonzero(t == 37.0) == 0
    assert np.count_nonzero(t == 39.0) == 0
    # conditional mean: 37 + 1/hazard(37), hazard via the scaled erfc
    hazard = np.sqrt(2.0 / np.pi) / erfcx(37.0 / np.sqrt(2.0))
    assert t.mean() == pytest.approx(37.0 + 1.0 / hazard, abs=5e-4)


def test_sample_stays_on_chord_property():
    rng = rng_for("chord-range")
    bodies = [unit_ball2(), ConvexBody.box([-2.0, -0.5], [0.5, 2.0]), ConvexBody.simplex(2)]
    for body in bodies:
        for target in (Target.uniform(body),
                       Target.truncated_gaussian(body, body.center() + 0.1, 5.0)):
            for _ in range(200):
                u = body.sample_uniform(1, rng)[0]
                theta = rng.standard_normal(2)
                theta /= np.linalg.norm(theta)
                chord = body.chord(u, theta)
                law = target.restrict_to_chord(chord)
                t = law.sample(rng, size=16)
                assert (t >= chord.t_minus).all() and (t <= chord.t_plus).all()


# ----------------------------------------------------------------- chord mass


def test_chord_mass_values():
    assert UniformSegment(-1.0, 1.0).mass() == pytest.approx(2.0)
    full = TruncGauss1D(0.0, 1.0, -40.0, 40.0)
    assert full.mass() == pytest.approx(np.sqrt(2.0 * np.pi), rel=1e-12)
    half = TruncGauss1D(0.0, 1.0, 0.0, 40.0)
    assert half.mass() == pytest.approx(np.sqrt(2.0 * np.pi) / 2.0, rel=1e-12)


def test_chord_mass_matches_quadrature():
    rng = rng_for("mass-quad")
    for _ in range(25):
        c = rng.uniform(-2, 2)
        s = rng.uniform(0.2, 3.0)
        a = rng.uniform(-4, 0)
        b = a + rng.uniform(0.5, 6.0)
        law = TruncGauss1D(c, s, a, b)
        oracle, err = quad(lambda t: np.exp(-0.5 * ((t - c) / s) ** 2), a, b,
                           epsabs=1e-13, epsrel=1e-12)
        assert law.mass() == pytest.approx(oracle, rel=1e-8)


def test_phi_interval_tail_stability():
    # right-tail interval [37, 39]: a naive Phi difference would cancel to 0
    val = phi_interval(37.0, 39.0)
    assert val > 0
    assert val == pytest.approx(sps.norm.sf(37.0) - sps.norm.sf(39.0), rel=1e-12)


def test_interval_fraction_log_fallback():
    law = TruncGauss1D(0.0, 1.0, 38.6, 39.2)  # both Phi values underflow
    frac = law.interval_fraction(38.6, 39.2)
    assert frac == pytest.approx(1.0, rel=1e-9)
    part = law.interval_fraction(38.6, 38.7)
    assert 0.9 < part < 1.0  # hazard ~38.6, so most mass sits in the first 0.1


# -------------------------------------------------------------- exact samples


def test_exact_sample_tg_box_marginals():
    rng = rng_for("exact-box")
    box = ConvexBody.box([-1.0, -1.0, -1.0], [1.0, 0.5, 2.0])
    target = Target.truncated_gaussian(box, [0.3, 0.8, -0.2], 2.0)
    pts = target.exact_sample(100_000, rng)
    assert box.contains_batch(pts).all()
    for axis in range(3):
        cdf = target.axis_marginal_cdf(axis)
        ks = sps.kstest(pts[:, axis], cdf)
        assert ks.statistic < 0.006


def test_exact_sample_tg_rejection_matches_product():
    rng = rng_for("exact-rej")
    box = ConvexBody.box([-1.0, -1.0], [1.0, 1.0])
    poly = ConvexBody.hpolytope(np.vstack([np.eye(2), -np.eye(2)]),
                                np.array([1.0, 1.0, 1.0, 1.0]))  # same square
    target_box = Target.truncated_gaussian(box, [0.2, 0.1], 1.5)
    target_poly = Target.truncated_gaussian(poly, [0.2, 0.1], 1.5)
    a = target_box.exact_sample(100_000, rng)
    b = target_poly.exact_sample(100_000, rng)  # Gaussian-envelope rejection path
    for axis in range(2):
        ks = sps.ks_2samp(a[:, axis], b[:, axis])
        assert ks.statistic < 0.008


def test_covariance_dominated_by_inverse_precision():
    # top covariance eigenvalue of a truncated Gaussian never exceeds 1/m
    rng = rng_for("cov-bl")
    box = ConvexBody.box([-1.0, -1.0, -1.0], [1.0, 1.0, 1.0])
    for m in (0.5, 2.5, 10.0):
        target = Target.truncated_gaussian(box, [0.2, 0.0, -0.3], m)
        pts = target.exact_sample(100_000, rng)
        top = np.linalg.eigvalsh(np.cov(pts, rowvar=False)).max()
        proj = pts @ np.linalg.eigh(np.cov(pts, rowvar=False))[1][:, -1]
        se = block_se(proj ** 2, n_blocks=50)
        assert top <= 1.0 / m + 5 * se


def test_axis_marginal_unavailable():
    ball = unit_ball2()
    tg = Target.truncated_gaussian(ball, [0.0, 0.0], 1.0)
    with pytest.raises(ValueError):
        tg.axis_marginal_cdf(0)
