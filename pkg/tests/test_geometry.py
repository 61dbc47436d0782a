import numpy as np
import pytest
from scipy import stats as sps

from convexwalk.errors import DomainError, NumericalError
from convexwalk.geometry import (CORE_OVERLAP_THRESHOLD, AffineMap, ConvexBody,
                                 ball_overlap_fraction, cap_fraction, classify_core_point,
                                 isotropic_rescale, uniform_direction, uniform_directions)

from conftest import rng_for

SQ3 = np.sqrt(3.0)


def make_bodies():
    return [
        ConvexBody.ball([0.2, -0.1], 1.3),
        ConvexBody.box([-1.0, -2.0, 0.5], [1.0, 0.0, 2.5]),
        ConvexBody.simplex(3, scale=2.0),
        ConvexBody.hpolytope(np.array([[1.0, 1.0], [-1.0, 1.0], [0.0, -1.0]]),
                             np.array([1.0, 1.0, 0.5])),
        ConvexBody.ellipsoid([0.0, 0.0], np.array([[2.0, 0.3], [0.3, 1.0]])),
    ]


def bisect_boundary(body, u, theta, lo, hi, tol=1e-12):
    """Independent membership-only oracle for the chord endpoint parameter."""
    assert body.contains(u + lo * theta) and not body.contains(u + hi * theta)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if body.contains(u + mid * theta):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ----------------------------------------------------------------- membership


def test_membership_trivials():
    ball = ConvexBody.ball([0.0, 0.0], 1.0)
    assert ball.contains([0.0, 0.0])
    box = ConvexBody.box([-1.0, -1.0], [1.0, 1.0])
    assert box.contains([1.0, 1.0])  # closed at the boundary
    assert not box.contains([1.0001, 0.0])


def test_membership_dimension_mismatch():
    box = ConvexBody.box([-1.0, -1.0], [1.0, 1.0])
    with pytest.raises(ValueError):
        box.contains_batch(np.zeros((3, 3)))


def test_construction_invariants():
    with pytest.raises(ValueError):
        ConvexBody.ball([0.0], -1.0)
    with pytest.raises(ValueError):
        ConvexBody.box([0.0, 0.0], [1.0, 0.0])
    with pytest.raises(ValueError):
        ConvexBody.hpolytope(np.array([[0.0, 0.0]]), np.array([1.0]))
    with pytest.raises(ValueError):
        ConvexBody.ellipsoid([0.0, 0.0], -np.eye(2))
    with pytest.raises(ValueError):
        ConvexBody.ball([0.0, 0.0], 1.0, r_inscribed_hint=2.0, R_circum_hint=1.0)


# --------------------------------------------------------------------- chords


def test_chord_trivials():
    ball = ConvexBody.ball([0.0, 0.0], 1.0)
    ch = ball.chord(np.zeros(2), np.array([1.0, 0.0]))
    assert ch.t_minus == pytest.approx(-1.0, abs=1e-12)
    assert ch.t_plus == pytest.approx(1.0, abs=1e-12)

    box = ConvexBody.box([-1.0, -1.0], [1.0, 1.0])
    d = np.array([1.0, 1.0]) / np.sqrt(2.0)
    ch = box.chord(np.zeros(2), d)
    assert ch.t_plus == pytest.approx(np.sqrt(2.0), abs=1e-12)
    assert ch.t_minus == pytest.approx(-np.sqrt(2.0), abs=1e-12)


def test_simplex_chord_against_bisection_oracle():
    simp = ConvexBody.simplex(2, scale=1.0)
    u = np.array([1.0, 1.0]) / 3.0
    theta = np.array([1.0, 0.0])
    ch = simp.chord(u, theta)
    t_plus = bisect_boundary(simp, u, theta, 0.0, 2.0)
    t_minus = -bisect_boundary(simp, u, -theta, 0.0, 2.0)
    assert ch.t_plus == pytest.approx(t_plus, abs=1e-10)
    assert ch.t_minus == pytest.approx(t_minus, abs=1e-10)
    assert ch.t_plus == pytest.approx(1.0 / 3.0, abs=1e-10)
    assert ch.t_minus == pytest.approx(-1.0 / 3.0, abs=1e-10)


def test_chord_errors():
    ball = ConvexBody.ball([0.0, 0.0], 1.0)
    with pytest.raises(DomainError):
        ball.chord(np.array([2.0, 0.0]), np.array([1.0, 0.0]))
    with pytest.raises(ValueError):
        ball.chord(np.zeros(2), np.zeros(2))
    with pytest.raises(ValueError):
        ball.chord(np.zeros(2), np.array([1.0, 1.0]))  # not unit


def test_chord_endpoints_property():
    rng = rng_for("chord-endpoints")
    checked = 0
    for body in make_bodies():
        pts = body.sample_uniform(120, rng)
        dirs = uniform_directions(rng, body.dim, 120)
        t_lo, t_hi = body.chord_bounds_batch(pts, dirs)
        lengths = t_hi - t_lo
        eps = 1e-6 * lengths
        for sign, ts in ((1.0, t_hi), (-1.0, t_lo)):
            inside = pts + (ts - sign * eps)[:, None] * dirs
            outside = pts + (ts + sign * eps)[:, None] * dirs
            assert body.contains_batch(inside).all()
            assert not body.contains_batch(outside).any()
        checked += 2 * len(pts)
    assert checked >= 1000


def test_chord_direction_flip():
    rng = rng_for("chord-flip")
    for body in make_bodies():
        pts = body.sample_uniform(20, rng)
        dirs = uniform_directions(rng, body.dim, 20)
        t_lo, t_hi = body.chord_bounds_batch(pts, dirs)
        s_lo, s_hi = body.chord_bounds_batch(pts, -dirs)
        np.testing.assert_allclose(s_lo, -t_hi, atol=1e-10)
        np.testing.assert_allclose(s_hi, -t_lo, atol=1e-10)


# ----------------------------------------------------------------- directions


def test_uniform_direction_n1():
    rng = rng_for("dir-n1")
    vals = {float(uniform_direction(rng, 1)[0]) for _ in range(50)}
    assert vals <= {1.0, -1.0} and len(vals) == 2


def test_uniform_direction_coordinate_means():
    rng = rng_for("dir-means")
    d = uniform_directions(rng, 3, 1_000_000)
    np.testing.assert_allclose(np.linalg.norm(d, axis=1), 1.0, atol=1e-12)
    assert np.abs(d.mean(axis=0)).max() < 0.005


def test_uniform_direction_angle_chi2():
    rng = rng_for("dir-chi2")
    d = uniform_directions(rng, 2, 1_000_000)
    angles = np.arctan2(d[:, 1], d[:, 0]) + np.pi
    counts, _ = np.histogram(angles, bins=36, range=(0.0, 2.0 * np.pi))
    expected = len(d) / 36
    chi2 = ((counts - expected) ** 2 / expected).sum()
    assert chi2 < sps.chi2.ppf(0.99, 35)


# --------------------------------------------------------------- cap fraction


def test_cap_fraction_closed_form_n2():
    rng = rng_for("cap-n2")
    est = cap_fraction(2, 0.5, 1_000_000, rng)
    assert est.estimate == pytest.approx(1.0 / 3.0, abs=5 * est.se)


def test_cap_fraction_bound_and_value_n100():
    rng = rng_for("cap-n100")
    est = cap_fraction(100, 0.2, 1_000_000, rng)
    assert est.estimate == pytest.approx(0.023, abs=0.002)
    assert est.estimate <= np.exp(-100 * 0.04 / 2) + 5 * est.se


def test_cap_fraction_bound_grid():
    rng = rng_for("cap-grid")
    for n in (2, 5, 20, 60):
        for cos_phi in (0.1, 0.3, 0.6, 0.9):
            est = cap_fraction(n, cos_phi, 200_000, rng)
            bound = np.exp(-n * cos_phi ** 2 / 2)
            assert est.estimate <= bound + 5 * est.se


def test_cap_fraction_empty_limit_and_errors():
    rng = rng_for("cap-limits")
    est = cap_fraction(20, 0.999, 100_000, rng)
    assert est.estimate < 1e-3
    with pytest.raises(ValueError):
        cap_fraction(3, 1.5, 100, rng)
    with pytest.raises(ValueError):
        cap_fraction(3, 0.5, 0, rng)


# ------------------------------------------------------------- ball overlap


def test_ball_overlap_trivials():
    rng = rng_for("overlap")
    box = ConvexBody.box([-1.0, -1.0], [1.0, 1.0])
    assert ball_overlap_fraction(box, [0.0, 0.0], 0.5, 20_000, rng).estimate == 1.0
    face = ball_overlap_fraction(box, [1.0, 0.0], 0.1, 100_000, rng)
    assert face.estimate == pytest.approx(0.5, abs=0.01)
    corner = ball_overlap_fraction(box, [1.0, 1.0], 0.1, 100_000, rng)
    assert corner.estimate == pytest.approx(0.25, abs=0.01)


def test_ball_overlap_monotone_under_inclusion():
    rng = rng_for("overlap-monotone")
    inner = ConvexBody.box([-1.0, -1.0], [1.0, 1.0])
    outer = ConvexBody.box([-1.5, -1.5], [1.5, 1.5])
    for _ in range(10):
        u = inner.sample_uniform(1, rng)[0]
        t = 0.2 + 0.8 * rng.random()
        a = ball_overlap_fraction(inner, u, t, 50_000, rng)
        b = ball_overlap_fraction(outer, u, t, 50_000, rng)
        assert a.estimate <= b.estimate + 3 * np.hypot(a.se, b.se)


# ----------------------------------------------------------------- core points


def test_core_threshold_value():
    assert CORE_OVERLAP_THRESHOLD == 63.0 / 64.0 == 0.984375


def test_classify_core_point_trivials():
    rng = rng_for("core")
    box = ConvexBody.box([-1.0, -1.0], [1.0, 1.0])
    assert classify_core_point(box, [0.0, 0.0], 0.25, 20_000, rng) == "in"
    assert classify_core_point(box, [1.0, 1.0], 0.05, 20_000, rng) == "out"
    with pytest.raises(DomainError):
        classify_core_point(box, [3.0, 0.0], 0.1, 1000, rng)


def test_core_convexity_midpoints():
    rng = rng_for("core-convex")
    box = ConvexBody.box([-SQ3, -SQ3], [SQ3, SQ3])
    r = 0.1
    ins = []
    while len(ins) < 12:
        u = box.sample_uniform(1, rng)[0]
        if classify_core_point(box, u, r, 4096, rng) == "in":
            ins.append(u)
    for i in range(0, 12, 2):
        mid = 0.5 * (ins[i] + ins[i + 1])
        assert classify_core_point(box, mid, r, 4096, rng) != "out"


# ----------------------------------------------------------- isotropic rescale


def test_isotropic_rescale_identity_case():
    rng = rng_for("iso-id")
    samples = rng.standard_normal((200_000, 2))
    amap = isotropic_rescale(samples)
    np.testing.assert_allclose(amap.linear, np.eye(2), atol=0.02)
    np.testing.assert_allclose(amap.shift, np.zeros(2), atol=0.02)


def test_isotropic_rescale_box_variances():
    rng = rng_for("iso-box")
    box = ConvexBody.box([-2 * SQ3, -SQ3], [2 * SQ3, SQ3])
    samples = box.sample_uniform(400_000, rng)
    amap = isotropic_rescale(samples)
    # axis variances a^2/3 give sd 2 and 1, so the map is ~diag(1/2, 1)
    np.testing.assert_allclose(np.diag(amap.linear), [0.5, 1.0], rtol=0.02)
    mapped = amap.apply(samples[:100_000])
    eig = np.linalg.eigvalsh(np.cov(mapped, rowvar=False))
    assert eig.min() > 0.97 and eig.max() < 1.03


def test_isotropic_rescale_errors():
    rng = rng_for("iso-err")
    flat = np.column_stack([rng.standard_normal(100), np.zeros(100)])
    with pytest.raises(NumericalError):
        isotropic_rescale(flat)
    with pytest.raises(ValueError):
        isotropic_rescale(rng.standard_normal((2, 3)))


def test_affine_map_condition_check():
    with pytest.raises(NumericalError):
        AffineMap(linear=np.array([[1.0, 0.0], [0.0, 0.0]]), shift=np.zeros(2))


# ------------------------------------------------------------ uniform sampling


def test_sample_uniform_membership_all_kinds():
    rng = rng_for("sample-uniform")
    for body in make_bodies():
        pts = body.sample_uniform(5000, rng)
        assert body.contains_batch(pts).all()


def test_ball_sampling_radius_law():
    rng = rng_for("ball-radius")
    ball = ConvexBody.ball([0.0, 0.0, 0.0], 2.0)
    pts = ball.sample_uniform(200_000, rng)
    r = np.linalg.norm(pts, axis=1) / 2.0
    # radius CDF is r^3 in dimension 3
    ks = sps.kstest(r, lambda x: np.clip(x, 0, 1) ** 3)
    assert ks.statistic < 0.005
