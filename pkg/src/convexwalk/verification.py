"""Desk-scale verification suite behind the ``verify`` CLI command.

Each check pins one quantitative property the library is supposed to
satisfy -- kernel correctness, covariance domination of the localized
measures, the measure martingale, the step-size lower bound, the core
mass bound, and the one-dimensional logconcave property suite -- and
reports {check, anchor, value, bound, direction, pass}.  Budgets and
bounds can be overridden from the experiment config; overriding a bound
is how the harness self-test forces a failure.
"""

import numpy as np

from . import chains, diagnostics, localization, logconcave1d
from .geometry import classify_core_point
from .seeding import stream
from .targets import Target


def default_settings():
    """Verification budgets sized so the whole suite runs in seconds."""
    return {
        "kernel_samples": 400_000,
        "kernel_grid": 36,
        "kernel_angles": 8192,
        "cov_chains": 100,
        "cov_kept": 200,
        "cov_thin": 2,
        "cov_burnin": 100,
        "cov_times": [1.0, 4.0],
        "sl_paths": 64,
        "sl_h": 0.0625,
        "sl_inner_samples": 64,
        "sl_inner_burnin": 16,
        "fu_points": 10,
        "fu_step_samples": 20_000,
        "core_points": 40,
        "core_overlap_samples": 4096,
        "core_r": 0.05,
        "logconcave_deltas": [0.05, 0.1, 0.3],
        "bounds": {},
    }


def _entry(check, anchor, value, bound, direction, override_bounds):
    bound = float(override_bounds.get(check, bound))
    if direction == "le":
        passed = value <= bound
    else:
        passed = value >= bound
    return {"check": check, "anchor": anchor, "value": float(value),
            "bound": bound, "direction": direction, "pass": bool(passed)}


def _kernel_checks(body, seed, settings, bounds):
    entries = []
    grid = chains.RegularGrid.for_body(body, settings["kernel_grid"])
    u = body.center()
    cases = [("kernel-tv-uniform", Target.uniform(body)),
             ("kernel-tv-gaussian", Target.truncated_gaussian(body, body.center(), 4.0))]
    for check, target in cases:
        rng = stream(seed, "verify", check)
        tv = chains.empirical_kernel_tv(u, target, settings["kernel_samples"], grid, rng,
                                        n_angles=settings["kernel_angles"])
        entries.append(_entry(check, "one-step-kernel-formula", tv, 0.025, "le", bounds))
    return entries


def _covariance_checks(body, seed, settings, bounds):
    entries = []
    for t in settings["cov_times"]:
        rng = stream(seed, "verify", "cov", int(t * 1000))
        target = Target.truncated_gaussian(body, body.center(), float(t))
        x = np.tile(body.center(), (settings["cov_chains"], 1))
        x = chains.run_chain_batch(target, x, settings["cov_burnin"], rng)
        kept = []
        for _ in range(settings["cov_kept"]):
            x = chains.run_chain_batch(target, x, settings["cov_thin"], rng)
            kept.append(x.copy())
        stacked = np.stack(kept)  # (kept, chains, dim)
        samples = stacked.reshape(-1, body.dim)
        top = float(np.linalg.eigvalsh(np.cov(samples, rowvar=False)).max())
        per_chain = np.array([np.linalg.eigvalsh(np.cov(stacked[:, i, :], rowvar=False)).max()
                              for i in range(settings["cov_chains"])])
        se = per_chain.std(ddof=1) / np.sqrt(settings["cov_chains"])
        entries.append(_entry(f"covariance-domination-t{t:g}", "covariance-upper-bound",
                              top, 1.0 / t + 5.0 * se, "le", bounds))
    return entries


def _event_mass(target, axis, threshold, rng, n_mc=512):
    """P(x_axis > threshold): closed form where available, else exact MC."""
    try:
        return target.axis_tail_prob(axis, threshold)
    except ValueError:
        pts = target.exact_sample(n_mc, rng)
        return float((pts[:, axis] > threshold).mean())


def _martingale_check(body, seed, settings, bounds):
    rng = stream(seed, "verify", "martingale")
    threshold = float(body.center()[0])
    base = _event_mass(Target.uniform(body), 0, threshold, rng, n_mc=20_000)
    snaps = localization.simulate_sl_paths(
        body, [1.0], settings["sl_h"], settings["sl_paths"], rng,
        inner_samples=settings["sl_inner_samples"], inner_burnin=settings["sl_inner_burnin"])
    c = snaps[1.0]
    vals = np.empty(len(c))
    for i in range(len(c)):
        target = localization.tilted_target(body, c[i], 1.0)
        vals[i] = _event_mass(target, 0, threshold, rng)
    se = vals.std(ddof=1) / np.sqrt(len(vals))
    return [_entry("sl-measure-martingale", "measure-martingale",
                   abs(vals.mean() - base), 3.0 * se, "le", bounds)]


def _step_quantile_check(body, seed, settings, bounds):
    rng = stream(seed, "verify", "step-quantile")
    n = body.dim
    r = 1.0 / (32.0 * np.sqrt(n))
    target = Target.truncated_gaussian(body, body.center(), float(n))
    bound = (1.0 / 128.0) * min(2.0 * r, 1.0 / (8.0 * np.sqrt(n)))
    worst = np.inf
    found = 0
    while found < settings["fu_points"]:
        # the lower bound assumes |u - beta| <= sqrt(2) and u in the core
        offset = rng.standard_normal(n)
        offset *= np.sqrt(2.0) * rng.random() ** (1.0 / n) / np.linalg.norm(offset)
        u = body.center() + offset
        if not body.contains(u):
            continue
        if classify_core_point(body, u, r, 2048, rng) != "in":
            continue
        est = diagnostics.step_size_quantile(target, u, settings["fu_step_samples"], rng)
        worst = min(worst, est.estimate)
        found += 1
    return [_entry("step-quantile-lower-bound", "step-quantile-lower-bound",
                   worst, bound, "ge", bounds)]


def _core_mass_check(body, seed, settings, bounds):
    if body.r_inscribed_hint is None or body.r_inscribed_hint < 1.0:
        return []
    rng = stream(seed, "verify", "core-mass")
    r = settings["core_r"]
    est = diagnostics.core_mass(body, r, settings["core_points"], rng,
                                overlap_samples=settings["core_overlap_samples"])
    bound = 1.0 - 2.0 * np.sqrt(body.dim) * r - 3.0 * est.se
    return [_entry("core-mass", "core-mass-lower-bound", est.estimate, bound, "ge", bounds)]


def _logconcave_check(settings, bounds):
    rows = logconcave1d.run_all_checks(deltas=settings["logconcave_deltas"])
    min_margin = min(row["margin"] for row in rows)
    return [_entry("logconcave-suite", "logconcave-property-suite", min_margin, 0.0, "ge", bounds)]


def run_verification(body, seed, settings=None):
    """Run all checks; returns (entries, all_passed)."""
    merged = default_settings()
    if settings:
        for key, val in settings.items():
            if key == "bounds":
                merged["bounds"].update(val)
            else:
                merged[key] = val
    bounds = merged["bounds"]
    entries = []
    entries += _kernel_checks(body, seed, merged, bounds)
    entries += _covariance_checks(body, seed, merged, bounds)
    entries += _martingale_check(body, seed, merged, bounds)
    entries += _step_quantile_check(body, seed, merged, bounds)
    entries += _core_mass_check(body, seed, merged, bounds)
    entries += _logconcave_check(merged, bounds)
    return entries, all(e["pass"] for e in entries)
