"""Reproducible experiment runner.

Subcommands: sample | verify | sl | mix | conductance | logconcave.
Each reads a strict JSON config (unknown keys are rejected, numeric
fields are range-checked), derives all randomness from the master seed
via labeled streams, and writes CSV/JSON outputs whose bytes depend
only on (config, seed).  Exit codes: 0 success, 1 runtime failure or a
failed verification, 2 config errors.
"""

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import chains, diagnostics, localization, logconcave1d, verification
from .errors import PreconditionError
from .geometry import ConvexBody
from .seeding import stream
from .targets import Target


class ConfigError(ValueError):
    pass


# ------------------------------------------------------------- JSON helpers


def _fmt_float(x):
    return f"{x:.17g}"


def _dump_json(obj, indent=0):
    """Deterministic JSON text: sorted keys, floats at 17 significant digits."""
    pad = " " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f'{pad}  "{k}": {_dump_json(obj[k], indent + 2).lstrip()}'
                 for k in sorted(obj)]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if len(obj) == 0:
            return "[]"
        items = [f"{pad}  {_dump_json(v, indent + 2).lstrip()}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    raise TypeError(f"cannot serialize {type(obj)}")


def _write_json(path, obj):
    Path(path).write_text(_dump_json(obj) + "\n")


def _write_csv(path, header, rows):
    lines = [",".join(header)]
    for row in rows:
        cells = []
        for v in row:
            if isinstance(v, (float, np.floating)):
                cells.append(_fmt_float(float(v)))
            else:
                cells.append(str(v))
        lines.append(",".join(cells))
    Path(path).write_text("\n".join(lines) + "\n")


# ---------------------------------------------------------- config handling


def _require_keys(block, allowed, context):
    unknown = set(block) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown keys in {context}: {sorted(unknown)}")


def _number(block, key, context, lo=None, hi=None, integer=False, default=None,
            required=False):
    if key not in block:
        if required:
            raise ConfigError(f"{context}.{key} is required")
        return default
    val = block[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(f"{context}.{key} must be a number")
    if integer and int(val) != val:
        raise ConfigError(f"{context}.{key} must be an integer")
    if lo is not None and val < lo:
        raise ConfigError(f"{context}.{key} must be >= {lo}")
    if hi is not None and val > hi:
        raise ConfigError(f"{context}.{key} must be <= {hi}")
    return int(val) if integer else float(val)


def _vector(block, key, context, required=True):
    if key not in block:
        if required:
            raise ConfigError(f"{context}.{key} is required")
        return None
    val = block[key]
    if not isinstance(val, list) or not all(isinstance(v, (int, float)) and
                                            not isinstance(v, bool) for v in val):
        raise ConfigError(f"{context}.{key} must be a list of numbers")
    return [float(v) for v in val]


def parse_body(block):
    _require_keys(block, {"kind", "center", "radius", "lower", "upper", "dim", "scale",
                          "rows", "shape", "r_inscribed_hint", "R_circum_hint"}, "body")
    kind = block.get("kind")
    hints = {}
    for h in ("r_inscribed_hint", "R_circum_hint"):
        if h in block:
            hints[h] = _number(block, h, "body", lo=1e-300)
    try:
        if kind == "ball":
            return ConvexBody.ball(_vector(block, "center", "body"),
                                   _number(block, "radius", "body", lo=1e-300, required=True),
                                   **hints)
        if kind == "box":
            return ConvexBody.box(_vector(block, "lower", "body"),
                                  _vector(block, "upper", "body"), **hints)
        if kind == "simplex":
            return ConvexBody.simplex(_number(block, "dim", "body", lo=1, integer=True,
                                              required=True),
                                      _number(block, "scale", "body", lo=1e-300, default=1.0),
                                      **hints)
        if kind == "hpolytope":
            rows = block.get("rows")
            if (not isinstance(rows, list) or not rows
                    or not all(isinstance(r, list) and len(r) == len(rows[0]) for r in rows)):
                raise ConfigError("body.rows must be a list of equal-length flat arrays")
            arr = np.asarray(rows, dtype=float)
            return ConvexBody.hpolytope(arr[:, :-1], arr[:, -1], **hints)
        if kind == "ellipsoid":
            center = _vector(block, "center", "body")
            shape = block.get("shape")
            return ConvexBody.ellipsoid(center, np.asarray(shape, dtype=float), **hints)
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"invalid body: {exc}") from exc
    raise ConfigError(f"unknown body kind: {kind!r}")


def parse_target(block, body):
    _require_keys(block, {"kind", "beta", "m"}, "target")
    kind = block.get("kind")
    if kind == "uniform":
        return Target.uniform(body)
    if kind == "truncated_gaussian":
        beta = _vector(block, "beta", "target")
        m = _number(block, "m", "target", lo=1e-300, required=True)
        try:
            return Target.truncated_gaussian(body, beta, m)
        except ValueError as exc:
            raise ConfigError(f"invalid target: {exc}") from exc
    raise ConfigError(f"unknown target kind: {kind!r}")


_TOP_KEYS = {"seed", "body", "target", "chain", "sl", "mix", "conductance",
             "logconcave", "verify"}


def load_config(path):
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot parse config: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    _require_keys(raw, _TOP_KEYS, "config")
    if "seed" not in raw:
        raise ConfigError("config.seed is required")
    _number(raw, "seed", "config", integer=True, required=True)
    if "body" not in raw or not isinstance(raw["body"], dict):
        raise ConfigError("config.body is required")
    for key in _TOP_KEYS - {"seed"}:
        if key in raw and not isinstance(raw[key], dict):
            raise ConfigError(f"config.{key} must be an object")
    return raw


def _resolved_chain(block):
    _require_keys(block, {"kind", "delta", "lazy", "max_chord_retries", "n_steps",
                          "thin", "init", "n_replicas"}, "chain")
    kind = block.get("kind", "hit_and_run")
    if kind not in ("hit_and_run", "ball_walk"):
        raise ConfigError("chain.kind must be 'hit_and_run' or 'ball_walk'")
    lazy = block.get("lazy", False)
    if not isinstance(lazy, bool):
        raise ConfigError("chain.lazy must be a boolean")
    init = block.get("init", "center")
    if init != "center" and (not isinstance(init, list)):
        raise ConfigError("chain.init must be 'center' or a point")
    return {
        "kind": kind,
        "delta": _number(block, "delta", "chain", lo=1e-300, default=0.1),
        "lazy": lazy,
        "max_chord_retries": _number(block, "max_chord_retries", "chain", lo=1,
                                     integer=True, default=16),
        "n_steps": _number(block, "n_steps", "chain", lo=0, integer=True, default=1000),
        "thin": _number(block, "thin", "chain", lo=1, integer=True, default=1),
        "init": init,
        "n_replicas": _number(block, "n_replicas", "chain", lo=1, integer=True, default=1),
    }


def _chain_config(resolved):
    return chains.ChainConfig(kind=resolved["kind"], delta=resolved["delta"],
                              lazy=resolved["lazy"],
                              max_chord_retries=resolved["max_chord_retries"])


# ----------------------------------------------------------------- commands


def cmd_sample(config, seed, out_dir, threads):
    body = parse_body(config["body"])
    target = parse_target(config.get("target", {"kind": "uniform"}), body)
    resolved = _resolved_chain(config.get("chain", {}))
    chain_config = _chain_config(resolved)
    init = body.center() if resolved["init"] == "center" else np.asarray(resolved["init"],
                                                                         dtype=float)

    def run_replica(index):
        rng = stream(seed, "chain", index)
        samples, stats, moved = chains.run_chain(chain_config, target, init,
                                                 resolved["n_steps"], resolved["thin"], rng)
        return samples, stats, moved

    n_rep = resolved["n_replicas"]
    if n_rep == 1:
        results = [run_replica(0)]
    else:
        with ThreadPoolExecutor(max_workers=max(threads, 1)) as pool:
            results = list(pool.map(run_replica, range(n_rep)))

    header = ["step"] + [f"x_{i}" for i in range(body.dim)] + ["moved"]
    for index, (samples, stats, moved) in enumerate(results):
        rows = []
        for k in range(len(samples)):
            step = k * resolved["thin"] if k > 0 else 0
            rows.append([step] + list(samples[k]) + [int(moved[k])])
        name = "trace.csv" if n_rep == 1 else f"trace_r{index:03d}.csv"
        _write_csv(Path(out_dir) / name, header, rows)
    summary = {
        "command": "sample",
        "seed": int(seed),
        "seed_derivation": "blake2s-labeled streams per (seed, 'chain', replica index)",
        "acceptance": results[0][1].acceptance_rate,
        "degenerate_chords": int(sum(r[1].degenerate_chords for r in results)),
        "n_replicas": int(n_rep),
        "resolved_config": {"seed": int(seed), "body": config["body"],
                            "target": config.get("target", {"kind": "uniform"}),
                            "chain": resolved},
    }
    if np.isnan(summary["acceptance"]):
        summary["acceptance"] = None
    _write_json(Path(out_dir) / "summary.json", summary)
    return 0


def cmd_sl(config, seed, out_dir, threads):
    body = parse_body(config["body"])
    block = config.get("sl", {})
    _require_keys(block, {"t_total", "h", "n_paths", "inner_samples", "inner_burnin",
                          "checkpoints", "event_axis", "event_threshold", "eig_samples",
                          "one_d"}, "sl")
    t_total = _number(block, "t_total", "sl", lo=1e-300, default=1.0)
    h = _number(block, "h", "sl", lo=1e-300, default=1.0 / 16)
    n_paths = _number(block, "n_paths", "sl", lo=1, integer=True, default=8)
    inner_samples = _number(block, "inner_samples", "sl", lo=1, integer=True, default=64)
    inner_burnin = _number(block, "inner_burnin", "sl", lo=0, integer=True, default=16)
    eig_samples = _number(block, "eig_samples", "sl", lo=16, integer=True, default=2048)
    event_axis = _number(block, "event_axis", "sl", lo=0, hi=body.dim - 1, integer=True,
                         default=0)
    event_threshold = _number(block, "event_threshold", "sl", default=float(body.center()[0]))
    checkpoints = _vector(block, "checkpoints", "sl", required=False) or [t_total]
    for t in checkpoints:
        if t <= 0 or t > t_total or abs(t / h - round(t / h)) > 1e-9:
            raise ConfigError("sl.checkpoints must be multiples of h in (0, t_total]")

    rng = stream(seed, "sl")
    snaps = localization.simulate_sl_paths(body, checkpoints, h, n_paths, rng,
                                           inner_samples=inner_samples,
                                           inner_burnin=inner_burnin)
    rows = []
    summary_rows = []
    for t in checkpoints:
        c = snaps[t]
        event = np.empty(len(c))
        top = np.empty(len(c))
        eig_rng = stream(seed, "sl-eig", int(round(t / h)))
        for i in range(len(c)):
            target = localization.tilted_target(body, c[i], t)
            event[i] = target.axis_tail_prob(event_axis, event_threshold)
            pts = target.exact_sample(eig_samples, eig_rng)
            top[i] = np.linalg.eigvalsh(np.cov(pts, rowvar=False)).max()
        rows.append([t] + list(c[0]) + [top[0], event[0]])
        summary_rows.append({"t": t, "event_mass_mean": float(event.mean()),
                             "event_mass_se": float(event.std(ddof=1) / np.sqrt(len(c)))
                             if len(c) > 1 else 0.0,
                             "top_eigenvalue_mean": float(top.mean()),
                             "covariance_bound": 1.0 / t})
    header = ["t"] + [f"c_{i}" for i in range(body.dim)] + ["top_eigenvalue", "event_mass"]
    _write_csv(Path(out_dir) / "sl_trace.csv", header, rows)
    summary = {
        "command": "sl", "seed": int(seed),
        "seed_derivation": "blake2s-labeled streams per (seed, purpose label)",
        "n_paths": int(n_paths),
        "checkpoints": summary_rows,
        "resolved_config": {"seed": int(seed), "body": config["body"], "sl": {
            "t_total": t_total, "h": h, "n_paths": n_paths,
            "inner_samples": inner_samples, "inner_burnin": inner_burnin,
            "checkpoints": checkpoints, "event_axis": event_axis,
            "event_threshold": event_threshold, "eig_samples": eig_samples}},
    }
    if "one_d" in block:
        one_d = block["one_d"]
        _require_keys(one_d, {"alpha", "sigma2", "n_paths", "n_steps", "n_cells",
                              "z_half_range"}, "sl.one_d")
        alpha = _number(one_d, "alpha", "sl.one_d", lo=1e-300, default=1.0)
        sigma2 = _number(one_d, "sigma2", "sl.one_d", lo=1e-300, default=1.0)
        paths_1d = _number(one_d, "n_paths", "sl.one_d", lo=2, integer=True, default=64)
        steps_1d = _number(one_d, "n_steps", "sl.one_d", lo=1, integer=True, default=512)
        n_cells = _number(one_d, "n_cells", "sl.one_d", lo=64, integer=True, default=1024)
        z_half = _number(one_d, "z_half_range", "sl.one_d", lo=1e-300, default=np.sqrt(3.0))
        grid = localization.Grid1D(-z_half, z_half, np.full(int(n_cells), 1.0 / n_cells))
        grid = grid.standardized()
        weights = (grid.centers() >= 0).astype(float)
        curve = localization.variance_decay_curve(
            grid, sigma2, alpha, paths_1d, steps_1d, stream(seed, "sl-1d"), weights=weights)
        rows_1d = [[curve.times[i], curve.mean_center[i], curve.mean_variance[i],
                    curve.mean_functional[i]] for i in range(len(curve.times))]
        _write_csv(Path(out_dir) / "sl_1d.csv", ["t", "mean", "variance", "functional"],
                   rows_1d)
        summary["one_d"] = {"alpha": alpha, "sigma2": sigma2,
                            "final_mean_variance": float(curve.mean_variance[-1])}
    _write_json(Path(out_dir) / "sl_summary.json", summary)
    return 0


def cmd_mix(config, seed, out_dir, threads):
    body = parse_body(config["body"])
    target = parse_target(config.get("target", {"kind": "uniform"}), body)
    block = config.get("mix", {})
    _require_keys(block, {"checkpoints", "n_replicas", "n_bins", "warmness", "epsilon",
                          "chain"}, "mix")
    checkpoints = [int(c) for c in (_vector(block, "checkpoints", "mix", required=False)
                                    or [10, 100])]
    n_replicas = _number(block, "n_replicas", "mix", lo=1000, integer=True, default=4000)
    n_bins = _number(block, "n_bins", "mix", lo=2, integer=True, default=20)
    warmness = _number(block, "warmness", "mix", lo=1.0, default=2.0)
    epsilon = _number(block, "epsilon", "mix", lo=1e-6, hi=1.0, default=0.1)
    chain_resolved = _resolved_chain(block.get("chain", {"lazy": True}))
    chain_config = _chain_config(chain_resolved)
    rng = stream(seed, "mix")
    sampler = diagnostics.warm_start(body, warmness, rng)
    report = diagnostics.mixing_curve(chain_config, target, sampler, checkpoints,
                                      n_replicas, rng, n_bins=n_bins, epsilon=epsilon)
    rows = [[report.steps[i], report.tv[i], report.se[i], ""]
            for i in range(len(report.steps))]
    _write_csv(Path(out_dir) / "mix.csv", ["step", "tv", "se", "phi_s"], rows)
    payload = report.to_dict()
    payload.update({"command": "mix", "seed": int(seed),
                    "seed_derivation": "blake2s-labeled streams per (seed, purpose label)",
                    "resolved_config": {"seed": int(seed), "body": config["body"],
                                        "target": config.get("target", {"kind": "uniform"}),
                                        "mix": {"checkpoints": checkpoints,
                                                "n_replicas": n_replicas, "n_bins": n_bins,
                                                "warmness": warmness, "epsilon": epsilon,
                                                "chain": chain_resolved}}})
    _write_json(Path(out_dir) / "mix_report.json", payload)
    return 0


def cmd_conductance(config, seed, out_dir, threads):
    body = parse_body(config["body"])
    target = parse_target(config.get("target", {"kind": "uniform"}), body)
    block = config.get("conductance", {})
    _require_keys(block, {"s", "n_samples", "partition", "chain"}, "conductance")
    s = _number(block, "s", "conductance", lo=0.0, hi=0.499, default=0.05)
    n_samples = _number(block, "n_samples", "conductance", lo=1000, integer=True,
                        default=100_000)
    part_block = block.get("partition", {})
    _require_keys(part_block, {"normal", "offset"}, "conductance.partition")
    normal = _vector(part_block, "normal", "conductance.partition", required=False)
    if normal is None:
        normal = [1.0] + [0.0] * (body.dim - 1)
    normal = np.asarray(normal, dtype=float)
    normal = normal / np.linalg.norm(normal)
    offset = _number(part_block, "offset", "conductance.partition",
                     default=float(body.center() @ normal))
    partition = diagnostics.Halfspace(normal, offset)
    chain_resolved = _resolved_chain(block.get("chain", {}))
    rng = stream(seed, "conductance")
    est = diagnostics.s_conductance(_chain_config(chain_resolved), target, partition, s,
                                    n_samples, rng)
    payload = {"command": "conductance", "seed": int(seed),
               "seed_derivation": "blake2s-labeled streams per (seed, purpose label)",
               "estimate": est.estimate,
               "se": est.se, "n_samples": est.n_samples, "s": s,
               "resolved_config": {"seed": int(seed), "body": config["body"],
                                   "target": config.get("target", {"kind": "uniform"}),
                                   "conductance": {"s": s, "n_samples": n_samples,
                                                   "partition": {"normal": list(map(float, normal)),
                                                                 "offset": offset},
                                                   "chain": chain_resolved}}}
    _write_json(Path(out_dir) / "conductance.json", payload)
    return 0


def cmd_logconcave(config, seed, out_dir, threads):
    block = config.get("logconcave", {})
    _require_keys(block, {"deltas", "t_grid"}, "logconcave")
    deltas = _vector(block, "deltas", "logconcave", required=False) or [0.05, 0.1, 0.3]
    for d in deltas:
        if not 0 < d <= 1 / np.e:
            raise ConfigError("logconcave.deltas must lie in (0, 1/e]")
    t_grid = _vector(block, "t_grid", "logconcave", required=False) or [1.0, 2.0, 3.0, 5.0]
    rows = logconcave1d.run_all_checks(deltas=deltas, t_grid=t_grid)
    payload = {"command": "logconcave", "seed": int(seed), "rows": rows,
               "all_passed": all(r["passed"] for r in rows),
               "resolved_config": {"seed": int(seed), "body": config["body"],
                                   "logconcave": {"deltas": deltas, "t_grid": t_grid}}}
    _write_json(Path(out_dir) / "logconcave.json", payload)
    return 0 if payload["all_passed"] else 1


def cmd_verify(config, seed, out_dir, threads):
    body = parse_body(config["body"])
    block = config.get("verify", {})
    allowed = set(verification.default_settings()) | {"bounds"}
    _require_keys(block, allowed, "verify")
    entries, all_passed = verification.run_verification(body, seed, block)
    payload = {"command": "verify", "seed": int(seed),
               "seed_derivation": "blake2s-labeled streams per (seed, purpose label)",
               "entries": entries,
               "all_passed": bool(all_passed),
               "resolved_config": {"seed": int(seed), "body": config["body"],
                                   "verify": block}}
    _write_json(Path(out_dir) / "verify_report.json", payload)
    return 0 if all_passed else 1


_COMMANDS = {
    "sample": cmd_sample,
    "verify": cmd_verify,
    "sl": cmd_sl,
    "mix": cmd_mix,
    "conductance": cmd_conductance,
    "logconcave": cmd_logconcave,
}


def main(argv=None):
    parser = argparse.ArgumentParser(prog="convexwalk",
                                     description="Convex-body sampling experiments")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True)
        p.add_argument("--seed", type=int, default=None,
                       help="override the config seed")
        p.add_argument("--out", default=".")
        p.add_argument("--threads", type=int, default=1)
    args = parser.parse_args(argv)
    try:
        config = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    seed = args.seed if args.seed is not None else int(config["seed"])
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    try:
        return _COMMANDS[args.command](config, seed, out_dir, args.threads)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except PreconditionError as exc:
        print(f"precondition not met: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
