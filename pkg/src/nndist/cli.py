"""Command-line harness: experiment orchestration and CSV/JSON reporting.

Subcommands: estimate, bounds, lecam, rademacher, concentration, rate,
emit-plot-script.  Configs are JSON (schemas in FORMATS.md); every CSV
starts with a comment line recording the config hash and seed, so two runs
with identical config and seed are byte-identical.  Exit codes: 0 success,
1 validation error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys

import numpy as np

from . import bounds as bnd
from .constraints import ConstraintSet, constraints_from_dict
from .distributions import (
    derive_seed,
    dist_from_dict,
    gaussian_spec,
    lecam_gaussian_quadruple,
    sample,
    total_kl,
)
from .errors import NNDistError, NumericalError, SchemaError, ValidationError
from .estimator import (
    AscentConfig,
    QuadratureConfig,
    brute_force_nnd,
    estimate_nnd,
    witness_chain,
    witness_gap_exact,
)
from .networks import activation_profile, params_to_dict, spec_from_dict, NetworkSpec
from .verify import concentration_tailcheck, mc_rademacher, mgf_check, rate_experiment

RATE_SCHEMA = ("n", "rep_count", "mean_error", "std_error")
TAIL_SCHEMA = ("epsilon", "valid", "empirical_freq", "bound")
BOUNDS_SCHEMA = ("name", "side", "constant", "rate_at_nm", "total", "preconditions_ok")
ESTIMATE_SCHEMA = ("restart", "best_value")
RADEMACHER_SCHEMA = ("n", "trials", "mc_mean", "mc_std_error", "bound")
LECAM_SCHEMA = ("quantity", "value")

_PLOT_KINDS = ("rate_loglog", "tail_overlay", "bound_compare")
_KIND_SCHEMA = {
    "rate_loglog": RATE_SCHEMA,
    "tail_overlay": TAIL_SCHEMA,
    "bound_compare": BOUNDS_SCHEMA,
}


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def config_hash(config) -> str:
    return hashlib.sha256(json.dumps(config, sort_keys=True).encode("utf-8")).hexdigest()[:16]


def write_csv(path: str, header, rows, config, seed: int) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# config_sha256={config_hash(config)} seed={seed}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _load_config(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read config {path}: {exc}") from exc


def _require(config: dict, *keys):
    for key in keys:
        if key not in config:
            raise ValidationError(f"config is missing required key {key!r}")
    return [config[key] for key in keys]


def _ascent_config(config: dict, seed: int) -> AscentConfig:
    opts = dict(config.get("ascent", {}))
    opts["seed"] = seed
    try:
        return AscentConfig(**opts)
    except TypeError as exc:
        raise ValidationError(f"bad ascent options: {exc}") from exc


def _load_samples_csv(path: str, dim: int):
    try:
        data = np.loadtxt(path, delimiter=",", ndmin=2)
    except (OSError, ValueError) as exc:
        raise ValidationError(f"cannot read samples from {path}: {exc}") from exc
    if data.shape[1] != dim:
        raise SchemaError(f"sample file {path} has {data.shape[1]} columns, expected {dim}")
    from .distributions import SampleSet

    return SampleSet(data=data, seed=-1)


# -- subcommands ---------------------------------------------------------------


def cmd_estimate(args) -> int:
    config = _load_config(args.config)
    seed = args.seed if args.seed is not None else int(config.get("seed", 0))
    network, constraints = _require(config, "network", "constraints")
    spec = spec_from_dict(network)
    cs = constraints_from_dict(constraints)
    n = int(config.get("n", 0))
    m = int(config.get("m", 0))
    if "x_csv" in config:
        (y_csv,) = _require(config, "y_csv")
        xs = _load_samples_csv(config["x_csv"], spec.input_dim)
        ys = _load_samples_csv(y_csv, spec.input_dim)
    else:
        x_dict, y_dict = _require(config, "x", "y")
        dist_x = dist_from_dict(x_dict)
        dist_y = dist_from_dict(y_dict)
        if n < 1 or m < 1:
            raise ValidationError("synthesised inputs need positive n and m in the config")
        xs = sample(dist_x, n, derive_seed(seed, 0))
        ys = sample(dist_y, m, derive_seed(seed, 1))
    result = estimate_nnd(xs, ys, spec, cs, _ascent_config(config, derive_seed(seed, 2)))
    payload = {
        "value": result.value,
        "sign_branch": result.sign_branch,
        "per_restart": list(result.per_restart),
    }
    if args.dump_witness:
        payload["witness"] = params_to_dict(result.witness)
    print(json.dumps(payload, indent=2, sort_keys=True))
    if args.json_out:
        with open(args.json_out, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
    if args.csv_out:
        rows = [(i, v) for i, v in enumerate(result.per_restart)]
        rows.append(("overall", result.value))
        write_csv(args.csv_out, ESTIMATE_SCHEMA, rows, config, seed)
    return 0


def _bounds_reports(config: dict):
    network, constraints, n, m = _require(config, "network", "constraints", "n", "m")
    spec = spec_from_dict(network)
    cs = constraints_from_dict(constraints)
    cs.validate_against(spec)
    n = int(n)
    m = int(m)
    h = spec.input_dim
    delta = float(config.get("delta", 0.05))
    gamma_ub = float(config.get("gamma_unbounded", 1.0))
    gamma_b = float(config.get("gamma_bounded", 1.0))
    profiles = spec.activations
    reports = [
        bnd.lower_bound_unbounded(gamma_ub, n, m, cs, profiles),
        bnd.lower_bound_bounded(gamma_b, n, m, cs, profiles),
        bnd.upper_bound_unbounded(gamma_ub, n, m, h, cs, profiles, delta),
        bnd.upper_bound_bounded(gamma_b, n, m, h, cs, profiles, delta),
        bnd.rademacher_bound(gamma_ub, n, h, cs, profiles),
    ]
    return reports


def cmd_bounds(args) -> int:
    config = _load_config(args.config)
    seed = args.seed if args.seed is not None else int(config.get("seed", 0))
    reports = _bounds_reports(config)
    rows = [
        (r.name, r.side, r.constant, r.rate_value, r.total, r.preconditions_ok) for r in reports
    ]
    widths = [max(len(str(row[0])) for row in rows), 5]
    print(f"{'name':<{widths[0]}}  {'side':<5}  {'constant':>12}  {'rate':>10}  {'total':>12}  pre_ok")
    for name, side, constant, rate, total, ok in rows:
        print(f"{name:<{widths[0]}}  {side:<5}  {constant:12.6g}  {rate:10.6g}  {total:12.6g}  {ok}")
    print(json.dumps([r.to_dict() for r in reports], indent=2, sort_keys=True))
    if args.csv_out:
        write_csv(args.csv_out, BOUNDS_SCHEMA, rows, config, seed)
    return 0


def cmd_lecam(args) -> int:
    config = {
        "gamma": args.gamma,
        "n": args.n,
        "m": args.m,
        "h": args.h,
        "depth": args.depth,
        "radii": args.radii,
        "samples": args.samples,
        "grid_deg": args.grid_deg,
    }
    seed = args.seed if args.seed is not None else 0
    radii = tuple(float(r) for r in args.radii.split(","))
    if len(radii) != args.depth:
        raise ValidationError(f"need {args.depth} radii, got {len(radii)}")
    if args.depth != 2:
        raise ValidationError("the lecam command's oracle estimate requires depth 2")
    cs = ConstraintSet("frobenius", radii)
    profiles = bnd.relu_lower_bound_profiles(args.gamma, cs)
    spec = NetworkSpec(input_dim=args.h, widths=(1,), activations=profiles)
    quad = lecam_gaussian_quadruple(args.gamma, args.n, args.m, args.h)
    kl = total_kl(quad)
    lower = bnd.lower_bound_unbounded(args.gamma, args.n, args.m, cs, profiles)
    gap = witness_gap_exact(witness_chain(spec, cs, quad), QuadratureConfig())
    xs = sample(quad.mu1, args.samples, derive_seed(seed, 0))
    ys = sample(quad.nu1, args.samples, derive_seed(seed, 1))
    estimate = brute_force_nnd(xs, ys, spec, cs, args.grid_deg)
    ordered = lower.total <= gap <= estimate + args.slack
    rows = [
        ("mean1_sq", float(np.dot(quad.mean1, quad.mean1))),
        ("mean2_sq", float(np.dot(quad.mean2, quad.mean2))),
        ("cross", float(np.dot(quad.mean1, quad.mean2))),
        ("tau2", quad.tau2),
        ("kl_total", kl),
        ("lower_bound_total", lower.total),
        ("witness_gap", gap),
        ("bruteforce_estimate", estimate),
        ("ordering_pass", ordered),
    ]
    print(f"KL={kl:.6f}")
    for name, value in rows:
        print(f"{name}: {_fmt(value)}")
    print(f"lower <= witness-gap <= estimate: {'PASS' if ordered else 'FAIL'}")
    if args.csv_out:
        write_csv(args.csv_out, LECAM_SCHEMA, rows, config, seed)
    return 0


def cmd_rademacher(args) -> int:
    config = _load_config(args.config)
    seed = args.seed if args.seed is not None else int(config.get("seed", 0))
    network, constraints, dist_dict, n, trials = _require(
        config, "network", "constraints", "dist", "n", "trials"
    )
    spec = spec_from_dict(network)
    cs = constraints_from_dict(constraints)
    dist = dist_from_dict(dist_dict)
    n = int(n)
    trials = int(trials)
    result = mc_rademacher(
        dist, spec, cs, n, trials, _ascent_config(config, 0), seed=seed,
        mode=config.get("mode", "auto"),
    )
    bound = bnd.rademacher_bound(dist.gamma, n, spec.input_dim, cs, spec.activations)
    print(
        f"mc mean={result.mean:.6f} +- {result.std_error:.6f} (trials={trials}); "
        f"bound={bound.total:.6f}; within={result.mean <= bound.total}"
    )
    if args.csv_out:
        rows = [(n, trials, result.mean, result.std_error, bound.total)]
        write_csv(args.csv_out, RADEMACHER_SCHEMA, rows, config, seed)
    return 0


def cmd_concentration(args) -> int:
    config = _load_config(args.config)
    seed = args.seed if args.seed is not None else int(config.get("seed", 0))
    network, constraints, dx, dy, n, m, trials, eps_grid = _require(
        config, "network", "constraints", "dist_x", "dist_y", "n", "m", "trials", "eps_grid"
    )
    spec = spec_from_dict(network)
    cs = constraints_from_dict(constraints)
    dist_x = dist_from_dict(dx)
    dist_y = dist_from_dict(dy)
    n, m, trials = int(n), int(m), int(trials)
    check = concentration_tailcheck(
        (dist_x, dist_y), spec, cs, n, m, trials, eps_grid,
        mode=config.get("mode", "brute_force"), seed=seed,
    )
    rows = list(zip(check.epsilons, check.valid, check.empirical_freq, check.bounds))
    for eps, valid, freq, bound in rows:
        print(f"eps={eps:.4f} valid={valid} freq={freq:.5f} bound={bound:.5f}")

    mgf_cfg = config.get("mgf")
    if mgf_cfg:
        dist = dist_from_dict(mgf_cfg["dist"]) if "dist" in mgf_cfg else dist_x
        a_matrix = np.asarray(mgf_cfg.get("a_matrix", np.eye(dist.dim).tolist()))
        snorm = max(
            float(np.linalg.eigvalsh(a_matrix.T @ a_matrix).max()), np.finfo(float).tiny
        )
        for frac in mgf_cfg.get("eta_fracs", [0.25, 0.5, 0.75]):
            eta = frac / (2.0 * dist.tau2 * snorm)
            empirical, bound = mgf_check(
                dist, a_matrix, eta, int(mgf_cfg.get("trials", 20000)), seed=derive_seed(seed, 7)
            )
            print(f"mgf eta={eta:.5f} empirical={empirical:.5f} bound={bound:.5f}")
    if args.csv_out:
        write_csv(args.csv_out, TAIL_SCHEMA, rows, config, seed)
    return 0


def _parse_grid(text: str):
    if ":" in text:
        lo, hi = (int(v) for v in text.split(":"))
        grid = []
        n = lo
        while n <= hi:
            grid.append(n)
            n *= 2
        return grid
    return [int(v) for v in text.split(",")]


def cmd_rate(args) -> int:
    config = _load_config(args.config) if args.config else {}
    seed = args.seed if args.seed is not None else int(config.get("seed", 0))
    if "network" in config:
        spec = spec_from_dict(config["network"])
        cs = constraints_from_dict(config["constraints"])
    else:
        spec = NetworkSpec(2, (1,), (activation_profile("relu"),))
        cs = ConstraintSet("frobenius", (1.0, 1.0))
    dist = (
        dist_from_dict(config["dist"])
        if "dist" in config
        else gaussian_spec(np.zeros(spec.input_dim), 1.0, 1.0)
    )
    grid = _parse_grid(args.grid) if args.grid else config.get("grid", [64, 128, 256, 512, 1024, 2048])
    reps = args.reps if args.reps is not None else int(config.get("reps", 20))

    def pair_builder(n, rep_seed):
        return sample(dist, n, derive_seed(rep_seed, 0)), sample(dist, n, derive_seed(rep_seed, 1))

    result = rate_experiment(
        pair_builder, spec, cs, grid, reps, _ascent_config(config, 0), seed=seed
    )
    for n, rep_count, mean_error, std_error in result.rows:
        print(f"n={n} reps={rep_count} mean_error={mean_error:.6f} std_error={std_error:.6f}")
    print(f"slope={result.slope:.4f} intercept={result.intercept:.4f}")
    if args.csv_out:
        write_csv(args.csv_out, RATE_SCHEMA, result.rows, config or {"grid": grid, "reps": reps}, seed)
    return 0


# -- plot script emission ------------------------------------------------------

_PLOT_TEMPLATES = {
    "rate_loglog": '''"""Log-log estimation error plot; run: python {name} [csv]"""
import csv, sys
import numpy as np
import matplotlib.pyplot as plt

path = sys.argv[1] if len(sys.argv) > 1 else {csv_path!r}
with open(path) as fh:
    rows = [r for r in csv.DictReader(line for line in fh if not line.startswith("#"))]
n = np.array([float(r["n"]) for r in rows])
err = np.array([float(r["mean_error"]) for r in rows])
slope, intercept = np.polyfit(np.log(n), np.log(err), 1)
fig, ax = plt.subplots()
ax.loglog(n, err, "o", label="mean error")
ax.loglog(n, np.exp(intercept) * n ** slope, "-", label=f"fit slope {{slope:.3f}}")
ax.loglog(n, err[0] * (n / n[0]) ** -0.5, "--", label="reference slope -1/2")
ax.set_xlabel("n"); ax.set_ylabel("mean error"); ax.legend()
fig.savefig("rate_loglog.png", dpi=150)
print("wrote rate_loglog.png")
''',
    "tail_overlay": '''"""Tail frequency vs concentration bound; run: python {name} [csv]"""
import csv, sys
import numpy as np
import matplotlib.pyplot as plt

path = sys.argv[1] if len(sys.argv) > 1 else {csv_path!r}
with open(path) as fh:
    rows = [r for r in csv.DictReader(line for line in fh if not line.startswith("#"))]
eps = np.array([float(r["epsilon"]) for r in rows])
freq = np.array([float(r["empirical_freq"]) for r in rows])
bound = np.array([float(r["bound"]) for r in rows])
fig, ax = plt.subplots()
ax.semilogy(eps, np.maximum(freq, 1e-6), "o-", label="empirical frequency")
ax.semilogy(eps, bound, "s--", label="closed-form bound")
ax.set_xlabel("epsilon"); ax.set_ylabel("tail probability"); ax.legend()
fig.savefig("tail_overlay.png", dpi=150)
print("wrote tail_overlay.png")
''',
    "bound_compare": '''"""Bound totals by name; run: python {name} [csv]"""
import csv, sys
import numpy as np
import matplotlib.pyplot as plt

path = sys.argv[1] if len(sys.argv) > 1 else {csv_path!r}
with open(path) as fh:
    rows = [r for r in csv.DictReader(line for line in fh if not line.startswith("#"))]
names = [r["name"] for r in rows]
totals = np.array([float(r["total"]) for r in rows])
fig, ax = plt.subplots()
ax.bar(range(len(names)), totals)
ax.set_xticks(range(len(names)), names, rotation=30, ha="right")
ax.set_ylabel("bound total")
fig.tight_layout()
fig.savefig("bound_compare.png", dpi=150)
print("wrote bound_compare.png")
''',
}


def emit_plot_script(csv_path: str, kind: str, out_path: str) -> None:
    """Write a standalone matplotlib script rendering the CSV; no rendering here."""
    if kind not in _PLOT_KINDS:
        raise ValidationError(f"unknown plot kind {kind!r}; choose from {_PLOT_KINDS}")
    try:
        with open(csv_path, "r", encoding="utf-8") as fh:
            header = None
            for line in fh:
                if not line.startswith("#"):
                    header = line.strip().split(",")
                    break
    except OSError as exc:
        raise ValidationError(f"cannot read CSV {csv_path}: {exc}") from exc
    if header is None:
        raise SchemaError(f"{csv_path} has no header row")
    for column in _KIND_SCHEMA[kind]:
        if column not in header:
            raise SchemaError(f"{csv_path} is missing required column {column!r} for {kind}")
    script = _PLOT_TEMPLATES[kind].format(csv_path=csv_path, name=out_path)
    with open(out_path, "w", encoding="utf-8") as fh:
        fh.write(script)


def cmd_emit_plot_script(args) -> int:
    emit_plot_script(args.csv, args.kind, args.out)
    print(f"wrote {args.out}")
    return 0


# -- parser --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nndist",
        description="Neural net distance estimation, bound constants and Monte Carlo checks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, config_required=True):
        p.add_argument("--config", required=config_required, help="JSON experiment config")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--csv-out", default=None, help="write results as CSV")

    p = sub.add_parser("estimate", help="empirical distance between two sample sets")
    add_common(p)
    p.add_argument("--json-out", default=None)
    p.add_argument("--dump-witness", action="store_true")
    p.set_defaults(handler=cmd_estimate)

    p = sub.add_parser("bounds", help="all closed-form bound reports for a config")
    add_common(p)
    p.set_defaults(handler=cmd_bounds)

    p = sub.add_parser("lecam", help="two-point construction: constants, KL, ordering")
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--h", type=int, default=2)
    p.add_argument("--depth", type=int, default=2)
    p.add_argument("--radii", default="1,1")
    p.add_argument("--samples", type=int, default=10000)
    p.add_argument("--grid-deg", type=float, default=None)
    p.add_argument("--slack", type=float, default=0.02)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--csv-out", default=None)
    p.set_defaults(handler=cmd_lecam)

    p = sub.add_parser("rademacher", help="Monte Carlo Rademacher complexity vs bound")
    add_common(p)
    p.set_defaults(handler=cmd_rademacher)

    p = sub.add_parser("concentration", help="tail frequencies and MGF check")
    add_common(p)
    p.set_defaults(handler=cmd_concentration)

    p = sub.add_parser("rate", help="estimation error rate over a sample-size grid")
    add_common(p, config_required=False)
    p.add_argument("--grid", default=None, help="lo:hi doubling grid or comma list")
    p.add_argument("--reps", type=int, default=None)
    p.set_defaults(handler=cmd_rate)

    p = sub.add_parser("emit-plot-script", help="write a standalone plotting script for a CSV")
    p.add_argument("--csv", required=True)
    p.add_argument("--kind", required=True, choices=_PLOT_KINDS)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_emit_plot_script)
    return parser


def run(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0
    try:
        return args.handler(args)
    except (ValidationError, SchemaError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except NNDistError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
