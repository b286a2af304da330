"""Command-line front end: CSV emitters for every diagnostic plus a
`repro` pipeline that regenerates the full figure dataset from the
shipped presets.

Exit codes: 0 success, 2 usage/config error, 3 numeric failure (a
branch expression left the reals, or a degenerate Jacobian).

Every output CSV gets a sidecar `<out>.manifest.json` recording the
subcommand, the fully resolved config, and all parameter values;
re-running with the same manifest inputs reproduces the CSV byte for
byte. Reals are printed with 17 significant digits so the CSVs
round-trip binary64 exactly.
"""

from __future__ import annotations

import argparse
import csv
import datetime
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    bifurcation_scan,
    chi_square_uniformity,
    classify,
    cobweb,
    histogram,
    lyapunov_spectrum,
    scatter_pairs,
)
from .system import (
    COORDS,
    ConfigError,
    PRESET_NAMES,
    State4,
    SystemConfig,
    config_hash,
    config_to_dict,
    generate,
    load_config,
    load_preset,
)


def _fmt(v: float) -> str:
    return format(v, ".17g")


def _parse_seed_state(text: str) -> State4:
    parts = text.split(",")
    if len(parts) != 4:
        raise argparse.ArgumentTypeError("seed state must be 4 comma-separated reals")
    try:
        return State4(*(float(p) for p in parts))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _parse_r_range(text: str) -> tuple[float, float, int]:
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("r range must be LO:HI:STEPS")
    try:
        lo, hi, steps = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    return lo, hi, steps


def _resolve_config(args: argparse.Namespace, use_r: bool = True) -> SystemConfig:
    """Load --config (a file path or a preset name) and apply overrides."""
    name = args.config
    if Path(name).exists():
        cfg = load_config(name)
    elif name in PRESET_NAMES:
        cfg = load_preset(name)
    else:
        raise ConfigError(f"config {name!r} is neither a readable file nor a preset name")
    if use_r and getattr(args, "r", None) is not None:
        cfg = replace(cfg, r=args.r)
    if getattr(args, "burn_in", None) is not None:
        cfg = replace(cfg, burn_in=args.burn_in)
    if getattr(args, "seed_state", None) is not None:
        cfg = replace(cfg, initial=args.seed_state)
    return cfg


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _write_manifest(out: Path, subcommand: str, cfg: SystemConfig, parameters: dict,
                    outputs: list[str]) -> None:
    manifest = {
        "tool": "hybridchaos",
        "version": __version__,
        "subcommand": subcommand,
        "parameters": parameters,
        "config": config_to_dict(cfg),
        "config_hash": config_hash(cfg),
        "outputs": outputs,
    }
    path = Path(str(out) + ".manifest.json")
    path.write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n", encoding="utf-8")


# --- subcommands --------------------------------------------------------

def _cmd_generate(args) -> int:
    cfg = _resolve_config(args)
    traj = generate(cfg, args.n)
    out = Path(args.out)
    rows = (
        (i, _fmt(s[0]), _fmt(s[1]), _fmt(s[2]), _fmt(s[3]))
        for i, s in enumerate(traj.states)
    )
    _write_csv(out, ["i", "x", "y", "z", "w"], rows)
    _write_manifest(out, "generate", cfg, {"n": args.n}, [out.name])
    return 0


def _lyap_task(task):
    cfg, n, delta = task
    return lyapunov_spectrum(cfg, n, delta=delta)


def _cmd_lyapunov(args) -> int:
    cfg = _resolve_config(args)
    r_values: list[float] = []
    if args.r:
        r_values.extend(args.r)
    if args.r_range is not None:
        lo, hi, steps = args.r_range
        if steps < 1:
            raise ConfigError("r range needs at least 1 step")
        r_values.extend(float(v) for v in np.linspace(lo, hi, steps))
    if not r_values:
        raise ConfigError("no r values: pass --r (repeatable) and/or --r-range LO:HI:STEPS")

    tasks = [(replace(cfg, r=rv), args.n, args.delta) for rv in r_values]
    if args.jobs and args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_lyap_task, tasks))
    else:
        results = [_lyap_task(t) for t in tasks]

    out = Path(args.out)
    rows = [
        (_fmt(res.r), *(_fmt(l) for l in res.lambdas), classify(res, args.tol).value)
        for res in results
    ]
    _write_csv(out, ["r", "lambda1", "lambda2", "lambda3", "lambda4", "class"], rows)
    params = {
        "r_values": r_values,
        "n": args.n,
        "delta": args.delta,
        "tol": args.tol,
    }
    _write_manifest(out, "lyapunov", cfg, params, [out.name])
    return 0


def _cmd_bifurcation(args) -> int:
    cfg = _resolve_config(args)
    lo, hi, steps = args.r_range
    if not lo < hi:
        raise ConfigError(f"r range: need LO < HI, got {lo}:{hi}")
    data = bifurcation_scan(cfg, lo, hi, steps, args.keep, coord=args.coord, jobs=args.jobs)
    out = Path(args.out)
    _write_csv(out, ["r", "value"], ((_fmt(r), _fmt(v)) for r, v in data.points))
    skip_path = out.with_suffix(".skipped.json")
    skip_payload = [
        {"r": s.r, "component": s.component, "branch": s.branch, "iteration": s.iteration}
        for s in data.skipped
    ]
    skip_path.write_text(json.dumps(skip_payload, sort_keys=True, indent=2) + "\n", "utf-8")
    params = {
        "r_lo": lo,
        "r_hi": hi,
        "steps": steps,
        "keep": args.keep,
        "coord": args.coord,
    }
    _write_manifest(out, "bifurcation", cfg, params, [out.name, skip_path.name])
    return 0


def _cmd_cobweb(args) -> int:
    cfg = _resolve_config(args)
    data = cobweb(cfg, args.coord, args.n)
    out = Path(args.out)
    _write_csv(out, ["u", "v"], ((_fmt(u), _fmt(v)) for u, v in data.points))
    _write_manifest(out, "cobweb", cfg, {"n": args.n, "coord": args.coord}, [out.name])
    return 0


def _cmd_histogram(args) -> int:
    cfg = _resolve_config(args)
    traj = generate(cfg, args.n)
    hist = histogram(traj.coord(args.coord), args.bins)
    chi = chi_square_uniformity(hist)
    out = Path(args.out)
    b = hist.bin_count
    rows = (
        (_fmt(k / b), _fmt((k + 1) / b), int(c))
        for k, c in enumerate(hist.counts)
    )
    _write_csv(out, ["bin_lo", "bin_hi", "count"], rows)
    print(f"chi_square={chi.statistic:.6f} dof={chi.dof}", file=sys.stderr)
    params = {"n": args.n, "coord": args.coord, "bins": args.bins}
    _write_manifest(out, "histogram", cfg, params, [out.name])
    return 0


def _cmd_scatter(args) -> int:
    cfg = _resolve_config(args)
    a, b = args.pair
    if a == b:
        raise ConfigError("scatter coordinates must differ")
    traj = generate(cfg, args.n)
    pairs = scatter_pairs(traj, a, b)
    out = Path(args.out)
    _write_csv(out, ["a", "b"], ((_fmt(u), _fmt(v)) for u, v in pairs))
    _write_manifest(out, "scatter", cfg, {"n": args.n, "pair": f"{a},{b}"}, [out.name])
    return 0


class _ReproStepFailed(Exception):
    def __init__(self, rc: int, argv: list[str]):
        self.rc = rc
        super().__init__(f"repro step failed with exit code {rc}: {' '.join(argv)}")


def _cmd_repro(args) -> int:
    """Regenerate the full diagnostic dataset from the shipped presets."""
    out_dir = Path(args.out_dir or f"repro-{datetime.date.today().isoformat()}")
    out_dir.mkdir(parents=True, exist_ok=True)
    jobs = args.jobs

    def run(argv: list[str]) -> None:
        rc = main(argv)
        if rc != 0:
            raise _ReproStepFailed(rc, argv)

    lyap_lo = 1.2 / args.lyap_points
    run([
        "lyapunov", "--config", "case_i",
        "--r-range", f"{lyap_lo}:1.2:{args.lyap_points}",
        "--n", str(args.lyap_n), "--tol", "0.01",
        *(["--jobs", str(jobs)] if jobs else []),
        "--out", str(out_dir / "lyapunov_case_i.csv"),
    ])
    bif_lo = 1.2 / args.bif_steps
    run([
        "bifurcation", "--config", "case_ii",
        "--r-range", f"{bif_lo}:1.2:{args.bif_steps}",
        "--keep", str(args.bif_keep), "--coord", "x",
        *(["--jobs", str(jobs)] if jobs else []),
        "--out", str(out_dir / "bifurcation_case_ii.csv"),
    ])
    run([
        "cobweb", "--config", "case_i", "--r", "0.5",
        "--n", str(args.cobweb_n), "--coord", "x",
        "--out", str(out_dir / "cobweb_case_i.csv"),
    ])
    run([
        "histogram", "--config", "case_i", "--r", "0.5",
        "--n", str(args.hist_n), "--bins", "100", "--coord", "x",
        "--out", str(out_dir / "histogram_case_i.csv"),
    ])
    run([
        "scatter", "--config", "case_ii", "--r", "0.4",
        "--n", str(args.scatter_n), "--pair", "x,y",
        "--out", str(out_dir / "scatter_case_ii.csv"),
    ])

    summary = {
        "tool": "hybridchaos",
        "version": __version__,
        "subcommand": "repro",
        "parameters": {
            "lyap_points": args.lyap_points,
            "lyap_n": args.lyap_n,
            "bif_steps": args.bif_steps,
            "bif_keep": args.bif_keep,
            "cobweb_n": args.cobweb_n,
            "hist_n": args.hist_n,
            "scatter_n": args.scatter_n,
        },
        "outputs": sorted(p.name for p in out_dir.iterdir() if p.name != "repro.manifest.json"),
    }
    (out_dir / "repro.manifest.json").write_text(
        json.dumps(summary, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    return 0


# --- parser --------------------------------------------------------------

def _add_config_options(p: argparse.ArgumentParser, with_single_r: bool = True) -> None:
    p.add_argument("--config", required=True,
                   help="config file path, or a preset name (%s)" % ", ".join(PRESET_NAMES))
    if with_single_r:
        p.add_argument("--r", type=float, help="override the config's control parameter")
    p.add_argument("--burn-in", type=int, dest="burn_in",
                   help="override the config's burn-in iteration count")
    p.add_argument("--seed-state", type=_parse_seed_state, dest="seed_state",
                   help="override the initial state: x,y,z,w")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hybridchaos",
        description="4D hybrid chaotic map: trajectories and diagnostics as CSV",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="iterate the system and write i,x,y,z,w")
    _add_config_options(p)
    p.add_argument("--n", type=int, required=True, help="number of post-burn-in states")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_generate)

    p = sub.add_parser("lyapunov", help="Lyapunov spectrum per r value")
    _add_config_options(p, with_single_r=False)
    p.add_argument("--r", type=float, action="append",
                   help="an r value to analyze (repeatable)")
    p.add_argument("--r-range", type=_parse_r_range, dest="r_range", metavar="LO:HI:STEPS",
                   help="evenly spaced r grid, endpoints included")
    p.add_argument("--n", type=int, default=20000, help="iterations per estimate")
    p.add_argument("--delta", type=float, default=1e-6,
                   help="finite-difference perturbation")
    p.add_argument("--tol", type=float, default=0.01,
                   help="dead band around zero for classification")
    p.add_argument("--jobs", type=int, help="worker processes for the r sweep")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_lyapunov)

    p = sub.add_parser("bifurcation", help="attractor samples over an r sweep")
    _add_config_options(p, with_single_r=False)
    p.add_argument("--r-range", type=_parse_r_range, dest="r_range", metavar="LO:HI:STEPS",
                   required=True)
    p.add_argument("--keep", type=int, default=200,
                   help="post-burn-in values recorded per r")
    p.add_argument("--coord", choices=COORDS, default="x")
    p.add_argument("--jobs", type=int, help="worker processes for the r sweep")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_bifurcation)

    p = sub.add_parser("cobweb", help="staircase orbit data for one coordinate")
    _add_config_options(p)
    p.add_argument("--n", type=int, required=True, help="number of transitions")
    p.add_argument("--coord", choices=COORDS, default="x")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_cobweb)

    p = sub.add_parser("histogram", help="bin one coordinate; chi-square on stderr")
    _add_config_options(p)
    p.add_argument("--n", type=int, required=True, help="number of samples")
    p.add_argument("--coord", choices=COORDS, default="x")
    p.add_argument("--bins", type=int, default=100)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_histogram)

    p = sub.add_parser("scatter", help="coordinate-pair scatter data")
    _add_config_options(p)
    p.add_argument("--n", type=int, required=True, help="number of states")
    p.add_argument("--pair", default="x,y", type=lambda s: tuple(s.split(",")),
                   help="two coordinates, e.g. x,y")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_scatter)

    p = sub.add_parser("repro", help="regenerate the full preset dataset")
    p.add_argument("--out-dir", dest="out_dir")
    p.add_argument("--jobs", type=int)
    p.add_argument("--lyap-points", type=int, default=50, dest="lyap_points")
    p.add_argument("--lyap-n", type=int, default=5000, dest="lyap_n")
    p.add_argument("--bif-steps", type=int, default=600, dest="bif_steps")
    p.add_argument("--bif-keep", type=int, default=200, dest="bif_keep")
    p.add_argument("--cobweb-n", type=int, default=500, dest="cobweb_n")
    p.add_argument("--hist-n", type=int, default=100000, dest="hist_n")
    p.add_argument("--scatter-n", type=int, default=10000, dest="scatter_n")
    p.set_defaults(fn=_cmd_repro)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except _ReproStepFailed as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.rc
    except ValueError as exc:  # ConfigError, TooFewSamplesError, bad parameters
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ArithmeticError as exc:  # NonFiniteStateError, DegenerateJacobianError, ScanFailedError
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
