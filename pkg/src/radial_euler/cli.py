"""Command-line entry points: run | sweep | decay | converge | verify.

Exit status 0 means success, 2 an acceptance failure and 1 a runtime or
configuration error.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
import time
import traceback
from pathlib import Path
from typing import Callable, Dict, List, Optional


from .config import ConfigError, SimConfig, load_config, serialize
from .io import write_ledger_csv, write_manifest, write_table_csv

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_ACCEPTANCE = 2

log = logging.getLogger("radial_euler")


def code_version() -> str:
    try:
        from importlib.metadata import version

        return version("artifact")
    except Exception:
        return "unknown"


def _manifest(config: SimConfig, run_id: str, extra: Dict[str, object]) -> Dict[str, object]:
    entries: Dict[str, object] = {}
    for line in serialize(config.with_(run_id=run_id)).splitlines():
        key, _, value = line.partition(" = ")
        entries[key] = value
    entries["code_version"] = code_version()
    entries["eos_descriptor"] = config.eos_spec().describe()
    entries.update(extra)
    return entries


def _say(quiet: bool, text: str) -> None:
    if not quiet:
        print(text)


# -- subcommands ----------------------------------------------------------------

def cmd_run(config: SimConfig, out: Path, jobs: int = 1, quiet: bool = False) -> int:
    from .dynamics import run

    run_id = config.run_id or config.digest()
    t0 = time.time()
    outcome = run(config, snapshot_dir=out)
    write_ledger_csv(outcome.ledger, out / f"ledger_{run_id}.csv")
    write_manifest(
        out / f"manifest_{run_id}.txt",
        _manifest(config, run_id, {
            "h": config.r_max / config.n,
            "status": outcome.status,
            "T_end": repr(outcome.T_end),
            "blowup_time": "none" if outcome.blowup_time is None else repr(outcome.blowup_time),
            "message": outcome.message or "none",
            "steps": outcome.steps,
            "dt_floor_used": repr(config.thresholds().floor_for(config.scenario().grid)),
            "wall_time": f"{time.time() - t0:.3f}",
            "partial": "false",
        }),
    )
    _say(quiet, f"run {run_id}: {outcome.status} at t = {outcome.T_end:.6g} ({len(outcome.ledger)} ledger rows)")
    return EXIT_OK


SWEEP_SLOPE = (-2.2, -1.8)
SWEEP_REFINE_TOL = 0.02


def cmd_sweep(config: SimConfig, out: Path, jobs: int = 1, quiet: bool = False) -> int:
    from .experiments import lifespan_sweep

    if config.eos != "polytropic":
        raise ConfigError("sweep needs eos = polytropic")
    t0 = time.time()
    base = config.scenario(epsilon=config.epsilons[0] if config.epsilons else 0.0)
    res = lifespan_sweep(base, config.epsilons, config.probe_time, config.thresholds(),
                         refine=bool(config.refine), jobs=jobs,
                         ko=(config.ko_axis, config.ko_far))
    rows = res["rows"]
    run_id = config.run_id or config.digest()
    write_table_csv(
        out / f"sweep_{run_id}.csv",
        ["epsilon", "T", "T_refined", "refinement_change", "n", "r_max", "probe_time", "min_U_sigma",
         "gradient_factor", "method"],
        [[r.epsilon, r.T, r.T_refined if r.T_refined is not None else math.nan,
          r.refinement_change if r.refinement_change is not None else math.nan,
          r.n, r.r_max, r.probe_time, r.slope_probe, config.gradient_factor, r.method] for r in rows],
    )
    Ts = [r.T for r in rows]
    monotone = all(a > b for a, b in zip(Ts, Ts[1:]))
    slope_ok = SWEEP_SLOPE[0] <= res["slope"] <= SWEEP_SLOPE[1]
    changes = [r.refinement_change for r in rows if r.refinement_change is not None]
    refine_ok = all(c <= SWEEP_REFINE_TOL for c in changes)
    passed = slope_ok and refine_ok and monotone
    write_manifest(
        out / f"manifest_{run_id}.txt",
        _manifest(config, run_id, {
            "slope": repr(res["slope"]),
            "tau0_sq": repr(res["tau0_sq"]),
            "max_refinement_change": repr(max(changes)) if changes else "none",
            "accept_slope": slope_ok,
            "accept_refinement": refine_ok,
            "accept_monotone": monotone,
            "wall_time": f"{time.time() - t0:.3f}",
            "partial": "false",
        }),
    )
    _say(quiet, f"sweep: slope {res['slope']:.4f}, tau0^2 {res['tau0_sq']:.4g}, "
                f"max refinement change {max(changes) if changes else float('nan'):.3g}")
    return EXIT_OK if passed else EXIT_ACCEPTANCE


NEAR_CONE_RANGE = (-1.8, -1.2)
INTERIOR_MAX = -1.6


def cmd_decay(config: SimConfig, out: Path, jobs: int = 1, quiet: bool = False) -> int:
    from .experiments import decay_study

    t0 = time.time()
    rep = decay_study(config)
    run_id = config.run_id or config.digest()
    write_ledger_csv(rep.ledger, out / f"decay_{run_id}.csv")
    near = rep.exponents.get("near_dr_vf")
    inner = rep.exponents.get("inner_dt_vv")
    checks = {
        "accept_no_blowup": rep.outcome.status == "Completed",
        "accept_energy_ratio": rep.energy_ratio is not None and 0.5 <= rep.energy_ratio <= 2.0,
        "accept_near_cone": near is not None and NEAR_CONE_RANGE[0] <= near <= NEAR_CONE_RANGE[1],
        "accept_interior": inner is not None and inner <= INTERIOR_MAX,
    }
    extra = {
        "status": rep.outcome.status,
        "finding": rep.finding or "none",
        "fit_window": f"{rep.window[0]!r}, {rep.window[1]!r}",
        "energy_ratio_E2": repr(rep.energy_ratio),
    }
    for name, val in rep.exponents.items():
        extra[f"exponent_{name}"] = repr(val)
    extra.update(checks)
    extra["wall_time"] = f"{time.time() - t0:.3f}"
    extra["partial"] = "false"
    write_manifest(out / f"manifest_{run_id}.txt", _manifest(config, run_id, extra))
    _say(quiet, "decay: " + ", ".join(f"{k} {v}" for k, v in rep.exponents.items()))
    return EXIT_OK if all(checks.values()) else EXIT_ACCEPTANCE


CONVERGENCE_MIN_ORDER = 3.5


def cmd_converge(config: SimConfig, out: Path, jobs: int = 1, quiet: bool = False) -> int:
    from .experiments import convergence_study

    t0 = time.time()
    spec = config.scenario()
    rep = convergence_study(spec, config.resolutions, dissipation=config.dissipation)
    run_id = config.run_id or config.digest()
    write_table_csv(
        out / f"converge_{run_id}.csv",
        ["quantity", "diff_n_2n", "diff_2n_4n", "order"],
        [[k, e[0], e[1], rep.orders[k] if rep.orders[k] is not None else math.nan]
         for k, e in rep.errors.items()],
    )
    ok = rep.exact or rep.min_order >= CONVERGENCE_MIN_ORDER
    write_manifest(
        out / f"manifest_{run_id}.txt",
        _manifest(config, run_id, {
            "min_order": "exact" if rep.exact else repr(rep.min_order),
            "accept_order": ok,
            "wall_time": f"{time.time() - t0:.3f}",
            "partial": "false",
        }),
    )
    _say(quiet, "converge: exact" if rep.exact else f"converge: min observed order {rep.min_order:.3f}")
    return EXIT_OK if ok else EXIT_ACCEPTANCE


def cmd_verify(config: SimConfig, out: Path, jobs: int = 1, quiet: bool = False) -> int:
    from .verify import run_checks

    t0 = time.time()
    results = run_checks()
    rows = [[name, "pass" if ok else "fail", detail] for name, ok, detail in results]
    write_table_csv(out / "verify.csv", ["check", "result", "detail"], rows)
    passed = all(ok for _, ok, _ in results)
    write_manifest(
        out / "manifest_verify.txt",
        _manifest(config, "verify", {
            "checks": len(results),
            "failed": ", ".join(n for n, ok, _ in results if not ok) or "none",
            "wall_time": f"{time.time() - t0:.3f}",
            "partial": "false",
        }),
    )
    for name, ok, detail in results:
        _say(quiet, f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    return EXIT_OK if passed else EXIT_ACCEPTANCE


COMMANDS: Dict[str, Callable[..., int]] = {
    "run": cmd_run,
    "sweep": cmd_sweep,
    "decay": cmd_decay,
    "converge": cmd_converge,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="radial-euler", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", type=Path, help="flat key = value configuration file")
    parser.add_argument("--out", type=Path, help="output directory (overrides the config)")
    parser.add_argument("--jobs", type=int, default=1, help="concurrent runs for sweeps")
    parser.add_argument("--resolution", type=int, help="override the grid size n")
    parser.add_argument("--quiet", action="store_true", help="suppress progress output")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # argparse reports usage errors with status 2, which is reserved for acceptance failures
        return EXIT_OK if exc.code in (0, None) else EXIT_ERROR
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(message)s")
    out: Optional[Path] = None
    config: Optional[SimConfig] = None
    try:
        config = load_config(args.config) if args.config else SimConfig(study=args.command)
        if args.resolution is not None:
            config = config.with_(n=args.resolution)
        if args.jobs < 1:
            raise ConfigError("--jobs must be at least 1")
        out = args.out if args.out is not None else Path(config.out)
        out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](config, out, jobs=args.jobs, quiet=args.quiet)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        if not args.quiet:
            traceback.print_exc()
        if out is not None and config is not None:
            try:
                write_manifest(out / f"manifest_{args.command}_failed.txt",
                               _manifest(config, config.run_id or args.command,
                                         {"error": str(exc), "partial": "true"}))
            except Exception:
                pass
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
