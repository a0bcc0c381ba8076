"""Command-line entry point: ``d2dmalware {streets,speed,survival,phase,snapshot}``."""

from __future__ import annotations

import argparse
import csv
import logging
import math
import sys
from pathlib import Path

import numpy as np

from ._validation import ConfigurationError, PercolationError
from .config import SimConfig
from .engine import STATE_NAMES, states_at, write_snapshot_csv
from .estimators import estimate_speed, estimate_survival
from .experiment import build_environment, run_replicas
from .phase import (
    SUMMARY_HEADER,
    TESTED_HEADER,
    summary_row,
    sweep_curve,
    tested_rows,
)
from .seeds import SCHEME, stream
from .streets import Window, generate_streets, save_streets_csv
from .svg import write_svg

log = logging.getLogger("d2dmalware")

INCOMPLETE = "INCOMPLETE"


def g9(x):
    if x is None:
        return ""
    if isinstance(x, float) and math.isinf(x):
        return "inf"
    return f"{x:.9g}"


def _writer(fh):
    return csv.writer(fh, lineterminator="\n")


def param_columns(cfg, lam, rho):
    p = cfg.model_params(lam=lam, rho=rho)
    return {
        "model": cfg.model,
        "markovian": int(cfg.markovian),
        "gamma": g9(cfg.gamma),
        "lambda": g9(lam),
        "rho": g9(p.rho),
        "r": g9(cfg.r),
        "infection": p.infection.describe(),
        "patch": "" if p.patch is None else p.patch.describe(),
        "half_width": g9(cfg.half_width),
        "master_seed": cfg.master_seed,
    }


def cmd_streets(cfg, out, workers):
    hw = cfg.half_width if cfg.half_width is not None else max(cfg.u) + cfg.r
    streets = generate_streets(cfg.gamma, Window(hw), stream(cfg.master_seed, "streets", 0))
    csv_path, meta = save_streets_csv(streets, out / "streets.csv", seed=cfg.master_seed)
    write_svg(out / "streets.svg", streets)
    log.info("%d segments, %.3f km of street in %s", len(streets), streets.total_length, csv_path)
    return [csv_path, meta, out / "streets.svg"]


def cmd_speed(cfg, out, workers):
    est_path = out / "speed.csv"
    raw_path = out / "speed_replicas.csv"
    est_header = list(param_columns(cfg, cfg.lambdas[0], None)) + [
        "u", "n", "alpha_u", "variance", "rel_deviation", "zero_fraction", "std_error"]
    raw_header = ["lambda", "u", "replica", "environment", "dynamics", "tau_u", "reached",
                  "connected", "censored", "status", "event_count"]
    with open(est_path, "w", newline="") as fe, open(raw_path, "w", newline="") as fr:
        we, wr = _writer(fe), _writer(fr)
        we.writerow(est_header)
        wr.writerow(raw_header)
        for lam in cfg.lambdas:
            params = cfg.model_params(lam=lam)
            for u in cfg.u:
                runs = run_replicas(params, u, cfg.master_seed, cfg.environments,
                                    cfg.dynamics_per_environment, workers=workers)
                est = estimate_speed(runs, u)
                log.info("lambda=%g u=%g: alpha_u=%.4f km/min (n=%d)", lam, u, est.alpha_u, est.n)
                we.writerow(list(param_columns(cfg, lam, None).values()) + [
                    g9(u), est.n, g9(est.alpha_u), g9(est.variance), g9(est.rel_deviation),
                    g9(est.zero_fraction), g9(est.std_error)])
                for k, run in enumerate(runs):
                    env, dyn = divmod(k, cfg.dynamics_per_environment)
                    wr.writerow([g9(lam), g9(u), k, env, dyn, g9(run.tau_u), int(run.reached_radius),
                                 int(run.connected_to_boundary), int(run.censored), run.status,
                                 run.event_count])
    return [est_path, raw_path]


def cmd_survival(cfg, out, workers):
    from .phase import apply_control

    path = out / "survival.csv"
    values = cfg.control_grid or ([cfg.infection_rate] if cfg.markovian else [cfg.patch_window[1]])
    with open(path, "w", newline="") as fh:
        w = _writer(fh)
        w.writerow(list(param_columns(cfg, cfg.lambdas[0], None)) + [
            "u", "control", "control_value", "n_total", "n_connected", "n_survived", "probability"])
        for lam in cfg.lambdas:
            base = cfg.model_params(lam=lam)
            for u in cfg.u:
                for value in values:
                    params = apply_control(base, cfg.control, value)
                    runs = run_replicas(params, u, cfg.master_seed, cfg.environments,
                                        cfg.dynamics_per_environment, workers=workers)
                    est = estimate_survival(runs, u)
                    log.info("lambda=%g u=%g %s=%g: P=%s", lam, u, cfg.control, value, est.probability)
                    w.writerow(list(param_columns(cfg, lam, None).values()) + [
                        g9(u), cfg.control, g9(value), est.n_total, est.n_connected,
                        est.n_survived, g9(est.probability)])
    return [path]


def cmd_phase(cfg, out, workers):
    plan = cfg.sweep_plan()
    marker = out / INCOMPLETE
    marker.write_text("phase sweep in progress; CSV files may be partial\n")
    tested_path = out / "phase_tested.csv"
    summary_path = out / "phase_critical.csv"
    meta_path = out / "run_metadata.ini"
    meta_path.write_text(
        f"# seed_scheme = {SCHEME}\n"
        "# environments are shared across control values within one rho scan\n"
        + cfg.to_ini()
    )
    outputs = [tested_path, summary_path, meta_path]
    for lam in cfg.lambdas:
        params = cfg.model_params(lam=lam)
        suffix = "" if len(cfg.lambdas) == 1 else f"_lambda{lam:g}"
        tp = tested_path.with_name(f"phase_tested{suffix}.csv")
        sp = summary_path.with_name(f"phase_critical{suffix}.csv")
        with open(tp, "w", newline="") as ft, open(sp, "w", newline="") as fs:
            wt, ws = _writer(ft), _writer(fs)
            wt.writerow(TESTED_HEADER)
            ws.writerow(SUMMARY_HEADER)

            def on_point(point):
                wt.writerows(tested_rows(point, plan, cfg.master_seed))
                ws.writerow(summary_row(point))
                ft.flush()
                fs.flush()
                log.info("rho=%g: critical %s=%s after %d evaluations", point.rho, plan.control,
                         point.critical_value, point.evaluations)

            sweep_curve(params, plan, cfg.master_seed, workers=workers, on_point=on_point)
        if suffix:
            outputs += [tp, sp]
    marker.unlink()
    return outputs


def cmd_snapshot(cfg, out, workers):
    from .engine import run_epidemic

    u_max = max(cfg.u)
    params = cfg.model_params()
    env = build_environment(params, u_max, cfg.master_seed, 0)
    run = run_epidemic(env.graph, env.devices, params.spec, u_max, params.time_cap,
                       stream(cfg.master_seed, "dynamics", 0, 0))
    radial = np.hypot(*env.graph.positions.T)
    written = []
    for u in sorted(cfg.u):
        beyond = run.infected_at[radial >= u]
        tau = float(beyond.min()) if len(beyond) else math.inf
        if math.isfinite(tau):
            t, note = tau, f"u = {u:g} km reached at t = {tau:.3f} min"
        else:
            t = run.stop_time
            note = f"{run.status} at t = {t:.3f} min before reaching u = {u:g} km"
        path = out / f"snapshot_u{u:g}.svg"
        write_svg(path, env.streets, env.graph.positions, states_at(run, t),
                  circle_radius=u, annotation=note)
        write_snapshot_csv(run, t, path.with_suffix(".csv"))
        written += [path, path.with_suffix(".csv")]
        log.info(note)
    return written


COMMANDS = {
    "streets": cmd_streets,
    "speed": cmd_speed,
    "survival": cmd_survival,
    "phase": cmd_phase,
    "snapshot": cmd_snapshot,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="d2dmalware",
        description="Malware propagation on Cox-Gilbert device networks.",
    )
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True, type=Path, help="INI configuration file")
    parser.add_argument("--seed", type=int, help="master seed (overrides the config)")
    parser.add_argument("--out", type=Path, help="output directory (overrides the config)")
    parser.add_argument("--workers", type=int, default=1, help="worker processes for replicas")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = SimConfig.load(args.config)
        if args.seed is not None:
            cfg = cfg.replace(master_seed=args.seed)
        if args.out is not None:
            cfg = cfg.replace(output=str(args.out))
        out = Path(cfg.output)
        out.mkdir(parents=True, exist_ok=True)
        paths = COMMANDS[args.command](cfg, out, args.workers)
    except (ConfigurationError, PercolationError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for p in paths:
        print(p)
    return 0


if __name__ == "__main__":
    sys.exit(main())
