"""Command line entry point: ``platewave <subcommand> --config run.toml``.

Every subcommand writes a CSV plus a ``.json`` summary of the same stem into
the output directory and prints a short report. Exit status is 0 on success,
1 on a runtime failure and 2 on a usage or configuration error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from .config import RunConfig, default_config, load_config
from .errors import ConfigError, PlatewaveError
from .lamb import bar_velocity, mode_residual, theoretical_curve
from .sim import TABLE1_PULSES


def fmt(v) -> str:
    """Shortest round-trip text for numbers; ints stay ints."""
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v) + 0.0)  # no "-0.0"
    return str(v)


def write_csv(path: Path, header, rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def write_summary(path: Path, summary: dict) -> None:
    def clean(v):
        if isinstance(v, dict):
            return {k: clean(x) for k, x in v.items()}
        if isinstance(v, (list, tuple)):
            return [clean(x) for x in v]
        if isinstance(v, np.generic):
            return v.item()
        if isinstance(v, Path):
            return str(v)
        return v

    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(clean(summary), indent=2, sort_keys=True) + "\n")


def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated numbers, got {text!r}")


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated integers, got {text!r}")


def _window(text: str) -> tuple[float, float]:
    vals = _float_list(text)
    if len(vals) != 2:
        raise argparse.ArgumentTypeError("window needs two numbers: x_min,x_max")
    return vals[0], vals[1]


def _config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else default_config()
    changes = {}
    if getattr(args, "ny", None) is not None and not isinstance(args.ny, list):
        changes["ny"] = args.ny
    if getattr(args, "degree", None) is not None:
        changes["degree"] = args.degree
    if getattr(args, "output_dir", None) is not None:
        changes["output_dir"] = Path(args.output_dir)
    if changes:
        try:
            cfg = replace(cfg, **changes)
        except PlatewaveError as exc:
            raise ConfigError(str(exc)) from exc
    return cfg


def _base_summary(cfg: RunConfig, command: str, started: float) -> dict:
    return {
        "command": command,
        "degree": cfg.degree,
        "ny": cfg.ny,
        "dt": cfg.grid.dt,
        "steps": cfg.grid.N,
        "f0": cfg.pulse.f0,
        "wall_time_s": round(time.perf_counter() - started, 3),
    }


# ---------------------------------------------------------------- subcommands

def cmd_simulate(args) -> int:
    from .experiments import simulate
    from .lamb import ANTISYMMETRIC, solve_phase_velocity

    cfg = _config(args)
    t0 = time.perf_counter()
    c_ref = solve_phase_velocity(ANTISYMMETRIC, cfg.material, cfg.geometry.Ly,
                                 cfg.pulse.f0).c_phase
    snaps = args.snapshot_steps or []
    res = simulate(cfg, snapshot_steps=snaps, c_ref=c_ref)
    out = cfg.output_dir
    header = ["t"] + [f"uy_p{j + 1}" for j in range(len(res.traces))]
    times = res.grid.times
    series = np.array([tr.series for tr in res.traces])
    write_csv(out / "traces.csv", header,
              ([times[i]] + list(series[:, i]) for i in range(len(times))))
    nodes = res.info["nodes"]
    for step in snaps:
        d = res.snapshots[step].d
        write_csv(out / f"snapshot_{step:05d}.csv", ["node_index", "x", "y", "ux", "uy"],
                  ([j, nodes.nodes[j, 0], nodes.nodes[j, 1], d[2 * j], d[2 * j + 1]]
                   for j in range(nodes.node_count)))
    summary = _base_summary(cfg, "simulate", t0)
    summary.update(h=res.info["h"], dof=res.info["dofs"], probes=list(cfg.probes),
                   cfl_ok=res.cfl.ok, cfl_messages=list(res.cfl.messages),
                   max_abs_uy=[float(np.abs(s).max()) for s in series])
    write_summary(out / "traces.json", summary)
    print(f"simulated {cfg.grid.N} steps, {res.info['dofs']} dofs, h={res.info['h']:.3e}")
    print(f"wrote {out / 'traces.csv'}")
    return 0


def cmd_dispersion(args) -> int:
    from .experiments import measure_dispersion

    cfg = _config(args)
    t0 = time.perf_counter()
    freqs = args.f0 or sorted(TABLE1_PULSES)
    curve = theoretical_curve(cfg.material, cfg.geometry.Ly, args.curve_samples)
    rows, details = [], []
    for f0 in freqs:
        run = measure_dispersion(cfg, f0, curve)
        p = run.point
        rows.append([p.f0, p.C, p.x_norm, p.y_norm, p.fit_r2, p.distance_to_theory])
        details.append({
            "f0": p.f0,
            "t_final": run.result.grid.t_final,
            "arrivals": [a.t_arrive for a in run.arrivals],
            "t_min": [a.t_min for a in run.arrivals],
            "t_max": [a.t_max for a in run.arrivals],
        })
        print(f"f0={p.f0:9.0f} Hz  C={p.C:8.2f} m/s  point=({p.x_norm:.5f}, {p.y_norm:.5f})"
              f"  r2={p.fit_r2:.5f}  distance={p.distance_to_theory:.4f}")
    out = cfg.output_dir
    write_csv(out / "dispersion.csv",
              ["f0", "C", "Ly_over_lambda", "C_over_c0", "r2", "distance"], rows)
    summary = _base_summary(cfg, "dispersion", t0)
    summary.update(points=details, curve_samples=args.curve_samples,
                   max_distance=max(r[-1] for r in rows))
    write_summary(out / "dispersion.json", summary)
    return 0


def cmd_converge(args) -> int:
    from .study import REFERENCE_T_TILDE, REFERENCE_WINDOW, convergence_study

    cfg = _config(args)
    t0 = time.perf_counter()
    window = args.window or REFERENCE_WINDOW
    t_tilde = REFERENCE_T_TILDE if args.t_tilde is None else args.t_tilde
    study = convergence_study(cfg, args.ny, degree=cfg.degree, t_tilde=t_tilde, window=window)
    out = cfg.output_dir
    write_csv(out / "convergence.csv", ["h", "dof", "e_t"],
              ([r.h, r.dof, r.e_t] for r in study.rows))
    summary = _base_summary(cfg, "converge", t0)
    summary.update(ny=args.ny, order=study.order, t_tilde=t_tilde, window=list(window),
                   rows=[{"ny": r.ny, "h": r.h, "dof": r.dof, "e_t": r.e_t} for r in study.rows])
    write_summary(out / "convergence.json", summary)
    for r in study.rows:
        print(f"h={r.h:.3e}  dof={r.dof:6d}  e={r.e_t:.4e}")
    print(f"fitted order {study.order:.3f}")
    return 0


def cmd_analytic_curve(args) -> int:
    cfg = _config(args)
    t0 = time.perf_counter()
    curve = theoretical_curve(cfg.material, cfg.geometry.Ly, args.samples, args.lo, args.hi)
    rows = [[x, y, f, c] for (x, y), f, c in zip(curve.samples, curve.f0, curve.c_phase)]
    out = cfg.output_dir
    write_csv(out / "analytic_curve.csv", ["Ly_over_lambda", "C_over_c0", "f0_hz", "c_phase"],
              rows)
    summary = _base_summary(cfg, "analytic-curve", t0)
    summary.update(samples=args.samples, lo=args.lo, hi=args.hi, c0=bar_velocity(cfg.material))
    write_summary(out / "analytic_curve.json", summary)
    print(f"wrote {len(rows)} samples to {out / 'analytic_curve.csv'}")
    return 0


def cmd_compare_lamb(args) -> int:
    from .experiments import compare_lamb_run
    from .lamb import ANTISYMMETRIC, solve_phase_velocity

    cfg = _config(args)
    t0 = time.perf_counter()
    run = compare_lamb_run(cfg, t=args.t, window=args.window)
    c = run.comparison
    out = cfg.output_dir
    write_csv(out / "compare_lamb.csv",
              ["t", "x_min", "x_max", "C", "phase", "discrepancy_ux", "discrepancy_uy"],
              [[run.t, run.window[0], run.window[1], run.C, c.phase,
                c.discrepancy_x, c.discrepancy_y]])
    mode = solve_phase_velocity(ANTISYMMETRIC, cfg.material, cfg.geometry.Ly, cfg.pulse.f0)
    summary = _base_summary(cfg, "compare-lamb", t0)
    summary.update(mode_c_phase=mode.c_phase,
                   mode_residual=mode_residual(mode, cfg.material, cfg.geometry.Ly))
    write_summary(out / "compare_lamb.json", summary)
    print(f"t={run.t:.4e} s  window=[{run.window[0]:.4e}, {run.window[1]:.4e}] m")
    print(f"discrepancy ux={c.discrepancy_x:.4f}  uy={c.discrepancy_y:.4f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="platewave", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, mesh=True):
        p.add_argument("--config", help="TOML run configuration (defaults if omitted)")
        p.add_argument("--output-dir", help="override output.dir")
        if mesh:
            p.add_argument("--degree", type=int, choices=(1, 2))
            p.add_argument("--ny", type=int, help="cells across the thickness")

    p = sub.add_parser("simulate", help="march the pulse and record probe traces")
    common(p)
    p.add_argument("--snapshot-steps", type=_int_list, help="steps to dump, e.g. 50,100")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("dispersion", help="phase velocity points for tabulated pulses")
    common(p)
    p.add_argument("--f0", type=_float_list, help="centre frequencies in Hz (default: all)")
    p.add_argument("--curve-samples", type=int, default=400)
    p.set_defaults(func=cmd_dispersion)

    p = sub.add_parser("converge", help="successive-mesh L2 errors at a fixed time")
    common(p, mesh=False)
    p.add_argument("--degree", type=int, choices=(1, 2))
    p.add_argument("--ny", type=_int_list, default=[2, 3, 4, 5, 6],
                   help="increasing list, e.g. 2,3,4,5,6")
    p.add_argument("--t-tilde", type=float)
    p.add_argument("--window", type=_window, help="x_min,x_max")
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("analytic-curve", help="sample the A0 dispersion curve")
    common(p, mesh=False)
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--lo", type=float, default=0.01, help="smallest Ly/wavelength")
    p.add_argument("--hi", type=float, default=0.5, help="largest Ly/wavelength")
    p.set_defaults(func=cmd_analytic_curve)

    p = sub.add_parser("compare-lamb", help="FE field against the analytic A0 mode")
    common(p)
    p.add_argument("--t", type=float, help="comparison time (default: measured arrival)")
    p.add_argument("--window", type=_window, help="x_min,x_max")
    p.set_defaults(func=cmd_compare_lamb)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"platewave: config error: {exc}", file=sys.stderr)
        return 2
    except (PlatewaveError, OSError) as exc:
        print(f"platewave: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
