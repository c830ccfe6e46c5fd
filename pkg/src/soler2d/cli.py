"""Command line front end: ``verify-algebra``, ``run``, ``sweep`` and ``report``.

Exit codes: 0 success, 1 a check failed, 2 configuration error, 3 runtime blow-up.
"""

import argparse
import csv
import json
import logging
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .config import RunConfig, load_config, parse_config_text
from .errors import BlowUpError, ConfigError, SupportViolation
from .evolve import companion_relation_residual, evolve_companion, evolve_to
from .grid import fft_workers, make_initial_data
from .hyperdiag import (decay_monitor, decay_rows, energy_rows, fit_exponent,
                        max_hyperbolic_time)
from .scatter import convergence_curve, ghost_integral, scattering_state
from .snapshots import SnapshotWriter, load_history
from .verify import run_algebra_suite

log = logging.getLogger("soler2d")

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_BLOWUP = 0, 1, 2, 3
CONFIG_NAME = "config.txt"
SNAPSHOT_DIR = "snapshots"

#: Fit and trend windows for the time series in the summary.
FIT_T_MIN = 10.0
EARLY_WINDOW = (4.0, 10.0)
ENERGY_S_MAX = 9.0
ENERGY_VARIATION_TOL = 0.10
UNIFORMITY_TOL = 2.0
IMPROVED_TOL = 4.0
GHOST_TAIL_TOL = 0.5


# --- small helpers ---------------------------------------------------------------

def _fmt(v):
    return "" if v is None else repr(float(v))


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _window_max(t, v, lo, hi):
    t, v = np.asarray(t), np.asarray(v, dtype=float)
    sel = (t >= lo - 1e-9) & (t <= hi + 1e-9)
    return float(v[sel].max()) if sel.any() else None


def _ratio(a, b):
    if a is None or b is None:
        return None
    if b == 0:
        return 0.0 if a == 0 else None
    return a / b


def _fit_or_none(t, v, t_min=FIT_T_MIN):
    try:
        return fit_exponent(t, v, t_min=t_min).slope
    except ValueError:
        return None


# --- analysis shared by run and report ----------------------------------------------

def analyze(history, cfg, out_dir):
    """Compute every diagnostic series and write the CSVs; returns the summary dict."""
    out_dir = Path(out_dir)
    T = history.t_end
    trivial = not np.any([np.any(v) for v in history.values])
    summary = {"trivial_run": bool(trivial), "config": cfg.as_pairs(),
               "charge_drift": history.relative_charge_drift, "checks": {}}
    checks = summary["checks"]

    companion = None
    if cfg.companion:
        t0 = time.perf_counter()
        companion = evolve_companion(history)
        res = [companion_relation_residual(history, companion, k) for k in range(1, len(history))]
        summary["companion"] = {"relation_residual_final": res[-1] if res else None,
                                "relation_residual_max": max(res) if res else None}
        log.info("companion field evolved in %.1fs", time.perf_counter() - t0)

    # energies on hyperboloids
    s_top = min(ENERGY_S_MAX, max_hyperbolic_time(history))
    s_values = np.arange(2.0, s_top + 1e-9, 0.5)
    erows = energy_rows(history, s_values) if s_values.size else []
    write_csv(out_dir / "energy.csv", ["s", "E_D", "E_plus", "identity_residual", "bound_slack"], erows)
    if erows:
        ed = np.array([r[1] for r in erows])
        summary["energy"] = {
            "identity_max_residual": max(r[3] for r in erows),
            "bound_min_slack": min(r[4] for r in erows),
            "E_D_variation": float((ed.max() - ed.min()) / ed.max()) if ed.max() > 0 else 0.0,
        }
        checks["energy_identity"] = summary["energy"]["identity_max_residual"] <= 1e-8
        checks["energy_bound"] = summary["energy"]["bound_min_slack"] >= -1e-8
        checks["energy_bounded"] = summary["energy"]["E_D_variation"] <= ENERGY_VARIATION_TOL

    # pointwise decay
    drows = decay_rows(history, companion)
    write_csv(out_dir / "decay.csv", ["t", "sup_abs", "weighted_sup", "improved_weighted_sup"], drows)
    t = [r[0] for r in drows]
    wsup = [r[2] for r in drows]
    early, late = _window_max(t, wsup, *EARLY_WINDOW), _window_max(t, wsup, FIT_T_MIN, T)
    summary["decay"] = {"sup_exponent": _fit_or_none(t, [r[1] for r in drows]),
                        "weighted_sup_early_max": early, "weighted_sup_late_max": late,
                        "uniformity_ratio": _ratio(late, early)}
    if summary["decay"]["uniformity_ratio"] is not None:
        checks["decay_uniform"] = summary["decay"]["uniformity_ratio"] <= UNIFORMITY_TOL
    if history.mass == 0.0 and companion is not None:
        imp = [r[3] for r in drows]
        mid = 0.5 * (FIT_T_MIN + T)
        ratio = _ratio(_window_max(t, imp, mid, T), _window_max(t, imp, FIT_T_MIN, mid))
        summary["companion"]["improved_late_over_early"] = ratio
        if ratio is not None:
            checks["improved_decay_bounded"] = ratio <= IMPROVED_TOL

    # scattering
    t0 = time.perf_counter()
    state = scattering_state(history)
    rep = convergence_curve(history, state, N=cfg.sobolev_N, t_min=FIT_T_MIN)
    write_csv(out_dir / "scatter.csv", ["t", "err_high", "err_low", "err_low_times_sqrt_t"], rep.rows())
    lowt = rep.err_low_times_sqrt_t
    at10 = np.nonzero(np.isclose(rep.times, FIT_T_MIN))[0]
    summary["scattering"] = {
        "order_high": rep.order_high, "order_low": rep.order_low,
        "exponent_high": rep.fit_high.slope if rep.fit_high else None,
        "exponent_low": rep.fit_low.slope if rep.fit_low else None,
        "tail_bound": state.tail_bound, "quadrature_nodes": state.nodes,
        "max_error_high": float(rep.err_high.max()),
        "low_times_sqrt_t_at_10": float(lowt[at10[0]]) if at10.size else None,
        "low_times_sqrt_t_at_end": float(lowt[-1]),
    }
    if rep.fit_high is not None:
        checks["scattering_rate"] = rep.fit_high.slope <= -0.4
    if at10.size and not trivial:
        checks["low_order_trend"] = bool(lowt[-1] < lowt[at10[0]])
    log.info("scattering diagnostics in %.1fs", time.perf_counter() - t0)

    # ghost weight
    ghost = ghost_integral(history)
    write_csv(out_dir / "ghost.csv", ["t", "integrand", "cumulative"], ghost.rows())
    summary["ghost"] = {"total": ghost.total, "tail": ghost.tail,
                        "tail_fraction": _ratio(ghost.tail, ghost.total)}
    if ghost.total > 0:
        checks["ghost_integrable"] = ghost.tail <= GHOST_TAIL_TOL * ghost.total

    (out_dir / "summary.json").write_text(json.dumps(summary, indent=2, default=float))
    return summary


def execute_run(cfg):
    """Evolve, dump snapshots, analyze. ``cfg`` must already be validated."""
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / CONFIG_NAME).write_text(cfg.dumps())
    grid = cfg.grid
    psi0 = make_initial_data(grid, cfg.data_epsilon, cfg.data_direction, cfg.model_mass)
    sc = cfg.stepper
    writer = SnapshotWriter(out / SNAPSHOT_DIR, grid, cfg.model_mass, sc.dt, sc.stride_steps, sc.linear_only)
    t0 = time.perf_counter()
    history = evolve_to(psi0, sc, on_snapshot=writer)
    writer.close()
    log.info("evolution finished in %.1fs (%d snapshots)", time.perf_counter() - t0, len(history))
    return analyze(history, cfg, out)


# --- sweeps ---------------------------------------------------------------------------

SWEEP_PARAMS = {"mass": "model.mass", "epsilon": "data.epsilon"}
DIAGONAL = "0.7071067811865476, 0.7071067811865476"


def sweep_members(param, values, base):
    """Member override dicts; mass sweeps also run the diagonal spinor direction."""
    if param not in SWEEP_PARAMS:
        raise ConfigError(f"sweep parameter must be one of {sorted(SWEEP_PARAMS)}, got {param!r}")
    if not values:
        raise ConfigError("sweep needs at least one value")
    directions = [base.as_pairs()["data.direction"]]
    if param == "mass" and directions[0] != DIAGONAL:
        directions.append(DIAGONAL)
    members = []
    for d in directions:
        for v in values:
            pairs = base.as_pairs()
            pairs[SWEEP_PARAMS[param]] = str(v)
            pairs["data.direction"] = d
            base.updated(pairs).validate()
            members.append(pairs)
    return members


def run_member(pairs):
    """Evolve one sweep member and return only its monitor series (or the error)."""
    try:
        cfg = RunConfig().updated(pairs).validate()
        grid = cfg.grid
        psi0 = make_initial_data(grid, cfg.data_epsilon, cfg.data_direction, cfg.model_mass)
        series = []

        def monitor(t, data, data_t):
            series.append((t,) + decay_monitor(data, grid, t, cfg.model_mass))

        evolve_to(psi0, cfg.stepper, keep=False, on_snapshot=monitor)
        arr = np.array(series)
        return {"config": pairs, "t": arr[:, 0].tolist(), "sup": arr[:, 1].tolist(),
                "weighted_sup": arr[:, 2].tolist(), "error": None}
    except Exception as exc:  # a failing member must not sink the sweep
        return {"config": pairs, "error": f"{type(exc).__name__}: {exc}"}


def aggregate_sweep(param, results):
    """Uniformity diagnostic and amplitude scaling over completed members."""
    rows, failures, ratios = [], [], []
    for res in results:
        if res["error"]:
            failures.append({"config": res["config"], "error": res["error"]})
            continue
        t, w = res["t"], res["weighted_sup"]
        ratio = _ratio(_window_max(t, w, FIT_T_MIN, t[-1]), _window_max(t, w, *EARLY_WINDOW))
        rows.append({"value": float(res["config"][SWEEP_PARAMS[param]]),
                     "direction": res["config"]["data.direction"],
                     "uniformity_ratio": ratio, "final_sup": res["sup"][-1],
                     "sup_exponent": _fit_or_none(t, res["sup"])})
        if ratio is not None:
            ratios.append(ratio)
    report = {"param": param, "members": rows, "failures": failures,
              "max_uniformity_ratio": max(ratios) if ratios else None}
    if param == "epsilon":
        by_dir = {}
        for r in rows:
            by_dir.setdefault(r["direction"], []).append(r)
        scaling = []
        for group in by_dir.values():
            group.sort(key=lambda r: r["value"])
            for a, b in zip(group, group[1:]):
                if a["final_sup"] > 0:
                    scaling.append({"from": a["value"], "to": b["value"],
                                    "value_ratio": b["value"] / a["value"],
                                    "sup_ratio": b["final_sup"] / a["final_sup"]})
        report["scaling"] = scaling
    return report


def execute_sweep(param, values, base, workers=None):
    members = sweep_members(param, values, base)
    workers = fft_workers() if workers is None else workers
    if workers > 1 and len(members) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(members))) as pool:
            results = list(pool.map(run_member, members))
    else:
        results = [run_member(m) for m in members]
    report = aggregate_sweep(param, results)
    out = Path(base.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "sweep.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["param", "value", "direction", "t", "sup_abs", "weighted_sup"])
        for res in results:
            if res["error"]:
                continue
            v, d = res["config"][SWEEP_PARAMS[param]], res["config"]["data.direction"]
            for row in zip(res["t"], res["sup"], res["weighted_sup"]):
                w.writerow([param, v, d] + [_fmt(x) for x in row])
    (out / "sweep.json").write_text(json.dumps(report, indent=2, default=float))
    return report


# --- argument parsing -----------------------------------------------------------------

def _add_config_flags(p):
    p.add_argument("--config", help="flat key = value configuration file")
    for key in RunConfig.keys():
        p.add_argument("--" + key, dest="cfg:" + key, metavar="VALUE", default=None,
                       help=f"override {key}")


def _overrides(args):
    return {k[4:]: v for k, v in vars(args).items() if k.startswith("cfg:") and v is not None}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    parser = argparse.ArgumentParser(prog="soler2d", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify-algebra", parents=[common], help="run the exact-identity suite")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, default=2000)

    p = sub.add_parser("run", parents=[common], help="evolve one configuration and write all diagnostics")
    _add_config_flags(p)

    p = sub.add_parser("sweep", parents=[common], help="run a mass or epsilon sweep of decay monitors")
    p.add_argument("--param", required=True, choices=sorted(SWEEP_PARAMS))
    p.add_argument("--values", required=True, help="comma-separated parameter values")
    _add_config_flags(p)

    p = sub.add_parser("report", parents=[common], help="recompute diagnostics from a run directory")
    p.add_argument("directory")
    return parser


def cmd_verify_algebra(args, gammas=None):
    kwargs = {} if gammas is None else {"gammas": gammas}
    results = run_algebra_suite(seed=args.seed, samples=args.samples, **kwargs)
    for r in results:
        print(r.line())
    failed = [r.name for r in results if not r.passed]
    if failed:
        print("failing checks: " + ", ".join(failed))
        return EXIT_CHECK
    print("all algebra checks passed")
    return EXIT_OK


def _print_summary(summary):
    print(json.dumps({k: summary[k] for k in summary if k != "config"}, indent=2, default=float))


def cmd_run(args):
    cfg = load_config(args.config, _overrides(args))
    summary = execute_run(cfg)
    _print_summary(summary)
    return EXIT_OK


def cmd_sweep(args):
    base = load_config(args.config, _overrides(args))
    values = [v.strip() for v in args.values.split(",") if v.strip()]
    report = execute_sweep(args.param, values, base)
    print(json.dumps(report, indent=2, default=float))
    return EXIT_CHECK if report["failures"] else EXIT_OK


def cmd_report(args):
    directory = Path(args.directory)
    cfg_path = directory / CONFIG_NAME
    if not cfg_path.exists():
        raise ConfigError(f"{cfg_path} not found; is this a run directory?")
    cfg = RunConfig().updated(parse_config_text(cfg_path.read_text())).validate()
    history = load_history(directory / SNAPSHOT_DIR)
    summary = analyze(history, cfg, directory)
    _print_summary(summary)
    return EXIT_OK


COMMANDS = {"verify-algebra": cmd_verify_algebra, "run": cmd_run, "sweep": cmd_sweep, "report": cmd_report}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(name)s %(message)s", stream=sys.stderr)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (BlowUpError, SupportViolation) as exc:
        print(f"runtime abort: {exc}", file=sys.stderr)
        return EXIT_BLOWUP


if __name__ == "__main__":
    sys.exit(main())
