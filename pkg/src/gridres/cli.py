"""Command line interface.

gridres <ingest|fit|test|simulate|resilience|reconstruct> with global
--seed/--config/--out.  Option precedence is flags, then the JSON config
file (per-command section first, then top level), then built-in defaults;
the effective configuration is echoed into every JSON report.  Outputs are
byte-identical across reruns with the same inputs, seed and thread count.

Exit codes: 0 success, 2 invalid input or configuration, 3 numerical
non-convergence (partial results are still written, flagged).
"""

import argparse
import json
import sys
from datetime import datetime, timedelta, timezone
from pathlib import Path

import numpy as np

from .estimate import estimate_rate, pearson_nhpp_test, qq_points, reconstruct
from .fileio import (
    load_model,
    read_dataset,
    save_model,
    write_dataset,
    write_report,
    write_table,
)
from .fitting import fit_duration_model
from .ingest import DEFAULT_ZONE, ingest_pipeline
from .parallel import max_threads
from .rates import RateFunction
from .recovery import SurgeSpec
from .resilience import (
    infant_aging_split,
    interval_weights,
    resilience_at,
    resilience_curve,
)
from .simulate import mean_paths, simulate_events
from .weibull import DurationModel


class CliError(Exception):
    """Invalid input or configuration; maps to exit code 2."""


def _parse_zone(text: str) -> timezone:
    s = text.strip()
    if s.upper() in ("Z", "UTC"):
        return timezone.utc
    sign = 1
    if s.startswith(("+", "-")):
        sign = -1 if s[0] == "-" else 1
        s = s[1:]
    try:
        hh, mm = s.split(":")
        return timezone(sign * timedelta(hours=int(hh), minutes=int(mm)))
    except ValueError:
        raise CliError(f"bad zone {text!r}; expected +HH:MM or -HH:MM") from None


def _parse_when(text: str, zone: timezone) -> datetime:
    try:
        ts = datetime.fromisoformat(text)
    except ValueError:
        raise CliError(f"bad timestamp {text!r}; expected ISO-8601") from None
    if ts.tzinfo is not None:
        ts = ts.astimezone(zone).replace(tzinfo=None)
    return ts


def _parse_floats(text: str, name: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in str(text).split(","))
    except ValueError:
        raise CliError(f"bad {name} {text!r}; expected comma-separated numbers") from None


def _parse_ints(text: str, name: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in str(text).split(","))
    except ValueError:
        raise CliError(f"bad {name} {text!r}; expected comma-separated integers") from None


_GLOBAL_KEYS = ("seed", "out")
_COMMAND_KEYS = {
    "ingest": ("input", "window_start", "window_end", "resolution",
               "group_rule", "zone", "delimiter"),
    "fit": ("dataset", "boundaries", "components", "tau", "bin", "tol",
            "max_iter", "starts"),
    "test": ("dataset", "model", "intervals", "alpha"),
    "simulate": ("model", "replicas", "horizon", "grid_step", "save_events",
                 "surge_base", "surge_peak", "surge_end"),
    "resilience": ("model", "dataset", "weights", "grid_step", "grid_max",
                   "smoothing", "d0"),
    "reconstruct": ("model", "mode", "grid_step", "quad_step"),
}


class Settings:
    """Flag > config file (per-command section, then top level) > default."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.cfg: dict = {}
        if args.config:
            try:
                with open(args.config) as fh:
                    self.cfg = json.load(fh)
            except OSError as exc:
                raise CliError(f"cannot read config: {exc}") from None
            except json.JSONDecodeError as exc:
                raise CliError(f"config is not valid JSON: {exc}") from None
            if not isinstance(self.cfg, dict):
                raise CliError("config must be a JSON object")
        known_flat = set(_GLOBAL_KEYS).union(*_COMMAND_KEYS.values())
        for key, value in self.cfg.items():
            if key in _COMMAND_KEYS:
                if not isinstance(value, dict):
                    raise CliError(f"config section {key!r} must be an object")
                bad = sorted(set(value) - set(_COMMAND_KEYS[key]))
                if bad:
                    raise CliError(
                        f"unknown config keys in section {key!r}: {', '.join(bad)}"
                    )
            elif key not in known_flat:
                raise CliError(f"unknown config key {key!r}")
        section = self.cfg.get(args.command, {})
        self.section = section if isinstance(section, dict) else {}

    def get(self, name: str, default=None):
        v = getattr(self.args, name, None)
        if v is not None:
            return v
        if name in self.section:
            return self.section[name]
        if name in self.cfg and not isinstance(self.cfg[name], dict):
            return self.cfg[name]
        return default

    def require(self, name: str):
        v = self.get(name)
        if v is None:
            raise CliError(f"--{name.replace('_', '-')} is required")
        return v


def _grid(limit: float, step: float) -> np.ndarray:
    if step <= 0.0 or limit <= 0.0:
        raise CliError("grid step and extent must be positive")
    n = int(np.floor(limit / step + 1e-9))
    g = np.arange(n + 1, dtype=float) * step
    if g[-1] < limit - 1e-9:
        g = np.append(g, limit)
    return g


def cmd_ingest(st: Settings, out: Path) -> int:
    zone = _parse_zone(str(st.get("zone", "-05:00")))
    start = _parse_when(str(st.require("window_start")), zone)
    end = _parse_when(str(st.require("window_end")), zone)
    resolution = int(st.get("resolution", 1))
    rule = str(st.get("group_rule", "max"))
    input_path = str(st.require("input"))
    try:
        text = Path(input_path).read_text()
    except OSError as exc:
        raise CliError(f"cannot read input: {exc}") from None
    dataset, issues = ingest_pipeline(
        text, start, end, resolution_minutes=resolution, rule=rule, zone=zone,
        delimiter=st.get("delimiter"),
    )
    prov = dataset.provenance
    if prov.raw == 0:
        raise CliError("empty input: no data rows")
    effective = {
        "command": "ingest", "input": input_path, "zone": str(st.get("zone", "-05:00")),
        "window_start": start.isoformat(), "window_end": end.isoformat(),
        "resolution": resolution, "group_rule": rule, "out": str(out),
    }
    write_dataset(out / "dataset.csv", dataset)
    write_report(out / "provenance.json", {
        "counts": prov.as_dict(),
        "consistent": prov.consistent(),
        "issues": [{"line": i.line, "reason": i.reason} for i in issues],
        "origin": start.isoformat(),
        "effective_config": effective,
    })
    print(
        f"ingest: raw={prov.raw} window_dropped={prov.window_dropped} "
        f"merged={prov.merged} negative_dropped={prov.negative_dropped} "
        f"emitted={prov.emitted}"
    )
    return 0


def cmd_fit(st: Settings, out: Path, seed: int) -> int:
    dataset = read_dataset(str(st.require("dataset")))
    boundaries = _parse_floats(st.require("boundaries"), "boundaries")
    components = _parse_ints(st.require("components"), "components")
    tau = float(st.get("tau", 5.0))
    bin_width = float(st.get("bin", 1.0))
    tol = float(st.get("tol", 1e-6))
    max_iter = int(st.get("max_iter", 200))
    starts = int(st.get("starts", 5))
    times = dataset.times()
    durations = dataset.durations()
    est = estimate_rate(times, window=tau, bin_width=bin_width, horizon=boundaries[-1])
    model, fits = fit_duration_model(
        times, durations, boundaries, components,
        seed=seed, tol=tol, max_iter=max_iter, n_starts=starts,
        threads=max_threads(),
    )
    partial = not all(f.converged for f in fits)
    effective = {
        "command": "fit", "dataset": str(st.require("dataset")),
        "boundaries": list(boundaries), "components": list(components),
        "tau": tau, "bin": bin_width, "tol": tol, "max_iter": max_iter,
        "starts": starts, "seed": seed, "out": str(out), "partial": partial,
    }
    save_model(out / "model.json", est.to_rate_function(), model, fits=fits, config=effective)
    for i, f in enumerate(fits):
        state = "converged" if f.converged else "NOT CONVERGED"
        print(
            f"fit: interval {i} loglik={f.log_likelihood:.6g} "
            f"iterations={f.iterations} {state}"
        )
    if partial:
        print("fit: non-convergence in at least one interval; model flagged partial",
              file=sys.stderr)
        return 3
    return 0


def cmd_test(st: Settings, out: Path) -> int:
    dataset = read_dataset(str(st.require("dataset")))
    rate, _model, _payload = load_model(str(st.require("model")))
    intervals = int(st.get("intervals", 400))
    alpha = float(st.get("alpha", 0.05))
    times = dataset.times()
    result = pearson_nhpp_test(times, rate, n_intervals=intervals, alpha=alpha)
    theo, emp = qq_points(times, rate)
    effective = {
        "command": "test", "dataset": str(st.require("dataset")),
        "model": str(st.require("model")), "intervals": intervals,
        "alpha": alpha, "out": str(out),
    }
    write_report(out / "gof.json", {
        "chi_square": result.chi_square,
        "dof": result.dof,
        "threshold": result.threshold,
        "rejected": result.rejected,
        "alpha": result.alpha,
        "triple": result.triple(),
        "n_intervals": result.n_intervals,
        "observed": list(result.observed),
        "expected": list(result.expected),
        "pooled_observed": list(result.pooled_observed),
        "pooled_expected": list(result.pooled_expected),
        "effective_config": effective,
    })
    write_table(out / "qq.csv", ["exp1_quantile", "rescaled_gap"], zip(theo, emp))
    verdict = "rejected" if result.rejected else "not rejected"
    print(f"test: {result.triple()} -> NHPP hypothesis {verdict} at alpha={alpha:g}")
    return 0


def cmd_simulate(st: Settings, out: Path, seed: int) -> int:
    rate, model, _payload = load_model(str(st.require("model")))
    replicas = int(st.get("replicas", 100))
    if replicas < 1:
        raise CliError("replicas must be >= 1")
    surge_args = [st.get("surge_base"), st.get("surge_peak"), st.get("surge_end")]
    horizon = st.get("horizon")
    horizon = float(horizon) if horizon is not None else rate.horizon
    if any(a is not None for a in surge_args):
        if any(a is None for a in surge_args):
            raise CliError("--surge-base, --surge-peak and --surge-end go together")
        base, peak, t1 = (float(a) for a in surge_args)
        spec = SurgeSpec(
            base_rate=base,
            surge_rate=RateFunction.constant(peak, max(t1, horizon)),
            surge_end=t1,
        )
        rate = spec.to_rate_function(horizon)
    elif horizon != rate.horizon:
        last_knot = rate.knots[-1][0]
        if horizon < last_knot:
            raise CliError(f"horizon {horizon} cannot truncate the fitted rate (last knot {last_knot})")
        rate = RateFunction(knots=rate.knots, horizon=horizon)
    grid_step = float(st.get("grid_step", 1.0))
    grid = _grid(horizon, grid_step)
    threads = max_threads()
    summary = mean_paths(rate, model, grid, replicas, seed, threads=threads)
    write_table(
        out / "paths.csv",
        ["t_hours", "nf_mean", "nf_se", "nr_mean", "nr_se", "n_mean", "n_se"],
        zip(grid, summary["nf_mean"], summary["nf_se"], summary["nr_mean"],
            summary["nr_se"], summary["n_mean"], summary["n_se"]),
    )
    save_events = int(st.get("save_events", 1))
    rows = []
    for i in range(min(save_events, replicas)):
        t, d = simulate_events(rate, model, seed, i)
        rows.extend((i, tt, dd, tt + dd) for tt, dd in zip(t, d))
    write_table(
        out / "events.csv",
        ["replica", "failure_time_hours", "duration_hours", "recovery_time_hours"],
        rows,
    )
    effective = {
        "command": "simulate", "model": str(st.require("model")),
        "replicas": replicas, "horizon": horizon, "grid_step": grid_step,
        "save_events": save_events, "seed": seed, "threads": threads,
        "surge_base": surge_args[0], "surge_peak": surge_args[1],
        "surge_end": surge_args[2], "out": str(out),
    }
    write_report(out / "summary.json", {
        "mean_total_failures": float(summary["nf_mean"][-1]),
        "mean_total_recoveries": float(summary["nr_mean"][-1]),
        "mean_peak_out": float(summary["n_mean"].max()),
        "effective_config": effective,
    })
    print(f"simulate: {replicas} replicas, mean total failures "
          f"{summary['nf_mean'][-1]:.6g}")
    return 0


def cmd_resilience(st: Settings, out: Path) -> int:
    rate, model, _payload = load_model(str(st.require("model")))
    dataset_path = st.get("dataset")
    weights_arg = st.get("weights")
    if weights_arg is not None:
        weights = np.asarray(_parse_floats(weights_arg, "weights"))
        source = "explicit"
    elif dataset_path is not None:
        dataset = read_dataset(str(dataset_path))
        weights = interval_weights(dataset.times(), model.boundaries)
        source = "dataset"
    else:
        weights = interval_weights(rate, model.boundaries)
        source = "rate"
    grid_step = float(st.get("grid_step", 0.25))
    grid_max = st.get("grid_max")
    if grid_max is None:
        if dataset_path is not None:
            grid_max = 1.2 * float(read_dataset(str(dataset_path)).durations().max())
        else:
            grid_max = 1.2 * max(m.quantile(0.999) for m in model.mixtures)
    grid_max = float(grid_max)
    smoothing = int(st.get("smoothing", 5))
    curve = resilience_curve(weights, model, _grid(grid_max, grid_step), smoothing)
    sdd = np.concatenate(([np.nan], curve.second_derivative, [np.nan]))
    write_table(
        out / "curve.csv",
        ["duration_hours", "restored_fraction", "second_derivative"],
        zip(curve.grid, curve.values, sdd),
    )
    override = st.get("d0")
    if override is not None:
        d0 = float(override)
        s_at_d0 = resilience_at(curve.grid, curve.values, d0)
        d0_source = "override"
    else:
        d0, s_at_d0, d0_source = curve.d0, curve.s_at_d0, "curve"
    split = infant_aging_split(model, d0)
    effective = {
        "command": "resilience", "model": str(st.require("model")),
        "dataset": dataset_path, "weights": weights_arg,
        "grid_step": grid_step, "grid_max": grid_max,
        "smoothing": smoothing, "d0": override, "out": str(out),
    }
    write_report(out / "resilience.json", {
        "weights": list(weights),
        "weight_source": source,
        "d0_hours": d0,
        "d0_source": d0_source,
        "s_at_d0": s_at_d0,
        "shape": curve.shape,
        "candidates": {"concave": curve.candidates[0], "convex": curve.candidates[1]},
        "intervals": [
            {"interval": i, "within_d0": w, "beyond_d0": b}
            for i, (w, b) in enumerate(split)
        ],
        "effective_config": effective,
    })
    print(f"resilience: d0={d0:g} h s(d0)={s_at_d0:.4f} shape={curve.shape}")
    return 0


def cmd_reconstruct(st: Settings, out: Path) -> int:
    rate, model, _payload = load_model(str(st.require("model")))
    mode = str(st.get("mode", "both"))
    if mode not in ("piecewise", "stationary", "both"):
        raise CliError(f"bad mode {mode!r}; expected piecewise, stationary or both")
    grid_step = float(st.get("grid_step", 1.0))
    quad_step = float(st.get("quad_step", 0.05))
    grid = _grid(rate.horizon, grid_step)
    header = ["t_hours", "failure_rate"]
    cols = [grid, rate.value(grid)]
    weights = None
    if mode in ("piecewise", "both"):
        rec = reconstruct(rate, model, grid, quad_step)
        header += ["recovery_rate_piecewise", "expected_out_piecewise"]
        cols += [rec.recovery_rate, rec.expected_out]
    if mode in ("stationary", "both"):
        weights = interval_weights(rate, model.boundaries)
        flat = DurationModel.stationary(model.collapse(weights), horizon=model.boundaries[-1])
        rec = reconstruct(rate, flat, grid, quad_step)
        header += ["recovery_rate_stationary", "expected_out_stationary"]
        cols += [rec.recovery_rate, rec.expected_out]
    write_table(out / "nhat.csv", header, zip(*cols))
    effective = {
        "command": "reconstruct", "model": str(st.require("model")),
        "mode": mode, "grid_step": grid_step, "quad_step": quad_step,
        "out": str(out),
    }
    write_report(out / "reconstruct.json", {
        "mode": mode,
        "stationary_weights": None if weights is None else list(weights),
        "effective_config": effective,
    })
    print(f"reconstruct: mode={mode} grid=[0, {rate.horizon:g}] step={grid_step:g}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="gridres",
        description="Outage lifecycle modeling: ingest, fit, test, simulate, "
                    "resilience, reconstruct.",
    )
    p.add_argument("--seed", type=int, default=None, help="root random seed (default 0)")
    p.add_argument("--config", default=None, help="JSON config file")
    p.add_argument("--out", default=None, help="output directory (default .)")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("ingest", help="parse raw outage records into a dataset")
    s.add_argument("--input")
    s.add_argument("--window-start", dest="window_start")
    s.add_argument("--window-end", dest="window_end")
    s.add_argument("--resolution", type=int)
    s.add_argument("--group-rule", dest="group_rule", choices=["max", "first", "mean"])
    s.add_argument("--zone")
    s.add_argument("--delimiter")

    s = sub.add_parser("fit", help="estimate the failure intensity and duration mixtures")
    s.add_argument("--dataset")
    s.add_argument("--boundaries")
    s.add_argument("--components")
    s.add_argument("--tau", type=float)
    s.add_argument("--bin", type=float)
    s.add_argument("--tol", type=float)
    s.add_argument("--max-iter", dest="max_iter", type=int)
    s.add_argument("--starts", type=int)

    s = sub.add_parser("test", help="Pearson NHPP test plus QQ diagnostics")
    s.add_argument("--dataset")
    s.add_argument("--model")
    s.add_argument("--intervals", type=int)
    s.add_argument("--alpha", type=float)

    s = sub.add_parser("simulate", help="Monte Carlo outage sample paths")
    s.add_argument("--model")
    s.add_argument("--replicas", type=int)
    s.add_argument("--horizon", type=float)
    s.add_argument("--grid-step", dest="grid_step", type=float)
    s.add_argument("--save-events", dest="save_events", type=int)
    s.add_argument("--surge-base", dest="surge_base", type=float)
    s.add_argument("--surge-peak", dest="surge_peak", type=float)
    s.add_argument("--surge-end", dest="surge_end", type=float)

    s = sub.add_parser("resilience", help="resilience curve and threshold")
    s.add_argument("--model")
    s.add_argument("--dataset")
    s.add_argument("--weights")
    s.add_argument("--grid-step", dest="grid_step", type=float)
    s.add_argument("--grid-max", dest="grid_max", type=float)
    s.add_argument("--smoothing", type=int)
    s.add_argument("--d0", type=float, help="threshold override, skips the knee search")

    s = sub.add_parser("reconstruct", help="rebuild the expected outage curve")
    s.add_argument("--model")
    s.add_argument("--mode", choices=["piecewise", "stationary", "both"])
    s.add_argument("--grid-step", dest="grid_step", type=float)
    s.add_argument("--quad-step", dest="quad_step", type=float)

    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        st = Settings(args)
        out = Path(str(st.get("out", ".")))
        out.mkdir(parents=True, exist_ok=True)
        seed = int(st.get("seed", 0))
        if args.command == "ingest":
            return cmd_ingest(st, out)
        if args.command == "fit":
            return cmd_fit(st, out, seed)
        if args.command == "test":
            return cmd_test(st, out)
        if args.command == "simulate":
            return cmd_simulate(st, out, seed)
        if args.command == "resilience":
            return cmd_resilience(st, out)
        if args.command == "reconstruct":
            return cmd_reconstruct(st, out)
        raise CliError(f"unknown command {args.command!r}")
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
