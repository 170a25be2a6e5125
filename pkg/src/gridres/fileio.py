"""Deterministic on-disk formats: datasets, model files, tables, reports.

Every numeric cell is written with 9 significant digits, JSON keys are
sorted, and nothing time- or host-dependent is emitted, so reruns with the
same inputs produce byte-identical files.
"""

import csv
import json
from pathlib import Path

import numpy as np

from .fitting import FitResult
from .ingest import OutageDataset, Provenance
from .rates import RateFunction
from .simulate import OutageEvent
from .weibull import DurationModel, WeibullMixture

__all__ = [
    "fmt9",
    "round9",
    "write_table",
    "write_report",
    "write_dataset",
    "read_dataset",
    "save_model",
    "load_model",
]


def fmt9(x) -> str:
    """Format one cell: floats at 9 significant digits, ints exactly."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".9g")
    return str(x)


def round9(obj):
    """Recursively round floats to 9 significant digits for JSON output."""
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(format(float(obj), ".9g"))
    if isinstance(obj, dict):
        return {str(k): round9(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round9(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [round9(v) for v in obj.tolist()]
    return obj


def write_table(path, header, rows) -> None:
    """Comma-separated table with a self-describing header row."""
    path = Path(path)
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt9(c) for c in row))
    path.write_text("\n".join(lines) + "\n")


def write_report(path, payload: dict) -> None:
    Path(path).write_text(json.dumps(round9(payload), sort_keys=True, indent=2) + "\n")


def write_dataset(path, dataset: OutageDataset) -> None:
    write_table(
        path,
        ["t_hours", "duration_hours"],
        ((e.time, e.duration) for e in dataset.events),
    )


def read_dataset(path) -> OutageDataset:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"t_hours", "duration_hours"} <= set(reader.fieldnames):
            raise ValueError(f"{path}: expected columns t_hours, duration_hours")
        events = tuple(
            OutageEvent(time=float(row["t_hours"]), duration=float(row["duration_hours"]))
            for row in reader
        )
    return OutageDataset(events=events)


def _mixture_payload(mix: WeibullMixture, fit: FitResult | None) -> dict:
    out = {"components": [list(c) for c in mix.components]}
    if fit is not None:
        out.update(
            log_likelihood=fit.log_likelihood,
            iterations=fit.iterations,
            converged=fit.converged,
            flags=list(fit.flags),
        )
    return out


def save_model(
    path,
    rate: RateFunction,
    model: DurationModel,
    fits: tuple[FitResult, ...] | None = None,
    config: dict | None = None,
) -> None:
    """Write the model file: rate knots plus the duration model."""
    if fits is not None and len(fits) != model.n_intervals:
        raise ValueError("one fit result per interval required")
    payload = {
        "rate": {"knots": [list(k) for k in rate.knots], "horizon": rate.horizon},
        "durations": {
            "boundaries": list(model.boundaries),
            "tail_policy": model.tail_policy,
            "mixtures": [
                _mixture_payload(m, fits[i] if fits else None)
                for i, m in enumerate(model.mixtures)
            ],
        },
        "config": config or {},
    }
    write_report(path, payload)


def load_model(path) -> tuple[RateFunction, DurationModel, dict]:
    with open(path) as fh:
        payload = json.load(fh)
    try:
        rate = RateFunction(
            knots=tuple((float(t), float(v)) for t, v in payload["rate"]["knots"]),
            horizon=float(payload["rate"]["horizon"]),
        )
        dur = payload["durations"]
        model = DurationModel(
            boundaries=tuple(float(b) for b in dur["boundaries"]),
            mixtures=tuple(
                WeibullMixture(
                    components=tuple((float(w), float(g), float(k)) for w, g, k in m["components"])
                )
                for m in dur["mixtures"]
            ),
            tail_policy=dur.get("tail_policy", "nearest"),
        )
    except (KeyError, TypeError) as exc:
        raise ValueError(f"{path}: malformed model file ({exc})") from None
    return rate, model, payload
