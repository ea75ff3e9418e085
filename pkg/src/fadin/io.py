"""File formats: event CSVs with JSON sidecars, fit results, tensor dumps."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .errors import ConfigurationError, DataError
from .precompute import Precomputations
from .simulation import EventSequences

EVENTS_SCHEMA_VERSION = 1


def _sidecar_path(path) -> Path:
    return Path(str(path) + ".json")


def save_events_csv(events: EventSequences, path) -> None:
    """Write (process_index, timestamp) rows sorted by timestamp.

    The horizon and process count go into a JSON sidecar next to the CSV
    (``<path>.json``); the CSV alone does not determine T.
    """
    rows = []
    for i, times in enumerate(events.events):
        rows.extend((float(t), i) for t in times)
    rows.sort()
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["process_index", "timestamp"])
        for t, i in rows:
            writer.writerow([i, repr(t)])
    header = {
        "schema_version": EVENTS_SCHEMA_VERSION,
        "T": float(events.T),
        "p": events.p,
        "n_events": [int(n) for n in events.n_events],
    }
    with open(_sidecar_path(path), "w") as fh:
        json.dump(header, fh, indent=2)
        fh.write("\n")


def load_events_csv(path) -> EventSequences:
    """Read an event CSV written by :func:`save_events_csv`."""
    sidecar = _sidecar_path(path)
    if not sidecar.exists():
        raise DataError(f"missing sidecar header {sidecar}")
    with open(sidecar) as fh:
        header = json.load(fh)
    try:
        T = float(header["T"])
        p = int(header["p"])
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"malformed sidecar header {sidecar}: {exc}") from exc
    per_process = [[] for _ in range(p)]
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {
            "process_index",
            "timestamp",
        } <= set(reader.fieldnames):
            raise DataError(f"{path}: expected columns process_index, timestamp")
        for row in reader:
            idx = int(row["process_index"])
            if not 0 <= idx < p:
                raise DataError(f"{path}: process index {idx} out of range for p={p}")
            per_process[idx].append(float(row["timestamp"]))
    arrays = [np.array(ts, dtype=float) for ts in per_process]
    return EventSequences(events=arrays, T=T)


def save_fit_result_json(result, path) -> None:
    with open(path, "w") as fh:
        json.dump(result.to_json_dict(), fh, indent=2)
        fh.write("\n")


def save_precompute(pre: Precomputations, path) -> None:
    """Debug dump: tensors concatenated as flat float64 plus a shape header."""
    path = Path(path)
    arrays = {
        "phi_g": pre.phi_g,
        "psi": pre.psi,
        "phi_ev": pre.phi_ev,
    }
    flat = np.concatenate([np.ascontiguousarray(a, dtype=float).ravel() for a in arrays.values()])
    flat.tofile(str(path) + ".bin")
    header = {
        "dtype": "float64",
        "order": "C",
        "layout": [
            {"name": name, "shape": list(a.shape)} for name, a in arrays.items()
        ],
        "n_events": [int(n) for n in pre.n_events],
        "delta": pre.grid.delta,
        "G": pre.grid.G,
        "L": pre.L,
        "method": pre.method,
    }
    with open(str(path) + ".json", "w") as fh:
        json.dump(header, fh, indent=2)
        fh.write("\n")


def load_json_config(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigurationError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"invalid JSON in {path}: {exc}") from exc
