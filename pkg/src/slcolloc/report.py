"""Serializable run records, JSON round-tripping and coefficient-decay CSV export."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field, fields
from datetime import datetime, timezone
from typing import Optional

import numpy as np

from . import __version__
from .eigen import Spectrum, coeff_decay_report
from .errors import InvalidArgument

SCHEMA_VERSION = 1
DECAY_HEADER = ("vector_index", "coeff_index", "magnitude")


def _plain(obj):
    """Convert numpy containers and scalars into JSON-ready Python objects."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


@dataclass
class RunRecord:
    """Everything a CLI run produced, in plain data.

    Floats are written with Python's shortest round-trip repr (at most 17
    significant digits), so JSON serialization is lossless.
    """

    problem: str
    plan: dict = field(default_factory=dict)
    spectrum: Optional[dict] = None
    decay: Optional[list] = None
    drift: Optional[dict] = None
    sweep: Optional[dict] = None
    bench: Optional[list] = None
    params: dict = field(default_factory=dict)
    created: str = ""
    tool_version: str = __version__
    schema_version: int = SCHEMA_VERSION
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.created:
            self.created = datetime.now(timezone.utc).isoformat(timespec="seconds")

    def to_dict(self) -> dict:
        out = {f.name: getattr(self, f.name) for f in fields(self) if f.name != "extra"}
        out.update(self.extra)
        return _plain(out)

    def to_json(self, indent: Optional[int] = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    @classmethod
    def from_dict(cls, data: dict) -> "RunRecord":
        known = {f.name for f in fields(cls)} - {"extra"}
        if "problem" not in data:
            raise InvalidArgument("run record lacks a problem name")
        kwargs = {k: v for k, v in data.items() if k in known}
        kwargs["extra"] = {k: v for k, v in data.items() if k not in known}
        return cls(**kwargs)

    @classmethod
    def from_json(cls, text: str) -> "RunRecord":
        return cls.from_dict(json.loads(text))


def spectrum_payload(spectrum: Spectrum) -> dict:
    return {
        "method": spectrum.method,
        "eigenvalues": spectrum.eigenvalues,
        "residual_imag": spectrum.residual_imag,
        "residuals": spectrum.residuals,
        "discarded_count": spectrum.discarded_count,
        "discarded": spectrum.discarded,
        "size": int(spectrum.nodes.shape[0]),
    }


def decay_payload(spectrum: Spectrum) -> list:
    return [
        {"max_coeff": d.max_coeff, "plateau": d.plateau, "resolved": d.resolved, "magnitudes": d.magnitudes}
        for d in coeff_decay_report(spectrum)
    ]


def record_from_spectrum(problem_name: str, plan: dict, spectrum: Spectrum, params: Optional[dict] = None) -> RunRecord:
    return RunRecord(
        problem=problem_name, plan=plan, spectrum=_plain(spectrum_payload(spectrum)),
        decay=_plain(decay_payload(spectrum)), params=_plain(dict(params or {})),
    )


def write_decay_csv(record: RunRecord, stream) -> int:
    """Write the decay table to an open text stream; returns the number of data rows."""
    if record.decay is None:
        raise InvalidArgument("run record carries no coefficient-decay data")
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(DECAY_HEADER)
    rows = 0
    for j, entry in enumerate(record.decay):
        for k, mag in enumerate(entry["magnitudes"]):
            writer.writerow((j, k, repr(abs(float(mag))) if math.isfinite(mag) else "nan"))
            rows += 1
    return rows


def emit_decay_csv(record: RunRecord, path) -> int:
    """Write vector_index, coeff_index, magnitude rows (UTF-8, LF) to `path`."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        return write_decay_csv(record, fh)
