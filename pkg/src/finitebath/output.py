"""Deterministic CSV and JSON emission of run products.

Floats are written with 17 significant digits so files round-trip to
the exact binary values and identical runs produce identical bytes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .experiments import ThermalizationCurve
from .stats import EnergyHistogram, TemperatureFit

CURVE_HEADER = "omega,T_tp,T_tp_err,goodness,overflow_frac,T_bath_init,T_bath_final"


def fmt(x) -> str:
    """Fixed 17 significant digit float formatting (nan allowed)."""
    return f"{float(x):.17g}"


def emit_curve(curve: ThermalizationCurve, path, bath_index: int = 0) -> None:
    """Write a thermalization curve as CSV.

    The bath reference columns report bath `bath_index` (initial fitted
    temperature, constant down the column, and the per-frequency final
    fit).  Two bath runs carry the full per-bath story in the manifest.
    """
    t_init = curve.bath_initial[bath_index][0] if curve.n_baths else float("nan")
    finals = (curve.bath_final[bath_index][0] if curve.n_baths
              else np.full(len(curve.omegas), np.nan))
    lines = [CURVE_HEADER]
    for i, w in enumerate(curve.omegas):
        lines.append(",".join([
            fmt(w), fmt(curve.temperature[i]), fmt(curve.sigma[i]),
            fmt(curve.goodness[i]), fmt(curve.overflow_fraction[i]),
            fmt(t_init), fmt(finals[i]),
        ]))
    Path(path).write_text("\n".join(lines) + "\n")


def read_curve(path) -> dict:
    """Parse an emitted curve CSV back into column arrays."""
    lines = Path(path).read_text().strip().split("\n")
    if lines[0] != CURVE_HEADER:
        raise ValueError(f"{path}: not a curve CSV (bad header)")
    names = CURVE_HEADER.split(",")
    rows = [[float(x) for x in line.split(",")] for line in lines[1:]]
    data = np.array(rows, dtype=float).reshape(len(rows), len(names))
    return {name: data[:, j] for j, name in enumerate(names)}


def emit_histogram(hist: EnergyHistogram, fit: TemperatureFit | None, path,
                   manifest_ref: str | None = None,
                   sidecar_path=None) -> None:
    """Write histogram CSV plus a JSON sidecar with the fit parameters."""
    lines = ["bin_lo,bin_hi,count"]
    for lo, hi, c in zip(hist.bin_edges[:-1], hist.bin_edges[1:], hist.counts):
        lines.append(f"{fmt(lo)},{fmt(hi)},{int(c)}")
    path = Path(path)
    path.write_text("\n".join(lines) + "\n")
    sidecar = {
        "overflow": hist.overflow,
        "total_samples": hist.total_samples,
        "e_max": hist.e_max,
        "fit": None if fit is None else {
            "temperature": fit.temperature,
            "sigma": fit.sigma,
            "slope": fit.slope,
            "intercept": fit.intercept,
            "n_bins_used": fit.n_bins_used,
            "goodness": fit.goodness,
        },
        "manifest": manifest_ref,
    }
    if sidecar_path is None:
        sidecar_path = path.with_suffix(".json")
    Path(sidecar_path).write_text(json.dumps(sidecar, indent=2, sort_keys=True) + "\n")


def read_histogram(path) -> EnergyHistogram:
    """Read back an emitted histogram CSV."""
    lines = Path(path).read_text().strip().splitlines()
    if not lines or lines[0] != "bin_lo,bin_hi,count":
        raise ValueError(f"{path}: not a histogram CSV (bad header)")
    lo, hi, counts = [], [], []
    for ln in lines[1:]:
        a, b, c = ln.split(",")
        lo.append(float(a))
        hi.append(float(b))
        counts.append(int(c))
    edges = np.array(lo + [hi[-1]])
    counts = np.array(counts)
    return EnergyHistogram(bin_edges=edges, counts=counts, overflow=0,
                           total_samples=int(counts.sum()))


@dataclass
class RunManifest:
    """Everything needed to reproduce and audit a run."""

    command: str
    config: dict
    seeds: tuple
    code_version: str
    propagator: str
    step_size: float | None = None
    delta_t_steps: int | None = None
    max_snap_distance: float | None = None
    started: str = ""
    finished: str = ""
    bath_initial: list = field(default_factory=list)
    bath_final: list = field(default_factory=list)
    failures: list = field(default_factory=list)
    outputs: list = field(default_factory=list)

    def __post_init__(self):
        if not self.started:
            self.started = self.now()

    @staticmethod
    def now() -> str:
        return datetime.now(timezone.utc).isoformat()

    def finish(self) -> None:
        self.finished = self.now()

    def write(self, path) -> None:
        payload = {k: _jsonable(v) for k, v in self.__dict__.items()}
        Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _jsonable(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, np.ndarray):
        return [_jsonable(x) for x in v]
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    return v
