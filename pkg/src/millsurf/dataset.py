"""Latin hypercube parameter sampling and batch surface generation.

A dataset run samples machining parameters with a seeded Latin hypercube,
simulates one surface per sample, and writes a JSON-lines manifest next to the
surface files. The manifest starts with one header object (schema version,
seed, count, RNG identity, ranges, and the embedded base configuration)
followed by exactly one object per sample, appended in sample-index order.

Reruns with the same seed and base configuration are byte-identical: rows
reference surface files by relative name and carry only deterministic
counters (wall time is deliberately excluded).
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from copy import deepcopy
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .config import config_from_dict
from .engine import simulate
from .errors import ConfigError, MillsurfError
from .roughness import areal_metrics
from .surface_io import write_surface

SCHEMA_VERSION = 1
RNG_NAME = "numpy-default-pcg64"

# Sampled parameter -> (config block, key, sibling keys cleared so the pair
# stays consistent). Run-outs are handled separately (they rewrite the
# per-tooth pair list).
_PARAMETER_PATHS: dict[str, tuple[str, str, tuple[str, ...]]] = {
    "cutting_speed_m_min": ("process", "cutting_speed_m_min", ("spindle_speed_rpm",)),
    "spindle_speed_rpm": ("process", "spindle_speed_rpm", ("cutting_speed_m_min",)),
    "feed_per_tooth_mm": ("process", "feed_per_tooth_mm", ("feed_speed_mm_min",)),
    "depth_of_cut_mm": ("process", "depth_of_cut_mm", ()),
    "phase_deg": ("process", "phase_deg", ("phase_rad",)),
    "grid_spacing_mm": ("grid", "spacing_mm", ()),
    "radial_rake_deg": ("tool", "radial_rake_deg", ("radial_rake_rad",)),
    "axial_rake_deg": ("tool", "axial_rake_deg", ("axial_rake_rad",)),
}
_RUNOUT_NAMES = ("runout_radial_mm", "runout_axial_mm")

PARAMETER_NAMES = tuple(_PARAMETER_PATHS) + _RUNOUT_NAMES

# Parameters whose lower bound must stay strictly positive.
_POSITIVE = {
    "cutting_speed_m_min",
    "spindle_speed_rpm",
    "feed_per_tooth_mm",
    "depth_of_cut_mm",
    "grid_spacing_mm",
}


@dataclass(frozen=True)
class ParameterRange:
    """Closed sampling interval for one named machining parameter (linear scale)."""

    name: str
    low: float
    high: float

    def __post_init__(self) -> None:
        if self.name not in PARAMETER_NAMES:
            raise ConfigError(
                f"unknown dataset parameter {self.name!r}; known: {', '.join(PARAMETER_NAMES)}"
            )
        if not self.low < self.high:
            raise ConfigError(f"range for {self.name}: low {self.low} must be < high {self.high}")
        if self.name in _POSITIVE and self.low <= 0:
            raise ConfigError(f"range for {self.name}: bounds must be > 0, got low {self.low}")
        if self.name in ("radial_rake_deg", "axial_rake_deg") and (
            self.low <= -90 or self.high >= 90
        ):
            raise ConfigError(f"range for {self.name}: must stay within (-90, 90) degrees")


@dataclass
class DatasetManifest:
    seed: int
    count: int
    rows: list[dict]
    path: Path


def lhs_sample(ranges: list[ParameterRange], count: int, seed: int) -> np.ndarray:
    """Seeded Latin hypercube: (count, len(ranges)) array, one sample per
    stratum in every dimension, identical output for identical inputs."""
    if count < 1:
        raise ConfigError(f"sample count must be >= 1, got {count}")
    if not ranges:
        raise ConfigError("at least one parameter range is required")
    rng = np.random.default_rng(seed)
    out = np.empty((count, len(ranges)), dtype=np.float64)
    for d, prm in enumerate(ranges):
        strata = rng.permutation(count)
        offsets = rng.random(count)
        unit = (strata + offsets) / count
        out[:, d] = prm.low + (prm.high - prm.low) * unit
    return out


def _apply_overrides(base_raw: dict, names: list[str], values: np.ndarray) -> dict:
    raw = deepcopy(base_raw)
    runout_r = None
    runout_a = None
    for name, value in zip(names, values):
        value = float(value)
        if name == "runout_radial_mm":
            runout_r = value
            continue
        if name == "runout_axial_mm":
            runout_a = value
            continue
        block_name, key, clears = _PARAMETER_PATHS[name]
        block = raw.setdefault(block_name, {})
        block[key] = value
        for cleared in clears:
            block.pop(cleared, None)
    if runout_r is not None or runout_a is not None:
        tool = raw.setdefault("tool", {})
        teeth = tool.get("tooth_count", 1)
        base_pairs = tool.get("runouts_mm") or [[0.0, 0.0] for _ in range(teeth)]
        tool["runouts_mm"] = [
            [
                runout_r if runout_r is not None else pair[0],
                runout_a if runout_a is not None else pair[1],
            ]
            for pair in base_pairs
        ]
    return raw


def _check_ranges_against_base(ranges: list[ParameterRange], base_raw: dict) -> None:
    tool = base_raw.get("tool", {})
    radius = tool.get("insert_radius_mm")
    if not isinstance(radius, (int, float)):
        return  # base config validation will report this properly
    for prm in ranges:
        if prm.name == "depth_of_cut_mm" and prm.high > radius:
            raise ConfigError(
                f"range for depth_of_cut_mm: high {prm.high} exceeds insert radius {radius}"
            )
        if prm.name in _RUNOUT_NAMES and max(abs(prm.low), abs(prm.high)) >= radius:
            raise ConfigError(
                f"range for {prm.name}: magnitude must stay below insert radius {radius}"
            )


def _run_sample(index: int, raw: dict, params: dict, out_dir: Path) -> dict:
    filename = f"sample_{index:05d}.srtf"
    row: dict = {
        "index": index,
        "params": params,
        "surface_file": filename,
        "status": "ok",
        "error": None,
        "metrics": None,
        "metrics_error": None,
        "counters": None,
    }
    try:
        doc = config_from_dict(raw)
        sim_config = replace(doc.to_simulation_config(), worker_count=1, record_trajectory=False)
        result = simulate(sim_config)
        write_surface(result.field, out_dir / filename)
        row["counters"] = {
            "time_steps": result.time_steps,
            "trajectory_points": result.trajectory_points,
            "cells_updated": result.cells_updated,
        }
        try:
            row["metrics"] = areal_metrics(result.field).to_json_dict()
        except MillsurfError as exc:
            row["metrics_error"] = str(exc)
    except MillsurfError as exc:
        row["status"] = "failed"
        row["error"] = str(exc)
        row["surface_file"] = None
    return row


def generate_dataset(
    ranges: list[ParameterRange],
    count: int,
    seed: int,
    base_raw: dict,
    out_dir: Path,
    workers: int = 1,
) -> DatasetManifest:
    """Simulate ``count`` LHS-sampled surfaces and write files plus manifest.

    Samples are independent and run concurrently up to ``workers``; each
    sample's simulation is single-threaded so results do not depend on the
    schedule. A failing sample is recorded in-place and does not abort the
    batch.
    """
    config_from_dict(base_raw)  # fail fast on a broken base configuration
    _check_ranges_against_base(ranges, base_raw)
    samples = lhs_sample(ranges, count, seed)
    names = [prm.name for prm in ranges]

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest_path = out_dir / "manifest.jsonl"
    header = {
        "schema_version": SCHEMA_VERSION,
        "seed": seed,
        "count": count,
        "rng": RNG_NAME,
        "ranges": [{"name": p.name, "low": p.low, "high": p.high} for p in ranges],
        "base_config": base_raw,
    }

    jobs = []
    for i in range(count):
        params = {name: float(samples[i, d]) for d, name in enumerate(names)}
        jobs.append((i, _apply_overrides(base_raw, names, samples[i]), params))

    rows: list[dict] = []
    with open(manifest_path, "w", encoding="utf-8") as handle:
        handle.write(json.dumps(header) + "\n")
        handle.flush()
        if workers <= 1:
            results = (_run_sample(i, raw, params, out_dir) for i, raw, params in jobs)
            for row in results:
                rows.append(row)
                handle.write(json.dumps(row) + "\n")
                handle.flush()
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                for row in pool.map(lambda job: _run_sample(*job, out_dir), jobs):
                    rows.append(row)
                    handle.write(json.dumps(row) + "\n")
                    handle.flush()
    return DatasetManifest(seed=seed, count=count, rows=rows, path=manifest_path)
