"""Surface file format (SRTF) plus CSV / graymap / metrics exports.

SRTF layout, little-endian throughout:

    offset  size  field
    0       4     magic "SRTF"
    4       4     format version (uint32, currently 1)
    8       4     m  (uint32, cell count along x; m+1 nodes)
    12      4     n  (uint32, cell count along y; n+1 nodes)
    16      8     grid spacing, mm (float64)
    24      8     origin x_min, mm (float64)
    32      8     origin y_min, mm (float64)
    40      8     uncut sentinel height, mm (float64)
    48      ...   (m+1)*(n+1) float64 heights, row-major over (i, j): row i
                  holds all j values for the node column x_i

Cells still at the sentinel value are uncut. write/read round-trips a
HeightField bit-exactly; the reader rejects bad magic, unknown versions, and
payloads whose length does not match the header. All file writes in this
module are whole-file atomic (write to a temp name, then rename).
"""

from __future__ import annotations

import json
import os
import struct
from pathlib import Path

import numpy as np

from .errors import DomainError, SurfaceFormatError
from .roughness import MM_TO_UM, areal_metrics
from .surface_grid import GridSpec, HeightField

MAGIC = b"SRTF"
VERSION = 1
_HEADER = struct.Struct("<4sIIIdddd")

GRAY_MID = 32768  # degenerate normalization (flat surface) maps machined cells here


def atomic_write_bytes(path: Path, payload: bytes) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as handle:
        handle.write(payload)
    os.replace(tmp, path)


def write_surface(field: HeightField, path: Path) -> None:
    header = _HEADER.pack(
        MAGIC,
        VERSION,
        field.spec.m,
        field.spec.n,
        field.spec.spacing_mm,
        field.spec.x_min_mm,
        field.spec.y_min_mm,
        field.initial_height_mm,
    )
    atomic_write_bytes(Path(path), header + field.heights.astype("<f8").tobytes())


def read_surface(path: Path) -> HeightField:
    blob = Path(path).read_bytes()
    if len(blob) < _HEADER.size:
        raise SurfaceFormatError(f"{path}: file shorter than the {_HEADER.size}-byte header")
    magic, version, m, n, spacing, x_min, y_min, sentinel = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise SurfaceFormatError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise SurfaceFormatError(f"{path}: unsupported format version {version}")
    expected = (m + 1) * (n + 1) * 8
    payload = blob[_HEADER.size :]
    if len(payload) != expected:
        raise SurfaceFormatError(
            f"{path}: payload is {len(payload)} bytes, header promises {expected} "
            f"({m + 1}x{n + 1} float64)"
        )
    heights = np.frombuffer(payload, dtype="<f8").astype(np.float64)
    spec = GridSpec(spacing_mm=spacing, x_min_mm=x_min, y_min_mm=y_min, m=m, n=n)
    return HeightField(spec, sentinel, heights)


def write_heights_csv(field: HeightField, path: Path, roi: tuple[int, int, int, int] | None = None) -> None:
    """Heights in micrometres; header row = x coordinates (mm), one data row per y node."""
    grid = field.spec
    if roi is None:
        roi = (0, 0, grid.m, grid.n)
    i_lo, j_lo, i_hi, j_hi = roi
    block = field.as_array()[i_lo : i_hi + 1, j_lo : j_hi + 1] * MM_TO_UM
    xs = grid.x_coords()[i_lo : i_hi + 1]
    lines = [",".join(f"{x:.6f}" for x in xs)]
    for j in range(block.shape[1]):
        lines.append(",".join(f"{v:.6f}" for v in block[:, j]))
    atomic_write_bytes(Path(path), ("\n".join(lines) + "\n").encode())


def write_graymap(field: HeightField, path: Path, roi: tuple[int, int, int, int] | None = None) -> None:
    """16-bit binary PGM (P5), min-max normalized over machined cells.

    Uncut cells map to 0; a flat machined surface maps to mid-gray. Image rows
    run along y (top row = y_min), columns along x.
    """
    grid = field.spec
    if roi is None:
        roi = (0, 0, grid.m, grid.n)
    i_lo, j_lo, i_hi, j_hi = roi
    block = field.as_array()[i_lo : i_hi + 1, j_lo : j_hi + 1]
    machined = block < field.initial_height_mm
    if not machined.any():
        raise DomainError("graymap export needs at least one machined cell in the roi")
    z_lo = block[machined].min()
    z_hi = block[machined].max()
    pixels = np.zeros(block.shape, dtype=np.uint16)
    if z_hi > z_lo:
        scaled = (block - z_lo) * (65535.0 / (z_hi - z_lo))
        pixels[machined] = np.rint(scaled[machined]).astype(np.uint16)
    else:
        pixels[machined] = GRAY_MID
    width = block.shape[0]
    height = block.shape[1]
    header = f"P5\n{width} {height}\n65535\n".encode()
    atomic_write_bytes(Path(path), header + pixels.T.astype(">u2").tobytes())


def export_views(
    field: HeightField,
    out_dir: Path,
    roi: tuple[int, int, int, int] | None = None,
    basename: str = "surface",
) -> dict[str, Path]:
    """Write the CSV grid, the graymap, and the metrics JSON for a roi."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / f"{basename}.csv"
    pgm_path = out_dir / f"{basename}.pgm"
    metrics_path = out_dir / f"{basename}_metrics.json"
    write_heights_csv(field, csv_path, roi)
    write_graymap(field, pgm_path, roi)
    metrics = areal_metrics(field, roi)
    atomic_write_bytes(
        metrics_path, (json.dumps(metrics.to_json_dict(), indent=2) + "\n").encode()
    )
    return {"csv": csv_path, "graymap": pgm_path, "metrics": metrics_path}
