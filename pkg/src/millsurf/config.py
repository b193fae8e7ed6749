"""JSON configuration parsing and validation.

Configuration files use industry units (degrees, m/min, mm/min, rpm) and are
converted to the internal mm/s/rad system at parse time. Validation is strict:
unknown keys are rejected so a typo in a cutting parameter cannot silently
produce a plausible but wrong surface, and every error names the offending
JSON path.

Either member of the speed pair (cutting_speed_m_min / spindle_speed_rpm) and
of the feed pair (feed_per_tooth_mm / feed_speed_mm_min) may be given; when
both members are present they must agree exactly (1e-9 mm/s for the feed
pair), otherwise the error cites both fields.

Angles take a ``*_deg`` field (for humans) or a ``*_rad`` twin (emitted by the
serializer, so parse(serialize(doc)) reproduces the document bit-exactly), but
never both.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .engine import DEFAULT_MAX_STEP_ANGLE_RAD, SimulationConfig
from .errors import ConfigError
from .kinematics import ProcessParameters, derive_kinematics
from .surface_grid import GridSpec
from .tool_geometry import ToolDefinition

OUTPUT_FORMATS = ("surface", "csv", "graymap", "metrics")

FEED_CONSISTENCY_TOL_MM_S = 1e-9
SPEED_CONSISTENCY_REL_TOL = 1e-9


@dataclass(frozen=True)
class EngineSettings:
    edge_point_count: int | None = None
    max_step_angle_rad: float = DEFAULT_MAX_STEP_ANGLE_RAD
    time_step_s: float | None = None
    span_s: tuple[float, float] | None = None
    worker_count: int = 1
    record_trajectory: bool = False


@dataclass(frozen=True)
class OutputSettings:
    formats: tuple[str, ...] = ("surface",)
    basename: str = "surface"


@dataclass(frozen=True)
class ConfigDocument:
    tool: ToolDefinition
    process: ProcessParameters
    grid: GridSpec
    engine: EngineSettings = field(default_factory=EngineSettings)
    output: OutputSettings = field(default_factory=OutputSettings)

    def to_simulation_config(self) -> SimulationConfig:
        return SimulationConfig(
            tool=self.tool,
            process=self.process,
            grid=self.grid,
            edge_point_count=self.engine.edge_point_count,
            max_step_angle_rad=self.engine.max_step_angle_rad,
            time_step_s=self.engine.time_step_s,
            span_s=self.engine.span_s,
            record_trajectory=self.engine.record_trajectory,
            worker_count=self.engine.worker_count,
        )


def _require_dict(value, path: str) -> dict:
    if not isinstance(value, dict):
        raise ConfigError(f"{path}: expected an object, got {type(value).__name__}")
    return value


def _check_keys(block: dict, path: str, allowed: set[str], required: set[str]) -> None:
    for key in block:
        if key not in allowed:
            raise ConfigError(f"{path}.{key}: unknown key")
    for key in required:
        if key not in block:
            raise ConfigError(f"{path}.{key}: required key missing")


def _number(block: dict, path: str, key: str, *, default=None, minimum=None,
            exclusive_min=None, maximum=None, allow_none=False):
    if key not in block or block[key] is None:
        if key in block and not allow_none and default is None:
            raise ConfigError(f"{path}.{key}: must not be null")
        return default
    value = block[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}.{key}: expected a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError(f"{path}.{key}: must be finite, got {value}")
    if exclusive_min is not None and value <= exclusive_min:
        raise ConfigError(f"{path}.{key}: must be > {exclusive_min}, got {value}")
    if minimum is not None and value < minimum:
        raise ConfigError(f"{path}.{key}: must be >= {minimum}, got {value}")
    if maximum is not None and value > maximum:
        raise ConfigError(f"{path}.{key}: must be <= {maximum}, got {value}")
    return value


def _integer(block: dict, path: str, key: str, *, default=None, minimum=None, allow_none=False):
    if key not in block or block[key] is None:
        if key in block and not allow_none and default is None:
            raise ConfigError(f"{path}.{key}: must not be null")
        return default
    value = block[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{path}.{key}: expected an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigError(f"{path}.{key}: must be >= {minimum}, got {value}")
    return value


def _angle_rad(block: dict, path: str, stem: str, default: float = 0.0) -> float:
    """Read `<stem>_deg` or `<stem>_rad` (not both) and return radians."""
    deg_key, rad_key = f"{stem}_deg", f"{stem}_rad"
    if deg_key in block and block[deg_key] is not None and rad_key in block and block[rad_key] is not None:
        raise ConfigError(f"{path}: give {deg_key} or {rad_key}, not both")
    if rad_key in block and block[rad_key] is not None:
        return _number(block, path, rad_key)
    deg = _number(block, path, deg_key, default=None, allow_none=True)
    return default if deg is None else math.radians(deg)


def _parse_tool(block: dict, path: str = "tool") -> ToolDefinition:
    _require_dict(block, path)
    _check_keys(
        block,
        path,
        allowed={
            "cutting_diameter_mm",
            "insert_radius_mm",
            "tooth_count",
            "radial_rake_deg",
            "radial_rake_rad",
            "axial_rake_deg",
            "axial_rake_rad",
            "runouts_mm",
        },
        required={"cutting_diameter_mm", "insert_radius_mm", "tooth_count"},
    )
    diameter = _number(block, path, "cutting_diameter_mm", exclusive_min=0.0)
    radius = _number(block, path, "insert_radius_mm", exclusive_min=0.0)
    teeth = _integer(block, path, "tooth_count", minimum=1)
    rake_f = _angle_rad(block, path, "radial_rake")
    rake_p = _angle_rad(block, path, "axial_rake")
    if abs(rake_f) >= math.pi / 2 or abs(rake_p) >= math.pi / 2:
        raise ConfigError(f"{path}: rake angles must satisfy |angle| < 90 degrees")

    runouts = block.get("runouts_mm")
    if runouts is None:
        pairs: tuple[tuple[float, float], ...] = ()
    else:
        if not isinstance(runouts, list) or len(runouts) != teeth:
            raise ConfigError(
                f"{path}.runouts_mm: expected a list of {teeth} [radial, axial] pairs"
            )
        out = []
        for k, pair in enumerate(runouts, start=1):
            if (
                not isinstance(pair, list)
                or len(pair) != 2
                or any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in pair)
            ):
                raise ConfigError(f"{path}.runouts_mm[{k - 1}]: expected [radial_mm, axial_mm]")
            if abs(pair[0]) >= radius or abs(pair[1]) >= radius:
                raise ConfigError(
                    f"{path}.runouts_mm[{k - 1}]: run-out must be small against the "
                    f"insert radius {radius} mm"
                )
            out.append((float(pair[0]), float(pair[1])))
        pairs = tuple(out)

    return ToolDefinition(
        cutting_diameter_mm=diameter,
        insert_radius_mm=radius,
        tooth_count=teeth,
        radial_rake_rad=rake_f,
        axial_rake_rad=rake_p,
        runouts_mm=pairs,
    )


def _parse_process(block: dict, tool: ToolDefinition, path: str = "process") -> ProcessParameters:
    _require_dict(block, path)
    _check_keys(
        block,
        path,
        allowed={
            "cutting_speed_m_min",
            "spindle_speed_rpm",
            "feed_per_tooth_mm",
            "feed_speed_mm_min",
            "depth_of_cut_mm",
            "phase_deg",
            "phase_rad",
            "initial_position_mm",
        },
        required={"depth_of_cut_mm"},
    )
    v_c = _number(block, path, "cutting_speed_m_min", exclusive_min=0.0, allow_none=True)
    rpm = _number(block, path, "spindle_speed_rpm", exclusive_min=0.0, allow_none=True)
    f_z = _number(block, path, "feed_per_tooth_mm", exclusive_min=0.0, allow_none=True)
    v_f = _number(block, path, "feed_speed_mm_min", exclusive_min=0.0, allow_none=True)
    a_p = _number(block, path, "depth_of_cut_mm", exclusive_min=0.0)
    if a_p > tool.insert_radius_mm:
        raise ConfigError(
            f"{path}.depth_of_cut_mm: {a_p} exceeds tool.insert_radius_mm "
            f"{tool.insert_radius_mm}"
        )
    phase = _angle_rad(block, path, "phase")

    if v_c is None and rpm is None:
        raise ConfigError(
            f"{path}: one of cutting_speed_m_min / spindle_speed_rpm is required"
        )
    if v_c is not None and rpm is not None:
        implied_rpm = 1000.0 * v_c / (math.pi * tool.cutting_diameter_mm)
        if abs(implied_rpm - rpm) > SPEED_CONSISTENCY_REL_TOL * max(abs(rpm), 1.0):
            raise ConfigError(
                f"{path}.cutting_speed_m_min and {path}.spindle_speed_rpm are inconsistent: "
                f"{v_c} m/min implies {implied_rpm:.6f} rpm, got {rpm}"
            )
        v_c = None  # resolved; keep the rpm route

    if f_z is None and v_f is None:
        raise ConfigError(
            f"{path}: one of feed_per_tooth_mm / feed_speed_mm_min is required"
        )
    if f_z is not None and v_f is not None:
        rpm_eff = rpm if rpm is not None else 1000.0 * v_c / (math.pi * tool.cutting_diameter_mm)
        implied_mm_s = f_z * tool.tooth_count * rpm_eff / 60.0
        if abs(implied_mm_s - v_f / 60.0) > FEED_CONSISTENCY_TOL_MM_S:
            raise ConfigError(
                f"{path}.feed_per_tooth_mm and {path}.feed_speed_mm_min are inconsistent: "
                f"f_z {f_z} implies {implied_mm_s * 60.0:.9f} mm/min, got {v_f}"
            )
        v_f = None  # resolved; keep the feed-per-tooth route

    pos_block = block.get("initial_position_mm")
    if pos_block is None:
        position: tuple[float, float | None, float] = (0.0, None, 0.0)
    else:
        pos_path = f"{path}.initial_position_mm"
        _require_dict(pos_block, pos_path)
        _check_keys(pos_block, pos_path, allowed={"x", "y", "z"}, required={"x"})
        x = _number(pos_block, pos_path, "x")
        y = _number(pos_block, pos_path, "y", allow_none=True)
        z = _number(pos_block, pos_path, "z", default=0.0)
        position = (x, y, z)

    return derive_kinematics(
        tooth_count=tool.tooth_count,
        cutting_diameter_mm=tool.cutting_diameter_mm,
        depth_of_cut_mm=a_p,
        cutting_speed_m_min=v_c,
        spindle_speed_rpm=rpm,
        feed_per_tooth_mm=f_z,
        feed_speed_mm_min=v_f,
        phase_rad=phase,
        initial_position_mm=position,
    )


def _parse_grid(block: dict, path: str = "grid") -> GridSpec:
    _require_dict(block, path)
    _check_keys(
        block,
        path,
        allowed={"spacing_mm", "x_min_mm", "x_max_mm", "y_min_mm", "y_max_mm"},
        required={"spacing_mm", "x_min_mm", "x_max_mm", "y_min_mm", "y_max_mm"},
    )
    spacing = _number(block, path, "spacing_mm", exclusive_min=0.0)
    x_lo = _number(block, path, "x_min_mm")
    x_hi = _number(block, path, "x_max_mm")
    y_lo = _number(block, path, "y_min_mm")
    y_hi = _number(block, path, "y_max_mm")
    if x_hi <= x_lo or y_hi <= y_lo:
        raise ConfigError(f"{path}: ranges must satisfy min < max")
    return GridSpec.from_extents(spacing, (x_lo, x_hi), (y_lo, y_hi))


def _parse_engine(block: dict | None, path: str = "engine") -> EngineSettings:
    if block is None:
        return EngineSettings()
    _require_dict(block, path)
    _check_keys(
        block,
        path,
        allowed={
            "edge_points",
            "max_step_angle_deg",
            "max_step_angle_rad",
            "time_step_s",
            "span_s",
            "workers",
            "record_trajectory",
        },
        required=set(),
    )
    edge_points = _integer(block, path, "edge_points", minimum=2, allow_none=True)
    max_angle = _angle_rad(block, path, "max_step_angle", default=DEFAULT_MAX_STEP_ANGLE_RAD)
    if max_angle <= 0:
        raise ConfigError(f"{path}.max_step_angle_deg: must be > 0, got {max_angle}")
    dt = _number(block, path, "time_step_s", exclusive_min=0.0, allow_none=True)
    span = block.get("span_s")
    if span is not None:
        if (
            not isinstance(span, list)
            or len(span) != 2
            or any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in span)
        ):
            raise ConfigError(f"{path}.span_s: expected [t_start_s, t_end_s]")
        if span[0] < 0 or span[1] <= span[0]:
            raise ConfigError(f"{path}.span_s: must satisfy 0 <= start < end, got {span}")
        span = (float(span[0]), float(span[1]))
    workers = _integer(block, path, "workers", default=1, minimum=1)
    record = block.get("record_trajectory", False)
    if not isinstance(record, bool):
        raise ConfigError(f"{path}.record_trajectory: expected true/false, got {record!r}")
    return EngineSettings(
        edge_point_count=edge_points,
        max_step_angle_rad=max_angle,
        time_step_s=dt,
        span_s=span,
        worker_count=workers,
        record_trajectory=record,
    )


def _parse_output(block: dict | None, path: str = "output") -> OutputSettings:
    if block is None:
        return OutputSettings()
    _require_dict(block, path)
    _check_keys(block, path, allowed={"formats", "basename"}, required=set())
    formats = block.get("formats", ["surface"])
    if not isinstance(formats, list) or not formats:
        raise ConfigError(f"{path}.formats: expected a non-empty list")
    for fmt in formats:
        if fmt not in OUTPUT_FORMATS:
            raise ConfigError(
                f"{path}.formats: unknown format {fmt!r}, allowed: {', '.join(OUTPUT_FORMATS)}"
            )
    basename = block.get("basename", "surface")
    if not isinstance(basename, str) or not basename:
        raise ConfigError(f"{path}.basename: expected a non-empty string")
    return OutputSettings(formats=tuple(formats), basename=basename)


def config_from_dict(raw: dict) -> ConfigDocument:
    _require_dict(raw, "<config>")
    _check_keys(
        raw,
        "<config>",
        allowed={"tool", "process", "grid", "engine", "output"},
        required={"tool", "process", "grid"},
    )
    tool = _parse_tool(raw["tool"])
    process = _parse_process(raw["process"], tool)
    grid = _parse_grid(raw["grid"])
    engine = _parse_engine(raw.get("engine"))
    output = _parse_output(raw.get("output"))
    if engine.span_s is not None and process.initial_position_mm[1] is None:
        raise ConfigError(
            "process.initial_position_mm.y is required when engine.span_s is explicit"
        )
    return ConfigDocument(tool=tool, process=process, grid=grid, engine=engine, output=output)


def parse_config(text: str) -> ConfigDocument:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON: {exc}") from exc
    return config_from_dict(raw)


def serialize_config(doc: ConfigDocument) -> dict:
    """Canonical dict form; parse_config(json.dumps(...)) reproduces the document.

    Angles are emitted in radians so the round trip is exact.
    """
    x, y, z = doc.process.initial_position_mm
    raw: dict = {
        "tool": {
            "cutting_diameter_mm": doc.tool.cutting_diameter_mm,
            "insert_radius_mm": doc.tool.insert_radius_mm,
            "tooth_count": doc.tool.tooth_count,
            "radial_rake_rad": doc.tool.radial_rake_rad,
            "axial_rake_rad": doc.tool.axial_rake_rad,
            "runouts_mm": [list(pair) for pair in doc.tool.runouts_mm],
        },
        "process": {
            "spindle_speed_rpm": doc.process.spindle_speed_rpm,
            "feed_per_tooth_mm": doc.process.feed_per_tooth_mm,
            "depth_of_cut_mm": doc.process.depth_of_cut_mm,
            "phase_rad": doc.process.phase_rad,
            "initial_position_mm": {"x": x, "y": y, "z": z},
        },
        "grid": {
            "spacing_mm": doc.grid.spacing_mm,
            "x_min_mm": doc.grid.x_min_mm,
            "x_max_mm": doc.grid.x_max_mm,
            "y_min_mm": doc.grid.y_min_mm,
            "y_max_mm": doc.grid.y_max_mm,
        },
        "engine": {
            "edge_points": doc.engine.edge_point_count,
            "max_step_angle_rad": doc.engine.max_step_angle_rad,
            "time_step_s": doc.engine.time_step_s,
            "span_s": list(doc.engine.span_s) if doc.engine.span_s is not None else None,
            "workers": doc.engine.worker_count,
            "record_trajectory": doc.engine.record_trajectory,
        },
        "output": {
            "formats": list(doc.output.formats),
            "basename": doc.output.basename,
        },
    }
    return raw
