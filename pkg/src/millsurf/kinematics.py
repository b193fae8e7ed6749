"""Homogeneous transform chain: cutting edge -> tool -> spindle -> workpiece.

Internal units are mm, seconds, and radians; unit conversion happens only at
configuration parsing and report emission. The chain for a point p on the
cutting edge of tooth K at time t is

    p_workpiece = T_spindle_to_workpiece(t) . T_tool_to_spindle(K, t) . T_edge_to_tool(K) . p

where the edge-to-tool transform carries the rake rotation plus the radial
placement (cutter radius and per-tooth run-out), the tool-to-spindle transform
is a pure Z rotation by the instantaneous tooth angle, and the spindle-to-
workpiece transform is the straight-line feed translation along Y.

The ``*_rows`` builders return plain nested lists of Python floats and are the
single source of truth for matrix entries; the public constructors wrap them
into numpy arrays. The simulation engine consumes the same builders, which
keeps its two kernels bit-identical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DomainError
from .tool_geometry import CuttingEdgePoint, ToolDefinition


@dataclass(frozen=True)
class ProcessParameters:
    """Kinematic state of one cut. Feed speed is mm/s; angles rad; lengths mm."""

    angular_velocity_rad_s: float
    feed_speed_mm_s: float
    feed_per_tooth_mm: float
    depth_of_cut_mm: float
    phase_rad: float = 0.0
    initial_position_mm: tuple[float, float | None, float] = (0.0, None, 0.0)
    spindle_speed_rpm: float | None = None
    cutting_speed_m_min: float | None = None

    def __post_init__(self) -> None:
        if self.angular_velocity_rad_s <= 0:
            raise DomainError(f"angular velocity must be > 0, got {self.angular_velocity_rad_s}")
        if self.feed_speed_mm_s <= 0:
            raise DomainError(f"feed speed must be > 0, got {self.feed_speed_mm_s}")
        if self.depth_of_cut_mm <= 0:
            raise DomainError(f"depth of cut must be > 0, got {self.depth_of_cut_mm}")


@dataclass(frozen=True)
class WorkpiecePoint:
    """A cutting-edge point expressed in workpiece coordinates at time t."""

    x_mm: float
    y_mm: float
    z_mm: float
    t_s: float
    tooth_index: int


def tooth_angle(
    phase_rad: float,
    tooth_index: int,
    tooth_count: int,
    angular_velocity_rad_s: float,
    t_s,
):
    """Instantaneous rotation angle of tooth K about the spindle Z axis.

    Accepts a scalar or ndarray ``t_s`` and preserves the exact floating-point
    evaluation order either way.
    """
    base = phase_rad + (2.0 * math.pi) * (tooth_index - 1) / tooth_count
    return base - angular_velocity_rad_s * t_s


def _check_tooth_index(tooth_index: int, tooth_count: int) -> None:
    if not 1 <= tooth_index <= tooth_count:
        raise DomainError(f"tooth index {tooth_index} out of range 1..{tooth_count}")


def _edge_to_tool_rows(tool: ToolDefinition, tooth_index: int) -> list[list[float]]:
    _check_tooth_index(tooth_index, tool.tooth_count)
    cf = math.cos(tool.radial_rake_rad)
    sf = math.sin(tool.radial_rake_rad)
    cp = math.cos(tool.axial_rake_rad)
    sp = math.sin(tool.axial_rake_rad)
    eps_r, eps_a = tool.runouts_mm[tooth_index - 1]
    tx = tool.cutting_diameter_mm / 2.0 + (tooth_index - 1) * eps_r
    tz = (tooth_index - 1) * eps_a
    return [
        [cf, sf * cp, sf * sp, tx],
        [-sf, cf * cp, cf * sp, 0.0],
        [0.0, -sp, cp, tz],
        [0.0, 0.0, 0.0, 1.0],
    ]


def _tool_to_spindle_rows(
    phase_rad: float,
    tooth_index: int,
    tooth_count: int,
    angular_velocity_rad_s: float,
    t_s: float,
) -> list[list[float]]:
    if tooth_count < 1:
        raise DomainError(f"tooth_count must be >= 1, got {tooth_count}")
    _check_tooth_index(tooth_index, tooth_count)
    if t_s < 0:
        raise DomainError(f"time must be >= 0, got {t_s}")
    th = tooth_angle(phase_rad, tooth_index, tooth_count, angular_velocity_rad_s, t_s)
    c = math.cos(th)
    s = math.sin(th)
    return [
        [c, s, 0.0, 0.0],
        [-s, c, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ]


def _spindle_to_workpiece_rows(
    x0_mm: float, y0_mm: float, z0_mm: float, feed_speed_mm_s: float, t_s: float
) -> list[list[float]]:
    if t_s < 0:
        raise DomainError(f"time must be >= 0, got {t_s}")
    return [
        [1.0, 0.0, 0.0, x0_mm],
        [0.0, 1.0, 0.0, y0_mm + feed_speed_mm_s * t_s],
        [0.0, 0.0, 1.0, z0_mm],
        [0.0, 0.0, 0.0, 1.0],
    ]


def _matmul4(a, b) -> list[list[float]]:
    """4x4 matrix product with fixed left-to-right summation order."""
    return [
        [
            a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j] + a[i][3] * b[3][j]
            for j in range(4)
        ]
        for i in range(4)
    ]


def _apply4(m, x: float, y: float, z: float) -> tuple[float, float, float]:
    """Apply a homogeneous transform to (x, y, z, 1)."""
    return (
        m[0][0] * x + m[0][1] * y + m[0][2] * z + m[0][3],
        m[1][0] * x + m[1][1] * y + m[1][2] * z + m[1][3],
        m[2][0] * x + m[2][1] * y + m[2][2] * z + m[2][3],
    )


def edge_to_tool_transform(tool: ToolDefinition, tooth_index: int) -> np.ndarray:
    """Edge-frame to tool-frame transform for tooth K (rake rotation + placement)."""
    return np.array(_edge_to_tool_rows(tool, tooth_index), dtype=np.float64)


def tool_to_spindle_transform(
    phase_rad: float,
    tooth_index: int,
    tooth_count: int,
    angular_velocity_rad_s: float,
    t_s: float,
) -> np.ndarray:
    """Planar rotation of tooth K about the spindle axis at time t."""
    return np.array(
        _tool_to_spindle_rows(phase_rad, tooth_index, tooth_count, angular_velocity_rad_s, t_s),
        dtype=np.float64,
    )


def spindle_to_workpiece_transform(
    x0_mm: float, y0_mm: float, z0_mm: float, feed_speed_mm_s: float, t_s: float
) -> np.ndarray:
    """Straight-line feed translation along the workpiece Y axis."""
    return np.array(
        _spindle_to_workpiece_rows(x0_mm, y0_mm, z0_mm, feed_speed_mm_s, t_s), dtype=np.float64
    )


def compose_transforms(a, b) -> np.ndarray:
    """Product a . b of two homogeneous transforms."""
    return np.array(_matmul4(a, b), dtype=np.float64)


def transform_point(
    tool: ToolDefinition,
    params: ProcessParameters,
    tooth_index: int,
    t_s: float,
    point: CuttingEdgePoint,
) -> WorkpiecePoint:
    """Map an edge-frame point into workpiece coordinates at time t.

    The composite matrix is built once and applied; callers evaluating many
    points at the same (tooth, time) should compose once themselves or use the
    simulation engine, which does exactly that.
    """
    x0, y0, z0 = params.initial_position_mm
    if y0 is None:
        raise DomainError("initial position y is unresolved (auto-span config not planned yet)")
    ct = _edge_to_tool_rows(tool, tooth_index)
    ts = _tool_to_spindle_rows(
        params.phase_rad, tooth_index, tool.tooth_count, params.angular_velocity_rad_s, t_s
    )
    sw = _spindle_to_workpiece_rows(x0, y0, z0, params.feed_speed_mm_s, t_s)
    m = _matmul4(_matmul4(sw, ts), ct)
    x, y, z = _apply4(m, point.x_mm, point.y_mm, point.z_mm)
    return WorkpiecePoint(x, y, z, t_s, tooth_index)


def derive_kinematics(
    tooth_count: int,
    cutting_diameter_mm: float,
    depth_of_cut_mm: float,
    cutting_speed_m_min: float | None = None,
    spindle_speed_rpm: float | None = None,
    feed_per_tooth_mm: float | None = None,
    feed_speed_mm_min: float | None = None,
    phase_rad: float = 0.0,
    initial_position_mm: tuple[float, float | None, float] = (0.0, None, 0.0),
) -> ProcessParameters:
    """Resolve spindle speed / cutting speed and feed per tooth / feed speed.

    Standard machining relations: n = 1000 v_c / (pi D), omega = 2 pi n / 60,
    v_f = f_z z_n n / 60. Exactly one of each alternative pair must be given;
    the result is canonical in (rpm, f_z), with all derived speeds recomputed
    from them so that serializing and re-deriving reproduces identical values.
    """
    if (cutting_speed_m_min is None) == (spindle_speed_rpm is None):
        raise ConfigError("exactly one of cutting_speed_m_min / spindle_speed_rpm is required")
    if (feed_per_tooth_mm is None) == (feed_speed_mm_min is None):
        raise ConfigError("exactly one of feed_per_tooth_mm / feed_speed_mm_min is required")
    if tooth_count < 1:
        raise ConfigError(f"tooth_count must be >= 1, got {tooth_count}")
    if cutting_diameter_mm <= 0:
        raise ConfigError(f"cutting_diameter_mm must be > 0, got {cutting_diameter_mm}")

    if spindle_speed_rpm is None:
        if cutting_speed_m_min <= 0:
            raise ConfigError(f"cutting_speed_m_min must be > 0, got {cutting_speed_m_min}")
        rpm = 1000.0 * cutting_speed_m_min / (math.pi * cutting_diameter_mm)
    else:
        if spindle_speed_rpm <= 0:
            raise ConfigError(f"spindle_speed_rpm must be > 0, got {spindle_speed_rpm}")
        rpm = spindle_speed_rpm

    if feed_per_tooth_mm is None:
        if feed_speed_mm_min <= 0:
            raise ConfigError(f"feed_speed_mm_min must be > 0, got {feed_speed_mm_min}")
        f_z = feed_speed_mm_min / (tooth_count * rpm)
    else:
        if feed_per_tooth_mm <= 0:
            raise ConfigError(f"feed_per_tooth_mm must be > 0, got {feed_per_tooth_mm}")
        f_z = feed_per_tooth_mm

    v_c = math.pi * cutting_diameter_mm * rpm / 1000.0
    v_f_mm_s = f_z * tooth_count * rpm / 60.0
    omega = 2.0 * math.pi * rpm / 60.0
    return ProcessParameters(
        angular_velocity_rad_s=omega,
        feed_speed_mm_s=v_f_mm_s,
        feed_per_tooth_mm=f_z,
        depth_of_cut_mm=depth_of_cut_mm,
        phase_rad=phase_rad,
        initial_position_mm=initial_position_mm,
        spindle_speed_rpm=rpm,
        cutting_speed_m_min=v_c,
    )
