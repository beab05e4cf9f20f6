"""BS and UAV placement plus the BS-local spherical view of each link.

Coordinate convention: x east, y north, z altitude above ground (meters).
The zenith angle theta is measured from straight up at the BS, so a UAV
level with the BS sits at theta = pi/2 (the horizon) and one directly
overhead at theta = 0. Azimuth phi is taken relative to the BS array
boresight and wrapped to (-pi, pi].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConfigurationError, GeometryError

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Position3D:
    x: float
    y: float
    z: float


@dataclass(frozen=True)
class BaseStationSite:
    """A BS site; `boresight_azimuth` is the array normal in the horizontal plane."""

    id: int
    position: Position3D
    boresight_azimuth: float  # radians, 0 = east, counterclockwise


@dataclass(frozen=True)
class CorridorSpec:
    """Circular corridor of equally spaced waypoints at a fixed altitude."""

    center: Position3D  # z is ignored
    radius: float
    altitude: float
    num_waypoints: int = 1


@dataclass(frozen=True)
class LinkGeometry:
    distance_3d: float
    theta: float  # zenith angle at the BS, radians in [0, pi]
    phi: float  # azimuth relative to boresight, radians in (-pi, pi]


def wrap_angle(angle: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    a = (angle + math.pi) % TWO_PI - math.pi
    if a <= -math.pi:
        a += TWO_PI
    return a


def generate_corridor(spec: CorridorSpec, m: int | None = None) -> list[Position3D]:
    """Place `m` waypoints evenly on the corridor circle, waypoint k at angle 2*pi*k/m.

    Waypoint 0 lies due east of the center; all waypoints sit exactly at
    `spec.altitude`. `m` defaults to `spec.num_waypoints`.
    """
    if m is None:
        m = spec.num_waypoints
    if m < 1:
        raise ConfigurationError(f"waypoint count must be >= 1, got {m}")
    if spec.radius <= 0.0:
        raise ConfigurationError(f"corridor radius must be positive, got {spec.radius}")
    if spec.altitude <= 0.0:
        raise ConfigurationError(f"corridor altitude must be positive, got {spec.altitude}")
    positions = []
    for k in range(m):
        ang = TWO_PI * k / m
        positions.append(
            Position3D(
                x=spec.center.x + spec.radius * math.cos(ang),
                y=spec.center.y + spec.radius * math.sin(ang),
                z=spec.altitude,
            )
        )
    return positions


def link_geometry(bs: BaseStationSite, uav: Position3D) -> LinkGeometry:
    """Distance and BS-local (theta, phi) of a UAV as seen from `bs`."""
    dx = uav.x - bs.position.x
    dy = uav.y - bs.position.y
    dz = uav.z - bs.position.z
    distance = math.sqrt(dx * dx + dy * dy + dz * dz)
    if distance <= 0.0:
        raise GeometryError(f"UAV coincides with BS {bs.id} at {bs.position}")
    # Clamp guards acos against rounding when the UAV is exactly overhead.
    theta = math.acos(max(-1.0, min(1.0, dz / distance)))
    phi = wrap_angle(math.atan2(dy, dx) - bs.boresight_azimuth)
    return LinkGeometry(distance_3d=distance, theta=theta, phi=phi)


def link_geometries(
    uavs: list[Position3D], bss: list[BaseStationSite]
) -> list[list[LinkGeometry]]:
    """Per-(UAV, BS) link geometry, indexed [m][l]."""
    return [[link_geometry(bs, uav) for bs in bss] for uav in uavs]
