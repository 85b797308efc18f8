"""Dish, feed and rim-element geometry for the rim-reconfigurable paraboloid.

Conventions: the paraboloid vertex sits at the origin with the axis along +z,
so the surface is z = rho^2 / (4F) and the feed phase center is at (0, 0, F).
All angles are radians internally; degrees appear only at external interfaces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0
ETA0 = 376.730313668  # free-space impedance, ohms
MU0 = 4e-7 * math.pi


class GeometryError(ValueError):
    pass


@dataclass(frozen=True)
class FarFieldDirection:
    psi_rad: float
    phi_rad: float

    def __post_init__(self):
        if not (0.0 <= self.psi_rad < math.pi / 2):
            raise GeometryError(f"psi_rad {self.psi_rad} outside [0, pi/2)")
        if not (0.0 <= self.phi_rad < 2 * math.pi):
            raise GeometryError(f"phi_rad {self.phi_rad} outside [0, 2*pi)")


def far_field_unit_vector(direction: FarFieldDirection) -> np.ndarray:
    """Unit vector toward (psi, phi): sin(psi)cos(phi) x + sin(psi)sin(phi) y + cos(psi) z."""
    sp = math.sin(direction.psi_rad)
    return np.array([
        sp * math.cos(direction.phi_rad),
        sp * math.sin(direction.phi_rad),
        math.cos(direction.psi_rad),
    ])


@dataclass(frozen=True)
class FeedModel:
    """cos^q feed at the focus, y-polarized, looking down the -z axis."""

    i0: complex = 1.0 + 0.0j
    q_exponent: float = 1.14

    def __post_init__(self):
        if self.q_exponent <= 0:
            raise GeometryError(f"q_exponent must be positive, got {self.q_exponent}")


@dataclass(frozen=True)
class ElementSite:
    position: np.ndarray  # (3,) on the paraboloid surface, meters
    normal: np.ndarray    # (3,) unit, concave side (n.z > 0)
    area_m2: float
    ring_index: int
    azimuth_index: int


@dataclass
class ReflectorGeometry:
    diameter_m: float
    rim_width_m: float
    focal_length_m: float
    frequency_hz: float
    element_side_m: float
    elements: list[ElementSite]
    theta0_rad: float
    theta1_rad: float
    # stacked copies of the element fields for vectorized field math
    element_positions: np.ndarray = field(repr=False, default=None)  # (N, 3)
    element_normals: np.ndarray = field(repr=False, default=None)    # (N, 3)
    element_areas: np.ndarray = field(repr=False, default=None)      # (N,)

    @property
    def wavelength_m(self) -> float:
        return SPEED_OF_LIGHT / self.frequency_hz

    @property
    def wavenumber(self) -> float:
        return 2 * math.pi / self.wavelength_m

    @property
    def n_elements(self) -> int:
        return len(self.elements)

    @property
    def fixed_radius_m(self) -> float:
        """Outer radius of the non-reconfigurable portion."""
        return self.diameter_m / 2 - self.rim_width_m


def surface_z(rho, focal_length_m):
    return np.asarray(rho) ** 2 / (4.0 * focal_length_m)


def surface_normal(x, y, focal_length_m):
    """Unit normal on z = rho^2/(4F), oriented toward the concave (feed) side."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = np.stack([-x / (2 * focal_length_m), -y / (2 * focal_length_m), np.ones_like(x)], axis=-1)
    return n / np.linalg.norm(n, axis=-1, keepdims=True)


def feed_angle(rho, focal_length_m):
    """Angle off the reflector axis seen from the focus, tan(theta_f/2) = rho/(2F)."""
    return 2.0 * np.arctan(np.asarray(rho) / (2.0 * focal_length_m))


def build_geometry(diameter_m: float, rim_width_m: float, f_over_d: float,
                   frequency_hz: float) -> ReflectorGeometry:
    """Tile the outer annulus into half-wavelength rim elements.

    Rings of radial width 0.5*lambda span [D/2 - rim_width, D/2]; ring i holds
    floor(2*pi*rho_i / side) equally spaced elements starting on the +y axis
    (the start offset keeps every ring mirror-symmetric about the y-z plane
    for any element count, which the y-polarized pattern symmetry relies on).
    """
    for name, v in [("diameter_m", diameter_m), ("rim_width_m", rim_width_m),
                    ("f_over_d", f_over_d), ("frequency_hz", frequency_hz)]:
        if v <= 0:
            raise GeometryError(f"{name} must be positive, got {v}")
    if rim_width_m >= diameter_m / 2:
        raise GeometryError("rim_width_m must be less than the dish radius")

    wavelength = SPEED_OF_LIGHT / frequency_hz
    side = 0.5 * wavelength
    if side > rim_width_m:
        raise GeometryError(
            f"element side {side:.4g} m exceeds rim width {rim_width_m:.4g} m: no ring fits")

    focal = f_over_d * diameter_m
    radius = diameter_m / 2
    rho_inner = radius - rim_width_m

    n_rings = max(1, round(rim_width_m / side))
    sites: list[ElementSite] = []
    for ring in range(n_rings):
        rho = rho_inner + (ring + 0.5) * side
        count = int(math.floor(2 * math.pi * rho / side))
        # start at +y so the ring is invariant under x -> -x
        az = math.pi / 2 + 2 * math.pi * np.arange(count) / count
        x = rho * np.cos(az)
        y = rho * np.sin(az)
        z = surface_z(rho, focal) * np.ones(count)
        normals = surface_normal(x, y, focal)
        for k in range(count):
            sites.append(ElementSite(
                position=np.array([x[k], y[k], z[k]]),
                normal=normals[k],
                area_m2=side * side,
                ring_index=ring,
                azimuth_index=k,
            ))

    geom = ReflectorGeometry(
        diameter_m=diameter_m,
        rim_width_m=rim_width_m,
        focal_length_m=focal,
        frequency_hz=frequency_hz,
        element_side_m=side,
        elements=sites,
        theta0_rad=float(feed_angle(radius, focal)),
        theta1_rad=float(feed_angle(rho_inner, focal)),
    )
    geom.element_positions = np.stack([s.position for s in sites])
    geom.element_normals = np.stack([s.normal for s in sites])
    geom.element_areas = np.array([s.area_m2 for s in sites])
    return geom
