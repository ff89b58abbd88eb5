"""Array geometry, steering vectors, and per-UPA coverage ranges.

The rig carries four identical half-wave-spaced rectangular arrays (UPAs)
facing the four horizontal directions.  UPA ``k`` (1..4) has its boresight at
azimuth ``(k-1)*pi/2`` and serves the quarter-plane within +-45 degrees of it,
for elevations between 45 and 135 degrees from the z-axis.

Conventions used across the package:

* azimuth ``phi`` is measured against the x-axis and normalized to (-pi, pi];
  elevation ``theta`` is measured against the z-axis, in [0, pi].
* element indices are centered, ``n_y in {-(N_y-1)/2, ..., (N_y-1)/2}`` and
  likewise for ``n_z``; weight vectors enumerate elements z-major (``n_z``
  outer, ``n_y`` inner), both axes in ascending index order.
* the phase of element ``(n_y, n_z)`` toward direction ``(phi, theta)`` seen
  from UPA ``k`` is ``pi * (n_y*u + n_z*v)`` with the spatial frequencies
  ``u = sin(phi - (k-1)*pi/2) * sin(theta)`` and ``v = cos(theta)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

SQRT2 = math.sqrt(2.0)

UPA_INDICES = (1, 2, 3, 4)

#: Half-width of each UPA's coverage in the mapped (virtual-angle) coordinates
#: sin(local azimuth) and -cos(elevation).
SECTOR_HALF_WIDTH = SQRT2 / 2


def normalize_azimuth(azimuth: float) -> float:
    """Wrap an azimuth angle to (-pi, pi]."""
    return math.pi - (math.pi - azimuth) % (2.0 * math.pi)


def boresight_azimuth(upa: int) -> float:
    """Boresight azimuth of UPA ``upa``: 0, pi/2, pi, 3*pi/2 (normalized)."""
    check_upa(upa)
    return normalize_azimuth((upa - 1) * math.pi / 2.0)


def check_upa(upa: int) -> None:
    if upa not in UPA_INDICES:
        raise ValueError(f"UPA index must be in 1..4, got {upa!r}")


@dataclass(frozen=True)
class ArrayGeometry:
    """Rectangular UPA layout: ``n_y`` columns along y, ``n_z`` rows along z."""

    n_y: int
    n_z: int

    def __post_init__(self):
        if self.n_y < 1 or self.n_z < 1:
            raise ValueError("element counts must be positive")

    @property
    def n_elements(self) -> int:
        return self.n_y * self.n_z

    def y_indices(self) -> np.ndarray:
        """Centered element offsets along y, ascending."""
        return np.arange(self.n_y) - (self.n_y - 1) / 2.0

    def z_indices(self) -> np.ndarray:
        """Centered element offsets along z, ascending."""
        return np.arange(self.n_z) - (self.n_z - 1) / 2.0


@dataclass(frozen=True)
class Direction:
    """A propagation direction in the global frame.

    ``azimuth`` is normalized on construction; ``elevation`` must already lie
    in [0, pi].
    """

    azimuth: float
    elevation: float

    def __post_init__(self):
        if not 0.0 <= self.elevation <= math.pi:
            raise ValueError(f"elevation {self.elevation!r} outside [0, pi]")
        object.__setattr__(self, "azimuth", normalize_azimuth(self.azimuth))

    def local_azimuth(self, upa: int) -> float:
        """Azimuth relative to the boresight of UPA ``upa``, in (-pi, pi]."""
        check_upa(upa)
        return normalize_azimuth(self.azimuth - (upa - 1) * math.pi / 2.0)


def boresight(upa: int) -> Direction:
    """Boresight direction of UPA ``upa``."""
    return Direction(boresight_azimuth(upa), math.pi / 2.0)


def spatial_frequencies(upa: int, direction: Direction) -> tuple[float, float]:
    """Return ``(u, v)`` phase-lattice coordinates of ``direction`` at UPA ``upa``."""
    u = math.sin(direction.local_azimuth(upa)) * math.sin(direction.elevation)
    v = math.cos(direction.elevation)
    return u, v


def steering_matrix(geom: ArrayGeometry, u, v) -> np.ndarray:
    """Unit-norm array response vectors for spatial frequencies ``(u, v)``.

    ``u`` and ``v`` are broadcastable 1-D arrays; the result has one column
    per direction, elements ordered z-major.  Every column has unit norm.
    """
    u = np.atleast_1d(np.asarray(u, dtype=float))
    v = np.atleast_1d(np.asarray(v, dtype=float))
    ay = np.exp(1j * np.pi * np.multiply.outer(geom.y_indices(), u))
    az = np.exp(1j * np.pi * np.multiply.outer(geom.z_indices(), v))
    cols = (az[:, None, :] * ay[None, :, :]).reshape(geom.n_elements, -1)
    return cols / math.sqrt(geom.n_elements)


def steering_vector(geom: ArrayGeometry, upa: int, direction: Direction) -> np.ndarray:
    """Array response of UPA ``upa`` toward ``direction`` (unit Euclidean norm)."""
    u, v = spatial_frequencies(upa, direction)
    return steering_matrix(geom, u, v)[:, 0]


def virtual_elevation(theta: float) -> float:
    """Map elevation to its virtual angle ``-cos(theta)``, increasing on [0, pi]."""
    return -math.cos(theta)


def virtual_azimuth(upa: int, phi: float) -> float:
    """Map azimuth to the per-UPA virtual angle used to line up coverage plots.

    Restricted to UPA ``upa``'s coverage this is strictly increasing and the
    four UPAs' images tile disjoint unit-width bands offset by sqrt(2).
    """
    check_upa(upa)
    return math.sin(phi - (upa - 1) * math.pi / 2.0) + SQRT2 * (upa - 1)


@dataclass(frozen=True)
class CoverageRange:
    """Closed azimuth/elevation box served by one UPA."""

    upa: int
    azimuth_lo: float
    azimuth_hi: float
    elevation_lo: float
    elevation_hi: float

    def contains(self, direction: Direction) -> bool:
        if not self.elevation_lo <= direction.elevation <= self.elevation_hi:
            return False
        # compare azimuth modulo 2*pi; the box never wider than pi/2
        span = self.azimuth_hi - self.azimuth_lo
        offset = (direction.azimuth - self.azimuth_lo) % (2.0 * math.pi)
        return offset <= span + 1e-15


def coverage_range(upa: int) -> CoverageRange:
    """The +-45 degree box around UPA ``upa``'s boresight."""
    check_upa(upa)
    center = (upa - 1) * math.pi / 2.0
    return CoverageRange(
        upa=upa,
        azimuth_lo=center - math.pi / 4.0,
        azimuth_hi=center + math.pi / 4.0,
        elevation_lo=math.pi / 4.0,
        elevation_hi=3.0 * math.pi / 4.0,
    )


def coverage_contains(upa: int, direction: Direction) -> bool:
    """True iff ``direction`` lies in UPA ``upa``'s coverage (boundaries included)."""
    return coverage_range(upa).contains(direction)


def upa_for_direction(direction: Direction) -> int | None:
    """UPA whose coverage contains ``direction``; ties go to the lower index.

    Returns ``None`` when the elevation falls outside the served band.
    """
    for upa in UPA_INDICES:
        if coverage_contains(upa, direction):
            return upa
    return None
