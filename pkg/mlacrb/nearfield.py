# mlacrb/nearfield.py: spherical-wavefront channel of a moving point target

import math
from dataclasses import dataclass, replace

import numpy as np

from mlacrb.errors import DomainError
from mlacrb.geometry import element_position, offsets

__all__ = [
    "TargetState",
    "array_response",
    "direction_cosines",
    "element_range",
    "element_ranges",
    "far_field_projections",
    "projection_coeffs",
    "projections",
    "projections_at",
    "range_offsets",
    "response_matrix",
]


@dataclass(frozen=True)
class TargetState:
    """Polar position and velocity of the target seen from the array origin.

    ``angle`` is measured from the array axis in radians.
    """

    range: float
    angle: float = math.pi / 2
    radial_velocity: float = 0.0
    transverse_velocity: float = 0.0

    def __post_init__(self):
        if not self.range > 0:
            raise DomainError("target range must be positive, got %r" % (self.range,))
        if not 0.0 <= self.angle <= math.pi:
            raise DomainError("target angle must lie in [0, pi], got %r" % (self.angle,))

    @property
    def velocity(self):
        return (self.radial_velocity, self.transverse_velocity)

    def with_velocity(self, radial_velocity, transverse_velocity):
        return replace(self, radial_velocity=radial_velocity,
                       transverse_velocity=transverse_velocity)


def _range_from_position(r, theta, x):
    c, _ = direction_cosines(theta)
    return np.sqrt(r * r - 2.0 * r * x * c + x * x)


def element_range(geom, target, m, k):
    x = element_position(geom, m, k)
    return float(_range_from_position(target.range, target.angle, x))


def element_ranges(geom, target):
    x = offsets(geom) * geom.element_spacing
    return _range_from_position(target.range, target.angle, x)


def projection_coeffs(geom, target, m, k):
    """Radial and transverse projection (q, p) of element (m, k)."""
    x = element_position(geom, m, k)
    q, p = projections_at(x, target.range, target.angle)
    return float(q), float(p)


def projections_at(x, r, theta):
    """Projections of elements at positions ``x`` (meters) on the array axis."""
    x = np.asarray(x, dtype=float)
    r_mk = _range_from_position(r, theta, x)
    c, s = direction_cosines(theta)
    return (r - x * c) / r_mk, x * s / r_mk


def projections(geom, target):
    """Vectors q, p over the whole index set."""
    x = offsets(geom) * geom.element_spacing
    return projections_at(x, target.range, target.angle)


def far_field_projections(geom):
    """Planar-wavefront substitute: q = 1, p = 0 for every element."""
    count = geom.num_elements
    return np.ones(count), np.zeros(count)


def range_offsets(geom, target):
    """r_{m,k} - r for every element, without cancellation."""
    x = offsets(geom) * geom.element_spacing
    c, _ = direction_cosines(target.angle)
    r = target.range
    return (x * x - 2.0 * r * x * c) / (_range_from_position(r, target.angle, x) + r)


def response_matrix(geom, target, cpi, n=None):
    """Array response vectors stacked by row, one row per time index.

    ``n`` defaults to the whole CPI, 1..N.  The common factor exp(-j k r) is
    split off before exponentiating, which keeps the per-element phases
    small and accurate.
    """
    if n is None:
        n = cpi.time_indices()
    n = np.atleast_1d(np.asarray(n))
    if np.any(n < 1) or np.any(n > cpi.num_symbols):
        raise DomainError("time index outside 1..%d" % cpi.num_symbols)
    q, p = projections(geom, target)
    v = q * target.radial_velocity + p * target.transverse_velocity
    path = range_offsets(geom, target)[np.newaxis, :] \
        + np.outer(n * cpi.symbol_duration, v)
    common = np.exp(-1j * cpi.wavenumber * target.range)
    return common * np.exp(-1j * cpi.wavenumber * path)


def array_response(geom, target, cpi, n):
    if not (1 <= n <= cpi.num_symbols):
        raise DomainError("time index %r outside 1..%d" % (n, cpi.num_symbols))
    return response_matrix(geom, target, cpi, [n])[0]


def direction_cosines(theta):
    """(cos, sin) of ``theta`` with values below 1e-15 snapped to zero.

    Broadside and endfire then give exact zeros.
    """
    c, s = math.cos(theta), math.sin(theta)
    if abs(c) < 1e-15:
        c = 0.0
    if abs(s) < 1e-15:
        s = 0.0
    return c, s
