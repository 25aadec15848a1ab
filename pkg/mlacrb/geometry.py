# mlacrb/geometry.py: modular linear array layout
#
# K modules of M elements along the x-axis, element spacing delta and
# module period U = M + L - 1 elements.  Indices are the symmetric lattice
# m = -(M-1)/2 ... (M-1)/2, k = -(K-1)/2 ... (K-1)/2 (half-integers for even
# counts), so that the signed offsets g = U*k + m always sum to zero.

import math
from dataclasses import dataclass

import numpy as np

from mlacrb.errors import DomainError

__all__ = [
    "ArrayGeometry",
    "aperture",
    "element_position",
    "fresnel_distance",
    "index_set",
    "lattice_offsets",
    "offset_energy",
    "offsets",
    "spacing_for_aperture",
    "spread_factor",
]


def _check_count(name, value):
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
        raise DomainError("%s must be an integer, got %r" % (name, value))
    if value < 1:
        raise DomainError("%s must be >= 1, got %d" % (name, value))
    return int(value)


@dataclass(frozen=True)
class ArrayGeometry:
    """Modular linear array: ``num_modules`` modules of ``num_per_module``
    elements, module spacing parameter ``module_spacing`` (L = 1 is
    collocated).  ``element_spacing`` defaults to half a wavelength.
    """

    num_per_module: int
    num_modules: int
    module_spacing: int
    wavelength: float
    element_spacing: float = None

    def __post_init__(self):
        object.__setattr__(self, "num_per_module",
                           _check_count("num_per_module", self.num_per_module))
        object.__setattr__(self, "num_modules",
                           _check_count("num_modules", self.num_modules))
        object.__setattr__(self, "module_spacing",
                           _check_count("module_spacing", self.module_spacing))
        if not self.wavelength > 0:
            raise DomainError("wavelength must be positive, got %r" % self.wavelength)
        if self.element_spacing is None:
            object.__setattr__(self, "element_spacing", self.wavelength / 2.0)
        elif not self.element_spacing > 0:
            raise DomainError("element_spacing must be positive, got %r"
                              % self.element_spacing)

    @classmethod
    def ula(cls, num_elements, wavelength, element_spacing=None):
        return cls(num_elements, 1, 1, wavelength, element_spacing)

    @property
    def period(self):
        """U = M + L - 1, the module period in element units."""
        return self.num_per_module + self.module_spacing - 1

    @property
    def num_elements(self):
        return self.num_per_module * self.num_modules

    @property
    def aperture_elements(self):
        """U(K-1) + M - 1, the aperture in units of delta."""
        return self.period * (self.num_modules - 1) + self.num_per_module - 1

    @property
    def aperture(self):
        return aperture(self)

    @property
    def fresnel_distance(self):
        return fresnel_distance(self)

    def describe(self):
        return "M=%d K=%d L=%d" % (self.num_per_module, self.num_modules,
                                   self.module_spacing)


def _axis(count):
    return np.arange(count, dtype=float) - (count - 1) / 2.0


def index_set(geom):
    """Return the (m, k) pairs, k-major then m ascending."""
    ms = _axis(geom.num_per_module)
    return [(float(m), float(k)) for k in _axis(geom.num_modules) for m in ms]


def lattice_offsets(num_per_module, num_modules, period):
    """Signed offsets g = period*k + m in index_set order.

    ``period`` may be any real number, which lets the design solver treat
    the module spacing as continuous.
    """
    ms = _axis(num_per_module)
    ks = _axis(num_modules)
    return (period * ks[:, np.newaxis] + ms[np.newaxis, :]).ravel()


def offsets(geom):
    return lattice_offsets(geom.num_per_module, geom.num_modules, geom.period)


def _in_axis(value, count):
    shifted = value + (count - 1) / 2.0
    return float(shifted).is_integer() and 0 <= shifted <= count - 1


def element_position(geom, m, k):
    """x-coordinate (U*k + m)*delta of element (m, k) in meters."""
    if not (_in_axis(m, geom.num_per_module) and _in_axis(k, geom.num_modules)):
        raise DomainError("index (%r, %r) is outside the index set of %s"
                          % (m, k, geom.describe()))
    return (geom.period * k + m) * geom.element_spacing


def aperture(geom):
    return geom.element_spacing * geom.aperture_elements


def fresnel_distance(geom):
    return 0.5 * math.sqrt(aperture(geom) ** 3 / geom.wavelength)


def spread_factor(geom):
    """U^2 (K^2 - 1) + M^2 - 1."""
    k, m = geom.num_modules, geom.num_per_module
    return geom.period ** 2 * (k * k - 1) + m * m - 1


def offset_energy(geom):
    """Closed form of sum over the index set of (U*k + m)^2."""
    return geom.num_elements * spread_factor(geom) / 12.0


def spacing_for_aperture(num_per_module, num_modules, aperture_elements):
    """Module spacing L giving an aperture of ``aperture_elements`` deltas.

    The result is real valued; callers round it when an integer layout is
    needed.
    """
    if num_modules < 2:
        raise DomainError("a single module has no module spacing to choose")
    period = (aperture_elements - num_per_module + 1) / (num_modules - 1)
    spacing = period - num_per_module + 1
    if spacing < 1:
        raise DomainError("aperture of %r elements is shorter than the "
                          "collocated layout" % aperture_elements)
    return spacing
