# mlacrb/fisher.py: Fisher information and Cramer-Rao bounds for (v_r, v_t)
#
# fim_exact sums the exact projection coefficients over every element.  The
# Taylor-expanded sums and the closed-form bounds built on them are kept as
# separate functions so that their error against the exact pipeline can be
# measured rather than inherited.

import math
import warnings
from dataclasses import dataclass

import numpy as np

from mlacrb.errors import (ApproximationWarning, DomainError, SingularityError,
                           UnobservableError)
from mlacrb.geometry import fresnel_distance, offset_energy, spread_factor
from mlacrb.nearfield import direction_cosines, projections

__all__ = [
    "APERTURE_MARGIN",
    "ApproxValue",
    "CrbPair",
    "FimMatrix",
    "SINGULAR_RTOL",
    "crb_closed_mla",
    "crb_closed_ula",
    "crb_exact",
    "crb_from_fim",
    "edge_offset",
    "edge_offset_bound",
    "existence_margin",
    "fim_exact",
    "fim_from_projections",
    "sum_p2_approx",
    "sum_q2_approx",
    "sum_qp_approx",
]

# det F <= SINGULAR_RTOL * J_rr * J_tt is treated as singular
SINGULAR_RTOL = 1e-12

# "aperture >> lambda/delta" is read as at least this many times larger
APERTURE_MARGIN = 10.0


@dataclass(frozen=True)
class FimMatrix:
    """Fisher information over (v_r, v_t), units 1/(m/s)^2."""

    j_rr: float
    j_tt: float
    j_rt: float

    @property
    def det(self):
        return self.j_rr * self.j_tt - self.j_rt * self.j_rt

    def as_array(self):
        return np.array([[self.j_rr, self.j_rt], [self.j_rt, self.j_tt]])


@dataclass(frozen=True)
class CrbPair:
    """Variance lower bounds (m/s)^2 for radial and transverse velocity."""

    crb_vr: float
    crb_vt: float

    def scaled(self, factor):
        return CrbPair(self.crb_vr * factor, self.crb_vt * factor)


class ApproxValue(float):
    """A float carrying the reasons, if any, why its approximation is unsafe."""

    def __new__(cls, value, warnings=()):
        obj = super().__new__(cls, value)
        obj.warnings = tuple(warnings)
        return obj

    @property
    def valid(self):
        return not self.warnings


def fim_from_projections(q, p, gamma):
    """FIM elements gamma*MK*sum(q^2), gamma*MK*sum(p^2), gamma*MK*sum(qp)."""
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    scale = gamma * q.size
    return FimMatrix(j_rr=float(scale * np.sum(q * q)),
                     j_tt=float(scale * np.sum(p * p)),
                     j_rt=float(scale * np.sum(q * p)))


def fim_exact(geom, target, gamma):
    q, p = projections(geom, target)
    return fim_from_projections(q, p, gamma)


def crb_from_fim(fim):
    """Diagonal of the inverse FIM."""
    det = fim.det
    if not det > SINGULAR_RTOL * fim.j_rr * fim.j_tt or not det > 0:
        raise SingularityError(
            "Fisher information is singular (det F = %g); the bounds exist only "
            "when 12/(U^2(K^2-1)+M^2-1) > (delta/r)^2 and the transverse "
            "velocity is observable" % det)
    return CrbPair(crb_vr=fim.j_tt / det, crb_vt=fim.j_rr / det)


def crb_exact(geom, target, gamma):
    """Inverse-FIM bounds of the exact sums, scaled by 1/gamma.

    An infinite gamma (noise-free link) gives zero bounds.
    """
    return crb_from_fim(fim_exact(geom, target, 1.0)).scaled(1.0 / gamma)


def _validity_checks(geom, target):
    problems = []
    d_f = fresnel_distance(geom)
    if target.range < _fresnel_floor(d_f):
        problems.append("range %.6g m is inside the Fresnel distance %.6g m"
                        % (target.range, d_f))
    ratio = geom.wavelength / geom.element_spacing
    if geom.aperture_elements < APERTURE_MARGIN * ratio:
        problems.append("aperture of %d element spacings is not much larger "
                        "than lambda/delta = %.6g" % (geom.aperture_elements, ratio))
    for problem in problems:
        warnings.warn(problem, ApproximationWarning, stacklevel=3)
    return problems


def _fresnel_floor(d_f):
    # r = d_F itself passes despite rounding
    return d_f * (1.0 - 1e-12)


def _second_order_sum(geom, target, angle_factor):
    eps2 = (geom.element_spacing / target.range) ** 2
    return offset_energy(geom) * eps2 * angle_factor


def sum_p2_approx(geom, target):
    """sum(p^2) ~ (MK/12)(U^2(K^2-1)+M^2-1)(delta/r)^2 sin^2(theta)."""
    problems = _validity_checks(geom, target)
    _, s = direction_cosines(target.angle)
    return ApproxValue(_second_order_sum(geom, target, s * s), problems)


def sum_qp_approx(geom, target):
    """sum(qp) ~ (MK/12)(U^2(K^2-1)+M^2-1)(delta/r)^2 cos(theta) sin(theta)."""
    problems = _validity_checks(geom, target)
    c, s = direction_cosines(target.angle)
    return ApproxValue(_second_order_sum(geom, target, c * s), problems)


def sum_q2_approx(geom, target):
    p2 = sum_p2_approx(geom, target)
    return ApproxValue(geom.num_elements - float(p2), p2.warnings)


def _closed_form(count, spread, delta, r, theta, gamma):
    # shared by the modular and collocated forms so that L=1, K=1 reproduces
    # the collocated bound bit for bit
    if not r > 0:
        raise DomainError("range must be positive, got %r" % (r,))
    if not 0.0 <= theta <= math.pi:
        raise DomainError("angle must lie in [0, pi], got %r" % (theta,))
    eps2 = (delta / r) ** 2
    if spread == 0:
        raise UnobservableError("a single element carries no transverse information")
    if not 12.0 / spread - eps2 > 0:
        raise SingularityError(
            "existence condition 12/(U^2(K^2-1)+M^2-1) > (delta/r)^2 violated "
            "at r = %g m" % r)
    crb_vr = 12.0 / (gamma * count ** 2 * (12.0 - eps2 * spread))
    _, s = direction_cosines(theta)
    if s == 0.0:
        exc = UnobservableError("transverse velocity is unobservable at "
                                "theta = %g rad (sin(theta) = 0)" % theta)
        exc.radial_bound = crb_vr
        raise exc
    crb_vt = 12.0 * (r / delta) ** 2 / (gamma * count ** 2 * spread * s * s)
    return CrbPair(crb_vr=crb_vr, crb_vt=crb_vt)


def crb_closed_mla(geom, target, gamma):
    return _closed_form(geom.num_elements, spread_factor(geom),
                        geom.element_spacing, target.range, target.angle, gamma)


def crb_closed_ula(num_elements, delta, r, theta, gamma):
    return _closed_form(num_elements, num_elements * num_elements - 1,
                        delta, r, theta, gamma)


def existence_margin(geom, r):
    """12/(U^2(K^2-1)+M^2-1) - (delta/r)^2; positive when the bounds exist."""
    spread = spread_factor(geom)
    if spread == 0:
        return math.inf
    return 12.0 / spread - (geom.element_spacing / r) ** 2


def edge_offset(geom, r):
    """Largest |x| = |g|*delta/r over the array at range ``r``."""
    return geom.aperture / (2.0 * r)


def edge_offset_bound(geom):
    """Value of edge_offset at the Fresnel distance."""
    return math.sqrt((geom.wavelength / geom.element_spacing) / geom.aperture_elements)
