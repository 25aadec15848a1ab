# mlacrb/design.py: antenna-saving modular designs
#
# A reference ULA of M0 elements is matched by K modules of M_bar < M0/K
# elements when the module spacing is widened until both transverse bounds
# coincide.  The extra spacing is expressed as a fraction eta of the
# reference aperture, L_bar = 1 + eta (M0 - 1).

import logging
import math
from dataclasses import dataclass

from scipy.optimize import brentq

from mlacrb.errors import DomainError, InfeasibleDesignError, SingularityError
from mlacrb.fisher import crb_closed_mla, crb_closed_ula, crb_from_fim, fim_from_projections
from mlacrb.geometry import ArrayGeometry, lattice_offsets
from mlacrb.link import CpiConfig
from mlacrb.nearfield import TargetState, projections_at
from mlacrb.units import linear_to_db

__all__ = [
    "DEFAULT_MAX_ETA",
    "DesignQuery",
    "DesignResult",
    "ROUNDING_POLICIES",
    "eta_exact",
    "eta_numeric",
    "eta_simplified",
    "match_design",
    "round_spacing",
    "spacing_from_eta",
]

logger = logging.getLogger(__name__)

# a quarter of the reference aperture as extra module separation
DEFAULT_MAX_ETA = 0.25

ROUNDING_POLICIES = ("odd", "ceil")


@dataclass(frozen=True)
class DesignQuery:
    """Reference count M0, module count K and elements per module M_bar."""

    reference_count: int
    num_modules: int
    per_module_count: int

    def __post_init__(self):
        if self.reference_count < 2:
            raise DomainError("reference_count must be >= 2, got %r"
                              % (self.reference_count,))
        if self.num_modules < 2:
            raise DomainError("a modular design needs K >= 2, got %r"
                              % (self.num_modules,))
        if self.per_module_count < 1:
            raise DomainError("per_module_count must be >= 1, got %r"
                              % (self.per_module_count,))
        if self.total_elements > self.reference_count:
            raise InfeasibleDesignError(
                "K*M_bar = %d exceeds the reference count M0 = %d"
                % (self.total_elements, self.reference_count))

    @classmethod
    def from_fraction(cls, reference_count, num_modules, fraction):
        """Query keeping ``fraction`` h = K*M_bar/M0 of the reference elements."""
        if not 0.0 < fraction <= 1.0:
            raise DomainError("antenna fraction must lie in (0, 1], got %r" % (fraction,))
        per_module = int(math.floor(fraction * reference_count / num_modules + 0.5))
        return cls(reference_count, num_modules, per_module)

    @property
    def total_elements(self):
        return self.num_modules * self.per_module_count

    @property
    def fraction(self):
        return self.total_elements / self.reference_count


def _matched_period(query):
    m0, k, mb = query.reference_count, query.num_modules, query.per_module_count
    count2 = float(mb * k) ** 2
    radicand = (m0 * m0 * (m0 * m0 - 1) - (mb * mb - 1) * count2) / ((k * k - 1) * count2)
    if radicand < 0:
        raise InfeasibleDesignError("no module spacing matches M0=%d with K=%d, "
                                    "M_bar=%d (negative radicand)" % (m0, k, mb))
    return math.sqrt(radicand)


def eta_exact(query):
    """Separation fraction that makes the transverse bounds equal."""
    return (_matched_period(query) - query.per_module_count) / (query.reference_count - 1)


def eta_simplified(fraction, num_modules):
    """Large-M0 form of eta as a function of h and K only."""
    h, k = fraction, num_modules
    if not 0.0 < h <= 1.0:
        raise DomainError("antenna fraction must lie in (0, 1], got %r" % (h,))
    if k < 2:
        raise DomainError("eta needs K >= 2, got %r" % (k,))
    return math.sqrt((k * k - h ** 4) / (k * k * (k * k - 1) * h * h)) - h / k


def spacing_from_eta(eta, reference_count):
    """Real-valued module spacing L_bar = 1 + eta (M0 - 1)."""
    return 1.0 + eta * (reference_count - 1)


def round_spacing(spacing, rounding="odd"):
    """Integer spacing, never below ``spacing``.

    ``odd`` rounds up to the next odd integer, ``ceil`` to the next integer.
    The default ``odd`` is not a plain ceiling: 59.93 gives 61 (the spacing
    of the 240-antenna modular array), where ``ceil`` gives 60.
    """
    value = max(1, math.ceil(spacing - 1e-9))
    if rounding == "ceil":
        return value
    if rounding == "odd":
        return value if value % 2 else value + 1
    raise DomainError("unknown rounding policy %r; choose one of %s"
                      % (rounding, ", ".join(ROUNDING_POLICIES)))


def _exact_vt(positions, r, theta):
    q, p = projections_at(positions, r, theta)
    return crb_from_fim(fim_from_projections(q, p, 1.0)).crb_vt


def eta_numeric(query, r, theta, delta):
    """eta from the exact Fisher information instead of the closed forms.

    The module period is treated as a real number and solved for with a
    bracketing root finder.
    """
    m0, k, mb = query.reference_count, query.num_modules, query.per_module_count
    target = _exact_vt(lattice_offsets(m0, 1, 1) * delta, r, theta)

    def gap(period):
        x = lattice_offsets(mb, k, period) * delta
        return _exact_vt(x, r, theta) - target

    low = float(mb)
    try:
        if gap(low) <= 0:
            return 0.0
        high = max(2.0 * low, float(m0))
        while gap(high) > 0:
            high *= 2.0
            if high > 1e3 * m0:
                raise InfeasibleDesignError("no module period up to %g matches "
                                            "the reference bound" % high)
    except SingularityError as exc:
        raise InfeasibleDesignError("exact bound undefined while bracketing: %s"
                                    % exc) from exc
    period = brentq(gap, low, high, xtol=1e-12, rtol=1e-14)
    return (period - mb) / (m0 - 1)


@dataclass(frozen=True)
class DesignResult:
    reference_count: int
    num_modules: int
    per_module_count: int
    eta: float
    eta_simplified: float
    spacing_real: float
    spacing: int
    rounding: str
    saving: float
    transverse_ratio: float
    radial_penalty_db: float

    @property
    def total_elements(self):
        return self.num_modules * self.per_module_count

    def as_row(self):
        return (self.reference_count, self.num_modules, self.per_module_count,
                self.eta, self.spacing, 100.0 * self.saving,
                self.transverse_ratio, self.radial_penalty_db)


def _evaluate(query, eta, rounding, wavelength):
    spacing_real = spacing_from_eta(eta, query.reference_count)
    spacing = round_spacing(spacing_real, rounding)
    geom = ArrayGeometry(query.per_module_count, query.num_modules, spacing, wavelength)
    # closed forms at broadside and the designed array's Fresnel distance
    target = TargetState(geom.fresnel_distance, math.pi / 2)
    modular = crb_closed_mla(geom, target, 1.0)
    reference = crb_closed_ula(query.reference_count, geom.element_spacing,
                               target.range, target.angle, 1.0)
    return DesignResult(
        reference_count=query.reference_count,
        num_modules=query.num_modules,
        per_module_count=query.per_module_count,
        eta=eta,
        eta_simplified=eta_simplified(query.fraction, query.num_modules),
        spacing_real=spacing_real,
        spacing=spacing,
        rounding=rounding,
        saving=1.0 - query.fraction,
        transverse_ratio=modular.crb_vt / reference.crb_vt,
        radial_penalty_db=linear_to_db(modular.crb_vr / reference.crb_vr))


def match_design(reference_count, num_modules, target="min_antennas", fraction=None,
                 rounding="odd", max_eta=DEFAULT_MAX_ETA, wavelength=None):
    """Matched modular design for a reference ULA of ``reference_count`` elements.

    ``target`` is either an integer M_bar or "min_antennas", which picks the
    smallest M_bar whose eta does not exceed ``max_eta``.  ``fraction``
    (h) overrides ``target``.
    """
    if wavelength is None:
        wavelength = CpiConfig().wavelength
    if rounding not in ROUNDING_POLICIES:
        raise DomainError("unknown rounding policy %r" % (rounding,))
    if fraction is not None:
        query = DesignQuery.from_fraction(reference_count, num_modules, fraction)
    elif target == "min_antennas":
        query = _smallest_query(reference_count, num_modules, max_eta)
    else:
        query = DesignQuery(reference_count, num_modules, int(target))
    eta = eta_exact(query)
    logger.debug("M0=%d K=%d M_bar=%d: eta=%.6f", reference_count, num_modules,
                 query.per_module_count, eta)
    return _evaluate(query, eta, rounding, wavelength)


def _smallest_query(reference_count, num_modules, max_eta):
    for per_module in range(1, reference_count // num_modules + 1):
        query = DesignQuery(reference_count, num_modules, per_module)
        try:
            eta = eta_exact(query)
        except InfeasibleDesignError:
            continue
        if eta <= max_eta:
            return query
    raise InfeasibleDesignError("no design with K=%d reaches eta <= %g"
                                % (num_modules, max_eta))
