# mlacrb/gain.py: predictive-beamforming array gain under velocity mismatch
#
# psi(n) is the coherent combining gain left when the precoder was built
# from velocities that are off by (delta_vr, delta_vt).  The exact form sums
# over every element; the Dirichlet form uses q ~ 1, p ~ g*delta*sin/r, under
# which the double sum factors into two Dirichlet kernels.

import math
from dataclasses import dataclass
from functools import partial

import numpy as np

from mlacrb.errors import DomainError
from mlacrb.geometry import offsets
from mlacrb.nearfield import direction_cosines, projections
from mlacrb.sweep import parallel_map

__all__ = [
    "DIRICHLET_EPS",
    "MismatchSpec",
    "dirichlet_ratio",
    "gain_grid",
    "psi_dirichlet",
    "psi_exact",
    "psi_first_order_sum",
    "worst_gain_over_cpi",
]

# |sin(x/2)| below this evaluates the Dirichlet ratio at its limit
DIRICHLET_EPS = 1e-9


@dataclass(frozen=True)
class MismatchSpec:
    """True minus predicted velocity, m/s."""

    delta_vr: float = 0.0
    delta_vt: float = 0.0


def _time_indices(cpi, n):
    if n is None:
        return cpi.time_indices()
    n_arr = np.asarray(n)
    if np.any(n_arr < 1) or np.any(n_arr > cpi.num_symbols):
        raise DomainError("time index outside 1..%d" % cpi.num_symbols)
    return n_arr


def _phase_sums(coeff_r, coeff_t, cpi, mismatch, n):
    # unnormalised element sums, one per time index
    times = np.atleast_1d(n) * cpi.symbol_duration
    rate = coeff_r * mismatch.delta_vr + coeff_t * mismatch.delta_vt
    phase = cpi.wavenumber * np.outer(times, rate)
    return np.exp(-1j * phase).sum(axis=1)


def _normalised(sums, count, n):
    psi = sums / math.sqrt(count)
    return psi if np.ndim(n) else complex(psi[0])


def _exact_sums(geom, target, cpi, mismatch, n):
    q, p = projections(geom, target)
    return _phase_sums(q, p, cpi, mismatch, n)


def psi_exact(geom, target, cpi, mismatch, n=None):
    """Array gain psi(n) with the exact projection coefficients.

    ``n`` may be a scalar, an array, or None for the whole CPI.
    """
    n = _time_indices(cpi, n)
    return _normalised(_exact_sums(geom, target, cpi, mismatch, n),
                       geom.num_elements, n)


def psi_first_order_sum(geom, target, cpi, mismatch, n=None):
    """The element sum with q <- 1 and p <- (Uk+m)*delta*sin(theta)/r."""
    n = _time_indices(cpi, n)
    _, s = direction_cosines(target.angle)
    p = offsets(geom) * geom.element_spacing * s / target.range
    return _normalised(_phase_sums(np.ones_like(p), p, cpi, mismatch, n),
                       geom.num_elements, n)


def dirichlet_ratio(x, count):
    """sin(count*x/2) / sin(x/2), with the limits at multiples of 2*pi."""
    x = np.asarray(x, dtype=float)
    den = np.sin(x / 2.0)
    near = np.abs(den) < DIRICHLET_EPS
    value = np.sin(count * x / 2.0) / np.where(near, 1.0, den)
    # at x = 2*pi*j the ratio tends to count * (-1)^(j*(count-1))
    j = np.rint(x / (2.0 * math.pi))
    sign = np.where(np.mod(j * (count - 1), 2.0) == 0.0, 1.0, -1.0)
    result = np.where(near, count * sign, value)
    return float(result) if result.ndim == 0 else result


def _dirichlet_sums(geom, target, cpi, mismatch, n):
    _, s = direction_cosines(target.angle)
    times = np.atleast_1d(n).astype(float) * cpi.symbol_duration
    spread = (cpi.wavenumber * (geom.element_spacing * s / target.range)
              * mismatch.delta_vt * times)
    common = np.exp(-1j * cpi.wavenumber * mismatch.delta_vr * times)
    return (common
            * dirichlet_ratio(spread, geom.num_per_module)
            * dirichlet_ratio(geom.period * spread, geom.num_modules))


def psi_dirichlet(geom, target, cpi, mismatch, n=None):
    """Closed-form array gain: a common radial phase times two Dirichlet kernels."""
    n = _time_indices(cpi, n)
    return _normalised(_dirichlet_sums(geom, target, cpi, mismatch, n),
                       geom.num_elements, n)


def worst_gain_over_cpi(geom, target, cpi, mismatch, use_exact=True):
    """min over n of |psi(n)|^2 / MK, so that zero mismatch gives 1."""
    sums_fn = _exact_sums if use_exact else _dirichlet_sums
    sums = sums_fn(geom, target, cpi, mismatch, cpi.time_indices())
    count = geom.num_elements
    return float(np.min(np.abs(sums) ** 2) / (count * count))


def _gain_row(geom, target, cpi, dvt_axis, use_exact, delta_vr):
    return [worst_gain_over_cpi(geom, target, cpi, MismatchSpec(delta_vr, dvt),
                                use_exact=use_exact)
            for dvt in dvt_axis]


def gain_grid(geom, target, cpi, dvr_axis, dvt_axis, use_exact=True, threads=1):
    """Worst normalised gain on a (delta_vr, delta_vt) grid, rows by delta_vr."""
    row = partial(_gain_row, geom, target, cpi, list(dvt_axis), use_exact)
    return np.array(parallel_map(row, list(dvr_axis), threads), dtype=float)
