# mlacrb/simulate.py: echo synthesis, velocity MLE and the Monte Carlo harness
#
# The echo of one CPI is y(n) = beta a_n a_n^T x(n) + z(n) with x(n) the
# predictive precoder conj(a_n(predicted)) s(n) / sqrt(MK).  The estimator
# knows r and theta and concentrates the unknown complex beta out of the
# likelihood, leaving a two dimensional search over (v_r, v_t).

import logging
import math
import threading
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import minimize

from mlacrb.errors import DomainError, Error, SingularityError
from mlacrb.fisher import crb_exact
from mlacrb.gain import MismatchSpec, psi_exact
from mlacrb.geometry import fresnel_distance
from mlacrb.link import noise_variance, reflection_power, snr_gamma
from mlacrb.nearfield import TargetState, projections, range_offsets, response_matrix
from mlacrb.sweep import parallel_map

__all__ = [
    "EchoRecord",
    "McScenario",
    "McStats",
    "MleResult",
    "SearchConfig",
    "VelocityLikelihood",
    "concentrated_loglik",
    "kinematic_predict",
    "mle_estimate",
    "noise_free_echo",
    "precode",
    "precoder_matrix",
    "run_monte_carlo",
    "symbol_stream",
    "synthesize_echo",
]

logger = logging.getLogger(__name__)

# |s(n)| may differ from 1 by this much
UNIT_MODULUS_TOL = 1e-12

# lower limit on the per-axis refinement tolerance used by the harness
MC_TOL_FLOOR = 1e-6


@dataclass(frozen=True)
class EchoRecord:
    """One CPI of received samples, row n-1 holding y(n)."""

    samples: np.ndarray
    true_target: TargetState
    predicted: TargetState
    symbols: np.ndarray
    beta: complex
    noise_variance: float
    rng_seed: int


@dataclass(frozen=True)
class SearchConfig:
    """Coarse grid and Nelder-Mead refinement settings for the MLE.

    ``box`` is (vr_min, vr_max, vt_min, vt_max); when omitted the box is
    init +- half_width on both axes.  ``tol_v`` is a scalar or a per-axis
    pair (radial, transverse).
    """

    half_width: float = 5.0
    step: float = 0.25
    tol_v: object = 1e-4
    max_iter: int = 2000
    box: tuple = None

    def __post_init__(self):
        if not self.step > 0:
            raise DomainError("grid step must be positive, got %r" % (self.step,))
        if not self.half_width >= 0:
            raise DomainError("half_width must be >= 0, got %r" % (self.half_width,))
        if np.any(np.asarray(self.tol_v, dtype=float) <= 0):
            raise DomainError("tol_v must be positive, got %r" % (self.tol_v,))

    def bounds(self, init):
        if self.box is not None:
            lo_r, hi_r, lo_t, hi_t = (float(b) for b in self.box)
        else:
            lo_r, hi_r = init[0] - self.half_width, init[0] + self.half_width
            lo_t, hi_t = init[1] - self.half_width, init[1] + self.half_width
        if lo_r > hi_r or lo_t > hi_t:
            raise DomainError("empty search box %r" % ((lo_r, hi_r, lo_t, hi_t),))
        return lo_r, hi_r, lo_t, hi_t

    def tolerances(self):
        return np.broadcast_to(np.asarray(self.tol_v, dtype=float), (2,)).copy()


@dataclass(frozen=True)
class MleResult:
    v_r_hat: float
    v_t_hat: float
    log_likelihood_peak: float
    iterations: int
    converged: bool

    @property
    def estimate(self):
        return (self.v_r_hat, self.v_t_hat)


def symbol_stream(cpi, kind="constant", order=4, seed=0):
    """Unit-modulus symbols s(1..N): all ones, or uniformly drawn ``order``-PSK."""
    if kind == "constant":
        return np.ones(cpi.num_symbols, dtype=complex)
    if kind == "psk":
        if order < 2:
            raise DomainError("PSK order must be >= 2, got %r" % (order,))
        rng = np.random.default_rng(seed)
        points = rng.integers(0, order, size=cpi.num_symbols)
        return np.exp(2j * math.pi * points / order)
    raise DomainError("unknown symbol stream %r" % (kind,))


def _check_symbols(symbols, cpi):
    symbols = np.asarray(symbols, dtype=complex)
    if symbols.shape != (cpi.num_symbols,):
        raise DomainError("expected %d symbols, got shape %r"
                          % (cpi.num_symbols, symbols.shape))
    if np.any(np.abs(np.abs(symbols) - 1.0) > UNIT_MODULUS_TOL):
        raise DomainError("symbols must have unit modulus")
    return symbols


def precode(geom, predicted, cpi, n, symbol=1.0):
    """x(n) = conj(a_n(predicted)) * s(n) / sqrt(MK), a unit-norm vector."""
    if abs(abs(symbol) - 1.0) > UNIT_MODULUS_TOL:
        raise DomainError("symbol must have unit modulus, got |s| = %r" % abs(symbol))
    a = response_matrix(geom, predicted, cpi, [n])[0]
    return np.conj(a) * symbol / math.sqrt(geom.num_elements)


def precoder_matrix(geom, predicted, cpi, symbols=None):
    """Precoders of the whole CPI stacked by row."""
    if symbols is None:
        symbols = symbol_stream(cpi)
    symbols = _check_symbols(symbols, cpi)
    a = response_matrix(geom, predicted, cpi)
    return np.conj(a) * symbols[:, np.newaxis] / math.sqrt(geom.num_elements)


def noise_free_echo(geom, true_target, predicted, cpi, beta, symbols=None,
                    path="signal"):
    """Noise-free samples of one CPI.

    ``path="signal"`` evaluates beta a_n a_n^T x(n) directly.
    ``path="beamformed"`` uses beta psi(n) a_n s(n), which only holds when
    the predicted position equals the true one.
    """
    if symbols is None:
        symbols = symbol_stream(cpi)
    symbols = _check_symbols(symbols, cpi)
    a = response_matrix(geom, true_target, cpi)
    if path == "signal":
        x = precoder_matrix(geom, predicted, cpi, symbols)
        combined = np.sum(a * x, axis=1)
        return beta * a * combined[:, np.newaxis]
    if path == "beamformed":
        if (predicted.range, predicted.angle) != (true_target.range, true_target.angle):
            raise DomainError("the beamformed echo form needs the predicted "
                              "position to equal the true position")
        mismatch = MismatchSpec(
            true_target.radial_velocity - predicted.radial_velocity,
            true_target.transverse_velocity - predicted.transverse_velocity)
        psi = psi_exact(geom, true_target, cpi, mismatch)
        return beta * (psi * symbols)[:, np.newaxis] * a
    raise DomainError("unknown echo path %r" % (path,))


def synthesize_echo(geom, true_target, predicted, cpi, budget, seed,
                    symbols=None, path="signal"):
    """Noisy echo of one CPI; a pure function of its arguments and ``seed``.

    The generator draws the phase of beta first, then the noise as pairs of
    standard normals of variance sigma^2/2 each.
    """
    d_f = fresnel_distance(geom)
    if true_target.range < d_f * (1.0 - 1e-12):
        raise DomainError("true range %.6g m is inside the Fresnel distance %.6g m"
                          % (true_target.range, d_f))
    if symbols is None:
        symbols = symbol_stream(cpi)
    rng = np.random.default_rng(seed)
    magnitude = math.sqrt(reflection_power(budget, cpi, true_target.range))
    beta = magnitude * complex(np.exp(1j * rng.uniform(0.0, 2.0 * math.pi)))
    clean = noise_free_echo(geom, true_target, predicted, cpi, beta, symbols, path)
    sigma2 = noise_variance(budget)
    z = rng.standard_normal(clean.shape + (2,))
    noise = math.sqrt(sigma2 / 2.0) * (z[..., 0] + 1j * z[..., 1])
    return EchoRecord(samples=clean + noise, true_target=true_target,
                      predicted=predicted, symbols=np.asarray(symbols, dtype=complex),
                      beta=beta, noise_variance=sigma2, rng_seed=seed)


class VelocityLikelihood:
    """Concentrated likelihood for a fixed (r, theta) and precoder.

    For a hypothesis (v_r, v_t) the model direction of sample n is
    u_n = a_n (a_n^T x(n)), and the objective is
    |sum u_n^H y(n)|^2 / sum |u_n|^2.  Everything that does not depend on
    the hypothesis is computed once, so one instance serves every trial of
    a Monte Carlo run.
    """

    def __init__(self, geom, known_r_theta, cpi, predicted, symbols=None):
        r, theta = known_r_theta
        base = TargetState(r, theta)
        self.geometry = geom
        self.cpi = cpi
        self._q, self._p = projections(geom, base)
        self._static = (np.exp(-1j * cpi.wavenumber * r)
                        * np.exp(-1j * cpi.wavenumber * range_offsets(geom, base)))
        self._ktimes = cpi.wavenumber * cpi.symbol_duration * cpi.time_indices()
        self._precoder = precoder_matrix(geom, predicted, cpi, symbols)
        self._count = geom.num_elements
        self._grid_cache = {}
        self._lock = threading.Lock()

    def _responses(self, v_r, v_t):
        rate = self._q * v_r + self._p * v_t
        return self._static * np.exp(-1j * np.outer(self._ktimes, rate))

    def _terms(self, samples, v_r, v_t):
        a = self._responses(v_r, v_t)
        psi = np.sum(a * self._precoder, axis=1)
        inner = np.sum(np.conj(a) * samples, axis=1)
        corr = np.sum(np.conj(psi) * inner)
        energy = self._count * float(np.sum(np.abs(psi) ** 2))
        return corr, energy

    def objective(self, samples, v_r, v_t):
        corr, energy = self._terms(samples, v_r, v_t)
        if energy == 0.0:
            return 0.0
        return float(abs(corr) ** 2 / energy)

    def beta_hat(self, samples, v_r, v_t):
        """Least-squares beta at hypothesis (v_r, v_t)."""
        corr, energy = self._terms(samples, v_r, v_t)
        if energy == 0.0:
            return 0j
        return complex(corr / energy)

    def _grid_factors(self, vr_axis, vt_axis):
        key = (tuple(vr_axis), tuple(vt_axis))
        with self._lock:
            factors = self._grid_cache.get(key)
            if factors is None:
                # radial: (N, Gr, MK); transverse: (N, MK, Gt)
                er = np.exp(-1j * self._ktimes[:, None, None]
                            * np.multiply.outer(vr_axis, self._q)[None, :, :])
                et = np.exp(-1j * self._ktimes[:, None, None]
                            * np.multiply.outer(self._p, vt_axis)[None, :, :])
                factors = self._grid_cache[key] = (er, et)
        return factors

    def objective_grid(self, samples, vr_axis, vt_axis):
        """Objective on the outer product of two axes, rows by v_r."""
        vr_axis = np.asarray(vr_axis, dtype=float)
        vt_axis = np.asarray(vt_axis, dtype=float)
        er, et = self._grid_factors(vr_axis, vt_axis)
        x = (self._static * self._precoder)[:, :, np.newaxis]
        y = (np.conj(self._static) * samples)[:, :, np.newaxis]
        psi = np.matmul(er, x * et)
        inner = np.conj(np.matmul(er, np.conj(y) * et))
        corr = np.sum(np.conj(psi) * inner, axis=0)
        energy = self._count * np.sum(np.abs(psi) ** 2, axis=0)
        out = np.zeros(energy.shape)
        np.divide(np.abs(corr) ** 2, energy, out=out, where=energy > 0)
        return out


def concentrated_loglik(echo, geom, known_r_theta, cpi, v_r, v_t):
    """Concentrated log-likelihood objective at one hypothesis."""
    model = VelocityLikelihood(geom, known_r_theta, cpi, echo.predicted, echo.symbols)
    return model.objective(echo.samples, v_r, v_t)


def _grid_axis(lo, hi, anchor, step):
    first = math.ceil((lo - anchor) / step - 1e-9)
    last = math.floor((hi - anchor) / step + 1e-9)
    axis = anchor + step * np.arange(first, last + 1)
    return np.clip(axis, lo, hi)


def _initial_simplex(start, lo, hi, step):
    # one vertex per axis, stepped toward the interior of the box
    simplex = [start.copy()]
    for axis in range(2):
        vertex = start.copy()
        room_up = hi[axis] - start[axis]
        room_down = start[axis] - lo[axis]
        width = step[axis]
        if room_up >= room_down:
            vertex[axis] += min(width, room_up) if room_up > 0 else 0.0
        else:
            vertex[axis] -= min(width, room_down)
        if vertex[axis] == start[axis]:
            # degenerate box axis; nudge so the simplex stays non-degenerate
            vertex[axis] += width * 1e-3
        simplex.append(vertex)
    return np.array(simplex)


def mle_estimate(echo, geom, known_r_theta, cpi, init, search_cfg=None,
                 likelihood=None):
    """Grid search over the box followed by bounded Nelder-Mead.

    Refinement starts from the best grid point and from ``init``; the better
    result wins.  Coordinates are scaled by the per-axis tolerance so that
    one simplex size criterion serves both axes.
    """
    search = search_cfg or SearchConfig()
    lo_r, hi_r, lo_t, hi_t = search.bounds(init)
    if not (lo_r <= init[0] <= hi_r and lo_t <= init[1] <= hi_t):
        raise DomainError("init %r lies outside the search box" % (tuple(init),))
    model = likelihood or VelocityLikelihood(geom, known_r_theta, cpi,
                                             echo.predicted, echo.symbols)
    samples = echo.samples
    scale = float(np.sum(np.abs(samples) ** 2)) or 1.0

    vr_axis = _grid_axis(lo_r, hi_r, init[0], search.step)
    vt_axis = _grid_axis(lo_t, hi_t, init[1], search.step)
    grid = model.objective_grid(samples, vr_axis, vt_axis)
    i, j = np.unravel_index(np.argmax(grid), grid.shape)
    starts = [(vr_axis[i], vt_axis[j])]
    if (float(init[0]), float(init[1])) != starts[0]:
        starts.append((float(init[0]), float(init[1])))
    logger.debug("grid %dx%d peak at (%.4f, %.4f)", len(vr_axis), len(vt_axis),
                 vr_axis[i], vt_axis[j])

    tol = search.tolerances()
    lo = np.array([lo_r, lo_t]) / tol
    hi = np.array([hi_r, hi_t]) / tol

    def negative(u):
        v = u * tol
        return -model.objective(samples, v[0], v[1]) / scale

    best = None
    iterations = 0
    for start in starts:
        u0 = np.array(start) / tol
        simplex = _initial_simplex(u0, lo, hi, search.step / tol)
        res = minimize(negative, u0, method="Nelder-Mead",
                       bounds=list(zip(lo, hi)),
                       options={"xatol": 1.0, "fatol": np.inf,
                                "maxiter": search.max_iter,
                                "initial_simplex": simplex})
        iterations += int(res.nit)
        if best is None or res.fun < best.fun:
            best = res
    v = np.clip(best.x * tol, [lo_r, lo_t], [hi_r, hi_t])
    peak = model.objective(samples, v[0], v[1])
    converged = bool(best.success)
    if not converged:
        logger.warning("MLE refinement stopped without converging: %s", best.message)
    return MleResult(v_r_hat=float(v[0]), v_t_hat=float(v[1]),
                     log_likelihood_peak=peak, iterations=iterations,
                     converged=converged)


def kinematic_predict(state, cpi):
    """Advance ``state`` by one CPI under constant velocity."""
    elapsed = cpi.duration
    new_range = state.range + state.radial_velocity * elapsed
    if not new_range > 0:
        raise DomainError("predicted range %g m is not positive; the target "
                          "crossed the array" % new_range)
    new_angle = state.angle + state.transverse_velocity * elapsed / state.range
    return TargetState(new_range, new_angle, state.radial_velocity,
                       state.transverse_velocity)


@dataclass(frozen=True)
class McScenario:
    geometry: object
    truth: TargetState
    predicted: TargetState
    cpi: object
    budget: object
    init: tuple = (11.0, 7.0)
    search: SearchConfig = field(default_factory=SearchConfig)
    symbols: np.ndarray = None


@dataclass(frozen=True)
class McStats:
    num_trials: int
    mse_vr: float
    mse_vt: float
    seeds: tuple
    bias_vr: float
    bias_vt: float
    estimates: tuple
    failed: tuple

    @property
    def failures(self):
        return sum(self.failed)


def _trial_search(scenario):
    """The scenario's search with tol_v tightened to 1% of the CRB std."""
    search = scenario.search
    gamma = snr_gamma(scenario.budget, scenario.cpi, scenario.truth.range)
    try:
        crb = crb_exact(scenario.geometry, scenario.truth, gamma)
    except SingularityError:
        return search
    tol = search.tolerances()
    for axis, bound in enumerate((crb.crb_vr, crb.crb_vt)):
        if bound > 0:
            tol[axis] = max(min(tol[axis], 0.01 * math.sqrt(bound)), MC_TOL_FLOOR)
    return replace(search, tol_v=tuple(float(t) for t in tol))


def run_monte_carlo(scenario, num_trials, base_seed, threads=1):
    """MSE of the velocity MLE over ``num_trials`` seeded trials.

    Trial t uses seed ``base_seed + t``; results do not depend on
    ``threads``.
    """
    if num_trials < 1:
        raise DomainError("num_trials must be >= 1, got %r" % (num_trials,))
    truth = scenario.truth
    known = (truth.range, truth.angle)
    search = _trial_search(scenario)
    model = VelocityLikelihood(scenario.geometry, known, scenario.cpi,
                               scenario.predicted, scenario.symbols)
    logger.debug("monte carlo: %d trials, tol_v=%r", num_trials, search.tol_v)

    def trial(t):
        seed = base_seed + t
        echo = synthesize_echo(scenario.geometry, truth, scenario.predicted,
                               scenario.cpi, scenario.budget, seed,
                               symbols=scenario.symbols)
        try:
            res = mle_estimate(echo, scenario.geometry, known, scenario.cpi,
                               scenario.init, search, likelihood=model)
        except Error as exc:
            logger.warning("trial %d (seed %d) failed: %s", t, seed, exc)
            return seed, tuple(float(v) for v in scenario.init), True
        return seed, res.estimate, not res.converged

    results = parallel_map(trial, range(num_trials), threads)
    seeds = tuple(r[0] for r in results)
    estimates = tuple(r[1] for r in results)
    failed = tuple(r[2] for r in results)
    err_r = [est[0] - truth.radial_velocity for est in estimates]
    err_t = [est[1] - truth.transverse_velocity for est in estimates]
    return McStats(num_trials=num_trials,
                   mse_vr=math.fsum(e * e for e in err_r) / num_trials,
                   mse_vt=math.fsum(e * e for e in err_t) / num_trials,
                   seeds=seeds,
                   bias_vr=math.fsum(err_r) / num_trials,
                   bias_vt=math.fsum(err_t) / num_trials,
                   estimates=estimates,
                   failed=failed)
