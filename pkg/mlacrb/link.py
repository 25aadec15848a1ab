# mlacrb/link.py: waveform timing and the monostatic link budget
#
# All quantities are linear SI units.  The defaults are the 28 GHz
# desk scenario: 100 kHz bandwidth, 10 us symbols, 200 symbols per CPI,
# unit antenna gains, -23 dBsm target, -174 dBm/Hz noise, -10 dBm transmit.

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.constants import c as SPEED_OF_LIGHT

from mlacrb.errors import DomainError
from mlacrb.units import db_to_linear, dbm_to_watts

__all__ = [
    "CpiConfig",
    "LinkBudget",
    "SPEED_OF_LIGHT",
    "noise_variance",
    "reflection_power",
    "snr_gamma",
    "time_factor",
]


@dataclass(frozen=True)
class CpiConfig:
    """One coherent processing interval of ``num_symbols`` symbols."""

    carrier_freq: float = 28e9
    symbol_duration: float = 1e-5
    num_symbols: int = 200

    def __post_init__(self):
        if not self.carrier_freq > 0:
            raise DomainError("carrier_freq must be positive")
        if not self.symbol_duration > 0:
            raise DomainError("symbol_duration must be positive")
        if isinstance(self.num_symbols, bool) or int(self.num_symbols) != self.num_symbols \
                or self.num_symbols < 1:
            raise DomainError("num_symbols must be a positive integer, got %r"
                              % (self.num_symbols,))
        object.__setattr__(self, "num_symbols", int(self.num_symbols))

    @property
    def wavelength(self):
        return SPEED_OF_LIGHT / self.carrier_freq

    @property
    def wavenumber(self):
        return 2.0 * math.pi / self.wavelength

    @property
    def duration(self):
        return self.num_symbols * self.symbol_duration

    def time_indices(self):
        """Symbol indices n = 1..N."""
        return np.arange(1, self.num_symbols + 1)


@dataclass(frozen=True)
class LinkBudget:
    transmit_power: float = dbm_to_watts(-10.0)
    tx_gain: float = 1.0
    rx_gain: float = None
    rcs: float = db_to_linear(-23.0)
    noise_density: float = dbm_to_watts(-174.0)
    bandwidth: float = 100e3
    unit_pathloss: bool = False

    def __post_init__(self):
        # monostatic: one array transmits and receives
        if self.rx_gain is None:
            object.__setattr__(self, "rx_gain", self.tx_gain)
        for name in ("transmit_power", "tx_gain", "rx_gain", "rcs", "bandwidth"):
            if not getattr(self, name) > 0:
                raise DomainError("%s must be positive, got %r"
                                  % (name, getattr(self, name)))
        # zero noise density gives noise-free echoes
        if self.noise_density < 0:
            raise DomainError("noise_density must be >= 0, got %r" % self.noise_density)

    def with_power(self, transmit_power):
        return replace(self, transmit_power=transmit_power)


def reflection_power(budget, cpi, r):
    """|beta|^2 of a point scatterer at range ``r`` (radar equation)."""
    if not r > 0:
        raise DomainError("range must be positive, got %r" % (r,))
    if budget.unit_pathloss:
        return 1.0
    numerator = (budget.transmit_power * budget.tx_gain * budget.rx_gain
                 * cpi.wavelength ** 2 * budget.rcs)
    return numerator / ((4.0 * math.pi) ** 3 * r ** 4)


def noise_variance(budget):
    return budget.noise_density * budget.bandwidth


def time_factor(num_symbols):
    """N(N+1)(2N+1)/3, i.e. twice the sum of n^2 for n = 1..N."""
    n = int(num_symbols)
    return n * (n + 1) * (2 * n + 1) // 3


def snr_gamma(budget, cpi, r):
    """SNR scale factor gamma of the velocity Fisher information."""
    beta2 = reflection_power(budget, cpi, r)
    sigma2 = noise_variance(budget)
    if sigma2 == 0:
        return math.inf
    return (cpi.wavenumber ** 2 * beta2 * time_factor(cpi.num_symbols)
            * cpi.symbol_duration ** 2 / sigma2)
