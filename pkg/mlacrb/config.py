# mlacrb/config.py: INI experiment configuration
#
# Every key is declared in SCHEMA with its unit converter and default text.
# Values stay as text until they are needed, so the resolved view logged
# and written into CSV metadata is exactly what the converters consumed.

import configparser
import logging

import numpy as np

from mlacrb.errors import ConfigError, DomainError
from mlacrb.geometry import ArrayGeometry
from mlacrb.link import CpiConfig, LinkBudget
from mlacrb.nearfield import TargetState
from mlacrb.simulate import SearchConfig, symbol_stream
from mlacrb.units import convert

__all__ = [
    "ARRAY_KEYS",
    "DEFAULT_ARRAYS",
    "ExperimentConfig",
    "SCHEMA",
    "load_config",
    "parse_override",
]

logger = logging.getLogger(__name__)

ARRAY_PREFIX = "array "

SCHEMA = {
    "geometry": {
        "num_per_module": ("int", "120"),
        "num_modules": ("int", "2"),
        "module_spacing": ("int", "61"),
        "element_spacing": ("float", ""),
    },
    "waveform": {
        "carrier_freq": ("float", "28e9"),
        "symbol_duration": ("float", "1e-5"),
        "num_symbols": ("int", "200"),
        "symbols": ("str", "constant"),
        "psk_order": ("int", "4"),
        "symbol_seed": ("int", "0"),
    },
    "link": {
        "transmit_power": ("dbm", "-10"),
        "tx_gain": ("db", "0"),
        "rx_gain": ("db", ""),
        "rcs": ("db", "-23"),
        "noise_density": ("dbm_hz", "-174"),
        "bandwidth": ("float", "100e3"),
        "unit_pathloss": ("bool", "false"),
    },
    "target": {
        "range": ("float", "10"),
        "angle": ("deg", "90"),
        "radial_velocity": ("float", "10"),
        "transverse_velocity": ("float", "8"),
    },
    "crb": {
        "arrays": ("strs", "ula240, mla240, mla198, mla198_wide"),
        "ranges": ("floats", ""),
        "range_min": ("float", "5"),
        "range_max": ("float", "50"),
        "range_points": ("int", "20"),
        "range_scale": ("str", "log"),
    },
    "gain": {
        "array": ("str", "mla240"),
        "range": ("float", ""),
        "dvr_max": ("float", "40"),
        "dvt_max": ("float", "40"),
        "points": ("int", "41"),
    },
    "mse": {
        "arrays": ("strs", "ula240, mla240"),
        "sweep": ("str", "power"),
        "powers": ("floats", "-30, -20, -10"),
        "ranges": ("floats", "10, 20, 40"),
        "trials": ("int", "200"),
        "seed": ("int", "0"),
        "init_vr": ("float", "11"),
        "init_vt": ("float", "7"),
        "half_width": ("float", "5"),
        "step": ("float", "0.25"),
        "tol_v": ("float", "1e-4"),
        "max_iter": ("int", "2000"),
        "predict": ("bool", "false"),
        "prior_error_vr": ("float", "0"),
        "prior_error_vt": ("float", "0"),
    },
    "design": {
        "reference_count": ("int", "240"),
        "num_modules": ("int", "2"),
        "per_module_count": ("str", "min_antennas"),
        "fraction": ("float", ""),
        "rounding": ("str", "odd"),
        "max_eta": ("float", "0.25"),
    },
}

ARRAY_KEYS = {
    "num_per_module": ("int", None),
    "num_modules": ("int", "1"),
    "module_spacing": ("int", "1"),
    "element_spacing": ("float", ""),
}

DEFAULT_ARRAYS = {
    "ula240": {"num_per_module": "240", "num_modules": "1", "module_spacing": "1"},
    "mla240": {"num_per_module": "120", "num_modules": "2", "module_spacing": "61"},
    "mla198": {"num_per_module": "99", "num_modules": "2", "module_spacing": "61"},
    "mla198_wide": {"num_per_module": "99", "num_modules": "2", "module_spacing": "103"},
}


def _schema_for(section):
    if section.startswith(ARRAY_PREFIX):
        return ARRAY_KEYS
    try:
        return SCHEMA[section]
    except KeyError:
        raise ConfigError("unknown section", section=section) from None


def parse_override(text):
    """Split ``section.key=value`` into its three parts."""
    name, sep, value = text.partition("=")
    section, dot, key = name.strip().rpartition(".")
    if not sep or not dot or not section or not key:
        raise ConfigError("override %r is not of the form section.key=value" % text)
    return section.strip(), key.strip(), value.strip()


class ExperimentConfig:
    """Validated experiment settings with the defaults merged in."""

    def __init__(self):
        self._text = {section: {key: default for key, (_, default) in keys.items()}
                      for section, keys in SCHEMA.items()}
        self._arrays = {name: dict(values) for name, values in DEFAULT_ARRAYS.items()}
        self._lines = {}

    def set(self, section, key, value, lineno=None):
        schema = _schema_for(section)
        if key not in schema:
            raise ConfigError("unknown key", section=section, key=key, lineno=lineno)
        if section.startswith(ARRAY_PREFIX):
            name = section[len(ARRAY_PREFIX):].strip()
            if not name:
                raise ConfigError("array section needs a name", section=section,
                                  lineno=lineno)
            self._arrays.setdefault(name, {})[key] = value
        else:
            self._text[section][key] = value
        self._lines[(section, key)] = lineno
        # convert eagerly so that bad values are reported against their line
        self._convert(section, key, schema[key][0], value)

    def _convert(self, section, key, unit, text):
        if text is None or text == "":
            return None
        try:
            return convert(unit, text, section=section, key=key)
        except ConfigError as exc:
            if exc.lineno is None and self._lines.get((section, key)) is not None:
                raise ConfigError(exc.message, section=exc.section, key=exc.key,
                                  lineno=self._lines[(section, key)]) from None
            raise

    def get(self, section, key):
        unit, _ = SCHEMA[section][key]
        return self._convert(section, key, unit, self._text[section][key])

    def text(self, section, key):
        return self._text[section][key]

    def resolved(self):
        """(name, text) pairs of every setting, defaults included, in schema order."""
        items = []
        for section, keys in SCHEMA.items():
            for key in keys:
                items.append(("%s.%s" % (section, key), self._text[section][key]))
        for name in sorted(self._arrays):
            for key in ARRAY_KEYS:
                value = self._arrays[name].get(key, ARRAY_KEYS[key][1])
                items.append(("%s%s.%s" % (ARRAY_PREFIX, name, key),
                              "" if value is None else value))
        return items

    # domain objects

    def _build(self, section, factory, *args, **kwargs):
        try:
            return factory(*args, **kwargs)
        except DomainError as exc:
            raise ConfigError(str(exc), section=section) from None

    def cpi(self):
        return self._build("waveform", CpiConfig,
                           carrier_freq=self.get("waveform", "carrier_freq"),
                           symbol_duration=self.get("waveform", "symbol_duration"),
                           num_symbols=self.get("waveform", "num_symbols"))

    def symbols(self):
        return self._build("waveform", symbol_stream, self.cpi(),
                           kind=self.get("waveform", "symbols"),
                           order=self.get("waveform", "psk_order"),
                           seed=self.get("waveform", "symbol_seed"))

    def budget(self, transmit_power=None):
        if transmit_power is None:
            transmit_power = self.get("link", "transmit_power")
        return self._build("link", LinkBudget,
                           transmit_power=transmit_power,
                           tx_gain=self.get("link", "tx_gain"),
                           rx_gain=self.get("link", "rx_gain"),
                           rcs=self.get("link", "rcs"),
                           noise_density=self.get("link", "noise_density"),
                           bandwidth=self.get("link", "bandwidth"),
                           unit_pathloss=self.get("link", "unit_pathloss"))

    def target(self, range_=None):
        if range_ is None:
            range_ = self.get("target", "range")
        return self._build("target", TargetState, range_,
                           self.get("target", "angle"),
                           self.get("target", "radial_velocity"),
                           self.get("target", "transverse_velocity"))

    def geometry(self, name=None):
        """The [geometry] block, or the named ``[array <name>]`` layout."""
        wavelength = self.cpi().wavelength
        if name is None:
            section = "geometry"
            values = [self.get(section, key) for key in ARRAY_KEYS]
        else:
            section = ARRAY_PREFIX + name
            try:
                text = self._arrays[name]
            except KeyError:
                raise ConfigError("no array named %r" % name) from None
            values = []
            for key, (unit, default) in ARRAY_KEYS.items():
                raw = text.get(key, default)
                if raw is None:
                    raise ConfigError("missing key", section=section, key=key)
                values.append(self._convert(section, key, unit, raw))
        m, k, l, delta = values
        return self._build(section, ArrayGeometry, m, k, l, wavelength, delta)

    def array_names(self):
        return sorted(self._arrays)

    def search(self):
        return self._build("mse", SearchConfig,
                           half_width=self.get("mse", "half_width"),
                           step=self.get("mse", "step"),
                           tol_v=self.get("mse", "tol_v"),
                           max_iter=self.get("mse", "max_iter"))

    def crb_ranges(self):
        ranges = self.get("crb", "ranges")
        if ranges:
            return np.asarray(ranges, dtype=float)
        lo, hi = self.get("crb", "range_min"), self.get("crb", "range_max")
        points = self.get("crb", "range_points")
        scale = self.get("crb", "range_scale")
        if not (0 < lo <= hi) or points < 1:
            raise ConfigError("need 0 < range_min <= range_max and range_points >= 1",
                              section="crb")
        if scale == "log":
            return np.geomspace(lo, hi, points)
        if scale == "linear":
            return np.linspace(lo, hi, points)
        raise ConfigError("range_scale must be log or linear", section="crb",
                          key="range_scale")


def _read_file(config, path):
    parser = configparser.ConfigParser(interpolation=None,
                                       inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    linenos = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
        parser.read_string("".join(lines), source=str(path))
    except OSError as exc:
        raise ConfigError("cannot read %s: %s" % (path, exc)) from None
    except configparser.ParsingError as exc:
        errors = getattr(exc, "errors", None)
        lineno = errors[0][0] if errors else getattr(exc, "lineno", None)
        raise ConfigError("syntax error in %s" % path, lineno=lineno) from None
    except configparser.Error as exc:
        raise ConfigError(exc.message.splitlines()[0],
                          lineno=getattr(exc, "lineno", None)) from None
    _index_lines(lines, linenos)
    for section in parser.sections():
        for key, value in parser.items(section, raw=True):
            config.set(section, key, value, lineno=linenos.get((section, key)))


def _index_lines(lines, linenos):
    section = None
    for number, line in enumerate(lines, 1):
        stripped = line.strip()
        if stripped.startswith("[") and stripped.endswith("]"):
            section = stripped[1:-1].strip()
        elif section is not None and stripped and stripped[0] not in "#;":
            for sep in ("=", ":"):
                if sep in stripped:
                    linenos.setdefault((section, stripped.split(sep, 1)[0].strip()),
                                       number)
                    break


def load_config(path=None, overrides=()):
    """Defaults, then ``path`` (if any), then ``section.key=value`` overrides."""
    config = ExperimentConfig()
    if path is not None:
        _read_file(config, path)
    for text in overrides:
        section, key, value = parse_override(text)
        config.set(section, key, value)
    for name, value in config.resolved():
        logger.debug("config %s = %s", name, value)
    return config
