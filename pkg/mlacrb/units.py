# mlacrb/units.py: unit conversions, config converters and CSV adapters
#
# Decibel quantities only exist at the boundaries: converters turn config
# text into linear SI values on ingest, adapters turn result values into CSV
# cells on output.  Everything in between is linear.

import numpy as np

from mlacrb.errors import ConfigError

__all__ = [
    "UNOBSERVABLE",
    "adapt",
    "convert",
    "converter_names",
    "db_to_linear",
    "dbm_to_watts",
    "linear_to_db",
    "register_adapter",
    "register_converter",
    "watts_to_dbm",
]


class _Unobservable:
    """Marker for a bound that does not exist (transverse CRB at sin(theta)=0)."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "UNOBSERVABLE"

    def __reduce__(self):
        return (_Unobservable, ())


UNOBSERVABLE = _Unobservable()


def _scalar_or_array(value):
    return float(value) if value.ndim == 0 else value


def db_to_linear(value_db):
    return _scalar_or_array(10.0 ** (np.asarray(value_db, dtype=float) / 10.0))


def linear_to_db(value):
    return _scalar_or_array(10.0 * np.log10(np.asarray(value, dtype=float)))


def dbm_to_watts(value_dbm):
    return db_to_linear(value_dbm) * 1e-3


def watts_to_dbm(value_w):
    return linear_to_db(np.asarray(value_w, dtype=float) * 1e3)


_adapters = {}
_converters = {}


def register_adapter(type_, adapter):
    """Register ``adapter(value) -> str`` for CSV cells of ``type_``."""
    if not callable(adapter):
        raise TypeError("parameter must be callable")
    _adapters[type_] = adapter


def register_converter(name, converter):
    """Register ``converter(text) -> value`` under a case-insensitive unit name."""
    if not callable(converter):
        raise TypeError("parameter must be callable")
    _converters[name.lower()] = converter


def converter_names():
    return sorted(_converters)


def adapt(value):
    if value is None:
        return ""
    for klass in type(value).__mro__:
        adapter = _adapters.get(klass)
        if adapter is not None:
            return adapter(value)
    return str(value)


def convert(name, text, section=None, key=None):
    try:
        converter = _converters[name.lower()]
    except KeyError:
        raise ConfigError("no converter registered for unit %r" % name,
                          section=section, key=key) from None
    try:
        return converter(text.strip())
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError("cannot convert %r as %s (%s)" % (text, name, exc),
                          section=section, key=key) from None
