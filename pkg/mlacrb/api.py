# mlacrb/api.py: the public interface
#
# Collects the public names of every module, defines the package constants
# and installs the default unit converters and CSV adapters.

import math

import numpy as np

from mlacrb.errors import *
from mlacrb.units import *
from mlacrb.geometry import *
from mlacrb.nearfield import *
from mlacrb.link import *
from mlacrb.fisher import *
from mlacrb.gain import *
from mlacrb.simulate import *
from mlacrb.design import *
from mlacrb.config import *
from mlacrb.sweep import *

version = "0.1.0"

version_info = tuple([int(x) for x in version.split(".")])


def _split(text):
    return [item.strip() for item in text.split(",") if item.strip()]


def register_adapters_and_converters():
    def adapt_float(val):
        return "%.12g" % val

    def adapt_bool(val):
        return "1" if val else "0"

    def adapt_unobservable(val):
        return "unobservable"

    def convert_bool(val):
        lowered = val.lower()
        if lowered in ("1", "yes", "true", "on"):
            return True
        if lowered in ("0", "no", "false", "off"):
            return False
        raise ValueError("not a boolean")

    register_adapter(float, adapt_float)
    register_adapter(np.floating, adapt_float)
    register_adapter(bool, adapt_bool)
    register_adapter(np.bool_, adapt_bool)
    register_adapter(type(UNOBSERVABLE), adapt_unobservable)
    register_converter("float", float)
    register_converter("int", int)
    register_converter("bool", convert_bool)
    register_converter("str", str)
    register_converter("dbm", lambda val: dbm_to_watts(float(val)))
    register_converter("dbm_hz", lambda val: dbm_to_watts(float(val)))
    register_converter("db", lambda val: db_to_linear(float(val)))
    register_converter("deg", lambda val: math.radians(float(val)))
    register_converter("floats", lambda val: [float(x) for x in _split(val)])
    register_converter("ints", lambda val: [int(x) for x in _split(val)])
    register_converter("strs", _split)

register_adapters_and_converters()

# Clean up namespace

del(register_adapters_and_converters)
