# mlacrb: near-field velocity bounds for modular linear arrays

from mlacrb.api import *
