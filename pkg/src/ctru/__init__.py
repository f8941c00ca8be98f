"""CTRU and CNTR key encapsulation over Z_q[x]/(x^n - x^(n/2) + 1)."""

from .kem import decaps, encaps, keygen
from .params import PARAMETER_SETS, RECOMMENDED, ParameterSet, get_parameter_set

__all__ = ["PARAMETER_SETS", "RECOMMENDED", "ParameterSet", "decaps", "encaps",
           "get_parameter_set", "keygen"]
