"""Parameter sets for CTRU and CNTR over Z_q[x]/(x^n - x^(n/2) + 1).

Every row of the CTRU and CNTR parameter tables is registered.  The
recommended row of each (flavor, n) pair is reachable under the short name
``"<flavor>-<n>"``; every row, recommended or not, is also reachable under
its long name ``"<flavor>-<n>-q<q2>-eta<eta>"``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

Q = 3457
P = 2
SEED_BYTES = 32
SHARED_KEY_BYTES = 32
ID_BYTES = 33


class Flavor(str, Enum):
    CTRU = "ctru"
    CNTR = "cntr"


@dataclass(frozen=True)
class ParameterSet:
    name: str
    flavor: Flavor
    n: int
    q2: int
    eta1: int
    eta2: int
    q: int = Q
    p: int = P
    recommended: bool = False

    def __post_init__(self):
        if self.n not in (512, 768, 1024):
            raise ValueError(f"unsupported ring dimension {self.n}")
        if self.q != Q or math.gcd(self.q, self.p) != 1:
            raise ValueError("q must be 3457 and coprime to p")
        pow2 = self.q2 & (self.q2 - 1) == 0
        if not ((pow2 and self.q2 <= 1 << 12) or self.q2 == self.q):
            raise ValueError(f"q2={self.q2} is neither a power of two <= 2^12 nor q")
        if self.flavor is Flavor.CNTR and not (pow2 and self.q2 < self.q):
            raise ValueError("CNTR needs an even q2 < q")

    @property
    def q2_bits(self) -> int:
        return (self.q2 - 1).bit_length()

    @property
    def sk_coeff_bits(self) -> int:
        # packed value (2*eta1 + 1) - f_i lies in [0, 4*eta1 + 1]
        return (4 * self.eta1 + 1).bit_length()

    @property
    def pk_bytes(self) -> int:
        return 12 * self.n // 8

    @property
    def ct_bytes(self) -> int:
        return self.n * self.q2_bits // 8

    @property
    def pke_sk_bytes(self) -> int:
        return self.n * self.sk_coeff_bits // 8

    @property
    def sk_bytes(self) -> int:
        return self.pke_sk_bytes + self.pk_bytes + SEED_BYTES

    @property
    def msg_bytes(self) -> int:
        return self.n // 16

    @property
    def shared_key_bytes(self) -> int:
        return SHARED_KEY_BYTES

    @property
    def long_name(self) -> str:
        return f"{self.flavor.value}-{self.n}-q{self.q2}-eta{self.eta1}"


def _row(flavor, n, q2, eta, recommended=False):
    name = f"{flavor.value}-{n}" if recommended else f"{flavor.value}-{n}-q{q2}-eta{eta}"
    return ParameterSet(name, flavor, n, q2, eta, eta, recommended=recommended)


_ROWS = (
    _row(Flavor.CTRU, 512, 1 << 9, 2),
    _row(Flavor.CTRU, 512, 1 << 10, 3, recommended=True),
    _row(Flavor.CTRU, 768, 1 << 10, 2, recommended=True),
    _row(Flavor.CTRU, 768, Q, 3),
    _row(Flavor.CTRU, 768, 1 << 11, 3),
    _row(Flavor.CTRU, 1024, 1 << 11, 2, recommended=True),
    _row(Flavor.CTRU, 1024, 1 << 10, 2),
    _row(Flavor.CTRU, 1024, Q, 3),
    _row(Flavor.CNTR, 512, 1 << 9, 3),
    _row(Flavor.CNTR, 512, 1 << 10, 5, recommended=True),
    _row(Flavor.CNTR, 512, 1 << 10, 6),
    _row(Flavor.CNTR, 768, 1 << 10, 3, recommended=True),
    _row(Flavor.CNTR, 768, 1 << 10, 4),
    _row(Flavor.CNTR, 1024, 1 << 10, 2, recommended=True),
    _row(Flavor.CNTR, 1024, 1 << 10, 3),
)

PARAMETER_SETS: dict[str, ParameterSet] = {}
for _ps in _ROWS:
    PARAMETER_SETS[_ps.name] = _ps
    PARAMETER_SETS.setdefault(_ps.long_name, _ps)

RECOMMENDED = tuple(ps.name for ps in _ROWS if ps.recommended)
ALL_ROWS = _ROWS


def get_parameter_set(name: str) -> ParameterSet:
    """Look up a registered parameter set by short or long name."""
    try:
        return PARAMETER_SETS[name.lower()]
    except KeyError:
        raise KeyError(f"unknown parameter set {name!r}; "
                       f"choose from {', '.join(sorted(PARAMETER_SETS))}") from None
