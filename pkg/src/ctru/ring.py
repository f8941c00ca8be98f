"""Coefficient arithmetic over R = Z[x]/(x^n - x^(n/2) + 1).

Polynomials are numpy integer arrays of length n.  Coefficients that are
stored long-term fit in int16; products are formed in int64 so that no
intermediate wraps.  The reduction kernels accept Python ints as well as
arrays and never branch on their input.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .params import Q

MONT_BITS = 16
MONT_R = 1 << MONT_BITS
Q_PRIME = 7681


@lru_cache(maxsize=None)
def _constants(q: int) -> tuple[int, int]:
    qinv = pow(q, -1, MONT_R)
    if qinv >= MONT_R // 2:
        qinv -= MONT_R
    barrett_v = ((1 << 26) + q // 2) // q
    return qinv, barrett_v


def _int_array(a) -> np.ndarray:
    a = np.asarray(a)
    return a if a.dtype in (np.int32, np.int64) else a.astype(np.int64)


def montgomery_reduce(a, q: int = Q):
    """Return t = a * 2^-16 mod q with |t| < q.

    Input bound: |a| <= 2^15 * q.  Works on int32 arrays: only the low 16
    bits of a * q^-1 are used, and those survive 32-bit wrap-around.
    """
    a = _int_array(a)
    qinv, _ = _constants(q)
    t = (a * a.dtype.type(qinv)).astype(np.int16)
    return (a - t * a.dtype.type(q)) >> MONT_BITS


def barrett_reduce(a, q: int = Q):
    """Centered representative of a mod q for |a| < 2^15.

    For q = 3457 the output lies in [-(q+1)/2, (q+1)/2] (checked
    exhaustively in the tests); use :func:`center_mod` for the unique
    centered representative.
    """
    a = _int_array(a)
    _, v = _constants(q)
    t = (a * a.dtype.type(v) + a.dtype.type(1 << 25)) >> 26
    return a - t * a.dtype.type(q)


def fqmul(a, b, q: int = Q):
    """a * b * 2^-16 mod q.  With b in Montgomery form this is a plain product."""
    return montgomery_reduce(a * b, q)


def to_mont(x: int, q: int = Q) -> int:
    """Centered Montgomery representative of x."""
    return center_int(x * MONT_R, q)


def center_int(x: int, modulus: int) -> int:
    r = x % modulus
    return r - modulus if 2 * r >= modulus + (modulus & 1) else r


def center_mod(v, modulus: int):
    """Map coefficients to [-m/2, m/2) for even m or [-(m-1)/2, (m-1)/2] for odd m."""
    v = np.asarray(v, dtype=np.int64)
    half = modulus // 2
    if modulus & (modulus - 1) == 0:
        # two's complement masking equals the floor modulus for powers of two
        return ((v + half) & (modulus - 1)) - half
    return (v + half) % modulus - half


def canonical_mod(v, modulus: int):
    return np.asarray(v, dtype=np.int64) % modulus


def ring_reduce(prod: np.ndarray, n: int) -> np.ndarray:
    """Fold a polynomial of any length into R using x^n = x^(n/2) - 1."""
    p = np.array(prod, dtype=np.int64)
    half = n // 2
    while p.shape[-1] > n:
        hi = p[..., n:]
        m = hi.shape[-1]
        out = np.zeros(p.shape[:-1] + (max(n, half + m),), dtype=np.int64)
        out[..., :n] = p[..., :n]
        out[..., :m] -= hi
        out[..., half:half + m] += hi
        p = out
    if p.shape[-1] < n:
        p = np.concatenate([p, np.zeros(p.shape[:-1] + (n - p.shape[-1],), np.int64)], -1)
    return p


def schoolbook_mul(f, g, modulus: int) -> np.ndarray:
    """f * g in R reduced and centered mod ``modulus``.

    This is the reference product every NTT path is checked against.
    """
    f = np.asarray(f, dtype=np.int64)
    g = np.asarray(g, dtype=np.int64)
    n = f.shape[-1]
    return center_mod(ring_reduce(np.convolve(f, g), n), modulus)
