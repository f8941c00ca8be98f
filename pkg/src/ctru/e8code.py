"""Scalable E8 lattice code: 4 message bits per octet of coefficients.

The code is lambda * (C u (C + c)) where C is spanned by the first three rows
of ``H`` and c is its last row.  Decoding solves the closest-vector problem
over the 16 scaled codewords under the centered mod-2*lambda metric.

All decoding arithmetic is done in doubled units (every input is multiplied
by 2, the scale becomes 2*lambda and the metric modulus 4*lambda), so that
odd moduli such as lambda = q/2 stay integral.  Decoding is branch-free:
minima and conditional flips use sign-bit extraction and :func:`ct_select`
only; the loops run over the public octet structure.
"""

from __future__ import annotations

import numpy as np

H = np.array([[1, 1, 1, 1, 0, 0, 0, 0],
              [0, 0, 1, 1, 1, 1, 0, 0],
              [0, 0, 0, 0, 1, 1, 1, 1],
              [0, 1, 0, 1, 0, 1, 0, 1]], dtype=np.int64)
C_ROW = H[3]


def ct_select(a, b, bit):
    """a if bit == 0 else b, without branching."""
    return ((-(bit ^ 1)) & a) ^ ((-(bit & 1)) & b)


def _neg_bit(x):
    """1 where x < 0 else 0 (sign bit of a 64-bit value)."""
    return (np.asarray(x, dtype=np.int64) >> 63) & 1


def _is_zero(x):
    x = np.asarray(x, dtype=np.int64)
    return 1 ^ (((x | -x) >> 63) & 1)


def encode_e8(k) -> np.ndarray:
    """Codeword k*H mod 2 of a 4-bit vector (last axis); caller applies lambda."""
    return np.asarray(k, dtype=np.int64) @ H % 2


def _sq_dist(y, modulus):
    r = (y + modulus // 2) % modulus - modulus // 2
    return r * r


def decode_c(x, lambda2x: int):
    """Closest point of lambda*C to an octet (last axis of ``x``).

    Works in doubled units: ``2x`` is compared against the scale
    ``lambda2x`` = 2*lambda under the centered mod-2*lambda2x metric.
    Returns ``(bits, total_cost)``; bits has a trailing axis of 4 and the
    cost is in doubled units (4x the squared distance).  Ties pick 0.
    """
    return _decode_c_doubled(2 * np.asarray(x, dtype=np.int64), lambda2x)


def decode_e8(x, lambda2x: int) -> np.ndarray:
    """Decode octets (last axis of ``x``) to 4-bit vectors.

    Decodes x and x - lambda*c over C, keeps the cheaper branch b (ties go to
    branch 0) and returns (k0, k1 ^ k0, k3, b).
    """
    x = np.asarray(x, dtype=np.int64)
    k0, t0 = decode_c(x, lambda2x)
    # x - lambda*c in doubled units
    k1, t1 = _decode_c_doubled(2 * x - lambda2x * C_ROW, lambda2x)
    b = _neg_bit(t1 - t0)
    k = ct_select(k0, k1, b[..., None])
    return np.stack([k[..., 0], k[..., 1] ^ k[..., 0], k[..., 3], b], axis=-1)


def _decode_c_doubled(y, lambda2x: int):
    # octet already in doubled units
    modulus = 2 * lambda2x
    pairs = y.reshape(y.shape[:-1] + (4, 2))
    c0 = _sq_dist(pairs[..., 0], modulus) + _sq_dist(pairs[..., 1], modulus)
    c1 = _sq_dist(pairs[..., 0] - lambda2x, modulus) + _sq_dist(pairs[..., 1] - lambda2x, modulus)
    k = _neg_bit(c1 - c0)
    cost = ct_select(c0, c1, k)
    gap = np.abs(c1 - c0)

    mind = gap[..., 0]
    mini = np.zeros_like(mind)
    for i in range(1, 4):
        less = _neg_bit(gap[..., i] - mind)
        mind = ct_select(mind, gap[..., i], less)
        mini = ct_select(mini, np.full_like(mini, i), less)

    parity = k.sum(-1) & 1
    flips = [parity & _is_zero(mini - i) for i in range(4)]
    k = k ^ np.stack(flips, axis=-1)
    total = cost.sum(-1) + parity * mind
    return k, total


def bytes_to_bits(m, nbits: int | None = None) -> np.ndarray:
    """LSB-first bits of a byte string or uint8 array (last axis)."""
    arr = np.frombuffer(m, dtype=np.uint8) if isinstance(m, (bytes, bytearray)) else np.asarray(m, np.uint8)
    bits = np.unpackbits(arr, axis=-1, bitorder="little").astype(np.int64)
    return bits if nbits is None else bits[..., :nbits]


def bits_to_bytes(bits) -> np.ndarray:
    return np.packbits(np.asarray(bits, dtype=np.uint8), axis=-1, bitorder="little")


def poly_encode(m, n: int) -> np.ndarray:
    """0/1 codeword slots for an n/2-bit message; quadruple i fills octet i."""
    k = bytes_to_bits(m, n // 2)
    k = k.reshape(k.shape[:-1] + (n // 8, 4))
    return encode_e8(k).reshape(k.shape[:-2] + (n,))


def poly_decode(v, q2: int) -> np.ndarray:
    """Decode a polynomial centered mod q2 to its n/16-byte message (uint8 array)."""
    v = np.asarray(v, dtype=np.int64)
    n = v.shape[-1]
    k = decode_e8(v.reshape(v.shape[:-1] + (n // 8, 8)), q2)
    return bits_to_bytes(k.reshape(k.shape[:-2] + (n // 2,)))
