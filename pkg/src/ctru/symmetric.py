"""SHA3-512 / SHAKE-128 instantiations and centered binomial sampling."""

from __future__ import annotations

import hashlib

import numpy as np

from .params import ID_BYTES, SEED_BYTES, SHARED_KEY_BYTES


def hash_h(id_pk: bytes, m: bytes) -> tuple[bytes, bytes]:
    """(K, coin) = the two 32-byte halves of SHA3-512(id_pk || m)."""
    digest = hashlib.sha3_512(id_pk + m).digest()
    return digest[:SHARED_KEY_BYTES], digest[SHARED_KEY_BYTES:]


def hash_h1(id_pk: bytes, z: bytes, c: bytes) -> bytes:
    """Rejection key: first 32 bytes of SHA3-512(id_pk || z || c)."""
    return hashlib.sha3_512(id_pk + z + c).digest()[:SHARED_KEY_BYTES]


def xof_expand(seed: bytes, nonce: int, out_len: int) -> bytes:
    """SHAKE-128(seed || nonce) squeezed to ``out_len`` bytes."""
    if len(seed) != SEED_BYTES or not 0 <= nonce < 256 or out_len < 1:
        raise ValueError("xof_expand needs a 32-byte seed, a byte nonce and out_len >= 1")
    return hashlib.shake_128(seed + bytes([nonce])).digest(out_len)


def shake128(data: bytes, out_len: int) -> bytes:
    return hashlib.shake_128(data).digest(out_len)


def cbd_bytes(n: int, eta: int) -> int:
    return 2 * n * eta // 8


def _as_uint8(randomness) -> np.ndarray:
    if isinstance(randomness, (bytes, bytearray)):
        return np.frombuffer(randomness, dtype=np.uint8)
    return np.asarray(randomness, dtype=np.uint8)


def _check_cbd_len(length: int, eta: int, n: int | None) -> int:
    if (8 * length) % (2 * eta):
        raise ValueError(f"{length} bytes do not split into {2 * eta}-bit windows")
    count = 8 * length // (2 * eta)
    if n is not None and count != n:
        raise ValueError(f"expected {cbd_bytes(n, eta)} bytes for n={n}, got {length}")
    return count


def cbd_sample(randomness, eta: int, n: int | None = None) -> np.ndarray:
    """Centered binomial coefficients from a byte stream (last axis).

    Coefficient i is HW(low eta bits) - HW(high eta bits) of the i-th
    2*eta-bit window, bits read LSB-first.
    """
    buf = _as_uint8(randomness)
    count = _check_cbd_len(buf.shape[-1], eta, n)
    bits = np.unpackbits(buf, axis=-1, bitorder="little").astype(np.int8)
    windows = bits.reshape(buf.shape[:-1] + (count, 2 * eta))
    # slice sums: numpy reductions over a tiny trailing axis are slow
    coeff = np.zeros(windows.shape[:-1], np.int8)
    for j in range(eta):
        coeff += windows[..., j] - windows[..., eta + j]
    return coeff.astype(np.int64)


def id_of(pk: bytes) -> bytes:
    """ID(pk): the first 33 bytes of the packed public key."""
    return pk[:ID_BYTES]
