"""CTRU.PKE / CNTR.PKE: key generation, encryption, decryption and packing.

Wire formats (all multi-bit fields packed LSB-first):

* pk: the n coefficients of h = g/f in [0, q), 12 bits each.  h is sent in
  the coefficient domain so that keys are portable across NTT backends.
* pke sk: (2*eta1 + 1) - f_i in ``sk_coeff_bits``-bit fields.
* ct: the n coefficients of c in [0, q2), ``q2_bits`` bits each.

The ``*_many`` functions work on stacks of keys, messages or ciphertexts
(leading batch axis) and are what the byte-level wrappers call.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .e8code import poly_decode, poly_encode
from .ntt import Backend, get_backend, multimod_for
from .params import Flavor, ParameterSet
from .ring import center_mod, schoolbook_mul
from .symmetric import cbd_bytes, cbd_sample, xof_expand

MAX_KEYGEN_ATTEMPTS = 100


class KeyGenError(RuntimeError):
    """Key generation found no invertible f within the attempt budget."""


def pack_bits(values, bits: int) -> bytes | np.ndarray:
    """Pack non-negative integers (last axis) into LSB-first ``bits``-bit fields."""
    v = np.asarray(values).astype(np.uint16)
    fields = ((v[..., None] >> np.arange(bits, dtype=np.uint16)) & 1).astype(np.uint8)
    flat = fields.reshape(v.shape[:-1] + (-1,))
    packed = np.packbits(flat, axis=-1, bitorder="little")
    return packed.tobytes() if packed.ndim == 1 else packed


def unpack_bits(data, bits: int, count: int) -> np.ndarray:
    """Inverse of :func:`pack_bits` for fields of at most 17 bits."""
    buf = np.frombuffer(data, dtype=np.uint8) if isinstance(data, (bytes, bytearray)) else np.asarray(data, np.uint8)
    # each field sits inside the 3 bytes starting at its first byte
    offsets = np.arange(count) * bits
    first, shift = offsets // 8, (offsets % 8).astype(np.uint32)
    padded = np.concatenate([buf, np.zeros(buf.shape[:-1] + (2,), np.uint8)], axis=-1).astype(np.uint32)
    word = padded[..., first] | padded[..., first + 1] << 8 | padded[..., first + 2] << 16
    return ((word >> shift) & ((1 << bits) - 1)).astype(np.int64)


def _check_len(data, expected: int, what: str):
    size = len(data) if isinstance(data, (bytes, bytearray)) else np.shape(data)[-1]
    if size != expected:
        raise ValueError(f"{what} must be {expected} bytes, got {size}")


def stack_bytes(items, expected: int, what: str) -> np.ndarray:
    """Equal-length byte strings as a (count, expected) uint8 array."""
    for item in items:
        _check_len(item, expected, what)
    return np.frombuffer(b"".join(items), np.uint8).reshape(len(items), expected)


def pack_pk(h, params: ParameterSet):
    return pack_bits(np.asarray(h) % params.q, 12)


def unpack_pk(data, params: ParameterSet) -> np.ndarray:
    """Canonical coefficients of h; rejects wrong lengths and coefficients >= q."""
    _check_len(data, params.pk_bytes, "public key")
    h = unpack_bits(data, 12, params.n)
    if np.any(h >= params.q):
        raise ValueError("public key coefficient out of range")
    return h


def pack_pke_sk(f, params: ParameterSet):
    return pack_bits(2 * params.eta1 + 1 - np.asarray(f), params.sk_coeff_bits)


def unpack_pke_sk(data, params: ParameterSet) -> np.ndarray:
    _check_len(data, params.pke_sk_bytes, "secret key")
    stored = unpack_bits(data, params.sk_coeff_bits, params.n)
    if np.any(stored > 4 * params.eta1 + 1):
        raise ValueError("secret key coefficient out of range")
    return 2 * params.eta1 + 1 - stored


def pack_ct(c, params: ParameterSet):
    return pack_bits(np.asarray(c) % params.q2, params.q2_bits)


def unpack_ct(data, params: ParameterSet) -> np.ndarray:
    _check_len(data, params.ct_bytes, "ciphertext")
    c = unpack_bits(data, params.q2_bits, params.n)
    # only reachable for q2 = q, where 12-bit fields can exceed q - 1
    return c % params.q2


def _sample(seeds: Sequence[bytes], nonce: int, eta: int, n: int) -> np.ndarray:
    length = cbd_bytes(n, eta)
    buf = np.frombuffer(b"".join(xof_expand(s, nonce, length) for s in seeds), np.uint8)
    return cbd_sample(buf.reshape(len(seeds), length), eta, n)


def keygen_many(seeds: Sequence[bytes], params: ParameterSet,
                backend: Backend | str | None = None) -> tuple[np.ndarray, np.ndarray]:
    """(h, f) stacks for the given 32-byte seeds.

    Attempt a samples f' from nonce 2a and g from nonce 2a + 1; f = 2f' + 1
    must be invertible in every NTT segment, otherwise the next attempt runs.
    """
    ntt = get_backend(params.n, backend)
    count = len(seeds)
    h = np.zeros((count, params.n), np.int64)
    f = np.zeros((count, params.n), np.int64)
    todo = np.arange(count)
    for attempt in range(MAX_KEYGEN_ATTEMPTS):
        batch = [seeds[i] for i in todo]
        fp = _sample(batch, 2 * attempt, params.eta1, params.n)
        g = _sample(batch, 2 * attempt + 1, params.eta1, params.n)
        fa = 2 * fp
        fa[:, 0] += 1
        finv, ok = ntt.invert(ntt.forward(fa))
        ha = ntt.inverse(ntt.pointwise(ntt.forward(g), finv))
        h[todo[ok]] = ha[ok] % params.q
        f[todo[ok]] = fa[ok]
        todo = todo[~ok]
        if not len(todo):
            return h, f
    raise KeyGenError("no invertible f found")


def encrypt_many(h, messages, coins: Sequence[bytes], params: ParameterSet,
                 backend: Backend | str | None = None) -> np.ndarray:
    """Ciphertext coefficients in [0, q2) for stacked keys, messages and coins.

    CTRU: w = h*r + e + ((q+1)/2)*s mod q, c = round(q2*w/q) mod q2.
    CNTR: c = round(q2*(h*r mod q)/q) + (q2/2)*s mod q2.
    Rounding is half-up: round(a/b) = floor((2a + b) / (2b)).
    """
    q, q2, n = params.q, params.q2, params.n
    ntt = get_backend(n, backend)
    r = _sample(coins, 0, params.eta2, n)
    s = poly_encode(messages, n)
    hr = ntt.mul(np.asarray(h), r)
    if params.flavor is Flavor.CTRU:
        e = _sample(coins, 1, params.eta2, n)
        w = (hr + e + (q + 1) // 2 * s) % q
        return (2 * q2 * w + q) // (2 * q) % q2
    w = hr % q
    return ((2 * q2 * w + q) // (2 * q) + q2 // 2 * s) % q2


def decrypt_product(c, f, params: ParameterSet, method: str = "ntt",
                    backend: Backend | str | None = None) -> np.ndarray:
    """c*f centered mod q2 by schoolbook, multi-moduli NTT or (q2 = q) the q NTT."""
    c = center_mod(c, params.q2)
    if method == "schoolbook":
        c2, f2 = np.atleast_2d(c), np.atleast_2d(f)
        out = np.stack([schoolbook_mul(a, b, params.q2) for a, b in zip(c2, f2)])
        return out.reshape(np.broadcast_shapes(np.shape(c), np.shape(f)))
    if method != "ntt":
        raise ValueError(f"unknown multiplication method {method!r}")
    if params.q2 == params.q:
        return get_backend(params.n, backend).mul(c, f)
    return multimod_for(params.n, params.q2, params.eta1, backend)(c, f)


def decrypt_many(f, c, params: ParameterSet, method: str = "ntt",
                 backend: Backend | str | None = None) -> np.ndarray:
    """Messages (uint8, n/16 bytes each) from stacked secret keys and ciphertexts."""
    return poly_decode(decrypt_product(c, f, params, method, backend), params.q2)


def pke_keygen(seed: bytes, params: ParameterSet,
               backend: Backend | str | None = None) -> tuple[bytes, bytes]:
    """(pk, pke_sk) bytes for one seed."""
    h, f = keygen_many([seed], params, backend)
    return pack_pk(h[0], params), pack_pke_sk(f[0], params)


def pke_encrypt(pk: bytes, m: bytes, coin: bytes, params: ParameterSet,
                backend: Backend | str | None = None) -> bytes:
    _check_len(m, params.msg_bytes, "message")
    h = unpack_pk(pk, params)
    c = encrypt_many(h[None], np.frombuffer(m, np.uint8)[None], [coin], params, backend)
    return pack_ct(c[0], params)


def pke_decrypt(pke_sk: bytes, ct: bytes, params: ParameterSet, method: str = "ntt",
                backend: Backend | str | None = None) -> bytes:
    f = unpack_pke_sk(pke_sk, params)
    c = unpack_ct(ct, params)
    return decrypt_many(f, c, params, method, backend).tobytes()
