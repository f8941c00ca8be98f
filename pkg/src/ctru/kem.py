"""CTRU / CNTR KEM: FO transform with ID(pk)-prefixed hashing and implicit rejection.

KEM secret key layout: pke_sk || pk || z.
"""

from __future__ import annotations

import os
from typing import Sequence

import numpy as np

from .e8code import ct_select
from .ntt import Backend
from .params import ID_BYTES, SEED_BYTES, SHARED_KEY_BYTES, ParameterSet
from .pke import (_check_len, decrypt_many, encrypt_many, keygen_many, pack_ct,
                  pack_pk, pack_pke_sk, stack_bytes, unpack_ct, unpack_pk,
                  unpack_pke_sk)
from .symmetric import _as_uint8, hash_h, hash_h1, id_of, shake128


def split_sk(sk: bytes, params: ParameterSet) -> tuple[bytes, bytes, bytes]:
    """(pke_sk, pk, z) views of a KEM secret key."""
    _check_len(sk, params.sk_bytes, "secret key")
    a = params.pke_sk_bytes
    b = a + params.pk_bytes
    return sk[:a], sk[a:b], sk[b:]


def message_from_seed(mseed: bytes, params: ParameterSet) -> bytes:
    """Deterministic n/2-bit message: the first n/16 bytes of SHAKE-128(mseed)."""
    return shake128(mseed, params.msg_bytes)


def ct_equal(a, b) -> np.ndarray:
    """1 where the byte rows (last axis) of a and b match, else 0.

    The XOR differences of all bytes are OR-ed together before the single
    sign-bit test, so there is no early exit.
    """
    x, y = _as_uint8(a), _as_uint8(b)
    diff = np.bitwise_or.reduce(x ^ y, axis=-1).astype(np.int64)
    return 1 ^ ((-diff >> 63) & 1)


def ct_select_bytes(a, b, bit):
    """Rows of a where bit == 0, rows of b where bit == 1 (uint8 arrays)."""
    x = np.asarray(a, np.uint8).astype(np.int64)
    y = np.asarray(b, np.uint8).astype(np.int64)
    return ct_select(x, y, np.asarray(bit)[..., None]).astype(np.uint8)


def keygen_batch(keyseeds: Sequence[bytes], zseeds: Sequence[bytes], params: ParameterSet,
                 backend: Backend | str | None = None) -> list[tuple[bytes, bytes]]:
    h, f = keygen_many(keyseeds, params, backend)
    pks, pke_sks = pack_pk(h, params), pack_pke_sk(f, params)
    out = []
    for pk, psk, z in zip(pks, pke_sks, zseeds):
        _check_len(z, SEED_BYTES, "z seed")
        pk = pk.tobytes()
        out.append((pk, psk.tobytes() + pk + z))
    return out


def encaps_batch(pks: Sequence[bytes], mseeds: Sequence[bytes], params: ParameterSet,
                 backend: Backend | str | None = None) -> list[tuple[bytes, bytes]]:
    h = unpack_pk(stack_bytes(list(pks), params.pk_bytes, "public key"), params)
    msgs = [message_from_seed(s, params) for s in mseeds]
    keys, coins = zip(*(hash_h(id_of(pk), m) for pk, m in zip(pks, msgs)))
    m_arr = stack_bytes(msgs, params.msg_bytes, "message")
    cts = np.atleast_2d(pack_ct(encrypt_many(h, m_arr, coins, params, backend), params))
    return [(ct.tobytes(), k) for ct, k in zip(cts, keys)]


def decaps_batch(sks: Sequence[bytes], cts: Sequence[bytes], params: ParameterSet,
                 backend: Backend | str | None = None) -> list[bytes]:
    a = params.pke_sk_bytes
    b = a + params.pk_bytes
    sk_arr = stack_bytes(list(sks), params.sk_bytes, "secret key")
    ct_arr = stack_bytes(list(cts), params.ct_bytes, "ciphertext")
    f = unpack_pke_sk(sk_arr[:, :a], params)
    h = unpack_pk(sk_arr[:, a:b], params)
    c = unpack_ct(ct_arr, params)
    msgs = decrypt_many(f, c, params, backend=backend)
    ids = [sk[a:a + ID_BYTES] for sk in sks]
    keys, coins = zip(*(hash_h(i, m.tobytes()) for i, m in zip(ids, msgs)))
    rects = pack_ct(encrypt_many(h, msgs, coins, params, backend), params)
    reject = 1 ^ ct_equal(np.atleast_2d(rects), ct_arr)
    k_bar = [hash_h1(i, sk[b:], ct) for i, sk, ct in zip(ids, sks, cts)]
    out = ct_select_bytes(stack_bytes(list(keys), SHARED_KEY_BYTES, "key"),
                          stack_bytes(k_bar, SHARED_KEY_BYTES, "key"), reject)
    return [row.tobytes() for row in out]


def keygen(params: ParameterSet, keyseed: bytes | None = None, zseed: bytes | None = None,
           backend: Backend | str | None = None) -> tuple[bytes, bytes]:
    """(pk, sk); missing seeds come from the system RNG."""
    keyseed = os.urandom(SEED_BYTES) if keyseed is None else keyseed
    zseed = os.urandom(SEED_BYTES) if zseed is None else zseed
    _check_len(keyseed, SEED_BYTES, "key seed")
    return keygen_batch([keyseed], [zseed], params, backend)[0]


def encaps(params: ParameterSet, pk: bytes, mseed: bytes | None = None,
           backend: Backend | str | None = None) -> tuple[bytes, bytes]:
    """(ct, shared key) for a public key."""
    mseed = os.urandom(SEED_BYTES) if mseed is None else mseed
    return encaps_batch([pk], [mseed], params, backend)[0]


def decaps(params: ParameterSet, sk: bytes, ct: bytes,
           backend: Backend | str | None = None) -> bytes:
    """Shared key; invalid ciphertexts yield H1(ID(pk), z, ct) instead."""
    return decaps_batch([sk], [ct], params, backend)[0]
