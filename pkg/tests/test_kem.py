import hashlib

import numpy as np
import pytest

from ctru import decaps, encaps, keygen
from ctru.kem import (ct_equal, ct_select_bytes, decaps_batch, encaps_batch, keygen_batch,
                      message_from_seed, split_sk)
from ctru.ntt import Backend
from ctru.params import ALL_ROWS, RECOMMENDED, get_parameter_set
from ctru.pke import pke_decrypt

RNG = np.random.default_rng(5)


def rejection_key(pk, z, ct):
    return hashlib.sha3_512(pk[:33] + z + ct).digest()[:32]


@pytest.mark.parametrize("params", ALL_ROWS, ids=lambda p: p.name)
def test_roundtrip_and_sizes(params):
    for _ in range(3):
        pk, sk = keygen(params)
        ct, ss = encaps(params, pk)
        assert (len(pk), len(sk), len(ct), len(ss)) == (
            params.pk_bytes, params.sk_bytes, params.ct_bytes, 32)
        assert decaps(params, sk, ct) == ss


def test_deterministic_under_seeds():
    params = get_parameter_set("ctru-768")
    keyseed, zseed, mseed = RNG.bytes(32), RNG.bytes(32), RNG.bytes(32)
    first = keygen(params, keyseed, zseed)
    assert keygen(params, keyseed, zseed) == first
    assert encaps(params, first[0], mseed) == encaps(params, first[0], mseed)
    assert keygen(params, RNG.bytes(32), zseed)[0] != first[0]


def test_secret_key_layout():
    params = get_parameter_set("cntr-512")
    zseed = RNG.bytes(32)
    pk, sk = keygen(params, RNG.bytes(32), zseed)
    pke_sk, pk_copy, z = split_sk(sk, params)
    assert pk_copy == pk and z == zseed
    mseed = RNG.bytes(32)
    ct, _ = encaps(params, pk, mseed)
    assert pke_decrypt(pke_sk, ct, params) == message_from_seed(mseed, params)


def test_shared_key_is_hash_of_id_and_message():
    params = get_parameter_set("ctru-512")
    pk, _ = keygen(params)
    mseed = RNG.bytes(32)
    _, ss = encaps(params, pk, mseed)
    m = hashlib.shake_128(mseed).digest(params.msg_bytes)
    assert ss == hashlib.sha3_512(pk[:33] + m).digest()[:32]


@pytest.mark.parametrize("name", RECOMMENDED)
def test_implicit_rejection(name):
    params = get_parameter_set(name)
    pk, sk = keygen(params)
    ct, ss = encaps(params, pk)
    z = sk[-32:]
    tampered = []
    for pos in RNG.choice(len(ct) * 8, 20, replace=False):
        bad = bytearray(ct)
        bad[pos // 8] ^= 1 << (pos % 8)
        tampered.append(bytes(bad))
    keys = decaps_batch([sk] * len(tampered), tampered, params)
    for bad, key in zip(tampered, keys):
        assert key != ss
        assert key == rejection_key(pk, z, bad)
    assert len(set(keys)) == len(keys)


def test_batch_matches_single():
    params = get_parameter_set("cntr-768")
    ks, zs, ms = ([RNG.bytes(32) for _ in range(4)] for _ in range(3))
    pairs = keygen_batch(ks, zs, params)
    assert pairs == [keygen(params, k, z) for k, z in zip(ks, zs)]
    enc = encaps_batch([pk for pk, _ in pairs], ms, params)
    assert enc == [encaps(params, pk, m) for (pk, _), m in zip(pairs, ms)]
    dec = decaps_batch([sk for _, sk in pairs], [ct for ct, _ in enc], params)
    assert dec == [ss for _, ss in enc]


@pytest.mark.parametrize("name", RECOMMENDED)
def test_backend_portability(name):
    params = get_parameter_set(name)
    keyseed, zseed, mseed = RNG.bytes(32), RNG.bytes(32), RNG.bytes(32)
    results = []
    for backend in (None, Backend.UNIFIED):
        pk, sk = keygen(params, keyseed, zseed, backend)
        ct, ss = encaps(params, pk, mseed, backend)
        assert decaps(params, sk, ct, backend) == ss
        results.append((pk, sk, ct, ss))
    assert results[0] == results[1]


def test_length_errors():
    params = get_parameter_set("ctru-512")
    pk, sk = keygen(params)
    ct, _ = encaps(params, pk)
    with pytest.raises(ValueError):
        encaps(params, pk[:-1])
    with pytest.raises(ValueError):
        decaps(params, sk, ct[:-1])
    with pytest.raises(ValueError):
        decaps(params, sk[:-1], ct)
    with pytest.raises(ValueError):
        keygen(params, bytes(31))
    with pytest.raises(ValueError):
        keygen(params, bytes(32), bytes(5))


def test_ct_equal_and_select():
    a = RNG.integers(0, 256, (50, 40), dtype=np.uint8)
    b = a.copy()
    b[::2, RNG.integers(0, 40)] ^= 0x80
    eq = ct_equal(a, b)
    assert eq.tolist() == [0, 1] * 25
    assert ct_equal(b"abc", b"abc") == 1 and ct_equal(b"abc", b"abd") == 0
    picked = ct_select_bytes(a, b, 1 - eq)
    assert np.array_equal(picked, np.where((1 - eq)[:, None] == 1, b, a))
