import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ctru.params import Q
from ctru.ring import (MONT_R, Q_PRIME, barrett_reduce, canonical_mod, center_int,
                       center_mod, fqmul, montgomery_reduce, ring_reduce,
                       schoolbook_mul, to_mont)

RNG = np.random.default_rng(1)


def _chunks(lo, hi, size=1 << 22):
    for start in range(lo, hi, size):
        yield np.arange(start, min(start + size, hi), dtype=np.int64)


def oracle_mul(f, g, modulus):
    """Matrix of g -> f*g built column by column from x^n = x^(n/2) - 1."""
    n = len(f)
    col = np.array(f, dtype=object)
    cols = []
    for _ in range(n):
        cols.append(col.copy())
        top = col[-1]
        col = np.concatenate([[0], col[:-1]])
        col[0] -= top
        col[n // 2] += top
    m = np.stack(cols, axis=1)
    prod = m.dot(np.array(g, dtype=object))
    return np.array([center_int(int(v), modulus) for v in prod])


@pytest.mark.parametrize("q, bound", [(Q, 1729), (Q_PRIME, 3841)])
def test_barrett_exhaustive(q, bound):
    for a in _chunks(-(1 << 15) + 1, 1 << 15):
        r = barrett_reduce(a, q)
        assert np.all((r - a) % q == 0)
        assert np.abs(r).max() <= bound


@pytest.mark.parametrize("q", [Q, Q_PRIME])
def test_montgomery_exhaustive(q):
    lim = (1 << 15) * q
    worst = 0
    for a in _chunks(-lim, lim + 1, 1 << 24):
        t = montgomery_reduce(a.astype(np.int32), q).astype(np.int64)
        assert np.all((t * MONT_R - a) % q == 0)
        worst = max(worst, int(np.abs(t).max()))
    assert worst <= q


@pytest.mark.parametrize("q", [Q, Q_PRIME])
def test_montgomery_dtype_independent(q):
    a = RNG.integers(-(1 << 15) * q, (1 << 15) * q + 1, 1 << 20)
    assert np.array_equal(montgomery_reduce(a, q), montgomery_reduce(a.astype(np.int32), q))


def test_reduction_examples():
    assert barrett_reduce(0) == 0
    assert barrett_reduce(Q) == 0
    assert barrett_reduce(5000) == 1543
    assert montgomery_reduce(0) == 0
    assert montgomery_reduce(7 * Q) % Q == 0
    assert montgomery_reduce(1 << 16) % Q == 1


def test_fqmul_and_to_mont():
    a = RNG.integers(-(Q // 2), Q // 2 + 1, 10000)
    b = RNG.integers(-(Q // 2), Q // 2 + 1, 10000)
    bm = center_mod(b * MONT_R, Q)
    assert np.all((fqmul(a, bm) - a * b) % Q == 0)
    assert to_mont(1) == center_int(MONT_R, Q)


def test_center_mod_conventions():
    assert center_mod(np.arange(Q), Q).min() == -(Q - 1) // 2
    assert center_mod(np.arange(Q), Q).max() == (Q - 1) // 2
    assert center_mod(np.arange(1024), 1024).min() == -512
    assert center_mod(np.arange(1024), 1024).max() == 511
    assert center_int(512, 1024) == -512
    assert center_int(1728, Q) == 1728 and center_int(1729, Q) == -1728
    assert np.array_equal(canonical_mod([-1, Q], Q), [Q - 1, 0])


def test_ring_reduce_relation():
    # x^n = x^(n/2) - 1 and x^(3n/2) = -1
    n = 16
    x_n = np.zeros(n + 1, np.int64)
    x_n[n] = 1
    expect = np.zeros(n, np.int64)
    expect[n // 2], expect[0] = 1, -1
    assert np.array_equal(ring_reduce(x_n, n), expect)
    x_3h = np.zeros(3 * n // 2 + 1, np.int64)
    x_3h[-1] = 1
    expect = np.zeros(n, np.int64)
    expect[0] = -1
    assert np.array_equal(ring_reduce(x_3h, n), expect)


@pytest.mark.parametrize("n", [8, 16, 512, 768])
def test_schoolbook_matches_matrix_oracle(n):
    for _ in range(3 if n > 16 else 20):
        f = RNG.integers(-Q, Q, n)
        g = RNG.integers(-Q, Q, n)
        assert np.array_equal(schoolbook_mul(f, g, Q), oracle_mul(f, g, Q))


def test_schoolbook_trivial():
    n = 768
    f = RNG.integers(0, Q, n)
    one = np.zeros(n, np.int64)
    one[0] = 1
    assert np.array_equal(schoolbook_mul(f, one, Q), center_mod(f, Q))
    assert not schoolbook_mul(f, np.zeros(n, np.int64), Q).any()


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(-Q, Q))
def test_schoolbook_bilinear(seed, a):
    rng = np.random.default_rng(seed)
    f1, f2, g = rng.integers(-Q, Q, (3, 512))
    lhs = schoolbook_mul(a * f1 + f2, g, Q)
    rhs = center_mod(a * schoolbook_mul(f1, g, Q) + schoolbook_mul(f2, g, Q), Q)
    assert np.array_equal(lhs, rhs)


@pytest.mark.parametrize("q2", [512, 1024, 2048])
def test_scaled_product_identity(q2):
    # q * (c f mod+- q2) == (q c) f mod+- (q q2), i.e. q2 * [((q/q2) c) f mod+- q]
    for _ in range(20):
        c = RNG.integers(0, q2, 768)
        f = 2 * RNG.integers(-3, 4, 768)
        f[0] += 1
        lhs = Q * schoolbook_mul(c, f, q2)
        rhs = schoolbook_mul(Q * c, f, Q * q2)
        assert np.array_equal(lhs, rhs)
