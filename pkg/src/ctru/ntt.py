"""NTT machinery for Z_q[x]/(x^n - x^(n/2) + 1).

Every transform here follows the same recursive CRT splitting:

* the first split maps x^n - x^(n/2) + 1 onto (x^(n/2) - z1)(x^(n/2) - z2)
  with z1 = zeta^(M/6), z2 = z1^5, so z1 + z2 = z1 * z2 = 1;
* each radix-2 level maps x^(2m) - zeta^e onto (x^m - zeta^(e/2)) and
  (x^m - zeta^(e/2 + M/2));
* the mixed-radix transform finishes with one radix-3 level mapping
  x^6 - zeta^(3c) onto x^2 - zeta^c * rho^j, j = 0, 1, 2, rho = zeta^(M/3).

Here M is the multiplicative order of zeta.  A transform leaves the input
as a list of segments of a fixed degree d; segment i holds f mod
(x^d - zeta^tau[i]).  ``taus`` records those exponents in output order.

Backends:

* ``MIXED_RADIX``: n = 768, zeta = 5 (order 1152), 6 radix-2 levels plus a
  radix-3 level, 384 segments of degree 2.
* ``RADIX2``: n in {512, 1024}, zeta = 55 (order 384), 6 radix-2 levels,
  128 segments of degree 4 or 8.
* ``UNIFIED``: any n = alpha * 256.  The input is split into alpha
  interleaved sub-polynomials in y = x^alpha, each gets the same 256-point
  transform (zeta = 55, 128 segments of degree 2 in y), and the results are
  merged into 128 segments of degree 2*alpha in x.

Transforms run on int32 arrays: every intermediate of the Montgomery and
Barrett kernels fits 32 bits for q and q'.  Twiddles are stored in
Montgomery form.  The forward transform reduces
lazily (outputs stay within [-8q, 8q]); the inverse folds the 2^-levels,
3^-1 and first-split factors into its last multiplication.
"""

from __future__ import annotations

from enum import Enum
from functools import lru_cache

import numpy as np

from .params import Q
from .ring import (MONT_R, Q_PRIME, barrett_reduce, center_mod, fqmul,
                   montgomery_reduce, to_mont)

INT16_MAX = (1 << 15) - 1


class Backend(str, Enum):
    MIXED_RADIX = "mixed-radix"
    RADIX2 = "radix2"
    UNIFIED = "unified"


class NotInvertible(ArithmeticError):
    """A base-ring segment has zero Cramer determinant."""


def multiplicative_order(z: int, q: int) -> int:
    k, x = 1, z % q
    while x != 1:
        x = x * z % q
        k += 1
    return k


def _modpow(base: np.ndarray, exp: int, q: int) -> np.ndarray:
    result = np.ones_like(base)
    base = base % q
    for bit in bin(exp)[2:]:
        result = result * result % q
        if bit == "1":
            result = result * base % q
    return result


def basemul(a, b, zeta_tau, q: int = Q) -> np.ndarray:
    """Product of segments in Z_q[x]/(x^d - zeta_tau); the last axis holds the d coefficients.

    ``zeta_tau`` broadcasts against the segment axes.  The result is exact
    (no residual Montgomery factor) with |coefficient| < q.
    """
    # coefficient-major copies keep every partial product contiguous
    a = np.moveaxis(barrett_reduce(np.asarray(a).astype(np.int32), q), -1, 0).copy()
    b = np.moveaxis(barrett_reduce(np.asarray(b).astype(np.int32), q), -1, 0).copy()
    d = a.shape[0]
    full = [0] * (2 * d - 1)
    for i in range(d):
        for j in range(d):
            full[i + j] = full[i + j] + a[i] * b[j]
    out = [montgomery_reduce(full[k], q) for k in range(d)]
    zt = _mont_array(np.asarray(zeta_tau, dtype=np.int64), q)
    for k in range(d - 1):
        out[k] = out[k] + fqmul(montgomery_reduce(full[k + d], q), zt, q)
    # undo the 2^-16 left by the first montgomery_reduce
    r2 = to_mont(MONT_R, q)
    return np.stack([fqmul(o, r2, q) for o in out], axis=-1)


def _mont_array(x: np.ndarray, q: int) -> np.ndarray:
    return center_mod(x.astype(np.int64) * MONT_R, q).astype(np.int32)


def multiplication_matrix(f, zeta_tau, q: int = Q) -> np.ndarray:
    """Matrix of g -> f*g in Z_q[x]/(x^d - zeta_tau), shape (..., d, d)."""
    f = np.asarray(f, dtype=np.int64) % q
    d = f.shape[-1]
    zt = np.asarray(zeta_tau, dtype=np.int64)[..., None]
    wrapped = f * zt % q
    m = np.empty(f.shape[:-1] + (d, d), np.int64)
    for i in range(d):
        for j in range(d):
            m[..., i, j] = f[..., i - j] if i >= j else wrapped[..., i - j + d]
    return m


def cramer_inverse(f, zeta_tau, q: int = Q) -> tuple[np.ndarray, np.ndarray]:
    """Invert segments of Z_q[x]/(x^d - zeta_tau) by Cramer's rule.

    Solves M f' = e_0 for the multiplication matrix M of f: f'_i = Delta_i / Delta
    with Delta_i = adj(M)[i, 0] and Delta^-1 = Delta^(q-2).  Delta and adj(M)
    come from the Faddeev-LeVerrier recurrence M_k = M M_(k-1) + c I.  Every
    M_k is a polynomial in M, hence itself the multiplication matrix of a ring
    element m_k, so the recurrence runs on m_k (trace = d * m_k[0]) and no
    matrix is formed.  Returns ``(inverse, invertible)``; segments with
    Delta = 0 yield zeros and ``invertible`` False.
    """
    f = center_mod(f, q)
    zt = np.asarray(zeta_tau, dtype=np.int64)
    d = f.shape[-1]
    m = np.zeros(np.broadcast_shapes(f.shape[:-1], zt.shape) + (d,), np.int64)
    p = m.copy()
    c = np.ones(m.shape[:-1], np.int64)
    for k in range(1, d + 1):
        # p = f * m_k gives trace(M M_k) = d * p[0] and m_(k+1) = p + c
        m = p.astype(np.int64)
        m[..., 0] = center_mod(m[..., 0] + c, q)
        p = basemul(f, m, zt, q)
        c = -d * p[..., 0].astype(np.int64) * pow(k, -1, q) % q
    sign = -1 if d % 2 else 1
    det = (sign * c) % q
    adj_col = (-sign * m) % q
    inv = adj_col * _modpow(det, q - 2, q)[..., None] % q
    return center_mod(inv, q), det != 0


def base_inverse(f_seg, zeta_tau, q: int = Q) -> np.ndarray:
    """Inverse of one or more segments; raises NotInvertible if any Delta = 0."""
    inv, ok = cramer_inverse(f_seg, zeta_tau, q)
    if not np.all(ok):
        raise NotInvertible("segment determinant is zero")
    return inv


class _SegmentedNtt:
    """Shared pointwise / inversion logic over a list of base-ring segments."""

    q: int
    n: int
    degree: int
    taus: tuple[int, ...]
    zeta: int

    def _init_segments(self):
        self.zeta_taus = np.array([pow(self.zeta, t, self.q) for t in self.taus], np.int64)
        self.zeta_taus.setflags(write=False)

    def segments(self, fhat):
        fhat = np.asarray(fhat)
        return fhat.reshape(fhat.shape[:-1] + (len(self.taus), self.degree))

    def pointwise(self, ahat, bhat) -> np.ndarray:
        out = basemul(self.segments(ahat), self.segments(bhat), self.zeta_taus, self.q)
        return out.reshape(np.shape(out)[:-2] + (self.n,))

    def invert(self, fhat) -> tuple[np.ndarray, np.ndarray]:
        """(inverse, invertible) with one flag per polynomial in the batch."""
        inv, ok = cramer_inverse(self.segments(fhat), self.zeta_taus, self.q)
        return inv.reshape(inv.shape[:-2] + (self.n,)), np.all(ok, axis=-1)

    def mul(self, f, g) -> np.ndarray:
        return self.inverse(self.pointwise(self.forward(f), self.forward(g)))

    def forward(self, f):
        raise NotImplementedError

    def inverse(self, fhat):
        raise NotImplementedError


class NttPlan(_SegmentedNtt):
    """Radix-2 (optionally radix-3 terminated) NTT for one (n, q, zeta)."""

    def __init__(self, n: int, q: int, zeta: int, levels: int, radix3: bool = False):
        order = multiplicative_order(zeta, q)
        if order % 6:
            raise ValueError("zeta order must be a multiple of 6")
        self.n, self.q, self.zeta, self.order = n, q, zeta, order
        self.levels, self.radix3 = levels, radix3

        e1, e2 = order // 6, 5 * order // 6
        z1, z2 = pow(zeta, e1, q), pow(zeta, e2, q)
        if (z1 + z2) % q != 1 or z1 * z2 % q != 1:
            raise ValueError("first split roots do not satisfy z1 + z2 = z1 * z2 = 1")
        self.split_roots = (z1, z2)
        self._split_mont = (to_mont(z1, q), to_mont(z2, q))

        exps = [e1, e2]
        m = n // 2
        self._fwd_tw, self._inv_tw = [], []
        for _ in range(levels):
            if any(e % 2 for e in exps) or m % 2:
                raise ValueError("splitting does not reach the requested depth")
            tw = [pow(zeta, e // 2, q) for e in exps]
            self._fwd_tw.append(np.array([to_mont(t, q) for t in tw], np.int32)[:, None])
            self._inv_tw.append(np.array([to_mont(pow(t, -1, q), q) for t in tw], np.int32)[:, None])
            exps = [x for e in exps for x in (e // 2, e // 2 + order // 2)]
            m //= 2

        scale = 1 << levels
        if radix3:
            if m % 3 or any(e % 3 for e in exps) or order % 3:
                raise ValueError("radix-3 level not applicable")
            rho = pow(zeta, order // 3, q)
            self._rho = (to_mont(rho, q), to_mont(rho * rho, q))
            ws = [pow(zeta, e // 3, q) for e in exps]
            self._r3_fwd = (np.array([to_mont(w, q) for w in ws], np.int32)[:, None],
                            np.array([to_mont(w * w, q) for w in ws], np.int32)[:, None])
            self._r3_inv = (np.array([to_mont(pow(w, -1, q), q) for w in ws], np.int32)[:, None],
                            np.array([to_mont(pow(w * w, -1, q), q) for w in ws], np.int32)[:, None])
            exps = [x for e in exps for x in (e // 3, e // 3 + order // 3, e // 3 + 2 * order // 3)]
            m //= 3
            scale *= 3

        self.degree = m
        self.taus = tuple(e % order for e in exps)
        inv_scale = pow(scale, -1, q)
        self._final_lo = to_mont(inv_scale, q)
        self._final_hi = to_mont(inv_scale * pow(z1 - z2, -1, q), q)
        # lazy reduction only while the growth bound keeps values inside int16
        self.lazy = (levels + 1.5) * q <= INT16_MAX
        self.output_bound = 8 * q if self.lazy else q
        self._init_segments()

    def forward(self, f) -> np.ndarray:
        q = self.q
        a = center_mod(f, q).astype(np.int32)
        lead = a.shape[:-1]
        half = self.n // 2
        lo, hi = a[..., :half], a[..., half:]
        a = np.stack([lo + fqmul(hi, self._split_mont[0], q),
                      lo + fqmul(hi, self._split_mont[1], q)], axis=-2)
        for tw in self._fwd_tw:
            m = a.shape[-1] // 2
            lo, hi = a[..., :m], a[..., m:]
            t = fqmul(hi, tw, q)
            a = np.stack([lo + t, lo - t], axis=-2)
            a = a.reshape(lead + (-1, m))
            if not self.lazy:
                a = barrett_reduce(a, q)
        if self.radix3:
            a = barrett_reduce(a, q)
            f0, f1, f2 = a[..., 0:2], a[..., 2:4], a[..., 4:6]
            u = fqmul(f1, self._r3_fwd[0], q)
            v = fqmul(f2, self._r3_fwd[1], q)
            r1, r2 = self._rho
            a = np.stack([f0 + u + v,
                          f0 + fqmul(u, r1, q) + fqmul(v, r2, q),
                          f0 + fqmul(u, r2, q) + fqmul(v, r1, q)], axis=-2)
        out = a.reshape(lead + (self.n,))
        assert np.abs(out).max(initial=0) <= self.output_bound
        return out

    def inverse(self, fhat) -> np.ndarray:
        q = self.q
        a = barrett_reduce(np.asarray(fhat).astype(np.int32), q)
        lead = a.shape[:-1]
        if self.radix3:
            a = a.reshape(lead + (-1, 3, self.degree))
            o0, o1, o2 = a[..., 0, :], a[..., 1, :], a[..., 2, :]
            r1, r2 = self._rho
            f0 = barrett_reduce(o0 + o1 + o2, q)
            u = barrett_reduce(o0 + fqmul(o1, r2, q) + fqmul(o2, r1, q), q)
            v = barrett_reduce(o0 + fqmul(o1, r1, q) + fqmul(o2, r2, q), q)
            a = np.concatenate([f0, fqmul(u, self._r3_inv[0], q),
                                fqmul(v, self._r3_inv[1], q)], axis=-1)
        for tw in reversed(self._inv_tw):
            blocks = len(tw)
            a = a.reshape(lead + (blocks, 2, -1))
            x, y = a[..., 0, :], a[..., 1, :]
            a = np.concatenate([barrett_reduce(x + y, q), fqmul(x - y, tw, q)], axis=-1)
        a = a.reshape(lead + (2, -1))
        x, y = a[..., 0, :], a[..., 1, :]
        hi = fqmul(x - y, self._final_hi, q)
        lo = fqmul(x, self._final_lo, q) - fqmul(hi, self._split_mont[0], q)
        return center_mod(np.concatenate([lo, hi], axis=-1), q)


def unified_split(f, alpha: int) -> np.ndarray:
    """F_j[i] = f[alpha*i + j]; returns shape (..., alpha, n/alpha)."""
    f = np.asarray(f)
    n = f.shape[-1]
    return np.swapaxes(f.reshape(f.shape[:-1] + (n // alpha, alpha)), -1, -2)


def unified_merge(subpolys) -> np.ndarray:
    """Inverse of :func:`unified_split`."""
    subpolys = np.asarray(subpolys)
    return np.swapaxes(subpolys, -1, -2).reshape(subpolys.shape[:-2] + (-1,))


def unified_combine(hat_subpolys, block: int = 2) -> np.ndarray:
    """Merge alpha transformed sub-polynomials: fhat[i] = Fhat[i mod alpha, i // alpha].

    With ``block`` = 2 (degree-2 segments in y) segment k of the result is
    sum_{j, l} Fhat[j, 2k + l] x^(alpha*l + j) in Z_q[x]/(x^(2 alpha) - zeta^tau(k)).
    """
    return unified_merge(hat_subpolys)


def unified_uncombine(fhat, alpha: int) -> np.ndarray:
    return unified_split(fhat, alpha)


class UnifiedNtt(_SegmentedNtt):
    """n = alpha * 256 NTT built from one shared 256-point transform."""

    N = 256

    def __init__(self, n: int, q: int = Q, zeta: int = 55):
        if n % self.N:
            raise ValueError(f"unified NTT needs n divisible by {self.N}")
        self.n, self.q, self.zeta = n, q, zeta
        self.alpha = n // self.N
        self.inner = _plan(self.N, q, zeta, 6, False)
        self.degree = self.alpha * self.inner.degree
        self.taus = self.inner.taus
        self.output_bound = self.inner.output_bound
        self._init_segments()

    def forward(self, f) -> np.ndarray:
        return unified_combine(self.inner.forward(unified_split(f, self.alpha)))

    def inverse(self, fhat) -> np.ndarray:
        return unified_merge(self.inner.inverse(unified_uncombine(fhat, self.alpha)))


@lru_cache(maxsize=None)
def _plan(n, q, zeta, levels, radix3) -> NttPlan:
    return NttPlan(n, q, zeta, levels, radix3)


def canonical_backend(n: int) -> Backend:
    return Backend.MIXED_RADIX if n == 768 else Backend.RADIX2


@lru_cache(maxsize=None)
def get_backend(n: int, backend: Backend | str | None = None) -> _SegmentedNtt:
    """NTT engine for dimension n; ``None`` picks the per-n canonical backend."""
    backend = canonical_backend(n) if backend is None else Backend(backend)
    if backend is Backend.MIXED_RADIX:
        if n != 768:
            raise ValueError("the mixed-radix NTT requires n = 768")
        return _plan(768, Q, 5, 6, True)
    if backend is Backend.RADIX2:
        if n not in (512, 1024):
            raise ValueError("the radix-2 NTT requires n in {512, 1024}")
        return _plan(n, Q, 55, 6, False)
    return UnifiedNtt(n)


def ntt_forward(f, backend: Backend | str | None = None) -> np.ndarray:
    return get_backend(np.shape(f)[-1], backend).forward(f)


def ntt_inverse(fhat, backend: Backend | str | None = None) -> np.ndarray:
    return get_backend(np.shape(fhat)[-1], backend).inverse(fhat)


def ntt_mul(f, g, backend: Backend | str | None = None) -> np.ndarray:
    """f * g mod q (centered) through the chosen NTT backend."""
    return get_backend(np.shape(f)[-1], backend).mul(f, g)


# q' = 7681 has no 1152-th root, so its transform stops at degree n/256.
Q_PRIME_ZETA = 20
Q_PRIME_LEVELS = 7
Q_BIG = Q * Q_PRIME


class MultiModMul:
    """Exact c * f over Z via NTTs mod q and q' plus CRT, reduced mod q2.

    Valid while every coefficient of the integer product stays below Q/2,
    Q = q * q'; the bound is checked here from ``c_bound`` = max |c_i| and
    ``f_bound`` = max |f_i| with at most 3n/2 terms per coefficient.
    """

    def __init__(self, n: int, q2: int, c_bound: int, f_bound: int,
                 backend: Backend | str | None = None):
        worst = (3 * n // 2) * c_bound * f_bound
        if 2 * worst >= Q_BIG:
            raise ValueError(f"product bound {worst} exceeds Q/2 = {Q_BIG // 2}")
        self.n, self.q2 = n, q2
        self.ntt_q = get_backend(n, backend)
        self.ntt_qp = _plan(n, Q_PRIME, Q_PRIME_ZETA, Q_PRIME_LEVELS, False)
        self._q_inv = pow(Q, -1, Q_PRIME)

    def __call__(self, c, f) -> np.ndarray:
        a = self.ntt_q.mul(c, f)
        b = self.ntt_qp.mul(c, f)
        k = (b - a) * self._q_inv % Q_PRIME
        exact = center_mod(a + Q * k, Q_BIG)
        return center_mod(exact, self.q2)


@lru_cache(maxsize=None)
def multimod_for(n: int, q2: int, eta: int, backend: Backend | str | None = None) -> MultiModMul:
    return MultiModMul(n, q2, q2 // 2, 2 * eta + 1, backend)


def multimod_mul_q2(c, f, q2: int, eta: int, backend: Backend | str | None = None) -> np.ndarray:
    c = np.asarray(c)
    return multimod_for(c.shape[-1], q2, eta, backend)(c, f)
