"""Decryption failure probability of CTRU / CNTR.

The per-coefficient decryption error is modelled as a sum of independent
products of small coefficients.  Coefficient k of a product in
Z[x]/(x^n - x^(n/2) + 1) is a signed sum of ``term_counts(n)[k]`` products
f_i * g_j; since all factors are symmetric, the signs are dropped.

Distributions live on a fixed grid of step ``1/resolution`` in units of the
unscaled error (the scaled error used by the decryption rounding is an
integer multiple of ``1/q2``).  The only grid approximation is made once, on
the single rounding-noise product, by splitting each atom between its two
neighbouring grid points (this keeps the mean exact).  Every later
convolution is exact in floating point with non-negative terms only, so tail
probabilities keep their relative precision far below 2^-300.

Octet failure is the event that the squared l2 norm of 8 consecutive error
coefficients reaches ``threshold**2``; the scheme-level figure is the union
bound over the n/8 octets plus all mass pruned along the way.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .params import Flavor, ParameterSet

DEFAULT_RESOLUTION = 8
DEFAULT_SQUARE_BUCKETS = 4096


@dataclass
class CoeffDist:
    """Finite distribution on the grid ``{(lo + i) / scale}``.

    ``pruned`` holds probability mass that was cut away; callers add it to
    the failure probability.
    """

    probs: np.ndarray
    lo: int = 0
    scale: int = 1
    pruned: float = 0.0

    @classmethod
    def point(cls, value: int = 0, scale: int = 1) -> "CoeffDist":
        return cls(np.ones(1), value, scale)

    @classmethod
    def from_dict(cls, d: dict[int, float], scale: int = 1) -> "CoeffDist":
        lo, hi = min(d), max(d)
        probs = np.zeros(hi - lo + 1)
        for v, p in d.items():
            probs[v - lo] += p
        return cls(probs, lo, scale)

    def to_dict(self) -> dict[int, float]:
        return {self.lo + i: float(p) for i, p in enumerate(self.probs) if p}

    @property
    def hi(self) -> int:
        return self.lo + len(self.probs) - 1

    def mass(self) -> float:
        return float(self.probs.sum()) + self.pruned

    def values(self) -> np.ndarray:
        return (self.lo + np.arange(len(self.probs))) / self.scale

    def mean(self) -> float:
        return float((self.values() * self.probs).sum() / self.probs.sum())

    def variance(self) -> float:
        v = self.values()
        m = self.mean()
        return float(((v - m) ** 2 * self.probs).sum() / self.probs.sum())

    def __getitem__(self, value: int) -> float:
        i = value - self.lo
        return float(self.probs[i]) if 0 <= i < len(self.probs) else 0.0

    def clip(self, bound: int) -> "CoeffDist":
        """Drop grid points with ``|index| > bound``, moving their mass to pruned."""
        lo = max(self.lo, -bound)
        hi = min(self.hi, bound)
        start, stop = lo - self.lo, hi - self.lo + 1
        # summed directly: a difference of totals would be pure rounding noise
        lost = math.fsum(self.probs[:start]) + math.fsum(self.probs[stop:])
        return CoeffDist(self.probs[start:stop].copy(), lo, self.scale, self.pruned + lost)


def convolve(a: CoeffDist, b: CoeffDist, bound: int | None = None) -> CoeffDist:
    """Distribution of the sum of independent draws from ``a`` and ``b``."""
    if a.scale != b.scale:
        raise ValueError("grid mismatch")
    probs = np.convolve(a.probs, b.probs)
    # mass pruned from either input: 1 - (1 - pa)(1 - pb)
    pruned = a.pruned + b.pruned - a.pruned * b.pruned
    out = CoeffDist(probs, a.lo + b.lo, a.scale, pruned)
    return out.clip(bound) if bound is not None else out


def self_convolve(d: CoeffDist, count: int, bound: int | None = None) -> CoeffDist:
    """``count``-fold convolution of ``d`` with itself by repeated doubling."""
    result = CoeffDist.point(0, d.scale)
    base = d
    while count:
        if count & 1:
            result = convolve(result, base, bound)
        count >>= 1
        if count:
            base = convolve(base, base, bound)
    return result


def centered_binomial(eta: int) -> CoeffDist:
    total = 4 ** eta
    return CoeffDist.from_dict(
        {k - eta: math.comb(2 * eta, k) / total for k in range(2 * eta + 1)})


def term_counts(n: int) -> list[int]:
    """Number of f_i * g_j terms in each coefficient of a product mod x^n - x^(n/2) + 1.

    3n/2 - k - 1 for k <= n/2 - 2, n for k = n/2 - 1 and 3n/2 for k >= n/2.
    At k = n/2 the pairs with i + j = n/2 and i + j = n both land, so the
    count is 3n/2 (exhaustive expansion confirms this).
    """
    half = n // 2
    counts = []
    for k in range(n):
        if k <= half - 2:
            counts.append(3 * half - k - 1)
        elif k == half - 1:
            counts.append(n)
        else:
            counts.append(3 * half)
    return counts


def product_dist(d1: CoeffDist, d2: CoeffDist) -> CoeffDist:
    """Distribution of X * Y for independent integer-valued X, Y."""
    out: dict[int, float] = {}
    for x, px in d1.to_dict().items():
        for y, py in d2.to_dict().items():
            out[x * y] = out.get(x * y, 0.0) + px * py
    return CoeffDist.from_dict(out)


def product_coeff_dist(d1: CoeffDist, d2: CoeffDist, count: int) -> CoeffDist:
    """Distribution of sum_{t < count} X_t * Y_t with X_t ~ d1, Y_t ~ d2 iid."""
    return self_convolve(product_dist(d1, d2), count)


def rounding_term_dist(q: int, q2: int) -> CoeffDist:
    """Distribution of t = q*round(q2*u/q) - q2*u for u uniform in [0, q).

    Rounding is half-up.  The rounding error (q/q2)*eps equals t/q2 exactly.
    """
    u = np.arange(q, dtype=np.int64)
    v = (2 * q2 * u + q) // (2 * q)
    t = q * v - q2 * u
    lo = int(t.min())
    probs = np.bincount(t - lo).astype(float) / q
    return CoeffDist(probs, lo)


def _on_grid(values: np.ndarray, weights: np.ndarray, denom: int, scale: int) -> CoeffDist:
    """Place rational atoms ``values/denom`` on the grid of step ``1/scale``.

    Each atom is split between its two neighbouring grid points so that the
    mean is preserved exactly.
    """
    num = values.astype(np.int64) * scale
    low = np.floor_divide(num, denom)
    frac = (num - low * denom) / denom
    lo = int(low.min())
    size = int(low.max()) - lo + 2
    probs = np.bincount(low - lo, weights * (1 - frac), minlength=size)
    probs += np.bincount(low - lo + 1, weights * frac, minlength=size)
    return CoeffDist(probs, lo, scale)


def _scaled(d: CoeffDist, scale: int) -> CoeffDist:
    """Integer-valued ``d`` re-expressed on the grid of step ``1/scale``."""
    probs = np.zeros((len(d.probs) - 1) * scale + 1)
    probs[::scale] = d.probs
    return CoeffDist(probs, d.lo * scale, scale, d.pruned)


@dataclass
class FailureReport:
    params: ParameterSet
    log2_delta: float
    log2_worst_octet: float
    pruned: float
    octet_probabilities: list[float] = field(repr=False, default_factory=list)


def threshold(params: ParameterSet) -> float:
    """Octet decoding radius in unscaled units."""
    if params.flavor is Flavor.CTRU:
        return params.q / 2 - math.sqrt(2)
    return params.q / 2


def coefficient_terms(params: ParameterSet, resolution: int = DEFAULT_RESOLUTION):
    """Per-term and per-position distributions of the unscaled decryption error.

    Returns ``(single, extra)``: coefficient k of the error is the sum of
    ``term_counts(n)[k]`` iid copies of ``single`` plus one copy of ``extra``.
    For CTRU the term is g*r + e*(2f') + f' + (q/q2)*eps*(2f') and the
    constant coefficient of f = 2f' + 1 adds e_k + (q/q2)*eps_k.  CNTR drops
    the e*f and f' parts.
    """
    R = resolution
    psi1 = centered_binomial(params.eta1)
    psi2 = centered_binomial(params.eta2)
    two_f = CoeffDist.from_dict({2 * v: p for v, p in psi1.to_dict().items()})
    t = rounding_term_dist(params.q, params.q2)

    tvals = np.array(list(t.to_dict().keys()))
    tprob = np.array(list(t.to_dict().values()))
    fvals = np.array(list(two_f.to_dict().keys()))
    fprob = np.array(list(two_f.to_dict().values()))
    eps_f = _on_grid(np.outer(tvals, fvals).ravel(),
                     np.outer(tprob, fprob).ravel(), params.q2, R)
    eps_one = _on_grid(tvals, tprob, params.q2, R)

    single = convolve(_scaled(product_dist(psi1, psi2), R), eps_f)
    extra = eps_one
    if params.flavor is Flavor.CTRU:
        single = convolve(single, _scaled(product_dist(psi2, two_f), R))
        single = convolve(single, _scaled(psi1, R))
        extra = convolve(extra, _scaled(psi2, R))
    return _extended(single), _extended(extra)


def _extended(d: CoeffDist) -> CoeffDist:
    """``d`` in long double, rescaled to total mass exactly 1.

    The inputs are exact rationals, so the rescaling removes only their
    float64 representation error.  Over a thousand chained convolutions
    the wider mantissa keeps the total mass within 2^-50 of 1.
    """
    probs = d.probs.astype(np.longdouble)
    return CoeffDist(probs / probs.sum(), d.lo, d.scale, d.pruned)


def position_dists(params: ParameterSet, resolution: int = DEFAULT_RESOLUTION
                   ) -> dict[int, CoeffDist]:
    """Error distribution for every distinct term count, keyed by count."""
    single, extra = coefficient_terms(params, resolution)
    bound = math.ceil(threshold(params) * resolution)
    counts = sorted(set(term_counts(params.n)))
    out = {}
    cur = convolve(self_convolve(single, counts[0], bound), extra, bound)
    out[counts[0]] = cur
    have = counts[0]
    for c in counts[1:]:
        while have < c:
            cur = convolve(cur, single, bound)
            have += 1
        out[c] = cur
    return out


def squared_dist(d: CoeffDist, limit: float, buckets: int) -> tuple[np.ndarray, float]:
    """Bucketed distribution of X**2 on ``[0, limit)``; returns (probs, mass >= limit)."""
    x = d.values()
    sq = x * x
    idx = np.rint(sq * (buckets / limit)).astype(np.int64)
    inside = sq < limit
    weights = d.probs.astype(float)
    probs = np.bincount(idx[inside], weights[inside], minlength=buckets + 1)
    over = float(weights[~inside].sum()) + d.pruned
    # rounding may push a point just below the limit onto the last bucket
    over += float(probs[buckets:].sum())
    return probs[:buckets], over


def octet_failure(squares: list[tuple[np.ndarray, float]]) -> float:
    """P[sum of squares >= limit] for independent bucketed squares."""
    acc = np.ones(1)
    fail = 0.0
    buckets = len(squares[0][0])
    for probs, over in squares:
        fail += over * float(acc.sum())
        acc = np.convolve(acc, probs)
        fail += float(acc[buckets:].sum())
        acc = acc[:buckets]
    return fail


def failure_probability(params: ParameterSet, resolution: int = DEFAULT_RESOLUTION,
                        square_buckets: int = DEFAULT_SQUARE_BUCKETS) -> FailureReport:
    """Union-bound decryption failure probability of ``params``."""
    limit = threshold(params) ** 2
    dists = position_dists(params, resolution)
    squares = {c: squared_dist(d, limit, square_buckets) for c, d in dists.items()}
    counts = term_counts(params.n)

    cache: dict[tuple[int, ...], float] = {}
    per_octet = []
    for i in range(params.n // 8):
        key = tuple(counts[8 * i: 8 * i + 8])
        if key not in cache:
            cache[key] = octet_failure([squares[c] for c in key])
        per_octet.append(cache[key])
    pruned = sum(d.pruned for d in dists.values())
    total = math.fsum(per_octet)
    return FailureReport(params, math.log2(total), math.log2(max(per_octet)), pruned, per_octet)


def chi2_8_log2_sf(x: float) -> float:
    """log2 P[chi^2 with 8 degrees of freedom >= x], closed form."""
    h = x / 2
    series = math.fsum(h ** k / math.factorial(k) for k in range(4))
    return (-h + math.log(series)) / math.log(2)


def gaussian_estimate(params: ParameterSet, resolution: int = DEFAULT_RESOLUTION) -> float:
    """Coarse log2 failure estimate for comparison with published tables.

    Every coefficient gets the mean term count sum(N)/n and a Gaussian of
    the matching variance; an octet fails when its chi^2_8-distributed
    squared norm reaches threshold^2, and the n/8 octets are union bounded.
    This is a heuristic, not a bound: it ignores the position dependence
    of N and the heavier-than-Gaussian tails of the product terms.
    """
    single, extra = coefficient_terms(params, resolution)
    mean_count = sum(term_counts(params.n)) / params.n
    var = single.variance() * mean_count + extra.variance()
    return chi2_8_log2_sf(threshold(params) ** 2 / var) + math.log2(params.n // 8)
