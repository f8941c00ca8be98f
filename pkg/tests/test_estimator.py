import itertools
import math

import numpy as np
import pytest

from ctru.e8code import poly_encode
from ctru.estimator import (CoeffDist, centered_binomial, chi2_8_log2_sf, coefficient_terms,
                            convolve, failure_probability, gaussian_estimate, position_dists,
                            product_coeff_dist, product_dist, rounding_term_dist,
                            self_convolve, squared_dist, term_counts, threshold)
from ctru.params import Flavor, ParameterSet, get_parameter_set
from ctru.pke import decrypt_many, decrypt_product, encrypt_many, keygen_many
from ctru.ring import ring_reduce

RNG = np.random.default_rng(13)


def expanded_counts(n):
    """Pairs (i, j) whose reduced monomial x^(i+j) touches each coefficient."""
    counts = np.zeros(n, np.int64)
    for s in range(2 * n - 1):
        mono = np.zeros(s + 1, np.int64)
        mono[s] = 1
        pairs = min(s, 2 * n - 2 - s) + 1
        counts += pairs * (ring_reduce(mono, n) != 0)
    return counts.tolist()


def test_term_count_examples():
    counts = term_counts(768)
    assert counts[0] == 1151
    assert counts[382] == 3 * 384 - 382 - 1
    assert counts[383] == 768
    assert counts[767] == 1152


@pytest.mark.parametrize("n", [8, 16, 512, 768, 1024])
def test_term_counts_match_expansion(n):
    assert term_counts(n) == expanded_counts(n)


def test_term_count_middle_coefficient():
    # h_(n/2) collects i + j = n/2 and i + j = n: (n/2 + 1) + (n - 1) pairs
    for n in (512, 768, 1024):
        assert term_counts(n)[n // 2] == 3 * n // 2


def test_product_of_b1_by_enumeration():
    b1 = centered_binomial(1)
    expect = {}
    for a1, a2, b1_, b2 in itertools.product([0, 1], repeat=4):
        v = (a1 - a2) * (b1_ - b2)
        expect[v] = expect.get(v, 0) + 1 / 16
    got = product_coeff_dist(b1, b1, 1).to_dict()
    assert got.keys() == expect.keys()
    assert all(math.isclose(got[k], expect[k]) for k in expect)
    assert math.isclose(got[0], 3 / 4)


def test_product_coeff_dist_semigroup():
    b2 = centered_binomial(2)
    zero = product_coeff_dist(b2, b2, 0)
    assert zero.to_dict() == {0: 1.0}
    one = product_coeff_dist(b2, b2, 1)
    two = product_coeff_dist(b2, b2, 2)
    assert np.allclose(two.probs, convolve(one, one).probs)
    five = product_coeff_dist(b2, b2, 5)
    assert math.isclose(five.variance(), 5 * one.variance())


def test_centered_binomial():
    d = centered_binomial(3)
    assert math.isclose(d.mass(), 1.0)
    assert math.isclose(d.variance(), 1.5)
    assert math.isclose(d[0], 20 / 64)


@pytest.mark.parametrize("q2", [512, 1024, 2048, 3457])
def test_rounding_term_dist(q2):
    q = 3457
    d = rounding_term_dist(q, q2)
    assert math.isclose(d.mass(), 1.0)
    assert max(abs(d.lo), abs(d.hi)) <= q / 2
    assert abs(d.mean()) < 1 / q
    # direct enumeration of t = q*round(q2 u / q) - q2 u
    expect = {}
    for u in range(q):
        v = (2 * q2 * u + q) // (2 * q)
        expect[q * v - q2 * u] = expect.get(q * v - q2 * u, 0) + 1 / q
    got = d.to_dict()
    assert got.keys() == expect.keys()
    assert all(math.isclose(got[k], expect[k]) for k in expect)
    if q2 == q:
        assert got == {0: 1.0}


def test_self_convolve_and_clip():
    d = CoeffDist.from_dict({-1: 0.25, 0: 0.5, 1: 0.25})
    sixteen = self_convolve(d, 16)
    assert np.allclose(sixteen.probs, [math.comb(32, k) / 2 ** 32 for k in range(33)])
    clipped = self_convolve(d, 16, bound=4)
    assert clipped.lo == -4 and clipped.hi == 4
    assert abs(clipped.mass() - 1) <= 2.0 ** -50
    assert clipped.pruned > 0
    with pytest.raises(ValueError):
        convolve(d, CoeffDist.point(0, scale=2))


def test_squared_dist_tail():
    d = CoeffDist.from_dict({-3: 0.25, 0: 0.5, 2: 0.25})
    probs, over = squared_dist(d, limit=5.0, buckets=10)
    assert math.isclose(over, 0.25)
    assert math.isclose(probs.sum(), 0.75)


@pytest.fixture(scope="module")
def ctru768_dists():
    return position_dists(get_parameter_set("ctru-768"))


def test_mass_conservation(ctru768_dists):
    single, extra = coefficient_terms(get_parameter_set("ctru-768"))
    assert abs(single.mass() - 1) <= 2.0 ** -50
    assert abs(extra.mass() - 1) <= 2.0 ** -50
    for d in ctru768_dists.values():
        assert abs(d.mass() - 1) <= 2.0 ** -50


def test_position_dependence(ctru768_dists):
    assert sorted(ctru768_dists) == sorted(set(term_counts(768)))
    single, extra = coefficient_terms(get_parameter_set("ctru-768"))
    for count, d in ctru768_dists.items():
        assert math.isclose(d.variance(), count * single.variance() + extra.variance(),
                            rel_tol=1e-6)
    assert ctru768_dists[1152].variance() > ctru768_dists[768].variance()


def test_threshold():
    assert threshold(get_parameter_set("cntr-768")) == 3457 / 2
    assert threshold(get_parameter_set("ctru-768")) == 3457 / 2 - math.sqrt(2)


def test_chi2_tail_against_quadrature():
    # survival function of chi^2_8: integral of x^3 e^(-x/2) / 96
    for x in (5.0, 20.0, 60.0):
        grid = np.linspace(x, x + 400, 400001)
        pdf = grid ** 3 * np.exp(-grid / 2) / 96
        sf = float(np.sum((pdf[1:] + pdf[:-1]) / 2 * np.diff(grid)))
        assert math.isclose(chi2_8_log2_sf(x), math.log2(sf), rel_tol=1e-6)


def test_gaussian_estimate_is_finite():
    g = gaussian_estimate(get_parameter_set("cntr-768"))
    assert -400 < g < -100


def decryption_errors(params, count):
    seeds = [RNG.bytes(32) for _ in range(count)]
    h, f = keygen_many(seeds, params)
    m = RNG.integers(0, 256, (count, params.msg_bytes), dtype=np.uint8)
    c = encrypt_many(h, m, [RNG.bytes(32) for _ in range(count)], params)
    v = decrypt_product(c, f, params)
    q2 = params.q2
    err = (v - q2 // 2 * poly_encode(m, params.n) + q2 // 2) % q2 - q2 // 2
    return err * params.q / q2


@pytest.mark.parametrize("name", ["cntr-768", "ctru-512"])
def test_model_variance_matches_measurement(name):
    params = get_parameter_set(name)
    err = decryption_errors(params, 1500)
    single, extra = coefficient_terms(params)
    model = np.array(term_counts(params.n)) * single.variance() + extra.variance()
    for lo, hi in [(0, 64), (params.n // 2 + 64, params.n)]:
        ratio = err[:, lo:hi].var(0).mean() / model[lo:hi].mean()
        assert 0.95 < ratio < 1.03


def test_octet_bound_is_conservative_on_toy_set():
    # heavy compression makes failures observable
    params = ParameterSet("toy", Flavor.CTRU, 512, 128, 2, 2)
    report = failure_probability(params)
    assert len(report.octet_probabilities) == params.n // 8
    assert report.log2_worst_octet <= report.log2_delta
    count = 1500
    seeds = [RNG.bytes(32) for _ in range(count)]
    h, f = keygen_many(seeds, params)
    m = RNG.integers(0, 256, (count, params.msg_bytes), dtype=np.uint8)
    c = encrypt_many(h, m, [RNG.bytes(32) for _ in range(count)], params)
    wrong = np.unpackbits(m ^ decrypt_many(f, c, params), axis=-1, bitorder="little")
    octet_rate = wrong.reshape(count, -1, 4).any(-1).mean()
    assert 0 < octet_rate < np.mean(report.octet_probabilities)
