import pytest

from ctru.params import (ALL_ROWS, PARAMETER_SETS, RECOMMENDED, Flavor, ParameterSet,
                         get_parameter_set)

# (flavor, n, q2, eta, |pk|, |ct|, recommended) from the published tables
TABLE = [
    ("ctru", 512, 512, 2, 768, 576, False),
    ("ctru", 512, 1024, 3, 768, 640, True),
    ("ctru", 768, 1024, 2, 1152, 960, True),
    ("ctru", 768, 3457, 3, 1152, 1152, False),
    ("ctru", 768, 2048, 3, 1152, 1056, False),
    ("ctru", 1024, 2048, 2, 1536, 1408, True),
    ("ctru", 1024, 1024, 2, 1536, 1280, False),
    ("ctru", 1024, 3457, 3, 1536, 1536, False),
    ("cntr", 512, 512, 3, 768, 576, False),
    ("cntr", 512, 1024, 5, 768, 640, True),
    ("cntr", 512, 1024, 6, 768, 640, False),
    ("cntr", 768, 1024, 3, 1152, 960, True),
    ("cntr", 768, 1024, 4, 1152, 960, False),
    ("cntr", 1024, 1024, 2, 1536, 1280, True),
    ("cntr", 1024, 1024, 3, 1536, 1280, False),
]


def test_rows_match_table():
    assert len(ALL_ROWS) == len(TABLE)
    for ps, (flavor, n, q2, eta, pk, ct, rec) in zip(ALL_ROWS, TABLE):
        assert (ps.flavor.value, ps.n, ps.q2, ps.eta1, ps.eta2) == (flavor, n, q2, eta, eta)
        assert (ps.pk_bytes, ps.ct_bytes, ps.recommended) == (pk, ct, rec)
        assert ps.q == 3457 and ps.msg_bytes == n // 16


@pytest.mark.parametrize("eta, bits", [(2, 4), (3, 4), (5, 5), (6, 5)])
def test_secret_key_bits(eta, bits):
    ps = ParameterSet("x", Flavor.CTRU, 512, 1024, eta, eta)
    assert ps.sk_coeff_bits == bits
    assert ps.sk_bytes == 512 * bits // 8 + 768 + 32


def test_lookup():
    assert RECOMMENDED == ("ctru-512", "ctru-768", "ctru-1024",
                           "cntr-512", "cntr-768", "cntr-1024")
    assert get_parameter_set("CNTR-768") is get_parameter_set("cntr-768-q1024-eta3")
    assert get_parameter_set("ctru-768-q3457-eta3").q2 == 3457
    assert len({id(p) for p in PARAMETER_SETS.values()}) == 15
    with pytest.raises(KeyError):
        get_parameter_set("ctru-640")


def test_validation():
    with pytest.raises(ValueError):
        ParameterSet("x", Flavor.CTRU, 640, 1024, 2, 2)
    with pytest.raises(ValueError):
        ParameterSet("x", Flavor.CTRU, 512, 1000, 2, 2)
    with pytest.raises(ValueError):
        ParameterSet("x", Flavor.CNTR, 512, 3457, 2, 2)
    with pytest.raises(ValueError):
        ParameterSet("x", Flavor.CTRU, 512, 1024, 2, 2, q=7681)
