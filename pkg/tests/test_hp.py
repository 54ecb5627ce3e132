import math
import pickle
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from decolab.hp import HPComplex, default_precision, hp, parse_complex

finite = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False)


@pytest.mark.parametrize("text, expect", [
    ("0.36+0.64i", ("0.36", "0.64")),
    ("-1.5,2", ("-1.5", "2")),
    ("2.5i", ("0", "2.5")),
    ("-i", ("0", "-1")),
    ("3", ("3", "0")),
    ("1e-3-2e-4j", ("1e-3", "-2e-4")),
])
def test_parse_complex(text, expect):
    re, im = parse_complex(text)
    assert float(re) == float(expect[0]) and float(im) == float(expect[1])


@pytest.mark.parametrize("bad", ["", "abc", "1+2", "1,2,3"])
def test_parse_complex_rejects(bad):
    with pytest.raises(ValueError):
        parse_complex(bad)


def test_precision_and_literal_digits():
    a = hp("0.1", 512)
    assert a.precision == 512
    # digits beyond double precision survive the string path
    s = hp("0.12345678901234567890123456789", 256).to_string(29)
    assert s.startswith("0.1234567890123456789012345678")


def test_precision_propagates_to_max():
    a, b = HPComplex(1, 128), HPComplex(2, 512)
    assert (a + b).precision == 512
    assert (a * b).precision == 512


def test_env_override(monkeypatch):
    monkeypatch.setenv("DECOLAB_PRECISION_BITS", "300")
    assert default_precision() == 300
    assert hp(1).precision == 300


@settings(max_examples=200, deadline=None)
@given(finite, finite, finite, finite)
def test_matches_double_arithmetic(ar, ai, br, bi):
    a, b = complex(ar, ai), complex(br, bi)
    for op in (lambda x, y: x + y, lambda x, y: x - y, lambda x, y: x * y):
        got = complex(op(HPComplex(a, 53), HPComplex(b, 53)))
        fa = (Fraction(ar), Fraction(ai))
        fb = (Fraction(br), Fraction(bi))
        if op(1, 1) == 2:
            ex = (fa[0] + fb[0], fa[1] + fb[1])
        elif op(1, 1) == 0:
            ex = (fa[0] - fb[0], fa[1] - fb[1])
        else:
            ex = (fa[0] * fb[0] - fa[1] * fb[1], fa[0] * fb[1] + fa[1] * fb[0])
        # correctly rounded: within one ulp of the exact value
        for g, e in zip((got.real, got.imag), ex):
            assert abs(Fraction(g) - e) <= Fraction(math.ulp(float(e)))


def test_pickle_and_hash():
    a = hp("0.3591071125276155+0.6423830938166145i", 300)
    b = pickle.loads(pickle.dumps(a))
    assert a == b and hash(a) == hash(b) and b.precision == 300
