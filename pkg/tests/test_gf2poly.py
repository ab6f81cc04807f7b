import pytest
from hypothesis import given, strategies as st

from convcrc.gf2poly import (
    Gf2Poly,
    add,
    divides,
    from_koopman,
    gcd,
    mul,
    parse_power_list,
    poly_divmod,
    reverse,
    to_koopman,
)
from oracles import pmod, pmul

P = parse_power_list
polys = st.integers(min_value=0, max_value=(1 << 40) - 1)
nonzero = st.integers(min_value=1, max_value=(1 << 24) - 1)


def test_addition_examples():
    a = P("x^3+x+1")
    assert (a + a).is_zero()
    assert add(P("x+1"), P("x^2+1")) == P("x^2+x")
    assert add(a, P("x^3")) == P("x+1")


def test_product_examples():
    assert mul(P("x+1"), P("x+1")) == P("x^2+1")
    assert mul(P("x^3+x+1"), 0o23) == 0o255
    assert mul(P("x^3+x+1"), 0o35) == 0o317


def test_division_examples():
    p = P("x^2+x+1")
    assert poly_divmod(p, p) == (Gf2Poly(1), Gf2Poly(0))
    assert poly_divmod(P("x^2"), p) == (Gf2Poly(1), P("x+1"))
    q, r = poly_divmod(P("x^4+x"), p)
    assert q * p + r == P("x^4+x")
    assert r.degree is None or r.degree < 2
    with pytest.raises(ZeroDivisionError):
        poly_divmod(P("x"), 0)


def test_gcd_examples():
    assert gcd(P("x^2+1"), P("x+1")) == P("x+1")
    assert gcd(P("x^3+x+1"), P("x^2+x+1")) == 1
    with pytest.raises(ValueError):
        gcd(0, 0)


def test_reverse_examples():
    assert reverse(P("x^2+1"), 3) == P("x^2+1")
    assert reverse(P("x^3+x"), 4) == P("x^2+1")
    with pytest.raises(ValueError):
        reverse(P("x^4"), 4)


def test_divides_examples():
    p = P("x^3+x+1")
    assert divides(p, 0)
    assert divides(p, p)
    assert not divides(p, P("x^2"))


def test_koopman_round_trip():
    assert from_koopman(0xEA, 8) == P("x^8+x^7+x^6+x^4+x^2+1")
    assert to_koopman(P("x^3+x+1")) == 0x5
    with pytest.raises(ValueError):
        from_koopman(0x3, 3)
    with pytest.raises(ValueError):
        to_koopman(P("x^3+x"))


def test_text_rendering():
    assert str(P("x^3+x+1")) == "x^3+x+1"
    assert str(Gf2Poly(0)) == "0"
    assert P("x + x + 1") == 1
    assert Gf2Poly(0).degree is None
    with pytest.raises(ValueError):
        P("y^2")


def test_bit_orders():
    p = P("x^3+x+1")
    assert p.to_bits_msb_first(5) == [0, 1, 0, 1, 1]
    assert Gf2Poly.from_bits_msb_first([1, 0, 1, 1]) == p
    assert Gf2Poly.from_coefficients(p.coefficients()) == p


def test_immutable():
    p = Gf2Poly(3)
    with pytest.raises(AttributeError):
        p.x = 1


@given(polys, polys)
def test_product_matches_oracle(a, b):
    assert mul(a, b).value == pmul(a, b)


@given(polys, nonzero)
def test_division_identity(a, b):
    q, r = poly_divmod(a, b)
    assert (q * b + r).value == a
    assert r.value == pmod(a, b)
    assert r.is_zero() or r.degree < Gf2Poly(b).degree


@given(nonzero, nonzero, st.integers(min_value=2, max_value=(1 << 10) - 1))
def test_gcd_recovers_common_factor(a, b, g):
    if gcd(a, b) != 1:
        return
    assert gcd(mul(a, g), mul(b, g)) == g


@given(polys, st.integers(min_value=40, max_value=64))
def test_reverse_is_involution(a, w):
    assert reverse(reverse(a, w), w) == a


@given(nonzero, polys)
def test_multiples_are_divisible(p, a):
    assert divides(p, mul(p, a))
