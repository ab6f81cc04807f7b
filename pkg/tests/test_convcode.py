import numpy as np
import pytest
from hypothesis import given, strategies as st

from convcrc.convcode import ConvCode, encode, from_octal, parse_octal_list, reduce_feedback, step
from convcrc.gf2poly import Gf2Poly, mul, parse_power_list, reverse
from oracles import conv_output_weight

P = parse_power_list
bit_lists = st.lists(st.integers(min_value=0, max_value=1), min_size=0, max_size=40)


def test_octal_is_x_convention(code_2335):
    # 0o35 carries a D^4 tap; its product with x^3+x+1 is 0o317
    assert code_2335.generator_polys == [P("x^4+x+1"), P("x^4+x^3+x^2+1")]
    # D-notation taps 1+D^3+D^4 and 1+D+D^2+D^4
    assert code_2335.taps == (0b11001, 0b10111)


def test_d_to_x_reversal():
    # G(D) = [1+D^3+D^4, 1+D+D^2] becomes [x^4+x+1, x^4+x^3+x^2]
    code = ConvCode((reverse(0b11001, 5).value, reverse(0b00111, 5).value), 4)
    assert code.generator_polys == [P("x^4+x+1"), P("x^4+x^3+x^2")]


def test_standard_codes(code_75, code_133171):
    assert code_75.n_states == 4 and code_75.free_distance == 5
    assert code_133171.n_states == 64 and code_133171.free_distance == 10
    assert not code_133171.is_catastrophic
    assert from_octal("23,35").memory == 4


def test_invalid_codes():
    with pytest.raises(ValueError):
        ConvCode((0o7,), 2)
    with pytest.raises(ValueError):
        from_octal("17,5", 2)
    with pytest.raises(ValueError):
        parse_octal_list("7,9")
    with pytest.raises(ValueError):
        ConvCode((0o3, 0o2), 2)


def test_catastrophic_detection():
    assert from_octal("3,3", 1).is_catastrophic
    eq = ConvCode((mul(0o7, 0o7).value, mul(0o7, 0o5).value), 4)
    assert eq.is_catastrophic


def test_impulse_response(code_75):
    assert encode(code_75, [1]).tolist() == [1, 1, 1, 0, 1, 1]


def test_step_examples(code_75):
    # new bit enters at bit 0 of the state
    assert step(code_75, 0, 1) == (1, (1, 1))
    assert step(code_75, 0, 0) == (0, (0, 0))
    with pytest.raises(ValueError):
        step(code_75, 4, 0)


@given(bit_lists)
def test_step_fold_equals_encode(bits):
    code = from_octal("23,35", 4)
    state, out = 0, []
    for b in list(bits) + [0] * code.memory:
        state, o = step(code, state, b)
        out.extend(o)
    assert state == 0
    assert out == encode(code, bits).tolist()


@given(bit_lists, bit_lists)
def test_linearity(a, b):
    code = from_octal("133,171", 6)
    n = max(len(a), len(b))
    a = np.array(list(a) + [0] * (n - len(a)), dtype=np.uint8)
    b = np.array(list(b) + [0] * (n - len(b)), dtype=np.uint8)
    assert (encode(code, a ^ b) == encode(code, a) ^ encode(code, b)).all()
    assert not encode(code, np.zeros(n, dtype=np.uint8)).any()


@given(st.integers(min_value=1, max_value=(1 << 20) - 1))
def test_output_weight_matches_products(u):
    code = from_octal("23,35", 4)
    bits = Gf2Poly(u).to_bits_msb_first(u.bit_length())
    assert int(encode(code, bits).sum()) == conv_output_weight(code.generators, u)


def test_reduce_feedback():
    p = P("x^3+x+1")
    assert reduce_feedback(p, P("x^2+x+1")) == p
    q, r = P("x^2+x+1"), P("x^3+x^2+1")
    assert reduce_feedback(mul(P("x+1"), q), mul(P("x+1"), r)) == q
    assert reduce_feedback(p, p) == 1
    with pytest.raises(ValueError):
        reduce_feedback(0, p)
