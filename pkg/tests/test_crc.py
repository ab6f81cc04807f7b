import numpy as np
import pytest
from hypothesis import given, strategies as st

from convcrc.crc import CrcSpec, crc_check, crc_encode, parse_crc
from convcrc.gf2poly import Gf2Poly, parse_power_list
from oracles import crc_codeword

messages = st.lists(st.integers(min_value=0, max_value=1), min_size=1, max_size=64)
P = parse_power_list


def test_parse_notations():
    assert parse_crc("0x5", 3).generator == P("x^3+x+1")
    assert parse_crc("0xB", 3).generator == P("x^3+x+1")
    assert parse_crc(0x8E61, 16).koopman == 0x8E61
    assert CrcSpec(P("x^3+x+1")).hex() == "0x5"
    with pytest.raises(ValueError):
        parse_crc("0xA", 3)
    with pytest.raises(ValueError):
        CrcSpec(P("x^3+x"))


def test_single_bit_message():
    spec = parse_crc("0x5", 3)
    # x^3 mod (x^3+x+1) = x+1
    assert crc_encode(spec, [1]).tolist() == [1, 0, 1, 1]


def test_zero_message():
    spec = parse_crc("0x89", 8)
    assert not crc_encode(spec, np.zeros(20, dtype=np.uint8)).any()


@given(messages, st.sampled_from([(0x5, 3), (0x89, 8), (0x8E61, 16)]))
def test_round_trip_and_oracle(msg, crc):
    spec = CrcSpec.from_koopman(*crc)
    word = crc_encode(spec, msg)
    assert crc_check(spec, word)
    f = Gf2Poly.from_bits_msb_first(msg).value
    assert Gf2Poly.from_bits_msb_first(word).value == crc_codeword(spec.value, spec.degree, f)


@given(messages, st.data())
def test_single_flip_detected(msg, data):
    spec = CrcSpec.from_koopman(0x89, 8)
    word = crc_encode(spec, msg)
    i = data.draw(st.integers(min_value=0, max_value=len(word) - 1))
    word[i] ^= 1
    assert not crc_check(spec, word)


@given(messages, st.data())
def test_adding_multiple_of_p_is_undetected(msg, data):
    spec = CrcSpec.from_koopman(0x5, 3)
    word = crc_encode(spec, msg)
    j = data.draw(st.integers(min_value=0, max_value=len(word) - 4))
    err = Gf2Poly(spec.value << j).to_bits_msb_first(len(word))
    assert crc_check(spec, word ^ np.array(err, dtype=np.uint8))


def test_check_needs_longer_word():
    with pytest.raises(ValueError):
        crc_check(parse_crc("0x5", 3), [1, 0, 1])
