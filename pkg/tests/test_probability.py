import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from convcrc.convcode import from_octal
from convcrc.eventsearch import search_events, transfer_remainder, transfer_value
from convcrc.probability import (
    SnrPoint,
    log_q_function,
    pairwise_error_bound,
    pairwise_error_prob,
    q_function,
    tail_from_remainder,
    tail_sum,
    tuple_enumeration_sums,
)

xs = st.floats(min_value=-8, max_value=8, allow_nan=False)


def test_q_reference_values():
    assert q_function(0.0) == 0.5
    assert q_function(1.0) == pytest.approx(0.158655253931457, rel=1e-12)
    assert q_function(np.array([0.0, 1.0])).shape == (2,)


@given(xs)
def test_q_symmetry(x):
    assert q_function(-x) == pytest.approx(1 - q_function(x), abs=1e-15)


def test_log_q_deep_tail():
    assert math.isfinite(log_q_function(60.0))
    assert log_q_function(3.0) == pytest.approx(math.log(q_function(3.0)), rel=1e-12)


def test_pairwise_composition():
    assert pairwise_error_prob(1, SnrPoint(0.5)) == pytest.approx(q_function(1.0), rel=1e-14)
    with pytest.raises(ValueError):
        pairwise_error_prob(0, SnrPoint(0.5))


@given(st.integers(min_value=5, max_value=60), st.floats(min_value=0.05, max_value=5.0))
def test_dfree_bound_dominates_exact(d, gamma):
    snr = SnrPoint(gamma)
    assert pairwise_error_bound(d, 5, snr) >= pairwise_error_prob(d, snr) * (1 - 1e-12)
    assert pairwise_error_bound(5, 5, snr) == pytest.approx(pairwise_error_prob(5, snr), rel=1e-10)


def test_snr_conventions():
    a = SnrPoint.from_db(8.0, "coded-bit")
    b = SnrPoint.from_db(8.0, "qpsk")
    assert a.gamma == pytest.approx(10**0.8)
    assert b.gamma == pytest.approx(10**0.8 / 2)
    assert b.label_db == 8.0 and b.db_for("qpsk") == pytest.approx(8.0)
    with pytest.raises(ValueError):
        SnrPoint.from_db(1.0, "ebn0")
    with pytest.raises(ValueError):
        SnrPoint(0.0)


def test_enumeration_sums_small_case():
    # a_5 = 1, a_6 = 2; pairs up to 12: (5,5) (5,6) (6,5) (6,6)
    g, n = 0.3, 7
    z = math.exp(-g)
    single, pair = tuple_enumeration_sums({5: 1, 6: 2}, 12, 5, g, n, 2)
    assert single == pytest.approx(n * (z**5 + 2 * z**6))
    assert pair == pytest.approx(n**2 / 2 * (z**10 + 4 * z**11 + 4 * z**12))


def test_enumeration_sums_below_free_distance():
    assert tuple_enumeration_sums({5: 1}, 4, 5, 0.3, 7, 2) == [0.0, 0.0]


def test_tail_with_nothing_enumerated():
    snr = SnrPoint(0.8)
    pbar = 1e-3
    t = tail_sum(pbar, snr, 5, [])
    expected = q_function(math.sqrt(10 * 0.8)) * math.exp(5 * 0.8) * math.expm1(pbar)
    assert t.rigorous and t.value == pytest.approx(expected, rel=1e-12)


def test_tail_telescopes_to_zero():
    snr = SnrPoint(0.8)
    pbar = 0.02
    terms = [pbar**s / math.factorial(s) for s in range(1, 30)]
    assert tail_sum(pbar, snr, 5, terms).value == pytest.approx(0.0, abs=1e-18)
    assert tail_sum(pbar, snr, 5, terms[:10], ten_terms=True).value == pytest.approx(0.0, abs=1e-18)


def test_single_tail_bounds_transfer_mass():
    # with nothing enumerated the first-order term is Q(.) e^(d_free gamma) Pbar >= sum a_d P(d)
    code = from_octal("7,5", 2)
    snr = SnrPoint(1.5)
    pbar = transfer_value(code, snr.gamma)
    exact = sum(c * pairwise_error_prob(d, snr) for d, c in search_events(code, 60).counts().items())
    first = q_function(math.sqrt(10 * snr.gamma)) * math.exp(5 * snr.gamma) * pbar
    assert first >= exact
    assert tail_sum(pbar, snr, 5, []).value >= first


def test_tail_unavailable():
    t = tail_sum(None, SnrPoint(0.1), 5, [])
    assert t.value is None and not t.rigorous


@pytest.mark.parametrize("depth", [4, 7, 12])
def test_transfer_remainder_of_75(depth):
    code = from_octal("7,5", 2)
    z = 0.1
    ref = z ** (depth + 1) * 2 ** (depth + 1 - 5) / (1 - 2 * z) if depth >= 5 else z**5 / (1 - 2 * z)
    assert transfer_remainder(code, -math.log(z), depth) == pytest.approx(ref, rel=1e-12)


@pytest.mark.parametrize("db", [3.0, 4.0, 5.0])
@pytest.mark.parametrize("ten", [False, True])
def test_remainder_tail_equals_literal_form(db, ten):
    # where the literal subtraction is still accurate the two evaluations agree
    code = from_octal("133,171", 6)
    a = search_events(code, 24).counts()
    snr = SnrPoint.from_db(db, "qpsk")
    n = 1038
    pbar = transfer_value(code, snr.gamma, n)
    old = tail_sum(pbar, snr, 10, tuple_enumeration_sums(a, 24, 10, snr.gamma, n, 2), ten_terms=ten)
    new = tail_from_remainder(a, 24, 10, snr, n, transfer_remainder(code, snr.gamma, 24), ten_terms=ten)
    assert new.value == pytest.approx(old.value, rel=1e-9)


def test_remainder_tail_keeps_precision_at_high_snr():
    code = from_octal("133,171", 6)
    a40 = search_events(code, 40).counts()
    a = {d: c for d, c in a40.items() if d <= 24}
    snr = SnrPoint.from_db(10.0, "qpsk")
    t = tail_from_remainder(a, 24, 10, snr, 1038, transfer_remainder(code, snr.gamma, 24)).value
    # first-order part from the known spectrum beyond the depth
    first = 1038 * sum(c * math.exp(-d * snr.gamma) for d, c in a40.items() if d > 24)
    factor = q_function(math.sqrt(20 * snr.gamma)) * math.exp(10 * snr.gamma)
    assert t >= factor * first > 0
    assert t == pytest.approx(factor * first, rel=1e-3)
