import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from convcrc.construction import (
    DETECTABLE_ZERO,
    NONZERO,
    ZERO,
    StateSpaceError,
    _double_placements,
    build_equivalent,
    class_spectra_from_patterns,
    classify_states,
    construction_tally,
    pud_bound_construction,
    search_class_spectra,
    tuple_placements,
)
from convcrc.convcode import encode, from_octal
from convcrc.crc import CrcSpec
from convcrc.eventsearch import search_events
from convcrc.exclusion import build_cosets, exclusion_tally, pud_bound_exclusion
from convcrc.gf2poly import Gf2Poly, parse_power_list
from convcrc.probability import SnrPoint
from oracles import pmod, pmul, undetectable_placements_brute

P = parse_power_list
q_bits = st.lists(st.integers(min_value=0, max_value=1), min_size=1, max_size=30)


def test_equivalent_generators(code_2335):
    eq = build_equivalent(CrcSpec(P("x^3+x+1")), code_2335)
    assert eq.code.octal() == "255,317"
    assert eq.memory == 7 and eq.code.is_catastrophic


@given(q_bits)
def test_equivalent_encoder_emits_crc_codewords(bits):
    code = from_octal("23,35", 4)
    spec = CrcSpec(P("x^3+x+1"))
    eq = build_equivalent(spec, code)
    q = Gf2Poly.from_bits_msb_first(bits).value
    w = pmul(q, spec.value)
    w_bits = Gf2Poly(w).to_bits_msb_first(len(bits) + spec.degree)
    lhs = encode(eq.code, bits)
    assert (lhs == encode(code, w_bits)).all()


def _walk(cls, q):
    """States after each input of q', starting from zero."""
    S, out = 0, [0]
    for b in q:
        S = ((S << 1) | b) & cls.eq.code.state_mask
        out.append(S)
    return out


def test_state_type_example(code_75):
    cls = classify_states(build_equivalent(CrcSpec(P("x^2+x+1")), code_75))
    states = _walk(cls, [1, 1, 0, 1, 0, 0, 0, 0])
    assert states == [0b0000, 0b0001, 0b0011, 0b0110, 0b1101, 0b1010, 0b0100, 0b1000, 0b0000]
    Z, D, N = ZERO, DETECTABLE_ZERO, NONZERO
    assert cls.class_of(states).tolist() == [Z, N, N, D, D, N, N, N, Z]
    assert cls.eq.original_state(states).tolist() == [0, 1, 2, 0, 0, 1, 3, 2, 0]
    assert cls.class_of(0b0110) == D and cls.class_of(0b0011) == N and cls.class_of(0) == Z
    # time 3: the original input so far is x^2, residue x+1
    assert cls.residue_of(0b0110) == 0b11


@pytest.mark.parametrize("p,nu", [("x^2+x+1", 2), ("x^3+x+1", 4), ("x^4+x^2+1", 2), ("x^5+x^4+x^2+1", 6)])
def test_detectable_states_are_a_residue_bijection(p, nu):
    spec = CrcSpec(P(p))
    code = {2: from_octal("7,5", 2), 4: from_octal("23,35", 4), 6: from_octal("133,171", 6)}[nu]
    cls = classify_states(build_equivalent(spec, code))
    m = spec.degree
    all_states = np.arange(1 << (m + nu))
    det = np.flatnonzero(cls.class_of(all_states) == DETECTABLE_ZERO)
    assert det.size == (1 << m) - 1
    assert sorted(cls.detectable_states.tolist()) == det.tolist()
    r = cls.residue_of(cls.detectable_states)
    assert r.tolist() == list(range(1, 1 << m))


@settings(max_examples=60)
@given(q_bits, st.sampled_from(["x^2+x+1", "x^3+x+1", "x^4+x^3+x^2+1", "x^3+x^2+x+1"]))
def test_residue_matches_input_prefix(bits, p):
    spec = CrcSpec(P(p))
    cls = classify_states(build_equivalent(spec, from_octal("23,35", 4)))
    m = spec.degree
    Q = 0
    for S, b in zip(_walk(cls, bits)[1:], bits):
        Q = (Q << 1) | b
        if cls.class_of(S) == DETECTABLE_ZERO:
            # original input emitted so far: q'p without its m newest terms
            assert cls.residue_of(S) == pmod(pmul(Q, spec.value) >> m, spec.value)


@given(st.integers(min_value=2, max_value=8).flatmap(
    lambda m: st.integers(min_value=0, max_value=(1 << (m - 1)) - 1).map(lambda mid: (1 << m) | (mid << 1) | 1)
))
def test_dwell_cycles_are_cosets(p):
    spec = CrcSpec(Gf2Poly(p))
    cls = classify_states(build_equivalent(spec, from_octal("7,5", 2)))
    table = build_cosets(spec)
    for r in range(1, 1 << spec.degree):
        delta = cls.delta(r)
        assert set(delta) == set(table.members(table.coset_of(r)))
        assert cls.delta_size(r) == table.size_of(r)
        psi = delta[-1]
        assert table.shift(r, cls.hop(r, psi)) == psi
        nxt = cls.residue_of(cls.dwell_next(cls.state_of[r]))
        assert nxt == pmod(r << 1, p)


def test_primitive_gives_single_delta(code_75):
    cls = classify_states(build_equivalent(CrcSpec(P("x^4+x+1")), code_75))
    assert cls.cycle_size.tolist() == [15]
    assert cls.hop(1, 2) == 1


def test_state_limit(code_133171):
    with pytest.raises(StateSpaceError):
        classify_states(build_equivalent(CrcSpec.from_koopman(0x8E61, 16), code_133171), state_limit=20)


@pytest.mark.parametrize("koop,m", [(0x5, 3), (0x15, 5), (0x89, 8)])
def test_class_spectra_match_pattern_route(code_133171, koop, m):
    spec = CrcSpec.from_koopman(koop, m)
    n, depth = 120, 20
    frame = n + code_133171.memory
    cls = classify_states(build_equivalent(spec, code_133171))
    a = search_class_spectra(cls, depth, max_length=frame, with_dd=False)
    sp = search_events(code_133171, depth, record_patterns=True, max_length=frame)
    b = class_spectra_from_patterns(sp, build_cosets(spec), depth, n)
    for kind in ("zz", "zd", "dz"):
        assert getattr(a, kind).tolist() == getattr(b, kind).tolist(), kind


def test_pair_walk_equals_closed_form(code_2335):
    spec = CrcSpec(P("x^3+x+1"))
    cls = classify_states(build_equivalent(spec, code_2335))
    frame, depth = 80, 20
    spectra = search_class_spectra(cls, depth, max_length=frame)
    walk = tuple_placements(spectra, cls, frame, depth, s_min=2, s_max=2).get(2, {})
    assert walk == _double_placements(spectra, cls, frame, depth)


@pytest.mark.parametrize("p", ["x^2+x+1", "x^2+1", "x^3+x+1", "x^3+x^2+1", "x^3+1", "x^3+x^2+x+1"])
def test_methods_agree_with_brute_force(code_75, p):
    spec = CrcSpec(P(p))
    k, depth = 9, 16
    ref = undetectable_placements_brute(code_75.generators, 2, spec.value, spec.degree, k, depth)
    ref_tot = {}
    for row in ref.values():
        for d, c in row.items():
            ref_tot[d] = ref_tot.get(d, 0) + c
    n = k + spec.degree
    cls = classify_states(build_equivalent(spec, code_75))
    con = construction_tally(search_class_spectra(cls, depth, max_length=n + 2), cls, n, depth)
    sp = search_events(code_75, depth, record_patterns=True, max_length=n + 2)
    exc = exclusion_tally(sp, spec, k, depth)
    assert con.totals() == ref_tot
    assert exc.totals() == ref_tot
    assert con.singles == exc.singles == ref.get(1, {})
    assert con.doubles == exc.doubles == ref.get(2, {})


def test_bound_report(code_2335):
    spec = CrcSpec(P("x^3+x+1"))
    snrs = [SnrPoint.from_db(db, "qpsk") for db in (4.0, 5.0, 6.0)]
    con = pud_bound_construction(code_2335, spec, 100, snrs, 20)
    exc = pud_bound_exclusion(code_2335, spec, 100, snrs, 20)
    assert con.tallies == exc.tallies
    totals = [pt.total for pt in con.points]
    assert totals == sorted(totals, reverse=True)
    for a, b in zip(con.points, exc.points):
        assert a.total == pytest.approx(b.total, rel=1e-12)
