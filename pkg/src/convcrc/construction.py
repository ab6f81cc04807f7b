"""Construction method: analyse the equivalent catastrophic encoder ``p(x) c(x)``.

Feeding ``q'(x)`` to ``p(x) c(x)`` produces the codeword the original
encoder emits for the CRC codeword ``q'(x) p(x)``, so undetectable errors
are exactly the error events of the equivalent encoder.  Its state is the
last ``m + nu`` inputs (bit 0 most recent).  States fall into three kinds:

* ``ZERO``: the all-zero state.
* ``DETECTABLE_ZERO``: nonzero, yet the original encoder sits in its zero
  state.  There are ``2^m - 1`` of them, one per nonzero residue modulo
  ``p``; inputs that keep the original encoder at zero move between them
  at no cost in distance.
* ``NONZERO``: everything else.

Detectable-zero states are indexed by their residue ``r`` in
``1 .. 2^m - 1``: the remainder modulo ``p`` of the original encoder's
input so far.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from ._bound import bound_points
from ._frontier import count_paths
from .convcode import ConvCode, parity
from .crc import CrcSpec
from .eventsearch import Spectrum, search_events
from .exclusion import CosetTable, placements_with_period
from .gf2poly import _divmod, _mul, _reverse
from .probability import SnrPoint
from .report import BoundReport

__all__ = [
    "ZERO",
    "DETECTABLE_ZERO",
    "NONZERO",
    "EquivalentCode",
    "StateClassification",
    "StateSpaceError",
    "ClassSpectra",
    "build_equivalent",
    "classify_states",
    "search_class_spectra",
    "class_spectra_from_patterns",
    "construction_tally",
    "pud_bound_construction",
]

ZERO, DETECTABLE_ZERO, NONZERO = 0, 1, 2
DEFAULT_STATE_LIMIT = 26


class StateSpaceError(RuntimeError):
    """The equivalent encoder has too many states; use the exclusion method instead."""


@dataclass(frozen=True)
class EquivalentCode:
    code: ConvCode
    crc: CrcSpec
    original: ConvCode

    @property
    def memory(self) -> int:
        return self.code.memory

    @cached_property
    def crc_taps(self) -> int:
        """``p`` reversed at width ``m+1``: bit ``i`` multiplies the input ``i`` steps ago."""
        return _reverse(self.crc.value, self.crc.degree + 1)

    def original_state(self, states) -> np.ndarray:
        """State of the original encoder for equivalent states (vectorised)."""
        S = np.asarray(states, dtype=np.int64)
        out = np.zeros(S.shape, dtype=np.int64)
        for j in range(self.original.memory):
            out |= parity((S >> j) & self.crc_taps).astype(np.int64) << j
        return out

    def window_weight(self, windows) -> np.ndarray:
        return self.code.window_weight(windows)


def build_equivalent(spec: CrcSpec, code: ConvCode) -> EquivalentCode:
    """``c_eq(x) = p(x) c(x)`` with memory ``m + nu``."""
    gens = []
    for g in code.generators:
        e = _mul(spec.value, g)
        q, r = _divmod(e, spec.value)
        assert r == 0 and q == g
        gens.append(e)
    return EquivalentCode(ConvCode(tuple(gens), code.memory + spec.degree), spec, code)


@dataclass
class StateClassification:
    """State kinds, residue bijection and dwell cycles of an equivalent encoder.

    Arrays indexed by residue ``r`` (entry 0 unused):
    ``state_of[r]`` is the detectable-zero state with residue ``r``;
    ``cycle_id[r]``, ``cycle_pos[r]`` locate it on its dwell cycle and
    ``cycle_size[cycle_id[r]]`` is ``|Delta_r|``.
    """

    eq: EquivalentCode
    state_of: np.ndarray
    cycle_id: np.ndarray
    cycle_pos: np.ndarray
    cycle_size: np.ndarray
    _residue_masks: tuple = field(repr=False, default=())

    @property
    def m(self) -> int:
        return self.eq.crc.degree

    @property
    def detectable_states(self) -> np.ndarray:
        """``S^D_1 .. S^D_{2^m-1}`` ordered by residue."""
        return self.state_of[1:]

    def class_of(self, states):
        S = np.asarray(states, dtype=np.int64)
        orig = self.eq.original_state(S)
        out = np.where(S == 0, ZERO, np.where(orig == 0, DETECTABLE_ZERO, NONZERO))
        return int(out) if out.ndim == 0 else out

    def residue_of(self, states):
        """Remainder modulo ``p`` of the original input history that leads to ``states``.

        Only meaningful for detectable-zero states.
        """
        S = np.asarray(states, dtype=np.int64)
        out = np.zeros(S.shape, dtype=np.int64)
        for u, mask in enumerate(self._residue_masks):
            out |= parity(S & mask).astype(np.int64) << u
        return int(out) if out.ndim == 0 else out

    def delta(self, r: int) -> list[int]:
        """Residues of the states reachable from ``S^D_r`` while staying detectable-zero."""
        cid = self.cycle_id[r]
        members = np.flatnonzero(self.cycle_id == cid)
        return [int(v) for v in members[np.argsort(self.cycle_pos[members])]]

    def delta_size(self, r) -> np.ndarray | int:
        out = self.cycle_size[self.cycle_id[np.asarray(r)]]
        return int(out) if np.ndim(out) == 0 else out

    def hop(self, phi: int, psi: int) -> int | None:
        """Dwell transitions from ``S^D_phi`` to ``S^D_psi``, ``None`` if unreachable."""
        if self.cycle_id[phi] != self.cycle_id[psi]:
            return None
        return int((self.cycle_pos[psi] - self.cycle_pos[phi]) % self.cycle_size[self.cycle_id[phi]])

    def dwell_next(self, states):
        """Successor that keeps the original encoder in its zero state."""
        S = np.asarray(states, dtype=np.int64)
        w = S << 1
        b = parity(w & self.eq.crc_taps).astype(np.int64)
        return ((w | b) & self.eq.code.state_mask)


def _residue_masks(p: int, m: int) -> tuple[int, ...]:
    # residue bit u = sum_{v=u+1..m} q'_{m+u-v} p_v
    masks = []
    for u in range(m):
        mask = 0
        for v in range(u + 1, m + 1):
            if (p >> v) & 1:
                mask |= 1 << (m + u - v)
        masks.append(mask)
    return tuple(masks)


def _states_of_residues(r: np.ndarray, p: int, m: int, M: int) -> np.ndarray:
    """Back-substitution: residue -> detectable-zero state."""
    bits = {}
    for u in range(m - 1, -1, -1):
        b = (r >> u) & 1
        for v in range(u + 1, m):
            if (p >> v) & 1:
                b = b ^ bits[m + u - v]
        bits[u] = b
    # original state is zero: coefficient of x^u in q'p vanishes for u = m .. M-1
    for u in range(m, M):
        b = np.zeros_like(r)
        for v in range(1, m + 1):
            if (p >> v) & 1:
                b = b ^ bits[u - v]
        bits[u] = b
    S = np.zeros_like(r)
    for j, b in bits.items():
        S |= b << j
    return S


def classify_states(eq: EquivalentCode, state_limit: int = DEFAULT_STATE_LIMIT) -> StateClassification:
    M, m, p = eq.memory, eq.crc.degree, eq.crc.value
    if M > state_limit:
        raise StateSpaceError(
            f"equivalent encoder has 2^{M} states (limit 2^{state_limit}); use the exclusion method"
        )
    residues = np.arange(1 << m, dtype=np.int64)
    state_of = _states_of_residues(residues, p, m, M)
    state_of[0] = 0
    cls = StateClassification(eq, state_of, None, None, None, _residue_masks(p, m))
    # walk the dwell transitions
    succ = cls.residue_of(cls.dwell_next(state_of)).tolist()
    size = 1 << m
    cid = [-1] * size
    pos = [0] * size
    sizes = []
    for start in range(1, size):
        if cid[start] >= 0:
            continue
        c = len(sizes)
        r, h = start, 0
        while cid[r] < 0:
            cid[r], pos[r] = c, h
            h += 1
            r = succ[r]
        if r != start:
            raise ArithmeticError("dwell transitions do not form cycles")
        sizes.append(h)
    cls.cycle_id = np.array(cid, dtype=np.int64)
    cls.cycle_pos = np.array(pos, dtype=np.int64)
    cls.cycle_size = np.array(sizes, dtype=np.int64)
    return cls


@dataclass
class ClassSpectra:
    """Counts and lengths of the event classes of an equivalent encoder.

    Every table is an ``(K, 5)`` int64 array with columns
    ``(from, to, d, l, count)``; ``from``/``to`` are residues of
    detectable-zero states, with 0 standing for the all-zero state.
    """

    depth: int
    zz: np.ndarray
    zd: np.ndarray
    dz: np.ndarray
    dd: np.ndarray | None = None
    dd_depth: int | None = None

    def a_zz(self) -> dict[int, int]:
        return _count_by_d(self.zz)

    def length_hist(self, kind: str) -> dict[tuple[int, int], int]:
        rows = getattr(self, kind)
        out: dict[tuple[int, int], int] = {}
        for d, l, c in rows[:, 2:].tolist():
            out[(d, l)] = out.get((d, l), 0) + c
        return out

    def to_dict(self) -> dict:
        doc = {"schema": "convcrc.class-spectra/1", "depth": self.depth, "dd_depth": self.dd_depth}
        for kind in ("zz", "zd", "dz", "dd"):
            rows = getattr(self, kind)
            doc[kind] = None if rows is None else rows.tolist()
        return doc

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _count_by_d(rows: np.ndarray) -> dict[int, int]:
    out: dict[int, int] = {}
    for d, c in zip(rows[:, 2].tolist(), rows[:, 4].tolist()):
        out[d] = out.get(d, 0) + c
    return dict(sorted(out.items()))


def _canonical(rows: np.ndarray) -> np.ndarray:
    if rows.size == 0:
        return np.zeros((0, 5), dtype=np.int64)
    rows = rows[np.lexsort(rows[:, ::-1][:, 1:].T)]
    keys = rows[:, :4]
    starts = np.flatnonzero(np.concatenate(([True], np.any(keys[1:] != keys[:-1], axis=1))))
    out = keys[starts].copy()
    return np.concatenate([out, np.add.reduceat(rows[:, 4], starts)[:, None]], axis=1)


def _absorb_codes(cls: StateClassification):
    eq = cls.eq

    def absorb(S):
        S = S & eq.code.state_mask
        orig = eq.original_state(S)
        cat = np.where(orig == 0, cls.residue_of(S), -1)
        return np.where(S == 0, 0, cat)

    return absorb


def search_class_spectra(
    cls: StateClassification,
    depth: int,
    max_length: int | None = None,
    with_dd: bool | None = None,
) -> ClassSpectra:
    """Count zz, zd, dz (and, when deep enough, dd) events up to ``depth``.

    zz and zd come from one forward search out of the zero state; dz from
    one backward search into it.  zd, dz only matter up to
    ``depth - d_free`` and dd up to ``depth - 2 d_free``.  ``max_length``
    caps the stages of each event (``n + nu`` for a frame).
    """
    eq = cls.eq
    code = eq.code
    M, m = code.memory, cls.m
    mask = code.state_mask
    d_free = eq.original.free_distance
    to_zero = eq.original.min_weight_to_zero
    from_zero = eq.original.min_weight_from_zero
    absorb = _absorb_codes(cls)

    def fwd_step(S):
        w = S << 1
        return [(w & mask, code.window_weight(w)), ((w | 1) & mask, code.window_weight(w | 1))]

    def fwd_bound(S):
        return to_zero[eq.original_state(S & mask)]

    rec = count_paths(np.array([1]), code.window_weight(np.array([1])), fwd_step, absorb, fwd_bound, depth, max_length)
    zz = rec[rec[:, 0] == 0]
    zd = rec[(rec[:, 0] > 0) & (rec[:, 1] <= depth - d_free)]
    zz = np.column_stack([np.zeros(len(zz), dtype=np.int64), zz])
    zd = np.column_stack([np.zeros(len(zd), dtype=np.int64), zd])

    # backward: predecessor of S drops the newest bit and prepends an oldest bit a
    top = 1 << (M - 1)

    def bwd_step(S):
        out = []
        for a in (0, 1):
            out.append(((S >> 1) | (a * top), code.window_weight((a << M) | S)))
        return out

    def bwd_bound(S):
        return from_zero[eq.original_state(S)]

    dz_depth = depth - d_free
    if dz_depth >= d_free:
        rec = count_paths(np.array([top]), code.window_weight(np.array([1 << M])), bwd_step, absorb, bwd_bound, dz_depth, max_length)
        rec = rec[rec[:, 0] > 0]
        dz = np.column_stack([rec[:, 0], np.zeros(len(rec), dtype=np.int64), rec[:, 1:]])
    else:
        dz = np.zeros((0, 5), dtype=np.int64)

    dd = None
    dd_depth = depth - 2 * d_free
    if with_dd is None:
        with_dd = dd_depth >= d_free
    if with_dd and dd_depth >= d_free:
        dd = _search_dd(cls, dd_depth, max_length)
    return ClassSpectra(depth, _canonical(zz), _canonical(zd), _canonical(dz), dd, dd_depth if dd is not None else None)


def _search_dd(cls: StateClassification, depth: int, max_length: int | None) -> np.ndarray:
    """Events leaving each detectable-zero state and entering the class again (one batched search)."""
    eq = cls.eq
    code = eq.code
    M, m = code.memory, cls.m
    mask = code.state_mask
    to_zero = eq.original.min_weight_to_zero
    src = np.arange(1, 1 << m, dtype=np.int64)
    S = cls.state_of[src]
    w = S << 1
    stay = parity(w & eq.crc_taps).astype(np.int64)
    w = w | (1 - stay)
    start = (src << M) | (w & mask)
    start_w = code.window_weight(w)

    def step(X):
        hi = X >> M << M
        w = (X & mask) << 1
        return [(hi | (w & mask), code.window_weight(w)), (hi | ((w | 1) & mask), code.window_weight(w | 1))]

    def absorb(X):
        S = X & mask
        orig = eq.original_state(S)
        r = np.where(S == 0, 0, cls.residue_of(S))
        return np.where(orig == 0, ((X >> M) << m) | r, -1)

    def bound(X):
        return to_zero[eq.original_state(X & mask)]

    rec = count_paths(start, start_w, step, absorb, bound, depth, max_length)
    frm = rec[:, 0] >> m
    to = rec[:, 0] & ((1 << m) - 1)
    keep = to > 0
    return _canonical(np.column_stack([frm, to, rec[:, 1:]])[keep])


def class_spectra_from_patterns(spectrum: Spectrum, table: CosetTable, depth: int, n: int | None = None) -> ClassSpectra:
    """zz, zd, dz tables rebuilt from recorded original-code events.

    A divisible event is a zz event.  A detectable event ``e`` ends a zd
    event at the state with residue ``e mod p``; read as the last part of
    an undetectable error it starts a dz event at residue
    ``x^(-l) e mod p``.
    """
    res = spectrum.residues(table.spec.value)
    d, l = spectrum.distances, spectrum.lengths
    sel = d <= depth
    if n is not None:
        sel &= l <= n + spectrum.code.memory
    d, l, res = d[sel], l[sel], res[sel]
    zero = np.zeros(d.size, dtype=np.int64)
    ones = np.ones(d.size, dtype=np.int64)
    div = res == 0
    zz = np.column_stack([zero, zero, d, l, ones])[div]
    nd = ~div
    d_free = spectrum.d_free or depth + 1
    near = nd & (d <= depth - d_free)
    zd = np.column_stack([zero, res, d, l, ones])[near]
    start = np.zeros(d.size, dtype=np.int64)
    start[near] = table.shift(res[near], -l[near])
    dz = np.column_stack([start, zero, d, l, ones])[near]
    return ClassSpectra(depth, _canonical(zz), _canonical(zd), _canonical(dz))


def _double_placements(spectra: ClassSpectra, cls: StateClassification, frame: int, depth: int, block: int = 4_000_000):
    zd, dz = spectra.zd, spectra.dz
    out: dict[int, int] = {}
    if zd.size == 0 or dz.size == 0:
        return out
    phi, d1, l1, c1 = zd[:, 1], zd[:, 2], zd[:, 3], zd[:, 4]
    psi, d2, l2, c2 = dz[:, 0], dz[:, 2], dz[:, 3], dz[:, 4]
    for a in np.unique(d1):
        ia = np.flatnonzero(d1 == a)
        ib_all = np.flatnonzero(d2 <= depth - a)
        if ib_all.size == 0:
            continue
        step = max(1, block // ib_all.size)
        for lo in range(0, ia.size, step):
            i = ia[lo : lo + step][:, None]
            j = ib_all[None, :]
            same = cls.cycle_id[phi[i]] == cls.cycle_id[psi[j]]
            size = cls.cycle_size[cls.cycle_id[phi[i]]]
            delta = (cls.cycle_pos[psi[j]] - cls.cycle_pos[phi[i]]) % size
            lmin = l1[i] + l2[j] + delta
            v = np.where(same, placements_with_period(frame - lmin + 1, size) * c1[i] * c2[j], 0)
            dd = np.broadcast_to(a + d2[j], v.shape)
            for dsum in np.unique(dd[v > 0]):
                out[int(dsum)] = out.get(int(dsum), 0) + int(v[dd == dsum].sum())
    return dict(sorted(out.items()))


def _comb(arr: np.ndarray, shift: int, period: int) -> np.ndarray:
    F = arr.size
    out = np.zeros(F, dtype=np.int64)
    if shift >= F:
        return out
    out[shift:] = arr[: F - shift]
    pad = (-F) % period
    z = np.concatenate([out, np.zeros(pad, dtype=np.int64)]).reshape(-1, period)
    return np.cumsum(z, axis=0).reshape(-1)[:F]


def _shift(arr: np.ndarray, k: int) -> np.ndarray:
    out = np.zeros_like(arr)
    if k < arr.size:
        out[k:] = arr[: arr.size - k]
    return out


def tuple_placements(
    spectra: ClassSpectra,
    cls: StateClassification,
    frame: int,
    depth: int,
    s_min: int = 3,
    s_max: int | None = None,
) -> dict[int, dict[int, int]]:
    """``s -> d -> placements`` by a length histogram walk over the event classes.

    Each step dwells inside the current cycle (every admissible number of
    laps) and then follows either a dz event (finishing the tuple) or a dd
    event (entering the class again).
    """
    d_free = cls.eq.original.free_distance
    if s_max is None:
        s_max = depth // d_free
    F = frame + 1
    placements = frame + 1 - np.arange(F, dtype=np.int64)
    dz_by_src: dict[int, list] = {}
    for a, _, d, l, c in spectra.dz.tolist():
        dz_by_src.setdefault(a, []).append((d, l, c))
    dd_by_src: dict[int, list] = {}
    if spectra.dd is not None:
        for a, b, d, l, c in spectra.dd.tolist():
            dd_by_src.setdefault(a, []).append((b, d, l, c))
    elif s_max >= 3:
        raise ValueError("dd spectra are required for tuples beyond pairs")
    state: dict[tuple[int, int], np.ndarray] = {}
    for _, phi, d, l, c in spectra.zd.tolist():
        if l < F:
            state.setdefault((phi, d), np.zeros(F, dtype=np.int64))[l] += c
    out: dict[int, dict[int, int]] = {}
    for s in range(2, s_max + 1):
        nxt: dict[tuple[int, int], np.ndarray] = {}
        for (phi, D), arr in state.items():
            size = int(cls.cycle_size[cls.cycle_id[phi]])
            for psi in cls.delta(phi):
                dwelt = _comb(arr, cls.hop(phi, psi), size)
                if not dwelt.any():
                    continue
                if s >= s_min:
                    for d, l, c in dz_by_src.get(psi, ()):
                        if D + d <= depth:
                            v = int((_shift(dwelt, l) * placements).sum()) * c
                            if v:
                                b = out.setdefault(s, {})
                                b[D + d] = b.get(D + d, 0) + v
                if s < s_max:
                    for to, d, l, c in dd_by_src.get(psi, ()):
                        if D + d + d_free <= depth:
                            moved = _shift(dwelt, l) * c
                            if moved.any():
                                key = (to, D + d)
                                nxt[key] = nxt[key] + moved if key in nxt else moved
        state = nxt
        if not state:
            break
    return out


@dataclass
class ConstructionTally:
    singles: dict[int, int]
    doubles: dict[int, int]
    higher: dict[int, int]

    def total(self, d: int) -> int:
        return self.singles.get(d, 0) + self.doubles.get(d, 0) + self.higher.get(d, 0)

    def totals(self) -> dict[int, int]:
        ds = set(self.singles) | set(self.doubles) | set(self.higher)
        return {d: self.total(d) for d in sorted(ds) if self.total(d)}


def construction_tally(spectra: ClassSpectra, cls: StateClassification, n: int, depth: int | None = None) -> ConstructionTally:
    depth = spectra.depth if depth is None else depth
    frame = n + cls.eq.original.memory
    singles: dict[int, int] = {}
    for _, _, d, l, c in spectra.zz.tolist():
        if d <= depth and l <= frame:
            singles[d] = singles.get(d, 0) + c * (frame - l + 1)
    doubles = _double_placements(spectra, cls, frame, depth)
    higher: dict[int, int] = {}
    d_free = cls.eq.original.free_distance
    if depth >= 3 * d_free:
        for by_d in tuple_placements(spectra, cls, frame, depth, 3).values():
            for d, c in by_d.items():
                higher[d] = higher.get(d, 0) + c
    return ConstructionTally(dict(sorted(singles.items())), doubles, dict(sorted(higher.items())))


def pud_bound_construction(
    code: ConvCode,
    spec: CrcSpec,
    k: int,
    snrs,
    depth: int,
    ten_terms: bool = False,
    optimistic: bool = False,
    state_limit: int = DEFAULT_STATE_LIMIT,
    snr_convention: str | None = None,
    pairwise: str = "exact",
) -> BoundReport:
    """Union bound on the undetected-error probability from the equivalent encoder."""
    if isinstance(snrs, SnrPoint):
        snrs = [snrs]
    n = k + spec.degree
    frame = n + code.memory
    eq = build_equivalent(spec, code)
    cls = classify_states(eq, state_limit)
    spectra = search_class_spectra(cls, depth, max_length=frame)
    tally = construction_tally(spectra, cls, n, depth)
    counts = search_events(code, depth).counts()
    report = BoundReport(
        method="construction",
        code=code.octal(),
        nu=code.memory,
        crc=spec.hex(),
        crc_degree=spec.degree,
        k=k,
        depth=depth,
        snr_convention=snr_convention or (snrs[0].convention if snrs else "coded-bit"),
        pairwise=pairwise,
        tallies={"singles": tally.singles, "doubles": tally.doubles, "higher": tally.higher},
    )
    report.points = bound_points(
        code, counts, code.free_distance, depth, n, list(snrs), tally.singles, tally.doubles, tally.higher,
        ten_terms=ten_terms, optimistic=optimistic, pairwise=pairwise,
    )
    return report
