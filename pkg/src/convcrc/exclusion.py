"""Exclusion method: filter the code's own error events by CRC divisibility.

Single errors are undetectable when ``p | e``.  A position-ordered pair
``x^(g+l2) e1 + e2`` is undetectable when the residues of ``e1`` and ``e2``
share an x-cyclotomic coset and the gap lines them up; the coset table turns
the scan over ``g`` into one modular subtraction.  Longer tuples are
counted by a dynamic program over (residue, distance, length).

Tallies count placements: every admissible offset and gap of an
undetectable pattern inside the ``n + nu`` trellis stages is one term.
A tuple is counted once, as the tuple whose interior prefixes are all
detectable; a tuple that splits into two undetectable parts is already
covered by those parts.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._bound import bound_points
from ._frontier import SearchBudgetError
from .convcode import ConvCode
from .crc import CrcSpec
from .eventsearch import ErrorEvent, Spectrum, search_events
from .gf2poly import _mod
from .probability import SnrPoint
from .report import BoundReport

__all__ = [
    "CosetTable",
    "UndetectableTally",
    "build_cosets",
    "undetectable_singles",
    "find_gap",
    "undetectable_doubles",
    "undetectable_tuples",
    "exclusion_tally",
    "pud_bound_exclusion",
    "placements_with_period",
]


@dataclass(frozen=True)
class CosetTable:
    """Partition of ``GF(2)[x]/p(x)`` into x-cyclotomic cosets.

    Coset ids are assigned in increasing order of the smallest residue in
    each coset, which is also its representative (position 0).  Residue
    ``r`` at position ``h`` equals ``x^h * rep mod p``.
    """

    spec: CrcSpec
    coset_id: np.ndarray
    position: np.ndarray
    sizes: np.ndarray
    order: np.ndarray
    offsets: np.ndarray

    @property
    def n_cosets(self) -> int:
        return int(self.sizes.size)

    def coset_of(self, r: int) -> int:
        return int(self.coset_id[r])

    def position_in_coset(self, r: int) -> int:
        return int(self.position[r])

    def size_of(self, r: int) -> int:
        return int(self.sizes[self.coset_id[r]])

    def members(self, cid: int) -> list[int]:
        lo = int(self.offsets[cid])
        return [int(v) for v in self.order[lo : lo + int(self.sizes[cid])]]

    def cosets(self) -> list[list[int]]:
        return [self.members(c) for c in range(self.n_cosets)]

    def shift(self, r, h):
        """``x^h * r mod p`` for residues (and exponents) given as arrays or ints."""
        r = np.asarray(r, dtype=np.int64)
        cid = self.coset_id[r]
        size = self.sizes[cid]
        idx = self.offsets[cid] + (self.position[r] + np.asarray(h, dtype=np.int64)) % size
        out = self.order[idx]
        return int(out) if out.ndim == 0 else out


def _times_x(residues: np.ndarray, p: int, m: int) -> np.ndarray:
    r = residues << 1
    return np.where(r >> m & 1, r ^ p, r)


def build_cosets(spec: CrcSpec) -> CosetTable:
    """Walk ``r -> x r mod p`` from each unvisited residue in increasing order."""
    m, p = spec.degree, spec.value
    size = 1 << m
    succ = _times_x(np.arange(size, dtype=np.int64), p, m)
    coset_id = np.full(size, -1, dtype=np.int64)
    position = np.zeros(size, dtype=np.int64)
    order = np.empty(size, dtype=np.int64)
    sizes, offsets = [], []
    filled = 0
    succ_l = succ.tolist()
    cid_l = coset_id.tolist()
    pos_l = position.tolist()
    for start in range(size):
        if cid_l[start] >= 0:
            continue
        cid = len(sizes)
        offsets.append(filled)
        r, h = start, 0
        while cid_l[r] < 0:
            cid_l[r] = cid
            pos_l[r] = h
            order[filled + h] = r
            h += 1
            r = succ_l[r]
        if r != start:
            raise ArithmeticError("multiplication by x is not a permutation; p(0) must be 1")
        sizes.append(h)
        filled += h
    return CosetTable(
        spec,
        np.array(cid_l, dtype=np.int64),
        np.array(pos_l, dtype=np.int64),
        np.array(sizes, dtype=np.int64),
        order,
        np.array(offsets, dtype=np.int64),
    )


@dataclass
class UndetectableTally:
    """Undetectable placements per total distance, split by tuple order."""

    singles: dict[int, int] = field(default_factory=dict)
    doubles: dict[int, int] = field(default_factory=dict)
    higher: dict[int, int] = field(default_factory=dict)

    def total(self, d: int) -> int:
        return self.singles.get(d, 0) + self.doubles.get(d, 0) + self.higher.get(d, 0)

    def totals(self) -> dict[int, int]:
        ds = set(self.singles) | set(self.doubles) | set(self.higher)
        return {d: self.total(d) for d in sorted(ds) if self.total(d)}

    @property
    def d_min(self) -> int | None:
        t = self.totals()
        return min(t) if t else None


def placements_with_period(A, c):
    """``sum_{t >= 0, A - c t >= 1} (A - c t)``, elementwise; zero where ``A < 1``.

    ``A`` is the number of offsets left for the shortest arrangement and
    ``c`` the period at which longer arrangements recur.
    """
    A = np.asarray(A, dtype=np.int64)
    c = np.asarray(c, dtype=np.int64)
    T = np.where(A > 0, (A - 1) // c, -1)
    return np.where(A > 0, (T + 1) * A - c * T * (T + 1) // 2, 0)


def _add(tally: dict[int, int], d: int, v: int):
    if v:
        tally[int(d)] = tally.get(int(d), 0) + int(v)


def undetectable_singles(spectrum: Spectrum, spec: CrcSpec, n: int, residues: np.ndarray | None = None) -> dict[int, int]:
    """``d -> sum over divisible events of max(0, n + nu - l + 1)``."""
    if residues is None:
        residues = spectrum.residues(spec.value)
    frame = n + spectrum.code.memory
    div = residues == 0
    out: dict[int, int] = {}
    if not div.any():
        return out
    place = np.maximum(0, frame - spectrum.lengths[div] + 1)
    ds = spectrum.distances[div]
    for d in np.unique(ds):
        _add(out, d, int(place[ds == d].sum()))
    return out


def find_gap(e1: ErrorEvent, e2: ErrorEvent, table: CosetTable) -> int | None:
    """Smallest gap ``g1'`` making ``x^(g1'+l2) e1 + e2`` divisible, or ``None``.

    Every other admissible gap is ``g1' + u |C|``.
    """
    p = table.spec.value
    r1 = _mod(int(e1.pattern), p)
    r2 = _mod(int(e2.pattern), p)
    if r1 == 0 or r2 == 0:
        raise ValueError("find_gap needs two detectable events")
    if table.coset_id[r1] != table.coset_id[r2]:
        return None
    c = int(table.sizes[table.coset_id[r1]])
    return int((table.position[r2] - table.position[r1] - e2.length) % c)


def undetectable_doubles(
    spectrum: Spectrum,
    spec: CrcSpec,
    table: CosetTable,
    n: int,
    depth: int,
    residues: np.ndarray | None = None,
    block: int = 4_000_000,
) -> dict[int, int]:
    """Placements of undetectable position-ordered pairs with ``d1 + d2 <= depth``.

    ``e1`` must be detectable (otherwise the pair splits into two
    undetectable parts); ``e2`` then is automatically.
    """
    if residues is None:
        residues = spectrum.residues(spec.value)
    d_free = spectrum.d_free
    out: dict[int, int] = {}
    if d_free is None or depth < 2 * d_free:
        return out
    frame = n + spectrum.code.memory
    keep = (residues != 0) & (spectrum.distances <= depth - d_free) & (spectrum.lengths <= frame)
    d_all = spectrum.distances[keep]
    l_all = spectrum.lengths[keep]
    r_all = residues[keep]
    cid_all = table.coset_id[r_all]
    pos_all = table.position[r_all]
    size_all = table.sizes[cid_all]
    dvals = np.unique(d_all)
    groups = {int(d): np.flatnonzero(d_all == d) for d in dvals}
    for d1, i1 in groups.items():
        for d2, i2 in groups.items():
            if d1 + d2 > depth:
                continue
            total = 0
            step = max(1, block // max(1, i2.size))
            for lo in range(0, i1.size, step):
                a = i1[lo : lo + step][:, None]
                b = i2[None, :]
                same = cid_all[a] == cid_all[b]
                c = size_all[a]
                g = (pos_all[b] - pos_all[a] - l_all[b]) % c
                A = frame - l_all[a] - l_all[b] - g + 1
                total += int(np.where(same, placements_with_period(A, c), 0).sum())
            _add(out, d1 + d2, total)
    return out


def _comb(arr: np.ndarray, shift: int, period: int) -> np.ndarray:
    """Counts moved by ``shift + t*period`` for every ``t >= 0`` (truncated)."""
    F = arr.size
    out = np.zeros(F, dtype=np.int64)
    if shift >= F:
        return out
    out[shift:] = arr[: F - shift]
    pad = (-F) % period
    z = np.concatenate([out, np.zeros(pad, dtype=np.int64)]).reshape(-1, period)
    return np.cumsum(z, axis=0).reshape(-1)[:F]


def undetectable_tuples(
    spectrum: Spectrum,
    spec: CrcSpec,
    table: CosetTable,
    n: int,
    depth: int,
    s_min: int = 3,
    s_max: int | None = None,
    residues: np.ndarray | None = None,
    work_limit: int = 300_000_000,
) -> dict[int, dict[int, int]]:
    """``s -> d -> placements`` for undetectable ``s``-tuples, ``s_min <= s <= s_max``.

    Dynamic program over the running prefix ``(residue, distance)`` with a
    length histogram; the gap before each event is summed by residue class
    modulo the coset size.  Exact but costly, so it is meant for the
    regime ``depth >= 3 d_free``, which is small in practice.
    """
    if residues is None:
        residues = spectrum.residues(spec.value)
    d_free = spectrum.d_free
    out: dict[int, dict[int, int]] = {}
    if d_free is None:
        return out
    if s_max is None:
        s_max = depth // d_free
    frame = n + spectrum.code.memory
    F = frame + 1
    keep = (spectrum.distances <= depth - d_free) & (spectrum.lengths <= frame)
    ev = list(zip(residues[keep].tolist(), spectrum.lengths[keep].tolist(), spectrum.distances[keep].tolist()))
    state: dict[tuple[int, int], np.ndarray] = {}
    for r, l, d in ev:
        if r:
            state.setdefault((r, d), np.zeros(F, dtype=np.int64))[l] += 1
    placements = frame + 1 - np.arange(F, dtype=np.int64)
    work = 0
    for s in range(2, s_max + 1):
        nxt: dict[tuple[int, int], np.ndarray] = {}
        for (R, D), arr in state.items():
            c = table.size_of(R)
            for r, l, d in ev:
                Dn = D + d
                if Dn > depth:
                    continue
                last_ok = s >= s_min
                more_ok = s < s_max and Dn + d_free <= depth
                if not (last_ok or more_ok):
                    continue
                work += c * F
                if work > work_limit:
                    raise SearchBudgetError("tuple enumeration exceeded its work limit; lower the depth")
                for j in range(c):
                    Rn = table.shift(R, j + l) ^ r
                    if Rn == 0 and not last_ok:
                        continue
                    if Rn != 0 and not more_ok:
                        continue
                    moved = _comb(arr, l + j, c)
                    if Rn == 0:
                        v = int((moved * placements).sum())
                        if v:
                            bucket = out.setdefault(s, {})
                            bucket[Dn] = bucket.get(Dn, 0) + v
                    elif moved.any():
                        key = (Rn, Dn)
                        if key in nxt:
                            nxt[key] += moved
                        else:
                            nxt[key] = moved
        state = nxt
        if not state:
            break
    return out


def exclusion_tally(
    spectrum: Spectrum, spec: CrcSpec, k: int, depth: int | None = None, table: CosetTable | None = None
) -> UndetectableTally:
    """All undetectable placements with total distance ``<= depth``.

    ``spectrum`` must carry patterns to ``depth`` (to ``depth - d_free``
    suffices for the tuple part, singles need all of it).
    """
    if depth is None:
        depth = spectrum.depth
    if depth > spectrum.depth:
        raise ValueError(f"spectrum only reaches distance {spectrum.depth}")
    n = k + spec.degree
    residues = spectrum.residues(spec.value)
    table = table or build_cosets(spec)
    tally = UndetectableTally()
    tally.singles = {d: c for d, c in undetectable_singles(spectrum, spec, n, residues).items() if d <= depth}
    tally.doubles = undetectable_doubles(spectrum, spec, table, n, depth, residues)
    d_free = spectrum.d_free
    if d_free is not None and depth >= 3 * d_free:
        for by_d in undetectable_tuples(spectrum, spec, table, n, depth, 3, residues=residues).values():
            for d, c in by_d.items():
                _add(tally.higher, d, c)
    return tally


def pud_bound_exclusion(
    code: ConvCode,
    spec: CrcSpec,
    k: int,
    snrs,
    depth: int,
    spectrum: Spectrum | None = None,
    ten_terms: bool = False,
    optimistic: bool = False,
    snr_convention: str | None = None,
    pairwise: str = "exact",
) -> BoundReport:
    """Union bound on the undetected-error probability from the code's own events."""
    if isinstance(snrs, SnrPoint):
        snrs = [snrs]
    n = k + spec.degree
    if spectrum is None or not spectrum.patterns_recorded or spectrum.depth < depth:
        spectrum = search_events(code, depth, record_patterns=True, max_length=n + code.memory)
    elif spectrum.depth > depth:
        spectrum = spectrum.truncated(depth)
    tally = exclusion_tally(spectrum, spec, k, depth)
    report = BoundReport(
        method="exclusion",
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
        code, spectrum.counts(), code.free_distance, depth, n, list(snrs), tally.singles, tally.doubles, tally.higher,
        ten_terms=ten_terms, optimistic=optimistic, pairwise=pairwise,
    )
    return report
