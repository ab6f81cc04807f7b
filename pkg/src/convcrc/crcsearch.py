"""Search for the degree-m CRC with the fewest undetectable errors.

Rounds run over distance ``d = d_free, d_free + 1, ...``.  Each round
tallies the undetectable placements at exactly ``d`` for every surviving
candidate and keeps the minimal ones.  Singles come from one shared event
spectrum filtered by divisibility; from ``d = 2 d_free`` on, doubles are
added through the coset gap rule.  Tuples of three or more are never
tallied here.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ._frontier import SearchBudgetError
from .convcode import ConvCode
from .crc import CrcSpec
from .eventsearch import Spectrum, pattern_residues, search_events
from .exclusion import build_cosets, undetectable_doubles

__all__ = [
    "SearchConfig",
    "SearchRound",
    "SearchAudit",
    "CrcSearchBudgetError",
    "enumerate_candidates",
    "search_best_crc",
    "good_crc_over_lengths",
    "LengthReport",
]

TIE_BREAKS = ("smallest-value",)
# "hybrid": singles-only rounds rank by the number of undetectable events
# (a_d^ZZ), rounds with doubles by placements.  "placements": placements throughout.
GRANULARITIES = ("hybrid", "placements")


@dataclass
class SearchConfig:
    degree: int
    code: ConvCode
    k: int
    max_distance: int | None = None
    tie_break: str = "smallest-value"
    threads: int = 1
    max_nodes: int = 60_000_000
    granularity: str = "hybrid"

    def __post_init__(self):
        if self.degree < 2:
            raise ValueError("CRC degree must be >= 2")
        if self.degree > 20:
            raise ValueError("CRC degree above 20 is outside the practical range")
        if self.k < 1:
            raise ValueError("information length must be positive")
        if self.tie_break not in TIE_BREAKS:
            raise ValueError(f"unknown tie_break {self.tie_break!r}")
        if self.granularity not in GRANULARITIES:
            raise ValueError(f"unknown granularity {self.granularity!r}")
        d_free = self.code.free_distance
        if self.max_distance is None:
            self.max_distance = 3 * d_free - 1
        if self.max_distance < d_free:
            raise ValueError("max_distance must be >= d_free")

    @property
    def n(self) -> int:
        return self.k + self.degree


@dataclass
class SearchRound:
    d: int
    with_doubles: bool
    tallies: dict[int, int]
    survivors: list[int]
    unit: str = "placements"

    def as_dict(self, degree: int) -> dict:
        hx = lambda v: CrcSpec(v).hex()  # noqa: E731
        return {
            "d": self.d,
            "counting": "singles+doubles" if self.with_doubles else "singles",
            "unit": self.unit,
            "candidates": len(self.tallies),
            "min_tally": min(self.tallies.values()) if self.tallies else None,
            "survivors": {hx(v): self.tallies[v] for v in self.survivors},
        }


@dataclass
class SearchAudit:
    degree: int
    code: str
    k: int
    max_distance: int
    granularity: str = "hybrid"
    rounds: list[SearchRound] = field(default_factory=list)
    winner: int | None = None
    tie_broken: bool = False
    complete: bool = True

    @property
    def winner_spec(self) -> CrcSpec | None:
        return None if self.winner is None else CrcSpec(self.winner)

    def profile(self, value: int) -> dict[int, int]:
        """Tallies of one candidate over the rounds it took part in."""
        return {r.d: r.tallies[value] for r in self.rounds if value in r.tallies}

    def to_dict(self) -> dict:
        return {
            "schema": "convcrc.crc-search/1",
            "degree": self.degree,
            "code": self.code,
            "k": self.k,
            "max_distance": self.max_distance,
            "granularity": self.granularity,
            "complete": self.complete,
            "winner": None if self.winner is None else CrcSpec(self.winner).hex(),
            "tie_broken": self.tie_broken,
            "rounds": [r.as_dict(self.degree) for r in self.rounds],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True)


class CrcSearchBudgetError(SearchBudgetError):
    """The event search ran out of budget; ``audit`` holds the rounds finished so far."""

    def __init__(self, msg: str, audit: SearchAudit):
        super().__init__(msg)
        self.audit = audit


def enumerate_candidates(m: int) -> list[CrcSpec]:
    """All ``2^(m-1)`` generators of degree ``m`` with a unit constant term."""
    if m < 1:
        raise ValueError("degree must be >= 1")
    top = 1 << m
    return [CrcSpec(top | (mid << 1) | 1) for mid in range(1 << (m - 1))]


class _SharedEvents:
    """The code's event spectrum, deepened on demand."""

    def __init__(self, code: ConvCode, frame: int, depth: int, max_nodes: int):
        self.code = code
        self.frame = frame
        self.max_nodes = max_nodes
        self.spectrum: Spectrum | None = None
        self.ensure(depth)

    def ensure(self, depth: int):
        if self.spectrum is not None and self.spectrum.depth >= depth:
            return
        self.spectrum = search_events(
            self.code, depth, record_patterns=True, max_length=self.frame, max_nodes=self.max_nodes
        )

    def bounds(self, d: int) -> tuple[int, int]:
        lo, hi = np.searchsorted(self.spectrum.distances, [d, d + 1])
        return int(lo), int(hi)

    def residues(self, p: int, lo: int, hi: int) -> np.ndarray:
        """Residues mod ``p`` of events ``lo:hi``."""
        return pattern_residues(self.spectrum.pattern_bytes[lo:hi], p)


def _tally_at(ev: _SharedEvents, p: int, d: int, with_doubles: bool, d_free: int, n: int, events: bool = False) -> int:
    """Undetectable placements at exactly ``d``; with ``events`` the number of undetectable single events."""
    sp = ev.spectrum
    lo, hi = ev.bounds(d)
    div = ev.residues(p, lo, hi) == 0
    if events:
        return int(div.sum())
    total = int(np.maximum(0, ev.frame - sp.lengths[lo:hi][div] + 1).sum())
    if with_doubles:
        short = sp.truncated(d - d_free)
        spec = CrcSpec(p)
        res = ev.residues(p, 0, short.n_events)
        total += undetectable_doubles(short, spec, build_cosets(spec), n, d, res).get(d, 0)
    return total


def _pair_possible(counts: dict[int, int], d: int) -> bool:
    return any(counts.get(d1, 0) and counts.get(d - d1, 0) for d1 in counts)


def search_best_crc(cfg: SearchConfig, candidates: list[CrcSpec] | None = None) -> tuple[CrcSpec, SearchAudit]:
    """Run the elimination rounds; see the module docstring."""
    code = cfg.code
    d_free = code.free_distance
    frame = cfg.n + code.memory
    audit = SearchAudit(cfg.degree, code.octal(), cfg.k, cfg.max_distance, cfg.granularity)
    if candidates is None:
        candidates = enumerate_candidates(cfg.degree)
    survivors = sorted({c.value for c in candidates})
    if any(CrcSpec(v).degree != cfg.degree for v in survivors):
        raise ValueError("all candidates must have the configured degree")
    try:
        ev = _SharedEvents(code, frame, min(cfg.max_distance, d_free + 6), cfg.max_nodes)
    except SearchBudgetError as exc:
        audit.complete = False
        raise CrcSearchBudgetError(str(exc), audit) from exc
    pool = ThreadPoolExecutor(cfg.threads) if cfg.threads > 1 else None
    try:
        for d in range(d_free, cfg.max_distance + 1):
            if len(survivors) == 1:
                break
            try:
                ev.ensure(d)
            except SearchBudgetError as exc:
                audit.complete = False
                raise CrcSearchBudgetError(str(exc), audit) from exc
            with_doubles = d >= 2 * d_free
            counts = ev.spectrum.counts()
            # distances the spectrum cannot produce do not separate anyone
            if not counts.get(d, 0) and not (with_doubles and _pair_possible(counts, d)):
                continue
            by_events = cfg.granularity == "hybrid" and not with_doubles
            work = lambda p: _tally_at(ev, p, d, with_doubles, d_free, cfg.n, by_events)  # noqa: E731
            vals = list(pool.map(work, survivors)) if pool else [work(p) for p in survivors]
            tallies = dict(zip(survivors, vals))
            best = min(vals)
            survivors = [p for p in survivors if tallies[p] == best]
            audit.rounds.append(SearchRound(d, with_doubles, tallies, list(survivors), "events" if by_events else "placements"))
    finally:
        if pool:
            pool.shutdown()
    audit.tie_broken = len(survivors) > 1
    audit.winner = min(survivors)
    return CrcSpec(audit.winner), audit


@dataclass
class LengthReport:
    """Per-length winners of one degree and the polynomials that are good over all lengths."""

    degree: int
    lengths: list[int]
    winners: dict[int, int]
    profiles: dict[int, dict[int, tuple[int | None, int]]]
    good: list[int]
    audits: dict[int, SearchAudit]

    def to_dict(self) -> dict:
        hx = lambda v: CrcSpec(v).hex()  # noqa: E731
        return {
            "schema": "convcrc.crc-lengths/1",
            "degree": self.degree,
            "lengths": list(self.lengths),
            "best": {str(k): hx(v) for k, v in sorted(self.winners.items())},
            "table": {
                hx(v): {str(k): {"d_min": dm, "count": c} for k, (dm, c) in sorted(prof.items())}
                for v, prof in sorted(self.profiles.items())
            },
            "good": [hx(v) for v in self.good],
            "searches": {str(k): a.to_dict() for k, a in sorted(self.audits.items())},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True)


def _first_nonzero(ev: _SharedEvents, p: int, n: int, cap: int) -> tuple[int | None, int]:
    """``(d_min, count)`` of singles+doubles for one polynomial; ``(None, 0)`` if clean up to ``cap``."""
    d_free = ev.code.free_distance
    for d in range(d_free, cap + 1):
        if d > ev.spectrum.depth:
            ev.ensure(d)
        c = _tally_at(ev, p, d, d >= 2 * d_free, d_free, n)
        if c:
            return d, c
    return None, 0


def good_crc_over_lengths(cfg: SearchConfig, lengths: list[int]) -> LengthReport:
    """Best polynomial per length, then mark as good those reaching the largest ``d_min`` at every length.

    Lengths are processed from the longest down, following the rule that
    the design starts at the longest ``k``.
    """
    if not lengths:
        raise ValueError("need at least one information length")
    lengths = sorted(set(int(k) for k in lengths), reverse=True)
    winners, audits = {}, {}
    for k in lengths:
        sub = SearchConfig(
            cfg.degree, cfg.code, k, cfg.max_distance, cfg.tie_break, cfg.threads, cfg.max_nodes, cfg.granularity
        )
        w, audits[k] = search_best_crc(sub)
        winners[k] = w.value
    profiles: dict[int, dict[int, tuple[int | None, int]]] = {}
    for k in lengths:
        n = k + cfg.degree
        ev = _SharedEvents(cfg.code, n + cfg.code.memory, cfg.code.free_distance + 6, cfg.max_nodes)
        for p in sorted(set(winners.values())):
            profiles.setdefault(p, {})[k] = _first_nonzero(ev, p, n, cfg.max_distance)
    rank = lambda dm: float("inf") if dm is None else dm  # noqa: E731
    best_dmin = {k: max(rank(profiles[p][k][0]) for p in profiles) for k in lengths}
    good = [p for p in sorted(profiles) if all(rank(profiles[p][k][0]) == best_dmin[k] for k in lengths)]
    return LengthReport(cfg.degree, sorted(lengths), winners, profiles, good, audits)
