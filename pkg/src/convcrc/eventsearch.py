"""Distance spectrum of a convolutional code by bounded trellis search.

An error event leaves the zero state once and returns once.  Its input
pattern ``e(x)`` is written with the first input bit at ``x^(l-1)`` and
includes the ``memory`` trailing zeros that drive the encoder home, so the
lowest set term is ``x^memory`` and the length ``l`` counts trellis stages.
"""

from __future__ import annotations

import json
from functools import lru_cache
from dataclasses import dataclass, field

import numpy as np

from ._frontier import SearchBudgetError, count_paths, enumerate_paths
from .convcode import ConvCode
from .gf2poly import Gf2Poly, _mod

__all__ = [
    "ErrorEvent",
    "Spectrum",
    "SearchBudgetError",
    "TransferDivergenceError",
    "search_events",
    "transfer_value",
    "transfer_remainder",
    "pattern_residues",
]


@dataclass(frozen=True)
class ErrorEvent:
    distance: int
    length: int
    pattern: Gf2Poly | None = None


def _pack_rows(bits: np.ndarray) -> np.ndarray:
    """Right-aligned bit rows -> big-endian byte rows."""
    if bits.shape[1] == 0:
        return np.zeros((bits.shape[0], 1), dtype=np.uint8)
    pad = (-bits.shape[1]) % 8
    if pad:
        bits = np.concatenate([np.zeros((bits.shape[0], pad), dtype=np.uint8), bits], axis=1)
    return np.packbits(bits, axis=1)


@lru_cache(maxsize=64)
def _byte_tables(p: int, nb: int) -> np.ndarray:
    """``tables[c, b] = (b * x^(8 (nb - 1 - c))) mod p`` for byte column ``c``."""
    xpow = np.empty(8 * nb, dtype=np.int64)
    r = 1
    for i in range(8 * nb):
        r = _mod(r, p)
        xpow[i] = r
        r <<= 1
    byte = np.arange(256, dtype=np.int64)
    tables = np.zeros((nb, 256), dtype=np.int64)
    for c in range(nb):
        j = nb - 1 - c
        for k in range(8):
            tables[c] ^= ((byte >> k) & 1) * xpow[8 * j + k]
    return tables


def pattern_residues(pattern_bytes: np.ndarray, p: int) -> np.ndarray:
    """Remainders modulo ``p`` of many patterns at once.

    ``pattern_bytes`` holds big-endian byte rows.  Each byte position gets
    a 256-entry table of ``(byte * x^(8j)) mod p``; a residue is then the
    XOR of one lookup per byte.
    """
    nrows, nb = pattern_bytes.shape
    tables = _byte_tables(int(p), nb)
    out = np.zeros(nrows, dtype=np.int64)
    for c in range(nb):
        out ^= tables[c][pattern_bytes[:, c]]
    return out


@dataclass
class Spectrum:
    """Error events of ``code`` with distance ``<= depth``.

    ``length_hist[d, l]`` is always populated.  With patterns recorded the
    per-event arrays are too, sorted by distance, then length, then pattern
    value.
    """

    code: ConvCode
    depth: int
    length_hist: np.ndarray
    patterns_recorded: bool = False
    distances: np.ndarray | None = None
    lengths: np.ndarray | None = None
    pattern_bytes: np.ndarray | None = None
    _pattern_ints: list | None = field(default=None, repr=False)

    @property
    def a(self) -> np.ndarray:
        """``a[d]`` for ``d = 0..depth``."""
        return self.length_hist.sum(axis=1)

    def count(self, d: int) -> int:
        if d < 0 or d > self.depth:
            raise IndexError(f"distance {d} outside searched range 0..{self.depth}")
        return int(self.length_hist[d].sum())

    @property
    def d_free(self) -> int | None:
        nz = np.flatnonzero(self.a)
        return int(nz[0]) if nz.size else None

    def counts(self) -> dict[int, int]:
        return {int(d): int(c) for d, c in enumerate(self.a) if c}

    @property
    def n_events(self) -> int:
        return int(self.length_hist.sum())

    @property
    def patterns(self) -> list[int]:
        if not self.patterns_recorded:
            raise ValueError("spectrum was searched without patterns")
        if self._pattern_ints is None:
            self._pattern_ints = [int.from_bytes(row.tobytes(), "big") for row in self.pattern_bytes]
        return self._pattern_ints

    def indices(self, d: int) -> np.ndarray:
        if not self.patterns_recorded:
            raise ValueError("spectrum was searched without patterns")
        lo, hi = np.searchsorted(self.distances, [d, d + 1])
        return np.arange(lo, hi)

    def events(self, d: int) -> list[ErrorEvent]:
        if self.patterns_recorded:
            pats = self.patterns
            return [
                ErrorEvent(d, int(self.lengths[i]), Gf2Poly(pats[i]))
                for i in self.indices(d)
            ]
        row = self.length_hist[d]
        return [ErrorEvent(d, int(l)) for l in np.flatnonzero(row) for _ in range(int(row[l]))]

    def residues(self, p: int) -> np.ndarray:
        """Remainder of every recorded pattern modulo ``p``."""
        if not self.patterns_recorded:
            raise ValueError("spectrum was searched without patterns")
        return pattern_residues(self.pattern_bytes, int(p))

    def truncated(self, depth: int) -> Spectrum:
        """The same spectrum restricted to distances ``<= depth``."""
        if depth > self.depth:
            raise ValueError("cannot extend a spectrum by truncation")
        hist = self.length_hist[: depth + 1].copy()
        if not self.patterns_recorded:
            return Spectrum(self.code, depth, hist)
        n = int(np.searchsorted(self.distances, depth + 1))
        ints = self._pattern_ints[:n] if self._pattern_ints is not None else None
        return Spectrum(
            self.code, depth, hist, True, self.distances[:n], self.lengths[:n], self.pattern_bytes[:n], ints
        )

    # -- serialisation ----------------------------------------------------

    def to_records(self) -> list[dict]:
        """One record per event ``{d, l, pattern}`` (hex), or per bucket."""
        if self.patterns_recorded:
            pats = self.patterns
            return [
                {"d": int(d), "l": int(l), "pattern": f"0x{pats[i]:x}"}
                for i, (d, l) in enumerate(zip(self.distances, self.lengths))
            ]
        out = []
        for d in range(self.depth + 1):
            row = self.length_hist[d]
            if row.sum():
                out.append(
                    {
                        "d": d,
                        "a_d": int(row.sum()),
                        "lengths": {str(int(l)): int(row[l]) for l in np.flatnonzero(row)},
                    }
                )
        return out

    def to_json(self) -> str:
        doc = {
            "schema": "convcrc.spectrum/1",
            "code": self.code.octal(),
            "memory": self.code.memory,
            "depth": self.depth,
            "d_free": self.d_free,
            "a_d": {str(k): v for k, v in self.counts().items()},
            "patterns_recorded": self.patterns_recorded,
            "records": self.to_records(),
        }
        return json.dumps(doc, indent=1, sort_keys=True)


def _original_step(code: ConvCode):
    ns, wt = code.branch_table

    def step(S):
        return [(ns[S, 0], wt[S, 0]), (ns[S, 1], wt[S, 1])]

    return step


def search_events(
    code: ConvCode,
    depth: int,
    record_patterns: bool = False,
    max_length: int | None = None,
    max_nodes: int = 60_000_000,
) -> Spectrum:
    """All error events of output weight ``<= depth``.

    A path is pruned as soon as its weight plus the cheapest way back to
    the zero state exceeds ``depth``.  ``max_length`` caps the number of
    trellis stages (use ``n + memory`` for a frame); ``max_nodes`` bounds
    memory when patterns are recorded and raises
    :class:`SearchBudgetError` when exceeded.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    ns, wt = code.branch_table
    minrem = code.min_weight_to_zero
    step = _original_step(code)

    def absorb(S):
        return np.where(S == 0, 0, -1)

    def bound(S):
        return minrem[S]

    s0, w0 = int(ns[0, 1]), int(wt[0, 1])
    if not record_patterns:
        rec = count_paths(np.array([s0]), np.array([w0]), step, absorb, bound, depth, max_length)
        L = int(rec[:, 2].max()) + 1 if rec.size else 1
        hist = np.zeros((depth + 1, L), dtype=np.int64)
        np.add.at(hist, (rec[:, 1], rec[:, 2]), rec[:, 3])
        return Spectrum(code, depth, hist)

    ps = enumerate_paths(s0, 1, w0, step, absorb, bound, depth, max_length, max_nodes)
    pb = _pack_rows(ps.bits)
    # sort by distance, length, then pattern value (big-endian bytes compare lexicographically)
    keys = [pb[:, c] for c in range(pb.shape[1] - 1, -1, -1)] + [ps.lengths, ps.weights]
    order = np.lexsort(keys)
    d = ps.weights[order].astype(np.int64)
    l = ps.lengths[order].astype(np.int64)
    pb = pb[order]
    L = int(l.max()) + 1 if l.size else 1
    hist = np.zeros((depth + 1, L), dtype=np.int64)
    np.add.at(hist, (d, l), 1)
    return Spectrum(code, depth, hist, True, d, l, pb)


class TransferDivergenceError(ArithmeticError):
    """The transfer-function series does not converge at this SNR."""


def _transfer_system(code: ConvCode, D: float) -> np.ndarray:
    """``v[s]``: generating function of the paths from nonzero state ``s`` to state 0 (``v[0] = 1``)."""
    ns, wt = code.branch_table
    k = code.n_states - 1
    A = np.zeros((k, k))
    b = np.zeros(k)
    for s in range(1, code.n_states):
        for bit in (0, 1):
            t, w = int(ns[s, bit]), int(wt[s, bit])
            if t == 0:
                b[s - 1] += D**w
            else:
                A[s - 1, t - 1] += D**w
    rho = max(abs(np.linalg.eigvals(A))) if k else 0.0
    if not rho < 1.0:
        raise TransferDivergenceError(f"transfer function diverges (spectral radius {rho:.4g})")
    try:
        v = np.linalg.solve(np.eye(k) - A, b)
    except np.linalg.LinAlgError as exc:
        raise TransferDivergenceError("singular transfer system") from exc
    if not np.all(np.isfinite(v)) or np.any(v < 0):
        raise TransferDivergenceError("transfer function evaluation is not finite and positive")
    return np.concatenate([[1.0], v])


def transfer_value(code: ConvCode, gamma: float, n: int = 1) -> float:
    """``n * T(D, 1)`` at ``D = exp(-gamma)``.

    ``T`` is summed over all error events by solving the linear system on
    the nonzero states: ``v(s) = sum_b D^w(s,b) * (1 if next is 0 else
    v(next))``.  Raises :class:`TransferDivergenceError` when the spectral
    radius of the state-transfer matrix reaches one.
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    D = float(np.exp(-gamma))
    v = _transfer_system(code, D)
    ns, wt = code.branch_table
    T = D ** int(wt[0, 1]) * v[int(ns[0, 1])]
    if not np.isfinite(T) or T < 0:
        raise TransferDivergenceError("transfer function evaluation is not finite and positive")
    return n * float(T)


def transfer_remainder(code: ConvCode, gamma: float, depth: int) -> float:
    """``sum_{d > depth} a_d D^d`` at ``D = exp(-gamma)``, without subtracting from ``T``.

    Path prefixes that have not yet returned to zero are tracked by
    ``(state, weight <= depth)``; the moment a branch pushes the weight past
    ``depth`` the rest of the path is summed in closed form by the transfer
    system.  Every term is positive, so the result keeps full relative
    precision where ``T - sum_{d <= depth} a_d D^d`` would cancel.
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    D = float(np.exp(-gamma))
    v = _transfer_system(code, D)
    ns, wt = code.branch_table
    S = code.n_states
    W = depth + 1
    powers = D ** np.arange(W + int(wt.max()) + 1)
    mass = np.zeros((S, W))
    out = 0.0
    s1, w1 = int(ns[0, 1]), int(wt[0, 1])
    if w1 > depth:
        return float(powers[w1] * v[s1])
    mass[s1, w1] = 1.0
    for _ in range(S * W + 1):
        if not mass.any():
            return float(out)
        nxt = np.zeros_like(mass)
        for bit in (0, 1):
            t, b = ns[:, bit], wt[:, bit]
            for s in np.flatnonzero(mass.any(axis=1)):
                if s == 0:
                    continue
                row = mass[s]
                ts, bs = int(t[s]), int(b[s])
                over = row[max(0, W - bs) :]
                if over.any():
                    ws = np.arange(max(0, W - bs), W) + bs
                    out += float((over * powers[ws]).sum() * v[ts])
                if ts != 0 and W - bs > 0:
                    nxt[ts, bs:] += row[: W - bs]
        mass = nxt
    raise TransferDivergenceError("zero-weight cycle: the code is catastrophic")
