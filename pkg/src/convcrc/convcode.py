"""Feedforward rate-1/N convolutional codes.

Generators are kept in the x-convention: the highest-degree coefficient of
each generator taps the most recent encoder input.  With that convention
the integer value of an x-convention generator coincides with the usual
octal literal, e.g. ``0o23`` is ``x^4 + x + 1``, the same code written
``1 + D^3 + D^4`` in D-notation.

Trellis states are integers holding the last ``memory`` inputs, most
recent input in bit 0.  A *window* is ``(state << 1) | input``: bit ``j``
of a window is the input ``j`` steps ago, and every branch output is a
parity of the window masked by the D-notation tap word.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .gf2poly import Gf2Poly, _gcd, _divmod, _reverse

__all__ = ["ConvCode", "from_octal", "parse_octal_list", "encode", "step", "reduce_feedback", "parity"]


def parity(a: np.ndarray) -> np.ndarray:
    """Bitwise parity of an integer array."""
    return (np.bitwise_count(a) & 1).astype(np.uint8)


@dataclass(frozen=True)
class ConvCode:
    """Rate ``1/N`` feedforward encoder with ``memory`` delay elements."""

    generators: tuple[int, ...]
    memory: int

    def __post_init__(self):
        gens = tuple(int(Gf2Poly(g)) for g in self.generators)
        object.__setattr__(self, "generators", gens)
        if len(gens) < 2:
            raise ValueError("need at least two generators (rate 1/N with N >= 2)")
        if self.memory < 0:
            raise ValueError("memory must be non-negative")
        for g in gens:
            if g.bit_length() > self.memory + 1:
                raise ValueError(f"generator {g:o} is wider than memory {self.memory} allows")
        if not any((g >> self.memory) & 1 for g in gens):
            raise ValueError("no generator taps the current input; memory is overstated")
        if not any(g & 1 for g in gens):
            raise ValueError("no generator taps the oldest input; memory is overstated")

    @property
    def n_outputs(self) -> int:
        return len(self.generators)

    @property
    def n_states(self) -> int:
        return 1 << self.memory

    @property
    def state_mask(self) -> int:
        return (1 << self.memory) - 1

    @property
    def generator_polys(self) -> list[Gf2Poly]:
        return [Gf2Poly(g) for g in self.generators]

    @cached_property
    def taps(self) -> tuple[int, ...]:
        """D-notation tap words (bit ``j`` multiplies the input ``j`` steps ago)."""
        return tuple(_reverse(g, self.memory + 1) for g in self.generators)

    def octal(self) -> str:
        return ",".join(format(g, "o") for g in self.generators)

    def __str__(self):
        return f"({self.octal()})_8 nu={self.memory}"

    # -- vectorised trellis helpers -------------------------------------

    def window_outputs(self, windows: np.ndarray) -> np.ndarray:
        """Output bits for an array of windows, shape ``windows.shape + (N,)``."""
        w = np.asarray(windows, dtype=np.int64)
        return np.stack([parity(w & t) for t in self.taps], axis=-1)

    def window_weight(self, windows: np.ndarray) -> np.ndarray:
        w = np.asarray(windows, dtype=np.int64)
        out = np.zeros(w.shape, dtype=np.int64)
        for t in self.taps:
            out += parity(w & t)
        return out

    @cached_property
    def branch_table(self) -> tuple[np.ndarray, np.ndarray]:
        """``(next_state, weight)`` arrays of shape ``(n_states, 2)``."""
        s = np.arange(self.n_states, dtype=np.int64)[:, None]
        w = (s << 1) | np.array([[0, 1]], dtype=np.int64)
        return w & self.state_mask, self.window_weight(w)

    @cached_property
    def min_weight_to_zero(self) -> np.ndarray:
        """Smallest output weight needed to reach state 0 moving forward in time."""
        return self._dijkstra(forward=True)

    @cached_property
    def min_weight_from_zero(self) -> np.ndarray:
        """Smallest output weight of a path from state 0 to each state."""
        return self._dijkstra(forward=False)

    @cached_property
    def free_distance(self) -> int:
        """Smallest output weight of a path that leaves state 0 and returns."""
        ns, wt = self.branch_table
        return int(wt[0, 1] + self.min_weight_to_zero[ns[0, 1]])

    @property
    def is_catastrophic(self) -> bool:
        """Feedforward codes are catastrophic iff the generators share a factor other than x^k."""
        g = 0
        for c in self.generators:
            g = _gcd(g, c)
        while g and not g & 1:
            g >>= 1
        return g != 1

    def _dijkstra(self, forward: bool) -> np.ndarray:
        # forward=True: distance from each state to 0 (search on reversed edges)
        ns, wt = self.branch_table
        n = self.n_states
        edges = [[] for _ in range(n)]
        for s in range(n):
            for b in (0, 1):
                t, c = int(ns[s, b]), int(wt[s, b])
                if forward:
                    edges[t].append((s, c))
                else:
                    edges[s].append((t, c))
        dist = np.full(n, np.iinfo(np.int64).max, dtype=np.int64)
        dist[0] = 0
        heap = [(0, 0)]
        while heap:
            d, u = heapq.heappop(heap)
            if d > dist[u]:
                continue
            for v, c in edges[u]:
                if d + c < dist[v]:
                    dist[v] = d + c
                    heapq.heappush(heap, (d + c, v))
        return dist


def parse_octal_list(text: str) -> list[int]:
    """``"133,171"`` -> ``[0o133, 0o171]``."""
    out = []
    for tok in text.replace(" ", "").split(","):
        if not tok:
            continue
        if any(ch not in "01234567" for ch in tok):
            raise ValueError(f"{tok!r} is not an octal literal")
        out.append(int(tok, 8))
    if not out:
        raise ValueError("no generators given")
    return out


def from_octal(generators, memory: int | None = None) -> ConvCode:
    """Build a code from octal generator literals.

    The most significant bit of each ``memory+1``-bit literal is the tap on
    the current input.  ``generators`` may be a list of integers already
    parsed from octal or a string such as ``"133,171"``.
    """
    if isinstance(generators, str):
        generators = parse_octal_list(generators)
    gens = [int(g) for g in generators]
    if memory is None:
        memory = max(g.bit_length() for g in gens) - 1
    for g in gens:
        if g.bit_length() > memory + 1:
            raise ValueError(f"octal literal {g:o} is wider than {memory + 1} bits")
    return ConvCode(tuple(gens), memory)


def step(code: ConvCode, state: int, bit: int) -> tuple[int, tuple[int, ...]]:
    """One trellis transition: ``(next_state, output_bits)``."""
    if not 0 <= state < code.n_states:
        raise ValueError("state out of range")
    w = (state << 1) | (bit & 1)
    out = tuple((w & t).bit_count() & 1 for t in code.taps)
    return w & code.state_mask, out


def encode(code: ConvCode, bits) -> np.ndarray:
    """Terminated encoding; ``memory`` zeros are appended to the input.

    Output is interleaved per trellis stage, first stage first, length
    ``N * (len(bits) + memory)``.
    """
    u = np.concatenate([np.asarray(bits, dtype=np.int64) & 1, np.zeros(code.memory, dtype=np.int64)])
    L = len(u)
    # window at stage t holds u[t - j] at bit j
    windows = np.zeros(L, dtype=np.int64)
    for j in range(code.memory + 1):
        windows[j:] |= u[: L - j] << j
    out = code.window_outputs(windows).reshape(-1)
    assert L == 0 or int(windows[-1]) & code.state_mask == 0
    return out.astype(np.uint8)


def reduce_feedback(p, c_fb) -> Gf2Poly:
    """CRC that a feedback code ``c(x)/c_fb(x)`` presents to its feedforward twin.

    Message errors of the feedback decoder are ``t(x) c_fb(x)``, and
    ``p | t c_fb`` iff ``p / gcd(p, c_fb) | t``.
    """
    p, c = Gf2Poly(p).value, Gf2Poly(c_fb).value
    if p == 0 or c == 0:
        raise ValueError("p and c_fb must be nonzero")
    q, r = _divmod(p, _gcd(p, c))
    assert r == 0
    return Gf2Poly(q)
