"""Level-synchronous trellis path enumeration shared by the searches.

Both engines walk a trellis one stage at a time from a set of starting
branches, prune any path whose accumulated weight plus a lower bound on the
weight still needed exceeds ``dmax``, and stop a path when it reaches an
absorbing state.  The tree explored is the same one a depth-first
branch-and-bound would explore; doing it breadth-first lets numpy process a
whole stage at once.

``count_paths`` merges paths that share ``(state, weight)`` and so only
reports counts.  ``enumerate_paths`` keeps every path distinct and records
parent pointers so the input sequences can be rebuilt afterwards.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

StepFn = Callable[[np.ndarray], list[tuple[np.ndarray, np.ndarray]]]
AbsorbFn = Callable[[np.ndarray], np.ndarray]
BoundFn = Callable[[np.ndarray], np.ndarray]


class SearchBudgetError(RuntimeError):
    """Raised when a search would exceed its configured node or event budget."""


@dataclass
class Frontier:
    states: np.ndarray
    weights: np.ndarray
    counts: np.ndarray


def _reduce_by_key(keys: np.ndarray, counts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    if keys.size == 0:
        return keys, counts
    order = np.argsort(keys, kind="stable")
    k = keys[order]
    c = counts[order]
    starts = np.flatnonzero(np.concatenate(([True], k[1:] != k[:-1])))
    return k[starts], np.add.reduceat(c, starts)


def count_paths(
    start_states: np.ndarray,
    start_weights: np.ndarray,
    step: StepFn,
    absorb: AbsorbFn,
    bound: BoundFn,
    dmax: int,
    max_length: int | None = None,
    max_frontier: int = 20_000_000,
) -> np.ndarray:
    """Count absorbed paths by ``(category, weight, length)``.

    Starting entries are paths of length one.  ``absorb`` maps states to a
    category id (``-1`` keeps the path alive).  Returns an ``(K, 4)`` int64
    array of rows ``(category, weight, length, count)`` sorted by the first
    three columns.
    """
    W = dmax + 1
    S = np.asarray(start_states, dtype=np.int64)
    Wt = np.asarray(start_weights, dtype=np.int64)
    C = np.ones(S.shape, dtype=np.int64)
    records = []
    length = 1
    while S.size:
        cat = absorb(S)
        keep = Wt + bound(S) <= dmax
        hit = keep & (cat >= 0)
        if hit.any():
            records.append(np.stack([cat[hit], Wt[hit], np.full(int(hit.sum()), length), C[hit]], axis=1))
        alive = keep & (cat < 0)
        S, Wt, C = S[alive], Wt[alive], C[alive]
        if max_length is not None and length >= max_length:
            break
        if not S.size:
            break
        nxt_s, nxt_w, nxt_c = [], [], []
        for s2, w2 in step(S):
            nxt_s.append(s2)
            nxt_w.append(Wt + w2)
            nxt_c.append(C)
        S = np.concatenate(nxt_s)
        Wt = np.concatenate(nxt_w)
        C = np.concatenate(nxt_c)
        m = Wt <= dmax
        S, Wt, C = S[m], Wt[m], C[m]
        keys, C = _reduce_by_key(S * W + Wt, C)
        S, Wt = keys // W, keys % W
        if S.size > max_frontier:
            raise SearchBudgetError(f"frontier of {S.size} entries exceeds budget {max_frontier}")
        length += 1
    if not records:
        return np.zeros((0, 4), dtype=np.int64)
    rec = np.concatenate(records)
    # (category, weight, length) -> count
    span_w, span_l = W, int(rec[:, 2].max()) + 1
    keys = (rec[:, 0] * span_w + rec[:, 1]) * span_l + rec[:, 2]
    keys, counts = _reduce_by_key(keys, rec[:, 3])
    out = np.empty((keys.size, 4), dtype=np.int64)
    out[:, 2] = keys % span_l
    rest = keys // span_l
    out[:, 1] = rest % span_w
    out[:, 0] = rest // span_w
    out[:, 3] = counts
    return out


@dataclass
class PathSet:
    """Absorbed paths: per path weight, length, category and input bits.

    ``bits`` is a ``(P, max_len)`` uint8 matrix, right-aligned, so row ``i``
    read left to right with leading zeros is the input sequence of path
    ``i``, first input first.
    """

    weights: np.ndarray
    lengths: np.ndarray
    categories: np.ndarray
    bits: np.ndarray


def enumerate_paths(
    start_state: int,
    start_bit: int,
    start_weight: int,
    step: StepFn,
    absorb: AbsorbFn,
    bound: BoundFn,
    dmax: int,
    max_length: int | None = None,
    max_nodes: int = 60_000_000,
) -> PathSet:
    """Enumerate every absorbed path individually (no merging)."""
    parents: list[np.ndarray] = [np.array([-1], dtype=np.int64)]
    in_bits: list[np.ndarray] = [np.array([start_bit], dtype=np.uint8)]
    S = np.array([start_state], dtype=np.int64)
    Wt = np.array([start_weight], dtype=np.int64)
    idx = np.array([0], dtype=np.int64)
    ev_level, ev_idx, ev_w, ev_cat = [], [], [], []
    n_nodes = 1
    level = 0
    while S.size:
        cat = absorb(S)
        keep = Wt + bound(S) <= dmax
        hit = keep & (cat >= 0)
        if hit.any():
            ev_level.append(np.full(int(hit.sum()), level))
            ev_idx.append(idx[hit])
            ev_w.append(Wt[hit])
            ev_cat.append(cat[hit])
        alive = keep & (cat < 0)
        S, Wt, idx = S[alive], Wt[alive], idx[alive]
        if not S.size or (max_length is not None and level + 1 >= max_length):
            break
        ns, nw, npar, nbit = [], [], [], []
        for b, (s2, w2) in enumerate(step(S)):
            ns.append(s2)
            nw.append(Wt + w2)
            npar.append(idx)
            nbit.append(np.full(S.size, b, dtype=np.uint8))
        S = np.concatenate(ns)
        Wt = np.concatenate(nw)
        par = np.concatenate(npar)
        bit = np.concatenate(nbit)
        m = Wt <= dmax
        S, Wt, par, bit = S[m], Wt[m], par[m], bit[m]
        parents.append(par)
        in_bits.append(bit)
        idx = np.arange(S.size, dtype=np.int64)
        n_nodes += S.size
        if n_nodes > max_nodes:
            raise SearchBudgetError(
                f"path search exceeded {max_nodes} trellis nodes; reduce depth or disable patterns"
            )
        level += 1
    if not ev_level:
        z = np.zeros(0, dtype=np.int64)
        return PathSet(z, z, z, np.zeros((0, 0), dtype=np.uint8))
    lv = np.concatenate(ev_level)
    ix = np.concatenate(ev_idx)
    weights = np.concatenate(ev_w)
    cats = np.concatenate(ev_cat)
    lengths = lv + 1
    max_len = int(lengths.max())
    bits = np.zeros((lv.size, max_len), dtype=np.uint8)
    for L in np.unique(lengths):
        sel = np.flatnonzero(lengths == L)
        cur = ix[sel]
        # column of level j for a length-L path, right-aligned
        for j in range(L - 1, -1, -1):
            bits[sel, max_len - L + j] = in_bits[j][cur]
            cur = parents[j][cur]
    return PathSet(weights, lengths, cats, bits)
