"""Assemble per-SNR bound points from exact placement tallies."""

from __future__ import annotations

import math

from .convcode import ConvCode
from .eventsearch import TransferDivergenceError, transfer_remainder
from .probability import SnrPoint, pairwise_error_bound, pairwise_error_prob, tail_from_remainder
from .report import BoundPoint

PAIRWISE_MODES = ("exact", "dfree-bound")


def weighted(tally: dict[int, int], snr: SnrPoint, d_free: int, pairwise: str = "exact") -> float:
    """``sum_d tally[d] P(d)``; ``pairwise="dfree-bound"`` uses the exponential bound on ``P(d)``."""
    if pairwise == "exact":
        return math.fsum(c * pairwise_error_prob(d, snr) for d, c in tally.items() if c)
    if pairwise == "dfree-bound":
        return math.fsum(c * pairwise_error_bound(d, d_free, snr) for d, c in tally.items() if c)
    raise ValueError(f"unknown pairwise mode {pairwise!r}")


def bound_points(
    code: ConvCode,
    counts: dict[int, int],
    d_free: int,
    depth: int,
    n: int,
    snrs: list[SnrPoint],
    singles: dict[int, int],
    doubles: dict[int, int],
    higher: dict[int, int],
    ten_terms: bool = False,
    optimistic: bool = False,
    pairwise: str = "exact",
) -> list[BoundPoint]:
    """``counts`` is the original code's ``a_d`` up to ``depth``; it feeds the tail."""
    out = []
    for snr in snrs:
        try:
            rem = transfer_remainder(code, snr.gamma, depth)
        except TransferDivergenceError:
            rem = None
        tail = tail_from_remainder(counts, depth, d_free, snr, n, rem, ten_terms=ten_terms)
        out.append(
            BoundPoint(
                snr_db=snr.label_db,
                gamma=snr.gamma,
                singles=weighted(singles, snr, d_free, pairwise),
                doubles=weighted(doubles, snr, d_free, pairwise),
                higher=weighted(higher, snr, d_free, pairwise),
                tail=tail.value,
                optimistic=optimistic,
            )
        )
    return out
