"""Pairwise error probabilities and the large-distance tail bound."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc, gammainc, log_ndtr

__all__ = [
    "SnrPoint",
    "q_function",
    "log_q_function",
    "pairwise_error_prob",
    "pairwise_error_bound",
    "tuple_enumeration_sums",
    "tail_sum",
    "tail_from_remainder",
    "TailResult",
]

SNR_CONVENTIONS = ("coded-bit", "qpsk")


@dataclass(frozen=True)
class SnrPoint:
    """Channel quality as the ratio entering ``P(d) = Q(sqrt(2 d gamma))``.

    ``gamma`` is the energy per coded bit over ``N0``.  Use
    :meth:`from_db` with ``convention="qpsk"`` to quote the SNR of a QPSK
    symbol, which carries two coded bits and hence ``gamma = Es/(2 N0)``.
    ``label_db`` keeps the figure the caller asked for.
    """

    gamma: float
    convention: str = "coded-bit"
    label_db: float | None = None

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")
        if self.convention not in SNR_CONVENTIONS:
            raise ValueError(f"unknown SNR convention {self.convention!r}")
        if self.label_db is None:
            object.__setattr__(self, "label_db", self.db_for(self.convention))

    @property
    def db(self) -> float:
        """``10 log10(gamma)``."""
        return 10.0 * math.log10(self.gamma)

    def db_for(self, convention: str) -> float:
        return self.db + (10.0 * math.log10(2.0) if convention == "qpsk" else 0.0)

    @classmethod
    def from_db(cls, db: float, convention: str = "coded-bit") -> SnrPoint:
        g = 10.0 ** (db / 10.0)
        if convention == "qpsk":
            g /= 2.0
        elif convention != "coded-bit":
            raise ValueError(f"unknown SNR convention {convention!r}")
        return cls(g, convention, float(db))


def _scalar(out, like):
    return float(out) if np.ndim(like) == 0 else out


def q_function(x):
    """Gaussian tail probability ``Q(x) = erfc(x / sqrt 2) / 2``."""
    return _scalar(0.5 * erfc(np.asarray(x, dtype=float) / math.sqrt(2.0)), x)


def log_q_function(x):
    """``log Q(x)``, accurate far into the tail."""
    return _scalar(log_ndtr(-np.asarray(x, dtype=float)), x)


def pairwise_error_prob(d, snr: SnrPoint):
    """``P(d) = Q(sqrt(2 d gamma))``."""
    d = np.asarray(d, dtype=float)
    if np.any(d < 1):
        raise ValueError("distance must be >= 1")
    return _scalar(q_function(np.sqrt(2.0 * d * snr.gamma)), d)


def pairwise_error_bound(d, d_free: int, snr: SnrPoint):
    """``Q(sqrt(2 d_free gamma)) exp(-(d - d_free) gamma)``, an upper bound on ``P(d)`` for ``d >= d_free``."""
    d = np.asarray(d, dtype=float)
    if np.any(d < d_free):
        raise ValueError("the bound needs d >= d_free")
    log_p = log_q_function(math.sqrt(2.0 * d_free * snr.gamma)) - (d - d_free) * snr.gamma
    return _scalar(np.exp(log_p), d)


def tuple_enumeration_sums(a: dict[int, int], depth: int, d_free: int, gamma: float, n: int, s_max: int) -> list[float]:
    """``n^s/s! * sum over (d_1..d_s), d_u >= d_free, sum <= depth`` of ``prod a_d e^(-d gamma)``.

    Entry ``s-1`` of the returned list belongs to ``s``.  The truncated
    power series in ``z = e^-gamma`` is expanded exactly in integers and
    only evaluated at the end.
    """
    base = np.zeros(depth + 1, dtype=object)
    for d, c in a.items():
        if d_free <= d <= depth:
            base[d] = int(c)
    out = []
    power = np.zeros(depth + 1, dtype=object)
    power[0] = 1
    z = math.exp(-gamma)
    for s in range(1, s_max + 1):
        nxt = np.zeros(depth + 1, dtype=object)
        for i in np.flatnonzero(power != 0):
            for j in np.flatnonzero(base != 0):
                if i + j <= depth:
                    nxt[i + j] += power[i] * base[j]
        power = nxt
        total = math.fsum(float(c) * z**d for d, c in enumerate(power) if c)
        out.append(total * n**s / math.factorial(s))
    return out


@dataclass(frozen=True)
class TailResult:
    value: float | None
    rigorous: bool
    note: str = ""


def tail_sum(
    pbar: float | None,
    snr: SnrPoint,
    d_free: int,
    enumerated: list[float],
    ten_terms: bool = False,
) -> TailResult:
    """Bound on the probability mass of all error tuples beyond the search depth.

    ``Q(sqrt(2 d_free gamma)) e^(d_free gamma) [ (e^Pbar - 1) - sum_s enumerated[s] ]``,
    with ``expm1`` by default or the first ten series terms of
    ``e^Pbar - 1`` when ``ten_terms`` is set.  Negative round-off is
    clamped to zero.  A missing ``pbar`` gives ``value=None`` and marks the
    bound non-rigorous.
    """
    if pbar is None or not np.isfinite(pbar):
        return TailResult(None, False, "tail unavailable at this SNR")
    if ten_terms:
        series = math.fsum(pbar**s / math.factorial(s) for s in range(1, 11))
        subtract = math.fsum(enumerated[:10])
    else:
        series = math.expm1(pbar)
        subtract = math.fsum(enumerated)
    return TailResult(max(0.0, _tail_factor(snr, d_free) * (series - subtract)), True)


def _tail_factor(snr: SnrPoint, d_free: int) -> float:
    # Q(x) e^(x^2/2) in the log domain; both factors under/overflow separately
    x = math.sqrt(2.0 * d_free * snr.gamma)
    return math.exp(log_q_function(x) + d_free * snr.gamma)


def tail_from_remainder(
    a: dict[int, int],
    depth: int,
    d_free: int,
    snr: SnrPoint,
    n: int,
    remainder: float | None,
    ten_terms: bool = False,
) -> TailResult:
    """The :func:`tail_sum` quantity evaluated without cancellation.

    With ``A(z) = sum_{d <= depth} a_d z^d`` and ``R = T - A`` (from
    :func:`~convcrc.eventsearch.transfer_remainder`), the bracket of
    :func:`tail_sum` equals ``sum_s n^s/s! R_s`` where ``R_s`` is the part
    of ``T^s`` above degree ``depth``::

        R_s = [A^s]_{> depth} + sum_{i < s} C(s, i) A^i R^(s-i)

    Every term is positive.  For ``s > depth // d_free`` the truncated part
    is empty and ``R_s = T^s``; those terms sum to ``e^x P(s+1, x)`` with
    ``x = n T`` and ``P`` the regularized incomplete gamma function.
    """
    if remainder is None or not np.isfinite(remainder):
        return TailResult(None, False, "tail unavailable at this SNR")
    z = math.exp(-snr.gamma)
    base = np.zeros(depth + 1, dtype=object)
    for d, c in a.items():
        if d_free <= d <= depth:
            base[d] = int(c)
    A = math.fsum(float(c) * z**d for d, c in enumerate(base) if c)
    T = A + remainder
    s_max = max(1, depth // d_free)
    s_top = min(s_max, 10) if ten_terms else s_max
    terms = []
    power = np.array([1], dtype=object)
    for s in range(1, s_top + 1):
        power = np.convolve(power, base)
        high = math.fsum(float(c) * z**d for d, c in enumerate(power) if c and d > depth)
        mixed = math.fsum(math.comb(s, i) * A**i * remainder ** (s - i) for i in range(s))
        terms.append(n**s / math.factorial(s) * (high + mixed))
    x = n * T
    if ten_terms:
        terms.extend(x**s / math.factorial(s) for s in range(s_top + 1, 11))
    elif x > 0:
        terms.append(math.exp(x) * float(gammainc(s_max + 1, x)))
    return TailResult(_tail_factor(snr, d_free) * math.fsum(terms), True)
