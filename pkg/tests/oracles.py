"""Independent brute-force references used by the tests.

Everything here works on plain Python ints and bit lists and never calls
the searches under test.
"""

from __future__ import annotations

import itertools


def pmul(a: int, b: int) -> int:
    out = 0
    while b:
        if b & 1:
            out ^= a
        a <<= 1
        b >>= 1
    return out


def pmod(a: int, b: int) -> int:
    db = b.bit_length()
    while a.bit_length() >= db:
        a ^= b << (a.bit_length() - db)
    return a


def weight(v: int) -> int:
    return bin(v).count("1")


def conv_output_weight(gens: tuple[int, ...], u: int) -> int:
    """Output weight of a feedforward encoder driven by input polynomial ``u``.

    Each output stream is the product ``u(x) g_i(x)``, so the weight is the
    sum of the product weights (termination is implicit).
    """
    return sum(weight(pmul(u, g)) for g in gens)


def has_internal_zero_run(v: int, run: int) -> bool:
    """True if ``v`` has ``run`` or more consecutive zeros between its outer ones."""
    if v == 0:
        return False
    v >>= (v & -v).bit_length() - 1
    return ("0" * run) in bin(v)[2:]


def events_by_brute_force(gens: tuple[int, ...], memory: int, depth: int, max_input_len: int) -> dict[int, dict[int, int]]:
    """``d -> {length: count}`` of error events, from all inputs with a leading one.

    An event is an input with no internal run of ``memory`` zeros (the
    state never returns to zero early).  Its length is the number of input
    bits plus ``memory`` terminating stages.
    """
    out: dict[int, dict[int, int]] = {}
    for L in range(1, max_input_len + 1):
        for tail in range(1 << max(0, L - 2)):
            u = (1 << (L - 1)) | (tail << 1) | 1 if L > 1 else 1
            if has_internal_zero_run(u, memory):
                continue
            d = conv_output_weight(gens, u)
            if d <= depth:
                row = out.setdefault(d, {})
                row[L + memory] = row.get(L + memory, 0) + 1
    return out


def crc_codeword(p: int, m: int, f: int) -> int:
    """``x^m f + (x^m f mod p)``."""
    s = f << m
    return s ^ pmod(s, p)


def undetectable_placements_brute(gens: tuple[int, ...], memory: int, p: int, m: int, k: int, depth: int):
    """Per-distance undetectable placements, split by the number of original events.

    Every nonzero message gives a nonzero CRC codeword ``w = q p``.  Fed to
    the convolutional encoder, ``w`` is an error pattern of the concatenated
    system.  It is one placement of one undetectable tuple exactly when the
    equivalent encoder, driven by ``q``, leaves the zero state once
    (``q`` has no internal run of ``m + memory`` zeros).  The tuple order is
    the number of maximal excursions of the original encoder, i.e. of
    internal zero runs of length ``>= memory`` in ``w`` plus one.
    """
    M = m + memory
    out: dict[int, dict[int, int]] = {}
    for f in range(1, 1 << k):
        w = crc_codeword(p, m, f)
        q = pquot(w, p)
        if has_internal_zero_run(q, M):
            continue
        d = conv_output_weight(gens, w)
        if d > depth:
            continue
        s = count_excursions(w, memory)
        row = out.setdefault(s, {})
        row[d] = row.get(d, 0) + 1
    return out


def pquot(a: int, b: int) -> int:
    q = 0
    db = b.bit_length()
    while a.bit_length() >= db:
        sh = a.bit_length() - db
        q |= 1 << sh
        a ^= b << sh
    assert a == 0
    return q


def count_excursions(w: int, memory: int) -> int:
    """Number of original error events in input ``w``: maximal runs separated by ``>= memory`` zeros."""
    if w == 0:
        return 0
    w >>= (w & -w).bit_length() - 1
    s = bin(w)[2:]
    return 1 + sum(1 for z in s.split("1") if len(z) >= memory)


def cosets_brute(p: int, m: int) -> list[frozenset[int]]:
    seen, out = set(), []
    for r in range(1 << m):
        if r in seen:
            continue
        orbit, x = [], r
        while x not in orbit:
            orbit.append(x)
            x = pmod(x << 1, p)
        seen.update(orbit)
        out.append(frozenset(orbit))
    return out


def ml_decode_brute(code_taps: tuple[int, ...], memory: int, n_info: int, y) -> list[int]:
    """Exhaustive ML decoding over all ``2^n_info`` terminated inputs (correlation metric)."""
    best, best_u = None, None
    for bits in itertools.product((0, 1), repeat=n_info):
        u = list(bits) + [0] * memory
        state, metric = 0, 0.0
        for t, b in enumerate(u):
            w = (state << 1) | b
            for j, tap in enumerate(code_taps):
                c = bin(w & tap).count("1") & 1
                metric += y[t][j] * (1 - 2 * c)
            state = w & ((1 << memory) - 1)
        if best is None or metric > best:
            best, best_u = metric, list(bits)
    return best_u
