"""Monte Carlo check of the bounds: CRC + convolutional code over AWGN.

Each coded bit becomes an antipodal component ``+-1`` with Gaussian noise
of variance ``1 / (2 gamma)``.  A weight-``d`` error then has pairwise
probability exactly ``Q(sqrt(2 d gamma))``, matching the bound.  Decoding
is a batched soft Viterbi over the terminated trellis.

Every frame draws from its own Philox stream keyed by ``(seed, frame
index)``, and frames are processed in fixed chunks, so counts do not
depend on the number of worker threads.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.special import ndtri

from .construction import EquivalentCode
from .convcode import ConvCode
from .crc import CrcSpec
from .eventsearch import pattern_residues
from .probability import SnrPoint

__all__ = [
    "StopRule",
    "RateEstimate",
    "SimOutcome",
    "wilson_interval",
    "viterbi_decode",
    "encode_batch",
    "simulate_concatenated",
    "simulate_equivalent_fer",
    "GENERATOR_ID",
]

GENERATOR_ID = "numpy Philox4x64-10, key = seed * 2**64 + frame_index"
CHUNK = 1024
LOW_CONFIDENCE_EVENTS = 10


@dataclass(frozen=True)
class StopRule:
    """Stop once ``min_events`` target events are seen or after ``max_frames`` frames."""

    min_events: int = 30
    max_frames: int = 10**6

    def __post_init__(self):
        if self.max_frames < 1 or self.min_events < 1:
            raise ValueError("stop rule needs positive limits")


def wilson_interval(events: int, trials: int, confidence: float = 0.95) -> tuple[float, float]:
    if trials <= 0:
        return 0.0, 1.0
    z = float(ndtri(0.5 + confidence / 2))
    p = events / trials
    den = 1 + z * z / trials
    centre = (p + z * z / (2 * trials)) / den
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / den
    return max(0.0, centre - half), min(1.0, centre + half)


@dataclass
class RateEstimate:
    events: int
    trials: int
    rate: float
    std_error: float
    wilson_low: float
    wilson_high: float
    low_confidence: bool

    @classmethod
    def of(cls, events: int, trials: int) -> RateEstimate:
        rate = events / trials if trials else 0.0
        se = math.sqrt(rate * (1 - rate) / trials) if trials else 0.0
        lo, hi = wilson_interval(events, trials)
        return cls(events, trials, rate, se, lo, hi, events < LOW_CONFIDENCE_EVENTS)

    def __str__(self):
        flag = " (low-confidence)" if self.low_confidence else ""
        return f"{self.rate:.4g} [{self.wilson_low:.4g}, {self.wilson_high:.4g}]{flag}"


@dataclass
class SimOutcome:
    mode: str
    frames: int
    frame_errors: int
    detected: int
    undetected: int
    rng_seed: int
    manifest: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.frame_errors != self.detected + self.undetected:
            raise AssertionError("frame errors must split into detected and undetected")

    @property
    def fer(self) -> RateEstimate:
        return RateEstimate.of(self.frame_errors, self.frames)

    @property
    def detected_rate(self) -> RateEstimate:
        return RateEstimate.of(self.detected, self.frames)

    @property
    def undetected_rate(self) -> RateEstimate:
        return RateEstimate.of(self.undetected, self.frames)

    def to_dict(self) -> dict:
        return {
            "schema": "convcrc.simulation/1",
            "mode": self.mode,
            "frames": self.frames,
            "frame_errors": self.frame_errors,
            "detected": self.detected,
            "undetected": self.undetected,
            "rng_seed": self.rng_seed,
            "rates": {
                "frame_error": asdict(self.fer),
                "detected": asdict(self.detected_rate),
                "undetected": asdict(self.undetected_rate),
            },
            "manifest": self.manifest,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True)


# -- encoding and decoding ------------------------------------------------


def encode_batch(code: ConvCode, u: np.ndarray) -> np.ndarray:
    """Encode rows of ``u`` (already terminated); returns shape ``(B, L, N)``."""
    u = np.asarray(u, dtype=np.uint8)
    B, L = u.shape
    out = np.zeros((B, L, code.n_outputs), dtype=np.uint8)
    for j, tap in enumerate(code.taps):
        for i in range(code.memory + 1):
            if tap >> i & 1:
                out[:, i:, j] ^= u[:, : L - i]
    return out


def viterbi_decode(code: ConvCode, y: np.ndarray) -> np.ndarray:
    """Maximum-likelihood input bits for received rows ``y`` of shape ``(B, L, N)``.

    The trellis starts and ends in state 0.  With antipodal symbols the
    squared-distance metric reduces to the correlation ``sum y * (1 - 2c)``.
    """
    y = np.asarray(y, dtype=np.float64)
    B, L, N = y.shape
    nu = code.memory
    S = code.n_states
    if nu < 1:
        raise ValueError("decoder needs memory >= 1")
    H = S // 2
    windows = np.arange(2 * S, dtype=np.int64)
    sym = 1.0 - 2.0 * code.window_outputs(windows)  # (2S, N)
    yt = np.ascontiguousarray(y.transpose(1, 2, 0))  # (L, N, B)
    # window = next_state | (oldest bit << nu); next states 2h, 2h+1 share predecessors h and h + S/2
    pm = np.full((S, B), -np.inf)
    pm[0] = 0.0
    dec = np.empty((L, H, 2, B), dtype=bool)
    for t in range(L):
        bm = (sym @ yt[t]).reshape(2, H, 2, B)
        c0 = pm[:H, None] + bm[0]
        c1 = pm[H:, None] + bm[1]
        np.greater(c1, c0, out=dec[t])
        pm = np.maximum(c0, c1).reshape(S, B)
    dec = dec.reshape(L, S, B)
    u = np.empty((B, L), dtype=np.uint8)
    state = np.zeros(B, dtype=np.int64)
    cols = np.arange(B)
    for t in range(L - 1, -1, -1):
        u[:, t] = state & 1
        a = dec[t, state, cols].astype(np.int64)
        state = (state >> 1) | (a << (nu - 1))
    return u


def _residues(bits: np.ndarray, p: int) -> np.ndarray:
    """Rows of bits (highest degree first) modulo ``p``."""
    B, L = bits.shape
    pad = (-L) % 8
    if pad:
        bits = np.concatenate([np.zeros((B, pad), dtype=np.uint8), bits], axis=1)
    return pattern_residues(np.packbits(bits, axis=1), p)


def crc_encode_batch(spec: CrcSpec, msg: np.ndarray) -> np.ndarray:
    m = spec.degree
    B = msg.shape[0]
    shifted = np.concatenate([msg, np.zeros((B, m), dtype=np.uint8)], axis=1)
    r = _residues(shifted, spec.value)
    parity_bits = ((r[:, None] >> np.arange(m - 1, -1, -1)) & 1).astype(np.uint8)
    return np.concatenate([msg, parity_bits], axis=1)


# -- frame loop -----------------------------------------------------------


def _frame_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=(int(seed) << 64) | int(index)))


def _sigma(snr: SnrPoint) -> float:
    return math.sqrt(1.0 / (2.0 * snr.gamma))


def _draw(seed: int, start: int, count: int, n_bits: int, L: int, N: int):
    bits = np.empty((count, n_bits), dtype=np.uint8)
    noise = np.empty((count, L, N))
    for i in range(count):
        g = _frame_rng(seed, start + i)
        bits[i] = g.integers(0, 2, n_bits, dtype=np.uint8)
        noise[i] = g.standard_normal((L, N))
    return bits, noise


def _chunk(spec, code, eq, k, sigma, seed, start, count, screen=True):
    """Counts ``(errors, detected, undetected, equivalent errors)`` for one chunk of frames.

    The equivalent decoder is ML over the CRC-valid words, so it can only
    fail on frames where the unconstrained decoder failed; with ``screen``
    it runs on those frames alone.
    """
    n = k + spec.degree
    L = n + code.memory
    msg, noise = _draw(seed, start, count, k, L, code.n_outputs)
    word = crc_encode_batch(spec, msg)
    u = np.concatenate([word, np.zeros((count, code.memory), dtype=np.uint8)], axis=1)
    c = encode_batch(code, u)
    y = 1.0 - 2.0 * c + sigma * noise
    est = viterbi_decode(code, y)[:, :n]
    err = est ^ word
    bad = err.any(axis=1)
    passes = _residues(est[bad], spec.value) == 0
    undetected = int(passes.sum())
    if undetected:
        # an accepted wrong word differs from the sent codeword by a multiple of p
        assert (_residues(err[bad][passes], spec.value) == 0).all(), "undetected error not divisible by p"
    errors = int(bad.sum())
    eq_errors = 0
    if eq is not None:
        rows = np.flatnonzero(bad) if screen else np.arange(count)
        if rows.size:
            q_hat = viterbi_decode(eq.code, y[rows])[:, :k]
            q_hat = np.concatenate([q_hat, np.zeros((rows.size, eq.code.memory), dtype=np.uint8)], axis=1)
            # distinct inputs give distinct codewords, so compare in the code domain
            eq_errors = int((encode_batch(eq.code, q_hat) != c[rows]).any(axis=(1, 2)).sum())
    return errors, errors - undetected, undetected, eq_errors


def _run(chunk_fn, stop: StopRule, count_index: int, threads: int):
    """Process chunks in index order; stop at the first chunk boundary meeting ``stop``."""
    totals = [0, 0, 0, 0, 0]  # frames, errors, detected, undetected, equivalent errors
    starts = range(0, stop.max_frames, CHUNK)
    pool = ThreadPoolExecutor(threads) if threads > 1 else None
    try:
        it = iter(starts)
        done = False
        while not done:
            wave = [s for _, s in zip(range(max(1, threads)), it)]
            if not wave:
                break
            args = [(s, min(CHUNK, stop.max_frames - s)) for s in wave]
            results = list(pool.map(lambda a: chunk_fn(*a), args)) if pool else [chunk_fn(*a) for a in args]
            for (s, cnt), r in zip(args, results):
                totals[0] += cnt
                for i in range(4):
                    totals[i + 1] += r[i]
                if totals[count_index] >= stop.min_events:
                    done = True
                    break
    finally:
        if pool:
            pool.shutdown()
    return totals


def _manifest(**kw) -> dict:
    kw["generator"] = GENERATOR_ID
    kw["chunk_frames"] = CHUNK
    kw["noise_variance_per_component"] = "1 / (2 gamma)"
    return kw


def simulate_concatenated(
    spec: CrcSpec,
    code: ConvCode,
    k: int,
    snr: SnrPoint,
    stop: StopRule,
    seed: int = 0,
    threads: int = 1,
    equivalent: EquivalentCode | None = None,
) -> SimOutcome:
    """Count correct, detected and undetected frames for the concatenated system.

    With ``equivalent`` the same frames are also decoded on the equivalent
    code's trellis and its frame errors are reported in the manifest.
    """
    sigma = _sigma(snr)
    fn = lambda s, c: _chunk(spec, code, equivalent, k, sigma, seed, s, c)  # noqa: E731
    frames, errors, detected, undetected, eq_errors = _run(fn, stop, 3, threads)
    man = _manifest(
        crc=spec.hex(), crc_degree=spec.degree, code=code.octal(), nu=code.memory, k=k, n=k + spec.degree,
        snr_db=snr.label_db, snr_convention=snr.convention, gamma=snr.gamma,
        min_undetected=stop.min_events, max_frames=stop.max_frames, seed=seed,
    )
    if equivalent is not None:
        man["equivalent_code"] = equivalent.code.octal()
        man["equivalent_frame_errors"] = eq_errors
    return SimOutcome("concatenated", frames, errors, detected, undetected, seed, man)


def simulate_equivalent_fer(
    eq: EquivalentCode,
    k: int,
    snr: SnrPoint,
    stop: StopRule,
    seed: int = 0,
    threads: int = 1,
    screen: bool = True,
) -> SimOutcome:
    """FER of the equivalent encoder ``p(x) c(x)`` on ``k``-bit random inputs.

    Frames are drawn exactly as in :func:`simulate_concatenated` (same seed,
    same frames), the input being the quotient of the CRC codeword by ``p``.
    Every frame error is reported as undetected: the equivalent code's
    codewords are exactly the CRC-valid words.  ``screen=False`` decodes
    every frame on the large trellis instead of only the frames the
    original decoder got wrong.
    """
    sigma = _sigma(snr)

    def fn(s, c):
        e = _chunk(eq.crc, eq.original, eq, k, sigma, seed, s, c, screen)[3]
        return e, 0, e, e

    frames, errors, _, _, _ = _run(fn, stop, 1, threads)
    man = _manifest(
        crc=eq.crc.hex(), crc_degree=eq.crc.degree, code=eq.code.octal(), nu=eq.code.memory,
        original_code=eq.original.octal(), k=k, n=k + eq.crc.degree,
        snr_db=snr.label_db, snr_convention=snr.convention, gamma=snr.gamma,
        min_frame_errors=stop.min_events, max_frames=stop.max_frames, seed=seed, screened=screen,
    )
    return SimOutcome("equivalent-fer", frames, errors, 0, errors, seed, man)
