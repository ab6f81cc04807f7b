"""CRC encoding in plain polynomial form.

The message ``f(x)`` is sent highest-degree coefficient first and the
``m`` parity bits ``r(x) = x^m f(x) mod p(x)`` follow it, so a codeword is
the coefficient sequence of ``x^m f(x) + r(x) = q(x) p(x)``.  No initial
register value, reflection or final XOR is applied.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gf2poly import Gf2Poly, _mod, from_koopman, to_koopman

__all__ = ["CrcSpec", "crc_encode", "crc_check", "parse_crc"]


@dataclass(frozen=True)
class CrcSpec:
    generator: Gf2Poly

    def __post_init__(self):
        g = Gf2Poly(self.generator)
        object.__setattr__(self, "generator", g)
        if g.degree is None or g.degree < 1:
            raise ValueError("CRC generator must have degree >= 1")
        if not g.value & 1:
            raise ValueError("CRC generator needs a unit x^0 coefficient")

    @property
    def degree(self) -> int:
        return self.generator.degree

    @property
    def value(self) -> int:
        return self.generator.value

    @property
    def koopman(self) -> int:
        return to_koopman(self.generator)

    @classmethod
    def from_koopman(cls, value: int, degree: int) -> CrcSpec:
        return cls(from_koopman(value, degree))

    def hex(self) -> str:
        return f"0x{self.koopman:X}"

    def __str__(self):
        return f"{self.hex()} (m={self.degree})"


def parse_crc(text: str | int, degree: int) -> CrcSpec:
    """Parse a CRC word given with its degree.

    Koopman notation (``2^(m-1) <= v < 2^m``) is the norm.  An odd word in
    ``[2^m, 2^(m+1))`` can only be a full coefficient word with the ``x^0``
    term written out, so that is accepted as well.
    """
    v = int(text, 0) if isinstance(text, str) else int(text)
    if (1 << (degree - 1)) <= v < (1 << degree):
        return CrcSpec.from_koopman(v, degree)
    if (1 << degree) <= v < (1 << (degree + 1)) and v & 1:
        return CrcSpec(Gf2Poly(v))
    raise ValueError(f"0x{v:X} is not a degree-{degree} CRC generator")


def _bits_to_int(bits) -> int:
    v = 0
    for b in np.asarray(bits, dtype=np.uint8).tolist():
        v = (v << 1) | (b & 1)
    return v


def crc_encode(spec: CrcSpec, message) -> np.ndarray:
    """Append the ``m`` parity bits to ``message``; returns ``k + m`` bits."""
    msg = np.asarray(message, dtype=np.uint8) & 1
    if msg.size < 1:
        raise ValueError("message must contain at least one bit")
    m = spec.degree
    r = _mod(_bits_to_int(msg) << m, spec.value)
    parity_bits = np.array([(r >> i) & 1 for i in range(m - 1, -1, -1)], dtype=np.uint8)
    return np.concatenate([msg, parity_bits])


def crc_check(spec: CrcSpec, word) -> bool:
    w = np.asarray(word)
    if w.size <= spec.degree:
        raise ValueError("word must be longer than the CRC degree")
    return _mod(_bits_to_int(w), spec.value) == 0
