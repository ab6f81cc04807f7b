"""Bound reports shared by the exclusion and construction methods."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

CSV_COLUMNS = [
    "method",
    "code",
    "nu",
    "crc",
    "crc_degree",
    "k",
    "n",
    "depth",
    "snr_db",
    "snr_convention",
    "pairwise",
    "gamma",
    "total",
    "singles",
    "doubles",
    "higher",
    "tail",
    "tail_available",
    "optimistic",
]


@dataclass
class BoundPoint:
    """Undetected-error bound at one SNR, split by contribution."""

    snr_db: float
    gamma: float
    singles: float
    doubles: float
    higher: float
    tail: float | None
    optimistic: bool = False

    @property
    def tail_available(self) -> bool:
        return self.tail is not None

    @property
    def total(self) -> float:
        t = 0.0 if (self.tail is None or self.optimistic) else self.tail
        return self.singles + self.doubles + self.higher + t

    def as_dict(self) -> dict:
        return {
            "snr_db": self.snr_db,
            "gamma": self.gamma,
            "total": self.total,
            "singles": self.singles,
            "doubles": self.doubles,
            "higher": self.higher,
            "tail": self.tail,
            "tail_available": self.tail_available,
            "optimistic": self.optimistic,
        }


@dataclass
class BoundReport:
    method: str
    code: str
    nu: int
    crc: str
    crc_degree: int
    k: int
    depth: int
    snr_convention: str
    pairwise: str = "exact"
    points: list[BoundPoint] = field(default_factory=list)
    tallies: dict[str, dict[int, int]] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    @property
    def n(self) -> int:
        return self.k + self.crc_degree

    @property
    def flagged(self) -> bool:
        """True when any point lacks its tail term (the bound is then not rigorous)."""
        return any(not p.tail_available and not p.optimistic for p in self.points)

    def to_dict(self) -> dict:
        return {
            "schema": "convcrc.bound/1",
            "method": self.method,
            "code": self.code,
            "nu": self.nu,
            "crc": self.crc,
            "crc_degree": self.crc_degree,
            "k": self.k,
            "n": self.n,
            "depth": self.depth,
            "snr_convention": self.snr_convention,
            "pairwise": self.pairwise,
            "tallies": {
                name: {str(d): int(c) for d, c in sorted(t.items())} for name, t in sorted(self.tallies.items())
            },
            "points": [p.as_dict() for p in self.points],
            "notes": list(self.notes),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for p in self.points:
            w.writerow(
                [
                    self.method,
                    self.code,
                    self.nu,
                    self.crc,
                    self.crc_degree,
                    self.k,
                    self.n,
                    self.depth,
                    repr(p.snr_db),
                    self.snr_convention,
                    self.pairwise,
                    repr(p.gamma),
                    repr(p.total),
                    repr(p.singles),
                    repr(p.doubles),
                    repr(p.higher),
                    "" if p.tail is None else repr(p.tail),
                    int(p.tail_available),
                    int(p.optimistic),
                ]
            )
        return buf.getvalue()
