"""Search schemes: finite, deterministically indexable candidate spaces.

A scheme maps the integer interval [0, total) bijectively onto parameter
tuples via mixed-radix decoding, so chunks of indices partition the space
exactly and every worker reproduces the same candidate from the same index.
Degenerate parameter combinations (b identically zero, B = 0, c = 0) stay
in the index space but yield no candidate.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

from pcflab.exactmath import IntPolynomial
from pcflab.families import DegenerateParams, sigma_scheme_pcf, zigzag_roots_pcf
from pcflab.pcf import DEPTH_VAR, Pcf

KINDS = ("coeff_box", "sigma", "zigzag_roots")


@dataclass(frozen=True)
class SearchScheme:
    scheme_id: str
    kind: str
    ranges: tuple  # ((lo, hi) inclusive, ...) in decode order
    meta: tuple  # kind-specific: degrees etc., as a sorted tuple of pairs
    fr_depth: int = 512

    @classmethod
    def coeff_box(cls, scheme_id: str, deg_a: int, deg_b: int, ranges_a, ranges_b, fr_depth: int = 512):
        if len(ranges_a) != deg_a + 1 or len(ranges_b) != deg_b + 1:
            raise ValueError("need one range per coefficient, constant term first")
        ranges = tuple((int(lo), int(hi)) for lo, hi in list(ranges_a) + list(ranges_b))
        return cls(scheme_id, "coeff_box", ranges, (("deg_a", deg_a), ("deg_b", deg_b)), fr_depth)

    @classmethod
    def sigma(cls, scheme_id: str, d: int, coeff_ranges: dict, b_range, fr_depth: int = 512):
        """a = sum_j c_j sigma(n, j) for j = d, d-2, ...; b = -B n^(2d)."""
        js = sorted(coeff_ranges, reverse=True)
        expect = list(range(d, -1, -2))
        if js != expect:
            raise ValueError(f"sigma coefficients must cover degrees {expect}")
        ranges = tuple((int(coeff_ranges[j][0]), int(coeff_ranges[j][1])) for j in js)
        ranges += ((int(b_range[0]), int(b_range[1])),)
        return cls(scheme_id, "sigma", ranges, (("d", d),), fr_depth)

    @classmethod
    def zigzag_roots(cls, scheme_id: str, d: int, r_ranges, s_ranges, c_range, fr_depth: int = 512):
        if len(r_ranges) != d or len(s_ranges) != d:
            raise ValueError("need d ranges for each root vector")
        ranges = tuple((int(lo), int(hi)) for lo, hi in list(r_ranges) + list(s_ranges) + [c_range])
        return cls(scheme_id, "zigzag_roots", ranges, (("d", d),), fr_depth)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown scheme kind {self.kind!r}")

    @property
    def meta_dict(self) -> dict:
        return dict(self.meta)

    def total(self) -> int:
        """Candidate count; an empty range empties the whole scheme."""
        out = 1
        for lo, hi in self.ranges:
            out *= max(0, hi - lo + 1)
        return out

    def decode(self, index: int) -> tuple:
        """Mixed-radix index -> parameter tuple (one value per range)."""
        if not 0 <= index < self.total():
            raise IndexError(f"index {index} outside [0, {self.total()})")
        out = []
        for lo, hi in self.ranges:
            size = hi - lo + 1
            out.append(lo + index % size)
            index //= size
        return tuple(out)

    def candidate(self, index: int) -> Optional[Pcf]:
        """The Pcf at an index, or None for degenerate parameter tuples."""
        values = self.decode(index)
        meta = self.meta_dict
        try:
            if self.kind == "sigma":
                d = meta["d"]
                js = list(range(d, -1, -2))
                coeffs = dict(zip(js, values[: len(js)]))
                return sigma_scheme_pcf(coeffs, values[-1], d)
            if self.kind == "zigzag_roots":
                d = meta["d"]
                return zigzag_roots_pcf(values[:d], values[d : 2 * d], values[-1])
            deg_a = meta["deg_a"]
            a = IntPolynomial((DEPTH_VAR,), {(i,): c for i, c in enumerate(values[: deg_a + 1])})
            b = IntPolynomial((DEPTH_VAR,), {(i,): c for i, c in enumerate(values[deg_a + 1 :])})
            if a.is_zero() or b.is_zero():
                return None
            return Pcf(a, b)
        except DegenerateParams:
            return None

    def to_json(self) -> dict:
        return {
            "scheme_id": self.scheme_id,
            "kind": self.kind,
            "ranges": [list(r) for r in self.ranges],
            "meta": {k: v for k, v in self.meta},
            "fr_depth": self.fr_depth,
        }

    @classmethod
    def from_json(cls, record) -> "SearchScheme":
        if isinstance(record, str):
            record = json.loads(record)
        return cls(
            scheme_id=record["scheme_id"],
            kind=record["kind"],
            ranges=tuple(tuple(r) for r in record["ranges"]),
            meta=tuple(sorted(record["meta"].items())),
            fr_depth=record["fr_depth"],
        )


@dataclass(frozen=True)
class Chunk:
    chunk_id: str
    scheme_id: str
    start: int
    count: int

    def to_json(self) -> dict:
        return {
            "chunk_id": self.chunk_id,
            "scheme_id": self.scheme_id,
            "start": self.start,
            "count": self.count,
        }


def chunk_scheme(scheme: SearchScheme, chunk_size: int) -> list[Chunk]:
    """Disjoint chunks covering [0, total) in order."""
    if chunk_size < 1:
        raise ValueError("chunk_size must be positive")
    total = scheme.total()
    chunks = []
    start = 0
    while start < total:
        count = min(chunk_size, total - start)
        chunks.append(
            Chunk(
                chunk_id=f"{scheme.scheme_id}:{start}:{count}",
                scheme_id=scheme.scheme_id,
                start=start,
                count=count,
            )
        )
        start += count
    return chunks
