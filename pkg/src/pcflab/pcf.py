"""Exact evaluation of polynomial continued fractions.

A Pcf is the pair of integer polynomials (a, b) in the depth variable; its
convergents p_n/q_n follow u_n = a(n) u_{n-1} + b(n) u_{n-2} with
p_{-1} = 1, p_0 = a(0), q_{-1} = 0, q_0 = 1.  The head term is a(0).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Optional

import mpmath as mp

from pcflab.exactmath import IntPolynomial, Mat2, parse_poly
from pcflab.precision import GUARD_DIGITS

DEPTH_VAR = "n"


class DivergenceSuspected(ArithmeticError):
    pass


class ZeroDenominatorAtDepth(ArithmeticError):
    pass


class TerminatedFraction(ArithmeticError):
    """b(n) hit zero: the fraction is finite and exactly rational."""

    def __init__(self, depth: int, value: Fraction):
        super().__init__(f"b({depth}) = 0, exact value {value}")
        self.depth = depth
        self.value = value


class Pcf:
    """A polynomial continued fraction (partial denominators a, numerators b)."""

    __slots__ = ("a", "b")

    def __init__(self, a: IntPolynomial, b: IntPolynomial):
        if a.vars != (DEPTH_VAR,) or b.vars != (DEPTH_VAR,):
            raise ValueError(f"Pcf polynomials must be univariate in {DEPTH_VAR!r}")
        if b.is_zero():
            raise ValueError("b must not be identically zero")
        self.a = a
        self.b = b

    @classmethod
    def from_text(cls, a_text: str, b_text: str) -> "Pcf":
        return cls(parse_poly(a_text, [DEPTH_VAR]), parse_poly(b_text, [DEPTH_VAR]))

    @property
    def deg_a(self) -> int:
        return self.a.total_degree()

    @property
    def deg_b(self) -> int:
        return self.b.total_degree()

    def to_json(self) -> dict:
        return {"a": str(self.a), "b": str(self.b)}

    @classmethod
    def from_json(cls, record) -> "Pcf":
        if isinstance(record, str):
            record = json.loads(record)
        return cls.from_text(record["a"], record["b"])

    def canonical_text(self) -> str:
        return f"a={self.a};b={self.b}"

    def __eq__(self, other):
        return isinstance(other, Pcf) and self.a == other.a and self.b == other.b

    def __hash__(self):
        return hash((self.a, self.b))

    def __repr__(self):
        return f"Pcf(a={self.a}, b={self.b})"


@dataclass(frozen=True)
class ConvergentState:
    depth: int
    p_prev: int
    p: int
    q_prev: int
    q: int

    def ratio(self) -> Fraction:
        return Fraction(self.p, self.q)


def initial_state(pcf: Pcf) -> ConvergentState:
    return ConvergentState(0, 1, pcf.a.evaluate((0,)), 0, 1)


def step(state: ConvergentState, pcf: Pcf) -> ConvergentState:
    """One exact recursion step (depth n -> n+1)."""
    n1 = state.depth + 1
    a1 = pcf.a.evaluate((n1,))
    b1 = pcf.b.evaluate((n1,))
    return ConvergentState(
        n1,
        state.p,
        a1 * state.p + b1 * state.p_prev,
        state.q,
        a1 * state.q + b1 * state.q_prev,
    )


def backoff_schedule(max_depth: int, n0: int = 32, c: int = 16) -> list[int]:
    """Sample depths with gaps growing linearly in the sample index."""
    depths = []
    n, l = n0, 1
    while n < max_depth:
        depths.append(n)
        n += c * l
        l += 1
    depths.append(max_depth)
    return depths


def iter_samples(pcf: Pcf, depths: Iterable[int]) -> Iterator[ConvergentState]:
    """Step the recursion, yielding the state at each requested depth.

    Raises TerminatedFraction as soon as some b(n) vanishes; the exact value
    at that point is the fraction's limit.
    """
    depths = sorted(set(depths))
    if not depths:
        return
    a_dense = pcf.a.to_dense()
    b_dense = pcf.b.to_dense()

    def horner(coeffs, x):
        acc = 0
        for cc in reversed(coeffs):
            acc = acc * x + cc
        return acc

    p_prev, p = 1, horner(a_dense, 0)
    q_prev, q = 0, 1
    depth = 0
    targets = iter(depths)
    target = next(targets)
    if target == 0:
        yield ConvergentState(0, p_prev, p, q_prev, q)
        target = next(targets, None)
    while target is not None:
        while depth < target:
            n1 = depth + 1
            a1 = horner(a_dense, n1)
            b1 = horner(b_dense, n1)
            if b1 == 0:
                raise TerminatedFraction(n1, Fraction(p, q))
            p_prev, p = p, a1 * p + b1 * p_prev
            q_prev, q = q, a1 * q + b1 * q_prev
            depth = n1
        yield ConvergentState(depth, p_prev, p, q_prev, q)
        target = next(targets, None)


def state_at_depth(pcf: Pcf, depth: int) -> ConvergentState:
    for s in iter_samples(pcf, [depth]):
        return s
    raise ValueError("empty schedule")


@dataclass(frozen=True)
class PrecisionReport:
    """A decimal value with the number of digits certified correct."""

    depth: int
    certified_digits: int
    value: mp.mpf
    precision: int
    exact: Optional[Fraction] = None

    def value_str(self) -> str:
        with mp.workdps(self.precision):
            return mp.nstr(self.value, self.precision, strip_zeros=False)


def _shared_digits_pq(p1: int, q1: int, p2: int, q2: int, cap: int) -> int:
    """Largest K <= cap with floor(p1/q1 * 10^K) == floor(p2/q2 * 10^K)."""
    if q1 < 0:
        p1, q1 = -p1, -q1
    if q2 < 0:
        p2, q2 = -p2, -q2
    if p1 * q2 == p2 * q1:
        return cap

    def ipart(p, q, k):
        return (p * 10**k) // q

    if ipart(p1, q1, 0) != ipart(p2, q2, 0):
        return -1
    lo, hi = 0, cap
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if ipart(p1, q1, mid) == ipart(p2, q2, mid):
            lo = mid
        else:
            hi = mid - 1
    return lo


def certify_limit(
    samples: Iterator[tuple[int, int, int]],
    max_depth: int,
    target_digits: int,
    margin: int = 5,
    precision: Optional[int] = None,
) -> PrecisionReport:
    """Certify digits from a stream of (depth, p, q) samples.

    K is the shared decimal prefix of the two deepest samples; iteration
    stops once K exceeds target_digits + margin or the stream ends.
    """
    precision = precision or (target_digits + 2 * GUARD_DIGITS)
    cap = precision
    prev = None
    best = None
    zero_run = 0
    for depth, p, q in samples:
        if q == 0:
            zero_run += 1
            if zero_run >= 3:
                raise ZeroDenominatorAtDepth(f"q = 0 persistently near depth {depth}")
            continue
        zero_run = 0
        if prev is not None:
            k = _shared_digits_pq(prev[1], prev[2], p, q, cap)
            best = (depth, k, p, q)
            if k >= target_digits + margin:
                break
        prev = (depth, p, q)
    if best is None:
        raise DivergenceSuspected(f"not enough usable samples up to depth {max_depth}")
    depth, k, p, q = best
    if k < 1:
        raise DivergenceSuspected(
            f"no shared digit prefix between the deepest samples (depth {depth})"
        )
    with mp.workdps(precision + GUARD_DIGITS):
        value = mp.mpf(p) / mp.mpf(q)
    return PrecisionReport(depth=depth, certified_digits=min(k, precision), value=value, precision=precision)


def pcf_limit(
    pcf: Pcf,
    max_depth: int,
    target_digits: int,
    margin: int = 5,
    precision: Optional[int] = None,
) -> PrecisionReport:
    """Evaluate the fraction's limit with a certified digit count.

    A fraction that terminates (some b(n) = 0) yields its exact rational
    value instead of a floating estimate.
    """
    if max_depth < 2:
        raise ValueError("max_depth must be at least 2")
    precision = precision or (target_digits + 2 * GUARD_DIGITS)
    schedule = backoff_schedule(max_depth)

    def sample_stream():
        for s in iter_samples(pcf, schedule):
            yield s.depth, s.p, s.q

    try:
        return certify_limit(
            sample_stream(), max_depth, target_digits, margin=margin, precision=precision
        )
    except TerminatedFraction as t:
        with mp.workdps(precision + GUARD_DIGITS):
            value = mp.mpf(t.value.numerator) / mp.mpf(t.value.denominator)
        return PrecisionReport(
            depth=t.depth,
            certified_digits=precision,
            value=value,
            precision=precision,
            exact=t.value,
        )


def pcf_limit_richardson(
    pcf: Pcf,
    target_digits: int,
    step_gap: int = 100,
    samples: int = 28,
    precision: Optional[int] = None,
) -> PrecisionReport:
    """Limit of a polynomially-converging fraction by Richardson extrapolation.

    Balanced fractions (deg b = 2 deg a with a double characteristic root)
    gain only ~log(depth) digits directly; their error is an asymptotic
    series in 1/n, so Neville extrapolation over equally spaced depths
    recovers dozens of digits from shallow evaluations.  Certification
    compares the tableaus with and without the deepest sample.
    """
    precision = precision or max(2 * target_digits + 80, 140)
    depths = [step_gap * k for k in range(1, samples + 1)]
    points = []
    try:
        for s in iter_samples(pcf, depths):
            if s.q == 0:
                continue
            points.append((s.depth, s.p, s.q))
    except TerminatedFraction as t:
        with mp.workdps(precision + GUARD_DIGITS):
            value = mp.mpf(t.value.numerator) / mp.mpf(t.value.denominator)
        return PrecisionReport(t.depth, precision, value, precision, exact=t.value)
    if len(points) < 4:
        raise DivergenceSuspected("not enough usable samples for extrapolation")

    with mp.workdps(precision + GUARD_DIGITS):
        def extrapolate(pts):
            xs = [mp.mpf(1) / d for d, _, _ in pts]
            tab = [mp.mpf(p) / q for _, p, q in pts]
            m = len(tab)
            for j in range(1, m):
                for i in range(m - 1, j - 1, -1):
                    tab[i] = tab[i] + (tab[i] - tab[i - 1]) * xs[i] / (xs[i - j] - xs[i])
            return tab[m - 1]

        full = extrapolate(points)
        partial = extrapolate(points[:-1])
        from pcflab.precision import digits_agree

        k = digits_agree(full, partial, precision)
    if k < 1:
        raise DivergenceSuspected("extrapolated tableaus share no digits")
    return PrecisionReport(
        depth=points[-1][0],
        certified_digits=min(k, precision),
        value=full,
        precision=precision,
    )


def pcf_to_matrix(pcf: Pcf) -> tuple[Mat2, Mat2]:
    """Matrix form: initial state [[1, a(0)], [0, 1]] and the polynomial step
    matrix [[0, b(n)], [1, a(n)]] whose running product reproduces the
    convergents exactly."""
    zero = IntPolynomial.zero((DEPTH_VAR,))
    one = IntPolynomial.const((DEPTH_VAR,), 1)
    initial = Mat2(1, pcf.a.evaluate((0,)), 0, 1)
    step_matrix = Mat2(zero, pcf.b, one, pcf.a)
    return initial, step_matrix
