"""High-precision constants with dual-route verification.

Every catalog entry is computed by a documented rapidly-converging series
(route A) and cross-checked against an independent second route (route B)
up to a configurable verification depth, instead of trusting external digit
files.  Alternating series are accelerated with the Cohen-Rodriguez
Villegas-Zagier scheme, whose error for totally monotone terms decays like
(3 + sqrt(8))^-N.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import mpmath as mp

from pcflab.precision import GUARD_DIGITS

# Dual verification is capped by default: route B exists to catch
# implementation errors, which do not need tens of thousands of digits.
VERIFY_DIGITS_CAP = 1200

_LN10 = math.log(10.0)


class UnknownConstant(KeyError):
    pass


class PrecisionUnachievable(ArithmeticError):
    pass


# ---------------------------------------------------------------------------
# series building blocks
# ---------------------------------------------------------------------------


def alternating_sum(term: Callable[[int], mp.mpf], digits: int) -> mp.mpf:
    """CVZ-accelerated sum of (-1)^k term(k), k >= 0.

    term(k) must be totally monotone (true for 1/(k+alpha)^s and friends).
    Must be called inside a workdps context with enough guard digits.
    """
    n = int(digits * _LN10 / math.log(3 + math.sqrt(8))) + 4
    d = (3 + 2 * mp.sqrt(2)) ** n
    d = (d + 1 / d) / 2
    b = mp.mpf(-1)
    c = -d
    s = mp.mpf(0)
    for k in range(n):
        c = b - c
        s += c * term(k)
        b = b * ((k + n) * (k - n)) / ((k + mp.mpf(0.5)) * (k + 1))
    return s / d


def _em_tail(s: int, z: mp.mpf, digits: int) -> mp.mpf:
    """Euler-Maclaurin tail sum_{k>=0} (z+k)^-s.

    Stops when the correction terms drop below the target; raises if they
    start growing before that (z too small for the requested digits).
    """
    eps = mp.mpf(10) ** (-(digits + 5))
    total = z ** (1 - s) / (s - 1) + z ** (-s) / 2
    poch = mp.mpf(s)  # s*(s+1)*...*(s+2j-2), built incrementally
    zpow = z ** (-s - 1)
    z2 = z * z
    prev = mp.inf
    j = 1
    while True:
        term = mp.bernoulli(2 * j) / mp.factorial(2 * j) * poch * zpow
        if abs(term) < eps:
            total += term
            return total
        if abs(term) > prev:
            raise PrecisionUnachievable(
                f"Euler-Maclaurin tail diverges before reaching {digits} digits"
            )
        total += term
        prev = abs(term)
        poch *= (s + 2 * j - 1) * (s + 2 * j)
        zpow /= z2
        j += 1


def _hurwitz_em(s: int, x: Fraction, digits: int) -> mp.mpf:
    """sum_{k>=0} (k+x)^-s by direct terms plus an Euler-Maclaurin tail."""
    with mp.workdps(digits + GUARD_DIGITS):
        cut = max(10, int(0.6 * digits))
        xm = mp.mpf(x.numerator) / x.denominator
        head = mp.fsum((xm + k) ** (-s) for k in range(cut))
        return head + _em_tail(s, xm + cut, digits)


def zeta_eta_route(s: int, digits: int) -> mp.mpf:
    """zeta(s) from the alternating eta series with CVZ acceleration."""
    with mp.workdps(digits + GUARD_DIGITS):
        eta = alternating_sum(lambda k: mp.mpf(1) / mp.mpf(k + 1) ** s, digits)
        return eta / (1 - mp.mpf(2) ** (1 - s))


def zeta_em_route(s: int, digits: int) -> mp.mpf:
    """zeta(s) from the defining sum with an Euler-Maclaurin tail."""
    return _hurwitz_em(s, Fraction(1), digits)


def pi_machin_route(digits: int) -> mp.mpf:
    """pi = 16 atan(1/5) - 4 atan(1/239), arctangents summed directly."""

    def atan_inv(x: int) -> mp.mpf:
        total = mp.mpf(0)
        k = 0
        power = mp.mpf(x)  # x^(2k+1)
        x2 = x * x
        eps = mp.mpf(10) ** (-(digits + 5))
        while True:
            term = 1 / ((2 * k + 1) * power)
            if term < eps:
                return total
            total += term if k % 2 == 0 else -term
            power *= x2
            k += 1

    with mp.workdps(digits + GUARD_DIGITS):
        return 16 * atan_inv(5) - 4 * atan_inv(239)


def pi_agm_route(digits: int) -> mp.mpf:
    """pi by the Brent-Salamin arithmetic-geometric-mean iteration."""
    with mp.workdps(digits + GUARD_DIGITS):
        a = mp.mpf(1)
        b = 1 / mp.sqrt(2)
        t = mp.mpf(1) / 4
        p = mp.mpf(1)
        for _ in range(int(math.log2(digits + 10)) + 3):
            a_next = (a + b) / 2
            b = mp.sqrt(a * b)
            t -= p * (a - a_next) ** 2
            a = a_next
            p *= 2
        return (a + b) ** 2 / (4 * t)


def e_series_route(digits: int) -> mp.mpf:
    """e = sum 1/k!, factorials kept exact."""
    with mp.workdps(digits + GUARD_DIGITS):
        limit = 10 ** (digits + 5)
        total = mp.mpf(0)
        fact = 1
        k = 0
        while fact <= limit:
            total += mp.mpf(1) / fact
            k += 1
            fact *= k
        return total


def e_alternating_route(digits: int) -> mp.mpf:
    """1/e = sum (-1)^k/k!, inverted."""
    with mp.workdps(digits + GUARD_DIGITS):
        limit = 10 ** (digits + 5)
        total = mp.mpf(0)
        fact = 1
        k = 0
        while fact <= limit:
            total += mp.mpf(1) / fact if k % 2 == 0 else -mp.mpf(1) / fact
            k += 1
            fact *= k
        return 1 / total


def ln2_geometric_route(digits: int) -> mp.mpf:
    """ln 2 = sum_{k>=1} 1/(k 2^k)."""
    with mp.workdps(digits + GUARD_DIGITS):
        total = mp.mpf(0)
        power = 2
        k = 1
        limit = 10 ** (digits + 5)
        while power <= limit * (k + 1):
            total += mp.mpf(1) / (k * power)
            k += 1
            power *= 2
        return total


def ln2_atanh_route(digits: int) -> mp.mpf:
    """ln 2 = 2 atanh(1/3) = 2 sum 1/((2k+1) 3^(2k+1))."""
    with mp.workdps(digits + GUARD_DIGITS):
        total = mp.mpf(0)
        power = 3
        k = 0
        limit = 10 ** (digits + 5)
        while power <= limit:
            total += mp.mpf(2) / ((2 * k + 1) * power)
            k += 1
            power *= 9
        return total


def catalan_lerch_route(digits: int) -> mp.mpf:
    """G = sum (-1)^k/(2k+1)^2 = Phi(-1, 2, 1/2)/4, CVZ-accelerated."""
    with mp.workdps(digits + GUARD_DIGITS):
        return alternating_sum(lambda k: mp.mpf(1) / (2 * k + 1) ** 2, digits)


def catalan_trigamma_route(digits: int) -> mp.mpf:
    """G = (psi1(1/4) - psi1(3/4)) / 16 with Euler-Maclaurin trigamma sums."""
    a = _hurwitz_em(2, Fraction(1, 4), digits + 2)
    b = _hurwitz_em(2, Fraction(3, 4), digits + 2)
    with mp.workdps(digits + GUARD_DIGITS):
        return (a - b) / 16


def _int_nth_root(k: int, n: int) -> int:
    """floor(k ** (1/n)) by Newton iteration on integers."""
    if k < 0:
        raise ValueError("negative radicand")
    if k == 0:
        return 0
    x = 1 << (k.bit_length() // n + 1)
    while True:
        y = ((n - 1) * x + k // x ** (n - 1)) // n
        if y >= x:
            return x
        x = y


def root_integer_route(k: int, n: int, digits: int) -> mp.mpf:
    """k^(1/n) with the digits read off an exact integer n-th root."""
    shift = digits + GUARD_DIGITS
    scaled = _int_nth_root(k * 10 ** (n * shift), n)
    with mp.workdps(digits + GUARD_DIGITS):
        return mp.mpf(scaled) / mp.mpf(10) ** shift


def root_float_route(k: int, n: int, digits: int) -> mp.mpf:
    with mp.workdps(digits + GUARD_DIGITS):
        return mp.root(k, n)


# ---------------------------------------------------------------------------
# catalog
# ---------------------------------------------------------------------------


@dataclass
class ConstantEntry:
    name: str
    value: mp.mpf
    digits_computed: int
    digits_verified: int
    provenance: str


def _parse_name(name: str):
    """Return (kind, payload) for a catalog name, or raise UnknownConstant."""
    if name in ("pi", "e", "ln2", "catalan", "phi"):
        return name, None
    if name.startswith("zeta") and name[4:].isdigit():
        s = int(name[4:])
        if 2 <= s <= 7:
            return "zeta", s
        raise UnknownConstant(f"zeta order out of catalog range: {name}")
    for prefix, degree in (("sqrt", 2), ("cbrt", 3)):
        if name.startswith(prefix + "(") and name.endswith(")"):
            body = name[len(prefix) + 1 : -1]
            if body.isdigit() and int(body) > 0:
                return "root", (int(body), degree)
    raise UnknownConstant(name)


class ConstantsCatalog:
    """Lazy, thread-safe store of verified constant values.

    Values are computed by route A at the requested precision and re-verified
    against route B up to ``verify_cap`` digits; precision upgrades replace
    the cached entry under a single writer lock.
    """

    def __init__(self, verify_cap: int = VERIFY_DIGITS_CAP):
        self.verify_cap = verify_cap
        self._entries: dict[str, ConstantEntry] = {}
        self._lock = threading.Lock()

    def _routes(self, name: str):
        kind, payload = _parse_name(name)
        if kind == "zeta":
            s = payload
            return (
                lambda d: zeta_eta_route(s, d),
                lambda d: zeta_em_route(s, d),
                f"eta-series (CVZ) / Euler-Maclaurin, s={s}",
            )
        if kind == "pi":
            return pi_machin_route, pi_agm_route, "Machin arctangents / Brent-Salamin AGM"
        if kind == "e":
            return e_series_route, e_alternating_route, "factorial series / inverted alternating"
        if kind == "ln2":
            return ln2_geometric_route, ln2_atanh_route, "1/(k 2^k) series / 2 atanh(1/3)"
        if kind == "catalan":
            return (
                catalan_lerch_route,
                catalan_trigamma_route,
                "alternating (CVZ) / trigamma difference",
            )
        if kind == "phi":
            def phi_a(d):
                with mp.workdps(d + GUARD_DIGITS):
                    return (1 + root_integer_route(5, 2, d)) / 2

            def phi_b(d):
                with mp.workdps(d + GUARD_DIGITS):
                    return (1 + root_float_route(5, 2, d)) / 2

            return phi_a, phi_b, "integer sqrt(5) / float sqrt(5)"
        k, degree = payload
        return (
            lambda d: root_integer_route(k, degree, d),
            lambda d: root_float_route(k, degree, d),
            f"integer {degree}-th root / float root, k={k}",
        )

    def get(self, name: str, digits: int) -> mp.mpf:
        """Value correct to at least ``digits`` decimal digits."""
        if digits < 1:
            raise ValueError("digits must be positive")
        entry = self._entries.get(name)
        if entry is not None and entry.digits_computed >= digits:
            return entry.value
        route_a, route_b, provenance = self._routes(name)
        value = route_a(digits)
        verify_digits = min(digits, self.verify_cap)
        check = route_b(verify_digits)
        with mp.workdps(verify_digits + GUARD_DIGITS):
            diff = abs(value - check)
            if diff > mp.mpf(10) ** (-(verify_digits - 2)):
                raise PrecisionUnachievable(
                    f"dual routes for {name} disagree at {verify_digits} digits: {diff}"
                )
        with self._lock:
            cur = self._entries.get(name)
            if cur is None or cur.digits_computed < digits:
                self._entries[name] = ConstantEntry(
                    name=name,
                    value=value,
                    digits_computed=digits,
                    digits_verified=verify_digits,
                    provenance=provenance,
                )
        return value

    def entry(self, name: str) -> ConstantEntry:
        if name not in self._entries:
            raise UnknownConstant(name)
        return self._entries[name]

    def manifest(self) -> list[dict]:
        """name -> series id -> verified digits, for every materialised entry."""
        return [
            {
                "name": e.name,
                "series": e.provenance,
                "digits_verified": e.digits_verified,
                "digits_computed": e.digits_computed,
            }
            for e in self._entries.values()
        ]


_default_catalog = ConstantsCatalog()


def default_catalog() -> ConstantsCatalog:
    return _default_catalog


def get_constant(name: str, digits: int, catalog: ConstantsCatalog | None = None) -> mp.mpf:
    return (catalog or _default_catalog).get(name, digits)


# ---------------------------------------------------------------------------
# derived families: hat-zeta and Lerch Phi(-1, s, alpha)
# ---------------------------------------------------------------------------


def hat_zeta_expansion(s: int, r: int) -> dict:
    """Exact expansion of the hat-zeta family over {zeta(k), 1}.

    Keys are 'zeta<k>' and '1'; values are Fractions.  Defined by
    hz(s, 0) = zeta(s); hz(2, R) = zeta(2) - sum_{j<=R} 1/j^2;
    hz(s, R) = hz(s, R-1) - (1/R) hz(s-1, R).
    """
    if s < 2 or r < 0:
        raise ValueError("need s >= 2 and R >= 0")
    if r == 0:
        return {f"zeta{s}": Fraction(1)}
    if s == 2:
        tail = -sum(Fraction(1, j * j) for j in range(1, r + 1))
        return {"zeta2": Fraction(1), "1": tail}
    prev = hat_zeta_expansion(s, r - 1)
    lower = hat_zeta_expansion(s - 1, r)
    out = dict(prev)
    for key, coeff in lower.items():
        out[key] = out.get(key, Fraction(0)) - Fraction(1, r) * coeff
    return {k: v for k, v in out.items() if v != 0}


def hat_zeta(s: int, r: int, digits: int, catalog: ConstantsCatalog | None = None) -> mp.mpf:
    """Numeric hat-zeta via its exact zeta-basis expansion."""
    expansion = hat_zeta_expansion(s, r)
    cat = catalog or _default_catalog
    with mp.workdps(digits + GUARD_DIGITS):
        total = mp.mpf(0)
        for key, coeff in expansion.items():
            base = mp.mpf(1) if key == "1" else cat.get(key, digits + 5)
            total += base * mp.mpf(coeff.numerator) / coeff.denominator
        return total


def lerch_neg1(s: int, alpha: Fraction, digits: int) -> mp.mpf:
    """Phi(-1, s, alpha) = sum (-1)^k / (k + alpha)^s, CVZ-accelerated."""
    alpha = Fraction(alpha)
    if s < 2 or alpha <= 0:
        raise ValueError("need s >= 2 and alpha > 0")
    num, den = alpha.numerator, alpha.denominator
    with mp.workdps(digits + GUARD_DIGITS):
        def term(k: int) -> mp.mpf:
            return (mp.mpf(den) / (k * den + num)) ** s

        return alternating_sum(term, digits)
