"""Working-precision helpers shared by every numeric module.

All decimal values are mpmath ``mpf`` numbers.  A value is only meaningful
together with the precision it was computed at, so public functions either
take an explicit ``digits`` argument or run inside ``mp.workdps``.
"""

from __future__ import annotations

import math
from fractions import Fraction

import mpmath as mp

# Default working precision in decimal digits.  Large enough that relation
# matching with many constants never runs out of headroom; override per call.
DEFAULT_PRECISION = 4000

# Extra digits carried internally so that the last requested digit is trustworthy.
GUARD_DIGITS = 10

_LN2 = math.log(2.0)
_LN10 = math.log(10.0)


def int_ln(n: int) -> float:
    """Natural log of ``|n|`` for integers of any size (math.log overflows)."""
    if n == 0:
        raise ValueError("log of zero")
    n = abs(n)
    bits = n.bit_length()
    if bits <= 900:
        return math.log(n)
    # keep the top 64 bits as a float mantissa, account for the shift
    shift = bits - 64
    return math.log(n >> shift) + shift * _LN2


def int_digits(n: int) -> int:
    """Number of decimal digits of ``|n|`` (0 has one digit).

    Works for integers past the interpreter's int-to-str conversion limit;
    the float estimate is corrected by exact power comparisons.
    """
    n = abs(n)
    if n < 10**15:
        return len(str(n))
    d = int(int_ln(n) / _LN10) + 1
    while 10 ** (d - 1) > n:
        d -= 1
    while 10**d <= n:
        d += 1
    return d


def mpf_ratio(p: int, q: int, digits: int) -> mp.mpf:
    """``p / q`` rounded to ``digits`` significant decimal digits."""
    with mp.workdps(digits + GUARD_DIGITS):
        return mp.mpf(p) / mp.mpf(q)


def shared_decimal_digits(a: Fraction, b: Fraction, cap: int) -> int:
    """Largest K <= cap with floor(a * 10^K) == floor(b * 10^K), exactly.

    This is the digit-agreement count used to certify convergent precision;
    it is computed with integer arithmetic only, so there is no rounding to
    second-guess.  Returns -1 when even the integer parts disagree.
    """
    if a == b:
        return cap

    def ipart(x: Fraction, k: int) -> int:
        num = x.numerator * 10**k
        return num // x.denominator  # floor division, exact

    if ipart(a, 0) != ipart(b, 0):
        return -1
    # agreement is monotone decreasing in K, binary search the threshold
    lo, hi = 0, cap
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if ipart(a, mid) == ipart(b, mid):
            lo = mid
        else:
            hi = mid - 1
    return lo


def digits_agree(x: mp.mpf, y: mp.mpf, cap: int) -> int:
    """Float analogue of :func:`shared_decimal_digits` for mpf values."""
    if x == y:
        return cap
    if mp.floor(x) != mp.floor(y):
        return -1
    d = abs(x - y)
    if d == 0:
        return cap
    k = int(-mp.log10(d)) + 1
    k = min(max(k, 0), cap)
    while k > 0 and mp.floor(x * mp.mpf(10) ** k) != mp.floor(y * mp.mpf(10) ** k):
        k -= 1
    return k
