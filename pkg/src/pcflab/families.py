"""Generators for the parametric continued-fraction families.

All generators return expanded canonical Pcfs.  Rational parameters are
cleared to integer polynomials by the equivalence transform (a, b) ->
(c a, c^2 b), which rescales the limit by a known constant without changing
which constant it is.
"""

from __future__ import annotations

from fractions import Fraction

from pcflab.exactmath import IntPolynomial
from pcflab.pcf import DEPTH_VAR, Pcf


class DegenerateParams(ValueError):
    pass


_V = (DEPTH_VAR,)
_n = IntPolynomial.variable(_V, DEPTH_VAR)
_one = IntPolynomial.const(_V, 1)


def _const(x) -> IntPolynomial:
    return IntPolynomial.const(_V, x)


def _inflate(a: IntPolynomial, b: IntPolynomial, scale: int) -> tuple:
    if scale == 1:
        return a, b
    return a.scale(scale), b.scale(scale * scale)


def _clear(a: IntPolynomial, b: IntPolynomial) -> Pcf:
    lam = a.denominator_lcm()
    lamb = b.denominator_lcm()
    while (lam * lam) % lamb:
        lam *= lamb
    a, b = _inflate(a, b, lam)
    if not (a.is_integral() and b.is_integral()):
        raise DegenerateParams("could not clear denominators")
    return Pcf(a, b)


def sigma_poly(d: int) -> IntPolynomial:
    """sigma(n, d) = n^d + (n+1)^d."""
    return _n**d + (_n + 1) ** d


def sigma_scheme_pcf(coeffs: dict, big_b: int, d: int) -> Pcf:
    """a = sum_j c_j sigma(n, j) over j = d, d-2, ...; b = -B n^(2d)."""
    if big_b == 0:
        raise DegenerateParams("B must be nonzero")
    a = IntPolynomial.zero(_V)
    for j, cj in coeffs.items():
        if not (0 <= j <= d and (d - j) % 2 == 0):
            raise DegenerateParams(f"sigma index {j} invalid for degree {d}")
        a = a + sigma_poly(j) * cj
    if a.is_zero():
        raise DegenerateParams("a vanishes identically")
    b = _const(-big_b) * _n ** (2 * d)
    return Pcf(a, b)


def zzz_sr_pcf(s: int, r) -> Pcf:
    """The mixed-zeta family: a = n^s + (n+1)^(s-1) (n+1+R),
    b = -n^(2s-1) (n+R), limit 1/hat-zeta(s, R)."""
    if s < 2:
        raise DegenerateParams("need s >= 2")
    r = Fraction(r)
    a = _n**s + (_n + 1) ** (s - 1) * (_n + 1 + _const(r))
    b = -(_n ** (2 * s - 1)) * (_n + _const(r))
    return _clear(a, b)


def zeta3_alpha_pcf(alpha) -> Pcf:
    """Row alpha of the zeta(3) family: a = n^3+(n+1)^3+2a(a-1)(2n+1), b = -n^6."""
    alpha = Fraction(alpha)
    coeff = 2 * alpha * (alpha - 1)
    a = _n**3 + (_n + 1) ** 3 + _const(coeff) * (2 * _n + 1)
    b = -(_n**6)
    return _clear(a, b)


def zeta2_alpha_pcf(alpha) -> Pcf:
    """Row alpha of the zeta(2)/Lerch family: a = n^2+(n+1)^2+a(a-1), b = -n^4."""
    alpha = Fraction(alpha)
    coeff = alpha * (alpha - 1)
    a = _n**2 + (_n + 1) ** 2 + _const(coeff)
    b = -(_n**4)
    return _clear(a, b)


def polylog_pcf(d: int, c) -> Pcf:
    """a = n^d + c (n+1)^d, b = -c n^(2d); the limit is Li_d(1/c)."""
    c = Fraction(c)
    if c == 0:
        raise DegenerateParams("c must be nonzero")
    if d < 1:
        raise DegenerateParams("need degree >= 1")
    a = _n**d + _const(c) * (_n + 1) ** d
    b = _const(-c) * _n ** (2 * d)
    return _clear(a, b)


def zigzag_roots_pcf(r_roots, s_roots, c=1) -> Pcf:
    """General root form: a = prod(n + r_i) + c prod(n + 1 + s_i),
    b = -c prod(n + r_i) prod(n + s_i)."""
    c = Fraction(c)
    if c == 0:
        raise DegenerateParams("c must be nonzero")
    if len(r_roots) != len(s_roots) or not r_roots:
        raise DegenerateParams("need equally many r and s roots")
    pr = _one
    ps = _one
    ps1 = _one
    for r in r_roots:
        pr = pr * (_n + _const(Fraction(r)))
    for s in s_roots:
        ps = ps * (_n + _const(Fraction(s)))
        ps1 = ps1 * (_n + 1 + _const(Fraction(s)))
    a = pr + _const(c) * ps1
    b = _const(-c) * pr * ps
    return _clear(a, b)


FAMILY_KINDS = {
    "sigma": "sigma_scheme_pcf(coeffs, B, d)",
    "zzz_sr": "zzz_sr_pcf(s, R)",
    "zeta3_alpha": "zeta3_alpha_pcf(alpha)",
    "zeta2_alpha": "zeta2_alpha_pcf(alpha)",
    "polylog": "polylog_pcf(d, c)",
    "zigzag_roots": "zigzag_roots_pcf(r, s, c)",
}


def make_family_pcf(kind: str, params: dict) -> Pcf:
    """Dispatch by family name; params are the keyword arguments above."""
    if kind == "sigma":
        coeffs = {int(k): int(v) for k, v in params["coeffs"].items()}
        return sigma_scheme_pcf(coeffs, int(params["B"]), int(params["d"]))
    if kind == "zzz_sr":
        return zzz_sr_pcf(int(params["s"]), _as_rational(params["R"]))
    if kind == "zeta3_alpha":
        return zeta3_alpha_pcf(_as_rational(params["alpha"]))
    if kind == "zeta2_alpha":
        return zeta2_alpha_pcf(_as_rational(params["alpha"]))
    if kind == "polylog":
        return polylog_pcf(int(params["d"]), _as_rational(params["c"]))
    if kind == "zigzag_roots":
        return zigzag_roots_pcf(
            [_as_rational(r) for r in params["r"]],
            [_as_rational(s) for s in params["s"]],
            _as_rational(params.get("c", 1)),
        )
    raise DegenerateParams(f"unknown family kind {kind!r}; known: {sorted(FAMILY_KINDS)}")


def _as_rational(x) -> Fraction:
    if isinstance(x, str) and "/" in x:
        num, den = x.split("/")
        return Fraction(int(num), int(den))
    return Fraction(x)
