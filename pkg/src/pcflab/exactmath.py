"""Exact arithmetic core: sparse multivariate integer polynomials with a small
expression grammar, and 2x2 matrices over exact rings.

Polynomials are dictionaries mapping exponent tuples to nonzero coefficients
(Python ints normally; Fractions may appear transiently, e.g. in quotients,
and are normalised back to ints whenever the denominator is 1).  Everything
is immutable after construction and safe to share between threads.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from functools import reduce
from typing import Iterable, Mapping, Sequence, Union

Coeff = Union[int, Fraction]
Expt = tuple  # exponent tuple, one entry per variable


class PolySyntaxError(ValueError):
    """Raised on malformed expression text; carries the byte offset."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class UnknownVariable(PolySyntaxError):
    pass


class ArityMismatch(ValueError):
    pass


class RingMismatch(TypeError):
    pass


def _norm_coeff(c: Coeff) -> Coeff:
    if isinstance(c, Fraction) and c.denominator == 1:
        return int(c)
    return c


class IntPolynomial:
    """A sparse polynomial over declared variables, in canonical form."""

    __slots__ = ("vars", "terms", "_hash", "_dense")

    def __init__(self, variables: Sequence[str], terms: Mapping[Expt, Coeff]):
        object.__setattr__(self, "vars", tuple(variables))
        clean = {}
        n = len(self.vars)
        for expt, coeff in terms.items():
            if len(expt) != n:
                raise ArityMismatch(f"exponent tuple {expt} does not match {n} variables")
            coeff = _norm_coeff(coeff)
            if coeff != 0:
                clean[tuple(expt)] = coeff
        object.__setattr__(self, "terms", clean)
        object.__setattr__(self, "_hash", None)
        object.__setattr__(self, "_dense", None)

    def __setattr__(self, *_):
        raise AttributeError("IntPolynomial is immutable")

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls, variables: Sequence[str]) -> "IntPolynomial":
        return cls(variables, {})

    @classmethod
    def const(cls, variables: Sequence[str], value: Coeff) -> "IntPolynomial":
        return cls(variables, {(0,) * len(variables): value})

    @classmethod
    def variable(cls, variables: Sequence[str], name: str) -> "IntPolynomial":
        variables = tuple(variables)
        if name not in variables:
            raise ArityMismatch(f"{name!r} not among variables {variables}")
        expt = tuple(1 if v == name else 0 for v in variables)
        return cls(variables, {expt: 1})

    # -- ring operations ----------------------------------------------------

    def _coerce(self, other) -> "IntPolynomial":
        if isinstance(other, IntPolynomial):
            if other.vars != self.vars:
                raise RingMismatch(f"variable mismatch: {self.vars} vs {other.vars}")
            return other
        if isinstance(other, (int, Fraction)):
            return IntPolynomial.const(self.vars, other)
        raise RingMismatch(f"cannot combine IntPolynomial with {type(other).__name__}")

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.terms)
        for expt, c in other.terms.items():
            out[expt] = out.get(expt, 0) + c
        return IntPolynomial(self.vars, out)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        out = dict(self.terms)
        for expt, c in other.terms.items():
            out[expt] = out.get(expt, 0) - c
        return IntPolynomial(self.vars, out)

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __neg__(self):
        return IntPolynomial(self.vars, {e: -c for e, c in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                return IntPolynomial.zero(self.vars)
            return IntPolynomial(self.vars, {e: c * other for e, c in self.terms.items()})
        other = self._coerce(other)
        out: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                key = tuple(a + b for a, b in zip(e1, e2))
                out[key] = out.get(key, 0) + c1 * c2
        return IntPolynomial(self.vars, out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power")
        result = IntPolynomial.const(self.vars, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base if k > 1 else base
            k >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = IntPolynomial.const(self.vars, other)
        return (
            isinstance(other, IntPolynomial)
            and self.vars == other.vars
            and self.terms == other.terms
        )

    def __hash__(self):
        h = self._hash
        if h is None:
            h = hash((self.vars, frozenset(self.terms.items())))
            object.__setattr__(self, "_hash", h)
        return h

    def __bool__(self):
        return bool(self.terms)

    # -- queries ------------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_integral(self) -> bool:
        return all(isinstance(c, int) for c in self.terms.values())

    def total_degree(self) -> int:
        if not self.terms:
            return -1
        return max(sum(e) for e in self.terms)

    def degree(self, name: str) -> int:
        """Degree in one variable; -1 for the zero polynomial."""
        if not self.terms:
            return -1
        i = self.vars.index(name)
        return max(e[i] for e in self.terms)

    def constant_term(self) -> Coeff:
        return self.terms.get((0,) * len(self.vars), 0)

    def content(self) -> int:
        """GCD of the integer coefficients (0 for the zero polynomial)."""
        if not self.is_integral():
            raise RingMismatch("content of a non-integral polynomial")
        return reduce(math.gcd, (abs(c) for c in self.terms.values()), 0)

    def denominator_lcm(self) -> int:
        out = 1
        for c in self.terms.values():
            if isinstance(c, Fraction):
                out = out * c.denominator // math.gcd(out, c.denominator)
        return out

    def leading(self, name: str) -> Coeff:
        """Coefficient of the highest power of ``name`` with the other
        variables at exponent zero; 0 for the zero polynomial."""
        if not self.terms:
            return 0
        i = self.vars.index(name)
        d = self.degree(name)
        best = None
        for e, c in self.terms.items():
            if e[i] == d:
                if best is None or sum(e) < sum(best[0]):
                    best = (e, c)
        return best[1]

    # -- evaluation ---------------------------------------------------------

    def to_dense(self, name: str | None = None) -> list:
        """Ascending coefficient list for a univariate polynomial."""
        if len(self.vars) != 1 and name is None:
            raise ArityMismatch("to_dense needs a univariate polynomial")
        cached = self._dense
        if cached is not None:
            return cached
        d = self.total_degree()
        out = [0] * (d + 1) if d >= 0 else [0]
        for e, c in self.terms.items():
            out[e[0]] = c
        object.__setattr__(self, "_dense", out)
        return out

    def __call__(self, *point):
        return self.evaluate(point)

    def evaluate(self, point: Sequence[Coeff]) -> Coeff:
        if len(point) != len(self.vars):
            raise ArityMismatch(
                f"need {len(self.vars)} coordinates, got {len(point)}"
            )
        if len(self.vars) == 1:
            x = point[0]
            acc: Coeff = 0
            for c in reversed(self.to_dense()):
                acc = acc * x + c
            return _norm_coeff(Fraction(acc)) if isinstance(acc, Fraction) else acc
        total: Coeff = 0
        for e, c in self.terms.items():
            term = c
            for xi, ei in zip(point, e):
                if ei:
                    term *= xi**ei
            total += term
        return _norm_coeff(Fraction(total)) if isinstance(total, Fraction) else total

    def substitute(self, mapping: Mapping[str, object]) -> "IntPolynomial":
        """Compose: replace variables by polynomials/constants.

        Unmapped variables stay themselves.  The result lives over the union
        of the replacement polynomials' variables (which must all agree).
        """
        target_vars = None
        for val in mapping.values():
            if isinstance(val, IntPolynomial):
                if target_vars is None:
                    target_vars = val.vars
                elif target_vars != val.vars:
                    raise RingMismatch("replacement polynomials disagree on variables")
        if target_vars is None:
            target_vars = self.vars
        repl = {}
        for v in self.vars:
            if v in mapping:
                val = mapping[v]
                if isinstance(val, IntPolynomial):
                    repl[v] = val
                else:
                    repl[v] = IntPolynomial.const(target_vars, val)
            else:
                repl[v] = IntPolynomial.variable(target_vars, v)
        out = IntPolynomial.zero(target_vars)
        # cache powers per variable
        powers: dict = {v: {0: IntPolynomial.const(target_vars, 1)} for v in self.vars}

        def power(v, k):
            cache = powers[v]
            if k not in cache:
                cache[k] = power(v, k - 1) * repl[v]
            return cache[k]

        for e, c in self.terms.items():
            term = IntPolynomial.const(target_vars, c)
            for v, k in zip(self.vars, e):
                if k:
                    term = term * power(v, k)
            out = out + term
        return out

    def shift(self, name: str, delta: Coeff) -> "IntPolynomial":
        """Substitute ``name -> name + delta``."""
        var = IntPolynomial.variable(self.vars, name)
        return self.substitute({name: var + IntPolynomial.const(self.vars, delta)})

    def rename(self, new_vars: Sequence[str]) -> "IntPolynomial":
        if len(new_vars) != len(self.vars):
            raise ArityMismatch("rename must keep the variable count")
        return IntPolynomial(new_vars, self.terms)

    def embed(self, new_vars: Sequence[str]) -> "IntPolynomial":
        """Re-express over a superset of the current variables."""
        new_vars = tuple(new_vars)
        idx = []
        for v in self.vars:
            if v not in new_vars:
                raise ArityMismatch(f"{v!r} missing from {new_vars}")
            idx.append(new_vars.index(v))
        out = {}
        for e, c in self.terms.items():
            ne = [0] * len(new_vars)
            for pos, k in zip(idx, e):
                ne[pos] = k
            out[tuple(ne)] = c
        return IntPolynomial(new_vars, out)

    # -- exact division -----------------------------------------------------

    def scale(self, factor: Coeff) -> "IntPolynomial":
        if factor == 0:
            return IntPolynomial.zero(self.vars)
        return IntPolynomial(
            self.vars, {e: _norm_coeff(Fraction(c) * factor) for e, c in self.terms.items()}
        )

    def exact_div(self, divisor: "IntPolynomial"):
        """Quotient self / divisor when the division is exact, else None.

        Coefficient arithmetic is over the rationals, so a quotient with
        fractional coefficients is still found (callers rescale as needed).
        """
        divisor = self._coerce(divisor)
        if divisor.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        if self.is_zero():
            return self
        lead_e = max(divisor.terms)  # lex order on exponent tuples
        lead_c = divisor.terms[lead_e]
        rem = dict(self.terms)
        quot: dict = {}
        # the leading exponent strictly decreases each round, so the exponent
        # box of self bounds the iteration count
        box = 1
        for i in range(len(self.vars)):
            box *= max(e[i] for e in self.terms) + 1
        for _ in range(box + 10):
            if not rem:
                return IntPolynomial(self.vars, quot)
            re_ = max(rem)
            qe = tuple(a - b for a, b in zip(re_, lead_e))
            if any(k < 0 for k in qe):
                return None
            qc = Fraction(rem[re_]) / Fraction(lead_c)
            quot[qe] = quot.get(qe, 0) + qc
            for de, dc in divisor.terms.items():
                ke = tuple(a + b for a, b in zip(qe, de))
                nc = rem.get(ke, 0) - qc * dc
                if nc:
                    rem[ke] = nc
                else:
                    rem.pop(ke, None)
        return None

    # -- printing -----------------------------------------------------------

    def _term_order(self):
        # graded lexicographic, highest first: stable canonical print order
        return sorted(self.terms.items(), key=lambda item: (sum(item[0]), item[0]), reverse=True)

    def __str__(self):
        if not self.terms:
            return "0"
        pieces = []
        for e, c in self._term_order():
            factors = []
            for v, k in zip(self.vars, e):
                if k == 1:
                    factors.append(v)
                elif k > 1:
                    factors.append(f"{v}^{k}")
            if not factors:
                body = str(abs(c)) if isinstance(c, int) else str(abs(Fraction(c)))
            else:
                mono = "*".join(factors)
                a = abs(c) if isinstance(c, int) else abs(Fraction(c))
                body = mono if a == 1 else f"{a}*{mono}"
            sign = "-" if c < 0 else "+"
            pieces.append((sign, body))
        first_sign, first_body = pieces[0]
        out = (first_sign if first_sign == "-" else "") + first_body
        for sign, body in pieces[1:]:
            out += sign + body
        return out

    def __repr__(self):
        return f"IntPolynomial({self.vars}, {self})"


def poly_gcd_univariate(p: IntPolynomial, q: IntPolynomial) -> IntPolynomial:
    """Primitive GCD of two univariate integer polynomials (monic-free form:
    the result is integral with positive leading coefficient and content 1,
    scaled by nothing else)."""
    if p.vars != q.vars or len(p.vars) != 1:
        raise RingMismatch("univariate gcd needs matching single-variable polynomials")
    name = p.vars[0]

    def to_frac(poly):
        return [Fraction(c) for c in poly.to_dense()]

    a, b = to_frac(p), to_frac(q)

    def deg(v):
        while v and v[-1] == 0:
            v.pop()
        return len(v) - 1

    while deg(b) >= 0:
        # a <- a mod b, then swap
        while deg(a) >= deg(b) >= 0:
            k = deg(a) - deg(b)
            f = a[-1] / b[-1]
            for i in range(deg(b) + 1):
                a[i + k] -= f * b[i]
        a, b = b, a
    g = IntPolynomial(p.vars, {(i,): c for i, c in enumerate(a)})
    if g.is_zero():
        return g
    # clear denominators, strip content, fix the sign
    lcm = g.denominator_lcm()
    g = g.scale(lcm)
    g = g.scale(Fraction(1, g.content()))
    if g.leading(name) < 0:
        g = -g
    return g


# ---------------------------------------------------------------------------
# expression grammar
#
#   expr   := ["+"|"-"] term (("+"|"-") term)*
#   term   := factor (("*" factor) | implicit-paren)*
#   factor := base ("^" uint)?
#   base   := uint | var | "(" expr ")"
#
# Implicit multiplication is accepted only between an integer literal and an
# opening parenthesis ("12(...)"); "2n" is a syntax error.
# ---------------------------------------------------------------------------

_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")
_UINT_RE = re.compile(r"[0-9]+")


class _Parser:
    def __init__(self, text: str, variables: Sequence[str]):
        self.text = text
        self.vars = tuple(variables)
        self.pos = 0

    def error(self, message: str):
        raise PolySyntaxError(message, self.pos)

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expr(self) -> IntPolynomial:
        sign = 1
        ch = self.peek()
        if ch in "+-":
            self.pos += 1
            sign = -1 if ch == "-" else 1
        out = self.term()
        if sign < 0:
            out = -out
        while True:
            ch = self.peek()
            if ch == "+":
                self.pos += 1
                out = out + self.term()
            elif ch == "-":
                self.pos += 1
                out = out - self.term()
            else:
                return out

    def term(self) -> IntPolynomial:
        out, was_literal = self.factor()
        while True:
            ch = self.peek()
            if ch == "*":
                self.pos += 1
                nxt, _ = self.factor()
                out = out * nxt
                was_literal = False
            elif ch == "(" and was_literal:
                nxt, _ = self.factor()
                out = out * nxt
                was_literal = False
            else:
                return out

    def factor(self):
        base, was_literal = self.base()
        if self.peek() == "^":
            self.pos += 1
            self.skip_ws()
            m = _UINT_RE.match(self.text, self.pos)
            if not m:
                self.error("expected an unsigned integer exponent after '^'")
            self.pos = m.end()
            base = base ** int(m.group())
            was_literal = False
        return base, was_literal

    def base(self):
        ch = self.peek()
        if ch == "(":
            self.pos += 1
            inner = self.expr()
            if self.peek() != ")":
                self.error("expected ')'")
            self.pos += 1
            return inner, False
        m = _UINT_RE.match(self.text, self.pos)
        if m:
            self.pos = m.end()
            return IntPolynomial.const(self.vars, int(m.group())), True
        m = _NAME_RE.match(self.text, self.pos)
        if m:
            name = m.group()
            if name not in self.vars:
                raise UnknownVariable(f"unknown variable {name!r}", self.pos)
            self.pos = m.end()
            return IntPolynomial.variable(self.vars, name), False
        self.error("expected an integer, a variable or '('")


def parse_poly(text: str, variables: Sequence[str]) -> IntPolynomial:
    """Parse expression text into expanded canonical form."""
    p = _Parser(text, variables)
    out = p.expr()
    p.skip_ws()
    if p.pos != len(text):
        p.error("trailing input")
    return out


def eval_poly(p: IntPolynomial, point: Sequence[Coeff]) -> Coeff:
    """Exact evaluation; integer points give integer results."""
    return p.evaluate(point)


# ---------------------------------------------------------------------------
# 2x2 matrices over an exact ring
# ---------------------------------------------------------------------------


class Mat2:
    """A 2x2 matrix whose entries all live in one ring: int, Fraction, or
    IntPolynomial over one variable list."""

    __slots__ = ("a", "b", "c", "d")

    def __init__(self, a, b, c, d):
        entries = [a, b, c, d]
        poly_vars = {e.vars for e in entries if isinstance(e, IntPolynomial)}
        if len(poly_vars) > 1:
            raise RingMismatch(f"mixed polynomial rings: {poly_vars}")
        if poly_vars:
            vars_ = next(iter(poly_vars))
            entries = [
                e if isinstance(e, IntPolynomial) else IntPolynomial.const(vars_, e)
                for e in entries
            ]
        else:
            for e in entries:
                if not isinstance(e, (int, Fraction)):
                    raise RingMismatch(f"unsupported entry type {type(e).__name__}")
        self.a, self.b, self.c, self.d = (
            _norm_coeff(e) if isinstance(e, Fraction) else e for e in entries
        )

    @classmethod
    def identity(cls) -> "Mat2":
        return cls(1, 0, 0, 1)

    def entries(self):
        return (self.a, self.b, self.c, self.d)

    def is_polynomial(self) -> bool:
        return isinstance(self.a, IntPolynomial)

    def __mul__(self, other: "Mat2") -> "Mat2":
        if not isinstance(other, Mat2):
            return self.scale(other)
        return Mat2(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def scale(self, k) -> "Mat2":
        return Mat2(self.a * k, self.b * k, self.c * k, self.d * k)

    def det(self):
        return self.a * self.d - self.b * self.c

    def adjugate(self) -> "Mat2":
        return Mat2(self.d, -self.b, -self.c, self.a)

    def content(self) -> int:
        """GCD of the four entries of an integer matrix."""
        for e in self.entries():
            if not isinstance(e, int):
                raise RingMismatch("content needs an integer matrix")
        return reduce(math.gcd, (abs(e) for e in self.entries()), 0)

    def map(self, fn) -> "Mat2":
        return Mat2(fn(self.a), fn(self.b), fn(self.c), fn(self.d))

    def evaluate(self, point: Sequence[Coeff]) -> "Mat2":
        """Evaluate a polynomial matrix at an exact point."""
        if not self.is_polynomial():
            raise RingMismatch("evaluate needs a polynomial matrix")
        return self.map(lambda p: p.evaluate(point))

    def __eq__(self, other):
        return isinstance(other, Mat2) and self.entries() == other.entries()

    def __hash__(self):
        return hash(self.entries())

    def __repr__(self):
        return f"Mat2[[{self.a}, {self.b}], [{self.c}, {self.d}]]"


def mat2_mul(x: Mat2, y: Mat2) -> Mat2:
    return x * y


def mat2_det(x: Mat2):
    return x.det()


def mat2_content(x: Mat2) -> int:
    return x.content()
