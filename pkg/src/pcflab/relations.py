"""Integer-relation detection (PSLQ) and constant matching.

The matcher follows the production recipe: feed (1, eta, -v, -v*eta) to PSLQ
so a hit encodes v = (c0 + c1*eta)/(c2 + c3*eta), extend the basis for
multi-constant formulas, and guard against overfits by comparing the input
digit count K with the total digit count l of the coefficients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import mpmath as mp

from pcflab.constants import ConstantsCatalog, default_catalog
from pcflab.precision import GUARD_DIGITS, int_digits


class NoMatch(ArithmeticError):
    pass


class LowConfidence(ArithmeticError):
    def __init__(self, relation: "Relation", margin: int):
        super().__init__(
            f"confidence {relation.confidence} below margin {margin}: {relation.coefficients}"
        )
        self.relation = relation


class PrecisionTooLow(ArithmeticError):
    pass


@dataclass(frozen=True)
class Relation:
    """An integer vector c with sum(c_i * z_i) ~ 0.

    confidence = K - l, the margin between the digits the value carries and
    the digits spent on the coefficients (App-B-style compactness measure).
    """

    coefficients: tuple
    residual: float
    input_digits: int
    coeff_digits: int
    confidence: int
    basis: tuple = ()

    def to_json(self) -> dict:
        return {
            "coefficients": list(self.coefficients),
            "residual": self.residual,
            "value_digits": self.input_digits,
            "coeff_digits": self.coeff_digits,
            "confidence": self.confidence,
            "basis": list(self.basis),
        }


@dataclass(frozen=True)
class ExclusionBound:
    """No relation found; any integer relation has euclidean norm >= bound."""

    norm_bound: float
    iterations: int


def _total_digits(coeffs: Sequence[int]) -> int:
    return sum(int_digits(c) for c in coeffs)


def _normalize(coeffs: list[int]) -> tuple:
    g = 0
    for c in coeffs:
        g = math.gcd(g, abs(c))
    if g > 1:
        coeffs = [c // g for c in coeffs]
    for c in coeffs:
        if c != 0:
            if c < 0:
                coeffs = [-x for x in coeffs]
            break
    return tuple(coeffs)


def pslq(
    z: Sequence[mp.mpf],
    max_coeff_digits: int = 20,
    tol_digits: int = 30,
    max_iterations: Optional[int] = None,
):
    """PSLQ with gamma = 2/sqrt(3) at the caller's working precision.

    Returns a Relation on success or an ExclusionBound when the iteration
    budget/coefficient cap is hit without finding one.  Requires working
    precision comfortably above tol_digits.
    """
    n = len(z)
    if n < 2:
        raise ValueError("need at least two inputs")
    if mp.mp.dps < tol_digits + GUARD_DIGITS:
        raise PrecisionTooLow(
            f"working precision {mp.mp.dps} < tol {tol_digits} + guard {GUARD_DIGITS}"
        )
    if any(v == 0 for v in z):
        raise ValueError("inputs must be nonzero at working precision")
    with mp.workdps(mp.mp.dps + 2 * GUARD_DIGITS):
        return _pslq_core(z, max_coeff_digits, tol_digits, max_iterations)


def _pslq_core(z, max_coeff_digits, tol_digits, max_iterations):
    n = len(z)
    x = [mp.mpf(v) for v in z]
    tol = mp.mpf(10) ** (-tol_digits)
    gamma = mp.sqrt(mp.mpf(4) / 3)
    max_iterations = max_iterations or (256 * n * n + 64 * mp.mp.dps)
    coeff_cap = 10**max_coeff_digits

    # normalise the input vector
    norm = mp.sqrt(mp.fsum(v * v for v in x))
    y = [v / norm for v in x]
    s = [mp.sqrt(mp.fsum(y[k] * y[k] for k in range(j, n))) for j in range(n)]

    # lower-trapezoidal H
    H = [[mp.mpf(0)] * (n - 1) for _ in range(n)]
    for j in range(n - 1):
        H[j][j] = s[j + 1] / s[j]
        for i in range(j + 1, n):
            H[i][j] = -y[i] * y[j] / (s[j] * s[j + 1])

    A = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    B = [[1 if i == j else 0 for j in range(n)] for i in range(n)]

    def reduce_row(i: int, j_top: int):
        for j in range(j_top, -1, -1):
            if H[j][j] == 0:
                continue
            t = int(mp.nint(H[i][j] / H[j][j]))
            if t == 0:
                continue
            y[j] += t * y[i]
            for k in range(j + 1):
                H[i][k] -= t * H[j][k]
            for k in range(n):
                A[i][k] -= t * A[j][k]
                B[k][j] += t * B[k][i]

    for i in range(1, n):
        reduce_row(i, i - 1)

    def found(col: int):
        coeffs = [B[k][col] for k in range(n)]
        if all(c == 0 for c in coeffs):
            return None
        if max(abs(c) for c in coeffs) >= coeff_cap:
            return None
        residual = mp.fsum(c * v for c, v in zip(coeffs, x))
        if abs(residual) > tol:
            return None
        coeffs = _normalize(coeffs)
        residual = float(abs(mp.fsum(c * v for c, v in zip(coeffs, x))))
        return Relation(
            coefficients=coeffs,
            residual=residual,
            input_digits=tol_digits,
            coeff_digits=_total_digits(coeffs),
            confidence=tol_digits - _total_digits(coeffs),
        )

    iterations = 0
    while iterations < max_iterations:
        iterations += 1
        # row with the gamma-weighted largest diagonal
        m, best = 0, mp.mpf(0)
        w = gamma
        for i in range(n - 1):
            v = w * abs(H[i][i])
            if v > best:
                best, m = v, i
            w *= gamma

        y[m], y[m + 1] = y[m + 1], y[m]
        H[m], H[m + 1] = H[m + 1], H[m]
        A[m], A[m + 1] = A[m + 1], A[m]
        for k in range(n):
            B[k][m], B[k][m + 1] = B[k][m + 1], B[k][m]

        if m < n - 2:
            t0 = mp.hypot(H[m][m], H[m][m + 1])
            if t0 != 0:
                c0 = H[m][m] / t0
                s0 = H[m][m + 1] / t0
                for i in range(m, n):
                    h1, h2 = H[i][m], H[i][m + 1]
                    H[i][m] = c0 * h1 + s0 * h2
                    H[i][m + 1] = -s0 * h1 + c0 * h2

        for i in range(m + 1, n):
            reduce_row(i, min(i - 1, m + 1))

        # detection: a y-entry collapsing to ~0 names a B column
        small = min(range(n), key=lambda k: abs(y[k]))
        if abs(y[small]) < tol:
            rel = found(small)
            if rel is not None:
                return rel
        if abs(H[n - 2][n - 2]) < mp.mpf(10) ** (-(mp.mp.dps - GUARD_DIGITS)):
            rel = found(n - 1)
            if rel is not None:
                return rel
        # once 1/max|H| exceeds the coefficient cap, no acceptable relation
        # is left to find (the H entries bound every remaining relation)
        h_max = max(abs(H[i][j]) for i in range(n) for j in range(n - 1))
        if h_max > 0 and 1 / h_max > 100 * coeff_cap:
            break

    bound = max(abs(H[j][j]) for j in range(n - 1))
    bound = float(1 / bound) if bound > 0 else float("inf")
    return ExclusionBound(norm_bound=bound, iterations=iterations)


# ---------------------------------------------------------------------------
# constant matching
# ---------------------------------------------------------------------------


def mobius_match(
    value: mp.mpf,
    value_digits: int,
    constant: str,
    max_coeff_digits: int = 20,
    margin: int = 10,
    catalog: Optional[ConstantsCatalog] = None,
) -> Relation:
    """Match v against one constant via the vector (1, eta, -v, -v*eta).

    A hit (c0, c1, c2, c3) encodes v = (c0 + c1*eta)/(c2 + c3*eta), holds to
    value_digits - 5 digits, and is normalised (gcd 1, first nonzero > 0).
    """
    if value_digits < 25:
        raise ValueError("need at least 25 digits of the value")
    cat = catalog or default_catalog()
    eta = cat.get(constant, value_digits + 5)
    with mp.workdps(value_digits + GUARD_DIGITS):
        v = mp.mpf(value)
        vec = [mp.mpf(1), eta, -v, -v * eta]
        result = pslq(vec, max_coeff_digits=max_coeff_digits, tol_digits=value_digits - 5)
    if isinstance(result, ExclusionBound):
        raise NoMatch(f"no relation with {constant} (norm bound {result.norm_bound:.3g})")
    relation = Relation(
        coefficients=result.coefficients,
        residual=result.residual,
        input_digits=value_digits,
        coeff_digits=result.coeff_digits,
        confidence=value_digits - result.coeff_digits,
        basis=("1", constant, "-v", f"-v*{constant}"),
    )
    if relation.confidence < margin:
        raise LowConfidence(relation, margin)
    return relation


def extended_match(
    value: mp.mpf,
    value_digits: int,
    constants: Sequence[str],
    include_products: bool = False,
    max_coeff_digits: int = 20,
    margin: int = 10,
    catalog: Optional[ConstantsCatalog] = None,
) -> Relation:
    """Match v as a ratio of two integer combinations of several constants.

    The basis is (1, eta_1..eta_k [, eta_i*eta_j products]); the PSLQ vector
    is the basis followed by -v times the basis.
    """
    cat = catalog or default_catalog()
    labels = ["1"]
    values = [None]
    etas = []
    for name in constants:
        eta = cat.get(name, value_digits + 5)
        etas.append((name, eta))
        labels.append(name)
        values.append(eta)
    if include_products:
        for i in range(len(etas)):
            for j in range(i, len(etas)):
                labels.append(f"{etas[i][0]}*{etas[j][0]}")
                values.append(etas[i][1] * etas[j][1])
    if len(labels) > 8:
        raise ValueError(f"basis too large after expansion: {len(labels)} > 8")
    with mp.workdps(value_digits + GUARD_DIGITS):
        v = mp.mpf(value)
        vec = [mp.mpf(1)] + [mp.mpf(x) for x in values[1:]]
        vec = vec + [-v * b for b in vec]
        result = pslq(vec, max_coeff_digits=max_coeff_digits, tol_digits=value_digits - 5)
    if isinstance(result, ExclusionBound):
        raise NoMatch(f"no relation over {list(constants)} (norm bound {result.norm_bound:.3g})")
    relation = Relation(
        coefficients=result.coefficients,
        residual=result.residual,
        input_digits=value_digits,
        coeff_digits=result.coeff_digits,
        confidence=value_digits - result.coeff_digits,
        basis=tuple(labels) + tuple(f"-v*{l}" for l in labels),
    )
    if relation.confidence < margin:
        raise LowConfidence(relation, margin)
    return relation


def overfit_filter(relation: Relation, margin: int = 10) -> str:
    """Accept iff K - l >= margin (inclusive boundary)."""
    return "Accept" if relation.confidence >= margin else "Reject"


def mobius_apply(coeffs: Sequence[int], eta: mp.mpf) -> mp.mpf:
    """(c0 + c1*eta) / (c2 + c3*eta)."""
    c0, c1, c2, c3 = coeffs
    return (c0 + c1 * eta) / (c2 + c3 * eta)
