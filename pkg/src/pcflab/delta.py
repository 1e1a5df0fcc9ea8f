"""Irrationality-measure extraction from matrix-field walks.

The empirical measure of a rational approximation P/Q of L is read off the
equality form of the Liouville inequality,

    delta = -ln|P/Q - L| / ln Q  -  1,

evaluated on content-reduced potentials.  The closed form divides the
unit-cell step matrix by its GCD content, balances the entry degrees, and
compares the limiting eigenvalue ratio with the measured exponential base.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence

import mpmath as mp
import numpy as np

from pcflab.exactmath import IntPolynomial, Mat2
from pcflab.cmf import (
    MatrixField,
    SingularStep,
    Trajectory,
    _reduce_step_matrix,
    _unit_cell_affine,
    apply_head,
    head_term,
    walk,
)
from pcflab.constants import ConstantsCatalog, default_catalog, hat_zeta_expansion
from pcflab.families import zzz_sr_pcf
from pcflab.pcf import backoff_schedule, iter_samples
from pcflab.precision import GUARD_DIGITS, int_ln


class InsufficientPrecision(ArithmeticError):
    pass


class DefectiveLimitMatrix(ArithmeticError):
    pass


class StuckAtSingular(ArithmeticError):
    pass


class SingularSystem(ArithmeticError):
    pass


@dataclass(frozen=True)
class DeltaReport:
    delta: float
    delta_std: float
    ln_s: float
    ln_eigen_ratio: Optional[float]
    method: str  # "Empirical" | "ClosedForm"
    trajectory: Optional[Trajectory]
    steps: int
    eigenvalues: Optional[tuple] = None  # (t, u, r): eigenvalues (t +- u sqrt(r)) exactly

    def to_json(self) -> dict:
        out = {
            "delta": self.delta,
            "delta_std": self.delta_std,
            "ln_s": self.ln_s,
            "method": self.method,
            "steps": self.steps,
        }
        if self.ln_eigen_ratio is not None:
            out["ln_eigen_ratio"] = self.ln_eigen_ratio
        if self.eigenvalues is not None:
            t, u, r = self.eigenvalues
            out["eigenvalues"] = {"rational": str(t), "root_coeff": str(u), "radicand": r}
        return out


def delta_point(p: int, q: int, g: int, L: mp.mpf, dps: int) -> Optional[float]:
    """One Liouville exponent sample from an exact P/Q with content g."""
    q_red = abs(q) // g
    if q_red <= 1:
        return None
    with mp.workdps(dps):
        diff = abs(mp.mpf(p) / q - L)
        # a difference at (or below) the last digits L carries is meaningless
        if diff == 0 or diff < mp.mpf(10) ** (-(dps - 2 * GUARD_DIGITS)):
            raise InsufficientPrecision(
                f"|P/Q - L| = {mp.nstr(diff, 3)} is below the precision floor"
            )
        return float(-mp.log(diff) / int_ln(q_red)) - 1.0


def _tail_stats(values: Sequence[float]) -> tuple[float, float]:
    tail = values[-max(2, len(values) // 4) :]
    return float(np.mean(tail)), float(np.std(tail))


def _fit_ln_s(points: Sequence[tuple[int, float]]) -> float:
    """Slope of ell(n) over the deepest half, intercept allowed."""
    deep = points[len(points) // 2 :]
    ns = np.array([n for n, _ in deep], dtype=float)
    ys = np.array([v for _, v in deep], dtype=float)
    slope, _ = np.polyfit(ns, ys, 1)
    return float(slope)


def delta_empirical(
    field: MatrixField,
    traj: Trajectory,
    L: mp.mpf,
    steps: int,
    digits: int,
) -> DeltaReport:
    """Tail-averaged empirical measure along a trajectory.

    ``digits`` must be the precision L carries; samples whose error dips
    below it raise InsufficientPrecision rather than returning noise.
    """
    head = head_term(field, traj)
    schedule = backoff_schedule(steps)
    if len(schedule) < 6:
        step_gap = max(1, steps // 8)
        schedule = sorted({max(2, step_gap * k) for k in range(1, 9)} | {steps})
    schedule = set(schedule)
    deltas = []
    growth = []
    for state in walk(field, traj, steps):
        if state.index not in schedule:
            continue
        V = apply_head(state.V, head)
        g = V.content() or 1
        d = delta_point(V.b, V.d, g, L, digits + GUARD_DIGITS)
        if d is not None:
            deltas.append((state.index, d))
            growth.append((state.index, int_ln(abs(V.d) // g)))
    if len(deltas) < 4:
        raise InsufficientPrecision("too few usable samples for a tail estimate")
    delta, std = _tail_stats([d for _, d in deltas])
    return DeltaReport(
        delta=delta,
        delta_std=std,
        ln_s=_fit_ln_s(growth),
        ln_eigen_ratio=None,
        method="Empirical",
        trajectory=traj,
        steps=steps,
    )


# ---------------------------------------------------------------------------
# closed form from the balanced step matrix
# ---------------------------------------------------------------------------


def _squarefree_split(n: int) -> tuple[int, int]:
    """n = u^2 * r with r squarefree; returns (u, r)."""
    u, r = 1, 1
    d = 2
    m = n
    while d * d <= m:
        e = 0
        while m % d == 0:
            m //= d
            e += 1
        u *= d ** (e // 2)
        if e % 2:
            r *= d
        d += 1
    r *= m
    return u, r


def balanced_limit_matrix(step: Mat2) -> tuple:
    """Leading-coefficient matrix of the degree-balanced step matrix.

    Balancing conjugates by diag(n^k, 1) with k = (deg m12 - deg m21)/2,
    which leaves the diagonal degrees alone and equalises the off-diagonal
    ones; only the leading coefficients at the common top degree survive the
    n -> infinity limit.  Returns (trace, det) of that 2x2 limit as exact
    rationals.
    """
    m11, m12, m21, m22 = step.entries()
    d11, d12 = m11.total_degree(), m12.total_degree()
    d21, d22 = m21.total_degree(), m22.total_degree()
    candidates = [d for d in (d11, d22) if d >= 0]
    if d12 >= 0 and d21 >= 0:
        off = Fraction(d12 + d21, 2)
        candidates.append(off)
    if not candidates:
        raise DefectiveLimitMatrix("zero step matrix")
    D = max(candidates)
    var = step.a.vars[0]
    l11 = m11.leading(var) if d11 == D else 0
    l22 = m22.leading(var) if d22 == D else 0
    if d12 >= 0 and d21 >= 0 and Fraction(d12 + d21, 2) == D:
        off_prod = m12.leading(var) * m21.leading(var)
    else:
        off_prod = 0
    trace = Fraction(l11 + l22)
    det = Fraction(l11) * l22 - off_prod
    return trace, det


def eigen_exact(trace: Fraction, det: Fraction) -> tuple:
    """Eigenvalues (t +- u sqrt(r)) of a 2x2 with the given trace and det.

    Exact when trace and det are integers or half-integers times squares;
    returned as the triple (t, u, r) with r squarefree (r = 1 for a rational
    pair).  Raises DefectiveLimitMatrix for equal or vanishing eigenvalues.
    """
    disc = trace * trace - 4 * det
    if disc == 0:
        raise DefectiveLimitMatrix("equal eigenvalues; measure undefined")
    if disc < 0:
        raise DefectiveLimitMatrix("complex eigenvalue pair; measure undefined")
    num_u, num_r = _squarefree_split(disc.numerator)
    den_u, den_r = _squarefree_split(disc.denominator)
    # sqrt(disc) = (num_u / (den_u * den_r)) * sqrt(num_r * den_r)
    u = Fraction(num_u, den_u * den_r) / 2
    r = num_r * den_r
    t = trace / 2
    if u == 0:
        raise DefectiveLimitMatrix("degenerate discriminant split")
    lo = t - u * math.sqrt(r)
    if abs(lo) < 1e-12 or (t * t == u * u * r):
        raise DefectiveLimitMatrix("zero eigenvalue; measure undefined")
    return t, u, r


def delta_closed_form(
    field: MatrixField,
    direction: Sequence[int],
    steps: int = 1500,
    start: Optional[Sequence] = None,
) -> DeltaReport:
    """Measure from the step-matrix eigenvalues: 1 + delta = ln|e+/e-| / ln s.

    The eigenvalue ratio is exact (balanced leading matrix); ln s is measured
    from the reduced walk along the same trajectory.
    """
    start = tuple(start) if start is not None else (1,) * field.dimension
    traj = Trajectory(start=start, direction=tuple(direction))
    step = _reduce_step_matrix(_unit_cell_affine(field, traj))
    trace, det = balanced_limit_matrix(step)
    t, u, r = eigen_exact(trace, det)
    sq = math.sqrt(r)
    e_hi, e_lo = float(t) + float(u) * sq, float(t) - float(u) * sq
    ln_ratio = abs(math.log(abs(e_hi) / abs(e_lo)))

    schedule = set(backoff_schedule(steps))
    growth = []
    for state in walk(field, traj, steps):
        if state.index in schedule:
            g = state.V.content() or 1
            growth.append((state.index, int_ln(abs(state.V.d) // g)))
    ln_s = _fit_ln_s(growth)
    delta = ln_ratio / ln_s - 1.0
    return DeltaReport(
        delta=delta,
        delta_std=0.0,
        ln_s=ln_s,
        ln_eigen_ratio=ln_ratio,
        method="ClosedForm",
        trajectory=traj,
        steps=steps,
        eigenvalues=(t, u, r),
    )


# ---------------------------------------------------------------------------
# delta maps and trajectory optimisers
# ---------------------------------------------------------------------------


@dataclass
class DeltaMap:
    xmax: int
    ymax: int
    values: dict  # (x, y) -> float; absent cells omitted

    def get(self, x: int, y: int) -> Optional[float]:
        return self.values.get((x, y))

    def max_cell(self) -> tuple:
        cell = max(self.values, key=self.values.get)
        return cell, self.values[cell]

    def positive_cells(self) -> list:
        return [cell for cell, v in self.values.items() if v > 0]

    def to_csv(self, stream) -> None:
        stream.write("x,y,delta\n")
        for (x, y) in sorted(self.values):
            stream.write(f"{x},{y},{self.values[(x, y)]:.6f}\n")


def _grid_potentials(field: MatrixField, origin, xmax: int, ymax: int):
    """DP table of exact potentials V(x, y) for a 2D field, origin at (1,1).

    Cells behind a singular step are marked None and all cells downstream of
    them stay reachable through the other axis when possible.
    """
    if field.dimension != 2:
        raise ValueError("grid potentials need a 2D field")
    ox, oy = [Fraction(s) for s in origin]
    table = {}
    table[(1, 1)] = Mat2.identity()

    from pcflab.cmf import _step_matrix_at

    def step(axis, pos):
        m = _step_matrix_at(field, axis, pos)
        return None if m.det() == 0 else m

    for x in range(2, xmax + 1):
        prev = table.get((x - 1, 1))
        m = step(0, (ox + x - 2, oy)) if prev is not None else None
        table[(x, 1)] = prev * m if (prev is not None and m is not None) else None
    for y in range(2, ymax + 1):
        for x in range(1, xmax + 1):
            below = table.get((x, y - 1))
            m = step(1, (ox + x - 1, oy + y - 2)) if below is not None else None
            table[(x, y)] = below * m if (below is not None and m is not None) else None
    return table


def delta_map(
    field: MatrixField,
    xmax: int,
    ymax: int,
    L: mp.mpf,
    digits: int,
    origin: Sequence = (1, 1),
) -> DeltaMap:
    """Empirical delta at every grid cell (Liouville equality form)."""
    if xmax < 2 or ymax < 2:
        raise ValueError("grid bounds must be at least 2")
    head = head_term(field, Trajectory(tuple(origin), (1, 0)))
    table = _grid_potentials(field, origin, xmax, ymax)
    values = {}
    for cell, V in table.items():
        if V is None:
            continue
        Vh = apply_head(V, head)
        g = Vh.content() or 1
        try:
            d = delta_point(Vh.b, Vh.d, g, L, digits + GUARD_DIGITS)
        except InsufficientPrecision:
            d = None
        if d is not None:
            values[cell] = d
    return DeltaMap(xmax=xmax, ymax=ymax, values=values)


def optimize_greedy(
    field: MatrixField,
    L: mp.mpf,
    horizon: int,
    digits: int,
    origin: Sequence = (1, 1),
) -> tuple[list, DeltaReport]:
    """Steepest-ascent walk: step to whichever neighbour has the larger delta."""
    if horizon < 10:
        raise ValueError("horizon must be at least 10")
    from pcflab.cmf import _step_matrix_at

    head = head_term(field, Trajectory(tuple(origin), (1, 0)))
    pos = [Fraction(s) for s in origin]
    cell = [1] * field.dimension
    V = Mat2.identity()
    path = [tuple(cell)]
    deltas = []
    for _ in range(horizon):
        best = None
        for axis in range(field.dimension):
            m = _step_matrix_at(field, axis, tuple(pos))
            if m.det() == 0:
                continue
            cand = V * m
            Vh = apply_head(cand, head)
            g = Vh.content() or 1
            try:
                d = delta_point(Vh.b, Vh.d, g, L, digits + GUARD_DIGITS)
            except InsufficientPrecision:
                d = None
            if d is not None and (best is None or d > best[0]):
                best = (d, axis, cand)
        if best is None:
            raise StuckAtSingular(f"no usable neighbour at {tuple(pos)}")
        d, axis, V = best
        pos[axis] += 1
        cell[axis] += 1
        path.append(tuple(cell))
        deltas.append(d)
    delta, std = _tail_stats(deltas)
    report = DeltaReport(
        delta=delta,
        delta_std=std,
        ln_s=float("nan"),
        ln_eigen_ratio=None,
        method="Empirical",
        trajectory=None,
        steps=horizon,
    )
    return path, report


def optimize_lls(
    field: MatrixField,
    L: mp.mpf,
    horizon: int,
    digits: int,
    origin: Sequence = (1, 1),
) -> tuple[tuple, DeltaReport]:
    """Anti-diagonal sweep + linear least squares through the argmax cells.

    For each n <= horizon the best cell on x + y - 2 = n is found; the
    fitted line through those cells gives the direction, and the deepest
    quartile of the per-diagonal maxima gives the delta estimate.
    """
    if horizon < 20:
        raise ValueError("horizon must be at least 20")
    if field.dimension != 2:
        raise ValueError("the LLS optimiser works on 2D fields")
    from pcflab.cmf import _step_matrix_at

    head = head_term(field, Trajectory(tuple(origin), (1, 0)))
    ox, oy = [Fraction(s) for s in origin]
    frontier = {(1, 1): Mat2.identity()}
    best_cells = []
    best_values = []
    for n in range(1, horizon + 1):
        nxt = {}
        for (x, y), V in frontier.items():
            if V is None:
                continue
            for axis, (dx, dy) in enumerate(((1, 0), (0, 1))):
                tgt = (x + dx, y + dy)
                if tgt in nxt:
                    continue
                m = _step_matrix_at(field, axis, (ox + x - 1, oy + y - 1))
                if m.det() == 0:
                    nxt[tgt] = None
                    continue
                nxt[tgt] = V * m
        frontier = nxt
        best = None
        for (x, y), V in frontier.items():
            if V is None:
                continue
            Vh = apply_head(V, head)
            g = Vh.content() or 1
            try:
                d = delta_point(Vh.b, Vh.d, g, L, digits + GUARD_DIGITS)
            except InsufficientPrecision:
                d = None
            if d is not None and (best is None or d > best[0]):
                best = (d, (x, y))
        if best is not None:
            best_values.append(best[0])
            best_cells.append(best[1])
    if len(best_cells) < 4:
        raise InsufficientPrecision("too few usable anti-diagonals")
    tail_start = len(best_cells) // 2
    xs = np.array([c[0] for c in best_cells[tail_start:]], dtype=float)
    ys = np.array([c[1] for c in best_cells[tail_start:]], dtype=float)
    slope, _ = np.polyfit(xs, ys, 1)
    direction = _snap_direction(float(slope))
    # the measure the fitted line reaches: walk it to the horizon depth
    cells = max(10, horizon // sum(direction))
    report = delta_empirical(
        field,
        Trajectory(tuple(origin), direction),
        L,
        cells,
        digits,
    )
    return direction, report


def _snap_direction(slope: float, cap: int = 3) -> tuple:
    """Nearest direction (dx, dy) with components <= cap to a fitted slope."""
    best = (1, 1)
    err = abs(slope - 1.0)
    for dx in range(1, cap + 1):
        for dy in range(1, cap + 1):
            if math.gcd(dx, dy) != 1:
                continue
            e = abs(slope - dy / dx)
            if e < err:
                best, err = (dx, dy), e
    return best


# ---------------------------------------------------------------------------
# the zeta(5) combination lattice
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CombinationPlan:
    r_values: dict  # s -> R_s
    coefficients: dict  # s -> Fraction
    target: str = "zeta5"

    def to_json(self) -> dict:
        return {
            "target": self.target,
            "r_values": {str(s): str(r) for s, r in self.r_values.items()},
            "coefficients": {str(s): str(c) for s, c in self.coefficients.items()},
        }


def solve_zeta5_coefficients(r_values: dict, target_s: int = 5) -> dict:
    """Rational c_s with sum c_s hz(s, R_s) = zeta(target_s), solved
    triangularly.

    The zeta-basis expansions are exactly triangular in the top zeta order;
    the leftover rational constant must cancel, otherwise the R-choice does
    not admit a combination (SingularSystem).
    """
    orders = tuple(range(2, target_s + 1))
    expansions = {s: hat_zeta_expansion(s, int(r_values[s])) for s in orders}
    coeffs = {}
    residual = {f"zeta{target_s}": Fraction(1)}
    for s in reversed(orders):
        key = f"zeta{s}"
        need = residual.get(key, Fraction(0))
        lead = expansions[s].get(key, Fraction(0))
        if lead == 0:
            if need != 0:
                raise SingularSystem(f"cannot eliminate {key}")
            coeffs[s] = Fraction(0)
            continue
        c = need / lead
        coeffs[s] = c
        for k, v in expansions[s].items():
            residual[k] = residual.get(k, Fraction(0)) - c * v
    leftover = {k: v for k, v in residual.items() if v != 0}
    if leftover:
        raise SingularSystem(f"combination leaves uncancelled terms: {leftover}")
    return coeffs


def zeta5_combination(
    r_values: dict,
    depth: int,
    digits: Optional[int] = None,
    catalog: Optional[ConstantsCatalog] = None,
) -> tuple[CombinationPlan, DeltaReport]:
    """Assemble sum c_s / PCF[s, R_s] into one rational sequence for zeta(5)
    and measure its Liouville exponent.

    Component convergents are combined exactly over a common (GCD-reduced)
    denominator at each backoff sample.
    """
    coeffs = solve_zeta5_coefficients(r_values)
    plan = CombinationPlan(r_values=dict(r_values), coefficients=coeffs)
    pcfs = {s: zzz_sr_pcf(s, int(r_values[s])) for s in (2, 3, 4, 5) if coeffs[s] != 0}
    # shallow assemblies (the regime the quoted measures live in) need dense
    # samples; the backoff schedule only helps at real depth
    schedule = list(range(2, depth + 1)) if depth <= 64 else backoff_schedule(depth)
    streams = {s: iter_samples(p, schedule) for s, p in pcfs.items()}
    samples = []
    for _ in schedule:
        states = {s: next(it) for s, it in streams.items()}
        n = next(iter(states.values())).depth
        total = Fraction(0)
        ok = True
        for s, st in states.items():
            if st.p == 0:
                ok = False
                break
            total += coeffs[s] * Fraction(st.q, st.p)
        if ok:
            samples.append((n, total))
    if len(samples) < 4:
        raise InsufficientPrecision("not enough usable combination samples")
    max_lnq = int_ln(samples[-1][1].denominator)
    digits = digits or int(0.5 * max_lnq / math.log(10)) + 80
    cat = catalog or default_catalog()
    L = cat.get("zeta5", digits)
    deltas = []
    growth = []
    for n, frac in samples:
        d = delta_point(frac.numerator, frac.denominator, 1, L, digits + GUARD_DIGITS)
        if d is not None:
            deltas.append(d)
            growth.append((n, int_ln(frac.denominator)))
    delta, std = _tail_stats(deltas)
    report = DeltaReport(
        delta=delta,
        delta_std=std,
        ln_s=_fit_ln_s(growth),
        ln_eigen_ratio=None,
        method="Empirical",
        trajectory=None,
        steps=depth,
    )
    return plan, report
