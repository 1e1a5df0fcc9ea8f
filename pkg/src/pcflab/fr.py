"""The factorial-reduction test.

Convergent numerators/denominators of a polynomial continued fraction grow
factorially, like (n!)^d.  For the rare fractions that converge to
interesting constants, dividing out g_n = gcd(p_n, q_n) leaves sequences
that grow only exponentially (s^n).  We detect this by fitting

    ln|p_n / g_n|  ~=  dhat * (n ln n - n) + ln_s * n

over the deep samples of a backoff schedule and thresholding dhat.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from pcflab.pcf import Pcf, ConvergentState, TerminatedFraction, backoff_schedule, iter_samples
from pcflab.precision import int_ln


class AllZeroConvergents(ArithmeticError):
    pass


class Verdict(str, Enum):
    FACTORIAL_REDUCTION = "FactorialReduction"
    NO_REDUCTION = "NoReduction"
    INCONCLUSIVE = "Inconclusive"


# dhat below the low bar is exponential growth, above the high bar factorial;
# the band in between is retried at greater depth by callers
DHAT_LOW = 0.1
DHAT_HIGH = 0.5


@dataclass(frozen=True)
class GrowthEstimate:
    ln_s: float
    dhat: float
    verdict: Verdict
    samples: list = field(default_factory=list)  # (depth, ln|p/g|) pairs

    def to_json(self) -> dict:
        return {
            "ln_s": self.ln_s,
            "dhat": self.dhat,
            "verdict": self.verdict.value,
            "samples": [[d, v] for d, v in self.samples],
        }

    @classmethod
    def from_json(cls, record) -> "GrowthEstimate":
        if isinstance(record, str):
            record = json.loads(record)
        return cls(
            ln_s=record["ln_s"],
            dhat=record["dhat"],
            verdict=Verdict(record["verdict"]),
            samples=[tuple(s) for s in record.get("samples", [])],
        )


def reduce(state: ConvergentState) -> tuple[int, int, int]:
    """(g, p/g, q/g) with g = gcd(|p|, |q|)."""
    if state.p == 0 and state.q == 0:
        raise AllZeroConvergents(f"p = q = 0 at depth {state.depth}")
    g = math.gcd(state.p, state.q)
    return g, state.p // g, state.q // g


def _fit_growth(points: list[tuple[int, float]]) -> tuple[float, float]:
    """Least-squares fit of ell(n) = dhat*(n ln n - n) + ln_s*n.

    The two regressors are nearly collinear over a finite window, which makes
    the joint ln_s estimate noisy.  The factorial exponent is structurally an
    integer, so after the joint fit we pin it to the nearest integer and
    refit ln_s alone; that removes the leakage without touching the verdict.
    """
    ns = np.array([n for n, _ in points], dtype=float)
    ys = np.array([v for _, v in points], dtype=float)
    stirling = ns * np.log(ns) - ns
    design = np.column_stack([stirling, ns])
    (dhat, _), *_ = np.linalg.lstsq(design, ys, rcond=None)
    d_star = max(0, round(dhat))
    resid = ys - d_star * stirling
    ln_s = float(np.dot(resid, ns) / np.dot(ns, ns))
    return ln_s, float(dhat)


def classify_fr(pcf: Pcf, max_depth: int, series: str = "p") -> GrowthEstimate:
    """Classify one fraction by the growth rate of its reduced convergents.

    GCDs are taken at the schedule sample points only; the fit uses the
    deepest half of the samples.  ``series`` selects the numerator or the
    denominator sequence (both share the asymptotic class).
    """
    if max_depth < 256:
        raise ValueError("max_depth must be at least 256 for a stable fit")
    if series not in ("p", "q"):
        raise ValueError("series must be 'p' or 'q'")
    samples = []
    for state in iter_samples(pcf, backoff_schedule(max_depth)):
        g, p_red, q_red = reduce(state)
        value = p_red if series == "p" else q_red
        if value == 0:
            continue
        samples.append((state.depth, int_ln(value)))
    if len(samples) < 4:
        raise AllZeroConvergents("not enough nonzero reduced convergents to fit")
    deep = samples[len(samples) // 2 :]
    ln_s, dhat = _fit_growth(deep)
    dhat = max(dhat, 0.0)
    if dhat < DHAT_LOW:
        verdict = Verdict.FACTORIAL_REDUCTION
    elif dhat > DHAT_HIGH:
        verdict = Verdict.NO_REDUCTION
    else:
        verdict = Verdict.INCONCLUSIVE
    return GrowthEstimate(ln_s=ln_s, dhat=dhat, verdict=verdict, samples=samples)
