"""On-site verification of worker hits.

Each hit is independently re-tested at four times the scheme depth, its
limit is evaluated with certified digits, matched against the provided
constants, and the match re-validated at twice the precision before being
stored as a conjectured formula.  Unmatched (and rejected) hits are stored
too -- future constant lists may claim them.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Optional, Sequence

from pcflab.constants import ConstantsCatalog, default_catalog
from pcflab.fr import Verdict, classify_fr
from pcflab.grid.store import ResultStore
from pcflab.pcf import Pcf, TerminatedFraction, pcf_limit, pcf_limit_richardson
from pcflab.relations import LowConfidence, NoMatch, Relation, extended_match, mobius_match


@dataclass(frozen=True)
class VerifiedFormula:
    pcf: Pcf
    growth: dict  # GrowthEstimate JSON at 4x depth
    relation: Optional[Relation]
    matched_constant: Optional[str]
    validated_at_2x: bool
    status: str  # "confirmed" | "unmatched" | "rejected"
    value: Optional[str] = None
    value_digits: int = 0

    def to_json(self) -> dict:
        out = {
            "pcf": self.pcf.to_json(),
            "growth": self.growth,
            "status": self.status,
            "validated_at_2x": self.validated_at_2x,
            "value": self.value,
            "value_digits": self.value_digits,
        }
        if self.relation is not None:
            out["relation"] = self.relation.to_json()
            out["matched_constant"] = self.matched_constant
        return out


def _limit_with_fallback(pcf: Pcf, depth: int, digits: int):
    report = pcf_limit(pcf, depth, digits)
    if report.certified_digits < 30 and report.exact is None:
        # slow polynomial convergence: extrapolate instead of churning depth
        rich = pcf_limit_richardson(pcf, target_digits=digits)
        if rich.certified_digits > report.certified_digits:
            return rich
    return report


def verify_pipeline(
    hit: dict,
    constants: Sequence[str],
    scheme_depth: int = 512,
    target_digits: int = 60,
    margin: int = 10,
    store: Optional[ResultStore] = None,
    catalog: Optional[ConstantsCatalog] = None,
) -> VerifiedFormula:
    """Re-verify one worker hit and attempt the constant match.

    The outcome lands in the store either way: rejected (FR not reproduced),
    unmatched (FR confirmed, no relation), or confirmed with the relation and
    its 2x revalidation flag.
    """
    cat = catalog or default_catalog()
    pcf = Pcf.from_text(hit["a"], hit["b"])
    try:
        growth = classify_fr(pcf, 4 * scheme_depth)
    except (TerminatedFraction, ArithmeticError) as exc:
        growth = None
        result = VerifiedFormula(
            pcf=pcf,
            growth={"error": str(exc)},
            relation=None,
            matched_constant=None,
            validated_at_2x=False,
            status="rejected",
        )
        if store:
            store.append({**result.to_json(), "stored_at": time.time()})
        return result
    if growth.verdict is not Verdict.FACTORIAL_REDUCTION:
        result = VerifiedFormula(
            pcf=pcf,
            growth=growth.to_json(),
            relation=None,
            matched_constant=None,
            validated_at_2x=False,
            status="rejected",
        )
        if store:
            store.append({**result.to_json(), "stored_at": time.time()})
        return result

    report = _limit_with_fallback(pcf, max(4 * scheme_depth, 2000), target_digits)
    digits = min(report.certified_digits, report.precision)
    relation = None
    matched = None
    validated = False
    if digits >= 25:
        for name in constants:
            try:
                relation = mobius_match(pcf_value(report), digits, name, margin=margin, catalog=cat)
                matched = name
                break
            except (NoMatch, LowConfidence):
                continue
        if relation is None and len(constants) > 1:
            try:
                relation = extended_match(
                    pcf_value(report), digits, list(constants), margin=margin, catalog=cat
                )
                matched = "+".join(constants)
            except (NoMatch, LowConfidence, ValueError):
                relation = None
        if relation is not None:
            validated = revalidate_at_2x(pcf, relation, matched, digits, margin, cat)
    status = "confirmed" if relation is not None else "unmatched"
    result = VerifiedFormula(
        pcf=pcf,
        growth=growth.to_json(),
        relation=relation,
        matched_constant=matched,
        validated_at_2x=validated,
        status=status,
        value=report.value_str()[: digits + 2],
        value_digits=digits,
    )
    if store:
        store.append({**result.to_json(), "stored_at": time.time()})
    return result


def pcf_value(report):
    return report.value


def revalidate_at_2x(
    pcf: Pcf,
    relation: Relation,
    matched: Optional[str],
    digits: int,
    margin: int,
    catalog: ConstantsCatalog,
) -> bool:
    """Recompute the value at twice the precision and demand the exact same
    coefficients from a fresh match."""
    try:
        deeper = _limit_with_fallback(pcf, 40_000, 2 * digits)
        deep_digits = min(deeper.certified_digits, 2 * digits)
        if deep_digits < digits + 5:
            return False
        if matched and "+" not in (matched or ""):
            again = mobius_match(deeper.value, deep_digits, matched, margin=margin, catalog=catalog)
        else:
            names = (matched or "").split("+")
            again = extended_match(deeper.value, deep_digits, names, margin=margin, catalog=catalog)
        return again.coefficients == relation.coefficients
    except (NoMatch, LowConfidence, ArithmeticError, ValueError):
        return False
