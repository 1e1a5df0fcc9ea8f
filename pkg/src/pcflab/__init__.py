"""pcflab: exact polynomial continued fractions, conservative matrix fields,
integer-relation matching and a chunked distributed search harness.

The numeric core is exact: big integers, rationals, sparse integer
polynomials and 2x2 matrices over them.  High-precision decimals ride on
mpmath at explicit digit counts, and every certified digit claim traces back
to integer arithmetic.
"""

from pcflab.exactmath import (
    IntPolynomial,
    Mat2,
    eval_poly,
    mat2_content,
    mat2_det,
    mat2_mul,
    parse_poly,
)
from pcflab.pcf import (
    ConvergentState,
    Pcf,
    PrecisionReport,
    pcf_limit,
    pcf_limit_richardson,
    pcf_to_matrix,
    step,
)
from pcflab.fr import GrowthEstimate, Verdict, classify_fr, reduce
from pcflab.constants import (
    ConstantsCatalog,
    default_catalog,
    get_constant,
    hat_zeta,
    hat_zeta_expansion,
    lerch_neg1,
)
from pcflab.relations import (
    ExclusionBound,
    Relation,
    extended_match,
    mobius_apply,
    mobius_match,
    overfit_filter,
    pslq,
)
from pcflab.cmf import (
    ConstructionParams,
    MatrixField,
    Trajectory,
    catalog_field,
    cmf_to_pcf,
    coboundary,
    cocycle_check,
    construct,
    potential_at,
    traj_limit,
    walk,
    zigzag_coboundary_u,
)
from pcflab.delta import (
    CombinationPlan,
    DeltaMap,
    DeltaReport,
    delta_closed_form,
    delta_empirical,
    delta_map,
    optimize_greedy,
    optimize_lls,
    solve_zeta5_coefficients,
    zeta5_combination,
)
from pcflab.families import make_family_pcf

__all__ = [
    "IntPolynomial",
    "Mat2",
    "parse_poly",
    "eval_poly",
    "mat2_mul",
    "mat2_det",
    "mat2_content",
    "Pcf",
    "ConvergentState",
    "PrecisionReport",
    "step",
    "pcf_limit",
    "pcf_limit_richardson",
    "pcf_to_matrix",
    "GrowthEstimate",
    "Verdict",
    "classify_fr",
    "reduce",
    "ConstantsCatalog",
    "default_catalog",
    "get_constant",
    "hat_zeta",
    "hat_zeta_expansion",
    "lerch_neg1",
    "Relation",
    "ExclusionBound",
    "pslq",
    "mobius_match",
    "mobius_apply",
    "extended_match",
    "overfit_filter",
    "MatrixField",
    "Trajectory",
    "ConstructionParams",
    "catalog_field",
    "cocycle_check",
    "walk",
    "potential_at",
    "traj_limit",
    "coboundary",
    "cmf_to_pcf",
    "construct",
    "zigzag_coboundary_u",
    "DeltaReport",
    "DeltaMap",
    "CombinationPlan",
    "delta_empirical",
    "delta_closed_form",
    "delta_map",
    "optimize_greedy",
    "optimize_lls",
    "zeta5_combination",
    "solve_zeta5_coefficients",
    "make_family_pcf",
]
