#!/usr/bin/env python3
"""Evaluate Apery's continued fraction and watch factorial reduction work.

The fraction

    6/zeta(3) = 5 - 1^6 / (117 - 2^6 / (535 - ...)),
    a(n) = 34 n^3 + 51 n^2 + 27 n + 5,  b(n) = -n^6

is the classic irrationality witness.  Its raw convergent numerators grow
like (n!)^3, but after dividing out gcd(p_n, q_n) only an exponential s^n
remains -- the factorial-reduction signature that the distributed search
keys on.  A one-coefficient perturbation destroys the property completely.
"""

import mpmath as mp

from pcflab import Pcf, classify_fr, get_constant, pcf_limit

apery = Pcf.from_text("34*n^3+51*n^2+27*n+5", "-n^6")

print("== limit ==")
report = pcf_limit(apery, 500, 100)
print(f"depth {report.depth}, certified digits {report.certified_digits}")
print("value  =", report.value_str()[:60], "...")
with mp.workdps(110):
    print("6/z(3) =", mp.nstr(6 / get_constant("zeta3", 105), 56), "...")

print()
print("== factorial reduction ==")
estimate = classify_fr(apery, 4096)
print(f"verdict {estimate.verdict.value}: dhat = {estimate.dhat:.4f}, "
      f"ln s = {estimate.ln_s:.4f}  (the paper-scale value is about 6.5)")

print()
print("== the property is razor thin ==")
for a_text in ("34*n^3+51*n^2+27*n+4", "34*n^3+51*n^2+28*n+5"):
    pert = classify_fr(Pcf.from_text(a_text, "-n^6"), 2048)
    print(f"a(n) = {a_text:28s} -> {pert.verdict.value} (dhat = {pert.dhat:.2f})")
