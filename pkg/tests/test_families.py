from fractions import Fraction

import mpmath as mp
import pytest

from pcflab.constants import get_constant, hat_zeta
from pcflab.families import (
    DegenerateParams,
    make_family_pcf,
    polylog_pcf,
    sigma_scheme_pcf,
    zeta2_alpha_pcf,
    zeta3_alpha_pcf,
    zigzag_roots_pcf,
    zzz_sr_pcf,
)
from pcflab.pcf import pcf_limit, pcf_limit_richardson


class TestGenerators:
    def test_eq7_s5_r1_is_table2_row1(self):
        pcf = zzz_sr_pcf(5, 1)
        # a = n^5 + (n+1)^4 (n+2), b = -n^9 (n+1)
        assert str(pcf.a) == "2*n^5+6*n^4+14*n^3+16*n^2+9*n+2"
        assert str(pcf.b) == "-n^10-n^9"

    def test_sigma_apery(self):
        pcf = sigma_scheme_pcf({3: 17, 1: -12}, 1, 3)
        assert str(pcf.a) == "34*n^3+51*n^2+27*n+5" and str(pcf.b) == "-n^6"

    def test_zeta2_alpha3_row(self, catalog):
        pcf = zeta2_alpha_pcf(3)
        assert str(pcf.a) == "2*n^2+2*n+7" and str(pcf.b) == "-n^4"
        report = pcf_limit_richardson(pcf, 45)
        z2 = catalog.get("zeta2", 55)
        with mp.workdps(60):
            assert abs(report.value - abs(2 / (3 - 2 * z2))) < mp.mpf(10) ** -40

    def test_zeta3_alpha_rational_clears_denominators(self):
        pcf = zeta3_alpha_pcf(Fraction(1, 2))
        assert pcf.a.is_integral() and pcf.b.is_integral()

    def test_polylog_dilogarithm(self, catalog):
        # limit = 1/Li_2(1/2); Li_2(1/2) = pi^2/12 - ln(2)^2/2 by independent series
        pcf = polylog_pcf(2, 2)
        report = pcf_limit_richardson(pcf, 45)
        with mp.workdps(60):
            x = mp.mpf(1) / 2
            li2 = mp.fsum(x**k / k**2 for k in range(1, 220))  # direct series oracle
            assert abs(report.value - 1 / li2) < mp.mpf(10) ** -40
            pi = catalog.get("pi", 55)
            ln2 = catalog.get("ln2", 55)
            assert abs(li2 - (pi * pi / 12 - ln2 * ln2 / 2)) < mp.mpf(10) ** -50

    def test_rational_r_inflation(self):
        pcf = zzz_sr_pcf(5, Fraction(1, 2))
        assert str(pcf.a) == "4*n^5+11*n^4+24*n^3+26*n^2+14*n+3"
        assert str(pcf.b) == "-4*n^10-2*n^9"

    def test_zzz_limit_matches_hat_zeta(self, catalog):
        report = pcf_limit_richardson(zzz_sr_pcf(5, 1), 45)
        with mp.workdps(60):
            target = 1 / hat_zeta(5, 1, 50, catalog)
            assert abs(report.value - target) < mp.mpf(10) ** -40

    def test_zigzag_roots_form(self):
        pcf = zigzag_roots_pcf([0, 0, 0, 0, 0], [0, 0, 0, 0, 1])
        assert pcf == zzz_sr_pcf(5, 1)

    def test_degenerate(self):
        with pytest.raises(DegenerateParams):
            polylog_pcf(2, 0)
        with pytest.raises(DegenerateParams):
            sigma_scheme_pcf({3: 1, 1: 0}, 0, 3)

    def test_dispatch(self):
        pcf = make_family_pcf("zzz_sr", {"s": 5, "R": "1/2"})
        assert pcf == zzz_sr_pcf(5, Fraction(1, 2))
        with pytest.raises(DegenerateParams):
            make_family_pcf("nope", {})
