import math

import numpy as np
import pytest
from scipy.special import ndtr, ndtri

from smoothcert.normal import Probability, std_cdf, std_pdf, std_quantile

# Reference values computed with a 40-digit erf oracle (mpmath) before the
# implementation existed.
PHI_AT_1 = 0.8413447460685429
PDF_AT_0 = 0.3989422804014327
QUANTILE_08 = 0.8416212335729142
PDF_AT_08416212 = 0.2799619283183220


class TestStdCdf:
    def test_symmetry_point(self):
        assert float(std_cdf(0.0)) == 0.5

    def test_limits(self):
        assert float(std_cdf(math.inf)) == 1.0
        assert float(std_cdf(-math.inf)) == 0.0

    def test_erf_oracle_value(self):
        assert float(std_cdf(1.0)) == pytest.approx(PHI_AT_1, abs=1e-15)

    def test_antisymmetry(self):
        for z in np.linspace(-8.0, 8.0, 1601):
            assert abs(float(std_cdf(-z)) - (1.0 - float(std_cdf(z)))) <= 1e-15

    def test_monotone(self):
        zs = np.linspace(-10.0, 10.0, 2001)
        vals = [float(std_cdf(z)) for z in zs]
        assert all(a <= b for a, b in zip(vals, vals[1:]))

    def test_nan_rejected(self):
        with pytest.raises(ValueError):
            std_cdf(math.nan)

    def test_matches_scipy(self):
        zs = np.linspace(-8.0, 8.0, 1001)
        for z in zs:
            assert float(std_cdf(z)) == pytest.approx(float(ndtr(z)), abs=1e-15)


class TestStdPdf:
    def test_peak_value(self):
        assert std_pdf(0.0) == pytest.approx(PDF_AT_0, abs=1e-16)

    def test_max_gradient_anchor_value(self):
        # density at the 0.8-quantile: the largest gradient a smoothed
        # classifier with value 0.8 can have (unit sigma)
        assert std_pdf(0.8416212) == pytest.approx(PDF_AT_08416212, abs=1e-12)

    def test_even_function(self):
        for z in np.linspace(0.0, 8.0, 801):
            assert std_pdf(z) == std_pdf(-z)

    def test_maximum_at_zero(self):
        for z in np.linspace(-6.0, 6.0, 601):
            assert std_pdf(z) <= std_pdf(0.0)


class TestStdQuantile:
    def test_median(self):
        assert std_quantile(0.5) == 0.0

    def test_endpoints_extended_reals(self):
        assert std_quantile(0.0) == -math.inf
        assert std_quantile(1.0) == math.inf

    def test_bisection_oracle_value(self):
        # independently located by bisection on the cdf
        assert std_quantile(0.8) == pytest.approx(QUANTILE_08, abs=1e-12)

    def test_inverse_of_cdf_example(self):
        assert std_quantile(0.841344746) == pytest.approx(1.0, abs=1e-9)

    def test_out_of_range_rejected(self):
        for bad in (-0.1, 1.1, math.nan):
            with pytest.raises(ValueError):
                std_quantile(bad)

    def test_matches_scipy(self):
        for p in np.linspace(1e-6, 1.0 - 1e-6, 999):
            assert std_quantile(p) == pytest.approx(float(ndtri(p)), abs=1e-12)

    def test_forward_composition_absolute(self):
        # cdf(quantile(p)) = p to 1e-9 absolute across the full domain
        ps = list(np.logspace(-300, -1, 60)) + list(np.linspace(0.01, 0.99, 99))
        ps += [1 - 1e-16, 1 - 1e-12]
        for p in ps:
            assert float(std_cdf(std_quantile(p))) == pytest.approx(p, abs=1e-9)

    def test_antisymmetry(self):
        for p in np.linspace(0.001, 0.999, 999):
            assert abs(std_quantile(p) + std_quantile(1.0 - p)) <= 1e-12


class TestRoundTrip:
    def test_quantile_of_cdf_grid(self):
        zs = np.arange(-8.0, 8.0 + 1e-9, 1e-3)
        worst = max(abs(std_quantile(std_cdf(float(z))) - z) for z in zs)
        assert worst <= 1e-9

    def test_derivative_consistency(self):
        h = 1e-5
        for z in np.linspace(-6.0, 6.0, 601):
            fd = (float(std_cdf(z + h)) - float(std_cdf(z - h))) / (2 * h)
            assert fd == pytest.approx(std_pdf(z), abs=1e-6)


class TestProbability:
    def test_range_enforced(self):
        with pytest.raises(ValueError):
            Probability(1.5)
        with pytest.raises(ValueError):
            Probability(-0.1)

    def test_behaves_as_float(self):
        p = Probability(0.25)
        assert p + 0.25 == 0.5
        assert p.complement == 0.75

    def test_carried_complement_preserves_tail(self):
        p = std_cdf(7.0)
        assert float(p) == pytest.approx(1.0, abs=1e-11)
        assert p.complement == pytest.approx(1.279812543885835e-12, rel=1e-12)
        assert std_quantile(p) == pytest.approx(7.0, abs=1e-12)
