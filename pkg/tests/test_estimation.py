import math

import numpy as np
import pytest

from smoothcert.certificates import SmoothingParams
from smoothcert.estimation import (
    BinomialObservation,
    ConfidenceBudget,
    GradientEstimate,
    PairObservation,
    binomial_lower_bound,
    budget_for_method,
    dipole_mass_lower_bounds,
    gradient_deviation_bound,
    gradient_norm_upper_bound,
)

UNIT = SmoothingParams(1.0)


def brute_force_lower_bound(successes, trials, alpha, grid_step=1e-5):
    """Largest grid p whose upper binomial tail P[X >= successes] <= alpha.

    Direct pmf summation via math.comb: independent of the incomplete-beta
    route used by the implementation.
    """
    ks = np.arange(successes, trials + 1)
    coeffs = np.array([math.comb(trials, int(k)) for k in ks], dtype=float)
    ps = np.arange(grid_step, 1.0, grid_step)
    tails = np.zeros_like(ps)
    for c, k in zip(coeffs, ks):
        tails += c * ps**k * (1.0 - ps) ** (trials - k)
    ok = ps[tails <= alpha]
    return float(ok.max()) if ok.size else 0.0


class TestBinomialLowerBound:
    def test_zero_successes(self):
        assert binomial_lower_bound(BinomialObservation(0, 100), 0.001) == 0.0

    def test_all_successes_closed_form(self):
        got = binomial_lower_bound(BinomialObservation(100, 100), 0.001)
        assert got == pytest.approx(0.93325, abs=1e-4)
        assert got == pytest.approx(0.001 ** (1.0 / 100.0), abs=1e-12)

    def test_brute_force_tail_oracle(self):
        got = binomial_lower_bound(BinomialObservation(80, 100), 0.05)
        assert 0.70 < got < 0.80
        oracle = brute_force_lower_bound(80, 100, 0.05)
        assert got == pytest.approx(oracle, abs=2e-5)

    def test_below_point_estimate(self):
        for k, n in ((5, 10), (80, 100), (499, 500)):
            for alpha in (0.01, 0.05, 0.2):
                assert binomial_lower_bound(BinomialObservation(k, n), alpha) <= k / n

    def test_monotone_in_successes(self):
        vals = [
            binomial_lower_bound(BinomialObservation(k, 200), 0.05)
            for k in range(0, 201, 10)
        ]
        assert all(b >= a for a, b in zip(vals, vals[1:]))

    def test_monotone_in_alpha(self):
        vals = [
            binomial_lower_bound(BinomialObservation(150, 200), a)
            for a in (0.001, 0.01, 0.05, 0.2, 0.5)
        ]
        assert all(b > a for a, b in zip(vals, vals[1:]))

    def test_coverage_calibration(self):
        # true p = 0.7, n = 500, alpha = 0.05: the bound overshoots the
        # truth in at most ~5% of trials
        rng = np.random.default_rng(1234)
        violations = 0
        trials = 2000
        counts = rng.binomial(500, 0.7, size=trials)
        for k in counts:
            if binomial_lower_bound(BinomialObservation(int(k), 500), 0.05) > 0.7:
                violations += 1
        slack = 3.0 * math.sqrt(0.05 * 0.95 / trials)
        assert violations / trials <= 0.05 + slack

    def test_alpha_validation(self):
        with pytest.raises(ValueError):
            binomial_lower_bound(BinomialObservation(5, 10), 0.0)
        with pytest.raises(ValueError):
            binomial_lower_bound(BinomialObservation(5, 10), 1.0)

    def test_observation_validation(self):
        with pytest.raises(ValueError):
            BinomialObservation(11, 10)
        with pytest.raises(ValueError):
            BinomialObservation(-1, 10)
        with pytest.raises(ValueError):
            BinomialObservation(0, 0)


class TestGradientDeviationBound:
    def test_reference_point(self):
        t = gradient_deviation_bound(50_000_000, 49, SmoothingParams(0.25), 5e-4)
        assert t == pytest.approx(6.82e-4, abs=1e-6)

    def test_branch_selection(self):
        # -2 ln(eta) crosses d*n = 10 between these two etas
        params = UNIT
        eta_first = math.exp(-4.5)  # -2 ln eta = 9 <= 10
        eta_second = math.exp(-5.5)  # -2 ln eta = 11 > 10
        t1 = gradient_deviation_bound(10, 1, params, eta_first)
        assert t1 == pytest.approx(4.0 * math.sqrt(4.5 / 10.0), rel=1e-12)
        t2 = gradient_deviation_bound(10, 1, params, eta_second)
        assert t2 == pytest.approx(4.0 * math.sqrt(2.0) * 5.5 / 10.0, rel=1e-12)

    def test_single_pair_second_branch(self):
        eta = math.exp(-2.0)  # -2 ln eta = 4 > d*n = 1
        t = gradient_deviation_bound(1, 1, UNIT, eta)
        assert t == pytest.approx(4.0 * math.sqrt(2.0) * 2.0, rel=1e-12)

    def test_quarter_sample_scaling(self):
        t_n = gradient_deviation_bound(1000, 8, UNIT, 0.01)
        t_4n = gradient_deviation_bound(4000, 8, UNIT, 0.01)
        assert t_4n == pytest.approx(t_n / 2.0, rel=1e-12)

    def test_sigma_squared_scaling(self):
        t1 = gradient_deviation_bound(1000, 8, UNIT, 0.01)
        t2 = gradient_deviation_bound(1000, 8, SmoothingParams(0.5), 0.01)
        assert t2 == pytest.approx(t1 / 4.0, rel=1e-12)


class TestGradientNormUpperBound:
    def test_noiseless_identity(self):
        # with a huge pair count the deviation allowance is negligible and
        # the bound inverts the statistic exactly: sqrt(sigma^4 G^2)/sigma^2
        g_true = 0.1
        est = GradientEstimate(g_true**2, n_pairs=10**18, dim=2)
        got = gradient_norm_upper_bound(est, UNIT, 0.05, 0.9)
        assert got == pytest.approx(g_true, abs=1e-7)

    def test_negative_statistic_clamps_to_zero(self):
        est = GradientEstimate(-10.0, n_pairs=100, dim=2)
        assert gradient_norm_upper_bound(est, UNIT, 0.05, 0.9) == 0.0

    def test_physical_cap(self):
        est = GradientEstimate(50.0, n_pairs=100, dim=2)
        got = gradient_norm_upper_bound(est, UNIT, 0.05, 0.8)
        assert got == pytest.approx(0.2799619204078083, abs=1e-12)

    def test_requires_certification_context(self):
        est = GradientEstimate(0.01, n_pairs=100, dim=2)
        with pytest.raises(ValueError):
            gradient_norm_upper_bound(est, UNIT, 0.05, 0.5)

    def test_estimate_validation(self):
        with pytest.raises(ValueError):
            GradientEstimate(0.0, n_pairs=0, dim=1)
        with pytest.raises(ValueError):
            GradientEstimate(0.0, n_pairs=1, dim=0)
        with pytest.raises(ValueError):
            GradientEstimate(5.0, n_pairs=1, dim=1, abs_dot_cap=1.0)


class TestDipoleMassBounds:
    def test_all_symmetric_closed_form(self):
        obs = PairObservation(1000, 0, 0, 0)
        sym_lb, asym_lb = dipole_mass_lower_bounds(obs, 0.001)
        assert sym_lb == pytest.approx((0.0005) ** (1.0 / 1000.0), abs=1e-9)
        assert sym_lb == pytest.approx(0.99243, abs=1e-4)
        assert asym_lb == 0.0

    def test_no_hits(self):
        obs = PairObservation(0, 0, 3, 7)
        assert dipole_mass_lower_bounds(obs, 0.01) == (0.0, 0.0)

    def test_bounds_below_point_estimates(self):
        rng = np.random.default_rng(7)
        for _ in range(25):
            counts = rng.multinomial(400, [0.4, 0.3, 0.1, 0.2])
            obs = PairObservation(*(int(c) for c in counts))
            sym_lb, asym_lb = dipole_mass_lower_bounds(obs, 0.01)
            assert sym_lb + asym_lb <= (obs.n11 + obs.n10) / obs.n

    def test_pair_observation_validation(self):
        with pytest.raises(ValueError):
            PairObservation(0, 0, 0, 0)
        with pytest.raises(ValueError):
            PairObservation(-1, 1, 1, 1)


class TestConfidenceBudget:
    def test_allocations_must_fit(self):
        with pytest.raises(ValueError):
            ConfidenceBudget(0.01, (("a", 0.008), ("b", 0.008)))

    def test_method_splits(self):
        assert budget_for_method("first", 0.01).allocation("p") == 0.01
        b = budget_for_method("second", 0.01)
        assert b.allocation("p") == b.allocation("grad") == 0.005
        for m in ("dipole", "best"):
            b = budget_for_method(m, 0.01)
            assert b.allocation("sym") == b.allocation("asym") == 0.005

    def test_unknown_method(self):
        with pytest.raises(ValueError):
            budget_for_method("zeroth", 0.01)
