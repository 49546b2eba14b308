import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from alphacross import analytic as an


def halves_corr_bruteforce(gamma, group=2):
    """Correlation of the means of two disjoint groups from an explicit
    equicorrelated covariance matrix."""
    n = 2 * group
    cov = np.full((n, n), gamma)
    np.fill_diagonal(cov, 1.0)
    a = np.r_[np.full(group, 1 / group), np.zeros(group)]
    b = np.r_[np.zeros(group), np.full(group, 1 / group)]
    return a @ cov @ b / math.sqrt((a @ cov @ a) * (b @ cov @ b))


class TestCombine:
    def test_single(self):
        assert an.combine_alphas([1.0], [0.01]) == 0.01

    def test_mean(self):
        assert an.combine_alphas([0.5, 0.5], [0.02, 0.0]) == 0.01

    def test_unnormalized(self):
        with pytest.raises(ValueError):
            an.combine_alphas([0.3, 0.3], [0.1, 0.2])

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            an.combine_alphas([0.5, 0.5], [0.1])

    def test_nonpositive_weight(self):
        with pytest.raises(ValueError):
            an.PortfolioWeights([1.5, -0.5])


class TestPairTurnover:
    def test_two_manager_value(self):
        assert an.pair_turnover(0.5, 0.2, 0.5, 0.16, 0.125) == pytest.approx(0.11, rel=1e-12)

    def test_no_crossing(self):
        assert an.pair_turnover(0.5, 0.2, 0.5, 0.16, 1.0) == pytest.approx(0.18, rel=1e-12)

    def test_full_crossing(self):
        assert an.pair_turnover(0.5, 0.2, 0.5, 0.16, -1.0) == pytest.approx(0.02, rel=1e-12)

    def test_bad_rho(self):
        with pytest.raises(an.InfeasibleParameters):
            an.pair_turnover(0.5, 0.1, 0.5, 0.1, 1.5)

    def test_bad_weights(self):
        with pytest.raises(ValueError):
            an.pair_turnover(0.5, 0.1, 0.6, 0.1, 0.0)

    @given(st.floats(0, 1), st.floats(-1, 1))
    def test_reduces_to_equal_pair(self, tau, rho):
        assert an.pair_turnover(0.5, tau, 0.5, tau, rho) == pytest.approx(an.equal_pair_turnover(tau, rho), abs=1e-15)


class TestEqualPair:
    @pytest.mark.parametrize("rho,expected", [(1.0, 0.1), (-1.0, 0.0)])
    def test_extremes(self, rho, expected):
        assert an.equal_pair_turnover(0.1, rho) == expected

    def test_two_manager_rho(self):
        assert an.equal_pair_turnover(0.1, 0.125) == pytest.approx(0.05625, rel=1e-15)
        assert an.equal_pair_turnover(0.1, 0.125) == pytest.approx(an.pair_turnover(0.5, 0.1, 0.5, 0.1, 0.125), rel=1e-15)


class TestHalves:
    @pytest.mark.parametrize("g", [0.0, 1.0])
    def test_fixed_points(self, g):
        assert an.correlation_of_halves(g) == g

    def test_half(self):
        expected = halves_corr_bruteforce(0.5)
        assert expected == pytest.approx(2 / 3, rel=1e-14)
        assert an.correlation_of_halves(0.5) == pytest.approx(expected, rel=1e-14)

    @given(st.floats(-1 / 3, 1))
    def test_against_bruteforce(self, g):
        if 1 + g < 1e-9:
            return
        assert an.correlation_of_halves(g) == pytest.approx(halves_corr_bruteforce(g), abs=1e-12)

    @pytest.mark.parametrize("g", [-1.0, -0.5, 1.2])
    def test_rejected(self, g):
        with pytest.raises(an.InfeasibleParameters):
            an.correlation_of_halves(g)


class TestRhoK:
    def test_zero_doublings(self):
        assert an.rho_after_doublings(0.37, 0) == 0.37

    @pytest.mark.parametrize("k", [0, 1, 5, 20])
    def test_one_is_fixed(self, k):
        assert an.rho_after_doublings(1.0, k) == 1.0

    def test_two_doublings(self):
        # 0.5 -> 2/3 -> 0.8
        assert an.rho_after_doublings(0.5, 2) == pytest.approx(0.8, rel=1e-15)

    @pytest.mark.parametrize("k", [1, 2, 3, 5])
    def test_group_correlation_bruteforce(self, k):
        assert an.rho_after_doublings(0.2, k) == pytest.approx(halves_corr_bruteforce(0.2, 2**k), rel=1e-12)

    def test_infeasible(self):
        with pytest.raises(an.InfeasibleParameters):
            an.rho_after_doublings(-0.5, 2)

    def test_increasing_to_one(self):
        seq = [an.rho_after_doublings(0.1, k) for k in range(40)]
        assert all(b > a for a, b in zip(seq, seq[1:]) if b < 1)
        assert seq[-1] == pytest.approx(1.0, abs=1e-9)


class TestClosedForm:
    def test_single_stream(self):
        assert an.turnover_closed(0.1, 0.3, 1) == pytest.approx(0.1, rel=1e-15)

    def test_n2_matches_pair(self):
        assert an.turnover_closed(0.1, 0.125, 2) == an.equal_pair_turnover(0.1, 0.125)
        assert an.turnover_closed(0.1, 0.125, 2) == pytest.approx(0.05625, rel=1e-15)

    def test_large_n(self):
        assert an.turnover_closed(0.1, 0.3, 10**6) == pytest.approx(0.03000007, rel=1e-12)
        assert an.turnover_limit(0.1, 0.3) == pytest.approx(0.03, rel=1e-15)

    @given(st.floats(0, 1), st.floats(-1, 1, exclude_min=True))
    def test_consistency_at_two(self, tau, rho):
        assert an.turnover_closed(tau, rho, 2) == an.equal_pair_turnover(tau, rho)

    def test_below_floor(self):
        with pytest.raises(an.InfeasibleParameters):
            an.turnover_closed(0.1, -0.5, 4)

    def test_negative_tau(self):
        with pytest.raises(an.InfeasibleParameters):
            an.turnover_closed(-0.1, 0.5, 4)

    @pytest.mark.parametrize("k", range(0, 21))
    def test_telescoping(self, k):
        for rho in (0.01, 0.3, 0.99):
            assert an.telescoped_turnover(0.1, rho, k) == pytest.approx(an.turnover_closed(0.1, rho, 2**k), rel=1e-12)


class TestLimit:
    def test_values(self):
        assert an.turnover_limit(0.1, 0.0) == 0.0
        assert an.turnover_limit(0.2, 1.0) == 0.2

    def test_negative_rho(self):
        with pytest.raises(an.InfeasibleParameters):
            an.turnover_limit(0.1, -0.01)


class TestWeightedAverage:
    def test_uniform(self):
        assert an.weighted_average_turnover(an.PortfolioWeights.uniform(4), [0.1] * 4) == pytest.approx(0.1)

    def test_weighted(self):
        assert an.weighted_average_turnover([0.25, 0.75], [0.2, 0.1]) == pytest.approx(0.125, rel=1e-15)

    def test_silent_stream(self):
        assert an.weighted_average_turnover([0.5, 0.5], [0.0, 0.2]) == pytest.approx(0.1, rel=1e-15)

    def test_mismatch(self):
        with pytest.raises(ValueError):
            an.weighted_average_turnover([1.0], [0.1, 0.2])


class TestLimitInterval:
    def test_values(self):
        lo, hi = an.limit_interval(0.1, 0.2, 0.4)
        assert lo == pytest.approx(0.02) and hi == pytest.approx(0.04)

    def test_point(self):
        lo, hi = an.limit_interval(0.1, 0.3, 0.3)
        assert lo == hi == pytest.approx(0.03)

    @pytest.mark.parametrize("lo,hi", [(0.0, 0.4), (-0.1, 0.4), (0.5, 0.4)])
    def test_rejected(self, lo, hi):
        with pytest.raises(an.InfeasibleParameters):
            an.limit_interval(0.1, lo, hi)


class TestMinCorrelation:
    def test_four(self):
        assert an.min_uniform_correlation(4) == -1 / 3

    def test_two(self):
        assert an.min_uniform_correlation(2) == -1.0

    @pytest.mark.parametrize("k", range(1, 12))
    def test_powers_of_two(self, k):
        assert an.min_uniform_correlation(2**k) == -1 / (2**k - 1)

    def test_too_small(self):
        with pytest.raises(an.InfeasibleParameters):
            an.min_uniform_correlation(1)


class TestNetting:
    @pytest.mark.parametrize("n", [1, 2, 7, 1000])
    def test_no_netting(self, n):
        assert an.netting_factor(an.NettingModel(1.0, n)) == 1.0

    def test_opposite_pair(self):
        assert an.netting_factor(an.NettingModel(-1.0, 2)) == an.FULLY_NETTED
        with pytest.raises(an.InfeasibleParameters):
            an.turnover_enhancement(an.NettingModel(-1.0, 2))

    def test_large_n_plateau(self):
        assert an.netting_factor(an.NettingModel(0.5, 10**9)) == pytest.approx(0.5, abs=1e-9)

    def test_same_form_as_turnover(self):
        # zeta(N) is turnover_closed with tau = 1 and rho -> psi
        for psi in (0.0, 0.25, 0.9):
            for n in (1, 2, 8, 100):
                assert an.netting_factor(an.NettingModel(psi, n)) == pytest.approx(an.turnover_closed(1.0, psi, n), rel=1e-15)

    def test_enhancement(self):
        assert an.turnover_enhancement(an.NettingModel(0.5, 2)) == pytest.approx(1 / 0.75)

    def test_infeasible(self):
        with pytest.raises(an.InfeasibleParameters):
            an.NettingModel(-0.5, 4)
