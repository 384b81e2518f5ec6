import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hotspot_cdma import TABLE1, DelayProfile, sample_rho
from hotspot_cdma.analytic import capacity_uniform
from hotspot_cdma.twocell import (
    FadingDraw,
    Scenario,
    capacity_search,
    cross_tier_interference,
    feasibility_cap,
    generate_scenario,
    hotspot_center,
    outage_probability_mc,
    scenario_from_positions,
    select_base,
    solve_powers,
    user_power_exceeds,
)

K = TABLE1.pole_capacity


def _scenario(ratios, is_macro):
    ratios = np.asarray(ratios, float)
    n = ratios.size
    return Scenario(np.zeros((n, 2)), np.zeros(n), np.zeros(n), ratios, np.ones(n),
                    np.asarray(is_macro, bool), 1.0)


def test_pole_capacity():
    assert K == pytest.approx(1 + 128 / 10 ** 0.7)
    assert K == pytest.approx(26.539, abs=1e-3)


class TestPlacement:
    def test_hotspot_occupancy(self):
        # half the users go to the hotspot, the other half land there with prob (s/S)^2
        scn = generate_scenario(TABLE1, 100_000, np.random.default_rng(5))
        rel = np.abs(scn.positions - hotspot_center(TABLE1))
        inside = np.all(rel <= TABLE1.hotspot_side / 2, axis=1).mean()
        assert inside == pytest.approx(0.5 + 0.5 * (200 / 1000) ** 2, abs=0.01)

    def test_positions_in_region(self):
        scn = generate_scenario(TABLE1, 5000, np.random.default_rng(0))
        assert np.all(np.abs(scn.positions) <= 500)

    def test_user_at_macro_foot(self):
        scn = scenario_from_positions(TABLE1, [[0.0, 0.0]], 0.0, 0.0)
        assert scn.is_macro[0]

    def test_user_at_micro_foot(self):
        scn = scenario_from_positions(TABLE1, [hotspot_center(TABLE1)], 0.0, 0.0)
        assert not scn.is_macro[0]

    def test_selection_ties_and_bias(self):
        assert select_base(1.0, 1.0, 1.0)
        assert not select_base(1.0, 1.0, 1.5)
        assert select_base(2.0, 1.0, 1.5)

    def test_prefix_consistency(self):
        # placement i uses one stream per attribute, so user k does not depend on N
        from hotspot_cdma import _mc
        from hotspot_cdma.twocell import _scenario as raw
        a = raw(TABLE1, 10, _mc.generators(3, 1, 0, n=5))
        b = raw(TABLE1, 25, _mc.generators(3, 1, 0, n=5))
        np.testing.assert_array_equal(a.positions, b.positions[:10])
        np.testing.assert_array_equal(a.is_macro, b.is_macro[:10])


class TestInterference:
    def test_no_users(self):
        assert cross_tier_interference(_scenario([], [])) == (0.0, 0.0)

    def test_single_micro_user(self):
        assert cross_tier_interference(_scenario([0.04], [False])) == pytest.approx((0.04, 0.0))

    def test_single_macro_user(self):
        assert cross_tier_interference(_scenario([25.0], [True])) == pytest.approx((0.0, 0.04))

    def test_fading_weights(self):
        fad = FadingDraw(np.array([2.0]), np.array([1.0]))
        i_m, i_u = cross_tier_interference(_scenario([0.04], [False]), fad)
        assert float(i_m) == pytest.approx(0.08)
        assert float(i_u) == 0.0

    def test_fading_batches(self):
        fad = FadingDraw(np.array([[2.0, 1.0], [1.0, 1.0]]), np.array([[1.0, 4.0], [1.0, 1.0]]))
        i_m, i_u = cross_tier_interference(_scenario([0.04, 25.0], [False, True]), fad)
        np.testing.assert_allclose(i_m, [0.08, 0.04])
        np.testing.assert_allclose(i_u, [0.16, 0.04])

    def test_kappa_mean_matches_inverse_rho(self):
        prof = DelayProfile.uniform(4)
        rng = np.random.default_rng(2)
        kappa = sample_rho(prof, rng, 400_000) / sample_rho(prof, rng, 400_000)
        assert kappa.mean() == pytest.approx(4 / 3, rel=0.01)


class TestSolvePowers:
    def test_isolated_tiers(self):
        s_m, s_u = solve_powers(10, 10, 0.0, 0.0, K)
        assert s_m == pytest.approx(1 / (K - 10))
        assert s_u == pytest.approx(1 / (K - 10))

    def test_arithmetic_example(self):
        s_m, s_u = solve_powers(13, 13, 1.0, 1.0, 26.539)
        assert s_m == pytest.approx(14.539 / (13.539**2 - 1))
        assert s_m == pytest.approx(0.0797, abs=1e-4)
        assert s_u == pytest.approx(s_m)

    def test_boundary_is_infeasible(self):
        i = (K - 10) * (K - 12)
        s_m, s_u = solve_powers(10, 12, i, 1.0, K)
        assert math.isnan(s_m) and math.isnan(s_u)

    def test_tier_at_pole(self):
        assert math.isnan(solve_powers(27, 0, 0.0, 0.0, K)[0])

    def test_satisfies_linear_system(self):
        n_m, n_u, i_m, i_u = 12, 9, 1.3, 2.1
        s_m, s_u = solve_powers(n_m, n_u, i_m, i_u, K)
        # SINR constraints at equality; I_M is micro-user power seen at the macro
        assert (K - n_m) * s_m - i_m * s_u == pytest.approx(1.0)
        assert (K - n_u) * s_u - i_u * s_m == pytest.approx(1.0)

    @given(st.integers(0, 26), st.integers(0, 26), st.floats(0, 50), st.floats(0, 50))
    def test_positive_when_feasible(self, n_m, n_u, i_m, i_u):
        s_m, s_u = solve_powers(n_m, n_u, i_m, i_u, K)
        if not math.isnan(s_m):
            assert s_m > 0 and s_u > 0

    @given(st.integers(0, 20), st.integers(0, 20), st.floats(0, 5), st.floats(0, 5), st.floats(0, 1))
    def test_monotone_in_interference(self, n_m, n_u, i_m, i_u, extra):
        a = solve_powers(n_m, n_u, i_m, i_u, K)
        b = solve_powers(n_m, n_u, i_m + extra, i_u, K)
        if not math.isnan(b[0]):
            assert b[0] >= a[0] * (1 - 1e-12)
            assert b[1] >= a[1] * (1 - 1e-12)

    def test_vectorized(self):
        s_m, _ = solve_powers(np.array([10, 30]), 5, 0.0, 0.0, K)
        assert s_m[0] == pytest.approx(1 / (K - 10)) and math.isnan(s_m[1])


class TestPowerLimit:
    def test_equality_is_not_outage(self):
        assert not user_power_exceeds(2.0, 1.0, 2.0, 10.0, False)

    def test_macro_over_cap(self):
        assert user_power_exceeds(1.5 * 2.0 * 10.0, 1.0, 2.0, 10.0, True, rho=1.0)

    def test_micro_fading_halves_requirement(self):
        assert not user_power_exceeds(1.5 * 2.0, 1.0, 2.0, 10.0, False, rho=2.0)

    def test_macro_gets_gain_ratio_headroom(self):
        assert user_power_exceeds(3.0, 1.0, 2.0, 10.0, False)
        assert not user_power_exceeds(3.0, 1.0, 2.0, 10.0, True)


class TestOutage:
    def test_single_user(self):
        assert outage_probability_mc(TABLE1, 1, placements=50).outage_fraction == 0.0

    @pytest.mark.parametrize("n", [54, 60])
    def test_beyond_two_poles(self, n):
        est = outage_probability_mc(TABLE1, n, DelayProfile.uniform(2), placements=20,
                                    fading_draws=5)
        assert est.outage_fraction == 1.0

    def test_threshold_brackets(self):
        # averaged over seeds the crossing of 5% sits between 36 and 46 users
        lo = np.mean([outage_probability_mc(TABLE1, 36, placements=200, seed=s).outage_fraction
                      for s in range(4)])
        hi = np.mean([outage_probability_mc(TABLE1, 46, placements=200, seed=s).outage_fraction
                      for s in range(4)])
        assert lo <= 0.05 < hi

    def test_finite_power_never_helps(self):
        for n in (20, 35, 45):
            base = outage_probability_mc(TABLE1, n, placements=100, seed=1)
            lim = outage_probability_mc(TABLE1.with_(F=0.5), n, placements=100, seed=1)
            assert base.power_exceeded == 0.0
            assert lim.infeasible == base.infeasible
            assert lim.outage_fraction >= base.outage_fraction

    def test_worker_count_does_not_matter(self):
        prof = DelayProfile.uniform(3)
        a = outage_probability_mc(TABLE1.with_(F=1.0), 30, prof, placements=24, fading_draws=20,
                                  seed=9, workers=1)
        b = outage_probability_mc(TABLE1.with_(F=1.0), 30, prof, placements=24, fading_draws=20,
                                  seed=9, workers=3)
        assert a == b


class TestCapacity:
    def test_feasibility_ceiling(self):
        res = capacity_search(TABLE1.with_(outage=1.0), placements=5, n_start=50)
        assert res.n_star == feasibility_cap(K) == 52

    def test_infinite_dispersion(self):
        res = capacity_search(TABLE1, placements=200, n_start=30)
        assert 0.9 * 1.5 * K <= res.n_star <= 1.1 * 1.5 * K
        assert res.outage_at_n_star <= 0.05

    @pytest.mark.slow
    def test_two_path_uniform(self):
        res = capacity_search(TABLE1, DelayProfile.uniform(2), placements=200, fading_draws=200,
                              n_start=28)
        n_u = capacity_uniform(K, 0.09, 2)
        assert 0.9 * n_u <= res.n_star <= 1.1 * n_u

    def test_nonincreasing_as_f_drops(self):
        stars = [capacity_search(TABLE1.with_(F=f), placements=100, n_start=30).n_star
                 for f in (math.inf, 1.0, 0.3)]
        assert stars[0] >= stars[1] >= stars[2]

    def test_tighter_target_lowers_capacity(self):
        loose = capacity_search(TABLE1.with_(outage=0.2), placements=100, n_start=35).n_star
        tight = capacity_search(TABLE1.with_(outage=0.01), placements=100, n_start=35).n_star
        assert tight <= loose

    def test_deterministic(self):
        a = capacity_search(TABLE1, placements=60, n_start=30, seed=4)
        b = capacity_search(TABLE1, placements=60, n_start=30, seed=4, workers=2)
        assert a.n_star == b.n_star and a.trace == b.trace
