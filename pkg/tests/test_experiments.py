import math

import numpy as np
import pytest
from scipy import stats as scipy_stats

from polyloc.experiments import (
    TrialConfig,
    TrialRecord,
    endpoint_distribution_test,
    gap_scaling_study,
    run_trials,
    summarize_localization,
    w_equals_z1_frequency,
)
from polyloc.fields import constant_field, modified_field_stats
from polyloc.polymer import endpoint_law_for, localization_mass, make_kernel, uniform_kernel
from polyloc.scenario import (
    ScenarioError,
    SwitchNotFoundError,
    build_switch_scenario,
    check_scenario_preconditions,
    default_eta,
    detect_switch,
    run_switch_study,
)
from polyloc.serialize import canonical_json
from polyloc.stats import c_alpha_1d, endpoint_limit_cdf_1d, ks_distance_to_cdf


def batch(trials=5, N=60, seed=123, **kw):
    return list(run_trials(TrialConfig(alpha=2.0, d=1, N=N, trials=trials, master_seed=seed, **kw)))


class TestTrials:
    def test_rerun_is_byte_identical(self):
        a = batch()
        b = batch()
        la = [canonical_json(r.to_dict(canonical=True)) for r in a]
        lb = [canonical_json(r.to_dict(canonical=True)) for r in b]
        assert la == lb

    def test_threads_do_not_change_output(self):
        cfg = TrialConfig(alpha=2.0, d=1, N=40, trials=6, master_seed=7)
        seq = [r.to_dict(canonical=True) for r in run_trials(cfg, threads=1)]
        par = [r.to_dict(canonical=True) for r in run_trials(cfg, threads=2)]
        assert seq == par

    def test_record_fields_are_sane(self):
        for r in batch(trials=8, N=80):
            for p in (r.p_w, r.p_z1, r.p_z2):
                assert 0.0 <= p <= 1.0
            assert r.two_point_mass >= max(r.p_z1, r.p_z2) - 1e-15
            assert r.two_point_mass == pytest.approx(r.p_z1 + r.p_z2)
            assert abs(r.w_over_N[0]) <= 1.0
            assert r.w_equals_z1 == (r.w == r.z1)
            assert r.comparator_choice in ("z1", "z2")
            assert r.seed >= 0 and r.runtime_ms > 0

    def test_distinct_seeds_across_trials(self):
        seeds = [r.seed for r in batch(trials=10)]
        assert len(set(seeds)) == 10

    def test_config_validation(self):
        with pytest.raises(ValueError, match="trials"):
            TrialConfig(alpha=2.0, d=1, N=10, trials=0, master_seed=1)
        with pytest.raises(ValueError, match="alpha"):
            TrialConfig(alpha=-1.0, d=1, N=10, trials=1, master_seed=1)

    def test_constant_field_localizes_at_origin(self):
        # degenerate check: with a flat potential the endpoint law is the bare
        # walk, whose mode is the origin, and the origin is also z1
        f = constant_field(1, 6, 2.5)
        law = endpoint_law_for(f, uniform_kernel(1), 6)
        mod = modified_field_stats(f)
        mass = localization_mass(law, mod)
        assert law.w.coords == (0,)
        assert mod.z_site(1).coords == (0,)
        assert mass.w_equals_z1

    def test_record_round_trips_through_dict(self):
        r = batch(trials=1)[0]
        again = TrialRecord.from_dict(r.to_dict())
        assert again.to_dict() == r.to_dict()


class TestEndpointDistribution:
    def test_c_alpha_value(self):
        assert c_alpha_1d(2.0) == 1.5

    def test_cdf_shape(self):
        assert endpoint_limit_cdf_1d(0.0, 2.0) == 0.5
        assert endpoint_limit_cdf_1d(-1.0, 2.0) == 0.0
        assert endpoint_limit_cdf_1d(1.0, 2.0) == 1.0
        # symmetry: F(-x) = 1 - F(x)
        for x in (0.1, 0.4, 0.9):
            assert endpoint_limit_cdf_1d(-x, 2.0) == pytest.approx(
                1.0 - endpoint_limit_cdf_1d(x, 2.0), rel=1e-14
            )
        # density integrates the stated normalizer: F' ~ c_alpha at 0+
        eps = 1e-7
        deriv = (endpoint_limit_cdf_1d(eps, 2.0) - endpoint_limit_cdf_1d(0.0, 2.0)) / eps
        assert deriv == pytest.approx(c_alpha_1d(2.0), rel=1e-5)

    def test_ks_definition_matches_scipy(self):
        rng = np.random.default_rng(0)
        xs = rng.uniform(-1, 1, 500)
        ours = ks_distance_to_cdf(xs, lambda x: endpoint_limit_cdf_1d(x, 2.0))
        ref = scipy_stats.kstest(xs, lambda x: np.vectorize(endpoint_limit_cdf_1d)(x, 2.0))
        assert ours == pytest.approx(ref.statistic, rel=1e-12)

    def test_mixed_parameters_rejected(self):
        records = batch(trials=60, N=40) + batch(trials=60, N=50)
        with pytest.raises(ValueError, match="mix"):
            endpoint_distribution_test(records)

    def test_small_sample_rejected(self):
        with pytest.raises(ValueError, match="100"):
            endpoint_distribution_test(batch(trials=5))

    def test_reports_exclusions_and_distance(self):
        records = batch(trials=120, N=40)
        res = endpoint_distribution_test(records, threshold=0.5)
        assert res.n_used + res.n_excluded == 120
        assert 0.0 <= res.ks_distance <= 1.0
        assert res.passed == (res.ks_distance < 0.5)


class TestModeFrequency:
    def test_counts(self):
        records = batch(trials=120, N=60)
        res = w_equals_z1_frequency(records)
        direct = np.mean([r.w_equals_z1 for r in records])
        assert res.fraction_z1 == pytest.approx(direct)
        assert res.fraction_top_two >= res.fraction_z1
        assert res.ci_z1[0] <= res.fraction_z1 <= res.ci_z1[1]


class TestSummary:
    def test_summary_quantiles(self):
        records = batch(trials=40, N=60)
        s = summarize_localization(records)
        assert s.trials == 40
        assert 0.0 <= s.median_p_w <= 1.0
        assert s.p_z1_quantiles["q05"] <= s.p_z1_quantiles["q95"]
        assert s.two_point_quantiles["q50"] == pytest.approx(s.median_two_point_mass)
        assert s.comparator_agreement is not None


class TestGapScaling:
    def test_rows_have_expected_shape(self):
        rows = gap_scaling_study(2.0, 1, Ns=[50, 100], trials=30, master_seed=5)
        assert [r.N for r in rows] == [50, 100]
        for r in rows:
            assert r.trials == 30
            assert r.q25_n_gap_z12 <= r.median_n_gap_z12 <= r.q75_n_gap_z12
            assert 0.0 <= r.fraction_z13_above_log_margin <= 1.0

    def test_scaled_z13_margin_holds_at_moderate_n(self):
        # the z1 - z3 spacing, in extreme-value units, stays above the
        # logarithmic margin in nearly all fields
        rows = gap_scaling_study(2.0, 1, Ns=[1000], trials=200, master_seed=40)
        assert rows[0].fraction_z13_above_log_margin >= 0.95


class TestScenario:
    def test_preconditions_hold_at_reference_point(self):
        m = check_scenario_preconditions(400, uniform_kernel(1), 2.0)
        assert m == pytest.approx(2.0)
        assert m < 400**0.5 / 2

    def test_alpha_at_most_one_rejected(self):
        with pytest.raises(ScenarioError, match="alpha"):
            build_switch_scenario(400, 0.05, 1.0, uniform_kernel(1), 0.9)

    def test_kernel_inequality_rejected(self):
        # log(kappa(1)/kappa(0)) = log(0.05/0.45) = -2.197 <= -m_alpha = -2
        slow = make_kernel({-1: 0.5, 0: 0.45, 1: 0.05})
        with pytest.raises(ScenarioError, match="m_alpha"):
            build_switch_scenario(400, 0.05, 1.0, slow, 2.0)

    def test_small_n_rejected(self):
        # m_alpha = 2 but n^(1/2)/2 = 1 at n = 4
        with pytest.raises(ScenarioError, match="n\\^"):
            build_switch_scenario(4, 0.05, 1.0, uniform_kernel(1), 2.0)

    def test_construction_clauses_all_pass(self):
        sc = build_switch_scenario(400, 0.05, 1.0, uniform_kernel(1), 2.0)
        assert all(c.ok for c in sc.clause_checks)
        assert sc.x == 400 and sc.y == 1200
        assert sc.xi_at(400) == pytest.approx(1.025 * 20.0)
        assert sc.xi_at(1200) == pytest.approx(1.025 * (5 / 3) * 20.0)
        assert sc.xi_at(700) == pytest.approx(2.0)  # interior mean value
        assert sc.xi_at(-1000) == 1.0

    def test_discounted_gap_changes_sign_across_window(self):
        sc = build_switch_scenario(400, 0.05, 1.0, uniform_kernel(1), 2.0)
        lo = math.ceil(11 * 400 / 2)
        hi = math.floor(13 * 400 / 2)
        assert sc.psi_gap(lo) < 0
        assert sc.psi_gap(hi) > 0

    def test_weighted_gap_is_linear_in_horizon(self):
        # (N+1)(psi diff) grows by exactly xi(y) - xi(x) per unit horizon
        sc = build_switch_scenario(400, 0.05, 1.0, uniform_kernel(1), 2.0)
        increment = sc.xi_y - sc.xi_x
        vals = [(N + 1) * sc.psi_gap(N) for N in range(2200, 2210)]
        for a, b in zip(vals[:-1], vals[1:]):
            assert b - a == pytest.approx(increment, rel=1e-12)

    def test_detect_switch_small_scale(self):
        kernel = uniform_kernel(1)
        sc = build_switch_scenario(100, 0.05, default_eta(2.0, kernel), kernel, 2.0)
        res = detect_switch(sc, kernel)
        assert 550 < res.N_star < 650
        assert res.w_is_z2
        assert res.z1_at_N_star.coords == (100,)
        assert res.z2_at_N_star.coords == (300,)
        assert res.w_at_N_star.coords == (300,)
        # roles swap just past N*
        row_after = next(r for r in res.scan if r.N == res.N_star + 1)
        assert row_after.z1 == 300 and row_after.z2 == 100

    def test_reversed_spikes_never_swap(self):
        kernel = uniform_kernel(1)
        sc = build_switch_scenario(100, 0.05, 1.0, kernel, 2.0)
        xi = sc.xi_window.copy()
        i_x, i_y = sc.x - sc.window_lo, sc.y - sc.window_lo
        xi[i_x], xi[i_y] = xi[i_y], xi[i_x]  # taller spike now closer: no swap
        sc.xi_window = xi
        sc.xi_x, sc.xi_y = sc.xi_y, sc.xi_x
        with pytest.raises(SwitchNotFoundError, match="no discounted-value sign change"):
            detect_switch(sc, kernel)

    def test_epsilon_halving_retries(self):
        # epsilon = 8 puts the tall spike inside the x-band with a value in
        # the x-band's value window, breaking uniqueness; one halving later
        # the construction passes and the swap is found
        study = run_switch_study(400, 8.0, None, uniform_kernel(1), 2.0)
        assert study.attempts == 2
        assert study.epsilon_used == pytest.approx(4.0)
        assert study.result.w_is_z2

    def test_unfixable_epsilon_reports_failure(self):
        kernel = uniform_kernel(1)
        with pytest.raises((ScenarioError, SwitchNotFoundError)):
            run_switch_study(400, 8.0, None, kernel, 2.0, max_retries=0)
