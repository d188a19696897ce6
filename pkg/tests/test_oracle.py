import itertools
import math

import numpy as np
import pytest

from polyloc.fields import FieldRealization, constant_field, sample_pareto_field
from polyloc.lattice import ball
from polyloc.numerics import logsumexp
from polyloc.oracle import compare_dp_vs_oracle, enumerate_paths
from polyloc.polymer import uniform_kernel


def field_1d(values, alpha=2.0):
    values = np.asarray(values, dtype=float)
    N = (len(values) - 1) // 2
    return FieldRealization(ball(1, N), values, alpha, None)


def hand_rolled_enumeration(field, kernel, N):
    """Second, even dumber oracle: explicit product over step tuples."""
    b = field.ball
    log_p = {}
    logU_terms = []
    for moves in itertools.product(kernel.steps, repeat=N):
        pos = (0,) * field.d
        logw = 0.0
        for mv in moves:
            pos = tuple(p + m for p, m in zip(pos, mv))
            logw += math.log(kernel.prob(mv)) + field.xi[b.index_of(np.array(pos))]
        logU_terms.append(logw)
        log_p.setdefault(pos, []).append(logw)
    logU = logsumexp(np.array(logU_terms))
    return logU, {k: logsumexp(np.array(v)) - logU for k, v in log_p.items()}


def test_zero_steps_is_empty_product():
    f = field_1d([3.0, 5.0, 1.0])
    res = enumerate_paths(f, uniform_kernel(1), 0)
    assert res.logU == 0.0
    assert res.path_count == 1
    assert np.exp(res.log_p[res.ball.origin_index]) == 1.0


def test_single_step_exact_value():
    # xi = (1, 0, 2), uniform kernel: U = (e + 1 + e^2)/3
    f = field_1d([1.0, 0.0, 2.0])
    res = enumerate_paths(f, uniform_kernel(1), 1)
    assert res.path_count == 3
    assert res.logU == pytest.approx(math.log((math.e + 1 + math.e**2) / 3), rel=1e-15)


def test_oracle_agrees_with_hand_rolled_enumeration():
    f = field_1d([0.3, 2.0, 1.1, 0.2, 0.9], alpha=1.0)
    k = uniform_kernel(1)
    res = enumerate_paths(f, k, 2)
    logU, log_p = hand_rolled_enumeration(f, k, 2)
    assert res.logU == pytest.approx(logU, rel=1e-13)
    for pos, lp in log_p.items():
        i = f.ball.index_of(np.asarray(pos))
        assert res.log_p[i] == pytest.approx(lp, rel=1e-12)


def test_path_count_and_cap():
    f = sample_pareto_field(3, 2.0, ball(2, 12))
    with pytest.raises(ValueError, match="244140625 paths"):  # 5^12
        enumerate_paths(f, uniform_kernel(2), 12)


def test_cap_error_message_names_count():
    f = sample_pareto_field(3, 2.0, ball(2, 12))
    with pytest.raises(ValueError) as err:
        enumerate_paths(f, uniform_kernel(2), 12)
    assert str(5**12) in str(err.value)


def test_normalization_is_tight():
    f = sample_pareto_field(9, 0.5, ball(1, 8))
    res = enumerate_paths(f, uniform_kernel(1), 8)
    finite = res.log_p[np.isfinite(res.log_p)]
    assert abs(logsumexp(finite)) < 1e-12


def test_support_is_whole_ball_for_lazy_kernel():
    f = sample_pareto_field(10, 1.0, ball(1, 6))
    res = enumerate_paths(f, uniform_kernel(1), 6)
    assert np.all(np.isfinite(res.log_p))


def test_deterministic_across_runs():
    f = sample_pareto_field(12, 1.0, ball(2, 4))
    k = uniform_kernel(2)
    r1 = enumerate_paths(f, k, 4)
    r2 = enumerate_paths(f, k, 4)
    assert r1.logU == r2.logU
    assert np.array_equal(r1.log_p, r2.log_p)
    assert np.array_equal(r1.best_path.site_indices, r2.best_path.site_indices)


def test_best_path_is_argmax_and_valid():
    f = sample_pareto_field(6, 2.0, ball(1, 7))
    k = uniform_kernel(1)
    res = enumerate_paths(f, k, 7)
    path = res.best_path
    assert path.N == 7
    # recompute the weight of the reported path independently
    logw = 0.0
    for a, b_ in zip(path.site_indices[:-1], path.site_indices[1:]):
        step = tuple(int(c) for c in f.ball.coords[b_] - f.ball.coords[a])
        logw += math.log(k.prob(step)) + f.xi[b_]
    assert logw == pytest.approx(path.log_weight, rel=1e-13)


class TestDpAgainstOracle:
    def test_d1_random_field(self):
        f = sample_pareto_field(4242, 2.0, ball(1, 10))
        cmp = compare_dp_vs_oracle(f, uniform_kernel(1), 10)
        assert cmp.worst < 1e-10

    def test_d2_random_field(self):
        f = sample_pareto_field(777, 1.0, ball(2, 6))
        cmp = compare_dp_vs_oracle(f, uniform_kernel(2), 6)
        assert cmp.worst < 1e-10

    def test_zero_potential(self):
        cmp = compare_dp_vs_oracle(constant_field(1, 6, 0.0), uniform_kernel(1), 6)
        assert cmp.worst < 1e-12

    def test_randomized_instances(self):
        rng = np.random.default_rng(1)
        for trial in range(12):
            d = int(rng.integers(1, 3))
            N = int(rng.integers(2, 9 if d == 1 else 6))
            alpha = float(rng.choice([0.5, 1.0, 2.0]))
            f = sample_pareto_field(int(rng.integers(2**32)), alpha, ball(d, N))
            cmp = compare_dp_vs_oracle(f, uniform_kernel(d), N)
            assert cmp.worst < 1e-10, (d, N, alpha)
