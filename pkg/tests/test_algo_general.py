import math
from itertools import combinations

import numpy as np
import pytest

from oracle_thrift.algo_general import (
    AroqGrCmab,
    EmpiricalCdf,
    JointSupportBudgetExceeded,
    ShiftedDist,
    SroqGrCmab,
    discretize_observation,
    expected_value,
    shifted_distribution,
)
from oracle_thrift.core import Action, ComplexityLedger, Observation
from oracle_thrift.envs import GeneralDiscreteEnv, optimal_action
from oracle_thrift.oracle import ExactOracle


def cdf_from(values):
    cdf = EmpiricalCdf()
    for v in values:
        cdf.add(v)
    return cdf


def random_cdf(rng, max_points=5):
    support = sorted(rng.choice(np.linspace(0.05, 1.0, 20),
                                size=rng.integers(1, max_points + 1), replace=False))
    counts = rng.integers(1, 6, size=len(support))
    values = [v for v, c in zip(support, counts) for _ in range(c)]
    return cdf_from(values)


class TestShiftedDistribution:
    def test_zero_shift_is_empirical(self):
        cdf = cdf_from([0.2, 0.2, 0.6, 1.0])
        for direction in ("lower", "upper"):
            dist = shifted_distribution(cdf, direction, 0.0)
            assert dist.atoms == (0.2, 0.6, 1.0)
            assert dist.masses == pytest.approx((0.5, 0.25, 0.25))

    def test_full_shift_lower_is_point_mass_at_one(self):
        dist = shifted_distribution(cdf_from([0.2, 0.4]), "lower", 1.0)
        assert dist.atoms == (1.0,)
        assert dist.masses == (1.0,)

    def test_reference_arithmetic(self):
        # observed {0.2 x3, 0.6 x1}, eps = 0.25, lower shift
        dist = shifted_distribution(cdf_from([0.2, 0.2, 0.2, 0.6]), "lower", 0.25)
        assert dist.atoms == (0.2, 0.6, 1.0)
        assert dist.masses == pytest.approx((0.5, 0.25, 0.25))

    def test_upper_moves_mass_to_zero(self):
        dist = shifted_distribution(cdf_from([0.5, 0.5]), "upper", 0.3)
        assert dist.atoms == (0.0, 0.5)
        assert dist.masses == pytest.approx((0.3, 0.7))

    def test_mass_conservation_and_dominance(self):
        rng = np.random.default_rng(13)
        xs = np.linspace(0.0, 1.0, 101)
        for _ in range(200):
            cdf = random_cdf(rng)
            eps = float(rng.random() * 1.2)
            lower = shifted_distribution(cdf, "lower", eps)
            upper = shifted_distribution(cdf, "upper", eps)
            assert abs(sum(lower.masses) - 1.0) <= 1e-12
            assert abs(sum(upper.masses) - 1.0) <= 1e-12
            assert all(m > 0 for m in lower.masses + upper.masses)
            for x in xs[:-1]:  # F_lower <= F_hat <= F_upper pointwise on [0, 1)
                fhat = cdf.evaluate(x)
                assert lower.cdf(x) <= fhat + 1e-12
                assert upper.cdf(x) >= fhat - 1e-12

    def test_requires_data_and_valid_direction(self):
        with pytest.raises(ValueError):
            shifted_distribution(EmpiricalCdf(), "lower", 0.1)
        with pytest.raises(ValueError):
            shifted_distribution(cdf_from([0.5]), "sideways", 0.1)


class TestExpectedValue:
    def test_point_masses_sqrt_sum(self):
        d, m = 3, 3
        dists = [ShiftedDist.point_mass(1.0, "lower")] * d
        a = Action.of(range(m), d)
        reward = lambda act, y: math.sqrt(sum(y[i] for i in act.arms))
        assert expected_value(dists, a, reward) == pytest.approx(math.sqrt(m))

    def test_bernoulli_sum_linearity(self):
        dists = [ShiftedDist("lower", (0.0, 1.0), (0.5, 0.5))] * 2
        a = Action.of([0, 1], 2)
        reward = lambda act, y: sum(y[i] for i in act.arms)
        assert expected_value(dists, a, reward) == pytest.approx(1.0)

    def test_matches_monte_carlo_on_env_dists(self):
        env = GeneralDiscreteEnv(d=5, m=2, env_seed=3)
        rng = np.random.default_rng(1)
        cdfs = [cdf_from(env.support[i] for i in
                         rng.choice(5, size=40, p=env.probs[arm]))
                for arm in range(5)]
        dists = [shifted_distribution(c, "lower", 0.1) for c in cdfs]
        a = Action.of([0, 3], 5)
        exact = expected_value(dists, a, env.reward_of)
        n = 1_000_000
        y0 = np.array(dists[0].atoms)[rng.choice(len(dists[0].atoms), size=n,
                                                 p=dists[0].masses)]
        y3 = np.array(dists[3].atoms)[rng.choice(len(dists[3].atoms), size=n,
                                                 p=dists[3].masses)]
        samples = np.sqrt(y0 + y3)
        se = samples.std() / math.sqrt(n)
        assert abs(samples.mean() - exact) <= 3 * se

    def test_budget_exceeded(self):
        dists = [ShiftedDist("lower", tuple(np.linspace(0, 1, 100)),
                             tuple(np.full(100, 0.01)))] * 4
        a = Action.of(range(4), 4)
        with pytest.raises(JointSupportBudgetExceeded):
            expected_value(dists, a, lambda act, y: 0.0, budget=10_000)


def random_monotone_step_reward(rng, L):
    """Nondecreasing step function of the activated arms' sum, bounded by L."""
    thresholds = np.sort(rng.random(3) * 2.0)
    levels = np.sort(rng.random(4)) * L

    def reward(action, y):
        s = sum(y[i] for i in action.arms)
        return float(levels[np.searchsorted(thresholds, s)])

    return reward


class TestDominanceForMonotoneRewards:
    def test_lower_geq_empirical_geq_upper(self):
        rng = np.random.default_rng(5)
        d = 3
        a = Action.of([0, 1, 2], d)
        for _ in range(500):
            cdfs = [random_cdf(rng) for _ in range(d)]
            eps = float(rng.random())
            lower = [shifted_distribution(c, "lower", eps) for c in cdfs]
            upper = [shifted_distribution(c, "upper", eps) for c in cdfs]
            empirical = [shifted_distribution(c, "lower", 0.0) for c in cdfs]
            reward = random_monotone_step_reward(rng, L=2.0)
            e_lo = expected_value(lower, a, reward)
            e_mid = expected_value(empirical, a, reward)
            e_hi = expected_value(upper, a, reward)
            assert e_lo >= e_mid - 1e-12 >= e_hi - 2e-12

    def test_lipschitz_shift_bound(self):
        # optimistic index exceeds the empirical one by at most 2 L sum eps_i
        rng = np.random.default_rng(8)
        d = 3
        a = Action.of([0, 1, 2], d)
        L = 2.0
        for _ in range(200):
            cdfs = [random_cdf(rng) for _ in range(d)]
            eps = rng.random(d) * 0.5
            lower = [shifted_distribution(c, "lower", float(e)) for c, e in zip(cdfs, eps)]
            empirical = [shifted_distribution(c, "lower", 0.0) for c in cdfs]
            reward = random_monotone_step_reward(rng, L=L)
            gap = expected_value(lower, a, reward) - expected_value(empirical, a, reward)
            assert gap <= 2 * L * eps.sum() + 1e-12


class TestEmpiricalOptimism:
    def test_dkw_event_on_discrete_env(self):
        # lower-shifted index with eps = sqrt(1.5 ln n / n) dominates the true
        # expected reward in >= 95% of checks
        env = GeneralDiscreteEnv(d=5, m=2, env_seed=3)
        rng = np.random.default_rng(4)
        checks = violations = 0
        for _ in range(100):
            cdfs = [EmpiricalCdf() for _ in range(5)]
            n = int(rng.integers(5, 200))
            for _ in range(n):
                y = env.sample(rng)
                for i in range(5):
                    cdfs[i].add(float(y[i]))
            eps = math.sqrt(1.5 * math.log(max(n, 2)) / n)
            dists = [shifted_distribution(c, "lower", eps) for c in cdfs]
            for a in env.action_set:
                checks += 1
                if expected_value(dists, a, env.reward_of) < env.expected_reward(a) - 1e-12:
                    violations += 1
        assert violations <= 0.05 * checks


class TestDiscretize:
    def test_reference_points(self):
        assert discretize_observation(0.37, 10) == pytest.approx(0.4)
        assert discretize_observation(0.0, 10) == pytest.approx(0.1)
        assert discretize_observation(1.0, 10) == pytest.approx(1.0)

    def test_error_bound(self):
        rng = np.random.default_rng(2)
        for s in (1, 7, 50):
            ys = rng.random(10_000)
            for y in ys:
                z = discretize_observation(float(y), s)
                assert abs(z - y) <= 1.0 / s + 1e-12
                assert 0.0 < z <= 1.0

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            discretize_observation(1.2, 10)
        with pytest.raises(ValueError):
            discretize_observation(0.5, 0)


def drive_gr(algo, env, T, seed):
    ledger = ComplexityLedger()
    algo.start(env.action_set, T, ExactOracle(), ledger, reward_fn=env.reward_of)
    rng = np.random.default_rng([env.env_seed, seed])
    actions = []
    for t in range(1, T + 1):
        a = algo.select(t)
        y = env.sample(rng)
        algo.observe(Observation(t, a, {i: float(y[i]) for i in a.arms}))
        actions.append(a)
    return actions, ledger


class TestAroqGr:
    def test_cold_start_maximal_optimism(self):
        env = GeneralDiscreteEnv(d=4, m=2, env_seed=1)
        algo = AroqGrCmab()
        ledger = ComplexityLedger()
        algo.start(env.action_set, 100, ExactOracle(), ledger, reward_fn=env.reward_of)
        a = algo.select(1)
        # every action's index is reward at the all-ones vector; ties break low
        assert a.arms == (0, 1)
        assert ledger.snapshot() == (1, 1)

    def test_monotone_consistency_of_index(self):
        env = GeneralDiscreteEnv(d=4, m=3, env_seed=2)
        rng = np.random.default_rng(3)
        cdfs = [random_cdf(rng) for _ in range(4)]
        dists = [shifted_distribution(c, "lower", 0.2) for c in cdfs]
        small = Action.of([0, 1], 4)
        big = Action.of([0, 1, 2], 4)
        assert (expected_value(dists, big, env.reward_of)
                >= expected_value(dists, small, env.reward_of) - 1e-12)

    def test_requires_reward_fn(self):
        env = GeneralDiscreteEnv(d=3, m=2, env_seed=1)
        with pytest.raises(ValueError):
            AroqGrCmab().start(env.action_set, 50, ExactOracle(), ComplexityLedger())

    def test_rare_queries_on_default_env(self):
        env = GeneralDiscreteEnv(d=5, m=2, env_seed=4)
        _, ledger = drive_gr(AroqGrCmab(), env, 3000, seed=1)
        assert ledger.total_queries <= 60
        assert ledger.adaptivity_rounds == ledger.total_queries

    def test_discretize_mode_runs_and_rounds_intake(self):
        env = GeneralDiscreteEnv(d=4, m=2, env_seed=5)
        algo = AroqGrCmab(discretize=True, disc_constant=0.1)
        drive_gr(algo, env, 500, seed=2)
        s = algo.tracker.n_intervals
        grid = {round(j / s, 12) for j in range(1, s + 1)}
        for cdf in algo.tracker.cdfs:
            for v in cdf.distinct():
                assert round(v, 12) in grid


class TestSroqGr:
    def test_epoch_batches_and_survivors(self):
        env = GeneralDiscreteEnv(d=5, m=2, env_seed=6)
        algo = SroqGrCmab(M=3)
        _, ledger = drive_gr(algo, env, 2000, seed=3)
        executed = len(algo.epoch_log)
        assert ledger.adaptivity_rounds == executed <= 3
        assert ledger.total_queries <= (5 + 1) * 3
        assert algo.epoch_log[0]["surviving"] == [0, 1, 2, 3, 4]  # cold start keeps all

    def test_zero_shift_collapses_to_empirical_elimination(self):
        # C = 0 makes UCB = LCB = empirical expectation; after an epoch with
        # data, survivors are exactly the arms whose best containing action
        # ties the empirical optimum
        env = GeneralDiscreteEnv(d=4, m=2, env_seed=7)
        algo = SroqGrCmab(C=0.0, M=2)
        ledger = ComplexityLedger()
        T = 400
        algo.start(env.action_set, T, ExactOracle(), ledger, reward_fn=env.reward_of)
        rng = np.random.default_rng(0)
        boundary = algo.grid.boundaries[1]
        for t in range(1, boundary + 1):
            a = algo.select(t)
            if t == boundary:
                break
            y = env.sample(rng)
            algo.observe(Observation(t, a, {i: float(y[i]) for i in a.arms}))

        # recompute the empirical indices from the algorithm's own data
        dists = algo.tracker.dists("lower", lambda n: 0.0)
        values = {}
        for arms in combinations(range(4), 2):
            act = Action.of(arms, 4)
            values[arms] = expected_value(dists, act, env.reward_of)
        best = max(values.values())
        expect = sorted({i for arms, v in values.items()
                         if v >= best - 1e-12 for i in arms
                         if max(vv for aa, vv in values.items() if i in aa) >= best - 1e-12})
        assert algo.epoch_log[-1]["surviving"] == expect

    def test_optimum_survives_with_default_confidence(self):
        env = GeneralDiscreteEnv(d=5, m=2, env_seed=8)
        astar, _ = optimal_action(env)
        algo = SroqGrCmab(M=3)
        drive_gr(algo, env, 3000, seed=4)
        for entry in algo.epoch_log:
            assert set(astar.arms) <= set(entry["surviving"])
