import json
import math

import numpy as np
import pytest

from qmatinv.core import LinearSystem, Mode, brute_force_solutions, generate_instance, residual
from qmatinv.search import (
    SearchMode,
    StagePolicy,
    TSource,
    bbht_search,
    dimred_solve,
    grover_known_t,
    iterations_known_t,
    naive_solve,
)
from qmatinv.statevector import Predicate, init_uniform


def closed_form(N, t, k):
    return math.sin((2 * k + 1) * math.asin(math.sqrt(t / N))) ** 2


@pytest.mark.parametrize(
    "N, t, k",
    [
        (64, 1, 6),  # floor(pi/4 * 8)
        (4, 1, 1),
        (64, 16, 1),  # floor(pi/4 * 2)
        (16, 1, 3),
        (8, 4, 0),  # t/N = 1/2
        (5, 5, 0),
        (2**32, 2**16, 201),  # floor(pi/4 * 256)
    ],
)
def test_iterations_known_t(N, t, k):
    assert iterations_known_t(N, t) == k


def test_iterations_floors_not_rounds():
    # pi/4 * sqrt(32) = 4.44 and pi/4 * sqrt(8) = 2.22; pi/4 * sqrt(2**9) = 17.77
    assert iterations_known_t(32, 1) == 4
    assert iterations_known_t(512, 1) == 17


def test_iterations_undefined_count():
    with pytest.raises(ValueError):
        iterations_known_t(16, 0)
    with pytest.raises(ValueError):
        iterations_known_t(4, 5)


def test_grover_known_t_certainty():
    state = init_uniform(1, 4)
    point, rec = grover_known_t(state, Predicate.marking([2], 4), 1, np.random.default_rng(0))
    assert point == (2,)
    assert rec.iterations == 1 and rec.flag
    assert abs(rec.success_probability - 1) < 1e-12


def test_grover_known_t_sixteen():
    state = init_uniform(2, 4)
    _, rec = grover_known_t(state, Predicate.marking([11], 4), 1, np.random.default_rng(0))
    assert rec.iterations == 3
    assert abs(rec.success_probability - closed_form(16, 1, 3)) < 1e-9
    assert rec.success_probability == pytest.approx(0.9613190, abs=1e-7)


def test_grover_known_t_all_marked():
    _, rec = grover_known_t(init_uniform(1, 8), Predicate.constant(True), 8, np.random.default_rng(0))
    assert rec.iterations == 0 and rec.success_probability == pytest.approx(1.0)


def test_bbht_all_marked():
    point, rec = bbht_search(init_uniform(1, 8), Predicate.constant(True), np.random.default_rng(0), StagePolicy())
    assert point is not None
    assert rec.attempts == 1 and rec.iterations_spent == 0


def test_bbht_unsatisfiable():
    policy = StagePolicy(SearchMode.BBHT, max_retries=10)
    for seed in range(20):
        point, rec = bbht_search(init_uniform(1, 16), Predicate.constant(False), np.random.default_rng(seed), policy)
        assert point is None and not rec.flag
        assert rec.attempts == 11


def test_bbht_finds_marked_point():
    pred = Predicate.marking([3, 17, 40], 64)
    policy = StagePolicy(SearchMode.BBHT, max_retries=30)
    for seed in range(50):
        point, rec = bbht_search(init_uniform(1, 64), pred, np.random.default_rng(seed), policy)
        assert point is not None and pred(point)
        assert rec.oracle_calls == rec.iterations_spent + rec.attempts


def test_bbht_mean_calls_small_sample():
    pred = Predicate.marking(range(8), 64)
    policy = StagePolicy(SearchMode.BBHT, max_retries=30)
    calls = [bbht_search(init_uniform(1, 64), pred, np.random.default_rng(s), policy)[1].oracle_calls for s in range(200)]
    target = math.pi / 4 * math.sqrt(8)
    assert target / 4 <= np.mean(calls) <= 4 * target


def test_policy_validation():
    with pytest.raises(ValueError):
        StagePolicy(growth=1.0)
    with pytest.raises(ValueError):
        StagePolicy(max_retries=-1)
    assert StagePolicy("bbht").mode is SearchMode.BBHT


def test_naive_single_unknown():
    system, x = generate_instance(1, 4, Mode.MODULAR, 0)
    point, stats = naive_solve(system, np.random.default_rng(0))
    assert point == x
    assert stats.stages[0].iterations == 1
    assert stats.stages[0].model_failure == pytest.approx(1 / 4)


def test_naive_two_by_eight():
    system, x = generate_instance(2, 8, Mode.MODULAR, 42)
    point, stats = naive_solve(system, np.random.default_rng(1))
    rec = stats.stages[0]
    assert rec.iterations == 6 and rec.N == 64 and rec.t == 1
    assert rec.success_probability >= 1 - 1 / 64
    assert abs(rec.success_probability - closed_form(64, 1, 6)) < 1e-3
    assert stats.ledger.rows_held == (1, 2)


def test_naive_empirical_success():
    system, x = generate_instance(2, 4, Mode.MODULAR, 3)
    rng = np.random.default_rng(77)
    hits = sum(naive_solve(system, child)[0] == x for child in rng.spawn(500))
    assert hits / 500 >= 0.9


def test_naive_retries():
    system, x = generate_instance(3, 2, Mode.MODULAR, 4)
    for seed in range(30):
        point, stats = naive_solve(system, np.random.default_rng(seed), max_retries=30)
        assert point == x
        assert stats.total_iterations == stats.stages[0].iterations * stats.stages[0].attempts


def test_dimred_two_by_four():
    system, x = generate_instance(2, 4, Mode.MODULAR, 2)
    point, stats = dimred_solve(system, StagePolicy(max_retries=20), np.random.default_rng(0))
    assert point == x
    assert [s.N for s in stats.stages] == [16, 4]
    assert stats.final_state.size == 1
    assert [s.iterations for s in stats.stages] == [1, 1]


def test_dimred_three_by_four():
    system, x = generate_instance(3, 4, Mode.MODULAR, 9)
    point, stats = dimred_solve(system, StagePolicy(max_retries=20), np.random.default_rng(0))
    assert point == x
    assert [s.N for s in stats.stages] == [64, 16, 4]
    assert [s.t for s in stats.stages] == [16, 4, 1]
    assert stats.scheduled_iterations == 3 == 3 * math.floor(math.pi / 4 * 2)


def test_dimred_single_unknown_matches_naive():
    for M in (4, 8, 16, 64):
        system, x = generate_instance(1, M, Mode.MODULAR, M)
        _, naive = naive_solve(system, np.random.default_rng(5))
        _, dimred = dimred_solve(system, StagePolicy(), np.random.default_rng(5))
        assert naive.point == dimred.point
        assert naive.stages[0].iterations == dimred.stages[0].iterations
        assert naive.stages[0].success_probability == pytest.approx(dimred.stages[0].success_probability, abs=1e-12)


@pytest.mark.parametrize("n, M", [(2, 4), (2, 8), (3, 4), (2, 16), (3, 8)])
def test_dimred_stage_probabilities_match_closed_form(n, M):
    for seed in range(4):
        system, x = generate_instance(n, M, Mode.MODULAR, seed)
        _, stats = dimred_solve(system, StagePolicy(max_retries=50), np.random.default_rng(seed))
        for i, rec in enumerate(stats.stages, 1):
            N_i = len(brute_force_solutions(system, i - 1))
            t_i = len(brute_force_solutions(system, i))
            assert (rec.N, rec.t) == (N_i, t_i) == (M ** (n - i + 1), M ** (n - i))
            assert abs(rec.success_probability - closed_form(N_i, t_i, rec.iterations)) < 1e-9
        assert stats.point == x


def test_dimred_oracle_mode_exact_arithmetic():
    # Exact arithmetic clips the intersections, so stage counts differ from M**(n-i).
    for seed in range(10):
        system, x = generate_instance(2, 8, Mode.EXACT, seed)
        policy = StagePolicy(t_source=TSource.ORACLE, max_retries=50)
        point, stats = dimred_solve(system, policy, np.random.default_rng(seed))
        assert point == x
        for rec in stats.stages:
            assert rec.t_assumed == rec.t
            assert abs(rec.success_probability - closed_form(rec.N, rec.t, rec.iterations)) < 1e-9


def test_dimred_bbht_mode():
    for seed in range(10):
        system, x = generate_instance(3, 4, Mode.MODULAR, seed)
        point, stats = dimred_solve(system, StagePolicy(SearchMode.BBHT, max_retries=30), np.random.default_rng(seed))
        assert point == x
        assert all(s.t_assumed is None for s in stats.stages)
        assert stats.total_oracle_calls == stats.total_iterations + sum(s.attempts for s in stats.stages)


def test_dimred_failure_without_retries():
    system, _ = generate_instance(2, 8, Mode.MODULAR, 0)
    outcomes = [dimred_solve(system, StagePolicy(), np.random.default_rng(s)) for s in range(300)]
    failures = [stats for point, stats in outcomes if point is None]
    assert failures, "expected some single-attempt failures at M=8"
    for stats in failures:
        assert not stats.success and not stats.stages[-1].flag


def test_dimred_no_grid_solution_fails_cleanly():
    system = LinearSystem([[2]], [-1], 4, Mode.EXACT)
    point, stats = dimred_solve(system, StagePolicy(max_retries=5), np.random.default_rng(0))
    assert point is None and not stats.success
    point, stats = dimred_solve(system, StagePolicy(t_source="oracle"), np.random.default_rng(0))
    assert point is None


def test_stats_totals_and_json():
    system, x = generate_instance(3, 8, Mode.MODULAR, 1)
    _, stats = dimred_solve(system, StagePolicy(max_retries=10), np.random.default_rng(4))
    assert stats.total_iterations == sum(s.iterations_spent for s in stats.stages)
    assert stats.total_oracle_calls == sum(s.oracle_calls for s in stats.stages)
    assert stats.retries == sum(s.attempts - 1 for s in stats.stages)
    data = json.loads(stats.to_json())
    assert data["point"] == list(x) and data["success"]
    assert len(data["stages"]) == 3
    assert data["ledger"]["uncompute_count"] == 9


def test_returned_points_always_verified():
    for seed in range(40):
        system, _ = generate_instance(2, 4, Mode.MODULAR, seed)
        point, stats = dimred_solve(system, StagePolicy(), np.random.default_rng(seed))
        if point is not None:
            assert residual(system, point) == (0, 0) and stats.verified


def test_dimred_reproducible():
    system, _ = generate_instance(3, 8, Mode.MODULAR, 2)
    a = dimred_solve(system, StagePolicy(seed=3))[1].to_json()
    b = dimred_solve(system, StagePolicy(seed=3))[1].to_json()
    assert a == b
