"""Amplitude-amplification solvers.

``naive_solve`` searches the whole grid for the point where every residual
vanishes. ``dimred_solve`` satisfies one row per stage: amplify the points
with ``f_i = 0`` inside the current support, measure that flag, and carry
the collapsed superposition into the next stage.
"""
from __future__ import annotations

import enum
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .core import GridPoint, LinearSystem, residual
from .pipeline import RegisterLedger, compute_row, prepare_all_rows, prepare_initial, uncompute_garbage
from .statevector import (
    Predicate,
    SearchState,
    grover_iterate,
    measure_flag,
    row_oracle,
    sample_point,
    success_probability,
    system_oracle,
)


class SearchMode(enum.Enum):
    KNOWN_T = "known_t"
    BBHT = "bbht"


class TSource(enum.Enum):
    MODEL = "model"  # assume t_i = M**(n-i)
    ORACLE = "oracle"  # count marked points on the current support


@dataclass(frozen=True)
class StagePolicy:
    """How each stage is searched.

    ``max_retries`` bounds repeated attempts: a known-t stage is tried at
    most ``1 + max_retries`` times, and BBHT draws at most ``1 + max_retries``
    samples.
    """

    mode: SearchMode = SearchMode.KNOWN_T
    max_retries: int = 0
    growth: float = 6 / 5
    seed: int | None = None
    t_source: TSource = TSource.MODEL

    def __post_init__(self) -> None:
        object.__setattr__(self, "mode", SearchMode(self.mode))
        object.__setattr__(self, "t_source", TSource(self.t_source))
        if self.growth <= 1:
            raise ValueError(f"growth factor must exceed 1, got {self.growth}")
        if self.max_retries < 0:
            raise ValueError("max_retries must be non-negative")


@dataclass
class StageRecord:
    stage: int
    N: int  # support size at stage start
    t: int  # marked points on that support
    t_assumed: int | None  # count used for the schedule; None under BBHT
    iterations: int  # Grover iterations in the final attempt
    iterations_spent: int  # summed over all attempts
    attempts: int
    flag: bool
    success_probability: float  # pre-measurement, final attempt
    model_failure: float  # t/N failure figure of the textbook analysis
    oracle_calls: int  # all attempts, including classical checks

    @property
    def retries(self) -> int:
        return self.attempts - 1


@dataclass
class SearchStats:
    algorithm: str
    stages: list[StageRecord] = field(default_factory=list)
    point: GridPoint | None = None
    verified: bool = False
    ledger: RegisterLedger | None = field(default=None, repr=False)
    final_state: SearchState | None = field(default=None, repr=False)

    @property
    def success(self) -> bool:
        return self.point is not None and self.verified

    @property
    def scheduled_iterations(self) -> int:
        """Sum of per-stage iteration counts, ignoring repeated attempts."""
        return sum(s.iterations for s in self.stages)

    @property
    def total_iterations(self) -> int:
        return sum(s.iterations_spent for s in self.stages)

    @property
    def total_oracle_calls(self) -> int:
        return sum(s.oracle_calls for s in self.stages)

    @property
    def retries(self) -> int:
        return sum(s.retries for s in self.stages)

    def to_dict(self) -> dict:
        data = {
            "algorithm": self.algorithm,
            "success": self.success,
            "point": list(self.point) if self.point is not None else None,
            "verified": self.verified,
            "total_iterations": self.total_iterations,
            "scheduled_iterations": self.scheduled_iterations,
            "total_oracle_calls": self.total_oracle_calls,
            "retries": self.retries,
            "stages": [asdict(s) for s in self.stages],
        }
        if self.ledger is not None:
            data["ledger"] = {
                "op_count": self.ledger.op_count,
                "multiply_count": self.ledger.multiply_count,
                "uncompute_count": self.ledger.uncompute_count,
            }
        return data

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def iterations_known_t(N: int, t: int) -> int:
    """``floor(pi/4 * sqrt(N/t))``, or 0 once ``t/N >= 1/2``."""
    if t == 0:
        raise ValueError("solution count t=0 leaves the iteration count undefined; use BBHT")
    if not 1 <= t <= N:
        raise ValueError(f"need 1 <= t <= N, got t={t}, N={N}")
    if 2 * t >= N:
        return 0
    return math.floor(math.pi / 4 * math.sqrt(N / t))


def _count(state: SearchState, pred: Predicate) -> int:
    return int(np.count_nonzero(pred.mask(state.coords())))


def grover_known_t(
    state: SearchState, pred: Predicate, t: int, rng: np.random.Generator, stage: int = 1
) -> tuple[GridPoint, StageRecord]:
    """Amplify with the known count ``t``, measure the flag, then sample a point."""
    k = iterations_known_t(state.size, t)
    amplified = grover_iterate(state, pred, state, k)
    p = success_probability(amplified, pred)
    flag, collapsed, _ = measure_flag(amplified, pred, rng)
    point = sample_point(collapsed, rng)
    record = StageRecord(stage, state.size, _count(state, pred), t, k, k, 1, flag, p, t / state.size, k)
    return point, record


def _bbht_schedule(size: int, rng: np.random.Generator, policy: StagePolicy):
    """Yield iteration counts: ``j`` uniform below ``m``, with ``m`` growing by ``growth`` up to ``sqrt(size)``."""
    m = 1.0
    for _ in range(1 + policy.max_retries):
        yield int(rng.integers(0, math.ceil(m)))
        m = min(policy.growth * m, math.sqrt(size))


def bbht_search(
    state: SearchState, pred: Predicate, rng: np.random.Generator, policy: StagePolicy, stage: int = 1
) -> tuple[GridPoint | None, StageRecord]:
    """Search with an unknown number of marked points.

    Each attempt runs ``j`` iterations on a fresh copy of ``state``, samples,
    and checks the sample classically; the check counts as one oracle call.
    Returns ``None`` for the point once the attempt cap is spent.
    """
    found = None
    spent = attempts = 0
    for j in _bbht_schedule(state.size, rng, policy):
        attempts += 1
        spent += j
        amplified = grover_iterate(state, pred, state, j)
        candidate = sample_point(amplified, rng)
        if pred(candidate):
            found = candidate
            break
    t = _count(state, pred)
    p = success_probability(amplified, pred)
    record = StageRecord(stage, state.size, t, None, j, spent, attempts, found is not None, p, t / state.size, spent + attempts)
    return found, record


def _verify(system: LinearSystem, point: GridPoint) -> bool:
    return all(v == 0 for v in residual(system, point))


def _amplify_until_flag(state, pred, schedule, rng):
    """Run each scheduled iteration count on a fresh copy of ``state`` until the flag reads true."""
    spent = attempts = 0
    for k in schedule:
        attempts += 1
        spent += k
        amplified = grover_iterate(state, pred, state, k)
        p = success_probability(amplified, pred)
        flag, collapsed, _ = measure_flag(amplified, pred, rng)
        if flag:
            break
    return flag, collapsed, k, spent, attempts, p


def naive_solve(
    system: LinearSystem, rng: np.random.Generator, max_retries: int = 0
) -> tuple[GridPoint | None, SearchStats]:
    """Grover search over all ``M**n`` points with the all-residuals-zero oracle (t = 1).

    A failed flag measurement repeats the search up to ``max_retries`` times;
    the point is ``None`` when every attempt fails.
    """
    ledger, start = prepare_all_rows(system)
    pred = system_oracle(system)
    N = start.size
    k = iterations_known_t(N, 1)
    flag, collapsed, k, spent, attempts, p = _amplify_until_flag(start, pred, [k] * (max_retries + 1), rng)
    stats = SearchStats("naive", ledger=ledger, final_state=collapsed)
    stats.stages.append(StageRecord(1, N, _count(start, pred), 1, k, spent, attempts, flag, p, 1 / N, spent))
    if flag:
        stats.point = sample_point(collapsed, rng)
        stats.verified = _verify(system, stats.point)
    return stats.point, stats


def dimred_solve(
    system: LinearSystem, policy: StagePolicy | None = None, rng: np.random.Generator | None = None
) -> tuple[GridPoint | None, SearchStats]:
    """Solve row by row, shrinking the surviving superposition by one dimension per stage.

    Stage i computes ``f_i``, uncomputes the products, amplifies ``f_i = 0``
    over the current support and measures the flag. A failed stage restarts
    from its own start state, at most ``policy.max_retries`` times. The final
    point is sampled and its residual checked exactly.
    """
    policy = policy or StagePolicy()
    rng = rng if rng is not None else np.random.default_rng(policy.seed)
    n, M = system.n, system.M
    ledger, state = prepare_initial(n, M)
    stats = SearchStats(f"dimred/{policy.mode.value}", ledger=ledger, final_state=state)
    for i in range(1, n + 1):
        ledger = uncompute_garbage(compute_row(ledger, system, i), i)
        stats.ledger = ledger
        pred = row_oracle(system, i)
        t = _count(state, pred)
        if policy.mode is SearchMode.BBHT:
            t_assumed = None
            schedule = _bbht_schedule(state.size, rng, policy)
        else:
            t_assumed = M ** (n - i) if policy.t_source is TSource.MODEL else t
            if t_assumed == 0:
                stats.stages.append(StageRecord(i, state.size, t, 0, 0, 0, 0, False, 0.0, 1.0, 0))
                return None, stats
            k = iterations_known_t(state.size, min(t_assumed, state.size))
            schedule = [k] * (policy.max_retries + 1)
        flag, collapsed, k, spent, attempts, p = _amplify_until_flag(state, pred, schedule, rng)
        # BBHT pays one extra call per attempt for the check; known-t calls equal iterations.
        calls = spent + attempts if policy.mode is SearchMode.BBHT else spent
        stats.stages.append(StageRecord(i, state.size, t, t_assumed, k, spent, attempts, flag, p, 1 / M, calls))
        stats.final_state = collapsed
        if not flag:
            return None, stats
        state = collapsed
    stats.point = sample_point(state, rng)
    stats.verified = _verify(system, stats.point)
    return stats.point, stats
