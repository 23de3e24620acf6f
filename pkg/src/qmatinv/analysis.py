"""Closed-form cost models, the crossover search, and the success-probability bounds."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import IO, NamedTuple, Sequence

import numpy as np

from .core import LinearSystem, is_power_of_two
from .search import StagePolicy, dimred_solve

#: Register size the cost estimate is quoted at (32-bit values).
TYPICAL_M = 2**32
PAPER_CROSSOVER = 321

CSV_HEADER = ("n", "M", "quantum_steps", "classical_steps", "bound", "empirical_rate")


def stage_iterations(M: int) -> int:
    """``floor(pi/4 * sqrt(M))``: Grover iterations per reduction stage."""
    return math.floor(math.pi / 4 * math.sqrt(M))


def quantum_cost(n: int, M: int) -> int:
    """``2n (floor(pi/4 sqrt M) + n)``: search iterations plus inner products, doubled for uncompute."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not is_power_of_two(M):
        raise ValueError(f"M must be a power of two >= 2, got {M}")
    return 2 * n * (stage_iterations(M) + n)


def classical_cost(n: int) -> int:
    if n < 1:
        raise ValueError("n must be >= 1")
    return n**3


def crossover(M: int) -> int:
    """Smallest n with ``n**3 >= quantum_cost(n, M)``."""
    # n^3 >= 2n(c + n)  <=>  n^2 - 2n - 2c >= 0; start just below the positive root.
    c = stage_iterations(M)
    n = max(1, math.isqrt(1 + 2 * c))
    while n > 1 and classical_cost(n - 1) >= quantum_cost(n - 1, M):
        n -= 1
    while classical_cost(n) < quantum_cost(n, M):
        n += 1
    return n


@dataclass(frozen=True)
class CostModel:
    n: int
    M: int
    quantum_steps: int
    classical_steps: int
    crossover_n: int

    @classmethod
    def evaluate(cls, n: int, M: int) -> "CostModel":
        return cls(n, M, quantum_cost(n, M), classical_cost(n), crossover(M))


def lemma1_check(n: int, k: int) -> bool:
    """``C(n, k) <= n**k`` in exact integers."""
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got n={n}, k={k}")
    return math.comb(n, k) <= n**k


class Lemma2Result(NamedTuple):
    lhs: float
    rhs: float
    holds: bool


def lemma2_check(p: float | Fraction, n: int, digits: int = 100) -> Lemma2Result:
    """Compare ``(1 - p)**n`` with ``(1 - 2np) / (1 - np)``.

    The comparison runs in ``digits``-digit decimal arithmetic; ``p`` is
    converted exactly. At ``p = 0`` both sides equal 1, and that boundary is
    accepted as holding.
    """
    if not 0 <= p <= 1:
        raise ValueError(f"p={p} outside [0, 1]")
    if n < 1 or n * p >= 1:
        raise ValueError(f"need natural n with n*p < 1, got n={n}, p={p}")
    with localcontext() as ctx:
        ctx.prec = digits
        if isinstance(p, Fraction):
            dp = Decimal(p.numerator) / Decimal(p.denominator)
        else:
            dp = Decimal(p)
        lhs = (n * (1 - dp).ln()).exp()
        np_ = n * dp
        rhs = (1 - 2 * np_) / (1 - np_)
        holds = lhs > rhs or (p == 0 and lhs >= rhs)
    return Lemma2Result(float(lhs), float(rhs), holds)


class SuccessBound(NamedTuple):
    bound: float  # (1 - 2n/M) / (1 - n/M)
    model: float  # (1 - 1/M)**n


def success_lower_bound(n: int, M: int) -> SuccessBound:
    if not 1 <= n < M:
        raise ValueError(f"need 1 <= n < M, got n={n}, M={M}")
    x = Fraction(n, M)
    bound = (1 - 2 * x) / (1 - x)
    return SuccessBound(float(bound), math.exp(n * math.log1p(-1 / M)))


class MonteCarloResult(NamedTuple):
    rate: float
    sigma: float
    runs: int
    successes: int


def monte_carlo_success(
    system: LinearSystem, runs: int, policy: StagePolicy | None = None, rng: np.random.Generator | None = None
) -> MonteCarloResult:
    """Fraction of single-attempt dimensional-reduction runs that return a verified solution."""
    if runs < 100:
        raise ValueError("need at least 100 runs")
    policy = policy or StagePolicy()
    single = replace(policy, max_retries=0)
    rng = rng if rng is not None else np.random.default_rng(policy.seed)
    successes = 0
    for child in rng.spawn(runs):
        _, stats = dimred_solve(system, single, child)
        successes += stats.success
    rate = successes / runs
    return MonteCarloResult(rate, math.sqrt(rate * (1 - rate) / runs), runs, successes)


def write_sweep(rows: Sequence[dict], stream: IO[str]) -> None:
    writer = csv.DictWriter(stream, fieldnames=CSV_HEADER, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: ("" if row.get(k) is None else row[k]) for k in CSV_HEADER})
