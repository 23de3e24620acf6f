"""Reference Gaussian elimination: rationals for exact systems, residues for modular ones."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .core import GridPoint, LinearSystem, Mode


class NoGridSolution(ValueError):
    pass


@dataclass(frozen=True)
class ClassicalResult:
    solution: GridPoint
    steps: int  # multiply-subtract updates plus divisions


def _eliminate_exact(system: LinearSystem) -> ClassicalResult:
    n = system.n
    rows = [[Fraction(v) for v in row] + [Fraction(-bi)] for row, bi in zip(system.A, system.b)]
    steps = 0
    for col in range(n):
        pivot = max(range(col, n), key=lambda r: abs(rows[r][col]))
        rows[col], rows[pivot] = rows[pivot], rows[col]
        for r in range(col + 1, n):
            factor = rows[r][col] / rows[col][col]
            steps += 1
            if factor:
                for c in range(col, n + 1):
                    rows[r][c] -= factor * rows[col][c]
                steps += n + 1 - col
    x = [Fraction(0)] * n
    for r in reversed(range(n)):
        acc = rows[r][n] - sum(rows[r][c] * x[c] for c in range(r + 1, n))
        x[r] = acc / rows[r][r]
        steps += n - r
    if any(v.denominator != 1 or not 0 <= v < system.M for v in x):
        raise NoGridSolution(f"solution {[str(v) for v in x]} is not a point of the {system.M}-grid")
    return ClassicalResult(tuple(int(v) for v in x), steps)


def _eliminate_modular(system: LinearSystem) -> ClassicalResult:
    n, M = system.n, system.M
    rows = [[v % M for v in row] + [-bi % M] for row, bi in zip(system.A, system.b)]
    steps = 0
    for col in range(n):
        # Invertible determinant guarantees a unit in each pivot column.
        pivot = next(r for r in range(col, n) if math.gcd(rows[r][col], M) == 1)
        rows[col], rows[pivot] = rows[pivot], rows[col]
        inv = pow(rows[col][col], -1, M)
        rows[col] = [v * inv % M for v in rows[col]]
        steps += n + 1 - col
        for r in range(n):
            if r != col and rows[r][col]:
                factor = rows[r][col]
                rows[r] = [(a - factor * p) % M for a, p in zip(rows[r], rows[col])]
                steps += n + 1 - col
    return ClassicalResult(tuple(row[n] for row in rows), steps)


def classical_solve(system: LinearSystem) -> ClassicalResult:
    if system.mode is Mode.MODULAR:
        return _eliminate_modular(system)
    return _eliminate_exact(system)
