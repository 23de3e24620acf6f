"""Integer linear systems on a discretized grid.

A system ``A x + b = 0`` is searched over the box ``{0, ..., M-1}^n``.
Grid points are stored as tuples and indexed little-endian: coordinate 1
varies fastest, so ``index = sum_j x_j * M**(j-1)``.

Two arithmetic modes are supported. ``MODULAR`` reduces every residual
mod ``M`` (register wraparound); ``EXACT`` keeps true integers.
"""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np

GridPoint = tuple[int, ...]
Residual = tuple[int, ...]

#: Largest grid (M**n) that may be enumerated or held as a dense state.
ENUMERATION_LIMIT = 2**26
#: Draw cap for rejection sampling in :func:`generate_instance`.
MAX_DRAWS = 10_000

_CHUNK = 1 << 18


class Mode(enum.Enum):
    MODULAR = "modular"
    EXACT = "exact"


class EnumerationTooLarge(ValueError):
    """Raised when a grid of M**n points exceeds :data:`ENUMERATION_LIMIT`."""


class GenerationError(RuntimeError):
    pass


def is_power_of_two(value: int) -> bool:
    return value >= 2 and value & (value - 1) == 0


def determinant(matrix: Sequence[Sequence[int]]) -> int:
    """Exact integer determinant by fraction-free (Bareiss) elimination."""
    a = [list(map(int, row)) for row in matrix]
    size = len(a)
    if size == 0:
        return 1
    sign, prev = 1, 1
    for k in range(size - 1):
        if a[k][k] == 0:
            swap = next((r for r in range(k + 1, size) if a[r][k] != 0), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, size):
            for j in range(k + 1, size):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[-1][-1]


def leading_minors(matrix: Sequence[Sequence[int]]) -> list[int]:
    """Determinants of the k x k leading principal submatrices, k = 1..n."""
    return [determinant([row[:k] for row in matrix[:k]]) for k in range(1, len(matrix) + 1)]


@dataclass(frozen=True)
class LinearSystem:
    """The problem instance ``A x + b = 0`` with grid size ``M`` per dimension."""

    A: tuple[tuple[int, ...], ...]
    b: tuple[int, ...]
    M: int
    mode: Mode = Mode.MODULAR

    def __post_init__(self) -> None:
        object.__setattr__(self, "A", tuple(tuple(int(v) for v in row) for row in self.A))
        object.__setattr__(self, "b", tuple(int(v) for v in self.b))
        object.__setattr__(self, "mode", Mode(self.mode))
        n = len(self.A)
        if n == 0:
            raise ValueError("system must have at least one unknown")
        if any(len(row) != n for row in self.A):
            raise ValueError("matrix must be square")
        if len(self.b) != n:
            raise ValueError(f"b has {len(self.b)} entries, expected {n}")
        if not is_power_of_two(self.M):
            raise ValueError(f"M must be a power of two >= 2, got {self.M}")
        det = determinant(self.A)
        if self.mode is Mode.MODULAR and math.gcd(det, self.M) != 1:
            raise ValueError(f"det(A) = {det} is not invertible modulo {self.M}")
        if self.mode is Mode.EXACT and det == 0:
            raise ValueError("det(A) = 0")

    @property
    def n(self) -> int:
        return len(self.A)

    @property
    def grid_size(self) -> int:
        return self.M**self.n

    def matrix(self) -> np.ndarray:
        return np.array(self.A, dtype=self._dtype())

    def offsets(self) -> np.ndarray:
        return np.array(self.b, dtype=self._dtype())

    def _dtype(self) -> type:
        # Fall back to Python ints when a row sum could overflow int64.
        amax = max(abs(v) for row in self.A for v in row)
        bmax = max(abs(v) for v in self.b)
        bound = self.n * amax * (self.M - 1) + bmax
        return np.int64 if bound < 2**62 else object


def grid_index(point: Sequence[int], M: int) -> int:
    return sum(int(x) * M**j for j, x in enumerate(point))


def grid_point(index: int, n: int, M: int) -> GridPoint:
    return tuple((index // M**j) % M for j in range(n))


def grid_coords(indices: np.ndarray, n: int, M: int) -> np.ndarray:
    """Vectorized :func:`grid_point`: an ``(len(indices), n)`` coordinate array."""
    indices = np.asarray(indices, dtype=np.int64)
    powers = M ** np.arange(n, dtype=np.int64)
    return (indices[:, None] // powers[None, :]) % M


def coords_to_indices(coords: np.ndarray, M: int) -> np.ndarray:
    n = coords.shape[1]
    return coords.astype(np.int64) @ (M ** np.arange(n, dtype=np.int64))


def check_grid(n: int, M: int) -> int:
    size = M**n
    if size > ENUMERATION_LIMIT:
        raise EnumerationTooLarge(f"grid of {M}^{n} = {size} points is too large to enumerate")
    return size


def residual(system: LinearSystem, x: Sequence[int]) -> Residual:
    """``f_i = sum_j a_ij x_j + b_i``, reduced mod M in modular mode."""
    if len(x) != system.n:
        raise ValueError(f"point has {len(x)} coordinates, system has {system.n} unknowns")
    if any(not 0 <= int(v) < system.M for v in x):
        raise ValueError(f"point {tuple(x)} outside grid [0, {system.M - 1}]^{system.n}")
    f = tuple(sum(a * int(v) for a, v in zip(row, x)) + bi for row, bi in zip(system.A, system.b))
    if system.mode is Mode.MODULAR:
        f = tuple(v % system.M for v in f)
    return f


def row_residuals(system: LinearSystem, coords: np.ndarray, rows: Sequence[int] | None = None) -> np.ndarray:
    """Residuals of selected rows (0-based) for each coordinate row; shape ``(m, len(rows))``."""
    A = system.matrix()
    b = system.offsets()
    if rows is not None:
        A, b = A[list(rows)], b[list(rows)]
    f = coords.astype(A.dtype) @ A.T + b
    if system.mode is Mode.MODULAR:
        f = f % system.M
    return f


def brute_force_solutions(system: LinearSystem, k: int) -> list[GridPoint]:
    """All grid points whose first ``k`` residuals vanish, in grid-index order."""
    if not 0 <= k <= system.n:
        raise ValueError(f"row prefix k={k} outside [0, {system.n}]")
    size = check_grid(system.n, system.M)
    found: list[GridPoint] = []
    for start in range(0, size, _CHUNK):
        idx = np.arange(start, min(start + _CHUNK, size), dtype=np.int64)
        if k:
            coords = grid_coords(idx, system.n, system.M)
            keep = np.all(row_residuals(system, coords, range(k)) == 0, axis=1)
            idx = idx[keep]
        found.extend(grid_point(int(i), system.n, system.M) for i in idx)
    return found


def count_solutions(system: LinearSystem, k: int) -> int:
    """Size of :func:`brute_force_solutions`; ``k = 0`` is answered without enumeration."""
    if k == 0:
        return system.grid_size
    size = check_grid(system.n, system.M)
    total = 0
    for start in range(0, size, _CHUNK):
        idx = np.arange(start, min(start + _CHUNK, size), dtype=np.int64)
        coords = grid_coords(idx, system.n, system.M)
        total += int(np.count_nonzero(np.all(row_residuals(system, coords, range(k)) == 0, axis=1)))
    return total


def check_complete_intersection(system: LinearSystem) -> list[bool]:
    """Per row, whether ``2 max_j |a_ij| <= sum_j |a_ij| + |b_i| / M`` holds (exactly)."""
    flags = []
    for row, bi in zip(system.A, system.b):
        mags = [abs(v) for v in row]
        flags.append(2 * max(mags) <= sum(mags) + Fraction(abs(bi), system.M))
    return flags


def generate_instance(n: int, M: int, mode: Mode | str = Mode.MODULAR, seed: int | None = None) -> tuple[LinearSystem, GridPoint]:
    """Random planted instance with a known grid solution.

    Coefficients are drawn uniformly from ``[-M/2, M/2 - 1]`` and the planted
    solution uniformly from the grid; ``b = -A x*``.

    Modular instances need every leading principal minor odd, which makes
    the stage-i solution count exactly ``M**(n-i)``. Rows are drawn one at a
    time and redrawn until the new leading minor is odd. Given an odd
    previous minor, that happens with probability exactly 1/2 whatever the
    earlier rows are, so the result is uniform over acceptable matrices,
    just as whole-matrix rejection would give, at ~2n draws instead of ~2**n.
    Exact instances are redrawn whole until ``det(A) != 0``.
    """
    mode = Mode(mode)
    if n < 1:
        raise ValueError("n must be >= 1")
    if not is_power_of_two(M):
        raise ValueError(f"M must be a power of two >= 2, got {M}")
    rng = np.random.default_rng(seed)
    A = _draw_matrix(n, M, mode, rng)
    x = tuple(int(v) for v in rng.integers(0, M, size=n))
    b = [-sum(a * v for a, v in zip(row, x)) for row in A]
    if mode is Mode.MODULAR:
        b = [v % M for v in b]
    return LinearSystem(A, b, M, mode), x


def _draw_matrix(n: int, M: int, mode: Mode, rng: np.random.Generator) -> list[list[int]]:
    rows: list[list[int]] = []
    for _ in range(MAX_DRAWS):
        if mode is Mode.MODULAR:
            candidate = rows + [rng.integers(-M // 2, M // 2, size=n).tolist()]
            k = len(candidate)
            if math.gcd(determinant([r[:k] for r in candidate]), M) == 1:
                rows = candidate
                if k == n:
                    return rows
        else:
            A = rng.integers(-M // 2, M // 2, size=(n, n)).tolist()
            if determinant(A) != 0:
                return A
    raise GenerationError(f"no acceptable matrix after {MAX_DRAWS} draws (n={n}, M={M}, mode={mode.value})")


@dataclass(frozen=True)
class Instance:
    system: LinearSystem
    seed: int | None = None
    solution: GridPoint | None = None

    def to_dict(self) -> dict:
        data = {
            "n": self.system.n,
            "M": self.system.M,
            "mode": self.system.mode.value,
            "A": [list(row) for row in self.system.A],
            "b": list(self.system.b),
            "seed": self.seed,
        }
        if self.solution is not None:
            data["solution"] = list(self.solution)
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "Instance":
        system = LinearSystem(data["A"], data["b"], int(data["M"]), Mode(data["mode"]))
        if int(data["n"]) != system.n:
            raise ValueError(f"declared n={data['n']} but matrix has {system.n} rows")
        solution = data.get("solution")
        return cls(system, data.get("seed"), tuple(int(v) for v in solution) if solution is not None else None)


def save_instance(path: str | Path, instance: Instance) -> None:
    Path(path).write_text(json.dumps(instance.to_dict()) + "\n", encoding="utf-8")


def load_instance(path: str | Path) -> Instance:
    return Instance.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
