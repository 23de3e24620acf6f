"""Complex-amplitude simulation over grid tuples.

A :class:`SearchState` stores one amplitude per grid point. It starts dense
(every index of ``M**n``) and becomes support-restricted after a flag
measurement collapses it onto a subset.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Iterable

import numpy as np

from .core import (
    GridPoint,
    LinearSystem,
    check_grid,
    coords_to_indices,
    grid_coords,
    grid_point,
    row_residuals,
)

NORM_TOL = 1e-9
ZERO_TOL = 1e-15


class ImpossibleBranch(RuntimeError):
    pass


@dataclass(frozen=True)
class Predicate:
    """A boolean oracle over grid points.

    ``mask`` maps an ``(m, n)`` coordinate array to a boolean array of
    length ``m``; it must be pure.
    """

    label: str
    mask: Callable[[np.ndarray], np.ndarray]

    def __call__(self, point: GridPoint) -> bool:
        return bool(self.mask(np.asarray([point], dtype=np.int64))[0])

    @classmethod
    def constant(cls, value: bool) -> "Predicate":
        return cls(f"always-{str(value).lower()}", lambda c: np.full(len(c), value, dtype=bool))

    @classmethod
    def marking(cls, indices: Iterable[int], M: int) -> "Predicate":
        """Marks the given grid indices."""
        marked = np.array(sorted(set(indices)), dtype=np.int64)
        return cls(f"marks{marked.tolist()}", lambda c: np.isin(coords_to_indices(c, M), marked))


def row_oracle(system: LinearSystem, i: int) -> Predicate:
    """Marks points with ``f_i = 0`` (1-based row)."""
    if not 1 <= i <= system.n:
        raise ValueError(f"row {i} outside 1..{system.n}")
    return Predicate(f"f{i}=0", lambda c: row_residuals(system, c, [i - 1])[:, 0] == 0)


def system_oracle(system: LinearSystem) -> Predicate:
    """Marks points where every residual vanishes."""
    return Predicate("sum|f|=0", lambda c: np.all(row_residuals(system, c) == 0, axis=1))


@dataclass(frozen=True)
class SearchState:
    n: int
    M: int
    amplitudes: np.ndarray
    support: np.ndarray | None = None  # grid indices; None means dense
    oracle_calls: int = 0
    evaluations: int = field(default=0, compare=False)

    @property
    def size(self) -> int:
        return len(self.amplitudes)

    def indices(self) -> np.ndarray:
        if self.support is None:
            return np.arange(self.size, dtype=np.int64)
        return self.support

    def coords(self) -> np.ndarray:
        return grid_coords(self.indices(), self.n, self.M)

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amplitudes) ** 2)))

    def amplitude(self, point: GridPoint) -> complex:
        index = sum(x * self.M**j for j, x in enumerate(point))
        if self.support is None:
            return complex(self.amplitudes[index])
        hit = np.searchsorted(self.support, index)
        if hit < len(self.support) and self.support[hit] == index:
            return complex(self.amplitudes[hit])
        return 0j

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def dump(self) -> list[list]:
        """``[index, re, im]`` for each nonzero amplitude."""
        keep = np.abs(self.amplitudes) > ZERO_TOL
        return [[int(i), float(a.real), float(a.imag)] for i, a in zip(self.indices()[keep], self.amplitudes[keep])]


def init_uniform(n: int, M: int) -> SearchState:
    size = check_grid(n, M)
    return SearchState(n, M, np.full(size, size**-0.5, dtype=np.complex128))


def point_state(point: GridPoint, M: int) -> SearchState:
    index = sum(x * M**j for j, x in enumerate(point))
    return SearchState(len(point), M, np.ones(1, dtype=np.complex128), np.array([index], dtype=np.int64))


def _marked(state: SearchState, pred: Predicate) -> np.ndarray:
    return np.asarray(pred.mask(state.coords()), dtype=bool)


def oracle_phase_flip(state: SearchState, pred: Predicate, marked: np.ndarray | None = None) -> SearchState:
    """Negate the amplitude of every marked point.

    ``marked`` may carry a precomputed mask for the same support.
    """
    if marked is None:
        marked = _marked(state, pred)
    amps = np.where(marked, -state.amplitudes, state.amplitudes)
    return replace(state, amplitudes=amps, oracle_calls=state.oracle_calls + 1, evaluations=state.evaluations + state.size)


def reflect_about(state: SearchState, reference: SearchState) -> SearchState:
    """Apply ``2|ref><ref| - I``."""
    if abs(reference.norm() - 1.0) > NORM_TOL:
        raise ValueError(f"reference state has norm {reference.norm()!r}")
    if state.size != reference.size or (
        (state.support is None) != (reference.support is None)
        or (state.support is not None and not np.array_equal(state.support, reference.support))
    ):
        raise ValueError("state and reference live on different supports")
    overlap = np.vdot(reference.amplitudes, state.amplitudes)
    return replace(state, amplitudes=2 * overlap * reference.amplitudes - state.amplitudes)


def grover_iterate(state: SearchState, pred: Predicate, reference: SearchState, k: int) -> SearchState:
    """``k`` rounds of phase flip followed by reflection about ``reference``."""
    marked = _marked(state, pred) if k else None
    for _ in range(k):
        state = reflect_about(oracle_phase_flip(state, pred, marked), reference)
    return state


def success_probability(state: SearchState, pred: Predicate) -> float:
    return float(np.sum(state.probabilities()[_marked(state, pred)]))


def _restrict(state: SearchState, keep: np.ndarray, weight: float) -> SearchState:
    amps = state.amplitudes[keep] / np.sqrt(weight)
    nonzero = np.abs(amps) > ZERO_TOL
    return replace(state, amplitudes=amps[nonzero], support=state.indices()[keep][nonzero])


def measure_flag(
    state: SearchState, pred: Predicate, rng: np.random.Generator | None = None, force: bool | None = None
) -> tuple[bool, SearchState, float]:
    """Measure whether ``pred`` holds and collapse onto the observed branch.

    Returns ``(outcome, collapsed_state, p_true)``. ``force`` fixes the
    outcome instead of drawing it; the forced branch must have nonzero weight.
    """
    marked = _marked(state, pred)
    probs = state.probabilities()
    p_true = float(np.sum(probs[marked]))
    p_false = 1.0 - p_true
    if force is None:
        if rng is None:
            raise ValueError("measure_flag needs an rng unless the outcome is forced")
        outcome = bool(rng.random() < p_true)
    else:
        outcome = bool(force)
    weight = p_true if outcome else p_false
    if weight <= ZERO_TOL:
        raise ImpossibleBranch(f"flag outcome {outcome} has probability {weight!r}")
    keep = marked if outcome else ~marked
    return outcome, _restrict(state, keep, float(np.sum(probs[keep]))), p_true


def sample_point(state: SearchState, rng: np.random.Generator) -> GridPoint:
    probs = state.probabilities()
    pick = int(rng.choice(state.size, p=probs / probs.sum()))
    return grid_point(int(state.indices()[pick]), state.n, state.M)
