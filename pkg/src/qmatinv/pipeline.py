"""Bookkeeping for the 3n-register multiply / summate / uncompute choreography.

The x registers carry the superposition. The n work registers and the n
residual registers are tracked symbolically: every value they hold is an
injective function of x, so the amplitude vector over x determines them.
That keeps simulation at ``M**n`` amplitudes instead of ``M**(3n)``.

Cost unit: one register-level multiply or add is one step, and the
Hadamard layer costs one step per x register.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import IO

from .core import LinearSystem
from .statevector import SearchState, init_uniform

CLEAN = "clean"


class LedgerError(RuntimeError):
    """An operation would break the clean-before-reuse discipline."""


def _product(row: int) -> str:
    return f"product:{row}"


def _residual(row: int) -> str:
    return f"residual:{row}"


@dataclass(frozen=True)
class RegisterLedger:
    n: int
    work_regs: tuple[str, ...]
    f_regs: tuple[str, ...]
    op_count: int = 0
    multiply_count: int = 0
    uncompute_count: int = 0
    events: tuple[dict, ...] = field(default=(), repr=False)

    @property
    def x_regs(self) -> tuple[str, ...]:
        return ("data",) * self.n

    @property
    def work_clean(self) -> bool:
        return all(r == CLEAN for r in self.work_regs)

    @property
    def rows_held(self) -> tuple[int, ...]:
        return tuple(i for i, r in enumerate(self.f_regs, 1) if r != CLEAN)

    @property
    def arithmetic_steps(self) -> int:
        """Inner-product multiplies plus their backward uncompute steps."""
        return self.multiply_count + self.uncompute_count

    def _log(self, **event) -> tuple[dict, ...]:
        return self.events + (event,)

    def write_trace(self, stream: IO[str]) -> None:
        for event in self.events:
            stream.write(json.dumps(event) + "\n")


def prepare_initial(n: int, M: int) -> tuple[RegisterLedger, SearchState]:
    state = init_uniform(n, M)
    ledger = RegisterLedger(n, (CLEAN,) * n, (CLEAN,) * n)
    ledger = replace(ledger, op_count=n, events=ledger._log(op="hadamard", registers=n, op_count=n))
    return ledger, state


def compute_row(ledger: RegisterLedger, system: LinearSystem, i: int) -> RegisterLedger:
    """Write ``a_ij x_j`` into the work registers and sum them (plus ``b_i``) into ``f_i``.

    ``i`` is 1-based.
    """
    if system.n != ledger.n:
        raise ValueError(f"ledger has {ledger.n} rows, system has {system.n}")
    if not 1 <= i <= ledger.n:
        raise ValueError(f"row {i} outside 1..{ledger.n}")
    if not ledger.work_clean:
        raise LedgerError(f"row {i}: work registers still hold {set(ledger.work_regs) - {CLEAN}}")
    if ledger.f_regs[i - 1] != CLEAN:
        raise LedgerError(f"row {i}: residual register already holds {ledger.f_regs[i - 1]}")
    n = ledger.n
    f_regs = list(ledger.f_regs)
    f_regs[i - 1] = _residual(i)
    op_count = ledger.op_count + 2 * n
    return replace(
        ledger,
        work_regs=(_product(i),) * n,
        f_regs=tuple(f_regs),
        op_count=op_count,
        multiply_count=ledger.multiply_count + n,
        events=ledger._log(op="compute_row", row=i, multiplies=n, adds=n, op_count=op_count),
    )


def uncompute_garbage(ledger: RegisterLedger, i: int) -> RegisterLedger:
    """Run the row-i multiplies backward, returning the work registers to zero."""
    if ledger.work_regs != (_product(i),) * ledger.n:
        raise LedgerError(f"row {i}: work registers hold {ledger.work_regs}, nothing to uncompute")
    uncompute_count = ledger.uncompute_count + ledger.n
    return replace(
        ledger,
        work_regs=(CLEAN,) * ledger.n,
        uncompute_count=uncompute_count,
        events=ledger._log(op="uncompute", row=i, steps=ledger.n, uncompute_count=uncompute_count),
    )


def prepare_all_rows(system: LinearSystem) -> tuple[RegisterLedger, SearchState]:
    """Full preparation sweep; the ledger ends with every residual held and all work clean."""
    ledger, state = prepare_initial(system.n, system.M)
    for i in range(1, system.n + 1):
        ledger = uncompute_garbage(compute_row(ledger, system, i), i)
    return ledger, state
