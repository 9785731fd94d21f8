"""Query-counting access to the move matrix.

Every solver reads the matrix through a :class:`CountingOracle` so classical
and simulated-quantum costs are measured the same way.  Classical reads are
charged per bit.  The quantum simulator reads a whole row through
:meth:`CountingOracle.coherent_row` (the content a superposed query would
see) and pays for it with :meth:`CountingOracle.charge`, one unit per Grover
iteration or measurement check.
"""

from __future__ import annotations

import dataclasses

from .game_core import Game


class CountingOracle:
    """Single-owner query counter over an immutable game."""

    def __init__(self, game: Game):
        self._rows = game.rows
        self.n = game.n
        self.k = game.k
        self._count = 0

    def query(self, j: int, i: int) -> int:
        if not 0 <= i < j <= self.n:
            raise IndexError(f"oracle query ({j}, {i}) is outside the lower triangle")
        self._count += 1
        return (self._rows[j] >> i) & 1

    def query_row(self, j: int) -> int:
        """Read all ``j`` bits of row ``j`` at a cost of ``j`` queries."""
        if not 1 <= j <= self.n:
            raise IndexError(f"row {j} is outside [1, {self.n}]")
        self._count += j
        return self._rows[j]

    def coherent_row(self, j: int) -> int:
        """Row ``j`` as seen by a superposed query; the caller charges the cost."""
        if not 1 <= j <= self.n:
            raise IndexError(f"row {j} is outside [1, {self.n}]")
        return self._rows[j]

    def charge(self, amount: int) -> None:
        if amount < 0:
            raise ValueError(f"cannot charge a negative amount ({amount})")
        self._count += amount

    def reset(self) -> None:
        self._count = 0

    def read(self) -> int:
        return self._count

    @property
    def queries(self) -> int:
        return self._count


class PromiseViolation(ValueError):
    """A solver's input promise (e.g. at most one move per row) does not hold."""


@dataclasses.dataclass(frozen=True)
class SolveReport:
    """Solver output.  ``values`` is None for value-only solvers."""

    solver: str
    value: int
    queries: int
    values: tuple[int, ...] | None = None
