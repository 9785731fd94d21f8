"""Subtraction game representation and the reference position-value solver.

A game with ``n`` stones and ``k`` players is a lower-triangular binary
matrix.  Row ``j`` (1 <= j <= n) has ``j`` meaningful bits, one per column
``i`` in ``[0, j)``; bit ``(j, i)`` set means a player facing ``j`` stones may
leave ``i`` stones.  Each row is stored as a Python ``int`` bitmask with bit
``i`` holding column ``i``.

Payoffs are residues mod ``k``.  The value of a position is the payoff of
the player to move under optimal play: zero for a terminal position,
otherwise the best ``(value(i) - 1) mod k`` over legal targets ``i``.
"""

from __future__ import annotations

import contextlib
import contextvars
import dataclasses
from collections.abc import Iterable, Iterator, Sequence

__all__ = [
    "DirectAccessError",
    "Game",
    "GameClassReport",
    "ParseError",
    "classify",
    "forbid_direct_access",
    "parse",
    "serialize",
    "values_from_rows",
    "win",
    "win_values",
]


class ParseError(ValueError):
    """Malformed ``.subgame`` text."""

    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


class DirectAccessError(RuntimeError):
    """Raised when a matrix bit is read around the counting oracle."""


_direct_access_forbidden: contextvars.ContextVar[bool] = contextvars.ContextVar(
    "_direct_access_forbidden", default=False
)


@contextlib.contextmanager
def forbid_direct_access() -> Iterator[None]:
    """Make ``Game.row``/``Game.bit`` raise while active.

    Solvers must read the matrix only through :class:`CountingOracle`; this
    guard lets tests prove it.
    """
    token = _direct_access_forbidden.set(True)
    try:
        yield
    finally:
        _direct_access_forbidden.reset(token)


@dataclasses.dataclass(frozen=True)
class Game:
    """Immutable k-player Subtraction game.

    ``rows[j]`` is the bitmask of legal targets from position ``j``;
    ``rows[0]`` is always 0 and exists only so indices line up.
    """

    k: int
    rows: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.k < 2:
            raise ValueError(f"need at least 2 players, got k={self.k}")
        if len(self.rows) < 2:
            raise ValueError("need n >= 1")
        if self.rows[0] != 0:
            raise ValueError("position 0 has no moves")
        for j, row in enumerate(self.rows):
            if row < 0 or row >> j:
                raise ValueError(f"row {j} has bits outside columns [0, {j})")

    @property
    def n(self) -> int:
        return len(self.rows) - 1

    @classmethod
    def from_rows(cls, k: int, rows: Iterable[int]) -> Game:
        """Build from row bitmasks for positions 1..n."""
        return cls(k, (0, *rows))

    @classmethod
    def from_edges(cls, n: int, k: int, edges: Iterable[tuple[int, int]]) -> Game:
        rows = [0] * (n + 1)
        for j, i in edges:
            if not 0 <= i < j <= n:
                raise ValueError(f"({j}, {i}) is outside the lower triangle")
            rows[j] |= 1 << i
        return cls(k, tuple(rows))

    @classmethod
    def empty(cls, n: int, k: int) -> Game:
        return cls(k, (0,) * (n + 1))

    def row(self, j: int) -> int:
        if _direct_access_forbidden.get():
            raise DirectAccessError(f"direct read of row {j}")
        return self.rows[j]

    def bit(self, j: int, i: int) -> int:
        if not 0 <= i < j <= self.n:
            raise IndexError(f"({j}, {i}) is outside the lower triangle")
        return (self.row(j) >> i) & 1

    def edge_count(self) -> int:
        return sum(row.bit_count() for row in self.rows)

    def row_string(self, j: int) -> str:
        """Row ``j`` as ``j`` characters, column 0 leftmost."""
        return format(self.rows[j], f"0{j}b")[::-1] if j else ""


@dataclasses.dataclass(frozen=True)
class GameClassReport:
    is_restricted: bool
    is_losing: bool
    balance_deviation: float


def values_from_rows(k: int, rows: Iterable[int]) -> tuple[int, ...]:
    """Position values from row bitmasks supplied in order for j = 1, 2, ...

    Keeps one bitmask per mover-payoff class so each row costs ``k`` ANDs.
    """
    values = [0]
    # by_payoff[p]: positions i whose mover-payoff (value(i) - 1) mod k is p
    by_payoff = [0] * k
    by_payoff[k - 1] = 1
    for j, row in enumerate(rows, start=1):
        v = 0
        if row:
            for p in range(k - 1, -1, -1):
                if row & by_payoff[p]:
                    v = p
                    break
        values.append(v)
        by_payoff[(v - 1) % k] |= 1 << j
    return tuple(values)


def win_values(game: Game) -> tuple[int, ...]:
    """Value of every position 0..n, bottom-up in one pass."""
    return values_from_rows(game.k, game.rows[1:])


def win(game: Game) -> int:
    return win_values(game)[-1]


def classify(game: Game, values: Sequence[int] | None = None) -> GameClassReport:
    if values is None:
        values = win_values(game)
    n, k = game.n, game.k
    counts = [0] * k
    for v in values[1:]:
        counts[v] += 1
    return GameClassReport(
        is_restricted=all(row.bit_count() <= 1 for row in game.rows),
        is_losing=values[n] == 0,
        balance_deviation=max(abs(c - n / k) for c in counts),
    )


def serialize(game: Game) -> str:
    lines = [f"{game.k} {game.n}"]
    lines.extend(game.row_string(j) for j in range(1, game.n + 1))
    return "\n".join(lines) + "\n"


def parse(text: str) -> Game:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise ParseError(1, "empty input")
    header = lines[0].split(" ")
    if len(header) != 2 or not all(h.isdigit() for h in header):
        raise ParseError(1, f"header must be '<k> <n>', got {lines[0]!r}")
    k, n = int(header[0]), int(header[1])
    if k < 2:
        raise ParseError(1, f"k must be >= 2, got {k}")
    if n < 1:
        raise ParseError(1, f"n must be >= 1, got {n}")
    rows = [0]
    for j, line in enumerate(lines[1:], start=1):
        if len(line) != j:
            raise ParseError(j + 1, f"row {j} must have {j} characters, got {len(line)}")
        if line.strip("01"):
            raise ParseError(j + 1, f"row {j} has a non-binary character")
        rows.append(int(line[::-1], 2))
    if len(rows) - 1 != n:
        raise ParseError(1, f"header declares {n} rows, found {len(rows) - 1}")
    return Game(k, tuple(rows))
