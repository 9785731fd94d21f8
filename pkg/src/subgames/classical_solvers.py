"""Classical baselines: full dynamic programming and the restricted-game walk."""

from __future__ import annotations

from .game_core import Game, values_from_rows
from .oracle import CountingOracle, PromiseViolation, SolveReport

__all__ = ["classical_dp", "require_restricted", "restricted_walk"]


def _oracle(source: CountingOracle | Game) -> CountingOracle:
    return source if isinstance(source, CountingOracle) else CountingOracle(source)


def classical_dp(source: CountingOracle | Game) -> SolveReport:
    """Read every triangle bit once, row-major, and evaluate all positions.

    Always costs exactly n(n+1)/2 queries.
    """
    oracle = _oracle(source)
    start = oracle.read()
    values = values_from_rows(oracle.k, (oracle.query_row(j) for j in range(1, oracle.n + 1)))
    return SolveReport("dp", values[-1], oracle.read() - start, values)


def restricted_walk(source: CountingOracle | Game) -> SolveReport:
    """Value of a restricted game from exactly n single-bit queries.

    Scans columns n-1 down to 0, following the unique move of the current
    position whenever it is found.  The result is only meaningful on
    restricted games; see :func:`require_restricted`.
    """
    oracle = _oracle(source)
    start = oracle.read()
    k = oracle.k
    w = 0
    j = oracle.n
    for i in range(oracle.n - 1, -1, -1):
        if oracle.query(j, i):
            j = i
            w = (w - 1) % k
    return SolveReport("walk", w, oracle.read() - start)


def require_restricted(game: Game) -> None:
    for j, row in enumerate(game.rows):
        if row.bit_count() > 1:
            raise PromiseViolation(f"row {j} has {row.bit_count()} moves; game is not restricted")
