"""Event-exact simulation of the quantum search subroutines and solvers.

Nothing here manipulates state vectors.  A Grover run over ``m`` items with
``M`` marked stays in a two-dimensional subspace, so after ``t`` iterations
measurement hits a marked item with probability ``sin^2((2t+1) theta)``,
``sin^2 theta = M/m``, uniformly among the marked items.  Each simulated run
draws that one Bernoulli event and charges the oracle exactly the queries the
real circuit would make: one per Grover iteration plus one for the classical
check of the measured index.

Search domains are whole rows ``{0, ..., j-1}``: which columns are moves is
itself oracle content, so non-moves are simply unmarked items.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from .game_core import Game
from .oracle import CountingOracle, PromiseViolation, SolveReport
from .rng import nth_set_bit

__all__ = [
    "BBHT_CUTOFF",
    "BBHT_GROWTH",
    "DH_BUDGET",
    "MAX_SMALL_K",
    "PayoffTable",
    "SearchOutcome",
    "UniformStream",
    "bbht_rounds",
    "bbht_search",
    "dh_max",
    "exact_grover_iterations",
    "exact_grover_row",
    "grover_success_prob",
    "repetitions_balanced",
    "repetitions_small_k",
    "solve_balanced",
    "solve_restricted",
    "solve_small_k",
]

BBHT_GROWTH = 6 / 5
# Budgets are multiples of sqrt(domain size).
BBHT_CUTOFF = 4.5
DH_BUDGET = 22.5
MAX_SMALL_K = 16


@dataclasses.dataclass(frozen=True)
class SearchOutcome:
    found: int | None
    queries: int


class UniformStream:
    """Buffered uniform draws from a numpy generator.

    Scalar ``Generator`` calls dominate simulation time; pulling doubles in
    blocks keeps a run a pure function of the generator's seed.
    """

    def __init__(self, rng: np.random.Generator, block: int = 4096):
        self._rng = rng
        self._block = block
        self._buf: list[float] = []
        self._pos = 0

    def random(self) -> float:
        if self._pos == len(self._buf):
            self._buf = self._rng.random(self._block).tolist()
            self._pos = 0
        u = self._buf[self._pos]
        self._pos += 1
        return u

    def below(self, n: int) -> int:
        """Uniform integer in ``[0, n)``."""
        return min(int(self.random() * n), n - 1)


def _stream(rng) -> UniformStream:
    if isinstance(rng, UniformStream):
        return rng
    if isinstance(rng, np.random.Generator):
        return UniformStream(rng)
    return UniformStream(np.random.default_rng(rng))


def grover_success_prob(m: int, M: int, t: int) -> float:
    """Probability that ``t`` Grover iterations then measurement hit a marked item."""
    if m < 1 or not 0 <= M <= m or t < 0:
        raise ValueError(f"invalid Grover parameters m={m}, M={M}, t={t}")
    if M == 0:
        return 0.0
    theta = math.asin(math.sqrt(M / m))
    return math.sin((2 * t + 1) * theta) ** 2


def bbht_rounds(
    m: int,
    M: int,
    stream: UniformStream,
    budget: float | None = None,
    run_to_cutoff: bool = False,
    trace: list[tuple[int, bool]] | None = None,
) -> tuple[bool, int]:
    """Run the BBHT schedule on an abstract ``(m, M)`` instance.

    Round ``r`` draws ``t`` uniformly from the integers below
    ``min(lambda^r, sqrt(m))`` and costs ``t + 1`` queries.  The schedule
    stops at the first success, or, once the next round would overrun
    ``budget`` (default ``4.5 sqrt(m)``), declares no marked item.  With
    ``run_to_cutoff`` the schedule keeps going after a success so the cost
    does not depend on the outcome.

    Returns ``(success, queries)``; ``trace`` collects ``(t, hit)`` per round.
    """
    if budget is None:
        budget = BBHT_CUTOFF * math.sqrt(m)
    cap = math.sqrt(m)
    theta = math.asin(math.sqrt(M / m)) if M else 0.0
    size = 1.0
    spent = 0
    success = False
    while True:
        t = stream.below(math.ceil(size))
        if spent + t + 1 > budget:
            break
        spent += t + 1
        hit = M > 0 and stream.random() < math.sin((2 * t + 1) * theta) ** 2
        if trace is not None:
            trace.append((t, hit))
        if hit:
            success = True
            if not run_to_cutoff:
                break
        size = min(size * BBHT_GROWTH, cap)
    return success, spent


def bbht_search(
    oracle: CountingOracle,
    j: int,
    candidates: int,
    rng,
    budget: float | None = None,
    run_to_cutoff: bool = False,
    trace: list[tuple[int, bool]] | None = None,
) -> SearchOutcome:
    """Search row ``j`` for a move whose column is in the ``candidates`` mask.

    ``candidates`` encodes the classical half of the marking predicate
    (e.g. "target payoff above the threshold"); the marked set is its
    intersection with the row.  On success the returned column is uniform
    over the marked set.
    """
    stream = _stream(rng)
    marked = oracle.coherent_row(j) & candidates
    M = marked.bit_count()
    success, spent = bbht_rounds(j, M, stream, budget, run_to_cutoff, trace)
    oracle.charge(spent)
    if not success:
        return SearchOutcome(None, spent)
    return SearchOutcome(nth_set_bit(marked, stream.below(M)), spent)


class PayoffTable:
    """Mover payoffs ``(w_i - 1) mod k`` of already-solved positions.

    Keeps one bitmask per payoff so "payoff above tau" candidate masks are
    a few ORs.
    """

    def __init__(self, k: int, values=()):
        self.k = k
        self.payoffs: list[int] = []
        self.masks = [0] * k
        for v in values:
            self.append(v)

    def append(self, value: int) -> None:
        p = (value - 1) % self.k
        self.masks[p] |= 1 << len(self.payoffs)
        self.payoffs.append(p)

    def payoff(self, i: int) -> int:
        return self.payoffs[i]

    def above(self, tau: int) -> int:
        mask = 0
        for p in range(tau + 1, self.k):
            mask |= self.masks[p]
        return mask

    def exactly(self, t: int) -> int:
        return self.masks[t]


def dh_max(oracle: CountingOracle, j: int, table: PayoffTable, rng) -> SearchOutcome:
    """Durr-Hoyer maximum search over the moves of row ``j``.

    Samples one column (1 query) as the initial threshold, then repeatedly
    BBHT-searches for a move with strictly larger payoff.  Stops when a
    search finds nothing, when no larger payoff exists at all, or when the
    ``22.5 sqrt(j)`` budget runs out.  Returns the best column seen, or None
    if no move was ever found.
    """
    stream = _stream(rng)
    budget = DH_BUDGET * math.sqrt(j)
    cutoff = BBHT_CUTOFF * math.sqrt(j)
    prefix = (1 << j) - 1

    first = stream.below(j)
    spent = 1
    if oracle.query(j, first):
        best, tau = first, table.payoff(first)
    else:
        best, tau = None, -1
    while budget - spent >= 1:
        candidates = table.above(tau) & prefix
        if not candidates:
            break
        out = bbht_search(oracle, j, candidates, stream, min(cutoff, budget - spent))
        spent += out.queries
        if out.found is None:
            break
        best, tau = out.found, table.payoff(out.found)
    return SearchOutcome(best, spent)


def _as_oracle(source: CountingOracle | Game) -> CountingOracle:
    return source if isinstance(source, CountingOracle) else CountingOracle(source)


def repetitions_balanced(n: int) -> int:
    return max(1, math.ceil(2 * math.log2(n)))


def repetitions_small_k(n: int, k: int) -> int:
    return max(1, math.ceil(2 * math.log2(n) * math.log2(k)))


def solve_balanced(source: CountingOracle | Game, rng) -> SolveReport:
    """Bounded-error solver: repeated Durr-Hoyer maximum per position.

    Each position keeps the best payoff over ``ceil(2 log2 n)`` independent
    maximum searches.  Searches only ever return real moves, so a miss can
    underestimate a value but never overstate it.
    """
    oracle = _as_oracle(source)
    start = oracle.read()
    stream = _stream(rng)
    n, k = oracle.n, oracle.k
    reps = repetitions_balanced(n)
    table = PayoffTable(k, [0])
    values = [0]
    for j in range(1, n + 1):
        w = 0
        for _ in range(reps):
            out = dh_max(oracle, j, table, stream)
            if out.found is not None:
                w = max(w, table.payoff(out.found))
        values.append(w)
        table.append(w)
    return SolveReport("quantum", values[-1], oracle.read() - start, tuple(values))


def solve_small_k(source: CountingOracle | Game, rng) -> SolveReport:
    """Fixed-schedule solver for small ``k``: existence searches per payoff.

    For ``t = k-1, ..., 1`` runs ``ceil(2 log2 n log2 k)`` full-schedule BBHT
    searches for a move paying exactly ``t``; the first ``t`` confirmed is the
    value.  Every search spends its whole schedule, so the per-position cost
    does not depend on where the marked items are.
    """
    oracle = _as_oracle(source)
    n, k = oracle.n, oracle.k
    if k > MAX_SMALL_K:
        raise ValueError(f"small-k solver supports k <= {MAX_SMALL_K}, got {k}")
    start = oracle.read()
    stream = _stream(rng)
    reps = repetitions_small_k(n, k)
    table = PayoffTable(k, [0])
    values = [0]
    for j in range(1, n + 1):
        prefix = (1 << j) - 1
        w = 0
        for t in range(k - 1, 0, -1):
            candidates = table.exactly(t) & prefix
            if candidates:
                for _ in range(reps):
                    if bbht_search(oracle, j, candidates, stream, run_to_cutoff=True).found is not None:
                        w = t
            if w:
                break
        values.append(w)
        table.append(w)
    return SolveReport("quantum-exactish", values[-1], oracle.read() - start, tuple(values))


def exact_grover_iterations(m: int) -> int:
    """Iterations of the phase-matched exact search over ``m`` items, one marked."""
    if m < 1:
        raise ValueError(f"domain must be non-empty, got {m}")
    return math.ceil(math.pi / (4 * math.asin(1 / math.sqrt(m))) - 0.5)


def exact_grover_row(oracle: CountingOracle, j: int, rng=None) -> SearchOutcome:
    """Exact search for the single move of row ``j``.

    Costs ``T(j) + 1`` queries regardless of the row: ``T(j)`` phase-matched
    iterations, after which a weight-1 row is measured at its move with
    certainty, plus one query verifying the measured column (a weight-0 row
    measures a uniform column that fails verification).
    """
    row = oracle.coherent_row(j)
    weight = row.bit_count()
    if weight > 1:
        raise PromiseViolation(f"row {j} has {weight} moves; exact search needs at most one")
    iterations = exact_grover_iterations(j)
    oracle.charge(iterations)
    if weight == 1:
        measured = row.bit_length() - 1
    else:
        measured = _stream(rng).below(j) if rng is not None else 0
    found = measured if oracle.query(j, measured) else None
    return SearchOutcome(found, iterations + 1)


def solve_restricted(source: CountingOracle | Game, rng=None) -> SolveReport:
    """Error-free solver for restricted games: one exact search per row."""
    oracle = _as_oracle(source)
    start = oracle.read()
    k = oracle.k
    stream = _stream(rng) if rng is not None else None
    values = [0]
    for j in range(1, oracle.n + 1):
        out = exact_grover_row(oracle, j, stream)
        values.append((values[out.found] - 1) % k if out.found is not None else 0)
    return SolveReport("quantum-restricted", values[-1], oracle.read() - start, tuple(values))
