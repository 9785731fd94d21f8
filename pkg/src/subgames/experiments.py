"""Monte Carlo harnesses: one-bit sensitivity, solver error rate, query scaling.

Every trial derives its random streams from ``(master_seed, purpose, ...,
trial)`` so results do not depend on scheduling or on the number of worker
processes.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import math
import zlib
from collections.abc import Callable, Iterable, Sequence
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .classical_solvers import classical_dp, restricted_walk
from .game_core import Game, win_values
from .game_gen import GenConfig, Variant, flip_bit, gen_balanced, gen_dense_uniform, gen_restricted
from .oracle import CountingOracle, SolveReport
from .quantum_sim import solve_balanced, solve_restricted, solve_small_k
from .rng import make_rng

__all__ = [
    "CASES",
    "ErrorRateResult",
    "SensitivityFacts",
    "ScalingResult",
    "SensitivityResult",
    "SensitivityTrial",
    "SOLVERS",
    "case_of",
    "fit_loglog_slope",
    "sensitivity_facts",
    "run_error_rate",
    "run_scaling",
    "run_sensitivity",
    "scaling_csv",
    "sensitivity_csv",
    "sensitivity_trial",
    "summarize_scaling",
    "wilson_interval",
]

Z95 = 1.959963984540054

CASES = {
    1: "j=n, i=0",
    2: "j=n, i>0",
    3: "j<n, i=0",
    4: "0<i<j<n",
}

# solver name -> (callable taking (oracle, rng), needs restricted input)
SOLVERS: dict[str, tuple[Callable[[CountingOracle, np.random.Generator], SolveReport], bool]] = {
    "dp": (lambda oracle, rng: classical_dp(oracle), False),
    "walk": (lambda oracle, rng: restricted_walk(oracle), True),
    "quantum": (solve_balanced, False),
    "quantum-exactish": (solve_small_k, False),
    "quantum-restricted": (solve_restricted, True),
}

FAMILIES = ("dense", "balanced", "restricted")


def _tag(name: str) -> int:
    return zlib.crc32(name.encode())


def wilson_interval(successes: int, trials: int, z: float = Z95) -> tuple[float, float]:
    if trials <= 0:
        raise ValueError("need at least one trial")
    p = successes / trials
    denom = 1 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


def _map(fn, items: Sequence, jobs: int) -> list:
    if jobs <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    chunk = max(1, len(items) // (jobs * 8))
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items, chunksize=chunk))


# -- sensitivity ------------------------------------------------------------


def case_of(j: int, i: int, n: int) -> int:
    if j == n:
        return 1 if i == 0 else 2
    return 3 if i == 0 else 4


def _pair_from_index(u: int) -> tuple[int, int]:
    """The ``u``-th triangle bit in row-major order, rows counted from 1."""
    j = (1 + math.isqrt(1 + 8 * u)) // 2
    return j, u - j * (j - 1) // 2


def _draw_bit(rng: np.random.Generator, n: int, force_case: int | None) -> tuple[int, int]:
    if force_case is None:
        return _pair_from_index(int(rng.integers(n * (n + 1) // 2)))
    if force_case == 1:
        return n, 0
    if force_case == 2:
        return n, int(rng.integers(1, n))
    if force_case == 3:
        return int(rng.integers(1, n)), 0
    if force_case == 4:
        # pairs 0 < i < j < n are the triangle of n-2 rows shifted by one
        j, i = _pair_from_index(int(rng.integers((n - 1) * (n - 2) // 2)))
        return j + 1, i + 1
    raise ValueError(f"force_case must be 1..4, got {force_case}")


@dataclasses.dataclass(frozen=True)
class SensitivityTrial:
    trial: int
    j: int
    i: int
    case: int
    changed: bool
    # the single-step mechanism of the case held (see _direct_mechanism)
    direct: bool = False


def sensitivity_trial(
    n: int,
    k: int,
    seed: int,
    trial: int = 0,
    variant: Variant | str = Variant.REJECTION,
    force_case: int | None = None,
) -> SensitivityTrial:
    """Flip one bit of a random losing balanced game; did the game value change?"""
    min_n = {None: 1, 1: 1, 2: 2, 3: 2, 4: 3}[force_case]
    if n < min_n:
        raise ValueError(f"case {force_case} needs n >= {min_n}")
    rng = make_rng(seed, _tag("sensitivity"), trial)
    game, values = gen_balanced(GenConfig(n, k, variant=variant, pin_losing=True), rng=rng)
    j, i = _draw_bit(rng, n, force_case)
    before = classical_dp(game).value
    after = classical_dp(flip_bit(game, j, i)).value
    case = case_of(j, i, n)
    return SensitivityTrial(trial, j, i, case, before != after, _direct_mechanism(game, values, j, i, case))


def _direct_mechanism(game: Game, values: Sequence[int], j: int, i: int, case: int) -> bool:
    """Whether the flip changes the value through the case's one-step argument.

    Changes can also propagate through intermediate positions, so the
    observed change rate is at least the rate of this event.
    """
    n = game.n
    to_n = (game.rows[n] >> j) & 1
    if case == 1:
        return True
    if case == 2:
        return values[i] != 1 and not (game.rows[n] >> i) & 1
    if case == 3:
        return values[j] == 1 and bool(to_n)
    return values[j] == 1 and values[i] == 0 and bool(to_n)


@dataclasses.dataclass(frozen=True)
class SensitivityResult:
    n: int
    k: int
    trials: int
    changed: int
    p_hat: float
    ci: tuple[float, float]
    per_case: dict[int, tuple[int, int]]
    rows: tuple[SensitivityTrial, ...] = dataclasses.field(repr=False, default=())

    def case_rate(self, case: int) -> tuple[float, tuple[float, float]]:
        count, changed = self.per_case[case]
        return changed / count, wilson_interval(changed, count)


def _sensitivity_worker(args) -> SensitivityTrial:
    return sensitivity_trial(*args)


def summarize_sensitivity(rows: Iterable[SensitivityTrial], n: int, k: int) -> SensitivityResult:
    rows = tuple(rows)
    per_case = {c: [0, 0] for c in CASES}
    for r in rows:
        per_case[r.case][0] += 1
        per_case[r.case][1] += r.changed
    changed = sum(r.changed for r in rows)
    return SensitivityResult(
        n=n,
        k=k,
        trials=len(rows),
        changed=changed,
        p_hat=changed / len(rows),
        ci=wilson_interval(changed, len(rows)),
        per_case={c: (a, b) for c, (a, b) in per_case.items() if a},
        rows=rows,
    )


def run_sensitivity(
    n: int,
    k: int,
    trials: int,
    master_seed: int,
    variant: Variant | str = Variant.REJECTION,
    force_case: int | None = None,
    jobs: int = 1,
) -> SensitivityResult:
    variant = Variant(variant)
    work = [(n, k, master_seed, t, variant, force_case) for t in range(trials)]
    return summarize_sensitivity(_map(_sensitivity_worker, work, jobs), n, k)


def sensitivity_csv(result: SensitivityResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["trial", "j", "i", "case", "changed"])
    for r in result.rows:
        w.writerow([r.trial, r.j, r.i, r.case, int(r.changed)])
    return buf.getvalue()


@dataclasses.dataclass(frozen=True)
class SensitivityFacts:
    """Counts behind the structural facts the sensitivity bound rests on."""

    positions: int
    value_counts: tuple[int, ...]
    # positions j < n with Win(j) = 1, and how many of them n can move to
    value_one: int
    value_one_reachable: int
    # moves from n to a position whose value is not 1 (must be zero when losing)
    bad_moves: int


def sensitivity_facts(
    n: int, k: int, games: int, seed: int, variant: Variant | str = Variant.REJECTION
) -> SensitivityFacts:
    counts = [0] * k
    value_one = reachable = bad = 0
    for g in range(games):
        game, values = gen_balanced(
            GenConfig(n, k, variant=variant, pin_losing=True), rng=make_rng(seed, _tag("facts"), g)
        )
        top = game.rows[n]
        for j in range(1, n + 1):
            counts[values[j]] += 1
        for j in range(1, n):
            edge = (top >> j) & 1
            if values[j] == 1:
                value_one += 1
                reachable += edge
            elif edge:
                bad += 1
    return SensitivityFacts(games * n, tuple(counts), value_one, reachable, bad)


# -- error rate -------------------------------------------------------------


@dataclasses.dataclass(frozen=True)
class ErrorRateResult:
    n: int
    solver: str
    trials: int
    errors: int
    fraction: float
    ci: tuple[float, float]


def _error_worker(args) -> bool:
    n, k, seed, trial, solver, family = args
    game = _make_game(family, n, k, seed, trial)
    fn, _ = SOLVERS[solver]
    rng = make_rng(seed, _tag("solver:" + solver), n, trial)
    report = fn(CountingOracle(game), rng)
    return not _matches(report, win_values(game))


def run_error_rate(
    n: int,
    trials: int,
    master_seed: int,
    k: int = 3,
    solver: str = "quantum",
    family: str | None = None,
    jobs: int = 1,
) -> ErrorRateResult:
    """Fraction of runs where any position value differs from the DP answer."""
    if solver not in SOLVERS:
        raise ValueError(f"unknown solver {solver!r}")
    if family is None:
        family = "restricted" if SOLVERS[solver][1] else "dense"
    work = [(n, k, master_seed, t, solver, family) for t in range(trials)]
    errors = sum(_map(_error_worker, work, jobs))
    return ErrorRateResult(n, solver, trials, errors, errors / trials, wilson_interval(errors, trials))


# -- scaling ----------------------------------------------------------------


def _make_game(family: str, n: int, k: int, seed: int, trial: int) -> Game:
    rng = make_rng(seed, _tag("game:" + family), n, trial)
    if family == "dense":
        return gen_dense_uniform(n, k, rng)
    if family == "restricted":
        return gen_restricted(n, k, rng)
    if family == "balanced":
        return gen_balanced(GenConfig(n, k, variant=Variant.DETERMINISTIC_BASE), rng=rng)[0]
    raise ValueError(f"unknown game family {family!r}")


def _matches(report: SolveReport, values: Sequence[int]) -> bool:
    if report.values is None:
        return report.value == values[-1]
    return tuple(report.values) == tuple(values)


@dataclasses.dataclass(frozen=True)
class ScalingRow:
    family: str
    solver: str
    n: int
    trial: int
    queries: int
    correct: bool


def _scaling_worker(args) -> ScalingRow:
    family, solver, n, k, seed, trial = args
    game = _make_game(family, n, k, seed, trial)
    fn, _ = SOLVERS[solver]
    report = fn(CountingOracle(game), make_rng(seed, _tag("solver:" + solver), n, trial))
    return ScalingRow(family, solver, n, trial, report.queries, _matches(report, win_values(game)))


@dataclasses.dataclass(frozen=True)
class Fit:
    slope: float
    intercept: float
    r2: float


@dataclasses.dataclass(frozen=True)
class ScalingResult:
    # (family, solver, n) -> (trials, mean queries, std queries, correct count)
    cells: dict[tuple[str, str, int], tuple[int, float, float, int]]
    fits: dict[tuple[str, str], Fit]
    rows: tuple[ScalingRow, ...] = dataclasses.field(repr=False, default=())

    def slope(self, solver: str) -> float:
        (fit,) = [f for (fam, s), f in self.fits.items() if s == solver]
        return fit.slope


def fit_loglog_slope(points: Iterable[tuple[float, float]]) -> tuple[float, float, float]:
    """Least-squares line through ``(log n, log q)``: (slope, intercept, r^2)."""
    pts = list(points)
    if len(pts) < 3:
        raise ValueError(f"need at least 3 points, got {len(pts)}")
    if any(x <= 0 or y <= 0 for x, y in pts):
        raise ValueError("log-log fit needs positive coordinates")
    x = np.log([p[0] for p in pts])
    y = np.log([p[1] for p in pts])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot else 1.0
    return float(slope), float(intercept), r2


def summarize_scaling(rows: Iterable[ScalingRow]) -> ScalingResult:
    """Cell statistics and per-solver fits, from rows alone (e.g. read back from CSV)."""
    rows = tuple(rows)
    grouped: dict[tuple[str, str, int], list[ScalingRow]] = {}
    for r in rows:
        grouped.setdefault((r.family, r.solver, r.n), []).append(r)
    cells = {}
    for key in sorted(grouped, key=lambda c: (c[1], c[0], c[2])):
        q = np.array([r.queries for r in grouped[key]], dtype=float)
        cells[key] = (len(q), float(q.mean()), float(q.std()), sum(r.correct for r in grouped[key]))
    fits = {}
    for fam, solver in sorted({(f, s) for f, s, _ in cells}, key=lambda c: c[1]):
        pts = [(n, mean) for (f, s, n), (_, mean, _, _) in cells.items() if (f, s) == (fam, solver)]
        if len(pts) >= 3:
            fits[(fam, solver)] = Fit(*fit_loglog_slope(sorted(pts)))
    return ScalingResult(cells, fits, rows)


def run_scaling(
    n_list: Sequence[int],
    trials: int,
    solvers: Sequence[str],
    master_seed: int,
    game_family: str = "dense",
    k: int = 3,
    jobs: int = 1,
) -> ScalingResult:
    """Mean oracle queries per (solver, n) and fitted log-log slopes.

    Solvers that require restricted input always run on restricted games;
    the others run on ``game_family``.  All solvers sharing a family see the
    same games.
    """
    n_list = list(n_list)
    if len(n_list) < 4 or n_list != sorted(set(n_list)) or n_list[-1] < 16 * n_list[0]:
        raise ValueError("sizes must be ascending, at least 4 of them, spanning a 16x range")
    if trials < 1:
        raise ValueError("need at least one trial per cell")
    if game_family not in FAMILIES:
        raise ValueError(f"unknown game family {game_family!r}")
    for s in solvers:
        if s not in SOLVERS:
            raise ValueError(f"unknown solver {s!r}")
    work = []
    for solver in solvers:
        family = "restricted" if SOLVERS[solver][1] else game_family
        for n in n_list:
            work.extend((family, solver, n, k, master_seed, t) for t in range(trials))
    return summarize_scaling(_map(_scaling_worker, work, jobs))


def scaling_csv(result: ScalingResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["family", "solver", "n", "trial", "queries", "correct"])
    for r in result.rows:
        w.writerow([r.family, r.solver, r.n, r.trial, r.queries, int(r.correct)])
    return buf.getvalue()


def read_scaling_csv(text: str) -> list[ScalingRow]:
    return [
        ScalingRow(r["family"], r["solver"], int(r["n"]), int(r["trial"]), int(r["queries"]), r["correct"] == "1")
        for r in csv.DictReader(io.StringIO(text))
    ]


def read_sensitivity_csv(text: str) -> list[SensitivityTrial]:
    return [
        SensitivityTrial(int(r["trial"]), int(r["j"]), int(r["i"]), int(r["case"]), r["changed"] == "1")
        for r in csv.DictReader(io.StringIO(text))
    ]
