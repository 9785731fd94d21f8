"""Seeded generators for balanced, losing, restricted and dense games."""

from __future__ import annotations

import dataclasses
import enum

import numpy as np

from .game_core import Game
from .rng import bernoulli_bits, make_rng, nth_set_bit, random_bits

__all__ = [
    "GenConfig",
    "GenerationError",
    "Variant",
    "allowed_target_values",
    "flip_bit",
    "gen_balanced",
    "gen_dense_uniform",
    "gen_restricted",
]


class GenerationError(RuntimeError):
    pass


class Variant(str, enum.Enum):
    REJECTION = "rejection"
    DETERMINISTIC_BASE = "deterministic-base"


@dataclasses.dataclass(frozen=True)
class GenConfig:
    n: int
    k: int
    seed: int = 0
    variant: Variant = Variant.REJECTION
    pin_losing: bool = False
    edge_prob: float = 0.5
    max_restarts: int = 1000

    def __post_init__(self) -> None:
        object.__setattr__(self, "variant", Variant(self.variant))
        if self.n < 1 or self.k < 2:
            raise ValueError(f"need n >= 1 and k >= 2, got n={self.n}, k={self.k}")
        if not 0 < self.edge_prob <= 1:
            raise ValueError(f"edge_prob must be in (0, 1], got {self.edge_prob}")
        if self.variant is Variant.DETERMINISTIC_BASE and self.n < self.k:
            raise ValueError("deterministic-base variant needs n >= k")
        if self.max_restarts < 1:
            raise ValueError("max_restarts must be positive")


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return make_rng(int(seed))


def allowed_target_values(w: int, k: int) -> list[int]:
    """Target values a value-``w`` position may move to without beating ``w``.

    A move to a value-``v`` position pays the mover ``(v - 1) mod k``; those
    paying at most ``w`` are allowed, i.e. ``(w+1) mod k, w, w-1, ..., 1``.
    """
    return [v for v in range(k) if (v - 1) % k <= w]


def gen_balanced(cfg: GenConfig, rng: np.random.Generator | None = None) -> tuple[Game, tuple[int, ...]]:
    """Random balanced game and the values it was built to have.

    ``rng`` overrides ``cfg.seed`` when the caller already owns a stream.
    """
    rng = make_rng(cfg.seed) if rng is None else rng
    n, k, p = cfg.n, cfg.k, cfg.edge_prob
    allowed = [allowed_target_values(w, k) for w in range(k)]
    attempts = 1 if cfg.variant is Variant.DETERMINISTIC_BASE else cfg.max_restarts

    for _ in range(attempts):
        values = rng.integers(0, k, size=n + 1).tolist()
        values[0] = 0
        if cfg.variant is Variant.DETERMINISTIC_BASE:
            for w in range(1, k):
                values[w] = k - w
        if cfg.pin_losing:
            values[n] = 0

        by_value = [0] * k
        by_value[0] = 1
        rows = [0]
        for j in range(1, n + 1):
            w = values[j]
            need = by_value[(w + 1) % k]
            if not need:
                break
            target = 0
            for v in allowed[w]:
                target |= by_value[v]
            row = bernoulli_bits(rng, j, p) & target
            if not row & need:
                row |= 1 << nth_set_bit(need, int(rng.integers(need.bit_count())))
            rows.append(row)
            by_value[w] |= 1 << j
        else:
            return Game(k, tuple(rows)), tuple(values)

    if cfg.variant is Variant.DETERMINISTIC_BASE:
        raise AssertionError("deterministic-base generation cannot fail")
    raise GenerationError(
        f"no valid balanced game after {cfg.max_restarts} restarts (n={n}, k={k})"
    )


def gen_restricted(n: int, k: int, seed=0, move_prob: float = 1.0) -> Game:
    """Each row independently gets one uniformly placed move with ``move_prob``."""
    if n < 1 or k < 2:
        raise ValueError(f"need n >= 1 and k >= 2, got n={n}, k={k}")
    if not 0 <= move_prob <= 1:
        raise ValueError(f"move_prob must be in [0, 1], got {move_prob}")
    rng = _as_rng(seed)
    rows = [0]
    for j in range(1, n + 1):
        take = rng.random() < move_prob
        i = int(rng.integers(j))
        rows.append(1 << i if take else 0)
    return Game(k, tuple(rows))


def gen_dense_uniform(n: int, k: int, seed=0) -> Game:
    """Every triangle bit iid fair coin."""
    if n < 1 or k < 2:
        raise ValueError(f"need n >= 1 and k >= 2, got n={n}, k={k}")
    rng = _as_rng(seed)
    return Game(k, (0, *(random_bits(rng, j) for j in range(1, n + 1))))


def flip_bit(game: Game, j: int, i: int) -> Game:
    if not 0 <= i < j <= game.n:
        raise ValueError(f"({j}, {i}) is outside the lower triangle of n={game.n}")
    rows = list(game.rows)
    rows[j] ^= 1 << i
    return Game(game.k, tuple(rows))
