"""Independent reference implementations used as test oracles.

Nothing here imports solver code; games are read bit by bit.
"""

from __future__ import annotations

import functools
import math

import numpy as np


def recursive_values(game) -> list[int]:
    """Top-down memoized evaluation of every position, one bit at a time."""
    k = game.k

    @functools.lru_cache(maxsize=None)
    def value(j: int) -> int:
        best = None
        for i in range(j):
            if (game.rows[j] >> i) & 1:
                payoff = (value(i) - 1) % k
                best = payoff if best is None else max(best, payoff)
        return 0 if best is None else best

    return [value(j) for j in range(game.n + 1)]


def chain_value(n: int, k: int) -> int:
    """Value of the game where every position may only take one stone."""
    return (-n) % k


def exact_iterations_by_search(m: int) -> int:
    """Smallest J with (2J+1) * asin(1/sqrt(m)) >= pi/2."""
    theta = math.asin(1 / math.sqrt(m))
    J = 0
    while (2 * J + 1) * theta < math.pi / 2 - 1e-12:
        J += 1
    return J


def phase_matched_search(m: int, marked: int | None, J: int) -> np.ndarray:
    """Measurement distribution of the phase-matched search, full statevector.

    Uses the generalized Grover operator with both reflections replaced by
    phase rotations of angle phi, where sin(phi/2) = sin(pi/(4J+2)) / sin(beta)
    and sin(beta) = 1/sqrt(m).
    """
    psi = np.full(m, 1 / math.sqrt(m), dtype=complex)
    s = psi.copy()
    beta = math.asin(1 / math.sqrt(m))
    ratio = min(1.0, math.sin(math.pi / (4 * J + 2)) / math.sin(beta))
    phi = 2 * math.asin(ratio)
    factor = 1 - np.exp(1j * phi)
    for _ in range(J):
        if marked is not None:
            psi[marked] *= np.exp(1j * phi)
        psi = -(psi - factor * s * np.vdot(s, psi))
    return np.abs(psi) ** 2


def grover_statevector(m: int, marked: set[int], t: int) -> float:
    """Probability of measuring a marked item after ``t`` plain Grover iterations."""
    psi = np.full(m, 1 / math.sqrt(m))
    idx = sorted(marked)
    for _ in range(t):
        psi[idx] *= -1
        psi = 2 * psi.mean() - psi
    return float(np.sum(psi[idx] ** 2))
