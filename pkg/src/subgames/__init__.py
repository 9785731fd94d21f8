"""Solvers, generators and query-complexity benchmarks for k-player Subtraction games."""

from .classical_solvers import classical_dp, require_restricted, restricted_walk
from .game_core import Game, GameClassReport, ParseError, classify, parse, serialize, win, win_values
from .game_gen import GenConfig, GenerationError, Variant, flip_bit, gen_balanced, gen_dense_uniform, gen_restricted
from .oracle import CountingOracle, PromiseViolation, SolveReport
from .quantum_sim import solve_balanced, solve_restricted, solve_small_k

__version__ = "0.1.0"
