"""Decision procedure and semantic tooling for bounded-density
multimodal logics."""

from .formula import parse, to_str
from .solver import SolverConfig, Verdict, solve_sat, solve_valid

__all__ = ["parse", "to_str", "SolverConfig", "Verdict", "solve_sat", "solve_valid"]

__version__ = "0.1.0"
