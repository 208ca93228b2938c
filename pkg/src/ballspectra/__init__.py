"""
Spectral toolkit for rot and grad div on a ball.

Eigenfields of curl and grad-div with zero normal trace, their spherical
Bessel radial parts and root tables, quadrature-based projection,
coefficient-space operator calculus, resolvent solvers with the Fredholm
alternative, and grid / streamline I/O.
"""
from .modes import Family, Mode, ModeIndex, enumerate_modes, eval_mode, make_mode, parse_mode
from .quad import SpectralField, build_quadrature, project, synthesize
from .roots import alpha, rho
from .solve import NotSolvable, SolveReport, solve_problem1, solve_problem2, solve_problem3

__version__ = "0.1.0"

__all__ = [
    "Family",
    "Mode",
    "ModeIndex",
    "NotSolvable",
    "SolveReport",
    "SpectralField",
    "alpha",
    "build_quadrature",
    "enumerate_modes",
    "eval_mode",
    "make_mode",
    "parse_mode",
    "project",
    "rho",
    "solve_problem1",
    "solve_problem2",
    "solve_problem3",
    "synthesize",
]
