"""Regularized Newton-type solvers for F(x) = 0 via f = ||F||^2."""

from ._qnewton import (
    ConfigError,
    Error,
    basin_grid,
    classify_limit,
    corpus_names,
    eigh,
    estimate_order,
    holder_conjugate_ok,
    minsp,
    problem_info,
    reflected_solve,
    residual,
    saddle_escape,
    solve,
    solve_system,
)

__all__ = [
    "ConfigError",
    "Error",
    "basin_grid",
    "classify_limit",
    "corpus_names",
    "eigh",
    "estimate_order",
    "holder_conjugate_ok",
    "minsp",
    "problem_info",
    "reflected_solve",
    "residual",
    "saddle_escape",
    "solve",
    "solve_system",
]
