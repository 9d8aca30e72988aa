"""Entropic mirror-descent / mirror-prox solvers for two-player zero-sum
games, with theoretical-bound checks, a mirror-map calculus property suite,
and Langevin-chain diagnostics. The heavy lifting lives in the compiled
extension module; this package re-exports its public surface."""

from ._core import (
    __version__,
    duality_gap,
    fit_rate,
    foundations_report,
    gaussian_chain_check,
    md_update,
    run_config,
    solve_matrix_game,
)

__all__ = [
    "__version__",
    "duality_gap",
    "fit_rate",
    "foundations_report",
    "gaussian_chain_check",
    "md_update",
    "run_config",
    "solve_matrix_game",
]
