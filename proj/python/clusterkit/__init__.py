"""Mayer-graph density series, Ornstein-Zernike checks and the Percus-Yevick closure."""

from ._core import (  # noqa: F401
    ConfigError,
    ConvergenceError,
    DivergenceError,
    DomainError,
    McConfig,
    NumericalError,
    PairPotential,
    SizeLimitError,
    __version__,
    c2_coefficient,
    cancellation_sum,
    census_identity,
    count,
    dissymmetry_exact_hard_rod,
    enumerate,
    h_coefficient,
    oz_solve_h,
    py_solve,
    run_cli,
    virial_beta,
)
