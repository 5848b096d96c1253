"""Exact realization theory and simulation for Levy-driven linear state
space models.

The package splits into four layers:

* :mod:`carmakit.exactalg` -- rational scalars, polynomials, polynomial and
  rational-function matrices, and the fraction-free resolvent computation
  everything else is built on.
* :mod:`carmakit.realization` -- transfer functions, observer and controller
  canonical forms, matrix fraction descriptions, and exact equivalence.
* :mod:`carmakit.simulate` -- seeded path simulation (exact Gaussian step,
  shared-increment Euler, compound Poisson), stationary second-order
  statistics and spectral densities.
* :mod:`carmakit.cli` -- the ``carmakit`` command-line tool and its JSON/CSV
  file formats.
"""

from .errors import (
    CarmakitError,
    DegenerateTransferFunction,
    DimensionMismatch,
    ModelFileError,
    NotStrictlyProper,
    PoleOnEvaluationAxis,
    UnstableModel,
    ZeroTransferFunction,
)
from .exactalg import (
    Poly,
    PolyMatrix,
    Rational,
    RationalFunction,
    RationalMatrix,
    TransferFunction,
    format_rational,
    parse_rational,
    poly_gcd,
    poly_lcm,
    ratmat_equal,
    ratmat_reduce,
    resolvent_numerator,
)
from .realization import (
    ControllerRealization,
    McarmaSpec,
    MfdPair,
    ObserverRealization,
    StateSpaceModel,
    assemble_observer_ss,
    beta_from_mcarma,
    controller_realization,
    left_mfd,
    observer_realization,
    q_and_Q_from_beta,
    right_mfd,
    strictly_proper,
    tf_equivalent,
    transfer_function,
)
from .simulate import (
    FixedAtomJumps,
    GaussianJumps,
    LevyDriverSpec,
    SamplePath,
    SimulationConfig,
    draw_compound_poisson_jumps,
    empirical_autocov,
    gaussian_step_params,
    simulate_brownian,
    simulate_compound_poisson,
    simulate_compound_poisson_pair,
    simulate_shared_brownian_pair,
    spectral_density,
    stability_check,
    stationary_covariance,
    theoretical_autocov,
)

__all__ = [
    "CarmakitError",
    "DegenerateTransferFunction",
    "DimensionMismatch",
    "ModelFileError",
    "NotStrictlyProper",
    "PoleOnEvaluationAxis",
    "UnstableModel",
    "ZeroTransferFunction",
    "Poly",
    "PolyMatrix",
    "Rational",
    "RationalFunction",
    "RationalMatrix",
    "TransferFunction",
    "format_rational",
    "parse_rational",
    "poly_gcd",
    "poly_lcm",
    "ratmat_equal",
    "ratmat_reduce",
    "resolvent_numerator",
    "ControllerRealization",
    "McarmaSpec",
    "MfdPair",
    "ObserverRealization",
    "StateSpaceModel",
    "assemble_observer_ss",
    "beta_from_mcarma",
    "controller_realization",
    "left_mfd",
    "observer_realization",
    "q_and_Q_from_beta",
    "right_mfd",
    "strictly_proper",
    "tf_equivalent",
    "transfer_function",
    "FixedAtomJumps",
    "GaussianJumps",
    "LevyDriverSpec",
    "SamplePath",
    "SimulationConfig",
    "draw_compound_poisson_jumps",
    "empirical_autocov",
    "gaussian_step_params",
    "simulate_brownian",
    "simulate_compound_poisson",
    "simulate_compound_poisson_pair",
    "simulate_shared_brownian_pair",
    "spectral_density",
    "stability_check",
    "stationary_covariance",
    "theoretical_autocov",
]

__version__ = "0.1.0"
