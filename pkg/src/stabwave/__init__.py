"""Accelerated fixed-point solvers for traveling wave profiles.

The package discretizes wave equations of the form L u = N(u) on periodic
Fourier grids and solves them with stabilized fixed-point iteration, with
optional vector extrapolation or windowed mixing acceleration, plus spectral
diagnostics of the iteration maps.
"""

from .anderson import AndersonConfig
from .errors import (
    Breakdown,
    ConfigError,
    DegenerateDenominator,
    IllConditioned,
    IncompatibleKind,
    NegativeBaseFractionalPower,
    NoConvergence,
    SingularBlock,
    SingularOperator,
    SingularSymbol,
    StabwaveError,
)
from .extrap import VemConfig, extrapolate
from .iterate import IterationTrace, StoppingConfig, TraceRow, run
from .models import (
    BenjaminParams,
    BoussinesqParams,
    HomogeneousPart,
    Model,
    benjamin_1d,
    benjamin_2d,
    boussinesq_constants,
    boussinesq_periodic,
    boussinesq_solitary,
    gnls_ground_state,
    initial_guess,
    nls_ground_state,
    power,
)
from .spectral import Grid1D, Grid2D
from .spectrum import (
    SpectrumReport,
    classical_map,
    leading_eigs,
    petviashvili_map,
)

__version__ = "0.1.0"

__all__ = [
    "StabwaveError",
    "SingularBlock",
    "SingularOperator",
    "SingularSymbol",
    "IncompatibleKind",
    "DegenerateDenominator",
    "NegativeBaseFractionalPower",
    "Breakdown",
    "IllConditioned",
    "NoConvergence",
    "ConfigError",
    "Grid1D",
    "Grid2D",
    "Model",
    "HomogeneousPart",
    "BoussinesqParams",
    "BenjaminParams",
    "boussinesq_solitary",
    "boussinesq_periodic",
    "boussinesq_constants",
    "nls_ground_state",
    "gnls_ground_state",
    "benjamin_1d",
    "benjamin_2d",
    "initial_guess",
    "power",
    "run",
    "StoppingConfig",
    "IterationTrace",
    "TraceRow",
    "VemConfig",
    "extrapolate",
    "AndersonConfig",
    "classical_map",
    "petviashvili_map",
    "leading_eigs",
    "SpectrumReport",
    "__version__",
]
