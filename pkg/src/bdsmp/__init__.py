"""Laurent asymptotics for perturbed birth-death semi-Markov models.

The package computes arbitrary-length perturbation expansions of
stationary and conditional quasi-stationary distributions for
birth-death-type semi-Markov processes whose intensities depend linearly
on a small parameter, validates them against exact evaluation and Monte
Carlo simulation, and reproduces the reference parameterizations from
population dynamics, epidemiology, and population genetics.
"""

__version__ = "0.1.0"

from . import errors  # noqa: F401
from .builders import (  # noqa: F401
    MoranParams,
    PopDynParams,
    SISParams,
    moran_model,
    population_dynamics_model,
    preset,
    sis_model,
)
from .distributions import (  # noqa: F401
    conditional_quasi_stationary_expansion,
    limiting_conditional_quasi_stationary,
    limiting_stationary,
    quasi_exact,
    stationary_exact,
    stationary_expansion,
)
from .figures import figure_tables, reproduce_tables  # noqa: F401
from .laurent import (  # noqa: F401
    LaurentExpansion,
    balanced_divide,
    constant,
    divide,
    expansion,
    multiply,
)
from .model import (  # noqa: F401
    BirthDeathSMP,
    IntensityModel,
    evaluate_at,
    from_expansions,
    from_linear_intensities,
)
from .simulate import hitting_estimate, simulate_path  # noqa: F401
