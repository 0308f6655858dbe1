"""Numerical laboratory for the Painleve equations I, II and IV.

Pole-field integration in the complex plane, Laurent and asymptotic series,
Riccati-type special solutions, Backlund transformations, re-scaling limits
and pole-field statistics.
"""
from .eqcore import EquationSpec, Jet, first_integral, ode_residual
from .errors import PainleveError
from .kernels import backend_name
from .localseries import (AsymptoticFamily, PoleSeed, asymptotic_series, asymptotic_series_W,
                          laurent_W, laurent_w)

__version__ = "0.1.0"

__all__ = ["EquationSpec", "Jet", "first_integral", "ode_residual", "PainleveError",
           "backend_name", "AsymptoticFamily", "PoleSeed", "asymptotic_series",
           "asymptotic_series_W", "laurent_W", "laurent_w", "__version__"]
