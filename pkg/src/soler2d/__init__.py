"""Pseudo-spectral simulation and verification toolkit for the 2D cubic Dirac (Soler) equation."""

from .clifford import GAMMA, GammaRep, build_gamma_rep, nonlinearity, soler_density
from .errors import (BlowUpError, ConfigError, CoverageError, DomainError, Soler2DError,
                     SupportViolation)
from .evolve import History, StepperConfig, evolve_companion, evolve_to, strang_step
from .grid import T0, Grid, ScalarSpinorPair, SpinorField, make_initial_data, sobolev_norm
from .propagator import DiracGroup, propagate_dirac, propagate_wave

__version__ = "0.1.0"
