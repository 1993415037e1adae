"""Quantum hydrodynamics numerics: Schrodinger and Klein-Gordon solvers,
Madelung decomposition, trajectories, Born-Infeld electrostatics and
coordinate-chart geometry."""

from ._qhydro import *  # noqa: F401,F403
from ._qhydro import ConfigError, DomainError, NumericError, __doc__  # noqa: F401

__version__ = "0.1.0"
