"""Spectral toolkit for Benjamin-Ono type equations on the torus."""

__version__ = "0.1.0"

from .errors import *  # noqa: E402,F401,F403
from .spectral import TorusField, AnalyticField, SobolevRegularity  # noqa: E402,F401
from .multipliers import MultiplierSymbol  # noqa: E402,F401
from .gauge import GaugeParams  # noqa: E402,F401
from .evolution import SolverConfig, Trajectory, evolve  # noqa: E402,F401
from .lax import beta, beta_s, build_lax, dbeta  # noqa: E402,F401
from .birkhoff import ActionSequence, BirkhoffState  # noqa: E402,F401
