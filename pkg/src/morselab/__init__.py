"""Finite-scale experiments on Morse strata of Cayley graphs.

Balls of Cayley graphs for free, free abelian, right-angled Artin and
small-cancellation groups; empirical Morse gauges and the strata they
define; hyperbolicity, boundary and dimension probes on those strata;
hyperplanes and contact graphs for RAAGs; piece certification for
classical and graphical small-cancellation presentations.
"""

from morselab.cayley import BallGraph, build_ball, distance, geodesics_between, sphere
from morselab.errors import (
    CapExceededError,
    GuardError,
    InputError,
    MorselabError,
    UntrustedPairError,
)
from morselab.labelled import LabelledGraph
from morselab.morse import (
    GaugeSchedule,
    GaugeTable,
    build_stratum,
    empirical_gauge,
    enumerate_quasigeodesics,
)
from morselab.presentations import GroupSpec, load_spec, parse_spec

__version__ = "0.1.0"

__all__ = [
    "BallGraph",
    "CapExceededError",
    "GaugeSchedule",
    "GaugeTable",
    "GroupSpec",
    "GuardError",
    "InputError",
    "LabelledGraph",
    "MorselabError",
    "UntrustedPairError",
    "__version__",
    "build_ball",
    "build_stratum",
    "distance",
    "empirical_gauge",
    "enumerate_quasigeodesics",
    "geodesics_between",
    "load_spec",
    "parse_spec",
    "sphere",
]
