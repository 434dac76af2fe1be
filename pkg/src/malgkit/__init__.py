"""Exact computations in the measure algebra of [0,1) and related structures."""

from .malg import Iet, MalformedInput, MSet, apply, compose, dist, invert, measure, parse_iet, parse_mset
from .qftypes import TypeVector, orbit_distance, qf_type, realize

__all__ = ["Iet", "MalformedInput", "MSet", "apply", "compose", "dist", "invert", "measure",
           "parse_iet", "parse_mset", "TypeVector", "orbit_distance", "qf_type", "realize"]
__version__ = "0.1.0"
