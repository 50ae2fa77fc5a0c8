"""p-adic circles, Bruhat-Tits trees and Schottky groups over Q_p(w), w^2 = c.

Exact truncated digit arithmetic throughout; limit-set questions are answered
only at finite depth and labeled as such.
"""
from .bttree import HalfTree, Vertex, act, distance, vertex_literal
from .errors import PadicCirclesError, PrecisionExhausted
from .literals import parse_matrix, parse_scalar
from .orbits import Circle, circle_limit_census, classify_orbit, thickness_sample
from .padic import ExtContext, ExtScalar, PadicScalar, density_check, polar_decompose
from .pgl2 import BoundaryPoint, ProjMatrix, canonicalize, classify, mobius
from .schottky import SchottkyGroup, core_graph, high_branched_check, verify_schottky

__version__ = "0.1.0"

__all__ = [
    "BoundaryPoint", "Circle", "ExtContext", "ExtScalar", "HalfTree", "PadicCirclesError", "PadicScalar",
    "PrecisionExhausted", "ProjMatrix", "SchottkyGroup", "Vertex", "act", "canonicalize", "circle_limit_census",
    "classify", "classify_orbit", "core_graph", "density_check", "distance", "high_branched_check", "mobius",
    "parse_matrix", "parse_scalar", "polar_decompose", "thickness_sample", "verify_schottky", "vertex_literal",
]
