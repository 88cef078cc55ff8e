"""Word-length seminorms, dimension and product entropy on group C*-algebras, at desk scale."""

__version__ = "0.1.0"

from .algebra import AlgebraElement, adjoint, convolve, weighted_l1, weighted_l2
from .automorphisms import Automorphism, eigen_entropy, hyperbolicity_check, lipschitz_constant
from .bounds import BoundPair
from .groups import FreeAbelian, FreeGroup, Semidirect, ball, minus_identity
from .operators import FinVector, compressed_norm_lower, seminorm_sandwich

__all__ = [
    "AlgebraElement",
    "Automorphism",
    "BoundPair",
    "FinVector",
    "FreeAbelian",
    "FreeGroup",
    "Semidirect",
    "adjoint",
    "ball",
    "compressed_norm_lower",
    "convolve",
    "eigen_entropy",
    "hyperbolicity_check",
    "lipschitz_constant",
    "minus_identity",
    "seminorm_sandwich",
    "weighted_l1",
    "weighted_l2",
]
