"""Exact homological calculator for finite-dimensional quiver algebras."""

from .algebra import Algebra, Binomial, Monomial, build_algebra
from .fields import FieldSpec, GF, QQ, make_field
from .quiver import Path, Quiver, compose_paths, enumerate_paths

__all__ = [
    "Algebra",
    "Binomial",
    "Monomial",
    "build_algebra",
    "FieldSpec",
    "GF",
    "QQ",
    "make_field",
    "Path",
    "Quiver",
    "compose_paths",
    "enumerate_paths",
]

__version__ = "0.1.0"
