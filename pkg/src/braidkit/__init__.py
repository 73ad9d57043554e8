"""braidkit: exact symbolic engine for braided linear spaces and their q-Poincare
representations."""

from braidkit.braided_space import NormalElement, degree_basis, multiply, normal_form, parse_element
from braidkit.models import ModelSpec, UnknownModel, build_model, load_model, model_names
from braidkit.rmatrix import RMatrix, hecke_check, qybe_residual, theta_matrices
from braidkit.scalars import (
    DivisionByZero,
    PoleAtSpecialization,
    QScalar,
    conjugate,
    normalize,
    parse_qscalar,
    q,
    specialize,
)

__version__ = "0.1.0"

__all__ = [
    "DivisionByZero",
    "ModelSpec",
    "NormalElement",
    "PoleAtSpecialization",
    "QScalar",
    "RMatrix",
    "UnknownModel",
    "build_model",
    "conjugate",
    "degree_basis",
    "hecke_check",
    "load_model",
    "model_names",
    "multiply",
    "normal_form",
    "normalize",
    "parse_element",
    "parse_qscalar",
    "q",
    "qybe_residual",
    "specialize",
    "theta_matrices",
]
