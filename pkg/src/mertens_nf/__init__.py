"""Mertens' third theorem over real quadratic fields: sieving, explicit formulas
and the logarithmic density of the bias set."""

from .fields import (
    EULER_GAMMA,
    FieldInvariants,
    QuadraticField,
    RationalField,
    class_number,
    dirichlet_L1,
    field_invariants,
    fundamental_unit,
    regulator,
    residue_kappa,
)

__version__ = "0.1.0"

__all__ = [
    "EULER_GAMMA",
    "FieldInvariants",
    "QuadraticField",
    "RationalField",
    "class_number",
    "dirichlet_L1",
    "field_invariants",
    "fundamental_unit",
    "regulator",
    "residue_kappa",
]
