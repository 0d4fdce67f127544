"""Random matrices with variance profiles and their linear eigenvalue statistics."""

__version__ = "0.1.0"

from varprof.errors import (
    BoundVacuous,
    ConfigError,
    DomainError,
    SizeError,
    StructuralZeroVariance,
)
from varprof.profiles.core import FamilyTag, StdDevProfile
from varprof.entrylaws import EntryLaw, MatrixEnsemble, parse_law
from varprof.simulate import PolynomialSpec, SampleBatch

__all__ = [
    "BoundVacuous",
    "ConfigError",
    "DomainError",
    "EntryLaw",
    "FamilyTag",
    "MatrixEnsemble",
    "PolynomialSpec",
    "SampleBatch",
    "SizeError",
    "StdDevProfile",
    "StructuralZeroVariance",
    "parse_law",
]
