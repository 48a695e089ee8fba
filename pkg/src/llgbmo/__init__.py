"""Landau--Lifshitz--Gilbert flows through their stereographic (dissipative Schrödinger) form.

Submodules: ``semigroup``, ``stereo``, ``norms``, ``selfsim``, ``dnls_solver``,
``hasimoto`` and ``cli``.
"""
from .errors import (BlowUpError, BracketError, ConfigError, CoverageError, DomainError,
                     InputError, IntegrationError, LLGError, PoleProximityError,
                     UnsupportedError)
from .semigroup import ComplexField, GLParams, Grid
from .stereo import SpinField

__all__ = [
    "BlowUpError", "BracketError", "ComplexField", "ConfigError", "CoverageError",
    "DomainError", "GLParams", "Grid", "InputError", "IntegrationError", "LLGError",
    "PoleProximityError", "SpinField", "UnsupportedError",
]
__version__ = "0.1.0"
