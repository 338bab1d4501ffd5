"""Quasigeostrophic flow on the sphere with contact-geometric verification tools."""

from .spharm import (
    SphField,
    SphGrid,
    analyze,
    grid_for,
    helmholtz_invert,
    jacobian_bracket,
    laplacian,
    num_coeffs,
    sph_index,
    synthesize,
)

__version__ = "0.1.0"

__all__ = [
    "SphField",
    "SphGrid",
    "analyze",
    "grid_for",
    "helmholtz_invert",
    "jacobian_bracket",
    "laplacian",
    "num_coeffs",
    "sph_index",
    "synthesize",
    "__version__",
]
