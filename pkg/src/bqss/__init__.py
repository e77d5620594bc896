"""Spectral stability laboratory for rotating stratified Couette flow."""

from .frame import Frequency, Lattice, PhysParams

__all__ = ["PhysParams", "Lattice", "Frequency"]
__version__ = "0.1.0"
