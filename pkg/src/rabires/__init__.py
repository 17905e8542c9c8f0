"""Dressed levels and vibronic Rabi resonances of a laser-driven trapped ion."""
from rabires.basis import HARDWALL, HARMONIC, DriveParams, InternalState, ProductBasis, TrapKind, TrapModel
from rabires.errors import DomainError, NumericalError

__all__ = [
    "HARDWALL",
    "HARMONIC",
    "DomainError",
    "DriveParams",
    "InternalState",
    "NumericalError",
    "ProductBasis",
    "TrapKind",
    "TrapModel",
]

__version__ = "0.1.0"
