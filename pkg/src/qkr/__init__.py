"""Squeezed states of Gaussian wave packets in the quantum kicked rotator."""
from .core import (
    CumulantSet,
    DomainError,
    GaussianSpec,
    Grid,
    QKRError,
    QuantumState,
    ResolutionError,
    SimParams,
    Window,
    derive_params,
    discrete_norm,
    gaussian_packet,
)

__version__ = "0.1.0"
