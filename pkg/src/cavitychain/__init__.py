"""Ground-state solvers for spin chains coupled to a single cavity mode."""

from .models import (
    ModelPreset,
    ModelSpec,
    dicke_critical_coupling,
    effective_single_coupling,
    ising_boundary,
    ising_critical_exchange,
)
from .photon import PhotonFrame, DressingFactors, dressing, moments
from .effective import EffectiveCouplings, SpinSums, build_couplings, frame_equality_check

__all__ = [
    "ModelPreset",
    "ModelSpec",
    "PhotonFrame",
    "DressingFactors",
    "EffectiveCouplings",
    "SpinSums",
    "build_couplings",
    "dicke_critical_coupling",
    "dressing",
    "effective_single_coupling",
    "frame_equality_check",
    "ising_boundary",
    "ising_critical_exchange",
    "moments",
]

__version__ = "0.1.0"
