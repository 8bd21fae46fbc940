"""Simulation of a free-electron wavepacket crossing a laser field.

Covers free drift, split-step propagation through the field, Wigner
phase-space analysis, first-order closed forms, and regime classification.
"""
__version__ = "0.1.0"

from .physcore import CONSTANTS, DomainError, kinematics_from_beta, photon_scale
from .wavepacket import BeamParams, GridSpec, Wavefunction, analytic_sigma_z, drift, gaussian_waist
from .propagator import LaserField, build_scenario, simulate
from .regimes import classify, phase_diagram

__all__ = [
    "CONSTANTS", "DomainError", "kinematics_from_beta", "photon_scale",
    "BeamParams", "GridSpec", "Wavefunction", "analytic_sigma_z", "drift", "gaussian_waist",
    "LaserField", "build_scenario", "simulate", "classify", "phase_diagram",
]
