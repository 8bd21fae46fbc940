"""Closed-form first-order theory of the electron-light interaction.

These expressions are the analytic oracle for the split-step propagator:
coupling strength, detuning, the classical point-particle momentum kick and
its Gaussian suppression for a finite wavepacket, the two-sideband PINEM
spectrum, and the period of the anomalous (drift-induced) fringes.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .physcore import E_CHARGE, HBAR, Kinematics, kinematics_from_beta
from .propagator import LaserField, interaction_time, kinematics_from_p0, potential_amplitude
from .wavepacket import BeamParams, Wavefunction, analytic_sigma_z

UPSILON_MAX = 0.3
_SINC_SERIES = 1e-4


class FirstOrderValidityWarning(UserWarning):
    pass


def sinc(x: float) -> float:
    """Unnormalised sin(x)/x."""
    if abs(x) < _SINC_SERIES:
        x2 = x * x
        return 1.0 - x2 / 6.0 + x2 * x2 / 120.0
    return math.sin(x) / x


def coupling_upsilon(E0: float, L: float, omega: float) -> float:
    return E_CHARGE * E0 * L / (2.0 * HBAR * omega)


def detuning_theta(omega: float, v0: float, q_z: float, L: float) -> float:
    return (omega / v0 - q_z) * L


def point_particle_shift(E0: float, L: float, v0: float, theta_bar: float, phi0: float) -> float:
    """Momentum gained by a classical point electron crossing the field."""
    return -(E_CHARGE * E0 * L / v0) * sinc(theta_bar / 2.0) * math.cos(phi0 + theta_bar / 2.0)


def gamma_factor(sigma_z: float, beta_lambda: float) -> float:
    """Packet length in units of the reduced optical wavelength, 2 pi sigma_z / (beta lambda)."""
    if not (sigma_z > 0 and beta_lambda > 0):
        raise ValueError("sigma_z and beta_lambda must be positive")
    return 2.0 * math.pi * sigma_z / beta_lambda


def expected_shift(dp_point: float, Gamma: float) -> float:
    if Gamma < 0:
        raise ValueError(f"Gamma must be non-negative, got {Gamma!r}")
    return dp_point * math.exp(-0.5 * Gamma * Gamma)


def phase_averaged_shift(dp_mean: float, sigma_phi: float) -> float:
    """First-order mean shift averaged over Gaussian entrance-phase jitter."""
    return dp_mean * math.exp(-0.5 * sigma_phi * sigma_phi)


@dataclass(frozen=True)
class PinemSpectrum:
    p: np.ndarray
    density: np.ndarray
    upsilon: float
    warning: str | None = None


def pinem_spectrum_first_order(
    p: np.ndarray,
    rho0: Callable[[np.ndarray], np.ndarray],
    upsilon: float,
    recoil: float,
) -> PinemSpectrum:
    """Initial density plus the two one-photon sidebands, weights 1-2U^2 and U^2.

    Above ``UPSILON_MAX`` the result is still returned, with a warning attached.
    """
    p = np.asarray(p, dtype=float)
    msg = None
    if upsilon > UPSILON_MAX:
        msg = f"upsilon={upsilon:.3g} exceeds the first-order validity bound {UPSILON_MAX}"
        warnings.warn(msg, FirstOrderValidityWarning, stacklevel=2)
    u2 = upsilon * upsilon
    dens = (1.0 - 2.0 * u2) * rho0(p) + u2 * (rho0(p + recoil) + rho0(p - recoil))
    return PinemSpectrum(p=p, density=dens, upsilon=upsilon, warning=msg)


def gaussian_density(p0: float, sigma_p: float) -> Callable[[np.ndarray], np.ndarray]:
    norm = 1.0 / math.sqrt(2.0 * math.pi * sigma_p**2)
    return lambda p: norm * np.exp(-((np.asarray(p) - p0) ** 2) / (2.0 * sigma_p**2))


@dataclass(frozen=True)
class FringePrediction:
    delta_p: float
    delta_p_far: float
    sigma_z: float
    v0: float

    @property
    def delta_E(self) -> float:
        return self.v0 * self.delta_p

    @property
    def delta_E_far(self) -> float:
        return self.v0 * self.delta_p_far


def apinem_fringe_spacing(beam: BeamParams, kin: Kinematics, beta_lambda: float) -> FringePrediction:
    """Momentum period of the interference fringes of a drift-stretched packet.

    ``delta_p`` is ``sigma_p0 * beta_lambda / sigma_z(t_D)``; ``delta_p_far`` is
    its long-drift limit ``m* v0 beta_lambda / |L_D|`` (infinite without drift).
    """
    sz = analytic_sigma_z(beam.sigma_z0, beam.t_D(kin), kin)
    dp = beam.sigma_p0 * beta_lambda / sz
    far = math.inf if beam.L_D == 0 else kin.m_star * kin.v0 * beta_lambda / abs(beam.L_D)
    return FringePrediction(delta_p=dp, delta_p_far=far, sigma_z=sz, v0=kin.v0)


def spacing_crossover(beam: BeamParams, kin: Kinematics) -> float:
    """beta*lambda at which the sideband spacing 2 pi hbar/(beta lambda) equals the fringe period."""
    sz = analytic_sigma_z(beam.sigma_z0, beam.t_D(kin), kin)
    return math.sqrt(4.0 * math.pi * sz * beam.sigma_z0)


def gaussian_wigner(
    zeta: np.ndarray, p: np.ndarray, beam: BeamParams, kin: Kinematics, t_D: float | None = None
) -> np.ndarray:
    """Unit-normalised Wigner function of the drifted Gaussian on a (zeta, p) mesh.

    ``p`` is the absolute momentum; the free drift shears the waist ellipse
    along ``zeta`` by ``(p - p0) t_D / m*``.
    """
    if t_D is None:
        t_D = beam.t_D(kin)
    Z, P = np.meshgrid(np.asarray(zeta), np.asarray(p) - kin.p0, indexing="ij")
    s_z, s_p = beam.sigma_z0, beam.sigma_p0
    arg = (Z - P * t_D / kin.m_star) ** 2 / (2 * s_z**2) + P**2 / (2 * s_p**2)
    return np.exp(-arg) / (2.0 * math.pi * s_z * s_p)


def first_order_scattered(psi0: Wavefunction, laser: LaserField, kin: Kinematics | None = None) -> Wavefunction:
    """First-order correction psi1 for a transit short enough that the packet does not move.

    ``psi1 = -(i/hbar) * integral V dt * psi0`` with the top-hat window
    integrated in closed form.
    """
    if kin is None:
        kin = kinematics_from_p0(psi0.p0)
    T = interaction_time(laser, kin)
    theta = laser.detuning(kin)
    kick = potential_amplitude(laser, kin) * T / HBAR * sinc(theta / 2.0)
    phase = laser.q_z * psi0.grid.zeta + laser.phi0 - theta / 2.0
    return replace(psi0, samples=-1j * kick * np.sin(phase) * psi0.samples)


@dataclass(frozen=True)
class FirstOrderTheory:
    upsilon: float
    theta_bar: float
    dp_point: float
    Gamma: float
    Gamma0: float
    dp_mean: float
    delta_p_fringe: float
    delta_p_fringe_far: float
    sideband_spacing: float
    v0: float

    @property
    def delta_E_fringe(self) -> float:
        return self.v0 * self.delta_p_fringe

    @property
    def sideband_spacing_E(self) -> float:
        return self.v0 * self.sideband_spacing

    def as_dict(self) -> dict:
        return {
            "upsilon": self.upsilon,
            "theta_bar": self.theta_bar,
            "dp_point": self.dp_point,
            "Gamma": self.Gamma,
            "Gamma0": self.Gamma0,
            "damping": math.exp(-0.5 * self.Gamma**2),
            "dp_mean": self.dp_mean,
            "delta_p_fringe": self.delta_p_fringe,
            "delta_p_fringe_far": self.delta_p_fringe_far,
            "delta_E_fringe": self.delta_E_fringe,
            "sideband_spacing": self.sideband_spacing,
            "sideband_spacing_E": self.sideband_spacing_E,
        }


def first_order_theory(beam: BeamParams, laser: LaserField) -> FirstOrderTheory:
    kin = kinematics_from_beta(beam.beta)
    omega = laser.omega
    beta_lambda = kin.beta * laser.lambda_
    theta = detuning_theta(omega, kin.v0, laser.q_z, laser.L)
    dp_point = point_particle_shift(laser.E0, laser.L, kin.v0, theta, laser.phi0)
    fr = apinem_fringe_spacing(beam, kin, beta_lambda)
    G = gamma_factor(fr.sigma_z, beta_lambda)
    return FirstOrderTheory(
        upsilon=coupling_upsilon(laser.E0, laser.L, omega),
        theta_bar=theta,
        dp_point=dp_point,
        Gamma=G,
        Gamma0=gamma_factor(beam.sigma_z0, beta_lambda),
        dp_mean=expected_shift(dp_point, G),
        delta_p_fringe=fr.delta_p,
        delta_p_fringe_far=fr.delta_p_far,
        sideband_spacing=HBAR * omega / kin.v0,
        v0=kin.v0,
    )
