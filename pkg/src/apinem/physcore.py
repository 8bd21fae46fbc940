"""Physical constants and 1-D longitudinal relativistic kinematics.

Everything is SI. Unit conversion for human-facing input happens in
:mod:`apinem.config`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

# CODATA 2018 (exact where the SI defines them)
C = 299_792_458.0
M_E = 9.1093837015e-31
E_CHARGE = 1.602176634e-19
H = 6.62607015e-34
HBAR = H / (2.0 * math.pi)
EV = E_CHARGE


@dataclass(frozen=True)
class Constants:
    c: float = C
    m_e: float = M_E
    e: float = E_CHARGE
    hbar: float = HBAR

    @property
    def h(self) -> float:
        return 2.0 * math.pi * self.hbar

    @property
    def lambda_C(self) -> float:
        """Compton wavelength h / (m_e c)."""
        return self.h / (self.m_e * self.c)


CONSTANTS = Constants()
LAMBDA_C = CONSTANTS.lambda_C


class DomainError(ValueError):
    """A physical parameter lies outside its admissible range."""


@dataclass(frozen=True)
class Kinematics:
    """Entrance kinematics of the electron.

    ``m_star = gamma**3 * m_e`` is the longitudinal effective mass that sets
    the quadratic term of the energy dispersion around the carrier momentum.
    """

    beta: float
    gamma: float
    v0: float
    p0: float
    m_star: float
    lambda_C_star: float


def kinematics_from_beta(beta: float) -> Kinematics:
    if not (0.0 < beta < 1.0) or not math.isfinite(beta):
        raise DomainError(f"beta must lie in the open interval (0, 1), got {beta!r}")
    gamma = 1.0 / math.sqrt((1.0 - beta) * (1.0 + beta))
    v0 = beta * C
    g3 = gamma**3
    return Kinematics(
        beta=beta,
        gamma=gamma,
        v0=v0,
        p0=gamma * M_E * v0,
        m_star=g3 * M_E,
        lambda_C_star=LAMBDA_C / g3,
    )


@dataclass(frozen=True)
class PhotonScale:
    lambda_: float
    omega: float
    T: float
    hbar_omega: float
    recoil: float
    beta_lambda: float

    @property
    def hbar_omega_eV(self) -> float:
        return self.hbar_omega / EV


def photon_scale(lambda_: float, kin: Kinematics) -> PhotonScale:
    """Photon energy, optical period and recoil momentum for wavelength ``lambda_``."""
    if not (lambda_ > 0.0) or not math.isfinite(lambda_):
        raise DomainError(f"wavelength must be positive and finite, got {lambda_!r}")
    omega = 2.0 * math.pi * C / lambda_
    hbar_omega = HBAR * omega
    return PhotonScale(
        lambda_=lambda_,
        omega=omega,
        T=2.0 * math.pi / omega,
        hbar_omega=hbar_omega,
        recoil=hbar_omega / kin.v0,
        beta_lambda=kin.beta * lambda_,
    )


def wavelength_from_beta_lambda(beta_lambda: float, beta: float) -> float:
    return beta_lambda / beta
