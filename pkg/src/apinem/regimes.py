"""Acceleration / PINEM / APINEM classification and the (sigma_z0, L_D) phase diagram."""
from __future__ import annotations

import math
from dataclasses import dataclass

import contourpy
import numpy as np

from .perturbation import apinem_fringe_spacing, gamma_factor
from .physcore import C, HBAR, kinematics_from_beta
from .wavepacket import BeamParams, analytic_sigma_z

SQRT2 = math.sqrt(2.0)
ACCELERATION = "Acceleration"
PINEM = "PINEM"
APINEM = "APINEM"
LABELS = (ACCELERATION, PINEM, APINEM)
LABEL_CODES = {ACCELERATION: 0, PINEM: 1, APINEM: 2}


@dataclass(frozen=True)
class RegimeReport:
    Gamma0: float
    Gamma: float
    damping: float
    label: str
    predicted_spectral_period: float | None

    def as_dict(self) -> dict:
        return {
            "Gamma0": self.Gamma0,
            "Gamma": self.Gamma,
            "damping": self.damping,
            "label": self.label,
            "predicted_spectral_period": self.predicted_spectral_period,
        }


def label_for(Gamma0, Gamma):
    """Vectorised labelling; ties at sqrt(2) go to the quantum side."""
    G0 = np.asarray(Gamma0)
    G = np.asarray(Gamma)
    codes = np.where(G0 >= SQRT2, 1, np.where(G >= SQRT2, 2, 0))
    return codes


def classify(beam: BeamParams, lambda_: float) -> RegimeReport:
    kin = kinematics_from_beta(beam.beta)
    beta_lambda = kin.beta * lambda_
    sz = analytic_sigma_z(beam.sigma_z0, beam.t_D(kin), kin)
    G0 = gamma_factor(beam.sigma_z0, beta_lambda)
    G = gamma_factor(sz, beta_lambda)
    label = LABELS[int(label_for(G0, G))]
    if label == PINEM:
        period = 2.0 * math.pi * HBAR / beta_lambda
    elif label == APINEM:
        period = apinem_fringe_spacing(beam, kin, beta_lambda).delta_p
    else:
        period = None
    return RegimeReport(
        Gamma0=G0, Gamma=G, damping=math.exp(-0.5 * G * G), label=label,
        predicted_spectral_period=period,
    )


def point_particle_threshold(beta_lambda: float) -> float:
    """Packet length at which Gamma = sqrt(2): beta*lambda / (sqrt(2) pi)."""
    return beta_lambda / (SQRT2 * math.pi)


@dataclass(frozen=True)
class PhaseDiagram:
    sigma_z0_axis: np.ndarray
    L_D_axis: np.ndarray
    damping_grid: np.ndarray
    label_grid: np.ndarray
    gamma_grid: np.ndarray
    gamma0_axis: np.ndarray
    boundary_contours: dict[str, list[np.ndarray]]
    beta: float
    lambda_: float

    def labels(self) -> np.ndarray:
        return np.array(LABELS, dtype=object)[self.label_grid]


def phase_diagram(
    sigma_range: tuple[float, float] = (0.01e-6, 1e-6),
    L_D_range: tuple[float, float] = (-1.0, 1.0),
    resolution: tuple[int, int] = (256, 257),
    beta: float = 0.7,
    lambda_: float = 0.8e-6,
) -> PhaseDiagram:
    """Gaussian damping exp(-Gamma^2/2) over log-spaced sigma_z0 and linear L_D.

    Grids are indexed ``[i_sigma, i_L]``. Contours are polylines of
    (sigma_z0, L_D) points.
    """
    n_s, n_l = (int(r) for r in resolution)
    if n_s < 1 or n_l < 1:
        raise ValueError("resolution must be at least 1 per axis")
    if not 0 < sigma_range[0] <= sigma_range[1]:
        raise ValueError("sigma_z0 range must be positive and ordered")
    if not L_D_range[0] <= L_D_range[1]:
        raise ValueError("L_D range must be ordered")
    if (n_s > 1 and sigma_range[0] == sigma_range[1]) or (n_l > 1 and L_D_range[0] == L_D_range[1]):
        raise ValueError("a zero-width range needs resolution 1 on that axis")
    kin = kinematics_from_beta(beta)
    beta_lambda = beta * lambda_
    s_axis = np.geomspace(sigma_range[0], sigma_range[1], n_s)
    l_axis = np.linspace(L_D_range[0], L_D_range[1], n_l)
    S, Ld = np.meshgrid(s_axis, l_axis, indexing="ij")
    spread = kin.lambda_C_star * C * (Ld / kin.v0) / (4.0 * math.pi * S)
    sz = np.hypot(S, spread)
    G = 2.0 * math.pi * sz / beta_lambda
    G0 = 2.0 * math.pi * s_axis / beta_lambda
    labels = label_for(G0[:, None], G)

    curves = []
    if n_s > 1 and n_l > 1:
        # contour in (log sigma, L_D) where the grid is uniform
        gen = contourpy.contour_generator(x=l_axis, y=np.log(s_axis), z=G * G, name="serial")
        curves = [np.column_stack([np.exp(c[:, 1]), c[:, 0]]) for c in gen.lines(2.0)]
    s_c = point_particle_threshold(beta_lambda)
    vertical = []
    if sigma_range[0] <= s_c <= sigma_range[1]:
        vertical = [np.array([[s_c, L_D_range[0]], [s_c, L_D_range[1]]])]
    return PhaseDiagram(
        sigma_z0_axis=s_axis,
        L_D_axis=l_axis,
        damping_grid=np.exp(-0.5 * G * G),
        label_grid=labels,
        gamma_grid=G,
        gamma0_axis=G0,
        boundary_contours={"gamma_sqrt2": curves, "gamma0_sqrt2": vertical},
        beta=beta,
        lambda_=lambda_,
    )


def acceleration_boundary(sigma_z0: np.ndarray, beta: float, lambda_: float) -> np.ndarray:
    """|L_D| on the Gamma = sqrt(2) border for each waist (NaN above the threshold)."""
    kin = kinematics_from_beta(beta)
    s_c = point_particle_threshold(beta * lambda_)
    s = np.asarray(sigma_z0, dtype=float)
    with np.errstate(invalid="ignore"):
        spread = np.sqrt(s_c**2 - s**2)
    t = spread * 4.0 * math.pi * s / (kin.lambda_C_star * C)
    return np.where(s < s_c, t * kin.v0, np.nan)
