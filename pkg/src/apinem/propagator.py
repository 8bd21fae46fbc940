"""Split-step solution of the electron-near-field Schroedinger equation.

The grating near field enters through its synchronous space harmonic.
With the gradient in the interaction Hamiltonian replaced by its carrier
value ``i p0 / hbar`` the coupling reduces to a real scalar potential in the
comoving frame,

    V(zeta, t) = (e v0 E0 / omega) * sin(q_z zeta + (q_z v0 - omega) t + phi0),

switched on for the transit time ``L / v0``. Its force is
``-e E0 (v0 q_z / omega) cos(...)``, which reproduces the classical
point-particle energy exchange.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
import scipy.fft as sfft

from .physcore import C, E_CHARGE, HBAR, M_E, Kinematics, kinematics_from_beta
from .wavepacket import (
    BeamParams,
    GridSpec,
    Wavefunction,
    analytic_sigma_z,
    check_aliasing,
    default_grid,
    drift,
    gaussian_waist,
    kinetic_phase,
)

DEFAULT_L = 30e-6
DEFAULT_STEPS_PER_PERIOD = 256
MIN_STEPS_PER_PERIOD = 64


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class LaserField:
    lambda_: float
    E0: float
    q_z: float
    L: float = DEFAULT_L
    phi0: float = 0.0
    envelope: str = "top-hat"

    def __post_init__(self):
        errs = []
        if not self.lambda_ > 0:
            errs.append(f"lambda must be positive, got {self.lambda_!r}")
        if not self.E0 >= 0:
            errs.append(f"E0 must be non-negative, got {self.E0!r}")
        if not self.q_z > 0:
            errs.append(f"q_z must be positive, got {self.q_z!r}")
        if not self.L > 0:
            errs.append(f"L must be positive, got {self.L!r}")
        if self.envelope != "top-hat":
            errs.append(f"unsupported envelope {self.envelope!r}")
        if errs:
            raise ScenarioError("; ".join(errs))

    @property
    def omega(self) -> float:
        return 2.0 * math.pi * C / self.lambda_

    @property
    def period(self) -> float:
        return self.lambda_ / C

    @property
    def spatial_period(self) -> float:
        return 2.0 * math.pi / self.q_z

    @classmethod
    def synchronous(
        cls,
        lambda_: float,
        kin: Kinematics,
        E0: float,
        L: float = DEFAULT_L,
        phi0: float = 0.0,
        theta_bar: float = 0.0,
    ) -> LaserField:
        """Field whose harmonic satisfies ``(omega/v0 - q_z) L = theta_bar``."""
        omega = 2.0 * math.pi * C / lambda_
        return cls(lambda_=lambda_, E0=E0, q_z=omega / kin.v0 - theta_bar / L, L=L, phi0=phi0)

    def with_upsilon(self, upsilon: float) -> LaserField:
        return replace(self, E0=field_for_upsilon(upsilon, self.L, self.omega))

    def detuning(self, kin: Kinematics) -> float:
        return (self.omega / kin.v0 - self.q_z) * self.L


def field_for_upsilon(upsilon: float, L: float, omega: float) -> float:
    """Inverse of ``upsilon = e E0 L / (2 hbar omega)``."""
    return 2.0 * upsilon * HBAR * omega / (E_CHARGE * L)


def kinematics_from_p0(p0: float) -> Kinematics:
    x = p0 / (M_E * C)
    return kinematics_from_beta(x / math.sqrt(1.0 + x * x))


def interaction_time(laser: LaserField, kin: Kinematics) -> float:
    return laser.L / kin.v0


def potential_amplitude(laser: LaserField, kin: Kinematics) -> float:
    return E_CHARGE * kin.v0 * laser.E0 / laser.omega


def effective_potential(laser: LaserField, kin: Kinematics, zeta: np.ndarray, t: float) -> np.ndarray:
    zeta = np.asarray(zeta, dtype=float)
    if not 0.0 <= t <= interaction_time(laser, kin) or laser.E0 == 0.0:
        return np.zeros_like(zeta)
    phase = laser.q_z * zeta + (laser.q_z * kin.v0 - laser.omega) * t + laser.phi0
    return potential_amplitude(laser, kin) * np.sin(phase)


def step(
    psi: Wavefunction,
    laser: LaserField,
    t: float,
    dt: float,
    kin: Kinematics | None = None,
    check: bool = True,
) -> Wavefunction:
    """One Strang step: half kinetic, potential at mid-step time, half kinetic."""
    if kin is None:
        kin = kinematics_from_p0(psi.p0)
    half = kinetic_phase(psi.grid, kin, 0.5 * dt)
    phi = sfft.fft(psi.samples) * half
    v = effective_potential(laser, kin, psi.grid.zeta, t + 0.5 * dt)
    out = sfft.ifft(sfft.fft(sfft.ifft(phi) * np.exp(-1j * v * (dt / HBAR))) * half)
    res = replace(psi, samples=out, t_elapsed=psi.t_elapsed + dt)
    if check:
        check_aliasing(res)
    return res


@dataclass(frozen=True)
class Scenario:
    beam: BeamParams
    laser: LaserField
    grid: GridSpec
    dt: float
    snapshots: tuple[float, ...] = ()

    def __post_init__(self):
        if not self.dt > 0:
            raise ScenarioError(f"dt must be positive, got {self.dt!r}")
        limit = self.laser.period / MIN_STEPS_PER_PERIOD
        if self.dt > limit * (1 + 1e-12):
            raise ScenarioError(f"dt={self.dt:.4g} s exceeds T/{MIN_STEPS_PER_PERIOD}={limit:.4g} s")

    @property
    def kin(self) -> Kinematics:
        return kinematics_from_beta(self.beam.beta)


def build_scenario(
    beam: BeamParams,
    laser: LaserField,
    grid: GridSpec | None = None,
    dt: float | None = None,
    steps_per_period: int = DEFAULT_STEPS_PER_PERIOD,
    snapshots: Sequence[float] = (),
) -> Scenario:
    kin = kinematics_from_beta(beam.beta)
    if grid is None:
        sz = analytic_sigma_z(beam.sigma_z0, beam.t_D(kin), kin)
        grid = default_grid(sz, beam.sigma_z0, kin.beta * laser.lambda_, laser.spatial_period)
    if dt is None:
        dt = laser.period / steps_per_period
    return Scenario(beam=beam, laser=laser, grid=grid, dt=dt, snapshots=tuple(snapshots))


def prepare(scenario: Scenario) -> Wavefunction:
    """Waist Gaussian carried through the pre-interaction drift ``L_D``."""
    kin = scenario.kin
    psi = gaussian_waist(scenario.beam, scenario.grid, p0=kin.p0)
    psi = drift(psi, scenario.beam.t_D(kin), kin)
    # interaction clock starts at the entrance
    return replace(psi, t_elapsed=0.0)


@dataclass
class RunResult:
    final: Wavefunction
    snapshots: dict[float, Wavefunction] = field(default_factory=dict)
    n_steps: int = 0
    dt: float = 0.0


def run_interaction(psi: Wavefunction, scenario: Scenario, check: bool = True) -> RunResult:
    """Evolve ``psi`` across the interaction window ``[0, L/v0]``.

    Adjacent half kinetic steps are fused into one full step; the state is
    identical to repeated :func:`step` calls up to rounding.
    """
    kin = scenario.kin
    laser = scenario.laser
    T_int = interaction_time(laser, kin)
    n = max(1, math.ceil(T_int / scenario.dt - 1e-9))
    dt = T_int / n
    snap_steps = {}
    for ts in scenario.snapshots:
        if not 0.0 <= ts <= T_int * (1 + 1e-12):
            raise ScenarioError(f"snapshot time {ts:.4g} s outside [0, {T_int:.4g}] s")
        snap_steps.setdefault(int(round(ts / dt)), ts)

    snaps: dict[float, Wavefunction] = {}
    t0 = psi.t_elapsed
    if 0 in snap_steps:
        snaps[snap_steps[0]] = replace(psi, samples=psi.samples.copy())

    half = kinetic_phase(psi.grid, kin, 0.5 * dt)
    full = half * half
    eiq = np.exp(1j * laser.q_z * psi.grid.zeta)
    amp = potential_amplitude(laser, kin) * dt / HBAR
    rate = laser.q_z * kin.v0 - laser.omega

    static = None
    if amp != 0.0 and abs(rate) * T_int < 1e-12:
        # synchronous harmonic: the potential is frozen in the comoving frame
        static = np.exp(-1j * amp * (eiq * np.exp(1j * laser.phi0)).imag)

    phi = sfft.fft(psi.samples) * half
    for k in range(n):
        x = sfft.ifft(phi, overwrite_x=True)
        if static is not None:
            x *= static
        elif amp != 0.0:
            tm = (k + 0.5) * dt
            x *= np.exp(-1j * amp * (eiq * np.exp(1j * (rate * tm + laser.phi0))).imag)
        phi = sfft.fft(x, overwrite_x=True)
        if k == n - 1:
            phi *= half
        elif (k + 1) in snap_steps:
            phi *= half
            snaps[snap_steps[k + 1]] = replace(
                psi, samples=sfft.ifft(phi), t_elapsed=t0 + (k + 1) * dt
            )
            phi *= half
        else:
            phi *= full
    final = replace(psi, samples=sfft.ifft(phi), t_elapsed=t0 + T_int)
    if n in snap_steps:
        snaps[snap_steps[n]] = final
    if check:
        check_aliasing(final)
    return RunResult(final=final, snapshots=snaps, n_steps=n, dt=dt)


def simulate(scenario: Scenario, check: bool = True) -> tuple[Wavefunction, RunResult]:
    """Prepare the entrance state and run the interaction. Returns (initial, result)."""
    psi = prepare(scenario)
    return psi, run_interaction(psi, scenario, check=check)
