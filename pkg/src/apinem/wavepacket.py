"""Gaussian electron wavepackets on a periodic comoving grid.

The coordinate is ``zeta = z - v0 t``. In this frame the linear term of the
free Hamiltonian drops out and only the quadratic dispersion
``(p - p0)**2 / (2 m*)`` acts, so a drift of any length is a single phase
multiplication in momentum space.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.fft as sfft

from .physcore import C, HBAR, H, Kinematics

DEFAULT_N = 16384
ALIAS_FRACTION = 1e-6
ALIAS_CELLS = 3


class GridError(ValueError):
    """The grid cannot represent the requested state."""


class AliasingError(RuntimeError):
    """Probability has reached the edge of the position or momentum window."""


@dataclass(frozen=True)
class BeamParams:
    beta: float
    sigma_z0: float
    L_D: float = 0.0

    def __post_init__(self):
        if not self.sigma_z0 > 0.0:
            raise GridError(f"sigma_z0 must be positive, got {self.sigma_z0!r}")

    @property
    def sigma_p0(self) -> float:
        return HBAR / (2.0 * self.sigma_z0)

    def sigma_t0(self, kin: Kinematics) -> float:
        return self.sigma_z0 / kin.v0

    def sigma_E0(self, kin: Kinematics) -> float:
        return kin.v0 * self.sigma_p0

    def t_D(self, kin: Kinematics) -> float:
        return self.L_D / kin.v0


@dataclass(frozen=True)
class GridSpec:
    N: int
    z_span: float

    def __post_init__(self):
        if self.N < 2 or self.N & (self.N - 1):
            raise GridError(f"N must be a power of two >= 2, got {self.N}")
        if not self.z_span > 0.0:
            raise GridError(f"z_span must be positive, got {self.z_span!r}")

    @property
    def dz(self) -> float:
        return self.z_span / self.N

    @property
    def dp(self) -> float:
        return 2.0 * math.pi * HBAR / self.z_span

    @property
    def zeta(self) -> np.ndarray:
        return (np.arange(self.N) - self.N // 2) * self.dz

    @property
    def p_offsets(self) -> np.ndarray:
        """Momentum offsets ``p - p0`` in FFT order."""
        return sfft.fftfreq(self.N, d=self.dz) * (2.0 * math.pi * HBAR)


def _next_pow2(n: float) -> int:
    return 1 << max(1, math.ceil(math.log2(max(n, 2.0))))


def default_grid(
    sigma_z: float,
    sigma_z0: float,
    beta_lambda: float | None = None,
    period: float | None = None,
    n_min: int = DEFAULT_N,
) -> GridSpec:
    """Window ``max(32 sigma_z, 16 beta_lambda)``, sampling fine enough for the waist.

    When ``period`` is given the span is rounded up to a whole number of
    periods so that a periodic potential is continuous across the wrap.
    """
    span = 32.0 * sigma_z
    if beta_lambda is not None:
        span = max(span, 16.0 * beta_lambda)
    span = max(span, 16.0 * sigma_z0)
    if period is not None:
        span = math.ceil(span / period - 1e-9) * period
    N = max(n_min, _next_pow2(span / (sigma_z0 / 8.0)))
    return GridSpec(N=N, z_span=span)


@dataclass(frozen=True)
class Wavefunction:
    samples: np.ndarray
    grid: GridSpec
    p0: float
    t_elapsed: float = 0.0
    meta: dict = field(default_factory=dict, compare=False)

    def norm(self) -> float:
        return float(np.sum(np.abs(self.samples) ** 2) * self.grid.dz)

    def momentum_amplitude(self) -> np.ndarray:
        """psi(p) in FFT order, normalised so that sum |psi(p)|^2 dp = 1."""
        return sfft.fft(self.samples) * (self.grid.dz / math.sqrt(2.0 * math.pi * HBAR))

    def overlap(self, other: Wavefunction) -> complex:
        return complex(np.vdot(self.samples, other.samples) * self.grid.dz)


def gaussian_waist(beam: BeamParams, grid: GridSpec, p0: float = 0.0) -> Wavefunction:
    """Minimum-uncertainty Gaussian centred at ``zeta = 0`` with no chirp."""
    problems = []
    if grid.dz > beam.sigma_z0 / 8.0:
        problems.append(f"dz={grid.dz:.4g} m exceeds sigma_z0/8={beam.sigma_z0 / 8:.4g} m")
    if grid.z_span < 16.0 * beam.sigma_z0:
        problems.append(f"z_span={grid.z_span:.4g} m is below 16*sigma_z0={16 * beam.sigma_z0:.4g} m")
    if problems:
        raise GridError("grid does not resolve the waist: " + "; ".join(problems))
    zeta = grid.zeta
    amp = np.exp(-(zeta**2) / (4.0 * beam.sigma_z0**2)).astype(complex)
    amp /= math.sqrt(np.sum(np.abs(amp) ** 2) * grid.dz)
    return Wavefunction(samples=amp, grid=grid, p0=p0)


def analytic_sigma_z(sigma_z0: float, t_D: float, kin: Kinematics) -> float:
    """RMS length after a drift of duration ``t_D`` (even in ``t_D``)."""
    if not sigma_z0 > 0.0:
        raise GridError(f"sigma_z0 must be positive, got {sigma_z0!r}")
    spread = kin.lambda_C_star * C * t_D / (4.0 * math.pi * sigma_z0)
    return math.hypot(sigma_z0, spread)


def edge_fractions(psi: Wavefunction, cells: int = ALIAS_CELLS) -> tuple[float, float]:
    """Probability within ``cells`` samples of the position and momentum window edges."""
    N = psi.grid.N
    rho_z = np.abs(psi.samples) ** 2 * psi.grid.dz
    rho_p = np.abs(sfft.fftshift(psi.momentum_amplitude())) ** 2 * psi.grid.dp
    edge_z = float(rho_z[:cells].sum() + rho_z[N - cells:].sum())
    edge_p = float(rho_p[:cells].sum() + rho_p[N - cells:].sum())
    return edge_z, edge_p


def check_aliasing(psi: Wavefunction, threshold: float = ALIAS_FRACTION) -> None:
    edge_z, edge_p = edge_fractions(psi)
    if edge_p >= threshold:
        raise AliasingError(
            f"momentum window too narrow: {edge_p:.3g} of the probability lies at its edge"
        )
    if edge_z >= threshold:
        raise AliasingError(
            f"position window too narrow: {edge_z:.3g} of the probability lies at its edge"
        )


def kinetic_phase(grid: GridSpec, kin: Kinematics, t: float) -> np.ndarray:
    dp = grid.p_offsets
    return np.exp(-1j * (dp * dp) * (t / (2.0 * kin.m_star * HBAR)))


def drift(psi: Wavefunction, t_D: float, kin: Kinematics, check: bool = True) -> Wavefunction:
    """Exact free evolution for time ``t_D`` (negative values run backwards)."""
    if t_D == 0.0:
        return replace(psi, samples=psi.samples.copy())
    out = sfft.ifft(sfft.fft(psi.samples) * kinetic_phase(psi.grid, kin, t_D))
    res = replace(psi, samples=out, t_elapsed=psi.t_elapsed + t_D)
    if check:
        check_aliasing(res)
    return res


@dataclass(frozen=True)
class Moments:
    mean_z: float
    mean_p: float
    sigma_z: float
    sigma_p: float
    cov_zp: float

    @property
    def area(self) -> float:
        """Phase-space area ``2 pi sqrt(det)``; equals h/2 for a pure Gaussian."""
        det = self.sigma_z**2 * self.sigma_p**2 - self.cov_zp**2
        return 2.0 * math.pi * math.sqrt(max(det, 0.0))

    @property
    def area_over_half_h(self) -> float:
        return self.area / (H / 2.0)


def moments(psi: Wavefunction) -> Moments:
    g = psi.grid
    rho = np.abs(psi.samples) ** 2
    w = rho * g.dz
    total = w.sum()
    zeta = g.zeta
    mz = float(np.sum(w * zeta) / total)
    vz = float(np.sum(w * (zeta - mz) ** 2) / total)

    phi = sfft.fft(psi.samples)
    dk = g.p_offsets
    wp = np.abs(phi) ** 2
    wp_tot = wp.sum()
    mp = float(np.sum(wp * dk) / wp_tot)
    vp = float(np.sum(wp * (dk - mp) ** 2) / wp_tot)

    # symmetrised <zeta p>: Re <psi| zeta p |psi>
    p_psi = sfft.ifft(phi * dk)
    zp = float(np.real(np.vdot(psi.samples, zeta * p_psi)) * g.dz / total)
    return Moments(
        mean_z=mz,
        mean_p=psi.p0 + mp,
        sigma_z=math.sqrt(vz),
        sigma_p=math.sqrt(vp),
        cov_zp=zp - mz * mp,
    )
