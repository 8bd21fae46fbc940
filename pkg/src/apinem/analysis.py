"""Observables of simulated states: momentum spectra, shifts, sidebands, fringes.

Also models what a spectrometer sees for an ensemble of electrons: classical
energy jitter (a Gaussian convolution along p) and entrance-phase jitter
(an average over runs with different laser phases).
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
import scipy.fft as sfft
from scipy import optimize, signal

from .perturbation import apinem_fringe_spacing
from .physcore import HBAR, kinematics_from_beta
from .propagator import LaserField, Scenario, build_scenario, kinematics_from_p0, simulate
from .regimes import APINEM, PINEM, classify
from .wavepacket import BeamParams, Wavefunction, check_aliasing


class UnresolvedSidebandsError(ValueError):
    pass


@dataclass(frozen=True)
class Spectrum:
    p_axis: np.ndarray
    density: np.ndarray
    p0: float
    v0: float
    metadata: dict = field(default_factory=dict, compare=False)

    @property
    def dp(self) -> float:
        return float(self.p_axis[1] - self.p_axis[0])

    def integral(self) -> float:
        return float(self.density.sum() * self.dp)

    def mean(self) -> float:
        return float(np.sum(self.p_axis * self.density) / self.density.sum())

    def std(self) -> float:
        m = self.mean()
        return math.sqrt(float(np.sum((self.p_axis - m) ** 2 * self.density) / self.density.sum()))

    def energy_axis(self, relative: bool = True) -> np.ndarray:
        """Energy ``v0 (p - p0)`` (relative) or ``v0 p`` (absolute, first-order in p)."""
        return self.v0 * (self.p_axis - self.p0) if relative else self.v0 * self.p_axis

    def with_density(self, density: np.ndarray, **meta) -> Spectrum:
        return replace(self, density=density, metadata={**self.metadata, **meta})


def momentum_spectrum(psi: Wavefunction, check: bool = True) -> Spectrum:
    if check:
        check_aliasing(psi)
    amp = sfft.fftshift(psi.momentum_amplitude())
    kin = kinematics_from_p0(psi.p0)
    p = psi.p0 + sfft.fftshift(psi.grid.p_offsets)
    return Spectrum(p_axis=p, density=np.abs(amp) ** 2, p0=psi.p0, v0=kin.v0, metadata=dict(psi.meta))


def mean_shift(spec: Spectrum, spec0: Spectrum) -> float:
    if spec.p_axis.shape != spec0.p_axis.shape or not np.allclose(
        spec.p_axis, spec0.p_axis, rtol=1e-12, atol=0.0
    ):
        raise ValueError("spectra are on different momentum axes")
    return spec.mean() - spec0.mean()


@dataclass(frozen=True)
class SidebandWeights:
    orders: np.ndarray
    weights: np.ndarray
    centroids: np.ndarray

    def __getitem__(self, n: int) -> float:
        return float(self.weights[int(np.searchsorted(self.orders, n))])

    def spacing(self) -> float:
        """Mean separation of adjacent sideband centroids around the zero-loss peak."""
        return float((self.centroids[-1] - self.centroids[0]) / (self.orders[-1] - self.orders[0]))


def sideband_weights(
    spec: Spectrum, spacing: float, n_max: int = 2, sigma_p: float | None = None
) -> SidebandWeights:
    """Probability in windows of width ``spacing`` centred on ``p0 + n*spacing``."""
    p = spec.p_axis - spec.p0
    if sigma_p is None:
        core = np.abs(p) < spacing / 2
        w = spec.density[core]
        sigma_p = math.sqrt(float(np.sum(w * p[core] ** 2) / w.sum()))
    if spacing <= 4.0 * sigma_p:
        raise UnresolvedSidebandsError(
            f"sideband spacing {spacing:.4g} is not above 4 sigma_p = {4 * sigma_p:.4g}: "
            "the large-recoil condition (energy spread below the photon energy) is violated"
        )
    orders = np.arange(-n_max, n_max + 1)
    weights = np.empty(orders.size)
    cents = np.empty(orders.size)
    for i, n in enumerate(orders):
        sel = np.abs(p - n * spacing) < spacing / 2
        d = spec.density[sel]
        weights[i] = d.sum() * spec.dp
        cents[i] = np.sum(d * p[sel]) / d.sum() if d.sum() > 0 else np.nan
    return SidebandWeights(orders=orders, weights=weights, centroids=cents)


def fit_sideband_spacing(
    spec: Spectrum,
    sigma_p: float,
    spacing_guess: float,
    n_max: int = 2,
    chirp: float = 0.0,
    rel_bound: float = 0.3,
) -> float:
    """Spacing of a coherent comb of shifted copies of the entrance amplitude.

    The model density is ``|sum_n a_n g(p - c - n d)|**2`` with ``g`` the
    Gaussian entrance amplitude of width ``sigma_p`` carrying the quadratic
    phase ``-chirp * (p - p0)**2`` (``chirp = t_D / (2 m* hbar)``). Overlapping
    orders interfere, so an incoherent sum of peaks would bias the spacing.
    The spacing is searched within ``rel_bound`` of the guess.
    """
    x = (spec.p_axis - spec.p0) / spacing_guess
    keep = np.abs(x) < n_max + 1.0 + 6.0 * sigma_p / spacing_guess
    x = x[keep]
    y = spec.density[keep] * spacing_guess
    s = sigma_p / spacing_guess
    k = chirp * spacing_guess**2
    orders = np.arange(-n_max, n_max + 1)
    n_side = orders.size - 1
    amp0 = math.sqrt(y.max())

    def density(params):
        d, c = params[:2]
        a = np.empty(orders.size, dtype=complex)
        a[n_max] = params[2]
        rest = params[3:3 + n_side] + 1j * params[3 + n_side:]
        a[:n_max] = rest[:n_max]
        a[n_max + 1:] = rest[n_max:]
        u = x[:, None] - c - orders[None, :] * d
        basis = np.exp(-(u * u) / (4 * s * s) - 1j * k * u * u)
        return np.abs(basis @ a) ** 2

    best = None
    lo = [1.0 - rel_bound, -0.5, 0.0] + [-np.inf] * (2 * n_side)
    hi = [1.0 + rel_bound, 0.5, np.inf] + [np.inf] * (2 * n_side)
    for ph in (0.0, 0.5 * math.pi, math.pi, 1.5 * math.pi):
        side = 0.1 * amp0 * np.exp(1j * ph * np.abs(orders[orders != 0]))
        x0 = np.concatenate([[1.0, 0.0, amp0], side.real, side.imag])
        res = optimize.least_squares(lambda q: density(q) - y, x0, bounds=(lo, hi))
        if best is None or res.cost < best.cost:
            best = res
    return float(best.x[0] * spacing_guess)


@dataclass(frozen=True)
class FringeEstimate:
    detected: bool
    period: float | None
    confidence: float
    fallback_period: float | None = None


def _char_function(spec: Spectrum, pad: int = 4):
    n = spec.density.size
    M = 1 << math.ceil(math.log2(pad * n))
    F = np.abs(np.fft.rfft(spec.density, M))
    F /= F[0]
    f = np.fft.rfftfreq(M, spec.dp)
    return f, F


def _peak_to_peak(spec: Spectrum) -> float | None:
    d = spec.density / spec.density.max()
    idx, _ = signal.find_peaks(d, prominence=0.02, height=0.02)
    if idx.size < 3:
        return None
    return float(np.median(np.diff(spec.p_axis[idx])))


def fringe_spacing_estimate(
    spec: Spectrum, mask_scale: float = 0.5, min_prominence: float = 1e-3
) -> FringeEstimate:
    """Dominant modulation period of the density from its Fourier magnitude.

    Frequencies below ``mask_scale / sigma_p`` hold the smooth envelope and are
    ignored. A peak counts only if it is an interior local maximum with
    prominence above ``min_prominence`` of the zero-frequency value.
    """
    f, F = _char_function(spec)
    cut = mask_scale / spec.std()
    start = int(np.searchsorted(f, cut))
    tail = F[start:]
    idx, props = signal.find_peaks(tail, prominence=min_prominence)
    if idx.size == 0:
        return FringeEstimate(False, None, 0.0, _peak_to_peak(spec))
    best = int(np.argmax(tail[idx]))
    k = start + int(idx[best])
    a, b, c = F[k - 1], F[k], F[k + 1]
    denom = a - 2 * b + c
    shift = 0.5 * (a - c) / denom if denom != 0 else 0.0
    freq = f[k] + shift * (f[1] - f[0])
    return FringeEstimate(True, 1.0 / freq, float(props["prominences"][best]), _peak_to_peak(spec))


def visibility(spec: Spectrum, period: float, window: float = 0.15) -> float:
    """Fourier-domain fringe contrast at ``period``: 1 for a density of shape (1 + cos)."""
    f, F = _char_function(spec)
    f0 = 1.0 / period
    sel = (f >= f0 * (1 - window)) & (f <= f0 * (1 + window))
    if not sel.any():
        raise ValueError("period not resolvable on this momentum axis")
    return float(min(1.0, 2.0 * F[sel].max()))


def convolve_energy_jitter(spec: Spectrum, sigma_E: float) -> Spectrum:
    """Gaussian blur along p of width ``sigma_E / v0`` (exact, done in the Fourier domain)."""
    if sigma_E == 0:
        return spec
    sp = sigma_E / spec.v0
    n = spec.density.size
    f = np.fft.rfftfreq(n, spec.dp)
    out = np.fft.irfft(np.fft.rfft(spec.density) * np.exp(-2.0 * (math.pi * sp * f) ** 2), n)
    return spec.with_density(np.clip(out, 0.0, None), sigma_E_part=sigma_E)


@dataclass(frozen=True)
class EnsembleParams:
    sigma_E_part: float = 0.0
    sigma_t_jitter: float = 0.0
    n_draws: int = 64
    phase_mode: str = "gaussian"

    def __post_init__(self):
        if self.sigma_E_part < 0 or self.sigma_t_jitter < 0:
            raise ValueError("ensemble jitters must be non-negative")
        if self.n_draws < 1:
            raise ValueError("n_draws must be positive")
        if self.phase_mode not in ("gaussian", "uniform"):
            raise ValueError(f"phase_mode must be 'gaussian' or 'uniform', got {self.phase_mode!r}")


def ensemble_phases(phi0: float, omega: float, ens: EnsembleParams, seed: int = 0) -> np.ndarray:
    """Entrance phases for the phase-jitter average.

    ``uniform`` is an equispaced quadrature over a full period. ``gaussian``
    draws from N(phi0, omega*sigma_t); draw i uses its own spawned substream,
    so the set is independent of evaluation order.
    """
    if ens.phase_mode == "uniform":
        return phi0 + 2.0 * math.pi * np.arange(ens.n_draws) / ens.n_draws
    if ens.sigma_t_jitter == 0:
        return np.array([phi0])
    sigma_phi = omega * ens.sigma_t_jitter
    children = np.random.SeedSequence(seed).spawn(ens.n_draws)
    return np.array([phi0 + sigma_phi * np.random.default_rng(c).standard_normal() for c in children])


def _map(fn, items, threads: int):
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def phase_average(scenario: Scenario, phases: Sequence[float], threads: int = 1) -> Spectrum:
    def run(phi):
        sc = replace(scenario, laser=replace(scenario.laser, phi0=float(phi)))
        return momentum_spectrum(simulate(sc)[1].final)

    specs = _map(run, list(phases), threads)
    dens = np.mean([s.density for s in specs], axis=0)
    return specs[0].with_density(dens, n_phases=len(specs))


def ensemble_average(
    scenario: Scenario,
    ens: EnsembleParams,
    seed: int = 0,
    threads: int = 1,
    single: Spectrum | None = None,
) -> Spectrum:
    """Spectrum recorded by a spectrometer over many electrons.

    ``single`` may supply an already computed single-electron spectrum for the
    scenario's own phase; it is used only when there is no phase jitter.
    """
    needs_phase = ens.phase_mode == "uniform" or ens.sigma_t_jitter > 0
    if needs_phase:
        phases = ensemble_phases(scenario.laser.phi0, scenario.laser.omega, ens, seed)
        spec = phase_average(scenario, phases, threads)
    else:
        spec = single if single is not None else momentum_spectrum(simulate(scenario)[1].final)
    return convolve_energy_jitter(spec, ens.sigma_E_part)


@dataclass
class SweepPoint:
    set_index: int
    sigma_z0: float
    L_D: float
    beta_lambda: float
    label: str = ""
    measured: float | None = None
    predicted_apinem: float = math.nan
    predicted_pinem: float = math.nan
    confidence: float = math.nan
    status: str = "ok"


@dataclass
class BranchFit:
    set_index: int
    sigma_z0: float
    L_D: float
    slope: float
    predicted_slope: float
    n_points: int

    @property
    def rel_error(self) -> float:
        return self.slope / self.predicted_slope - 1.0


@dataclass
class SweepResult:
    points: list[SweepPoint]
    fits: list[BranchFit]

    @property
    def failed(self) -> list[SweepPoint]:
        return [p for p in self.points if p.status != "ok"]


def measure_spacing(
    spec: Spectrum, label: str, beam: BeamParams, beta_lambda: float
) -> tuple[float | None, float]:
    """Measured spectral period for the regime: sideband fit (PINEM) or fringe peak (APINEM)."""
    if label == PINEM:
        kin = kinematics_from_beta(beam.beta)
        recoil = 2.0 * math.pi * HBAR / beta_lambda
        chirp = beam.t_D(kin) / (2.0 * kin.m_star * HBAR)
        return fit_sideband_spacing(spec, beam.sigma_p0, recoil, chirp=chirp), 1.0
    est = fringe_spacing_estimate(spec)
    return (est.period if est.detected else None), est.confidence


def sweep_fringe_vs_wavelength(
    beams: Sequence[BeamParams],
    beta_lambdas: Sequence[float],
    upsilon: float = 0.1,
    L: float | None = None,
    threads: int = 1,
    steps_per_period: int = 256,
) -> SweepResult:
    """One propagator run per (beam, beta*lambda); failures are recorded, not raised."""
    jobs = [(i, b, bl) for i, b in enumerate(beams) for bl in beta_lambdas]

    def run(job):
        i, beam, bl = job
        pt = SweepPoint(set_index=i, sigma_z0=beam.sigma_z0, L_D=beam.L_D, beta_lambda=bl)
        try:
            kin = kinematics_from_beta(beam.beta)
            lam = bl / beam.beta
            kwargs = {} if L is None else {"L": L}
            laser = LaserField.synchronous(lam, kin, 0.0, **kwargs).with_upsilon(upsilon)
            rep = classify(beam, lam)
            pt.label = rep.label
            pt.predicted_apinem = apinem_fringe_spacing(beam, kin, bl).delta_p
            pt.predicted_pinem = 2.0 * math.pi * HBAR / bl
            if rep.label not in (PINEM, APINEM):
                pt.status = "skipped: acceleration regime has no spectral period"
                return pt
            sc = build_scenario(beam, laser, steps_per_period=steps_per_period)
            spec = momentum_spectrum(simulate(sc)[1].final)
            pt.measured, pt.confidence = measure_spacing(spec, rep.label, beam, bl)
            if pt.measured is None:
                pt.status = "failed: no fringes detected"
        except Exception as exc:  # noqa: BLE001 - a sweep keeps going past bad points
            pt.status = f"failed: {exc}"
        return pt

    points = _map(run, jobs, threads)
    fits = []
    for i, beam in enumerate(beams):
        sel = [p for p in points if p.set_index == i and p.label == APINEM and p.measured is not None]
        if not sel:
            continue
        x = np.array([p.beta_lambda for p in sel])
        y = np.array([p.measured for p in sel])
        kin = kinematics_from_beta(beam.beta)
        pred = apinem_fringe_spacing(beam, kin, 1.0).delta_p
        fits.append(BranchFit(i, beam.sigma_z0, beam.L_D, float(x @ y / (x @ x)), pred, len(sel)))
    return SweepResult(points=points, fits=fits)
