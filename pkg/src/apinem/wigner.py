"""Wigner phase-space distribution of a 1-D wavefunction.

Rows are computed from the autocorrelation
``chi(z, s) = psi*(z - s/2) psi(z + s/2)`` Fourier transformed over the lag
``s``. Half-sample values of psi come from band-limited (spectral)
interpolation onto a grid twice as fine, so the lag grid coincides with the
position grid and the momentum axis coincides with the FFT axis of psi.
With that choice both marginals are exact on the discrete grid.

The default normalisation is ``sum W dz dp = 1``. ``scale="half_hbar"``
multiplies by hbar/2 for comparison with the alternative convention.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from .physcore import HBAR
from .wavepacket import Wavefunction

MAX_CELLS = 10**8
IMAG_TOL = 1e-10


class WignerSizeError(MemoryError):
    pass


@dataclass(frozen=True)
class WignerGrid:
    values: np.ndarray
    z_axis: np.ndarray
    p_axis: np.ndarray
    dz: float
    dp: float
    norm_convention: str = "unit"

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def total(self) -> float:
        return float(self.values.sum() * self.dz * self.dp)

    def rescaled(self, convention: str) -> WignerGrid:
        factors = {"unit": 1.0, "half_hbar": HBAR / 2.0}
        if convention not in factors:
            raise ValueError(f"unknown normalisation {convention!r}")
        f = factors[convention] / factors[self.norm_convention]
        return WignerGrid(self.values * f, self.z_axis, self.p_axis, self.dz, self.dp, convention)


def _fine(samples: np.ndarray) -> np.ndarray:
    """Spectral interpolation onto twice as many points (even-index samples unchanged)."""
    N = samples.size
    spec = sfft.fft(samples)
    pad = np.zeros(2 * N, dtype=complex)
    h = N // 2
    pad[:h] = spec[:h]
    pad[2 * N - h + 1:] = spec[h + 1:]
    # split the Nyquist bin so the interpolant stays consistent with the samples
    pad[h] = 0.5 * spec[h]
    pad[2 * N - h] = 0.5 * spec[h]
    return sfft.ifft(pad) * 2.0


def _normalize_stride(downsample) -> tuple[int, int]:
    if isinstance(downsample, int):
        downsample = (downsample, 1)
    zs, ps = (int(v) for v in downsample)
    if zs < 1 or ps < 1:
        raise ValueError("downsample factors must be positive integers")
    return zs, ps


def cross_wigner(
    psi_a: Wavefunction,
    psi_b: Wavefunction,
    downsample=(1, 1),
    z_range: tuple[float, float] | None = None,
    p_range: tuple[float, float] | None = None,
    allow_large: bool = False,
    chunk: int = 256,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Complex cross-Wigner function W_ab with rows over z and columns over p.

    ``wigner(a + b) = W_aa + 2 Re W_ab + W_bb``. Returns (values, z_axis, p_axis)
    where ``p_axis`` is absolute momentum.
    """
    g = psi_a.grid
    if psi_b.grid != g:
        raise ValueError("cross-Wigner needs both states on the same grid")
    N = g.N
    zs, ps = _normalize_stride(downsample)
    zeta = g.zeta
    p_rel = sfft.fftshift(g.p_offsets)

    rows = np.arange(0, N, zs)
    if z_range is not None:
        rows = rows[(zeta[rows] >= z_range[0]) & (zeta[rows] <= z_range[1])]
    cols = np.arange(0, N, ps)
    if p_range is not None:
        p_abs = psi_a.p0 + p_rel[cols]
        cols = cols[(p_abs >= p_range[0]) & (p_abs <= p_range[1])]
    cells = rows.size * cols.size
    if cells > MAX_CELLS and not allow_large:
        raise WignerSizeError(
            f"{rows.size} x {cols.size} = {cells} cells exceeds {MAX_CELLS}; "
            "downsample, crop, or pass allow_large=True"
        )

    fa = np.conj(_fine(psi_a.samples))
    fb = _fine(psi_b.samples) if psi_b is not psi_a else np.conj(fa)
    lags = np.fft.fftfreq(N, d=1.0 / N).astype(int)
    # grid index n sits at fine index 2n; zeta[n] = (n - N/2) dz
    scale = g.dz / (2.0 * math.pi * HBAR)
    out = np.empty((rows.size, cols.size), dtype=complex)
    for start in range(0, rows.size, chunk):
        r = rows[start:start + chunk]
        centre = 2 * r[:, None]
        chi = fa[(centre - lags) % (2 * N)] * fb[(centre + lags) % (2 * N)]
        w = sfft.fftshift(sfft.fft(chi, axis=1), axes=1)
        out[start:start + r.size] = w[:, cols] * scale
    return out, zeta[rows], psi_a.p0 + p_rel[cols]


def wigner(
    psi: Wavefunction,
    downsample=(1, 1),
    z_range: tuple[float, float] | None = None,
    p_range: tuple[float, float] | None = None,
    allow_large: bool = False,
    scale: str = "unit",
) -> WignerGrid:
    vals, z, p = cross_wigner(psi, psi, downsample, z_range, p_range, allow_large)
    peak = np.max(np.abs(vals)) if vals.size else 0.0
    resid = np.max(np.abs(vals.imag)) if vals.size else 0.0
    if peak > 0 and resid > IMAG_TOL * peak:
        raise ArithmeticError(f"Wigner imaginary residue {resid / peak:.3g} of peak")
    zs, ps = _normalize_stride(downsample)
    W = WignerGrid(vals.real.copy(), z, p, psi.grid.dz * zs, psi.grid.dp * ps)
    return W.rescaled(scale) if scale != "unit" else W


def marginal_p(W: WignerGrid) -> np.ndarray:
    """Momentum density: Riemann sum of W over z."""
    return W.values.sum(axis=0) * W.dz


def marginal_z(W: WignerGrid) -> np.ndarray:
    """Position density: Riemann sum of W over p."""
    return W.values.sum(axis=1) * W.dp


def negativity(W: WignerGrid) -> float:
    """Most negative value relative to the peak (0 for a non-negative distribution)."""
    return float(min(W.values.min(), 0.0) / W.values.max())
