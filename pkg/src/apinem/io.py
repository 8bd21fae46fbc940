"""Plain-text output files.

Every file begins with ``#`` comment lines that carry the resolved
configuration, so each output can be regenerated from itself. Numbers are
written with ``%.17g`` (round-trip exact, locale independent) and LF line
endings.
"""
from __future__ import annotations

import math
import re
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .analysis import Spectrum, SweepResult
from .regimes import LABELS, PhaseDiagram
from .wavepacket import GridSpec, Wavefunction
from .wigner import WignerGrid

FMT = "%.17g"
PREVIEW_SIZE = 64


def _header_text(header: Sequence[str], extra: Sequence[str] = ()) -> str:
    return "".join(f"# {line}\n" for line in [*header, *extra])


def format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return FMT % v
    if v is None:
        return "none"
    return str(v)


def write_table(path, columns: Sequence[str], data, header: Sequence[str] = (), extra: Sequence[str] = ()) -> Path:
    path = Path(path)
    data = np.asarray(data, dtype=float)
    if data.ndim == 1:
        data = data[:, None]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(_header_text(header, extra))
        fh.write("# " + " ".join(columns) + "\n")
        np.savetxt(fh, data, fmt=FMT, delimiter=" ")
    return path


def read_table(path) -> tuple[list[str], np.ndarray]:
    """Column names (from the last comment line) and the numeric block."""
    names: list[str] = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.startswith("#"):
                break
            names = line[1:].split()
    return names, np.loadtxt(path, comments="#", ndmin=2)


def read_header(path) -> list[str]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.startswith("#"):
                break
            out.append(line[2:].rstrip("\n"))
    return out


def write_summary(path, values: Mapping[str, object], header: Sequence[str] = ()) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(_header_text(header))
        for key, val in values.items():
            fh.write(f"{key} = {format_value(val)}\n")
    return path


def summary_lines(values: Mapping[str, object]) -> list[str]:
    return [f"{k} = {format_value(v)}" for k, v in values.items()]


def read_summary(path) -> dict[str, str]:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.startswith("#") or "=" not in line:
                continue
            k, v = line.split("=", 1)
            out[k.strip()] = v.strip()
    return out


def write_spectrum(path, spec: Spectrum, axis: str = "p", header: Sequence[str] = ()) -> Path:
    """``axis``: ``p`` absolute momentum, ``E`` energy relative to the centre, ``E_abs`` v0*p."""
    if axis == "p":
        x, name = spec.p_axis, "p_kg_m_per_s"
        y = spec.density
        dname = "density_per_momentum"
    elif axis in ("E", "E_abs"):
        x = spec.energy_axis(relative=(axis == "E"))
        name = "E_J" if axis == "E" else "E_abs_J"
        y = spec.density / spec.v0
        dname = "density_per_energy"
    else:
        raise ValueError(f"unknown spectrum axis {axis!r}")
    extra = [f"p0 = {FMT % spec.p0}", f"v0 = {FMT % spec.v0}"]
    return write_table(path, [name, dname], np.column_stack([x, y]), header, extra)


def write_wavefunction(path, psi: Wavefunction, header: Sequence[str] = ()) -> Path:
    g = psi.grid
    extra = [
        f"N = {g.N}",
        f"dz = {FMT % g.dz}",
        f"p0 = {FMT % psi.p0}",
        f"t_elapsed = {FMT % psi.t_elapsed}",
    ]
    data = np.column_stack([psi.samples.real, psi.samples.imag])
    return write_table(path, ["re", "im"], data, header, extra)


def read_wavefunction(path) -> Wavefunction:
    meta = {}
    for line in read_header(path):
        if "=" in line:
            k, v = line.split("=", 1)
            meta[k.strip()] = v.strip()
    _, data = read_table(path)
    N = int(meta["N"])
    grid = GridSpec(N=N, z_span=N * float(meta["dz"]))
    return Wavefunction(
        samples=data[:, 0] + 1j * data[:, 1],
        grid=grid,
        p0=float(meta["p0"]),
        t_elapsed=float(meta["t_elapsed"]),
    )


def _wigner_meta(W: WignerGrid) -> list[str]:
    nz, npp = W.values.shape
    return [
        f"N_z = {nz}",
        f"N_p = {npp}",
        f"dz = {FMT % W.dz}",
        f"dp = {FMT % W.dp}",
        f"z0 = {FMT % W.z_axis[0]}",
        f"p0 = {FMT % W.p_axis[0]}",
        f"normalisation = {W.norm_convention}",
        "layout = row-major, one line per z, columns over p",
    ]


def write_wigner(path, W: WignerGrid, header: Sequence[str] = ()) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(_header_text(header, _wigner_meta(W)))
        np.savetxt(fh, W.values, fmt=FMT, delimiter=" ")
    return path


def read_wigner(path) -> WignerGrid:
    meta = {}
    for line in read_header(path):
        if "=" in line:
            k, v = line.split("=", 1)
            meta[k.strip()] = v.strip()
    vals = np.loadtxt(path, comments="#", ndmin=2)
    nz, npp = int(meta["N_z"]), int(meta["N_p"])
    if vals.shape != (nz, npp):
        raise ValueError(f"Wigner file shape {vals.shape} does not match header ({nz}, {npp})")
    dz, dp = float(meta["dz"]), float(meta["dp"])
    z = float(meta["z0"]) + dz * np.arange(nz)
    p = float(meta["p0"]) + dp * np.arange(npp)
    return WignerGrid(vals, z, p, dz, dp, meta.get("normalisation", "unit"))


def wigner_preview(W: WignerGrid, size: int = PREVIEW_SIZE) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Block-averaged coarse grid (at most ``size`` x ``size``)."""
    nz, npp = W.values.shape
    bz, bp = max(1, math.ceil(nz / size)), max(1, math.ceil(npp / size))
    mz, mp = nz // bz, npp // bp
    v = W.values[: mz * bz, : mp * bp].reshape(mz, bz, mp, bp).mean(axis=(1, 3))
    z = W.z_axis[: mz * bz].reshape(mz, bz).mean(axis=1)
    p = W.p_axis[: mp * bp].reshape(mp, bp).mean(axis=1)
    return z, p, v


def write_wigner_preview(path, W: WignerGrid, header: Sequence[str] = (), size: int = PREVIEW_SIZE) -> Path:
    z, p, v = wigner_preview(W, size)
    Z, P = np.meshgrid(z, p, indexing="ij")
    data = np.column_stack([Z.ravel(), P.ravel(), v.ravel()])
    return write_table(path, ["zeta_m", "p_kg_m_per_s", "W"], data, header)


def write_phase_diagram(out_dir, pd: PhaseDiagram, header: Sequence[str] = ()) -> list[Path]:
    """Damping grid, label grid and one polyline file per boundary family."""
    out_dir = Path(out_dir)
    S, L = np.meshgrid(pd.sigma_z0_axis, pd.L_D_axis, indexing="ij")
    data = np.column_stack([S.ravel(), L.ravel(), pd.damping_grid.ravel(), pd.label_grid.ravel()])
    legend = "label codes: " + ", ".join(f"{i}={name}" for i, name in enumerate(LABELS))
    paths = [
        write_table(
            out_dir / "phase_diagram.txt",
            ["sigma_z0_m", "L_D_m", "damping", "label_code"],
            data,
            header,
            [f"n_sigma = {pd.sigma_z0_axis.size}", f"n_L = {pd.L_D_axis.size}", legend],
        )
    ]
    for name, curves in sorted(pd.boundary_contours.items()):
        path = out_dir / f"contour_{name}.txt"
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(_header_text(header, [f"contour = {name}", f"segments = {len(curves)}"]))
            fh.write("# sigma_z0_m L_D_m\n")
            for k, c in enumerate(curves):
                fh.write(f"# segment {k}\n")
                np.savetxt(fh, c, fmt=FMT, delimiter=" ")
        paths.append(path)
    return paths


def read_contours(path) -> list[np.ndarray]:
    curves: list[list[list[float]]] = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if re.match(r"# segment \d+$", line.rstrip("\n")):
                curves.append([])
            elif not line.startswith("#") and line.strip():
                curves[-1].append([float(x) for x in line.split()])
    return [np.array(c) for c in curves]


def write_sweep(path, result: SweepResult, header: Sequence[str] = ()) -> Path:
    path = Path(path)
    cols = ["set", "sigma_z0_m", "L_D_m", "beta_lambda_m", "regime", "measured",
            "predicted_apinem", "predicted_pinem", "status"]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(_header_text(header))
        fh.write("# " + " ".join(cols) + "\n")
        for p in result.points:
            row = [p.set_index, p.sigma_z0, p.L_D, p.beta_lambda, p.label or "none",
                   p.measured, p.predicted_apinem, p.predicted_pinem]
            status = p.status.replace(" ", "_")
            fh.write(" ".join(format_value(v) for v in row) + f" {status}\n")
    return path


def write_lines(path, lines: Iterable[str]) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in lines:
            fh.write(line + "\n")
    return path
