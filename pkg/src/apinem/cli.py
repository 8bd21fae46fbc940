"""Command-line entry point: ``apinem <command> --config FILE --out DIR``."""
from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    UnresolvedSidebandsError,
    convolve_energy_jitter,
    ensemble_average,
    fit_sideband_spacing,
    fringe_spacing_estimate,
    mean_shift,
    momentum_spectrum,
    sideband_weights,
    sweep_fringe_vs_wavelength,
    visibility,
)
from .config import ConfigError, RunConfig, load_config
from .io import (
    summary_lines,
    write_phase_diagram,
    write_spectrum,
    write_summary,
    write_sweep,
    write_wavefunction,
    write_wigner,
    write_wigner_preview,
)
from .perturbation import first_order_theory
from .physcore import E_CHARGE, HBAR, DomainError
from .propagator import ScenarioError, simulate
from .regimes import APINEM, PINEM, classify, phase_diagram
from .wavepacket import AliasingError, GridError, moments
from .wigner import WignerSizeError, marginal_z, negativity, wigner

EXIT_OK = 0
EXIT_FAILED_POINTS = 1
EXIT_CONFIG = 2
EXIT_GUARD = 3

GUARDS = (AliasingError, GridError, ScenarioError, WignerSizeError, DomainError, ArithmeticError)

WIGNER_TARGET = 512


def header_for(command: str, cfg: RunConfig, seed: int) -> list[str]:
    return [f"apinem {__version__} {command}", f"seed = {seed}"] + [
        f"config {line}" for line in cfg.resolved_lines()
    ]


def emit(out: Path, name: str, values: dict, header: list[str]) -> None:
    write_summary(out / name, values, header)
    for line in summary_lines(values):
        print(line)


# ---------------------------------------------------------------------------


def predict_values(cfg: RunConfig) -> dict:
    beam = cfg.beam()
    lams = cfg.wavelengths()
    vals: dict = {}
    for i, lam in enumerate(lams):
        prefix = "" if len(lams) == 1 else f"point{i}."
        theory = first_order_theory(beam, cfg.laser(lam))
        rep = classify(beam, lam)
        vals[prefix + "beta_lambda"] = beam.beta * lam
        vals[prefix + "label"] = rep.label
        for k, v in theory.as_dict().items():
            vals[prefix + k] = v
        vals[prefix + "predicted_spectral_period"] = rep.predicted_spectral_period
    return vals


def cmd_predict(cfg: RunConfig, out: Path, seed: int, threads: int) -> int:
    emit(out, "predict.txt", predict_values(cfg), header_for("predict", cfg, seed))
    return EXIT_OK


def _wigner_ranges(psi, spec):
    """Crop to the occupied region and pick strides so each axis stays near WIGNER_TARGET."""
    dens = np.abs(psi.samples) ** 2
    occ = np.nonzero(dens > 1e-12 * dens.max())[0]
    z = psi.grid.zeta
    z_range = (z[occ[0]], z[occ[-1]])
    pocc = np.nonzero(spec.density > 1e-12 * spec.density.max())[0]
    p_range = (spec.p_axis[pocc[0]], spec.p_axis[pocc[-1]])
    zs = max(1, math.ceil(occ.size / WIGNER_TARGET))
    ps = max(1, math.ceil(pocc.size / WIGNER_TARGET))
    return (zs, ps), z_range, p_range


def write_wigner_outputs(out: Path, stem: str, psi, header, downsample=None) -> dict:
    spec = momentum_spectrum(psi)
    auto, z_range, p_range = _wigner_ranges(psi, spec)
    ds = tuple(downsample) if downsample else auto
    if len(ds) == 1:
        ds = (ds[0], 1)
    W = wigner(psi, downsample=ds, z_range=z_range, p_range=p_range)
    write_wigner(out / f"{stem}.txt", W, header)
    write_wigner_preview(out / f"{stem}_preview.txt", W, header)
    info = {f"{stem}.shape": f"{W.values.shape[0]}x{W.values.shape[1]}",
            f"{stem}.negativity": negativity(W)}
    if ds == (1, 1):
        # marginal checks only make sense on the undecimated crop
        z = psi.grid.zeta
        rows = (z >= z_range[0]) & (z <= z_range[1])
        info[f"{stem}.marginal_z_L1"] = float(
            np.abs(marginal_z(W) - np.abs(psi.samples[rows]) ** 2).sum() * psi.grid.dz
        )
    return info


def simulate_values(cfg: RunConfig, out: Path, header, axis: str, with_wigner: bool) -> dict:
    sc = cfg.scenario()
    beam, laser, kin = sc.beam, sc.laser, sc.kin
    rep = classify(beam, laser.lambda_)
    theory = first_order_theory(beam, laser)
    psi0, res = simulate(sc)
    spec0 = momentum_spectrum(psi0)
    spec = momentum_spectrum(res.final)
    write_spectrum(out / "spectrum.txt", spec, axis, header)
    write_spectrum(out / "spectrum_initial.txt", spec0, axis, header)
    for k, (t, snap) in enumerate(sorted(res.snapshots.items())):
        write_wavefunction(out / f"snapshot_{k:03d}.txt", snap, header)

    scale = E_CHARGE * laser.E0 * laser.L / kin.v0
    shift = mean_shift(spec, spec0)
    vals: dict = {
        "label": rep.label,
        "Gamma0": rep.Gamma0,
        "Gamma": rep.Gamma,
        "upsilon": theory.upsilon,
        "theta_bar": theory.theta_bar,
        "N": sc.grid.N,
        "z_span": sc.grid.z_span,
        "n_steps": res.n_steps,
        "dt": res.dt,
        "norm_error": abs(res.final.norm() - psi0.norm()),
        "sigma_z_entrance": moments(psi0).sigma_z,
        "shift_scale": scale,
        "measured_shift": shift,
        "expected_shift": theory.dp_mean,
        "shift_delta_over_scale": (shift - theory.dp_mean) / scale if scale else 0.0,
    }
    recoil = theory.sideband_spacing
    try:
        sw = sideband_weights(spec, recoil, n_max=2, sigma_p=beam.sigma_p0)
        for n in sw.orders:
            vals[f"sideband_weight[{n:+d}]"] = sw[int(n)]
        vals["sideband_weight_expected"] = theory.upsilon**2
        chirp = beam.t_D(kin) / (2.0 * kin.m_star * HBAR)
        fit = fit_sideband_spacing(spec, beam.sigma_p0, recoil, chirp=chirp)
        vals["sideband_spacing"] = fit
        vals["sideband_spacing_expected"] = recoil
        vals["sideband_spacing_rel_error"] = fit / recoil - 1.0
    except UnresolvedSidebandsError as exc:
        vals["sidebands"] = "unresolved: " + str(exc).split(":")[0]
    if rep.label == APINEM:
        est = fringe_spacing_estimate(spec)
        vals["fringes_detected"] = est.detected
        vals["fringe_spacing"] = est.period
        vals["fringe_spacing_expected"] = theory.delta_p_fringe
        if est.detected:
            vals["fringe_spacing_rel_error"] = est.period / theory.delta_p_fringe - 1.0
            vals["fringe_visibility"] = visibility(spec, est.period)
    if with_wigner:
        vals.update(write_wigner_outputs(out, "wigner", res.final, header, cfg.get("run", "wigner_downsample")))
    return vals


def cmd_simulate(cfg: RunConfig, out: Path, seed: int, threads: int) -> int:
    header = header_for("simulate", cfg, seed)
    axis = cfg.get("run", "spectrum_axis", "p")
    vals = simulate_values(cfg, out, header, axis, bool(cfg.get("run", "wigner", False)))
    emit(out, "summary.txt", vals, header)
    return EXIT_OK


def cmd_wigner(cfg: RunConfig, out: Path, seed: int, threads: int) -> int:
    header = header_for("wigner", cfg, seed)
    sc = cfg.scenario()
    psi0, res = simulate(sc)
    ds = cfg.get("run", "wigner_downsample")
    vals = {"label": classify(sc.beam, sc.laser.lambda_).label}
    vals.update(write_wigner_outputs(out, "wigner_initial", psi0, header, ds))
    vals.update(write_wigner_outputs(out, "wigner", res.final, header, ds))
    emit(out, "summary.txt", vals, header)
    return EXIT_OK


def cmd_phase_diagram(cfg: RunConfig, out: Path, seed: int, threads: int) -> int:
    header = header_for("phase-diagram", cfg, seed)
    beta = cfg.get("beam", "beta", 0.7)
    lam = cfg.get("laser", "lambda")
    if lam is None:
        bls = cfg.get("laser", "beta_lambda")
        lam = bls[0] / beta if bls else 0.8e-6
    g = lambda k, d: cfg.get("diagram", k, d)  # noqa: E731
    pd = phase_diagram(
        sigma_range=(g("sigma_min", 0.01e-6), g("sigma_max", 1e-6)),
        L_D_range=(g("L_D_min", -1.0), g("L_D_max", 1.0)),
        resolution=(g("n_sigma", 256), g("n_L", 257)),
        beta=beta,
        lambda_=lam,
    )
    write_phase_diagram(out, pd, header)
    curves = pd.boundary_contours["gamma_sqrt2"]
    vals = {
        "beta": beta,
        "lambda": lam,
        "n_sigma": pd.sigma_z0_axis.size,
        "n_L": pd.L_D_axis.size,
        "gamma_sqrt2_segments": len(curves),
        "gamma_sqrt2_max_sigma_z0": max((float(c[:, 0].max()) for c in curves), default=None),
        "gamma0_sqrt2_sigma_z0": beta * lam / (math.sqrt(2.0) * math.pi),
    }
    for code, name in enumerate(("Acceleration", "PINEM", "APINEM")):
        vals[f"cells.{name}"] = int(np.count_nonzero(pd.label_grid == code))
    emit(out, "summary.txt", vals, header)
    return EXIT_OK


def cmd_sweep(cfg: RunConfig, out: Path, seed: int, threads: int) -> int:
    header = header_for("sweep", cfg, seed)
    beam = cfg.beam()
    bls = [beam.beta * lam for lam in cfg.wavelengths()]
    ups = cfg.upsilon()
    if ups is None:
        raise ConfigError(["sweep needs laser.upsilon (the field varies with wavelength)"])
    res = sweep_fringe_vs_wavelength(
        [beam], bls, upsilon=ups, L=cfg.get("laser", "L"), threads=threads,
        steps_per_period=cfg.get("run", "steps_per_period", 256),
    )
    write_sweep(out / "sweep.txt", res, header)
    vals: dict = {"points": len(res.points), "failed_points": len(res.failed)}
    for fit in res.fits:
        vals["apinem_slope"] = fit.slope
        vals["apinem_slope_expected"] = fit.predicted_slope
        vals["apinem_slope_rel_error"] = fit.rel_error
        vals["apinem_points"] = fit.n_points
    pin = [p for p in res.points if p.label == PINEM and p.measured is not None]
    if pin:
        errs = [p.measured / p.predicted_pinem - 1.0 for p in pin]
        vals["pinem_points"] = len(pin)
        vals["pinem_max_abs_rel_error"] = max(abs(e) for e in errs)
    for p in res.failed:
        print(f"sweep point beta_lambda={p.beta_lambda:.6g} {p.status}", file=sys.stderr)
    emit(out, "summary.txt", vals, header)
    return EXIT_FAILED_POINTS if res.failed else EXIT_OK


def cmd_ensemble(cfg: RunConfig, out: Path, seed: int, threads: int) -> int:
    header = header_for("ensemble", cfg, seed)
    axis = cfg.get("run", "spectrum_axis", "p")
    sc = cfg.scenario()
    ens = cfg.ensemble()
    kin = sc.kin
    psi0 = simulate(sc)[0]
    spec0 = convolve_energy_jitter(momentum_spectrum(psi0), ens.sigma_E_part)
    spec = ensemble_average(sc, ens, seed=seed, threads=threads)
    write_spectrum(out / "ensemble_spectrum.txt", spec, axis, header)
    theory = first_order_theory(sc.beam, sc.laser)
    sE0 = sc.beam.sigma_E0(kin)
    vals: dict = {
        "label": classify(sc.beam, sc.laser.lambda_).label,
        "sigma_E0": sE0,
        "sigma_E_part": ens.sigma_E_part,
        "phase_mode": ens.phase_mode,
        "n_phases": spec.metadata.get("n_phases", 1),
        "width_E": 2.0 * kin.v0 * spec.std(),
        "width_E_zero_field_expected": 2.0 * math.hypot(sE0, ens.sigma_E_part),
        "mean_shift": mean_shift(spec, spec0),
        "shift_scale": E_CHARGE * sc.laser.E0 * sc.laser.L / kin.v0,
    }
    if math.isfinite(theory.delta_p_fringe) and theory.delta_p_fringe > 2 * spec.dp:
        vals["fringe_visibility"] = visibility(spec, theory.delta_p_fringe)
    emit(out, "summary.txt", vals, header)
    return EXIT_OK


COMMANDS = {
    "predict": cmd_predict,
    "simulate": cmd_simulate,
    "wigner": cmd_wigner,
    "phase-diagram": cmd_phase_diagram,
    "sweep": cmd_sweep,
    "ensemble": cmd_ensemble,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="apinem", description=__doc__)
    parser.add_argument("--version", action="version", version=f"apinem {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, type=Path, help="scenario file")
        p.add_argument("--out", type=Path, default=Path("."), help="output directory")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--threads", type=int, default=1)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.threads < 1:
        print("error: --threads must be positive", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    args.out.mkdir(parents=True, exist_ok=True)
    try:
        return COMMANDS[args.command](cfg, args.out, args.seed, args.threads)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except GUARDS as exc:
        print(f"guard tripped: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_GUARD


if __name__ == "__main__":
    sys.exit(main())
