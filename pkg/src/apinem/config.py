"""Flat sectioned key-value scenario files with unit suffixes.

Example::

    [beam]
    beta = 0.7
    sigma_z0 = 0.04um
    L_D = 60cm

    [laser]
    beta_lambda = 1.2um
    upsilon = 0.1

Every dimensional value must carry a unit. Unknown keys are errors. All
problems found in a file are reported together.
"""
from __future__ import annotations

import configparser
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

from .analysis import EnsembleParams
from .physcore import C, EV, DomainError, kinematics_from_beta
from .propagator import (
    DEFAULT_L,
    DEFAULT_STEPS_PER_PERIOD,
    LaserField,
    Scenario,
    build_scenario,
    field_for_upsilon,
)
from .wavepacket import BeamParams, GridSpec

UNITS = {
    "length": {"m": 1.0, "cm": 1e-2, "mm": 1e-3, "um": 1e-6, "µm": 1e-6, "nm": 1e-9},
    "time": {"s": 1.0, "ns": 1e-9, "ps": 1e-12, "fs": 1e-15, "as": 1e-18},
    "energy": {"J": 1.0, "eV": EV, "meV": 1e-3 * EV, "keV": 1e3 * EV},
    "field": {"V/m": 1.0, "kV/m": 1e3, "MV/m": 1e6, "GV/m": 1e9, "V/um": 1e6, "V/nm": 1e9},
    "angle": {"rad": 1.0, "deg": math.pi / 180.0, "pi": math.pi},
}

# kind, is_list
SCHEMA = {
    "beam": {"beta": ("number", False), "sigma_z0": ("length", False),
             "sigma_t0": ("time", False), "L_D": ("length", False)},
    "laser": {"lambda": ("length", False), "beta_lambda": ("length", True),
              "E0": ("field", False), "upsilon": ("number", False),
              "L": ("length", False), "phi0": ("angle", False),
              "theta_bar": ("angle", False), "grating_period": ("length", False)},
    "grid": {"N": ("int", False), "z_span": ("length", False)},
    "run": {"dt": ("time", False), "steps_per_period": ("int", False),
            "snapshots": ("time", True), "n_max": ("int", False),
            "wigner": ("bool", False), "wigner_downsample": ("int", True),
            "spectrum_axis": ("str", False)},
    "ensemble": {"sigma_E_part": ("energy", False), "sigma_t_jitter": ("time", False),
                 "n_draws": ("int", False), "phase_mode": ("str", False)},
    "diagram": {"sigma_min": ("length", False), "sigma_max": ("length", False),
                "L_D_min": ("length", False), "L_D_max": ("length", False),
                "n_sigma": ("int", False), "n_L": ("int", False)},
}

ALIASES = {("laser", "target_upsilon"): "upsilon"}

_NUM = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*([^\s\d].*)?$")


class ConfigError(ValueError):
    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__("invalid configuration:\n  " + "\n  ".join(self.problems))


def parse_quantity(text: str, kind: str) -> float:
    """Parse ``"0.4um"`` style input into SI. Angles may be bare numbers (radians)."""
    m = _NUM.match(text)
    if not m:
        raise ValueError(f"cannot parse {text!r} as a number")
    value = float(m.group(1))
    unit = (m.group(2) or "").strip()
    if kind == "number":
        if unit:
            raise ValueError(f"{text!r} must be dimensionless")
        return value
    if kind == "int":
        if unit or not float(value).is_integer():
            raise ValueError(f"{text!r} must be an integer")
        return int(value)
    table = UNITS[kind]
    if not unit:
        if kind == "angle":
            return value
        raise ValueError(f"{text!r} needs a {kind} unit ({', '.join(table)})")
    if unit not in table:
        raise ValueError(f"unknown {kind} unit {unit!r} in {text!r} (expected one of {', '.join(table)})")
    return value * table[unit]


def _parse_value(raw: str, kind: str, is_list: bool):
    if kind == "bool":
        low = raw.strip().lower()
        if low in ("true", "yes", "1", "on"):
            return True
        if low in ("false", "no", "0", "off"):
            return False
        raise ValueError(f"{raw!r} is not a boolean")
    if kind == "str":
        return raw.strip()
    if is_list:
        items = [x for x in re.split(r"[,\s]+", raw.strip()) if x]
        if not items:
            raise ValueError("empty list")
        vals = [parse_quantity(x, kind) for x in items]
        return vals
    return parse_quantity(raw, kind)


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, tuple)):
        return ", ".join(_fmt(x) for x in v)
    return str(v)


@dataclass
class RunConfig:
    values: dict[str, dict] = field(default_factory=dict)
    source: str = ""

    def get(self, section: str, key: str, default=None):
        return self.values.get(section, {}).get(key, default)

    def has(self, section: str, key: str) -> bool:
        return key in self.values.get(section, {})

    # builders -----------------------------------------------------------

    def beam(self) -> BeamParams:
        beta = self.get("beam", "beta")
        if beta is None:
            raise ConfigError(["beam.beta is required"])
        kin = kinematics_from_beta(beta)
        s0 = self.get("beam", "sigma_z0")
        if s0 is None:
            t0 = self.get("beam", "sigma_t0")
            if t0 is None:
                raise ConfigError(["one of beam.sigma_z0 or beam.sigma_t0 is required"])
            s0 = t0 * kin.v0
        return BeamParams(beta=beta, sigma_z0=s0, L_D=self.get("beam", "L_D", 0.0))

    def wavelengths(self) -> list[float]:
        beta = self.get("beam", "beta")
        if self.has("laser", "lambda"):
            return [self.get("laser", "lambda")]
        bls = self.get("laser", "beta_lambda")
        if bls is None:
            raise ConfigError(["one of laser.lambda or laser.beta_lambda is required"])
        return [bl / beta for bl in bls]

    def laser(self, lambda_: float | None = None) -> LaserField:
        beam = self.beam()
        kin = kinematics_from_beta(beam.beta)
        if lambda_ is None:
            lams = self.wavelengths()
            if len(lams) != 1:
                raise ConfigError(["laser.beta_lambda has several values; this command takes one"])
            lambda_ = lams[0]
        L = self.get("laser", "L", DEFAULT_L)
        omega = 2.0 * math.pi * C / lambda_
        if self.has("laser", "grating_period"):
            q_z = 2.0 * math.pi / self.get("laser", "grating_period")
            theta = (omega / kin.v0 - q_z) * L
        else:
            theta = self.get("laser", "theta_bar", 0.0)
        E0 = self.get("laser", "E0")
        if E0 is None:
            E0 = field_for_upsilon(self.get("laser", "upsilon", 0.0), L, omega)
        return LaserField.synchronous(
            lambda_, kin, E0, L=L, phi0=self.get("laser", "phi0", 0.0), theta_bar=theta
        )

    def grid(self) -> GridSpec | None:
        N, span = self.get("grid", "N"), self.get("grid", "z_span")
        if N is None and span is None:
            return None
        if N is None or span is None:
            raise ConfigError(["grid.N and grid.z_span must be given together"])
        return GridSpec(N=N, z_span=span)

    def scenario(self, lambda_: float | None = None) -> Scenario:
        return build_scenario(
            self.beam(),
            self.laser(lambda_),
            grid=self.grid(),
            dt=self.get("run", "dt"),
            steps_per_period=self.get("run", "steps_per_period", DEFAULT_STEPS_PER_PERIOD),
            snapshots=self.get("run", "snapshots", ()),
        )

    def ensemble(self) -> EnsembleParams:
        return EnsembleParams(
            sigma_E_part=self.get("ensemble", "sigma_E_part", 0.0),
            sigma_t_jitter=self.get("ensemble", "sigma_t_jitter", 0.0),
            n_draws=self.get("ensemble", "n_draws", 64),
            phase_mode=self.get("ensemble", "phase_mode", "gaussian"),
        )

    def upsilon(self) -> float | None:
        return self.get("laser", "upsilon")

    def resolved_lines(self) -> list[str]:
        """Given values, then defaults and derived quantities marked ``(resolved)``."""
        lines = []
        for sec in SCHEMA:
            for key in SCHEMA[sec]:
                if self.has(sec, key):
                    lines.append(f"{sec}.{key} = {_fmt(self.get(sec, key))}")
        derived: dict[str, object] = {}
        if self.has("beam", "beta") and (self.has("beam", "sigma_z0") or self.has("beam", "sigma_t0")):
            b = self.beam()
            derived.update({"beam.sigma_z0": b.sigma_z0, "beam.L_D": b.L_D})
            if self.values.get("laser"):
                lams = self.wavelengths()
                derived["laser.lambda"] = lams if len(lams) > 1 else lams[0]
                las = self.laser(lams[0])
                derived.update({"laser.L": las.L, "laser.phi0": las.phi0})
                if len(lams) == 1:
                    sc = self.scenario()
                    derived.update({"laser.E0": las.E0, "laser.q_z": las.q_z,
                                    "grid.N": sc.grid.N, "grid.z_span": sc.grid.z_span,
                                    "run.dt": sc.dt})
        for key, val in derived.items():
            lines.append(f"{key} = {_fmt(val)} (resolved)")
        return lines


def _validate(cfg: RunConfig) -> list[str]:
    problems = []
    v = cfg.values
    beam, laser = v.get("beam", {}), v.get("laser", {})
    if "beta" in beam and not 0.0 < beam["beta"] < 1.0:
        problems.append(f"beam.beta={beam['beta']} must lie in the open interval (0, 1)")
    for sec, key in [("beam", "sigma_z0"), ("beam", "sigma_t0"), ("laser", "lambda"),
                     ("laser", "L"), ("laser", "grating_period"), ("grid", "z_span"),
                     ("run", "dt"), ("diagram", "sigma_min"), ("diagram", "sigma_max")]:
        val = v.get(sec, {}).get(key)
        if val is not None and not val > 0:
            problems.append(f"{sec}.{key}={val} must be positive")
    for val in laser.get("beta_lambda", []) or []:
        if not val > 0:
            problems.append(f"laser.beta_lambda entry {val} must be positive")
    if "sigma_z0" in beam and "sigma_t0" in beam:
        problems.append("beam.sigma_z0 and beam.sigma_t0 conflict: give one")
    if "lambda" in laser and "beta_lambda" in laser:
        problems.append("laser.lambda and laser.beta_lambda conflict: give one")
    if "E0" in laser and "upsilon" in laser:
        problems.append("laser.E0 and laser.upsilon conflict: give exactly one")
    if laser and "E0" not in laser and "upsilon" not in laser:
        problems.append("one of laser.E0 or laser.upsilon is required")
    if "E0" in laser and laser["E0"] < 0:
        problems.append("laser.E0 must be non-negative")
    if "upsilon" in laser and laser["upsilon"] < 0:
        problems.append("laser.upsilon must be non-negative")
    if "theta_bar" in laser and "grating_period" in laser:
        problems.append("laser.theta_bar and laser.grating_period conflict: give one")
    if "dt" in v.get("run", {}) and "steps_per_period" in v.get("run", {}):
        problems.append("run.dt and run.steps_per_period conflict: give one")
    spp = v.get("run", {}).get("steps_per_period")
    if spp is not None and spp < 64:
        problems.append(f"run.steps_per_period={spp} must be at least 64")
    N = v.get("grid", {}).get("N")
    if N is not None and (N < 2 or N & (N - 1)):
        problems.append(f"grid.N={N} must be a power of two >= 2")
    ax = v.get("run", {}).get("spectrum_axis")
    if ax is not None and ax not in ("p", "E", "E_abs"):
        problems.append(f"run.spectrum_axis={ax!r} must be p, E or E_abs")
    ens = v.get("ensemble", {})
    for key in ("sigma_E_part", "sigma_t_jitter"):
        if key in ens and ens[key] < 0:
            problems.append(f"ensemble.{key} must be non-negative")
    if ens.get("phase_mode", "gaussian") not in ("gaussian", "uniform"):
        problems.append("ensemble.phase_mode must be gaussian or uniform")
    if "n_draws" in ens and ens["n_draws"] < 1:
        problems.append("ensemble.n_draws must be positive")
    dg = v.get("diagram", {})
    for key in ("n_sigma", "n_L"):
        if key in dg and dg[key] < 1:
            problems.append(f"diagram.{key} must be positive")
    if not problems and "beta" in beam and ("sigma_z0" in beam or "sigma_t0" in beam):
        try:
            b = cfg.beam()
            if laser:
                for lam in cfg.wavelengths():
                    build_scenario(b, cfg.laser(lam), grid=cfg.grid(), dt=cfg.get("run", "dt"),
                                   steps_per_period=spp or DEFAULT_STEPS_PER_PERIOD)
        except (ConfigError,) as exc:
            problems.extend(exc.problems)
        except (ValueError, DomainError) as exc:
            problems.append(str(exc))
    return problems


def parse_config_text(text: str, source: str = "<string>") -> RunConfig:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError([f"{source}: {exc}"]) from exc
    problems = []
    values: dict[str, dict] = {}
    for sec in parser.sections():
        if sec not in SCHEMA:
            problems.append(f"unknown section [{sec}]")
            continue
        values[sec] = {}
        for key, raw in parser.items(sec):
            key = ALIASES.get((sec, key), key)
            if key in values[sec]:
                problems.append(f"{sec}.{key} given twice")
                continue
            if key not in SCHEMA[sec]:
                problems.append(f"unknown key {sec}.{key}")
                continue
            kind, is_list = SCHEMA[sec][key]
            try:
                values[sec][key] = _parse_value(raw, kind, is_list)
            except ValueError as exc:
                problems.append(f"{sec}.{key}: {exc}")
    cfg = RunConfig(values=values, source=source)
    if not problems:
        problems = _validate(cfg)
    if problems:
        raise ConfigError(problems)
    return cfg


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError([f"cannot read {path}: {exc}"]) from exc
    return parse_config_text(text, source=str(path))
