from pathlib import Path

import pytest

from apinem.analysis import momentum_spectrum
from apinem.config import load_config
from apinem.propagator import simulate

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def config_path(name: str) -> Path:
    return CONFIGS / f"{name}.ini"


def _run(name):
    cfg = load_config(config_path(name))
    sc = cfg.scenario()
    psi0, res = simulate(sc)
    return {
        "config": cfg,
        "scenario": sc,
        "psi0": psi0,
        "result": res,
        "spec0": momentum_spectrum(psi0),
        "spec": momentum_spectrum(res.final),
    }


@pytest.fixture(scope="session")
def fig3a():
    return _run("fig3a_pinem")


@pytest.fixture(scope="session")
def fig3b():
    return _run("fig3b_acceleration")


@pytest.fixture(scope="session")
def fig3c():
    return _run("fig3c_apinem")


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
