"""Simulation and certificate checks for adaptive control with closed-loop reference models."""

from ._core import (
    CrmlabError,
    RunResult,
    Scenario,
    Trajectory,
    certificates_json,
    fit_peaking_exponent,
    parseval_identity,
    report,
    run,
    sweep,
    sweep_axes,
    write_artifacts,
)

__all__ = [
    "CrmlabError",
    "RunResult",
    "Scenario",
    "Trajectory",
    "certificates_json",
    "fit_peaking_exponent",
    "load",
    "parseval_identity",
    "report",
    "run",
    "sweep",
    "sweep_axes",
    "write_artifacts",
]

__version__ = "0.1.0"


def load(path):
    """Scenario from a .toml or .json file."""
    return Scenario.from_file(str(path))
