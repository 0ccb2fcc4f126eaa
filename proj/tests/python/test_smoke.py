import json
import math
import os
from pathlib import Path

import numpy as np
import pytest

import crmlab

FIGURES = Path(os.environ.get("CRMLAB_SOURCE_DIR", Path(__file__).resolve().parents[2])) / "figures"


def test_fig5_run_passes_and_tracks():
    scenario = crmlab.load(FIGURES / "fig5.toml")
    assert scenario.family == "crm-scalar"
    result = crmlab.run(scenario)
    assert result.passed
    names = [c["name"] for c in result.certificates]
    assert "e_L2" in names
    traj = result.trajectory
    assert len(traj) == 1501
    e = traj.channel("e")
    assert isinstance(e, np.ndarray)
    assert abs(e[-1]) < 1e-2
    np.testing.assert_allclose(traj.channel("x_p") - traj.channel("x_m"), e, atol=1e-15)


def test_e_l2_bound_matches_hand_value():
    scenario = crmlab.Scenario.from_toml(
        'family = "crm-scalar"\n[reference]\nell = -10.0\n[adaptation]\ngamma = 100.0\n'
    )
    result = crmlab.run(scenario)
    bound = next(c["bound"] for c in result.certificates if c["name"] == "e_L2")
    # V(0) = e(0)^2/2 + |k_p|/(2 gamma) |theta_bar*|^2 with theta* = -1, k* = 0.5.
    v0 = 0.5 + 2.0 / 200.0 * (1.0 + 0.25)
    assert bound == pytest.approx(v0 / 11.0, rel=1e-12)
    assert bound == pytest.approx(4.659e-2, abs=1e-5)


def test_invalid_config_raises_with_kind():
    with pytest.raises(crmlab.CrmlabError) as info:
        crmlab.Scenario.from_toml('family = "crm-scalar"\n[reference]\nell = 5.0\n')
    assert info.value.kind == "InvalidConfig"
    assert "reference.ell" in str(info.value)
    with pytest.raises(crmlab.CrmlabError) as info:
        crmlab.Scenario.from_json('{"family": "cmrac-co", "observer": {"ell": -0.5}}')
    assert info.value.kind == "UnstableGain"


def test_sweep_manifest_and_fit(tmp_path):
    scenario = crmlab.load(FIGURES / "peaking.toml")
    manifest = crmlab.sweep(scenario, "ell", [-10, -100, -1000], threads=2, out_dir=tmp_path)
    assert manifest["axis"] == "reference.ell"
    assert len(manifest["points"]) == 3
    assert 0.3 <= manifest["peaking_fit"]["exponent"] <= 0.6
    on_disk = json.loads((tmp_path / "sweep.json").read_text())
    assert on_disk == manifest
    rep = crmlab.report(tmp_path)
    assert rep["sweeps"] == 1 and rep["passed"]


def test_artifacts_are_reproducible(tmp_path):
    scenario = crmlab.load(FIGURES / "backstep-n2.toml")
    first = crmlab.write_artifacts(scenario, crmlab.run(scenario), tmp_path / "a")
    crmlab.write_artifacts(scenario, crmlab.run(scenario), tmp_path / "b")
    for path in map(Path, first):
        assert path.read_bytes() == (tmp_path / "b" / path.name).read_bytes()


def test_parseval_single_harmonic():
    n = 2001
    t = np.linspace(0.0, 1.0, n)
    rep = crmlab.parseval_identity(np.sin(2 * math.pi * t).tolist(), 1.0, 8)
    assert rep["lhs"] == pytest.approx(2 * math.pi**2, rel=1e-4)
    assert rep["rhs"] == pytest.approx(2 * math.pi**2, rel=1e-4)


def test_with_parameter_couples_gamma():
    scenario = crmlab.load(FIGURES / "peaking.toml")
    moved = scenario.with_parameter("ell", -40.0, couple_gamma=True)
    source = moved.resolved()["source"]
    assert source["reference"]["ell"] == -40
    assert source["adaptation"]["gamma"] == 40
    assert "reference.ell" in crmlab.sweep_axes("crm-scalar")
