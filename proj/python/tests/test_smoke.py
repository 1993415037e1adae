import json
import math

import numpy as np
import pytest

import qhydro as qh


def test_grid_and_units():
    g = qh.Grid.line(64, -10.0, 10.0)
    assert g.shape == (64,)
    assert g.dim == 1
    assert g.coords(0)[1] - g.coords(0)[0] == pytest.approx(20.0 / 64)
    assert qh.Grid.cube(2, 16, 0.0, 1.0).shape == (16, 16)
    u = qh.Units(hbar=0.5, mass=2.0, c=3.0)
    assert (u.hbar, u.mass, u.c) == (0.5, 2.0, 3.0)


def test_free_gaussian_spreads_and_conserves_norm():
    g = qh.Grid.line(512, -30.0, 30.0)
    psi0 = qh.gaussian_packet(g, [0.0], 1.0)
    assert psi0.dtype == np.complex128
    psi = qh.evolve(g, psi0, qh.Potential.zero(), 0.01, 100)
    assert qh.norm_squared(g, psi) == pytest.approx(1.0, abs=1e-12)
    x = g.coords(0)
    rho = np.abs(psi) ** 2 * g.dx()
    assert float(np.sum(rho * x**2)) == pytest.approx(1.25, rel=1e-6)


def test_series_shape():
    g = qh.Grid.line(64, -8.0, 8.0)
    times, frames = qh.evolve_series(g, qh.gaussian_packet(g, [0.0], 1.0), qh.Potential.harmonic(1.0), 0.01, 20, 10)
    assert times == pytest.approx([0.0, 0.1, 0.2])
    assert frames.shape == (3, 64)


def test_ground_state_energy():
    g = qh.Grid.line(256, -10.0, 10.0)
    psi, e0 = qh.ground_state(g, qh.Potential.harmonic(1.0))
    assert e0 == pytest.approx(0.5, abs=1e-6)
    assert qh.energy(g, psi, qh.Potential.harmonic(1.0)) == pytest.approx(0.5, abs=1e-6)


def test_madelung_round_trip_and_quantum_potential():
    g = qh.Grid.line(128, 0.0, 2 * math.pi)
    x = g.coords(0)
    psi = (1.5 + 0.5 * np.cos(x)) * np.exp(1j * np.sin(2 * x))
    d = qh.decompose(g, psi)
    assert d["regions"] == 1
    assert not d["mask"].any()
    assert np.max(np.abs(qh.recompose(g, d["R"], d["S"]) - psi)) < 1e-12

    g = qh.Grid.line(256, -10.0, 10.0)
    x = g.coords(0)
    U, mask = qh.quantum_potential(g, np.exp(-x**2 / 2), eps_node=1e-4)
    exact = -0.5 * (x**2 / 4 - 0.5)
    assert np.max(np.abs(U - exact)[~mask]) < 1e-7


def test_klein_gordon():
    g = qh.Grid.line(64, 0.0, 2 * math.pi)
    u = qh.Units(1.0, 1.0, 1.0)
    assert qh.kg_dispersion(2.0, u) == pytest.approx(math.sqrt(5.0))
    R, R_dot = qh.evolve_nlkg(g, np.ones(64), np.zeros(64), 1e-3, 100, u)
    assert np.all(R == 1.0)
    phi, _ = qh.evolve_kg(g, np.exp(2j * g.coords(0)), dt=1e-3, steps=100, units=u)
    assert np.allclose(np.abs(phi), 1.0, atol=1e-9)


def test_trajectories_and_rays():
    g = qh.Grid.line(256, -16.0, 16.0)
    times, frames = qh.evolve_series(g, qh.gaussian_packet(g, [0.0], 1.0), qh.Potential.zero(), 1e-3, 1000, 10)
    paths = qh.bohm_trajectories(g, times, frames, [[1.0], [-2.0]], dt=0.01)
    assert len(paths) == 2
    assert paths[0]["x"][-1][0] == pytest.approx(math.sqrt(1.25), rel=1e-4)
    assert not paths[1]["hit_node"]

    a = qh.sample_density(g, frames[0], 100, 7)
    assert a == qh.sample_density(g, frames[0], 100, 7)

    rays = qh.hamilton_rays("harmonic", [[1.0]], [[0.0]], 1e-3, 6283)
    e = np.array(rays[0]["energy"])
    assert np.max(np.abs(e - 0.5)) < 1e-10
    assert rays[0]["x"][-1][0] == pytest.approx(1.0, abs=1e-3)


def test_born_infeld():
    S, P = qh.bi_invariants([0.3, 0, 0], [0, 0.2, 0])
    assert S == pytest.approx(0.025)
    assert P == 0.0
    assert qh.bi_lagrangian([1e-3, 0, 0], [0, 0, 0], 1.0) == pytest.approx(5e-7, rel=1e-6)
    e1, _ = qh.bi_self_energy(1.0, 1.0)
    e4, _ = qh.bi_self_energy(1.0, 4.0)
    assert e4 / e1 == pytest.approx(8.0, rel=1e-9)
    assert qh.bi_point_charge_field(0.0, 2.0, 1.0) == pytest.approx(2.0)
    with pytest.raises(qh.DomainError):
        qh.bi_lagrangian([2.0, 0, 0], [0, 0, 0], 1.0)


def test_sphere_curvature():
    R = qh.ricci_scalar_preset("sphere", [33, 33], [0.6, 0.0], [2.4, 1.5], radius=2.0)
    assert R.shape == (33, 33)
    assert R[16, 16] == pytest.approx(0.5, rel=1e-3)


def test_errors_map_to_python_exceptions():
    g = qh.Grid.line(64, 0.0, 1.0)
    with pytest.raises(qh.ConfigError):
        qh.evolve(g, np.zeros(10, dtype=complex), qh.Potential.zero(), 0.01, 1)
    with pytest.raises(ValueError):
        qh.Grid.line(2, 0.0, 1.0)
    assert issubclass(qh.DomainError, qh.NumericError)


def test_run_config(tmp_path):
    cfg = {"command": "bi", "params": {"E": [0.1, 0, 0], "b": 1.0, "self_energy": False}}
    out = qh.run_config(json.dumps(cfg), str(tmp_path))
    assert out["ok"]
    assert out["report"]["S"] == pytest.approx(0.005)
    assert [f["path"] for f in out["manifest"]["files"]] == ["report.json"]
    assert "trajectories" in qh.command_names()
    with pytest.raises(qh.ConfigError):
        qh.run_config(json.dumps({"command": "bi", "params": {"b": 1.0}, "extra": 1}), str(tmp_path))
