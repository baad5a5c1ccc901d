import numpy as np
import pytest

from cluster_pack.commons import InstabilityError, ValidationError
from cluster_pack.graph import grid_graph
from cluster_pack.metrics import fidelity, symplectic_eigenvalues
from cluster_pack.model_full import (
    GHZ,
    PhysicalParams,
    assemble,
    correlation_at,
    residual_oscillation,
    squeezed_bath_moments,
    stability_margin,
    steady_covariance,
    thermal_occupation,
)
from cluster_pack.synthesis import CouplingPlan, synthesize
from cluster_pack.target import rect_target, target_covariance


def single_mode_plan(g):
    return CouplingPlan(g0=np.array([g], dtype=complex), Gbar=np.zeros((0, 1)), detunings=np.zeros(0),
                        kappa=np.zeros(0), delta_omega=np.zeros(1), policy='mixed',
                        lam=np.zeros(0), D=np.zeros(0))


def test_thermal_occupation():
    assert thermal_occupation(GHZ, 0.0) == 0.0
    assert thermal_occupation(GHZ, 0.01) == pytest.approx(0.0083, rel=0.02)
    assert thermal_occupation(np.array([GHZ, 2 * GHZ]), 0.0).tolist() == [0.0, 0.0]


def test_squeezed_bath():
    assert squeezed_bath_moments(0.0, 0.4) == (0.0, 0j)
    ns, ms = squeezed_bath_moments(1.0, 0.0)
    assert ns == pytest.approx(np.sinh(1.0) ** 2)
    assert abs(ms) ** 2 == pytest.approx(ns * (ns + 1))
    with pytest.raises(ValidationError):
        squeezed_bath_moments(-0.1, 0.0)


def test_params_validation():
    with pytest.raises(ValidationError):
        PhysicalParams(delta_omega=[0.0], kappa=[0.1], Delta=[1.0], gamma=0.0)
    with pytest.raises(ValidationError):
        PhysicalParams(delta_omega=[0.0], kappa=[0.1, 0.1], Delta=[1.0], gamma=1e-3)


def test_sideband_cooling():
    # resolved-sideband cooling of one mechanical mode, counter-rotating heating included
    g, kappa, gamma, T = 0.005, 0.05, 1e-5, 0.5
    params = PhysicalParams(delta_omega=[0.0], kappa=[kappa], Delta=[1.0], gamma=gamma, T=T)
    result = steady_covariance(assemble(params, single_mode_plan(g)))
    nbar = params.occupations()[0]
    cool = 2 * g ** 2 / kappa
    heat = 2 * g ** 2 * kappa / (kappa ** 2 + 4)
    expected = (2 * gamma * nbar + heat) / (2 * gamma + cool - heat)
    measured = (np.trace(result.covariance) / 2 - 1) / 2
    assert measured == pytest.approx(expected, rel=0.05)
    assert result.margin > 0
    assert result.physical_residual > -1e-8


def test_blue_detuned_drive_is_unstable():
    params = PhysicalParams(delta_omega=[0.0], kappa=[0.05], Delta=[-1.0], gamma=1e-5)
    model = assemble(params, single_mode_plan(0.3))
    assert stability_margin(model) < 0
    with pytest.raises(InstabilityError) as err:
        steady_covariance(model)
    assert err.value.margin < 0


def test_assemble_checks_shapes():
    params = PhysicalParams(delta_omega=[0.0, 0.0], kappa=[0.05], Delta=[1.0], gamma=1e-5)
    with pytest.raises(ValidationError):
        assemble(params, single_mode_plan(0.01))


def positive_line_model(r=0.5):
    spec = rect_target(grid_graph(1, 3), 0.05, 0.05, r)
    plan = synthesize(spec, 3.0, 0.5, policy='all_positive')
    params = PhysicalParams.from_plan(plan, 0.5, 1.0, 0.2, T=0.0, r=r)
    return assemble(params, plan, spec)


def test_matches_time_integration():
    model = positive_line_model()
    half = model.dim // 2
    c = np.zeros((model.dim, model.dim), dtype=complex)
    c[:half, half:] = np.eye(half)
    eps = model.eps_L0

    def rhs(t, c):
        noise = (model.diff_static + model.diff_minus * np.exp(-2j * eps * t)
                 + model.diff_plus * np.exp(2j * eps * t))
        return model.drift @ c + c @ model.drift.T + noise

    dt, steps = 0.01, 10000
    t = 0.0
    for _ in range(steps):
        k1 = rhs(t, c)
        k2 = rhs(t + dt / 2, c + dt / 2 * k1)
        k3 = rhs(t + dt / 2, c + dt / 2 * k2)
        k4 = rhs(t + dt, c + dt * k3)
        c = c + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t += dt
    assert np.max(np.abs(c - correlation_at(model, t))) < 1e-6


def test_squeezed_bath_leaves_residual_oscillation():
    assert residual_oscillation(positive_line_model(r=0.5)) > 0.0


def test_steady_state_is_physical():
    result = steady_covariance(positive_line_model())
    e = result.covariance
    assert np.allclose(e, e.T)
    assert result.physical_residual > -1e-8
    assert result.to_record()['stability_margin'] == result.margin


def line_model(r=1.0, T=0.01, delta_omega=None):
    spec = rect_target(grid_graph(1, 3), 3.4e-3, 6e-4, r)
    plan = synthesize(spec, 30.0, 0.01, delta_omega=delta_omega)
    params = PhysicalParams.from_plan(plan, 0.01, 1.0, 1e-8, T=T, r=r)
    return spec, plan, assemble(params, plan, spec)


def test_residual_oscillation_is_small():
    _, _, model = line_model()
    assert residual_oscillation(model) <= 1e-2


def test_vacuum_bath_gives_physical_state():
    _, _, model = line_model(r=0.0, T=0.0)
    e = steady_covariance(model).covariance
    assert symplectic_eigenvalues(e).min() >= 1 - 1e-8


def test_decoupled_mode_thermalizes():
    params = PhysicalParams(delta_omega=[0.0], kappa=[0.05], Delta=[1.0], gamma=1e-3, T=0.01)
    model = assemble(params, single_mode_plan(0.0))
    assert stability_margin(model) == pytest.approx(1e-3)
    e = steady_covariance(model).covariance
    nbar = thermal_occupation(GHZ, 0.01)
    assert np.allclose(e, (1 + 2 * nbar) * np.eye(2), atol=1e-9)
    assert e[0, 0] == pytest.approx(1.0166, rel=1e-3)


def test_detuned_line_has_extra_optical_mode():
    spec, plan, model = line_model(delta_omega=[1.3e-4, -0.4e-4, -0.9e-4])
    assert plan.M == 3
    assert model.drift.shape == (2 * (plan.M + 1 + 3),) * 2
    e = steady_covariance(model).covariance
    assert fidelity(e, target_covariance(spec), spec.n_nodes) >= 0.98
