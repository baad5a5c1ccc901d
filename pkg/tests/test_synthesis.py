import numpy as np
import pytest

from cluster_pack.commons import SynthesisError
from cluster_pack.graph import grid_graph
from cluster_pack.synthesis import (
    assign_detunings,
    drive_parameters,
    g0_vector,
    response_d,
    round_trip_residual,
    synthesize,
    wj_matrix,
)
from cluster_pack.target import common_phase, rect_target

DETUNED = [1.3e-4, -0.4e-4, -0.9e-4]


@pytest.fixture
def line3_spec(line3):
    return rect_target(line3, 3.4e-3, 6e-4, 1.0)


def test_resonant_line_needs_two_modes(line3_spec):
    plan = synthesize(line3_spec, 30.0, 0.01)
    assert plan.M == 2
    assert plan.G.shape == (3, 3)


def test_detuned_line_needs_three_modes(line3_spec):
    assert synthesize(line3_spec, 30.0, 0.01, delta_omega=DETUNED).M == 3


@pytest.mark.parametrize('rows, cols', [(1, 3), (2, 3), (3, 3)])
@pytest.mark.parametrize('policy', ['mixed', 'all_positive'])
def test_round_trip(rows, cols, policy):
    spec = rect_target(grid_graph(rows, cols), 3.4e-3, 6e-4, 1.0)
    plan = synthesize(spec, 30.0, 0.01, policy=policy)
    assert round_trip_residual(plan, wj_matrix(spec)) < 1e-9
    assert np.all(plan.D * plan.lam > 0)
    if policy == 'all_positive':
        assert np.all(plan.detunings > 0)


def test_mixed_policy_uses_both_signs(line3_spec):
    plan = synthesize(line3_spec, 30.0, 0.01)
    assert plan.summary()['detuning_signs'] in ('+-', '-+')


def test_all_positive_overrides_offsets(line3_spec, capsys):
    plan = synthesize(line3_spec, 30.0, 0.01, policy='all_positive', delta_omega=DETUNED)
    assert not np.allclose(plan.delta_omega, DETUNED)
    assert '[!]' in capsys.readouterr().out


def test_interaction_is_real_symmetric(line3_spec):
    w = wj_matrix(line3_spec)
    assert w.dtype == float
    assert np.allclose(w, w.T)
    assert np.sort(np.linalg.eigvalsh(w)) == pytest.approx([-np.sqrt(2) * 6e-4, 0.0, np.sqrt(2) * 6e-4], abs=1e-12)


def test_single_node_coupling():
    spec = rect_target(grid_graph(1, 1), 0.5, 0.3, 1.0)
    assert np.allclose(g0_vector(spec), [0.5])
    plan = synthesize(spec, 30.0, 0.01)
    assert plan.M == 0
    assert plan.G.shape == (1, 1)


def test_g0_has_common_phase(line3_spec):
    g0 = g0_vector(line3_spec)
    ref = common_phase(g0)
    assert np.allclose(np.sin(np.angle(g0) - ref), 0.0, atol=1e-12)
    assert np.linalg.norm(g0) == pytest.approx(3.4e-3)


def test_drive_phase_rotation(line3_spec):
    plan = synthesize(line3_spec, 30.0, 0.01, drive_phase=0.3)
    assert common_phase(plan.g0) == pytest.approx(0.3)
    assert plan.phase_shift != 0.0
    assert np.allclose(np.abs(plan.g0), np.abs(g0_vector(line3_spec)))


def test_bath_phase_enters_g0(line3_spec):
    rotated = g0_vector(line3_spec, bath_phase=0.2)
    assert np.allclose(rotated, g0_vector(line3_spec) * np.exp(0.2j))


def test_response_sign():
    assert response_d(30.0, 0.01) < 0
    assert response_d(-30.0, 0.01) > 0
    assert response_d(30.0, 0.01) == pytest.approx(-2 / 30.0, rel=1e-2)


def test_detunings_follow_eigenvalue_signs():
    signed, d = assign_detunings([-1e-3, 2e-3], 30.0, 0.01)
    assert signed[0] > 0 and signed[1] < 0
    assert np.all(d * np.array([-1e-3, 2e-3]) > 0)


def test_singular_response_rejected():
    with pytest.raises(SynthesisError):
        assign_detunings([1e-3], 0.8, 0.6)


def test_unknown_policy(line3_spec):
    with pytest.raises(SynthesisError):
        synthesize(line3_spec, 30.0, 0.01, policy='random')


def test_all_positive_needs_large_detuning(line3_spec):
    with pytest.raises(SynthesisError):
        synthesize(line3_spec, 0.5, 0.01, policy='all_positive')


def test_drive_parameters(line3_spec):
    plan = synthesize(line3_spec, 30.0, 0.01)
    kappa = np.full(plan.M + 1, 0.01)
    Delta = np.concatenate([[1.0], plan.detunings])
    phase = np.exp(1j * common_phase(plan.g0))
    bare = np.vstack([(plan.g0 / phase).real, plan.Gbar])
    drive = drive_parameters(plan, bare, kappa, Delta)
    assert drive.residual < 1e-9
    assert np.allclose(drive.alpha[1:], 1.0)
    assert np.allclose(drive.amplitude[1:], np.abs(0.01 + 1j * plan.detunings))
    with pytest.raises(SynthesisError, match='Bare-coupling infeasible'):
        drive_parameters(plan, np.ones((plan.M + 1, 3)), kappa, Delta)
