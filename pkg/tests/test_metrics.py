import numpy as np
import pytest
from scipy.linalg import block_diag

from cluster_pack.commons import ValidationError
from cluster_pack.graph import from_adjacency, grid_graph
from cluster_pack.metrics import (
    fidelity,
    nullifier_matrix,
    nullifier_variances,
    purity_check,
    symplectic_eigenvalues,
    target_nullifier_variances,
)
from cluster_pack.target import rect_target, target_covariance


def squeezed(z):
    return np.diag([np.exp(2 * z), np.exp(-2 * z)])


def test_fidelity_identities():
    assert fidelity(np.eye(4), np.eye(4)) == pytest.approx(1.0)
    e = squeezed(1.0)
    assert fidelity(e, e) == pytest.approx(1.0)
    assert fidelity(e, np.eye(2)) == pytest.approx(0.6481, abs=1e-4)
    assert fidelity(e, np.eye(2)) == pytest.approx(fidelity(np.eye(2), e))


def test_fidelity_of_pure_targets():
    spec_a = rect_target(grid_graph(1, 3), 0.5, 0.3, 0.4)
    spec_b = rect_target(grid_graph(1, 3), 0.5, 0.3, 0.9)
    a, b = target_covariance(spec_a), target_covariance(spec_b)
    assert fidelity(a, b) == pytest.approx(fidelity(b, a))
    assert fidelity(a, b) < 1.0
    assert fidelity(a, a, 3) == pytest.approx(1.0)


def test_fidelity_clamps(capsys):
    assert fidelity(0.999 * np.eye(2), 0.999 * np.eye(2)) == 1.0
    assert '[!]' in capsys.readouterr().out


def test_fidelity_rejects_bad_input():
    with pytest.raises(ValidationError):
        fidelity(np.eye(2), np.eye(4))
    with pytest.raises(ValidationError):
        fidelity(-np.eye(2), -np.eye(2))


@pytest.mark.parametrize('rows, cols', [(1, 3), (2, 3), (3, 3), (2, 2)])
def test_vacuum_variances(rows, cols):
    graph = grid_graph(rows, cols)
    spec = rect_target(graph, 0.5, 0.3, 0.0)
    variances = nullifier_variances(np.eye(2 * graph.n_nodes), nullifier_matrix(graph, spec.theta))
    assert np.allclose(variances, 1 + graph.degrees, atol=1e-12)


def test_path_vacuum_variances(line3):
    q = nullifier_matrix(line3, np.arange(1, 4) * np.pi / 2)
    assert nullifier_variances(np.eye(6), q).tolist() == [2.0, 3.0, 2.0]


def test_target_variances_drop_with_squeezing(line3):
    previous = None
    for z in (0.0, 0.5, 1.0, 1.5):
        spec = rect_target(line3, 0.5, 0.3, z)
        variances = nullifier_variances(target_covariance(spec), nullifier_matrix(line3, spec.theta))
        assert np.allclose(variances, target_nullifier_variances(line3, z), atol=1e-10)
        if previous is not None:
            assert np.all(variances < previous)
        previous = variances


def test_variances_follow_relabeling(line3, rng):
    x = rng.normal(size=(6, 6))
    e = x @ x.T + np.eye(6)
    theta = np.array([0.3, 1.1, -0.4])
    perm = np.array([2, 0, 1])
    p = np.eye(3)[perm]
    relabeled = from_adjacency(p @ line3.adjacency @ p.T)
    pp = block_diag(p, p)
    original = nullifier_variances(e, nullifier_matrix(line3, theta))
    moved = nullifier_variances(pp @ e @ pp.T, nullifier_matrix(relabeled, theta[perm]))
    assert np.allclose(moved, original[perm])


def test_symplectic_eigenvalues():
    assert np.allclose(symplectic_eigenvalues(squeezed(1.0)), [1.0])
    assert np.allclose(symplectic_eigenvalues(3 * np.eye(4)), [3.0, 3.0])


def test_purity_check(capsys):
    vacuum = purity_check(np.eye(4))
    assert vacuum.det == pytest.approx(1.0)
    assert vacuum.pure
    n = 0.0083
    thermal = purity_check((1 + 2 * n) * np.eye(6))
    assert thermal.det == pytest.approx(1.0166 ** 6)
    assert thermal.min_symplectic == pytest.approx(1.0166)
    assert thermal.physical and not thermal.pure
    broken = purity_check(0.5 * np.eye(2))
    assert not broken.physical
    assert '[!]' in capsys.readouterr().out
