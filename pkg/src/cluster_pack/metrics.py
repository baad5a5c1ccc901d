from dataclasses import dataclass

import numpy as np

from cluster_pack.commons import ValidationError, symplectic_form

PURITY_TOL = 1e-6
CLAMP_TOL = 1e-9


def fidelity(E1, E2, N=None):
    """Gaussian fidelity 2^N / sqrt(det(E1 + E2)), valid when one state is pure."""
    E1 = np.asarray(E1, dtype=float)
    E2 = np.asarray(E2, dtype=float)
    if E1.shape != E2.shape:
        raise ValidationError(f'Covariance shapes {E1.shape} and {E2.shape} differ.')
    n = E1.shape[0] // 2 if N is None else int(N)
    total = E1 + E2
    if np.linalg.eigvalsh((total + total.T) / 2).min() <= 0:
        raise ValidationError('E1 + E2 is not positive definite.')
    _, logdet = np.linalg.slogdet(total)
    f = float(np.exp(n * np.log(2.0) - 0.5 * logdet))
    if f > 1:
        if f > 1 + CLAMP_TOL:
            print(f'[!] Fidelity {f:.12g} clamped to 1.')
        f = 1.0
    return f


@dataclass(eq=False)
class NullifierSet:
    Q: np.ndarray

    @property
    def n_nodes(self):
        return self.Q.shape[0]


def nullifier_matrix(graph, theta):
    """Q = (Theta_s - A Theta_c, Theta_c + A Theta_s) for nullifiers X = Q x."""
    theta = np.asarray(theta, dtype=float)
    a = graph.adjacency
    tc = np.diag(np.cos(theta))
    ts = np.diag(np.sin(theta))
    q = np.hstack([ts - a @ tc, tc + a @ ts])
    # k pi/2 phases leave 1e-16 residue in cos and sin
    q[np.abs(q) < 1e-15] = 0.0
    return NullifierSet(q)


def nullifier_variances(E, nullifiers):
    q = nullifiers.Q
    E = np.asarray(E, dtype=float)
    if E.shape != (q.shape[1], q.shape[1]):
        raise ValidationError(f'Covariance {E.shape} does not match nullifiers {q.shape}.')
    return np.diag(q @ E @ q.T).copy()


def target_nullifier_variances(graph, z):
    """Nullifier variances of the rectangular-grid target: (1 + degree) e^{-2z}."""
    return (1 + graph.degrees) * np.exp(-2 * z)


def symplectic_eigenvalues(E):
    n = E.shape[0] // 2
    nu = np.sort(np.abs(np.linalg.eigvals(1j * symplectic_form(n) @ E)))
    return nu[::2]


@dataclass
class PurityReport:
    det: float
    min_symplectic: float

    @property
    def physical(self):
        return self.min_symplectic >= 1 - PURITY_TOL

    @property
    def pure(self):
        return abs(self.det - 1) <= PURITY_TOL and abs(self.min_symplectic - 1) <= PURITY_TOL


def purity_check(E):
    E = np.asarray(E, dtype=float)
    report = PurityReport(float(np.linalg.det(E)), float(symplectic_eigenvalues(E).min()))
    if not report.physical:
        print(f'[!] Non-physical covariance: minimum symplectic eigenvalue {report.min_symplectic:.6g}.')
    return report
