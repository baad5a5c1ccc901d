"""
Target cluster state: Z0 from the adjacency matrix, the passive unitary V,
chain couplings, realizability residuals and the target covariance matrix.
"""
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from cluster_pack.commons import (
    ValidationError,
    quadrature_map,
    swap_matrix,
    unitarity_residual,
    wrap_half_turn,
)
from cluster_pack.graph import ClusterGraph
from cluster_pack.numerics import DEFAULT_TOL, symmetric_unitary_sqrt

ROW_PHASES = ('theta', 'printed')


@dataclass(eq=False)
class TargetSpec:
    graph: ClusterGraph
    V: np.ndarray
    theta: np.ndarray
    phi: np.ndarray
    J0: float
    J: float
    z: float
    chain: Optional[np.ndarray] = field(default=None)

    def __post_init__(self):
        n = self.graph.n_nodes
        self.V = np.asarray(self.V, dtype=complex)
        self.theta = np.asarray(self.theta, dtype=float)
        self.phi = np.asarray(self.phi, dtype=float)
        if self.chain is None:
            self.chain = np.full(n - 1, float(self.J))
        self.chain = np.asarray(self.chain, dtype=float)
        if self.V.shape != (n, n):
            raise ValidationError(f'V has shape {self.V.shape}, expected {(n, n)}.')
        if self.theta.shape != (n,) or self.phi.shape != (n,) or self.chain.shape != (n - 1,):
            raise ValidationError('theta, phi and chain must have N, N and N-1 entries.')
        res = unitarity_residual(self.V)
        if res > DEFAULT_TOL:
            raise ValidationError(f'V is not unitary: residual {res:.3e}.')
        if self.J0 <= 0 or self.J <= 0 or np.any(self.chain <= 0):
            raise ValidationError(f'Chain couplings must be positive (J0={self.J0}, J={self.J}).')

    @property
    def n_nodes(self):
        return self.graph.n_nodes

    @property
    def Theta(self):
        return np.diag(np.exp(-1j * self.theta))

    @property
    def Phi(self):
        return np.diag(np.exp(0.5j * self.phi))


def z0_matrix(graph):
    """Z0 = -i (A - iI)(A + iI)^-1 via the real eigendecomposition of A."""
    d, q = np.linalg.eigh(graph.adjacency)
    f = -1j * (d - 1j) / (d + 1j)
    z0 = (q * f) @ q.T
    return (z0 + z0.T) / 2


def chain_matrix(chain):
    """N x N real antisymmetric chain matrix with J_l below and -J_l above the diagonal."""
    chain = np.atleast_1d(np.asarray(chain, dtype=float))
    n = chain.size + 1
    jbar = np.zeros((n, n))
    idx = np.arange(n - 1)
    jbar[idx + 1, idx] = chain
    jbar[idx, idx + 1] = -chain
    return jbar


def rect_target(graph, J0, J, z, row_phase='theta'):
    """
    Closed-form target for grid graphs: phi_l = 0, theta_k = k pi/2 and
    V = P sqrt(-i Z0) with row phases P.

    row_phase='theta' uses P = Theta (diagonal e^{-i k pi/2}); 'printed' uses
    the literal e^{-i k pi} prefactor, which is kept for comparison only.
    For a single node V = [-i] under 'theta' and V = [-1] under 'printed';
    both give the same covariance up to a phase-space rotation of that node.
    """
    if row_phase not in ROW_PHASES:
        raise ValidationError(f'row_phase must be one of {ROW_PHASES}, got {row_phase!r}.')
    if not graph.odd_side_ok:
        print('[!] Grid has no odd side; realizability is left to the constraint checker.')
    n = graph.n_nodes
    k = np.arange(1, n + 1)
    theta = k * np.pi / 2
    root = symmetric_unitary_sqrt(-1j * z0_matrix(graph))
    if row_phase == 'theta':
        rows = np.exp(-1j * theta)
    else:
        rows = np.exp(-1j * k * np.pi)
    return TargetSpec(graph=graph, V=rows[:, None] * root, theta=theta, phi=np.zeros(n),
                      J0=float(J0), J=float(J), z=float(z))


def general_target(graph, theta, phi, J0, chain, z, orthogonal=None):
    """V = Theta sqrt(-i Z0) O0 Phi* for user-chosen phases, chain and orthogonal O0."""
    n = graph.n_nodes
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    o0 = np.eye(n) if orthogonal is None else np.asarray(orthogonal, dtype=float)
    if np.linalg.norm(o0.T @ o0 - np.eye(n)) > DEFAULT_TOL:
        raise ValidationError('O0 must be real orthogonal.')
    root = symmetric_unitary_sqrt(-1j * z0_matrix(graph))
    v = np.exp(-1j * theta)[:, None] * (root @ o0) * np.exp(-0.5j * phi)[None, :]
    chain = np.asarray(chain, dtype=float)
    return TargetSpec(graph=graph, V=v, theta=theta, phi=phi, J0=float(J0),
                      J=float(chain.max()) if chain.size else 1.0, z=float(z), chain=chain)


def common_phase(vector):
    """Phase (mod pi) of the largest-magnitude entry."""
    v = np.asarray(vector)
    return wrap_half_turn(np.angle(v[np.argmax(np.abs(v))]))


def phase_misalignment(vector, tol=1e-12):
    """Largest distance (mod pi) between entry phases; entries below tol relative are skipped."""
    v = np.asarray(vector)
    mag = np.abs(v)
    if mag.max() == 0:
        return 0.0
    keep = mag > tol * mag.max()
    ref = np.angle(v[np.argmax(mag)])
    return float(max(abs(wrap_half_turn(a - ref)) for a in np.angle(v[keep])))


@dataclass
class ConstraintReport:
    phase_residual: float
    anticommutator_residual: float
    tol: float = DEFAULT_TOL

    @property
    def realizable(self):
        return self.phase_residual <= self.tol and self.anticommutator_residual <= self.tol

    def to_record(self):
        return {
            'phase_residual': self.phase_residual,
            'anticommutator_residual': self.anticommutator_residual,
            'realizable': self.realizable,
        }


def check_constraints(spec, tol=DEFAULT_TOL):
    """
    Residuals of the two realizability conditions: common phase of the first
    column of V (mod pi) and the anticommutator of the chain matrix with
    Phi V^T V Phi, normalized by the largest chain coupling.
    """
    phase = phase_misalignment(spec.V[:, 0])
    if spec.n_nodes == 1:
        return ConstraintReport(phase, 0.0, tol)
    jbar = chain_matrix(spec.chain)
    x = spec.Phi @ spec.V.T @ spec.V @ spec.Phi
    anti = np.linalg.norm(jbar @ x + x @ jbar) / np.abs(spec.chain).max()
    return ConstraintReport(phase, float(anti), tol)


def bogoliubov_matrix(spec):
    ch, sh = np.cosh(spec.z), np.sinh(spec.z)
    v, phi2 = spec.V, spec.Phi @ spec.Phi
    return np.block([[ch * v, sh * v @ phi2],
                     [sh * v.conj() @ phi2.conj(), ch * v.conj()]])


def target_covariance(spec):
    """Quadrature covariance (x..., p...) of the target state; vacuum maps to I."""
    n = spec.n_nodes
    b = bogoliubov_matrix(spec)
    r = quadrature_map(n)
    e = (r @ b @ swap_matrix(n) @ b.T @ r.T / 2).real
    return (e + e.T) / 2
