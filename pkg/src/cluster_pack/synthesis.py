"""
Coupling synthesis: turns a TargetSpec into the optomechanical couplings that
realize the engineered phonon-phonon Hamiltonian.
"""
from dataclasses import dataclass

import numpy as np

from cluster_pack.commons import SynthesisError, wrap_half_turn
from cluster_pack.numerics import DEFAULT_TOL
from cluster_pack.target import chain_matrix, common_phase, phase_misalignment

POLICIES = ('mixed', 'all_positive')
ROUND_TRIP_TOL = 1e-9


@dataclass(eq=False)
class CouplingPlan:
    g0: np.ndarray
    Gbar: np.ndarray
    detunings: np.ndarray
    kappa: np.ndarray
    delta_omega: np.ndarray
    policy: str
    lam: np.ndarray
    D: np.ndarray
    phase_shift: float = 0.0

    @property
    def M(self):
        return self.Gbar.shape[0]

    @property
    def n_nodes(self):
        return self.g0.shape[0]

    @property
    def G(self):
        """Full (M+1) x N coupling matrix, zero-th mode first."""
        return np.vstack([self.g0[None, :], self.Gbar.astype(complex)])

    def summary(self):
        return {
            'modes': self.M,
            'policy': self.policy,
            'detuning_signs': ''.join('+' if d > 0 else '-' for d in self.detunings),
            'phase_shift': self.phase_shift,
            'max_coupling': float(np.abs(self.G).max()),
        }


def wj_matrix(spec, tol=DEFAULT_TOL):
    """W^J = i V Phi Jbar Phi* V^dag, checked to be real symmetric."""
    n = spec.n_nodes
    if n == 1:
        return np.zeros((1, 1))
    jbar = chain_matrix(spec.chain)
    w = 1j * spec.V @ spec.Phi @ jbar @ spec.Phi.conj() @ spec.V.conj().T
    scale = np.abs(spec.chain).max()
    imag = np.linalg.norm(w.imag) / scale
    asym = np.linalg.norm(w - w.T) / scale
    if imag > tol or asym > tol:
        raise SynthesisError(f'W^J is not real symmetric (imaginary {imag:.3e}, asymmetric '
                             f'{asym:.3e}); constraints violated upstream.')
    w = w.real
    return (w + w.T) / 2


def drive_phase_shift(g0, drive_phase):
    """Rotation that gives the zero-th couplings the common phase drive_phase (mod pi)."""
    return wrap_half_turn(drive_phase - common_phase(g0))


def g0_vector(spec, drive_phase=None, bath_phase=0.0, tol=DEFAULT_TOL):
    """
    Couplings of the zero-th optical mode, G_0k = -i J0 e^{-i(phi_1 - 2 bath_phase)/2} V*_k1,
    optionally rotated onto the common phase drive_phase.
    """
    g = -1j * spec.J0 * np.exp(-0.5j * (spec.phi[0] - 2 * bath_phase)) * spec.V[:, 0].conj()
    misalignment = phase_misalignment(g)
    if misalignment > tol:
        raise SynthesisError(f'First column of V is not phase aligned (residual {misalignment:.3e}).')
    if drive_phase is not None:
        g = g * np.exp(1j * drive_phase_shift(g, drive_phase))
    return g


def decompose_interaction(WJ, delta_omega, rank_tol=1e-10):
    """Nonzero eigenpairs of W^J - W^delta as (lam, T) with T rows the eigenvectors."""
    w = np.asarray(WJ, dtype=float) - np.diag(np.asarray(delta_omega, dtype=float))
    lam, vec = np.linalg.eigh((w + w.T) / 2)
    scale = np.abs(lam).max()
    if scale == 0:
        return np.zeros(0), np.zeros((0, w.shape[0]))
    keep = np.abs(lam) > rank_tol * scale
    return lam[keep], vec[:, keep].T


def response_d(Delta, kappa, omega0=1.0):
    a = kappa ** 2 + Delta ** 2 - omega0 ** 2
    return -2 * Delta * a / (a ** 2 + 4 * kappa ** 2 * omega0 ** 2)


def _per_mode(value, m, name):
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        return np.full(m, float(arr))
    if arr.shape != (m,):
        raise SynthesisError(f'{name} needs 1 or {m} values, got {arr.size}.')
    return arr


def assign_detunings(lam, delta_mag, kappa, omega0=1.0):
    """Signed detunings with D_jj * lam_j > 0, and the resulting D_jj."""
    lam = np.asarray(lam, dtype=float)
    m = lam.size
    mag = _per_mode(delta_mag, m, 'delta')
    kap = _per_mode(kappa, m, 'kappa')
    if np.any(mag <= 0):
        raise SynthesisError('Detuning magnitudes must be positive.')
    if np.any(np.abs(kap ** 2 + mag ** 2 - omega0 ** 2) <= 1e-12):
        raise SynthesisError('D vanishes at kappa^2 + Delta^2 = omega0^2; choose a different Delta.')
    d_plus = response_d(mag, kap, omega0)
    signs = np.where(d_plus * lam > 0, 1.0, -1.0)
    return signs * mag, signs * d_plus


def coupling_matrix(lam, T, D):
    """Gbar = sqrt(D^-1 lam) T."""
    lam = np.asarray(lam, dtype=float)
    T = np.asarray(T, dtype=float)
    if lam.size == 0:
        return np.zeros((0, T.shape[1]))
    ratio = lam / np.asarray(D, dtype=float)
    if np.any(ratio <= 0):
        raise SynthesisError('D_jj and lam_j must share their sign for every auxiliary mode.')
    return np.sqrt(ratio)[:, None] * T


def positive_detuning_offsets(WJ):
    """delta_omega making W^J - W^delta negative semidefinite with top eigenvalue 0."""
    w = np.asarray(WJ, dtype=float)
    off = w - np.diag(np.diag(w))
    delta0 = np.linalg.eigvalsh(off).max()
    return np.diag(w) + delta0


def round_trip_residual(plan, WJ):
    rebuilt = np.diag(plan.delta_omega) + plan.Gbar.conj().T @ np.diag(plan.D) @ plan.Gbar
    scale = max(np.linalg.norm(WJ), np.abs(plan.delta_omega).max(initial=0.0), 1e-300)
    return float(np.linalg.norm(rebuilt - WJ) / scale)


def synthesize(spec, delta_mag, kappa, policy='mixed', delta_omega=None, drive_phase=None,
               bath_phase=0.0, rank_tol=1e-10, tol=DEFAULT_TOL):
    if policy not in POLICIES:
        raise SynthesisError(f'Unknown detuning policy {policy!r}; use one of {POLICIES}.')
    n = spec.n_nodes
    wj = wj_matrix(spec, tol)

    g0 = g0_vector(spec, bath_phase=bath_phase, tol=tol)
    shift = 0.0
    if drive_phase is not None:
        shift = drive_phase_shift(g0, drive_phase)
        g0 = g0 * np.exp(1j * shift)

    configured = np.zeros(n) if delta_omega is None else np.asarray(delta_omega, dtype=float)
    if configured.shape != (n,):
        raise SynthesisError(f'delta_omega needs {n} entries, got {configured.size}.')
    if policy == 'all_positive':
        offsets = positive_detuning_offsets(wj)
        if delta_omega is not None and not np.allclose(configured, offsets):
            print('[!] all_positive policy overrides the configured mechanical offsets.')
        configured = offsets

    lam, T = decompose_interaction(wj, configured, rank_tol)
    detunings, D = assign_detunings(lam, delta_mag, kappa)
    if policy == 'all_positive' and np.any(detunings < 0):
        raise SynthesisError('all_positive policy needs kappa^2 + Delta^2 > omega0^2.')
    gbar = coupling_matrix(lam, T, D)

    plan = CouplingPlan(g0=g0, Gbar=gbar, detunings=detunings,
                        kappa=_per_mode(kappa, lam.size, 'kappa'), delta_omega=configured,
                        policy=policy, lam=lam, D=D, phase_shift=shift)
    residual = round_trip_residual(plan, wj)
    if residual > ROUND_TRIP_TOL:
        raise SynthesisError(f'Synthesis round trip residual {residual:.3e} exceeds {ROUND_TRIP_TOL:g}.')
    return plan


@dataclass
class DriveParameters:
    alpha: np.ndarray
    amplitude: np.ndarray
    phase: np.ndarray
    residual: float


def drive_parameters(plan, bare_couplings, kappa, Delta, tol=1e-9):
    """
    Per-mode drive amplitude E_j and phase phi_Lj reproducing G_jk = g0_jk alpha_j
    with alpha_j = -i E_j e^{i phi_Lj} / (kappa_j + i Delta_j).
    """
    G = plan.G
    bare = np.asarray(bare_couplings, dtype=float)
    if bare.shape != G.shape:
        raise SynthesisError(f'Bare couplings have shape {bare.shape}, expected {G.shape}.')
    kappa = np.asarray(kappa, dtype=float)
    Delta = np.asarray(Delta, dtype=float)

    alpha = np.zeros(G.shape[0], dtype=complex)
    residuals = np.zeros(G.shape[0])
    for j, (row, g) in enumerate(zip(bare, G)):
        norm_g = np.linalg.norm(g)
        weight = row @ row
        if weight == 0:
            residuals[j] = 0.0 if norm_g == 0 else 1.0
            continue
        alpha[j] = (row @ g) / weight
        residuals[j] = np.linalg.norm(g - alpha[j] * row) / max(norm_g, 1e-300)
    worst = int(np.argmax(residuals))
    if residuals[worst] > tol:
        raise SynthesisError(f'Bare-coupling infeasible: row {worst} residual {residuals[worst]:.3e}.')

    response = kappa + 1j * Delta
    amplitude = np.abs(alpha) * np.abs(response)
    phase = np.angle(1j * alpha * response)
    return DriveParameters(alpha=alpha, amplitude=amplitude, phase=phase, residual=float(residuals.max()))
