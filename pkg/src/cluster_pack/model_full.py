"""
Full linear Langevin model of N mechanical and M+1 optical modes.

Mode order is (a_0..a_M, b_1..b_N, a_0^dag..a_M^dag, b_1^dag..b_N^dag).
Rates are in units of omega0; omega0 itself (rad/s) only enters the thermal
occupation.
"""
from dataclasses import dataclass

import numpy as np
from scipy import constants

from cluster_pack.commons import (
    InstabilityError,
    ValidationError,
    covariance_from_correlation,
    symplectic_form,
)
from cluster_pack.numerics import (
    DEFAULT_TOL,
    solve_lyapunov,
    solve_shifted_lyapunov,
    spectral_abscissa,
)

STABILITY_TOL = 1e-12
PHYSICALITY_TOL = 1e-8
GHZ = 2 * np.pi * 1e9


def thermal_occupation(omega, T):
    """Bose-Einstein occupation at angular frequency omega (rad/s) and temperature T (K)."""
    omega = np.asarray(omega, dtype=float)
    if T <= 0:
        return np.zeros_like(omega) if omega.ndim else 0.0
    n = 1.0 / np.expm1(constants.hbar * omega / (constants.k * T))
    return n if omega.ndim else float(n)


def squeezed_bath_moments(r, phi0):
    """(n_s, m_s) of a broadband squeezed bath."""
    if r < 0:
        raise ValidationError(f'Squeezing parameter must be non-negative, got {r}.')
    return float(np.sinh(r) ** 2), complex(np.exp(2j * phi0) * np.sinh(r) * np.cosh(r))


@dataclass(eq=False)
class PhysicalParams:
    delta_omega: np.ndarray
    kappa: np.ndarray
    Delta: np.ndarray
    gamma: np.ndarray
    T: float = 0.0
    r: float = 0.0
    phi0: float = 0.0
    eps_L0: float = 1.0
    omega0: float = GHZ

    def __post_init__(self):
        self.delta_omega = np.atleast_1d(np.asarray(self.delta_omega, dtype=float))
        self.kappa = np.atleast_1d(np.asarray(self.kappa, dtype=float))
        self.Delta = np.atleast_1d(np.asarray(self.Delta, dtype=float))
        self.gamma = np.broadcast_to(np.asarray(self.gamma, dtype=float),
                                     self.delta_omega.shape).copy()
        if self.kappa.shape != self.Delta.shape:
            raise ValidationError(f'kappa {self.kappa.shape} and Delta {self.Delta.shape} differ.')
        if np.any(self.kappa <= 0) or np.any(self.gamma <= 0):
            raise ValidationError('Decay rates kappa and gamma must be positive.')
        if self.T < 0 or self.r < 0 or self.omega0 <= 0:
            raise ValidationError('Temperature, squeezing and omega0 must be non-negative.')

    @property
    def n_mech(self):
        return self.delta_omega.size

    @property
    def n_optical(self):
        return self.kappa.size

    def occupations(self):
        return thermal_occupation(self.omega0 * (1 + self.delta_omega), self.T)

    @classmethod
    def from_plan(cls, plan, kappa0, Delta0, gamma, T=0.0, r=0.0, phi0=0.0, eps_L0=1.0, omega0=GHZ):
        return cls(delta_omega=plan.delta_omega,
                   kappa=np.concatenate([[kappa0], plan.kappa]),
                   Delta=np.concatenate([[Delta0], plan.detunings]),
                   gamma=gamma, T=T, r=r, phi0=phi0, eps_L0=eps_L0, omega0=omega0)


@dataclass(eq=False)
class FullModel:
    drift: np.ndarray
    diff_static: np.ndarray
    diff_minus: np.ndarray
    diff_plus: np.ndarray
    eps_L0: float
    n_optical: int
    n_mech: int

    @property
    def dim(self):
        return self.drift.shape[0]

    def mechanical_indices(self):
        half = self.n_optical + self.n_mech
        b = np.arange(self.n_optical, half)
        return np.concatenate([b, b + half])


@dataclass(eq=False)
class SteadyStateResult:
    correlation: np.ndarray
    covariance: np.ndarray
    margin: float
    t: float = 0.0
    physical_residual: float = 0.0

    def to_record(self):
        return {
            'stability_margin': self.margin,
            't': self.t,
            'physical_residual': self.physical_residual,
        }


def assemble(params, plan, spec=None):
    G = plan.G
    m1, n = G.shape
    if params.n_optical != m1 or params.n_mech != n:
        raise ValidationError(f'Params describe {params.n_optical} optical and {params.n_mech} '
                              f'mechanical modes, plan needs {m1} and {n}.')
    if spec is not None and spec.n_nodes != n:
        raise ValidationError(f'Target has {spec.n_nodes} nodes, plan has {n}.')

    K = np.diag(params.kappa + 1j * params.Delta)
    Y = np.diag(params.gamma + 1j * (1 + params.delta_omega))
    zo, zm = np.zeros((m1, m1)), np.zeros((n, n))
    drift = -np.block([
        [K, 1j * G, zo, 1j * G],
        [1j * G.conj().T, Y, 1j * G.T, zm],
        [zo, -1j * G.conj(), K.conj(), -1j * G.conj()],
        [-1j * G.conj().T, zm, -1j * G.T, Y.conj()],
    ])

    half = m1 + n
    nbar = params.occupations()
    ns, ms = squeezed_bath_moments(params.r, params.phi0 + plan.phase_shift)
    static = np.zeros((2 * half, 2 * half), dtype=complex)
    static[:m1, half:half + m1] = np.diag(2 * params.kappa)
    static[m1:half, half + m1:] = np.diag(2 * params.gamma * (1 + nbar))
    static[half + m1:, m1:half] = np.diag(2 * params.gamma * nbar)
    static[0, half] += 2 * params.kappa[0] * ns
    static[half, 0] += 2 * params.kappa[0] * ns

    minus = np.zeros_like(static)
    plus = np.zeros_like(static)
    minus[0, 0] = 2 * params.kappa[0] * ms
    plus[half, half] = np.conj(2 * params.kappa[0] * ms)
    return FullModel(drift, static, minus, plus, params.eps_L0, m1, n)


def stability_margin(model):
    return -spectral_abscissa(model.drift)


def correlation_at(model, t=0.0, method='auto', tol=DEFAULT_TOL):
    """Steady correlation matrix of all modes at time t (lab frame of the drives)."""
    c = solve_lyapunov(model.drift, model.diff_static, method=method, tol=tol)
    if np.any(model.diff_minus):
        eps = model.eps_L0
        cm = solve_shifted_lyapunov(model.drift, model.diff_minus, 2j * eps, method=method, tol=tol)
        cp = solve_shifted_lyapunov(model.drift, model.diff_plus, -2j * eps, method=method, tol=tol)
        c = c + cm * np.exp(-2j * eps * t) + cp * np.exp(2j * eps * t)
    return c


def physicality_residual(E):
    """Smallest eigenvalue of E + i Omega; non-negative for physical states."""
    omega = symplectic_form(E.shape[0] // 2)
    return float(np.linalg.eigvalsh(E + 1j * omega).min())


def steady_covariance(model, t=0.0, method='auto', tol=DEFAULT_TOL):
    margin = stability_margin(model)
    if margin <= STABILITY_TOL:
        raise InstabilityError(f'Drift matrix is unstable (margin {margin:.3e}).', margin)
    c = correlation_at(model, t, method, tol)
    idx = model.mechanical_indices()
    cb = c[np.ix_(idx, idx)]
    rot = np.concatenate([np.full(model.n_mech, np.exp(1j * t)), np.full(model.n_mech, np.exp(-1j * t))])
    cb = rot[:, None] * cb * rot[None, :]
    E = covariance_from_correlation(cb)
    residual = physicality_residual(E)
    if residual < -PHYSICALITY_TOL:
        print(f'[!] Steady covariance violates the uncertainty relation by {-residual:.3e}.')
    return SteadyStateResult(correlation=c, covariance=E, margin=margin, t=t, physical_residual=residual)


def residual_oscillation(model, method='auto', tol=DEFAULT_TOL):
    """Relative change of E between t = 0 and t = pi / (2 eps_L0)."""
    e0 = steady_covariance(model, 0.0, method, tol).covariance
    e1 = steady_covariance(model, np.pi / (2 * model.eps_L0), method, tol).covariance
    return float(np.linalg.norm(e0 - e1) / np.linalg.norm(e0))
