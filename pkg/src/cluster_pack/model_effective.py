"""
Effective model after adiabatic elimination of the auxiliary optical modes:
the zero-th optical mode plus N mechanical modes in the frame rotating at omega0.
"""
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from cluster_pack.commons import InstabilityError, covariance_from_correlation
from cluster_pack.model_full import (
    STABILITY_TOL,
    SteadyStateResult,
    physicality_residual,
    squeezed_bath_moments,
)
from cluster_pack.numerics import DEFAULT_TOL, solve_lyapunov, spectral_abscissa
from cluster_pack.synthesis import response_d, wj_matrix


@dataclass(frozen=True)
class EffectiveFlags:
    include_optical_noise: bool = True
    include_mechanical_damping: bool = True
    exact_hamiltonian: bool = False


IDEAL = EffectiveFlags(include_optical_noise=False, include_mechanical_damping=False,
                       exact_hamiltonian=True)
REALISTIC = EffectiveFlags()


def _aux(params):
    return params.kappa[1:], params.Delta[1:]


def _weighted_gram(gbar, weights):
    """Gbar^dag diag(weights) Gbar, real when Gbar is real."""
    out = gbar.conj().T @ (np.asarray(weights)[:, None] * gbar)
    out = (out + out.conj().T) / 2
    return np.real_if_close(out)


def w_optical(plan, params):
    kappa, Delta = _aux(params)
    return _weighted_gram(plan.Gbar, response_d(Delta, kappa))


def y_optical(plan, params):
    kappa, Delta = _aux(params)
    a = kappa ** 2 + Delta ** 2 - 1
    return _weighted_gram(plan.Gbar, 4 * Delta * kappa / (a ** 2 + 4 * kappa ** 2))


def w_matrix(plan, params):
    """Photon-mediated coherent coupling W = W^delta + Gbar^dag D Gbar."""
    return np.diag(params.delta_omega) + w_optical(plan, params)


def w_asymptote(plan, params):
    """Large-detuning form of W, with D_jj replaced by -2 / Delta_j."""
    _, Delta = _aux(params)
    return np.diag(params.delta_omega) + _weighted_gram(plan.Gbar, -2.0 / Delta)


def y_matrix(plan, params):
    """Mechanical damping plus photon-mediated correlated dissipation."""
    return np.diag(params.gamma) + y_optical(plan, params)


def noise_matrices(plan, params):
    """Diffusion blocks <y y^dag> and <y^dag y> of the photon-mediated noise."""
    kappa, Delta = _aux(params)
    plus = _weighted_gram(plan.Gbar, 2 * kappa / np.abs(kappa + 1j * (Delta - 1)) ** 2)
    minus = _weighted_gram(plan.Gbar, 2 * kappa / np.abs(kappa + 1j * (Delta + 1)) ** 2)
    return plus, minus


@dataclass(eq=False)
class EffectiveModel:
    drift: np.ndarray
    diffusion: np.ndarray
    W: np.ndarray
    Y: np.ndarray
    noise_plus: np.ndarray
    noise_minus: np.ndarray
    flags: EffectiveFlags
    n_mech: int

    def mechanical_indices(self):
        b = np.arange(1, self.n_mech + 1)
        return np.concatenate([b, b + self.n_mech + 1])


def build_effective(spec, plan, params, flags=REALISTIC):
    n = plan.n_nodes
    zeros = np.zeros((n, n))
    W = wj_matrix(spec) if flags.exact_hamiltonian else w_matrix(plan, params)
    Y = np.diag(params.gamma) if flags.include_mechanical_damping else zeros.copy()
    if flags.include_optical_noise:
        Y = Y + y_optical(plan, params)
        plus, minus = noise_matrices(plan, params)
    else:
        plus, minus = zeros, zeros

    kappa0 = params.kappa[0]
    a = np.zeros((n + 1, n + 1), dtype=complex)
    a[0, 0] = -(kappa0 + 1j * (params.Delta[0] - 1))
    a[0, 1:] = -1j * plan.g0
    a[1:, 0] = -1j * plan.g0.conj()
    a[1:, 1:] = -(Y + 1j * W)
    drift = linalg.block_diag(a, a.conj())

    h = n + 1
    ns, ms = squeezed_bath_moments(params.r, params.phi0 + plan.phase_shift)
    diffusion = np.zeros((2 * h, 2 * h), dtype=complex)
    diffusion[0, h] = 2 * kappa0 * (1 + ns)
    diffusion[h, 0] = 2 * kappa0 * ns
    diffusion[0, 0] = 2 * kappa0 * ms
    diffusion[h, h] = np.conj(2 * kappa0 * ms)
    if flags.include_mechanical_damping:
        nbar = params.occupations()
        diffusion[1:h, h + 1:] += np.diag(2 * params.gamma * (1 + nbar))
        diffusion[h + 1:, 1:h] += np.diag(2 * params.gamma * nbar)
    diffusion[1:h, h + 1:] += plus
    diffusion[h + 1:, 1:h] += minus
    return EffectiveModel(drift, diffusion, W, Y, plus, minus, flags, n)


def effective_steady(spec, plan, params, flags=REALISTIC, method='auto', tol=DEFAULT_TOL):
    """Stationary mechanical covariance of the effective model, same convention as the full model."""
    model = build_effective(spec, plan, params, flags)
    margin = -spectral_abscissa(model.drift)
    if margin <= STABILITY_TOL:
        raise InstabilityError(f'Effective drift is unstable (margin {margin:.3e}).', margin)
    c = solve_lyapunov(model.drift, model.diffusion, method=method, tol=tol)
    idx = model.mechanical_indices()
    E = covariance_from_correlation(c[np.ix_(idx, idx)])
    return SteadyStateResult(correlation=c, covariance=E, margin=margin,
                             physical_residual=physicality_residual(E))


@dataclass
class AdiabaticReport:
    coupling_ratio: float
    dissipation_ratio: float
    yw_ratio: float
    thresholds: tuple = (0.05, 0.05, 0.1)

    @property
    def valid(self):
        ratios = (self.coupling_ratio, self.dissipation_ratio, self.yw_ratio)
        return all(r < t for r, t in zip(ratios, self.thresholds))

    def to_record(self):
        return {
            'coupling_ratio': self.coupling_ratio,
            'dissipation_ratio': self.dissipation_ratio,
            'yw_ratio': self.yw_ratio,
            'adiabatic_valid': self.valid,
        }


def adiabatic_report(plan, params, thresholds=(0.05, 0.05, 0.1)):
    """Worst-case ratios behind the adiabatic elimination of the auxiliary modes."""
    if plan.M == 0:
        return AdiabaticReport(0.0, 0.0, 0.0, tuple(thresholds))
    kappa, Delta = _aux(params)
    coupling = np.abs(plan.Gbar) / np.abs(kappa + 1j * Delta)[:, None]
    detuned = np.abs(kappa ** 2 + Delta ** 2 - 1)
    with np.errstate(divide='ignore'):
        dissipation = np.where(detuned > 0, 2 * kappa / detuned, np.inf)
    w_opt = np.abs(w_optical(plan, params)).max()
    y_opt = np.abs(y_optical(plan, params)).max()
    yw = y_opt / w_opt if w_opt > 0 else (np.inf if y_opt > 0 else 0.0)
    return AdiabaticReport(float(coupling.max()), float(dissipation.max()), float(yw), tuple(thresholds))
