"""
Dense complex linear-algebra kernels: the principal square root of a symmetric
unitary matrix and the (shifted) Lyapunov solvers used by both models.
"""
import numpy as np
from scipy import linalg

from cluster_pack.commons import (
    BranchCutError,
    SolverError,
    ValidationError,
    as_matrix,
    symmetry_residual,
    unitarity_residual,
)

DEFAULT_TOL = 1e-10
BRANCH_CUT_TOL = 1e-12
KRON_MAX_DIM = 24
SINGULAR_TOL = 1e-14

# irrational mixing weights for the joint diagonalization of Re Z and Im Z
_MIXING_WEIGHTS = (0.6180339887498949, 0.41421356237309515, 0.7320508075688772)


def _real_orthogonal_basis(z, tol):
    x, y = z.real, z.imag
    for c in _MIXING_WEIGHTS:
        _, q = np.linalg.eigh(x + c * y)
        d = q.T @ z @ q
        off = d - np.diag(np.diag(d))
        if np.linalg.norm(off) <= tol:
            return q
    return None


def _principal_sqrt(eigenvalues):
    d = np.asarray(eigenvalues, dtype=complex)
    near_cut = (d.real < 0) & (np.abs(d.imag) <= BRANCH_CUT_TOL) & (d.imag != 0)
    if np.any(near_cut):
        worst = d[near_cut][0]
        raise BranchCutError(
            f'Eigenvalue {worst:.6g} lies within {BRANCH_CUT_TOL:g} of the square-root branch cut.'
        )
    # exact negative reals take argument +pi, so -1 maps to +i
    d = np.where(d.imag == 0, d.real + 0j, d)
    return np.sqrt(d)


def symmetric_unitary_sqrt(Z, tol=DEFAULT_TOL):
    """
    Principal square root S of a symmetric unitary matrix Z, with S @ S = Z
    and S symmetric unitary.

    Z is diagonalized by a real orthogonal congruence when Re Z and Im Z can be
    jointly diagonalized (always true in exact arithmetic); otherwise a complex
    Schur form is used. Each eigenvalue gets its principal square root.
    """
    z = as_matrix(Z, 'Z').astype(complex)
    sym = symmetry_residual(z)
    if sym > tol:
        raise ValidationError(f'Z is not symmetric: residual {sym:.3e} exceeds {tol:.1e}.')
    uni = unitarity_residual(z)
    if uni > tol:
        raise ValidationError(f'Z is not unitary: residual {uni:.3e} exceeds {tol:.1e}.')

    q = _real_orthogonal_basis(z, tol)
    if q is not None:
        roots = _principal_sqrt(np.diag(q.T @ z @ q))
        s = (q * roots) @ q.T
    else:
        t, u = linalg.schur(z, output='complex')
        roots = _principal_sqrt(np.diag(t))
        s = (u * roots) @ u.conj().T
    return (s + s.T) / 2


def spectral_abscissa(M):
    return float(np.max(np.linalg.eigvals(as_matrix(M, 'drift')).real))


def _kron_operator(m, shift):
    n = m.shape[0]
    eye = np.eye(n)
    return np.kron(eye, m) + np.kron(m, eye) + shift * np.eye(n * n)


def _smallest_singular_value(m, shift):
    if m.shape[0] > KRON_MAX_DIM:
        return None
    return float(linalg.svdvals(_kron_operator(m, shift)).min())


def _describe_singular_value(sv):
    return 'not computed' if sv is None else f'{sv:.3e}'


def resonance_gap(M, shift=0.0):
    """Smallest |lambda_i + lambda_j + shift| over eigenvalue pairs of M."""
    lam = np.linalg.eigvals(M)
    return float(np.min(np.abs(lam[:, None] + lam[None, :] + shift)))


def solve_shifted_lyapunov(M, N, shift=0.0, method='auto', tol=DEFAULT_TOL):
    """
    Solve M C + C M^T + shift C = -N.

    method: 'kron' (vectorized dense LU), 'schur' (Bartels-Stewart through
    scipy.linalg.solve_sylvester) or 'auto' (kron up to dimension 24).
    """
    m = as_matrix(M, 'M').astype(complex)
    n = as_matrix(N, 'N').astype(complex)
    if m.shape != n.shape:
        raise ValidationError(f'Drift {m.shape} and diffusion {n.shape} shapes differ.')
    size = m.shape[0]
    shift = complex(shift)

    if method == 'auto':
        method = 'kron' if size <= KRON_MAX_DIM else 'schur'
    if method not in ('kron', 'schur'):
        raise ValidationError(f'Unknown Lyapunov method {method!r}.')

    scale = max(1.0, float(np.linalg.norm(m, 2)))
    gap = resonance_gap(m, shift)
    if gap <= SINGULAR_TOL * scale:
        sv = _smallest_singular_value(m, shift)
        raise SolverError(f'Lyapunov operator is singular (eigenvalue gap {gap:.3e}, '
                          f'smallest singular value {_describe_singular_value(sv)}).', sv)

    if method == 'kron':
        lu = linalg.lu_factor(_kron_operator(m, shift), check_finite=False)
        vec = linalg.lu_solve(lu, -n.flatten(order='F'), check_finite=False)
        c = vec.reshape((size, size), order='F')
    else:
        c = linalg.solve_sylvester(m, m.T + shift * np.eye(size), -n)

    residual = np.linalg.norm(m @ c + c @ m.T + shift * c + n)
    denom = max(float(np.linalg.norm(n)),
                (2 * float(np.linalg.norm(m)) + abs(shift)) * float(np.linalg.norm(c)))
    if denom > 0 and residual > tol * denom:
        sv = _smallest_singular_value(m, shift)
        raise SolverError(f'Lyapunov residual {residual / denom:.3e} exceeds {tol:.1e} '
                          f'(smallest singular value {_describe_singular_value(sv)}).', sv)
    return c


def solve_lyapunov(M, N, method='auto', tol=DEFAULT_TOL):
    """Solve M C + C M^T = -N for a stable drift M."""
    return solve_shifted_lyapunov(M, N, 0.0, method=method, tol=tol)
