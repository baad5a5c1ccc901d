import numpy as np


class ValidationError(ValueError):
    """Input matrix or parameter failed a precondition check."""


class BranchCutError(ValidationError):
    pass


class SolverError(RuntimeError):
    def __init__(self, message, smallest_singular_value=None):
        super().__init__(message)
        self.smallest_singular_value = smallest_singular_value


class InstabilityError(RuntimeError):
    def __init__(self, message, margin):
        super().__init__(message)
        self.margin = margin


class ConstraintError(ValueError):
    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals or {}


class SynthesisError(ValueError):
    pass


class OptimizationError(RuntimeError):
    pass


class ConfigError(ValueError):
    pass


def as_matrix(x, name="matrix", square=True):
    a = np.atleast_2d(np.asarray(x))
    if a.ndim != 2:
        raise ValidationError(f"{name} must be two-dimensional, got shape {a.shape}")
    if square and a.shape[0] != a.shape[1]:
        raise ValidationError(f"{name} must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValidationError(f"{name} contains non-finite entries")
    return a


def symmetry_residual(a):
    return float(np.linalg.norm(a - a.T))


def unitarity_residual(a):
    return float(np.linalg.norm(a.conj().T @ a - np.eye(a.shape[0])))


def wrap_half_turn(angle):
    # phases defined modulo pi, mapped to [-pi/2, pi/2)
    return float((angle + np.pi / 2) % np.pi - np.pi / 2)


def symplectic_form(n_modes):
    eye = np.eye(n_modes)
    zero = np.zeros((n_modes, n_modes))
    return np.block([[zero, eye], [-eye, zero]])


def quadrature_map(n_modes):
    eye = np.eye(n_modes)
    return np.block([[eye, eye], [-1j * eye, 1j * eye]])


def swap_matrix(n_modes):
    eye = np.eye(n_modes)
    zero = np.zeros((n_modes, n_modes))
    return np.block([[zero, eye], [eye, zero]])


def covariance_from_correlation(corr):
    """Quadrature covariance (x..., p...) from a <(b, b^dag)(b, b^dag)^T> correlation block."""
    n_modes = corr.shape[0] // 2
    r = quadrature_map(n_modes)
    e = r @ ((corr + corr.T) / 2) @ r.T
    e = e.real
    return (e + e.T) / 2
