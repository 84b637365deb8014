"""Left-invariant log-error state, its ODE, and the gravity-mismatch bounds.

The tracking error is eta = X^-1 Xbar with coordinates xi = Log(eta)^vee,
evolving as

    xidot = (-ad(n_bar) + A_C) xi + jl_inv(xi) n~ + jr_inv(xi) Ad(Xbar^-1) m~,

where n~ is the body-frame control mismatch and m~ the world-frame gravity
mismatch.  The gravity term touches only the velocity slot and is bounded
pointwise by

    (theta/2)/sin(theta/2) * mu d (2r - d) / (r^2 (r - d)^2),

with r the reference radius, d = |xi_p| and theta = |xi_R|.
"""

from dataclasses import dataclass

import numpy as np

from ._backend import kernels as _k
from .dynamics import gravity
from .exceptions import DomainError
from .liegroup import (EPS_THETA, XI_P, XI_R, compose, inverse,
                       so3_right_jacobian_inv)

_TAYLOR_THETA = 1e-4


@dataclass(frozen=True)
class BoundInputs:
    """Arguments of the pointwise bound: radius, error norms, mu."""

    r: float
    xi_p_norm: float
    theta: float
    mu: float

    def __post_init__(self):
        if not (0.0 <= self.xi_p_norm < self.r):
            raise DomainError("require 0 <= xi_p_norm < r")
        if not (0.0 <= self.theta < np.pi):
            raise DomainError("require 0 <= theta < pi")


def left_error(X, Xbar):
    """Group-valued tracking error eta = X^-1 Xbar."""
    return compose(inverse(X), Xbar)


def log_error(X, Xbar, eps_theta=EPS_THETA):
    """Log coordinates of the left-invariant error, xi = Log(X^-1 Xbar)^vee."""
    return _k.relative_log(X.R, X.v, X.p, Xbar.R, Xbar.v, Xbar.p, eps_theta)


def a_c_matrix():
    """Constant 9x9 coupling: A_C xi = (xi_v, 0, 0)."""
    A = np.zeros((9, 9))
    A[0:3, 3:6] = np.eye(3)
    return A


def error_rhs(xi, n_bar, mm, Xbar, eps_theta=EPS_THETA):
    """Evaluate the log-error ODE for a given mismatch pair.

    Direct evaluation with m~ supplied by the caller; the propagation path
    (integrate.propagate_log_error) instead rebuilds m~ from the error
    state each call.
    """
    xi = np.asarray(xi, dtype=float)
    n_bar = np.asarray(n_bar, dtype=float)
    out = (-_k.ad_matrix(n_bar) + a_c_matrix()) @ xi
    out += _k.jl_inv(xi, eps_theta) @ np.asarray(mm.n_tilde, dtype=float)
    out += _k.jr_inv(xi, eps_theta) @ (
        _k.big_adjoint(Xbar.R.T, -(Xbar.R.T @ Xbar.v), -(Xbar.R.T @ Xbar.p))
        @ np.asarray(mm.m_tilde, dtype=float))
    return out


def gravity_mismatch_term(xi, Xbar, p, model, eps_theta=EPS_THETA):
    """Reduced gravity term of the error ODE.

    Only the velocity slot is nonzero:
    J_r^-1,SO3(xi_R) Rbar^T (g(pbar) - g(p)); position and rotation slots
    are exact zeros.
    """
    xi = np.asarray(xi, dtype=float)
    gtil = gravity(Xbar.p, model) - gravity(p, model)
    out = np.zeros(9)
    out[3:6] = so3_right_jacobian_inv(xi[XI_R], eps_theta) @ (Xbar.R.T @ gtil)
    return out


def _half_angle_factor(theta):
    # (theta/2) / sin(theta/2), removable singularity at 0
    if theta < _TAYLOR_THETA:
        h2 = 0.25 * theta * theta
        return 1.0 + h2 / 6.0 + 7.0 * h2 * h2 / 360.0
    return (0.5 * theta) / np.sin(0.5 * theta)


def pointwise_bound(b):
    """Gravity-mismatch bound at one (r, |xi_p|, theta) triple."""
    d = b.xi_p_norm
    if d == 0.0:
        return 0.0
    return (_half_angle_factor(b.theta)
            * b.mu * d * (2.0 * b.r - d) / (b.r**2 * (b.r - d) ** 2))


def global_bound(r_min, xi_p_max, theta_max, mu):
    """Worst-case bound over r >= r_min, |xi_p| <= xi_p_max, theta <= theta_max."""
    return pointwise_bound(BoundInputs(r_min, xi_p_max, theta_max, mu))


def bound_inputs_from_states(xi, Xbar, model):
    """BoundInputs for a concrete error state along a reference."""
    xi = np.asarray(xi, dtype=float)
    return BoundInputs(float(np.linalg.norm(Xbar.p)),
                       float(np.linalg.norm(xi[XI_P])),
                       float(np.linalg.norm(xi[XI_R])),
                       model.mu)
