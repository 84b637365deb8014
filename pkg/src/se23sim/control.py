"""Dynamic inversion and stabilizing feedback for the log-error dynamics.

u1 cancels the gravity-mismatch channel exactly, making the closed-loop
error evolution log-linear, xidot = A(t) xi with A = -ad(n_bar) + A_C.
u2 adds linear state feedback through the input matrix B so that the
combined mismatch n~ = u1 + u2 yields xidot = (A + BK) xi.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from ._backend import kernels as _k
from .dynamics import BodyInput, gravity
from .exceptions import GainSynthesisFailure
from .liegroup import EPS_THETA, compose, inverse, jl, se23_exp
from .logerror import a_c_matrix

DEFAULT_DECAY_RATE = 0.01      # s^-1, required closed-loop margin
_HURWITZ_SLACK = 1e-9


def input_matrix():
    """9x6 input map B: channel 1 drives the velocity rows, channel 2 the rotation rows."""
    B = np.zeros((9, 6))
    B[3:6, 0:3] = np.eye(3)
    B[6:9, 3:6] = np.eye(3)
    return B


def closed_loop_A(n_bar):
    """System matrix of the gravity-cancelled loop: -ad(n_bar) + A_C."""
    return -_k.ad_matrix(np.asarray(n_bar, dtype=float)) + a_c_matrix()


@dataclass(frozen=True)
class GainMatrix:
    """6x9 feedback gain, verified Hurwitz for the supplied constant n_bar."""

    K: np.ndarray
    n_bar: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "K", np.array(self.K, dtype=float))
        object.__setattr__(self, "n_bar", np.array(self.n_bar, dtype=float))
        if self.K.shape != (6, 9):
            raise ValueError("K must be 6x9")
        re_max = np.max(np.real(self.closed_loop_eigenvalues()))
        if not re_max < 0.0:
            raise GainSynthesisFailure(
                f"A + BK is not Hurwitz (max Re eig = {re_max:.3e})")

    def closed_loop_eigenvalues(self):
        return np.linalg.eigvals(closed_loop_A(self.n_bar) + input_matrix() @ self.K)


def u1_dynamic_inversion(X, Xbar, model):
    """Gravity-cancelling mismatch injection.

    Only the velocity slot is nonzero: R^T (g(p) - g(pbar)).  Applied as
    the control mismatch n~ = u1, the J_l^-1(xi) u1 term of the error ODE
    cancels J_r^-1(xi) Ad(Xbar^-1) m~ exactly.
    """
    out = np.zeros(9)
    out[3:6] = X.R.T @ (gravity(X.p, model) - gravity(Xbar.p, model))
    return out


def u2_stabilizing(xi, gain, eps_theta=EPS_THETA):
    """Feedback term u2 = J_l(xi) (B K xi), so J_l^-1(xi) u2 = B K xi."""
    xi = np.asarray(xi, dtype=float)
    return jl(xi, eps_theta) @ (input_matrix() @ (gain.K @ xi))


def apply_mismatch_as_input(n_bar, n_tilde):
    """Actual body input realizing mismatch n~: a = abar - n~_v, omega = omegabar - n~_R.

    The position slot is not an actuated channel; callers must keep it zero.
    """
    n_bar = np.asarray(n_bar, dtype=float)
    n_tilde = np.asarray(n_tilde, dtype=float)
    return BodyInput(n_bar[3:6] - n_tilde[3:6], n_bar[6:9] - n_tilde[6:9])


def default_gain(n_bar, decay_rate=DEFAULT_DECAY_RATE):
    """Synthesize K placing all closed-loop eigenvalues left of -decay_rate.

    Shifted LQR: solving the Riccati equation for A + decay_rate I
    guarantees Re(eig(A + BK)) <= -decay_rate.  The post-condition is
    re-verified on the eigenvalues; GainSynthesisFailure otherwise.
    """
    n_bar = np.asarray(n_bar, dtype=float)
    A = closed_loop_A(n_bar)
    B = input_matrix()
    P = scipy.linalg.solve_continuous_are(
        A + decay_rate * np.eye(9), B, np.eye(9), np.eye(6))
    K = -B.T @ P
    gain = GainMatrix(K, n_bar)
    re_max = np.max(np.real(gain.closed_loop_eigenvalues()))
    if re_max > -decay_rate + _HURWITZ_SLACK:
        raise GainSynthesisFailure(
            f"required margin {decay_rate}, achieved {-re_max:.3e}")
    return gain


def closed_loop_rhs(xi, Xbar, n_bar, model, gain=None, eps_theta=EPS_THETA):
    """Error ODE under n~ = u1 (+ u2), with gravity mismatch active.

    Used by tests to confirm that the nonlinear loop collapses onto
    A(t) xi (u1 alone) or (A + BK) xi (with u2).
    """
    xi = np.asarray(xi, dtype=float)
    eta = se23_exp(xi)
    X = compose(Xbar, inverse(eta))
    n_tilde = u1_dynamic_inversion(X, Xbar, model)
    if gain is not None:
        n_tilde = n_tilde + u2_stabilizing(xi, gain, eps_theta)
    return _k.error_rhs(xi, Xbar.p, Xbar.v, Xbar.R,
                        np.asarray(n_bar, dtype=float), n_tilde, model.mu,
                        True, eps_theta)
