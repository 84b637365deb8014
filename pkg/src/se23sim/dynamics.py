"""Newtonian truth model and the mixed-invariant (M, N, C) formulation.

The classical rates are

    pdot = v,   vdot = R a + g(p),   Rdot = R hat3(omega),

and the same flow in 5x5 form is Xdot = (M - C) X + X (N + C), where M
carries the world-frame gravity, N the body-frame inputs, and the
constant C the pdot = v coupling.  Both routes are kept independent so
the equivalence can be tested rather than assumed.
"""

from dataclasses import dataclass

import numpy as np

from ._backend import kernels as _k
from .liegroup import algvec, hat3

EARTH_MU_M3S2 = 3.986004418e14


@dataclass(frozen=True)
class GravityModel:
    """Inverse-square point-mass field g(p) = -mu p / |p|^3."""

    mu: float = EARTH_MU_M3S2

    def __post_init__(self):
        if not self.mu > 0.0:
            raise ValueError("mu must be positive")


@dataclass(frozen=True)
class BodyInput:
    """Commanded body-frame acceleration a (m/s^2) and angular velocity omega (rad/s)."""

    a: np.ndarray
    omega: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "a", np.array(self.a, dtype=float))
        object.__setattr__(self, "omega", np.array(self.omega, dtype=float))
        if self.a.shape != (3,) or self.omega.shape != (3,):
            raise ValueError("BodyInput expects 3-vectors")
        if not (np.isfinite(self.a).all() and np.isfinite(self.omega).all()):
            raise ValueError("BodyInput must be finite")

    @classmethod
    def zero(cls):
        return cls(np.zeros(3), np.zeros(3))


@dataclass(frozen=True)
class MismatchPair:
    """Body-frame control mismatch n~ and world-frame gravity mismatch m~."""

    n_tilde: np.ndarray
    m_tilde: np.ndarray


def input_vector(u):
    """9-vector n = N^vee = (0, a, omega) for a body input."""
    return algvec(np.zeros(3), u.a, u.omega)


def c_matrix():
    """Constant 5x5 C with a single 1 coupling pdot = v."""
    C = np.zeros((5, 5))
    C[3, 4] = 1.0
    return C


def gravity(p, model):
    """Gravitational acceleration at p; OriginSingularity inside 1 m."""
    return _k.gravity_accel(np.asarray(p, dtype=float), model.mu)


def gravity_jacobian(p, model):
    """Jacobian of the gravity field: mu (3 phat phat^T - I) / |p|^3."""
    p = np.asarray(p, dtype=float)
    _k.gravity_accel(p, model.mu)        # reuse the guard-radius check
    r = np.linalg.norm(p)
    phat = p / r
    return model.mu / r**3 * (3.0 * np.outer(phat, phat) - np.eye(3))


def classical_rhs(X, u, model):
    """Component-wise Newtonian rates (pdot, vdot, Rdot)."""
    pdot, vdot = _k.classical_rhs_pv(X.p, X.v, X.R, u.a, model.mu)
    Rdot = X.R @ hat3(u.omega)
    return pdot, vdot, Rdot


def _m_matrix(p, model):
    M = np.zeros((5, 5))
    M[0:3, 3] = gravity(p, model)
    return M


def _n_matrix(u):
    N = np.zeros((5, 5))
    N[0:3, 0:3] = hat3(u.omega)
    N[0:3, 3] = u.a
    return N


def mixed_invariant_rhs(X, u, model):
    """5x5 rate Xdot = (M - C) X + X (N + C).

    Equals the embedding of classical_rhs, with rows 4-5 zero; kept as a
    direct expansion so the equivalence is a test, not a definition.
    """
    Xm = X.as_matrix()
    C = c_matrix()
    return (_m_matrix(X.p, model) - C) @ Xm + Xm @ (_n_matrix(u) + C)


def mismatch(n_bar, n, p_bar, p, model):
    """Mismatch pair: n~ = n_bar - n and m~ with only g(p_bar) - g(p)."""
    n_tilde = np.asarray(n_bar, dtype=float) - np.asarray(n, dtype=float)
    m_tilde = np.zeros(9)
    m_tilde[3:6] = gravity(p_bar, model) - gravity(p, model)
    return MismatchPair(n_tilde, m_tilde)
