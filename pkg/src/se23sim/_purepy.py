"""Pure NumPy kernels.

Reference implementation of the hot numeric kernels; the compiled module
``_core`` mirrors these routines one for one.  All vectors use the
(position, velocity, rotation) slot ordering for 9-vectors, and rotations
map body-frame vectors into the inertial frame.
"""

import numpy as np

from ._coeffs import BERNOULLI_OVER_FACT, SERIES_MAX_TERMS, SERIES_TOL
from .exceptions import NearSingularity, OriginSingularity

BACKEND = "python"

_TAYLOR_THETA = 1e-4
GRAVITY_GUARD_RADIUS_M = 1.0


def hat3(w):
    """Skew-symmetric matrix of w, so that hat3(w) @ u == cross(w, u)."""
    return np.array([
        [0.0, -w[2], w[1]],
        [w[2], 0.0, -w[0]],
        [-w[1], w[0], 0.0],
    ])


def so3_exp(w):
    """Rodrigues rotation from a rotation vector (Taylor branch near 0)."""
    w = np.asarray(w, dtype=float)
    th2 = w @ w
    th = np.sqrt(th2)
    K = hat3(w)
    if th < _TAYLOR_THETA:
        c1 = 1.0 - th2 / 6.0 + th2 * th2 / 120.0            # sin(th)/th
        c2 = 0.5 - th2 / 24.0 + th2 * th2 / 720.0           # (1-cos th)/th^2
    else:
        c1 = np.sin(th) / th
        c2 = (1.0 - np.cos(th)) / th2
    return np.eye(3) + c1 * K + c2 * (K @ K)


def so3_log(R, eps_theta=1e-6):
    """Rotation vector of R; raises NearSingularity within eps_theta of pi."""
    R = np.asarray(R, dtype=float)
    axis2 = 0.5 * np.array([R[2, 1] - R[1, 2], R[0, 2] - R[2, 0], R[1, 0] - R[0, 1]])
    s = np.linalg.norm(axis2)                                # sin(theta)
    c = 0.5 * (R[0, 0] + R[1, 1] + R[2, 2] - 1.0)            # cos(theta)
    th = np.arctan2(s, c)
    if th >= np.pi - eps_theta:
        raise NearSingularity(f"rotation angle {th:.9f} rad within {eps_theta} of pi")
    if th < _TAYLOR_THETA:
        th2 = th * th
        coef = 1.0 + th2 / 6.0 + 7.0 * th2 * th2 / 360.0     # th/sin(th)
    else:
        coef = th / s
    return coef * axis2


def so3_jl(w):
    """Left Jacobian of SO(3)."""
    w = np.asarray(w, dtype=float)
    th2 = w @ w
    th = np.sqrt(th2)
    K = hat3(w)
    if th < _TAYLOR_THETA:
        c1 = 0.5 - th2 / 24.0 + th2 * th2 / 720.0            # (1-cos th)/th^2
        c2 = 1.0 / 6.0 - th2 / 120.0 + th2 * th2 / 5040.0    # (th-sin th)/th^3
    else:
        c1 = (1.0 - np.cos(th)) / th2
        c2 = (th - np.sin(th)) / (th2 * th)
    return np.eye(3) + c1 * K + c2 * (K @ K)


def so3_jl_inv(w, eps_theta=1e-6):
    """Inverse left Jacobian of SO(3); singular at theta = pi."""
    w = np.asarray(w, dtype=float)
    th2 = w @ w
    th = np.sqrt(th2)
    if th >= np.pi - eps_theta:
        raise NearSingularity(f"rotation angle {th:.9f} rad within {eps_theta} of pi")
    K = hat3(w)
    if th < _TAYLOR_THETA:
        c = 1.0 / 12.0 + th2 / 720.0 + th2 * th2 / 30240.0
    else:
        c = 1.0 / th2 - (1.0 + np.cos(th)) / (2.0 * th * np.sin(th))
    return np.eye(3) - 0.5 * K + c * (K @ K)


def se23_exp(xi):
    """Group element (R, v, p) = Exp(xi^) for xi = (xi_p, xi_v, xi_R)."""
    xi = np.asarray(xi, dtype=float)
    R = so3_exp(xi[6:9])
    J = so3_jl(xi[6:9])
    return R, J @ xi[3:6], J @ xi[0:3]


def se23_log(R, v, p, eps_theta=1e-6):
    """Algebra coordinates of (R, v, p); inverse of se23_exp."""
    w = so3_log(R, eps_theta)
    Jinv = so3_jl_inv(w, eps_theta)
    out = np.empty(9)
    out[0:3] = Jinv @ np.asarray(p, dtype=float)
    out[3:6] = Jinv @ np.asarray(v, dtype=float)
    out[6:9] = w
    return out


def ad_matrix(xi):
    """9x9 adjoint of an algebra vector: ad(xi) zeta = vee([xi^, zeta^])."""
    xi = np.asarray(xi, dtype=float)
    A = np.zeros((9, 9))
    hr = hat3(xi[6:9])
    A[0:3, 0:3] = hr
    A[3:6, 3:6] = hr
    A[6:9, 6:9] = hr
    A[0:3, 6:9] = hat3(xi[0:3])
    A[3:6, 6:9] = hat3(xi[3:6])
    return A


def big_adjoint(R, v, p):
    """9x9 matrix of Ad_X acting on algebra coordinates."""
    R = np.asarray(R, dtype=float)
    A = np.zeros((9, 9))
    A[0:3, 0:3] = R
    A[3:6, 3:6] = R
    A[6:9, 6:9] = R
    A[0:3, 6:9] = hat3(np.asarray(p, dtype=float)) @ R
    A[3:6, 6:9] = hat3(np.asarray(v, dtype=float)) @ R
    return A


def _jacobian_series_pair(xi, eps_theta):
    """Both inverse Jacobians from one power sequence.

    jr_inv = sum_k c_k ad^k and jl_inv(xi) = jr_inv(-xi), whose terms are
    (-1)^k c_k ad^k, so a single sweep yields both.  Truncation at the
    first nonzero-coefficient term below SERIES_TOL (odd coefficients
    beyond k=1 are exactly zero and must not trip the cutoff).
    """
    xi = np.asarray(xi, dtype=float)
    th = np.linalg.norm(xi[6:9])
    if th >= np.pi - eps_theta:
        raise NearSingularity(f"rotation angle {th:.9f} rad within {eps_theta} of pi")
    A = ad_matrix(xi)
    jr = np.eye(9)
    jl = np.eye(9)
    T = np.eye(9)
    sign = 1.0
    for k in range(1, SERIES_MAX_TERMS + 1):
        T = T @ A
        sign = -sign
        c = BERNOULLI_OVER_FACT[k]
        if c == 0.0:
            continue
        term = c * T
        jr += term
        jl += sign * term
        if np.abs(term).max() < SERIES_TOL:
            break
    return jr, jl


def jr_inv(xi, eps_theta=1e-6):
    """Inverse right Jacobian of SE_2(3) by Bernoulli series in ad(xi)."""
    return _jacobian_series_pair(xi, eps_theta)[0]


def jl_inv(xi, eps_theta=1e-6):
    """Inverse left Jacobian of SE_2(3); equals jr_inv(-xi)."""
    return _jacobian_series_pair(xi, eps_theta)[1]


def gravity_accel(p, mu):
    """Point-mass gravity -mu p / |p|^3 with a 1 m guard radius."""
    p = np.asarray(p, dtype=float)
    r = np.linalg.norm(p)
    if r < GRAVITY_GUARD_RADIUS_M:
        raise OriginSingularity(f"|p| = {r:.3e} m inside guard radius")
    return (-mu / (r * r * r)) * p


def classical_rhs_pv(p, v, R, a, mu):
    """Translational Newtonian rates: pdot = v, vdot = R a + g(p)."""
    return np.asarray(v, dtype=float).copy(), np.asarray(R) @ np.asarray(a, dtype=float) + gravity_accel(p, mu)


def relative_log(R, v, p, Rbar, vbar, pbar, eps_theta=1e-6):
    """Log of the left-invariant error eta = X^-1 Xbar, as a 9-vector."""
    R = np.asarray(R)
    dR = R.T @ np.asarray(Rbar)
    dv = R.T @ (np.asarray(vbar, dtype=float) - np.asarray(v, dtype=float))
    dp = R.T @ (np.asarray(pbar, dtype=float) - np.asarray(p, dtype=float))
    return se23_log(dR, dv, dp, eps_theta)


def error_rhs(xi, pbar, vbar, Rbar, n_bar, n_tilde, mu, include_gravity=True,
              eps_theta=1e-6):
    """Log-error rate: (-ad(n_bar) + A_C) xi + jl_inv xi~n + jr_inv Ad m~.

    The gravity mismatch m~ is rebuilt from the current error state: the
    actual position is reconstructed as X = Xbar Exp(xi^)^-1 and only the
    velocity slot g(pbar) - g(p) is nonzero.  include_gravity=False drops
    that term (pure log-linear evolution).
    """
    xi = np.asarray(xi, dtype=float)
    n_bar = np.asarray(n_bar, dtype=float)
    n_tilde = np.asarray(n_tilde, dtype=float)
    jr, jl = _jacobian_series_pair(xi, eps_theta)

    out = np.empty(9)
    nR, nv, npos = n_bar[6:9], n_bar[3:6], n_bar[0:3]
    out[0:3] = -(np.cross(nR, xi[0:3]) + np.cross(npos, xi[6:9])) + xi[3:6]
    out[3:6] = -(np.cross(nR, xi[3:6]) + np.cross(nv, xi[6:9]))
    out[6:9] = -np.cross(nR, xi[6:9])
    out += jl @ n_tilde

    if include_gravity:
        Rbar = np.asarray(Rbar)
        pbar = np.asarray(pbar, dtype=float)
        Re = so3_exp(xi[6:9])
        pe = so3_jl(xi[6:9]) @ xi[0:3]
        p_actual = pbar - Rbar @ (Re.T @ pe)
        gtil = gravity_accel(pbar, mu) - gravity_accel(p_actual, mu)
        adm = np.zeros(9)
        adm[3:6] = Rbar.T @ gtil
        out += jr @ adm
    return out
