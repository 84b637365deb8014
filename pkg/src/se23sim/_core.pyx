# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels (Cython).

One-for-one mirror of se23sim._purepy; same conventions, same series
truncation, selected at import by se23sim._backend.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport atan2, cos, sin, sqrt, fabs, M_PI

from ._coeffs import BERNOULLI_OVER_FACT, SERIES_MAX_TERMS, SERIES_TOL
from .exceptions import NearSingularity, OriginSingularity

cnp.import_array()

BACKEND = "compiled"

cdef double _TAYLOR_THETA = 1e-4
GRAVITY_GUARD_RADIUS_M = 1.0
cdef double _GUARD_R = 1.0

cdef double[::1] _BCOEF = np.ascontiguousarray(BERNOULLI_OVER_FACT)
cdef int _MAXK = int(SERIES_MAX_TERMS)
cdef double _STOL = float(SERIES_TOL)


cdef inline void _hat_into(double[:, ::1] M, Py_ssize_t r, Py_ssize_t c,
                           double wx, double wy, double wz, double s) nogil:
    # write s * hat(w) into the 3x3 block of M at (r, c)
    M[r + 0, c + 0] = 0.0;      M[r + 0, c + 1] = -s * wz;  M[r + 0, c + 2] = s * wy
    M[r + 1, c + 0] = s * wz;   M[r + 1, c + 1] = 0.0;      M[r + 1, c + 2] = -s * wx
    M[r + 2, c + 0] = -s * wy;  M[r + 2, c + 1] = s * wx;   M[r + 2, c + 2] = 0.0


cdef inline void _rot_series(double[:, ::1] R, double wx, double wy, double wz,
                             double c1, double c2) nogil:
    # R = I + c1 hat(w) + c2 hat(w)^2
    cdef double xx = wx * wx, yy = wy * wy, zz = wz * wz
    cdef double xy = wx * wy, xz = wx * wz, yz = wy * wz
    R[0, 0] = 1.0 + c2 * (-yy - zz)
    R[0, 1] = -c1 * wz + c2 * xy
    R[0, 2] = c1 * wy + c2 * xz
    R[1, 0] = c1 * wz + c2 * xy
    R[1, 1] = 1.0 + c2 * (-xx - zz)
    R[1, 2] = -c1 * wx + c2 * yz
    R[2, 0] = -c1 * wy + c2 * xz
    R[2, 1] = c1 * wx + c2 * yz
    R[2, 2] = 1.0 + c2 * (-xx - yy)


def hat3(w):
    """Skew-symmetric matrix of w, so that hat3(w) @ u == cross(w, u)."""
    cdef cnp.ndarray[double, ndim=1] wv = np.ascontiguousarray(w, dtype=np.float64)
    out = np.zeros((3, 3))
    cdef double[:, ::1] M = out
    _hat_into(M, 0, 0, wv[0], wv[1], wv[2], 1.0)
    return out


def so3_exp(w):
    """Rodrigues rotation from a rotation vector (Taylor branch near 0)."""
    cdef cnp.ndarray[double, ndim=1] wv = np.ascontiguousarray(w, dtype=np.float64)
    out = np.empty((3, 3))
    cdef double[:, ::1] R = out
    cdef double th2 = wv[0] * wv[0] + wv[1] * wv[1] + wv[2] * wv[2]
    cdef double th = sqrt(th2)
    cdef double c1, c2
    if th < _TAYLOR_THETA:
        c1 = 1.0 - th2 / 6.0 + th2 * th2 / 120.0
        c2 = 0.5 - th2 / 24.0 + th2 * th2 / 720.0
    else:
        c1 = sin(th) / th
        c2 = (1.0 - cos(th)) / th2
    _rot_series(R, wv[0], wv[1], wv[2], c1, c2)
    return out


def so3_log(R, double eps_theta=1e-6):
    """Rotation vector of R; raises NearSingularity within eps_theta of pi."""
    cdef cnp.ndarray[double, ndim=2] Rm = np.ascontiguousarray(R, dtype=np.float64)
    cdef double ax = 0.5 * (Rm[2, 1] - Rm[1, 2])
    cdef double ay = 0.5 * (Rm[0, 2] - Rm[2, 0])
    cdef double az = 0.5 * (Rm[1, 0] - Rm[0, 1])
    cdef double s = sqrt(ax * ax + ay * ay + az * az)
    cdef double c = 0.5 * (Rm[0, 0] + Rm[1, 1] + Rm[2, 2] - 1.0)
    cdef double th = atan2(s, c)
    if th >= M_PI - eps_theta:
        raise NearSingularity(f"rotation angle {th:.9f} rad within {eps_theta} of pi")
    cdef double coef, th2
    if th < _TAYLOR_THETA:
        th2 = th * th
        coef = 1.0 + th2 / 6.0 + 7.0 * th2 * th2 / 360.0
    else:
        coef = th / s
    out = np.empty(3)
    cdef double[::1] o = out
    o[0] = coef * ax; o[1] = coef * ay; o[2] = coef * az
    return out


cdef void _jl_into(double[:, ::1] J, double wx, double wy, double wz) nogil:
    cdef double th2 = wx * wx + wy * wy + wz * wz
    cdef double th = sqrt(th2)
    cdef double c1, c2
    if th < _TAYLOR_THETA:
        c1 = 0.5 - th2 / 24.0 + th2 * th2 / 720.0
        c2 = 1.0 / 6.0 - th2 / 120.0 + th2 * th2 / 5040.0
    else:
        c1 = (1.0 - cos(th)) / th2
        c2 = (th - sin(th)) / (th2 * th)
    _rot_series(J, wx, wy, wz, c1, c2)


def so3_jl(w):
    """Left Jacobian of SO(3)."""
    cdef cnp.ndarray[double, ndim=1] wv = np.ascontiguousarray(w, dtype=np.float64)
    out = np.empty((3, 3))
    cdef double[:, ::1] J = out
    _jl_into(J, wv[0], wv[1], wv[2])
    return out


cdef int _jl_inv_into(double[:, ::1] J, double wx, double wy, double wz,
                      double eps_theta) nogil:
    # returns 1 on NearSingularity
    cdef double th2 = wx * wx + wy * wy + wz * wz
    cdef double th = sqrt(th2)
    if th >= M_PI - eps_theta:
        return 1
    cdef double c
    if th < _TAYLOR_THETA:
        c = 1.0 / 12.0 + th2 / 720.0 + th2 * th2 / 30240.0
    else:
        c = 1.0 / th2 - (1.0 + cos(th)) / (2.0 * th * sin(th))
    _rot_series(J, wx, wy, wz, -0.5, c)
    return 0


def so3_jl_inv(w, double eps_theta=1e-6):
    """Inverse left Jacobian of SO(3); singular at theta = pi."""
    cdef cnp.ndarray[double, ndim=1] wv = np.ascontiguousarray(w, dtype=np.float64)
    out = np.empty((3, 3))
    cdef double[:, ::1] J = out
    if _jl_inv_into(J, wv[0], wv[1], wv[2], eps_theta):
        raise NearSingularity(
            f"rotation angle {np.linalg.norm(wv):.9f} rad within {eps_theta} of pi")
    return out


cdef inline void _mat3_vec(double[:, ::1] A, double x, double y, double z,
                           double* ox, double* oy, double* oz) nogil:
    ox[0] = A[0, 0] * x + A[0, 1] * y + A[0, 2] * z
    oy[0] = A[1, 0] * x + A[1, 1] * y + A[1, 2] * z
    oz[0] = A[2, 0] * x + A[2, 1] * y + A[2, 2] * z


def se23_exp(xi):
    """Group element (R, v, p) = Exp(xi^) for xi = (xi_p, xi_v, xi_R)."""
    cdef cnp.ndarray[double, ndim=1] x = np.ascontiguousarray(xi, dtype=np.float64)
    R = np.empty((3, 3))
    Jbuf = np.empty((3, 3))
    v = np.empty(3)
    p = np.empty(3)
    cdef double[:, ::1] Rv = R, J = Jbuf
    cdef double[::1] vv = v, pv = p
    cdef double th2 = x[6] * x[6] + x[7] * x[7] + x[8] * x[8]
    cdef double th = sqrt(th2)
    cdef double c1, c2
    if th < _TAYLOR_THETA:
        c1 = 1.0 - th2 / 6.0 + th2 * th2 / 120.0
        c2 = 0.5 - th2 / 24.0 + th2 * th2 / 720.0
    else:
        c1 = sin(th) / th
        c2 = (1.0 - cos(th)) / th2
    _rot_series(Rv, x[6], x[7], x[8], c1, c2)
    _jl_into(J, x[6], x[7], x[8])
    _mat3_vec(J, x[3], x[4], x[5], &vv[0], &vv[1], &vv[2])
    _mat3_vec(J, x[0], x[1], x[2], &pv[0], &pv[1], &pv[2])
    return R, v, p


def se23_log(R, v, p, double eps_theta=1e-6):
    """Algebra coordinates of (R, v, p); inverse of se23_exp."""
    w = so3_log(R, eps_theta)
    cdef double[::1] wv = w
    Jbuf = np.empty((3, 3))
    cdef double[:, ::1] J = Jbuf
    _jl_inv_into(J, wv[0], wv[1], wv[2], eps_theta)
    cdef cnp.ndarray[double, ndim=1] vv = np.ascontiguousarray(v, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] pv = np.ascontiguousarray(p, dtype=np.float64)
    out = np.empty(9)
    cdef double[::1] o = out
    _mat3_vec(J, pv[0], pv[1], pv[2], &o[0], &o[1], &o[2])
    _mat3_vec(J, vv[0], vv[1], vv[2], &o[3], &o[4], &o[5])
    o[6] = wv[0]; o[7] = wv[1]; o[8] = wv[2]
    return out


cdef void _ad_into(double[:, ::1] A, double[::1] xi) nogil:
    cdef Py_ssize_t i, j
    for i in range(9):
        for j in range(9):
            A[i, j] = 0.0
    _hat_into(A, 0, 0, xi[6], xi[7], xi[8], 1.0)
    _hat_into(A, 3, 3, xi[6], xi[7], xi[8], 1.0)
    _hat_into(A, 6, 6, xi[6], xi[7], xi[8], 1.0)
    _hat_into(A, 0, 6, xi[0], xi[1], xi[2], 1.0)
    _hat_into(A, 3, 6, xi[3], xi[4], xi[5], 1.0)


def ad_matrix(xi):
    """9x9 adjoint of an algebra vector: ad(xi) zeta = vee([xi^, zeta^])."""
    cdef cnp.ndarray[double, ndim=1] x = np.ascontiguousarray(xi, dtype=np.float64)
    out = np.zeros((9, 9))
    cdef double[:, ::1] A = out
    _ad_into(A, x)
    return out


def big_adjoint(R, v, p):
    """9x9 matrix of Ad_X acting on algebra coordinates."""
    cdef cnp.ndarray[double, ndim=2] Rm = np.ascontiguousarray(R, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] vv = np.ascontiguousarray(v, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] pv = np.ascontiguousarray(p, dtype=np.float64)
    out = np.zeros((9, 9))
    cdef double[:, ::1] A = out
    cdef Py_ssize_t i, j
    for i in range(3):
        for j in range(3):
            A[i, j] = Rm[i, j]
            A[3 + i, 3 + j] = Rm[i, j]
            A[6 + i, 6 + j] = Rm[i, j]
    # hat(p) R and hat(v) R into the (p,R) and (v,R) blocks
    for j in range(3):
        A[0, 6 + j] = -pv[2] * Rm[1, j] + pv[1] * Rm[2, j]
        A[1, 6 + j] = pv[2] * Rm[0, j] - pv[0] * Rm[2, j]
        A[2, 6 + j] = -pv[1] * Rm[0, j] + pv[0] * Rm[1, j]
        A[3, 6 + j] = -vv[2] * Rm[1, j] + vv[1] * Rm[2, j]
        A[4, 6 + j] = vv[2] * Rm[0, j] - vv[0] * Rm[2, j]
        A[5, 6 + j] = -vv[1] * Rm[0, j] + vv[0] * Rm[1, j]
    return out


cdef void _mat9_mul(double[:, ::1] A, double[:, ::1] B, double[:, ::1] C) nogil:
    # C = A @ B, 9x9
    cdef Py_ssize_t i, j, k
    cdef double acc
    for i in range(9):
        for j in range(9):
            acc = 0.0
            for k in range(9):
                acc += A[i, k] * B[k, j]
            C[i, j] = acc


cdef int _series_pair(double[::1] xi, double eps_theta,
                      double[:, ::1] jr, double[:, ::1] jl,
                      double[:, ::1] A, double[:, ::1] T, double[:, ::1] W) nogil:
    # Bernoulli series for both inverse Jacobians; returns 1 on NearSingularity.
    # A, T, W are 9x9 scratch; jr/jl outputs.
    cdef double th = sqrt(xi[6] * xi[6] + xi[7] * xi[7] + xi[8] * xi[8])
    if th >= M_PI - eps_theta:
        return 1
    _ad_into(A, xi)
    cdef Py_ssize_t i, j, k
    for i in range(9):
        for j in range(9):
            jr[i, j] = 1.0 if i == j else 0.0
            jl[i, j] = jr[i, j]
            T[i, j] = jr[i, j]
    cdef double sign = 1.0
    cdef double c, mx, term
    for k in range(1, _MAXK + 1):
        _mat9_mul(T, A, W)
        for i in range(9):
            for j in range(9):
                T[i, j] = W[i, j]
        sign = -sign
        c = _BCOEF[k]
        if c == 0.0:
            continue
        mx = 0.0
        for i in range(9):
            for j in range(9):
                term = c * T[i, j]
                jr[i, j] += term
                jl[i, j] += sign * term
                if fabs(term) > mx:
                    mx = fabs(term)
        if mx < _STOL:
            break
    return 0


def jr_inv(xi, double eps_theta=1e-6):
    """Inverse right Jacobian of SE_2(3) by Bernoulli series in ad(xi)."""
    cdef cnp.ndarray[double, ndim=1] x = np.ascontiguousarray(xi, dtype=np.float64)
    jr = np.empty((9, 9)); jl = np.empty((9, 9))
    scratch = np.empty((3, 9, 9))
    cdef double[:, :, ::1] s = scratch
    if _series_pair(x, eps_theta, jr, jl, s[0], s[1], s[2]):
        raise NearSingularity("rotation angle too close to pi")
    return jr


def jl_inv(xi, double eps_theta=1e-6):
    """Inverse left Jacobian of SE_2(3); equals jr_inv(-xi)."""
    cdef cnp.ndarray[double, ndim=1] x = np.ascontiguousarray(xi, dtype=np.float64)
    jr = np.empty((9, 9)); jl = np.empty((9, 9))
    scratch = np.empty((3, 9, 9))
    cdef double[:, :, ::1] s = scratch
    if _series_pair(x, eps_theta, jr, jl, s[0], s[1], s[2]):
        raise NearSingularity("rotation angle too close to pi")
    return jl


def gravity_accel(p, double mu):
    """Point-mass gravity -mu p / |p|^3 with a 1 m guard radius."""
    cdef cnp.ndarray[double, ndim=1] pv = np.ascontiguousarray(p, dtype=np.float64)
    cdef double r = sqrt(pv[0] * pv[0] + pv[1] * pv[1] + pv[2] * pv[2])
    if r < _GUARD_R:
        raise OriginSingularity(f"|p| = {r:.3e} m inside guard radius")
    cdef double f = -mu / (r * r * r)
    out = np.empty(3)
    cdef double[::1] o = out
    o[0] = f * pv[0]; o[1] = f * pv[1]; o[2] = f * pv[2]
    return out


def classical_rhs_pv(p, v, R, a, double mu):
    """Translational Newtonian rates: pdot = v, vdot = R a + g(p)."""
    cdef cnp.ndarray[double, ndim=1] pv = np.ascontiguousarray(p, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] vv = np.ascontiguousarray(v, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=2] Rm = np.ascontiguousarray(R, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] av = np.ascontiguousarray(a, dtype=np.float64)
    cdef double r = sqrt(pv[0] * pv[0] + pv[1] * pv[1] + pv[2] * pv[2])
    if r < _GUARD_R:
        raise OriginSingularity(f"|p| = {r:.3e} m inside guard radius")
    cdef double f = -mu / (r * r * r)
    pdot = np.empty(3); vdot = np.empty(3)
    cdef double[::1] pd = pdot, vd = vdot
    cdef Py_ssize_t i
    for i in range(3):
        pd[i] = vv[i]
        vd[i] = Rm[i, 0] * av[0] + Rm[i, 1] * av[1] + Rm[i, 2] * av[2] + f * pv[i]
    return pdot, vdot


def relative_log(R, v, p, Rbar, vbar, pbar, double eps_theta=1e-6):
    """Log of the left-invariant error eta = X^-1 Xbar, as a 9-vector."""
    cdef cnp.ndarray[double, ndim=2] Rm = np.ascontiguousarray(R, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=2] Rb = np.ascontiguousarray(Rbar, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] vv = np.ascontiguousarray(v, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] pv = np.ascontiguousarray(p, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] vb = np.ascontiguousarray(vbar, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] pb = np.ascontiguousarray(pbar, dtype=np.float64)
    dR = np.empty((3, 3)); dv = np.empty(3); dp = np.empty(3)
    cdef double[:, ::1] dRm = dR
    cdef double[::1] dvv = dv, dpv = dp
    cdef Py_ssize_t i, j
    cdef double d0, d1, d2
    for i in range(3):
        for j in range(3):
            dRm[i, j] = Rm[0, i] * Rb[0, j] + Rm[1, i] * Rb[1, j] + Rm[2, i] * Rb[2, j]
    d0 = vb[0] - vv[0]; d1 = vb[1] - vv[1]; d2 = vb[2] - vv[2]
    for i in range(3):
        dvv[i] = Rm[0, i] * d0 + Rm[1, i] * d1 + Rm[2, i] * d2
    d0 = pb[0] - pv[0]; d1 = pb[1] - pv[1]; d2 = pb[2] - pv[2]
    for i in range(3):
        dpv[i] = Rm[0, i] * d0 + Rm[1, i] * d1 + Rm[2, i] * d2
    return se23_log(dR, dv, dp, eps_theta)


def error_rhs(xi, pbar, vbar, Rbar, n_bar, n_tilde, double mu,
              bint include_gravity=True, double eps_theta=1e-6):
    """Log-error rate: (-ad(n_bar) + A_C) xi + jl_inv xi~n + jr_inv Ad m~."""
    cdef cnp.ndarray[double, ndim=1] x = np.ascontiguousarray(xi, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] nb = np.ascontiguousarray(n_bar, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] nt = np.ascontiguousarray(n_tilde, dtype=np.float64)

    jrm = np.empty((9, 9)); jlm = np.empty((9, 9))
    scratch = np.empty((3, 9, 9))
    cdef double[:, :, ::1] s = scratch
    cdef double[:, ::1] jr = jrm, jl = jlm
    if _series_pair(x, eps_theta, jr, jl, s[0], s[1], s[2]):
        raise NearSingularity("rotation angle too close to pi")

    out = np.empty(9)
    cdef double[::1] o = out
    cdef Py_ssize_t i, j
    # (-ad(n_bar) + A_C) xi, with cross products written out
    o[0] = -(nb[7] * x[2] - nb[8] * x[1]) - (nb[1] * x[8] - nb[2] * x[7]) + x[3]
    o[1] = -(nb[8] * x[0] - nb[6] * x[2]) - (nb[2] * x[6] - nb[0] * x[8]) + x[4]
    o[2] = -(nb[6] * x[1] - nb[7] * x[0]) - (nb[0] * x[7] - nb[1] * x[6]) + x[5]
    o[3] = -(nb[7] * x[5] - nb[8] * x[4]) - (nb[4] * x[8] - nb[5] * x[7])
    o[4] = -(nb[8] * x[3] - nb[6] * x[5]) - (nb[5] * x[6] - nb[3] * x[8])
    o[5] = -(nb[6] * x[4] - nb[7] * x[3]) - (nb[3] * x[7] - nb[4] * x[6])
    o[6] = -(nb[7] * x[8] - nb[8] * x[7])
    o[7] = -(nb[8] * x[6] - nb[6] * x[8])
    o[8] = -(nb[6] * x[7] - nb[7] * x[6])
    for i in range(9):
        for j in range(9):
            o[i] += jl[i, j] * nt[j]

    if not include_gravity:
        return out

    cdef cnp.ndarray[double, ndim=2] Rb = np.ascontiguousarray(Rbar, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] pb = np.ascontiguousarray(pbar, dtype=np.float64)

    # reconstruct actual position: p = pbar - Rbar (Re^T (Jl xi_p))
    Re = np.empty((3, 3)); Jbuf = np.empty((3, 3))
    cdef double[:, ::1] Rev = Re, J = Jbuf
    cdef double th2 = x[6] * x[6] + x[7] * x[7] + x[8] * x[8]
    cdef double th = sqrt(th2)
    cdef double c1, c2
    if th < _TAYLOR_THETA:
        c1 = 1.0 - th2 / 6.0 + th2 * th2 / 120.0
        c2 = 0.5 - th2 / 24.0 + th2 * th2 / 720.0
    else:
        c1 = sin(th) / th
        c2 = (1.0 - cos(th)) / th2
    _rot_series(Rev, x[6], x[7], x[8], c1, c2)
    _jl_into(J, x[6], x[7], x[8])
    cdef double pe0, pe1, pe2, q0, q1, q2
    pe0 = J[0, 0] * x[0] + J[0, 1] * x[1] + J[0, 2] * x[2]
    pe1 = J[1, 0] * x[0] + J[1, 1] * x[1] + J[1, 2] * x[2]
    pe2 = J[2, 0] * x[0] + J[2, 1] * x[1] + J[2, 2] * x[2]
    q0 = Rev[0, 0] * pe0 + Rev[1, 0] * pe1 + Rev[2, 0] * pe2     # Re^T pe
    q1 = Rev[0, 1] * pe0 + Rev[1, 1] * pe1 + Rev[2, 1] * pe2
    q2 = Rev[0, 2] * pe0 + Rev[1, 2] * pe1 + Rev[2, 2] * pe2
    cdef double pa0, pa1, pa2
    pa0 = pb[0] - (Rb[0, 0] * q0 + Rb[0, 1] * q1 + Rb[0, 2] * q2)
    pa1 = pb[1] - (Rb[1, 0] * q0 + Rb[1, 1] * q1 + Rb[1, 2] * q2)
    pa2 = pb[2] - (Rb[2, 0] * q0 + Rb[2, 1] * q1 + Rb[2, 2] * q2)

    cdef double rb = sqrt(pb[0] * pb[0] + pb[1] * pb[1] + pb[2] * pb[2])
    cdef double ra = sqrt(pa0 * pa0 + pa1 * pa1 + pa2 * pa2)
    if rb < _GUARD_R or ra < _GUARD_R:
        raise OriginSingularity("position inside guard radius")
    cdef double fb = -mu / (rb * rb * rb)
    cdef double fa = -mu / (ra * ra * ra)
    cdef double g0 = fb * pb[0] - fa * pa0
    cdef double g1 = fb * pb[1] - fa * pa1
    cdef double g2 = fb * pb[2] - fa * pa2
    # Ad(Xbar^-1) m~ = (0, Rbar^T g~, 0)
    cdef double m3 = Rb[0, 0] * g0 + Rb[1, 0] * g1 + Rb[2, 0] * g2
    cdef double m4 = Rb[0, 1] * g0 + Rb[1, 1] * g1 + Rb[2, 1] * g2
    cdef double m5 = Rb[0, 2] * g0 + Rb[1, 2] * g1 + Rb[2, 2] * g2
    for i in range(9):
        o[i] += jr[i, 3] * m3 + jr[i, 4] * m4 + jr[i, 5] * m5
    return out
