"""SO(3) and SE_2(3) primitives.

Group elements are (R, v, p) triples embedded as 5x5 matrices

    X = [R v p; 0 1 0; 0 0 1],

algebra coordinates are 9-vectors in (position, velocity, rotation) slot
order, and the wedge map places hat3(xi_R) in the top-left block with
xi_v and xi_p in columns 4 and 5.  Exp/Log, adjoints and the inverse
left/right Jacobians follow; the 9x9 inverse Jacobians are evaluated by
the Bernoulli series in ad(xi), which converges for rotation angles
below pi.
"""

from dataclasses import dataclass

import numpy as np

from ._backend import kernels as _k
from .exceptions import NotInAlgebra

EPS_THETA = 1e-6           # NearSingularity margin below pi, rad
ORTHONORMALITY_TOL = 1e-10
ALGEBRA_TOL = 1e-12

XI_P = slice(0, 3)
XI_V = slice(3, 6)
XI_R = slice(6, 9)


def algvec(xi_p, xi_v, xi_r):
    """Stack (xi_p, xi_v, xi_R) 3-vectors into a 9-vector."""
    out = np.empty(9)
    out[XI_P] = xi_p
    out[XI_V] = xi_v
    out[XI_R] = xi_r
    return out


@dataclass(frozen=True)
class GroupElement:
    """SE_2(3) element: attitude R (body to inertial), velocity v, position p."""

    R: np.ndarray
    v: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "R", np.array(self.R, dtype=float))
        object.__setattr__(self, "v", np.array(self.v, dtype=float))
        object.__setattr__(self, "p", np.array(self.p, dtype=float))
        if self.R.shape != (3, 3) or self.v.shape != (3,) or self.p.shape != (3,):
            raise ValueError("GroupElement expects R (3,3), v (3,), p (3,)")
        for arr in (self.R, self.v, self.p):
            arr.setflags(write=False)

    @classmethod
    def identity(cls):
        return cls(np.eye(3), np.zeros(3), np.zeros(3))

    @classmethod
    def from_matrix(cls, M):
        M = np.asarray(M, dtype=float)
        return cls(M[0:3, 0:3], M[0:3, 3], M[0:3, 4])

    def as_matrix(self):
        M = np.eye(5)
        M[0:3, 0:3] = self.R
        M[0:3, 3] = self.v
        M[0:3, 4] = self.p
        return M

    def rotation_defect(self):
        """Max deviation from orthonormality and unit determinant."""
        d = np.abs(self.R.T @ self.R - np.eye(3)).max()
        return max(d, abs(np.linalg.det(self.R) - 1.0))


def hat3(w):
    """Skew matrix of a 3-vector: hat3(w) @ u = cross(w, u)."""
    return _k.hat3(np.asarray(w, dtype=float))


def wedge(xi):
    """5x5 algebra matrix of a 9-vector."""
    xi = np.asarray(xi, dtype=float)
    A = np.zeros((5, 5))
    A[0:3, 0:3] = _k.hat3(xi[XI_R])
    A[0:3, 3] = xi[XI_V]
    A[0:3, 4] = xi[XI_P]
    return A


def vee(A, tol=ALGEBRA_TOL):
    """9-vector of an algebra matrix; rejects non-se_2(3) input.

    Raises NotInAlgebra when the bottom rows are nonzero or the top-left
    block has a symmetric part beyond tol.
    """
    A = np.asarray(A, dtype=float)
    if A.shape != (5, 5):
        raise NotInAlgebra("expected a 5x5 matrix")
    if np.abs(A[3:5, :]).max() > tol:
        raise NotInAlgebra("rows 4-5 must vanish")
    sym = A[0:3, 0:3] + A[0:3, 0:3].T
    if np.abs(sym).max() > tol:
        raise NotInAlgebra("top-left block must be skew-symmetric")
    if np.abs(np.diag(A[0:3, 0:3])).max() > tol:
        raise NotInAlgebra("top-left block must have zero diagonal")
    return algvec(A[0:3, 4], A[0:3, 3],
                  np.array([A[2, 1], A[0, 2], A[1, 0]]))


def so3_exp(xi_r):
    """Rotation matrix Exp(hat3(xi_R))."""
    return _k.so3_exp(np.asarray(xi_r, dtype=float))


def so3_log(R, eps_theta=EPS_THETA):
    """Rotation vector Log(R); NearSingularity within eps_theta of pi."""
    return _k.so3_log(np.asarray(R, dtype=float), eps_theta)


def so3_left_jacobian(xi_r):
    """Left Jacobian of SO(3)."""
    return _k.so3_jl(np.asarray(xi_r, dtype=float))


def so3_left_jacobian_inv(xi_r, eps_theta=EPS_THETA):
    """Inverse left Jacobian of SO(3); NearSingularity near pi."""
    return _k.so3_jl_inv(np.asarray(xi_r, dtype=float), eps_theta)


def so3_right_jacobian(xi_r):
    """Right Jacobian: J_r(w) = J_l(-w)."""
    return _k.so3_jl(-np.asarray(xi_r, dtype=float))


def so3_right_jacobian_inv(xi_r, eps_theta=EPS_THETA):
    """Inverse right Jacobian: J_r^-1(w) = J_l^-1(-w)."""
    return _k.so3_jl_inv(-np.asarray(xi_r, dtype=float), eps_theta)


def se23_exp(xi):
    """Exp of algebra coordinates: R = Exp(xi_R), v = J_l xi_v, p = J_l xi_p."""
    R, v, p = _k.se23_exp(np.asarray(xi, dtype=float))
    return GroupElement(R, v, p)


def se23_log(X, eps_theta=EPS_THETA):
    """Algebra coordinates of a group element; inverse of se23_exp."""
    return _k.se23_log(X.R, X.v, X.p, eps_theta)


def compose(X, Y):
    """Group product X Y (matches the 5x5 matrix product)."""
    return GroupElement(X.R @ Y.R, X.R @ Y.v + X.v, X.R @ Y.p + X.p)


def inverse(X):
    """Group inverse (R^T, -R^T v, -R^T p)."""
    Rt = X.R.T
    return GroupElement(Rt, -(Rt @ X.v), -(Rt @ X.p))


def renormalize(X):
    """Project R onto SO(3) (nearest orthogonal matrix, polar projection)."""
    U, _, Vt = np.linalg.svd(X.R)
    R = U @ Vt
    if np.linalg.det(R) < 0.0:
        R = (U * np.array([1.0, 1.0, -1.0])) @ Vt
    return GroupElement(R, X.v, X.p)


def ad_matrix(xi):
    """9x9 algebra adjoint: ad_matrix(xi) @ z = vee([wedge(xi), wedge(z)])."""
    return _k.ad_matrix(np.asarray(xi, dtype=float))


def big_adjoint(X):
    """9x9 group adjoint: big_adjoint(X) @ z = vee(X wedge(z) X^-1)."""
    return _k.big_adjoint(X.R, X.v, X.p)


def jr_inv(xi, eps_theta=EPS_THETA):
    """Inverse right Jacobian of SE_2(3), Bernoulli series in ad(xi)."""
    return _k.jr_inv(np.asarray(xi, dtype=float), eps_theta)


def jl_inv(xi, eps_theta=EPS_THETA):
    """Inverse left Jacobian of SE_2(3); equals jr_inv(-xi)."""
    return _k.jl_inv(np.asarray(xi, dtype=float), eps_theta)


def jr(xi, eps_theta=EPS_THETA):
    """Right Jacobian, computed as the matrix inverse of the series result."""
    return np.linalg.inv(_k.jr_inv(np.asarray(xi, dtype=float), eps_theta))


def jl(xi, eps_theta=EPS_THETA):
    """Left Jacobian, computed as the matrix inverse of the series result."""
    return np.linalg.inv(_k.jl_inv(np.asarray(xi, dtype=float), eps_theta))
