"""Dynamic inversion, stabilizing feedback, and the closed-loop system."""

import numpy as np
import pytest
import scipy.linalg

from se23sim import control as ctl
from se23sim import dynamics as dyn
from se23sim import liegroup as lg
from se23sim import logerror as le
from se23sim.exceptions import GainSynthesisFailure
from conftest import random_algebra

MU = 3.986004418e14


@pytest.fixture
def model():
    return dyn.GravityModel(MU)


def random_pair(rng, sep_scale=1e5):
    p = rng.normal(size=3)
    p *= (7e6 + 3e7 * rng.uniform()) / np.linalg.norm(p)
    X = lg.GroupElement(lg.so3_exp(rng.normal(size=3)),
                        rng.normal(size=3) * 3e3, p)
    dxi = random_algebra(rng, 1, rot_scale=0.3, trans_scale=sep_scale)[0]
    return X, lg.compose(X, lg.se23_exp(dxi))


def const_n_bar(rng):
    return dyn.input_vector(dyn.BodyInput(rng.normal(size=3) * 0.002,
                                          rng.normal(size=3) * 2e-4))


# ------------------------------------------------------------ input matrix

def test_input_matrix_shape_and_orthonormal_columns():
    B = ctl.input_matrix()
    assert B.shape == (9, 6)
    assert np.array_equal(B.T @ B, np.eye(6))
    assert np.abs(B[0:3, :]).max() == 0.0


# -------------------------------------------------------------- closed_loop_A

def test_closed_loop_A_zero_input():
    assert np.array_equal(ctl.closed_loop_A(np.zeros(9)), le.a_c_matrix())


def test_closed_loop_A_blocks(rng):
    a_bar = rng.normal(size=3) * 0.01
    om_bar = rng.normal(size=3) * 1e-3
    A = ctl.closed_loop_A(dyn.input_vector(dyn.BodyInput(a_bar, om_bar)))
    W = lg.hat3(om_bar)
    assert np.array_equal(A[0:3, 0:3], -W)
    assert np.array_equal(A[3:6, 3:6], -W)
    assert np.array_equal(A[6:9, 6:9], -W)
    assert np.array_equal(A[0:3, 3:6], np.eye(3))
    assert np.array_equal(A[3:6, 6:9], -lg.hat3(a_bar))
    assert np.abs(A[6:9, 0:6]).max() == 0.0
    assert np.abs(A[3:6, 0:3]).max() == 0.0


def test_closed_loop_A_expm_vs_rk4(rng):
    # constant n_bar: matrix-exponential STM vs RK4 integration
    n_bar = const_n_bar(rng)
    A = ctl.closed_loop_A(n_bar)
    xi = random_algebra(rng, 1, trans_scale=100.0)[0]
    T, n_steps = 50.0, 2000
    h = T / n_steps
    y = xi.copy()
    for _ in range(n_steps):
        k1 = A @ y
        k2 = A @ (y + h / 2 * k1)
        k3 = A @ (y + h / 2 * k2)
        k4 = A @ (y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    expect = scipy.linalg.expm(A * T) @ xi
    assert np.abs(y - expect).max() < 1e-9 * max(1.0, np.abs(expect).max())


# ------------------------------------------------------------------- u1

def test_u1_zero_at_equal_positions(model, rng):
    X, _ = random_pair(rng)
    Xbar = lg.GroupElement(lg.so3_exp(rng.normal(size=3)), X.v, X.p)
    assert np.abs(ctl.u1_dynamic_inversion(X, Xbar, model)).max() == 0.0


def test_u1_identity_attitude_slot_value(model, rng):
    p = np.array([2e7, 1e6, -5e5])
    pbar = p + np.array([1e5, 2e5, -1e5])
    X = lg.GroupElement(np.eye(3), np.zeros(3), p)
    Xbar = lg.GroupElement(np.eye(3), np.zeros(3), pbar)
    u1 = ctl.u1_dynamic_inversion(X, Xbar, model)
    expect = dyn.gravity(p, model) - dyn.gravity(pbar, model)
    assert np.array_equal(u1[lg.XI_V], expect)


def test_u1_slots(model, rng):
    for _ in range(100):
        X, Xbar = random_pair(rng)
        u1 = ctl.u1_dynamic_inversion(X, Xbar, model)
        assert np.abs(u1[lg.XI_P]).max() == 0.0
        assert np.abs(u1[lg.XI_R]).max() == 0.0


def test_u1_cancellation_oracle(model, rng):
    # J_l^-1(xi) u1 + J_r^-1(xi) Ad_{Xbar^-1} m~ = 0
    for _ in range(100):
        X, Xbar = random_pair(rng)
        xi = le.log_error(X, Xbar)
        u1 = ctl.u1_dynamic_inversion(X, Xbar, model)
        m_tilde = dyn.mismatch(np.zeros(9), np.zeros(9), Xbar.p, X.p,
                               model).m_tilde
        total = (lg.jl_inv(xi) @ u1
                 + lg.jr_inv(xi) @ (lg.big_adjoint(lg.inverse(Xbar)) @ m_tilde))
        scale = max(np.abs(lg.jr_inv(xi)
                           @ (lg.big_adjoint(lg.inverse(Xbar)) @ m_tilde)).max(),
                    1e-12)
        assert np.abs(total).max() < 1e-11 * max(1.0, scale)


def test_exact_cancellation_reduces_to_linear(model, rng):
    # with n~ = u1, the full error ODE collapses onto closed_loop_A(n_bar) xi
    for _ in range(50):
        X, Xbar = random_pair(rng)
        xi = le.log_error(X, Xbar)
        n_bar = const_n_bar(rng)
        rhs = ctl.closed_loop_rhs(xi, Xbar, n_bar, model, gain=None)
        expect = ctl.closed_loop_A(n_bar) @ xi
        assert np.abs(rhs - expect).max() < 1e-11 * max(1.0, np.abs(expect).max())


# ------------------------------------------------------------------- u2

def test_u2_zero_cases(rng):
    n_bar = const_n_bar(rng)
    gain = ctl.default_gain(n_bar)
    assert np.abs(ctl.u2_stabilizing(np.zeros(9), gain)).max() == 0.0
    zero_gain = ctl.GainMatrix.__new__(ctl.GainMatrix)
    object.__setattr__(zero_gain, "K", np.zeros((6, 9)))
    object.__setattr__(zero_gain, "n_bar", n_bar)
    xi = random_algebra(rng, 1)[0]
    assert np.abs(ctl.u2_stabilizing(xi, zero_gain)).max() == 0.0


def test_u2_contribution_identity(rng):
    n_bar = const_n_bar(rng)
    gain = ctl.default_gain(n_bar)
    B = ctl.input_matrix()
    for xi in random_algebra(rng, 50, trans_scale=100.0):
        u2 = ctl.u2_stabilizing(xi, gain)
        lhs = lg.jl_inv(xi) @ u2
        rhs = B @ (gain.K @ xi)
        assert np.abs(lhs - rhs).max() < 1e-10 * max(1.0, np.abs(rhs).max())


def test_closed_loop_with_u1_u2(model, rng):
    # n~ = u1 + u2 (full 9-vector): xidot = (A + BK) xi to 1e-10
    n_bar = const_n_bar(rng)
    gain = ctl.default_gain(n_bar)
    Acl = ctl.closed_loop_A(n_bar) + ctl.input_matrix() @ gain.K
    for _ in range(30):
        X, Xbar = random_pair(rng)
        xi = le.log_error(X, Xbar)
        rhs = ctl.closed_loop_rhs(xi, Xbar, n_bar, model, gain=gain)
        expect = Acl @ xi
        assert np.abs(rhs - expect).max() < 1e-10 * max(1.0, np.abs(expect).max())


# ------------------------------------------------- apply_mismatch_as_input

def test_apply_mismatch_zero(rng):
    u_bar = dyn.BodyInput(rng.normal(size=3), rng.normal(size=3))
    n_bar = dyn.input_vector(u_bar)
    u = ctl.apply_mismatch_as_input(n_bar, np.zeros(9))
    assert np.array_equal(u.a, u_bar.a)
    assert np.array_equal(u.omega, u_bar.omega)


def test_apply_mismatch_u1_adjusts_thrust(model, rng):
    X, Xbar = random_pair(rng)
    u1 = ctl.u1_dynamic_inversion(X, Xbar, model)
    n_bar = const_n_bar(rng)
    u = ctl.apply_mismatch_as_input(n_bar, u1)
    expect = n_bar[lg.XI_V] + X.R.T @ (dyn.gravity(Xbar.p, model)
                                       - dyn.gravity(X.p, model))
    assert np.abs(u.a - expect).max() < 1e-18
    assert np.array_equal(u.omega, n_bar[lg.XI_R])


def test_apply_mismatch_roundtrip(model, rng):
    n_bar = const_n_bar(rng)
    n_tilde = random_algebra(rng, 1, trans_scale=0.01)[0]
    n_tilde[lg.XI_P] = 0.0
    u = ctl.apply_mismatch_as_input(n_bar, n_tilde)
    n = dyn.input_vector(u)
    X, Xbar = random_pair(rng)
    mm = dyn.mismatch(n_bar, n, Xbar.p, X.p, model)
    assert np.abs(mm.n_tilde - n_tilde).max() < 1e-18


# ------------------------------------------------------------ default_gain

def test_default_gain_zero_input_hurwitz():
    gain = ctl.default_gain(np.zeros(9))
    eigs = gain.closed_loop_eigenvalues()
    assert np.max(np.real(eigs)) <= -ctl.DEFAULT_DECAY_RATE + 1e-9


def test_default_gain_postcondition_selftest(rng):
    for _ in range(5):
        gain = ctl.default_gain(const_n_bar(rng), decay_rate=0.02)
        eigs = gain.closed_loop_eigenvalues()
        assert np.max(np.real(eigs)) <= -0.02 + 1e-9


def test_gain_matrix_rejects_non_hurwitz():
    with pytest.raises(GainSynthesisFailure):
        ctl.GainMatrix(np.zeros((6, 9)), np.zeros(9))


def test_default_gain_linear_decay_envelope(rng):
    # linear closed-loop simulation decays within the exp(-lam t / 2) envelope
    lam = ctl.DEFAULT_DECAY_RATE
    n_bar = const_n_bar(rng)
    gain = ctl.default_gain(n_bar, lam)
    Acl = ctl.closed_loop_A(n_bar) + ctl.input_matrix() @ gain.K
    xi0 = random_algebra(rng, 1, trans_scale=100.0)[0]
    for t in np.linspace(0.0, 600.0, 40):
        nrm = np.linalg.norm(scipy.linalg.expm(Acl * t) @ xi0)
        assert nrm <= 1.5 * np.linalg.norm(xi0) * np.exp(-0.5 * lam * t)
