"""Newtonian truth model and mixed-invariant formulation checks."""

import numpy as np
import pytest

from se23sim import dynamics as dyn
from se23sim import liegroup as lg
from se23sim.exceptions import OriginSingularity
from conftest import random_algebra

MU = 3.986004418e14


@pytest.fixture
def model():
    return dyn.GravityModel(MU)


def random_orbital_state(rng):
    xi = random_algebra(rng, 1, rot_scale=0.5)[0]
    X = lg.se23_exp(xi)
    p = rng.normal(size=3)
    p = (6.6e6 + 4.0e7 * rng.uniform()) * p / np.linalg.norm(p)
    v = rng.normal(size=3) * 3.0e3
    return lg.GroupElement(X.R, v, p)


# ------------------------------------------------------------- gravity

def test_gravity_radial(model):
    r = 6.871e6
    g = dyn.gravity([r, 0.0, 0.0], model)
    assert np.abs(g - [-MU / r**2, 0.0, 0.0]).max() < 1e-12


def test_gravity_magnitude_low_orbit(model):
    g = dyn.gravity([6.871e6, 0.0, 0.0], model)
    assert abs(np.linalg.norm(g) - MU / 6.871e6**2) < 1e-12
    assert abs(np.linalg.norm(g) - 8.44) < 0.01


def test_gravity_rotation_equivariance(model, rng):
    for _ in range(50):
        p = rng.normal(size=3) * 1e7 + np.array([1e7, 0, 0])
        Q = lg.so3_exp(rng.normal(size=3))
        lhs = dyn.gravity(Q @ p, model)
        rhs = Q @ dyn.gravity(p, model)
        assert np.abs(lhs - rhs).max() < 1e-12 * np.linalg.norm(lhs)


def test_gravity_origin_guard(model):
    with pytest.raises(OriginSingularity):
        dyn.gravity([0.5, 0.0, 0.0], model)


def test_gravity_model_requires_positive_mu():
    with pytest.raises(ValueError):
        dyn.GravityModel(0.0)


# ----------------------------------------------------- gravity_jacobian

def test_gravity_jacobian_spectral_norm(model, rng):
    for _ in range(20):
        p = rng.normal(size=3)
        p *= (7e6 + 3e7 * rng.uniform()) / np.linalg.norm(p)
        J = dyn.gravity_jacobian(p, model)
        r = np.linalg.norm(p)
        assert np.abs(J - J.T).max() < 1e-18
        assert abs(np.linalg.norm(J, 2) - 2 * MU / r**3) < 1e-10 * 2 * MU / r**3


def test_gravity_jacobian_finite_difference(model, rng):
    h = 1.0
    for _ in range(10):
        p = rng.normal(size=3)
        p *= 1.0e7 / np.linalg.norm(p)
        J = dyn.gravity_jacobian(p, model)
        for k in range(3):
            e = np.zeros(3)
            e[k] = h
            fd = (dyn.gravity(p + e, model) - dyn.gravity(p - e, model)) / (2 * h)
            assert np.abs(fd - J[:, k]).max() < 1e-6 * np.abs(J).max()


def test_gravity_jacobian_traceless(model, rng):
    p = rng.normal(size=3) * 1e7 + np.array([2e7, 0, 0])
    assert abs(np.trace(dyn.gravity_jacobian(p, model))) < 1e-20


# -------------------------------------------------------- classical_rhs

def test_classical_rhs_coasting_circular(model):
    r = 7.0e6
    v_circ = np.sqrt(MU / r)
    X = lg.GroupElement(np.eye(3), [0.0, v_circ, 0.0], [r, 0.0, 0.0])
    pdot, vdot, Rdot = dyn.classical_rhs(X, dyn.BodyInput.zero(), model)
    assert np.array_equal(pdot, X.v)
    assert abs(np.linalg.norm(vdot) - MU / r**2) < 1e-12
    assert np.abs(Rdot).max() == 0.0


def test_classical_rhs_pure_thrust():
    tiny = dyn.GravityModel(1e-30)
    X = lg.GroupElement(np.eye(3), np.zeros(3), [7e6, 0.0, 0.0])
    u = dyn.BodyInput([1.0, 0.0, 0.0], np.zeros(3))
    _, vdot, _ = dyn.classical_rhs(X, u, tiny)
    assert np.abs(vdot - [1.0, 0.0, 0.0]).max() < 1e-15


def test_classical_rhs_attitude_rate(model, rng):
    X = random_orbital_state(rng)
    u = dyn.BodyInput(rng.normal(size=3) * 1e-3, rng.normal(size=3) * 1e-3)
    _, _, Rdot = dyn.classical_rhs(X, u, model)
    assert np.abs(Rdot - X.R @ lg.hat3(u.omega)).max() == 0.0


# --------------------------------------------------- mixed-invariant form

def test_c_matrix_layout():
    C = dyn.c_matrix()
    expect = np.zeros((5, 5))
    expect[3, 4] = 1.0
    assert np.array_equal(C, expect)


def test_mixed_invariant_zero_case():
    tiny = dyn.GravityModel(1e-30)
    X = lg.GroupElement(np.eye(3), np.zeros(3), [7e6, 0.0, 0.0])
    Xdot = dyn.mixed_invariant_rhs(X, dyn.BodyInput.zero(), tiny)
    assert np.abs(Xdot).max() < 1e-15


def test_mixed_invariant_equals_classical_1000(model, rng):
    for _ in range(1000):
        X = random_orbital_state(rng)
        u = dyn.BodyInput(rng.normal(size=3) * 0.01, rng.normal(size=3) * 1e-3)
        Xdot = dyn.mixed_invariant_rhs(X, u, model)
        pdot, vdot, Rdot = dyn.classical_rhs(X, u, model)
        scale = max(np.abs(Xdot).max(), 1.0)
        assert np.abs(Xdot[0:3, 0:3] - Rdot).max() < 1e-12 * scale
        assert np.abs(Xdot[0:3, 3] - vdot).max() < 1e-12 * scale
        assert np.abs(Xdot[0:3, 4] - pdot).max() < 1e-12 * scale
        assert np.abs(Xdot[3:5, :]).max() == 0.0


def test_m_matrix_velocity_slot_only(model, rng):
    X = random_orbital_state(rng)
    M = dyn._m_matrix(X.p, model)
    n = lg.vee(M)
    assert np.array_equal(n[lg.XI_V], dyn.gravity(X.p, model))
    n[lg.XI_V] = 0.0
    assert np.abs(n).max() == 0.0


# -------------------------------------------------------------- mismatch

def test_mismatch_identical_trajectories(model, rng):
    X = random_orbital_state(rng)
    n = dyn.input_vector(dyn.BodyInput(rng.normal(size=3), rng.normal(size=3)))
    mm = dyn.mismatch(n, n, X.p, X.p, model)
    assert np.abs(mm.n_tilde).max() == 0.0
    assert np.abs(mm.m_tilde).max() == 0.0


def test_mismatch_equal_positions(model, rng):
    X = random_orbital_state(rng)
    a_bar = rng.normal(size=3) * 0.01
    a = rng.normal(size=3) * 0.01
    om = rng.normal(size=3) * 1e-4
    nb = dyn.input_vector(dyn.BodyInput(a_bar, om))
    n = dyn.input_vector(dyn.BodyInput(a, om))
    mm = dyn.mismatch(nb, n, X.p, X.p, model)
    assert np.abs(mm.m_tilde).max() == 0.0
    assert np.abs(mm.n_tilde[lg.XI_V] - (a_bar - a)).max() == 0.0
    assert np.abs(mm.n_tilde[lg.XI_P]).max() == 0.0


def test_mismatch_gravity_slot(model, rng):
    for _ in range(20):
        p_bar = rng.normal(size=3) * 1e6 + np.array([2e7, 0, 0])
        p = p_bar + rng.normal(size=3) * 1e5
        n = dyn.input_vector(dyn.BodyInput.zero())
        mm = dyn.mismatch(n, n, p_bar, p, model)
        expect = dyn.gravity(p_bar, model) - dyn.gravity(p, model)
        assert np.array_equal(mm.m_tilde[lg.XI_V], expect)
        assert np.abs(mm.m_tilde[lg.XI_P]).max() == 0.0
        assert np.abs(mm.m_tilde[lg.XI_R]).max() == 0.0


def test_input_vector_layout(rng):
    u = dyn.BodyInput(rng.normal(size=3), rng.normal(size=3))
    n = dyn.input_vector(u)
    assert np.abs(n[lg.XI_P]).max() == 0.0
    assert np.array_equal(n[lg.XI_V], u.a)
    assert np.array_equal(n[lg.XI_R], u.omega)
