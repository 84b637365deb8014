"""Acceptance criteria, one test per criterion, each printing PASS/FAIL.

Criteria 1-4 and 8 run the shipped two-orbit Molniya scenario (shared
module-scoped runs); 5-7 are the structural property suites at their
stated tolerances.
"""

import math
import time

import numpy as np
import pytest

from se23sim import dynamics as dyn
from se23sim import liegroup as lg
from se23sim import logerror as le
from se23sim import runner
from se23sim.scenario import molniya_scenario
from conftest import random_algebra

MU = 3.986004418e14


def _report(num, name, checks):
    """Assert a list of (label, ok, detail) and print one criterion line."""
    ok = all(c[1] for c in checks)
    print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {num}: {name}")
    for label, good, detail in checks:
        print(f"    {'ok ' if good else 'BAD'} {label}: {detail}")
    assert ok, f"criterion {num} failed: " + "; ".join(
        c[0] for c in checks if not c[1])


@pytest.fixture(scope="module")
def scenario():
    return molniya_scenario()


@pytest.fixture(scope="module")
def validate_run(scenario, tmp_path_factory):
    out = tmp_path_factory.mktemp("acc_validate")
    t0 = time.perf_counter()
    summary = runner.run_validate(scenario, out)
    elapsed = time.perf_counter() - t0
    return summary, elapsed


@pytest.fixture(scope="module")
def bound_run(scenario, tmp_path_factory):
    out = tmp_path_factory.mktemp("acc_bound")
    return runner.run_bound(scenario, out), out


@pytest.fixture(scope="module")
def stabilize_run(scenario, tmp_path_factory):
    out = tmp_path_factory.mktemp("acc_stabilize")
    return runner.run_stabilize(scenario, out)


def test_criterion_1_validation_agreement(validate_run):
    s, elapsed = validate_run
    _report(1, "dual-propagation agreement on the shipped Molniya scenario", [
        ("max relative residual <= 1.6e-6 %",
         s.max_relative_residual_pct <= 1.6e-6,
         f"{s.max_relative_residual_pct:.3e} %"),
        ("position residual < 4e-3 m",
         s.max_residual_position_m < 4e-3,
         f"{s.max_residual_position_m:.3e} m"),
        ("velocity residual < 4e-6 m/s",
         s.max_residual_velocity_ms < 4e-6,
         f"{s.max_residual_velocity_ms:.3e} m/s"),
        ("attitude residual < 1e-11 rad",
         s.max_residual_attitude_rad < 1e-11,
         f"{s.max_residual_attitude_rad:.3e} rad"),
        ("runtime < 60 s", elapsed < 60.0, f"{elapsed:.1f} s"),
    ])


def test_criterion_2_error_growth(validate_run):
    s, _ = validate_run
    att_dev = abs(s.max_attitude_error_rad - 0.05)
    _report(2, "error growth magnitudes over two orbits", [
        ("max |xi_p| in [2300, 2500] km",
         2.3e6 <= s.max_position_error_m <= 2.5e6,
         f"{s.max_position_error_m / 1e3:.1f} km"),
        ("max |xi_v| in [1.9, 2.05] km/s",
         1.9e3 <= s.max_velocity_error_ms <= 2.05e3,
         f"{s.max_velocity_error_ms:.1f} m/s"),
        ("|xi_R| constant 0.05 rad to 1e-10",
         att_dev < 1e-10, f"deviation {att_dev:.3e} rad"),
    ])


def test_criterion_3_gravity_bound(bound_run):
    s, out = bound_run
    rows = (out / "bound_samples.csv").read_text().splitlines()[1:]
    ratios = [float(r.split(",")[3]) for r in rows]
    _report(3, "gravity-mismatch bound verification", [
        ("pointwise ratio < 1 at every sample",
         max(ratios) < 1.0, f"max ratio {max(ratios):.4f}"),
        ("max actual mismatch = 2.85 +- 5 %",
         2.85 * 0.95 <= s.max_mismatch_ms2 <= 2.85 * 1.05,
         f"{s.max_mismatch_ms2:.4f} m/s^2"),
        ("max pointwise bound = 10.1 +- 5 %",
         10.1 * 0.95 <= s.max_pointwise_bound_ms2 <= 10.1 * 1.05,
         f"{s.max_pointwise_bound_ms2:.4f} m/s^2"),
        ("global bound = 11.6 +- 2 %",
         11.6 * 0.98 <= s.global_bound_ms2 <= 11.6 * 1.02,
         f"{s.global_bound_ms2:.4f} m/s^2"),
        ("actual/global ratio = 0.25 +- 0.02",
         0.23 <= s.ratio_actual_to_global <= 0.27,
         f"{s.ratio_actual_to_global:.4f}"),
    ])


def test_criterion_4_exact_cancellation(stabilize_run):
    s = stabilize_run
    _report(4, "dynamic inversion makes the loop exactly log-linear", [
        ("u1-controlled classical loop matches xidot = A(t) xi to 1e-8",
         s.stabilize_u1_rel_agreement <= 1e-8,
         f"relative agreement {s.stabilize_u1_rel_agreement:.3e}"),
    ])


def test_criterion_5_coupling_identity():
    rng = np.random.default_rng(5)
    C = dyn.c_matrix()
    A_C = le.a_c_matrix()
    worst = 0.0
    for xi in random_algebra(rng, 10000, trans_scale=1e3, rot_scale=2.0):
        W = lg.wedge(xi)
        lhs = lg.vee(W @ C - C @ W)
        err = np.abs(lhs - A_C @ xi).max()
        scale = max(1.0, np.abs(xi).max())
        worst = max(worst, err / scale)
    _report(5, "algebra-coupling identity (ad_xi C)^vee = A_C xi", [
        ("exact on 10^4 random draws (<= 1e-15)",
         worst <= 1e-15, f"worst scaled error {worst:.2e}"),
    ])


def test_criterion_6_property_suites():
    rng = np.random.default_rng(6)
    checks = []

    worst = 0.0
    for _ in range(1000):
        xi = random_algebra(rng, 1, rot_scale=1.0, trans_scale=10.0)[0]
        xi[6:9] *= rng.uniform(0, 3.0) / max(np.linalg.norm(xi[6:9]), 1e-12)
        worst = max(worst, np.abs(lg.se23_log(lg.se23_exp(xi)) - xi).max())
    checks.append(("Exp/Log round trip 1e-9 (|xi_R| <= 3)",
                   worst < 1e-9, f"worst {worst:.2e}"))

    worst = 0.0
    for xi in random_algebra(rng, 100):
        T = np.eye(9)
        S = np.eye(9)
        A = lg.ad_matrix(xi)
        for k in range(1, 31):
            T = T @ A / k
            S = S + T
        worst = max(worst,
                    np.abs(lg.big_adjoint(lg.se23_exp(xi)) - S).max())
    checks.append(("Ad_Exp = expm(ad) to 1e-10", worst < 1e-10,
                   f"worst {worst:.2e}"))

    model = dyn.GravityModel(MU)
    worst = 0.0
    for _ in range(1000):
        p = rng.normal(size=3)
        p *= (7e6 + 3e7 * rng.uniform()) / np.linalg.norm(p)
        X = lg.GroupElement(lg.so3_exp(rng.normal(size=3)),
                            rng.normal(size=3) * 3e3, p)
        u = dyn.BodyInput(rng.normal(size=3) * 0.01,
                          rng.normal(size=3) * 1e-3)
        Xdot = dyn.mixed_invariant_rhs(X, u, model)
        pdot, vdot, Rdot = dyn.classical_rhs(X, u, model)
        emb = np.zeros((5, 5))
        emb[0:3, 0:3] = Rdot
        emb[0:3, 3] = vdot
        emb[0:3, 4] = pdot
        scale = max(1.0, np.abs(emb).max())
        worst = max(worst, np.abs(Xdot - emb).max() / scale)
    checks.append(("mixed-invariant RHS = classical RHS to 1e-12 (10^3)",
                   worst < 1e-12, f"worst {worst:.2e}"))

    slots_exact = True
    dominance = True
    d_le_xi = True
    for _ in range(10000):
        p = rng.normal(size=3)
        p *= (7e6 + 3.5e7 * rng.uniform()) / np.linalg.norm(p)
        X = lg.GroupElement(lg.so3_exp(rng.normal(size=3)),
                            rng.normal(size=3) * 3e3, p)
        dxi = random_algebra(rng, 1, rot_scale=rng.uniform(0.01, 0.8),
                             trans_scale=10 ** rng.uniform(1, 6))[0]
        Xbar = lg.compose(X, lg.se23_exp(dxi))
        xi = le.log_error(X, Xbar)
        term = le.gravity_mismatch_term(xi, Xbar, X.p, model)
        slots_exact &= (np.abs(term[lg.XI_P]).max() == 0.0
                        and np.abs(term[lg.XI_R]).max() == 0.0)
        b = le.bound_inputs_from_states(xi, Xbar, model)
        if b.xi_p_norm < b.r:
            dominance &= (np.linalg.norm(term)
                          < le.pointwise_bound(b))
        d_le_xi &= (np.linalg.norm(Xbar.p - X.p)
                    <= np.linalg.norm(xi[lg.XI_P]) * (1 + 1e-12))
    checks.append(("gravity term velocity-slot-only (exact zeros, 10^4)",
                   slots_exact, "zero p and R slots"))
    checks.append(("bound dominance strict on 10^4 pairs", dominance,
                   "actual < pointwise bound"))
    checks.append(("d <= |xi_p| on 10^4 pairs", d_le_xi, "holds"))

    ok_norm = True
    worst_margin = np.inf
    for th in np.linspace(1e-3, math.pi - 0.01, 100):
        axis = rng.normal(size=3)
        axis /= np.linalg.norm(axis)
        nrm = np.linalg.norm(lg.so3_right_jacobian_inv(th * axis), 2)
        limit = (th / 2.0) / math.sin(th / 2.0)
        ok_norm &= nrm <= limit + 1e-12
        worst_margin = min(worst_margin, limit - nrm)
    checks.append(("|J_r^-1,SO3| <= (th/2)/sin(th/2) on 100-point grid",
                   ok_norm, f"min margin {worst_margin:.2e}"))

    _report(6, "structural property suites", checks)


def test_criterion_7_remark_structure():
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(200):
        xi = random_algebra(rng, 1, trans_scale=100.0)[0]
        a_bar = rng.normal(size=3) * 0.01
        om_bar = rng.normal(size=3) * 1e-3
        n_bar = dyn.input_vector(dyn.BodyInput(a_bar, om_bar))
        Xbar = lg.GroupElement(lg.so3_exp(rng.normal(size=3)),
                               rng.normal(size=3) * 1e3,
                               np.array([2e7, 1e6, -3e6]))
        mm = dyn.MismatchPair(np.zeros(9), np.zeros(9))
        out = le.error_rhs(xi, n_bar, mm, Xbar)
        expect = np.concatenate([
            -np.cross(om_bar, xi[lg.XI_P]) + xi[lg.XI_V],
            -np.cross(om_bar, xi[lg.XI_V]) - np.cross(a_bar, xi[lg.XI_R]),
            -np.cross(om_bar, xi[lg.XI_R]),
        ])
        scale = max(1.0, np.abs(expect).max())
        worst = max(worst, np.abs(out - expect).max() / scale)
    _report(7, "Remark-structure of the zero-mismatch error ODE", [
        ("three block equations to 1e-12", worst < 1e-12,
         f"worst {worst:.2e}"),
    ])


def test_criterion_8_conservation(scenario):
    model = dyn.GravityModel(scenario.mu_m3s2)
    _, deputy0 = scenario.initial_states()
    from se23sim.integrate import propagate_classical
    traj = propagate_classical(deputy0, scenario.deputy_input, model,
                               scenario.integrator, scenario.t_end_s)
    r = np.linalg.norm(traj.p, axis=1)
    energy = 0.5 * np.sum(traj.v ** 2, axis=1) - MU / r
    h = np.linalg.norm(np.cross(traj.p, traj.v), axis=1)
    de = np.abs(energy - energy[0]).max() / abs(energy[0])
    dh = np.abs(h - h[0]).max() / h[0]
    _report(8, "coasting two-body conservation over two Molniya orbits", [
        ("specific energy drift < 1e-7 relative", de < 1e-7, f"{de:.2e}"),
        ("angular momentum drift < 1e-7 relative", dh < 1e-7, f"{dh:.2e}"),
    ])
