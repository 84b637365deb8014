"""Scenario execution: dual propagation, residuals, bounds, stabilization.

Three modes:

validate   propagate chief and deputy with classical Newtonian dynamics,
           compute the log error at each sample, and independently
           propagate the log-error ODE; report residuals.
bound      evaluate the actual gravity-mismatch term against the
           pointwise bound at every sample and the global worst-case
           bound from trajectory extremes.
stabilize  run the dynamic-inversion loop in the classical truth model:
           leg A applies u1 only and compares the measured log error with
           the log-linear prediction xidot = A(t) xi over the full span;
           leg B adds u2 under a constant reference input and checks the
           decay envelope against the (A + BK) linear prediction.

Artifacts per run: a per-sample table (CSV or JSON records), a
summary.json, and SVG plots.  Outputs are deterministic for a fixed
scenario except the wall_time_s summary field.
"""

import json
import time
from dataclasses import dataclass, asdict
from pathlib import Path

import numpy as np
import scipy.linalg

from . import control, logerror
from .dynamics import GravityModel, input_vector
from .exceptions import BoundViolation
from .integrate import (propagate_classical, propagate_linear,
                        propagate_log_error, propagate_pair)
from .liegroup import XI_P, XI_R, XI_V

FLOAT_FMT = "%.17g"


@dataclass
class RunSummary:
    """Headline numbers of one scenario run (unused slots stay 0)."""

    mode: str
    max_position_error_m: float = 0.0
    max_velocity_error_ms: float = 0.0
    max_attitude_error_rad: float = 0.0
    max_residual_position_m: float = 0.0
    max_residual_velocity_ms: float = 0.0
    max_residual_attitude_rad: float = 0.0
    max_relative_residual_pct: float = 0.0
    max_mismatch_ms2: float = 0.0
    max_pointwise_bound_ms2: float = 0.0
    global_bound_ms2: float = 0.0
    ratio_actual_to_global: float = 0.0
    min_reference_radius_m: float = 0.0
    achieved_perigee_radius_m: float = 0.0
    stabilize_u1_rel_agreement: float = 0.0
    stabilize_u1u2_rel_agreement: float = 0.0
    stabilize_envelope_ok: bool = True
    wall_time_s: float = 0.0


def _fmt_row(values):
    return ",".join(FLOAT_FMT % v for v in values)


def write_table(path, header, rows, fmt):
    """Emit the per-sample table as CSV or a JSON record list."""
    path = Path(path)
    if fmt == "csv":
        lines = [",".join(header)]
        lines += [_fmt_row(r) for r in rows]
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    elif fmt == "json":
        recs = [{h: FLOAT_FMT % v for h, v in zip(header, r)} for r in rows]
        path.write_text(json.dumps(recs, indent=1) + "\n", encoding="utf-8")
    else:
        raise ValueError(f"unknown format {fmt!r}")


def write_summary(path, summary):
    data = asdict(summary)
    for k, v in data.items():
        if isinstance(v, float):
            data[k] = float(FLOAT_FMT % v)
    Path(path).write_text(json.dumps(data, indent=1, sort_keys=True) + "\n",
                          encoding="utf-8")


def _xi_slot_norms(xi):
    return (np.linalg.norm(xi[:, XI_P], axis=1),
            np.linalg.norm(xi[:, XI_V], axis=1),
            np.linalg.norm(xi[:, XI_R], axis=1))


def _dual_propagation(sc, model):
    """Chief + deputy classical runs and the sampled classical log error."""
    chief0, deputy0 = sc.initial_states()
    cfg = sc.integrator
    t_end = sc.t_end_s
    chief = propagate_classical(chief0, sc.chief_input, model, cfg, t_end)
    deputy = propagate_classical(deputy0, sc.deputy_input, model, cfg, t_end)
    n = len(chief)
    xi_cl = np.empty((n, 9))
    for i in range(n):
        xi_cl[i] = logerror.log_error(deputy.group_element(i),
                                      chief.group_element(i))
    return chief, deputy, xi_cl


def run_validate(sc, out_dir, fmt="csv"):
    """Dual propagation and residual comparison (paper-replication mode)."""
    t_start = time.perf_counter()
    model = GravityModel(sc.mu_m3s2)
    chief, deputy, xi_cl = _dual_propagation(sc, model)

    def n_tilde(t):
        nbar = input_vector(sc.chief_input(t))
        nact = input_vector(sc.deputy_input(t))
        return nbar - nact

    log_traj = propagate_log_error(xi_cl[0], chief, n_tilde, model,
                                   sc.integrator, sc.t_end_s)
    d = xi_cl - log_traj.xi

    np_cl, nv_cl, nr_cl = _xi_slot_norms(xi_cl)
    rel = np.linalg.norm(d, axis=1) / np.maximum(np.linalg.norm(xi_cl, axis=1),
                                                 1e-12) * 100.0

    summary = RunSummary(
        mode="validate",
        max_position_error_m=float(np_cl.max()),
        max_velocity_error_ms=float(nv_cl.max()),
        max_attitude_error_rad=float(nr_cl.max()),
        max_residual_position_m=float(np.linalg.norm(d[:, XI_P], axis=1).max()),
        max_residual_velocity_ms=float(np.linalg.norm(d[:, XI_V], axis=1).max()),
        max_residual_attitude_rad=float(np.linalg.norm(d[:, XI_R], axis=1).max()),
        max_relative_residual_pct=float(rel.max()),
        min_reference_radius_m=float(np.linalg.norm(chief.p, axis=1).min()),
        achieved_perigee_radius_m=sc.orbit.perigee_radius_m,
        wall_time_s=time.perf_counter() - t_start,
    )

    header = (["t_s"]
              + [f"xi_classical_{s}" for s in _SLOT_NAMES]
              + [f"xi_log_{s}" for s in _SLOT_NAMES]
              + [f"delta_{s}" for s in _SLOT_NAMES])
    rows = np.column_stack([chief.t, xi_cl, log_traj.xi, d])
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_table(out_dir / f"validate_samples.{fmt}", header, rows, fmt)
    write_summary(out_dir / "validate_summary.json", summary)
    return summary


_SLOT_NAMES = ["p_x", "p_y", "p_z", "v_x", "v_y", "v_z", "R_x", "R_y", "R_z"]


def run_bound(sc, out_dir, fmt="csv"):
    """Gravity-mismatch bound verification along the dual propagation."""
    t_start = time.perf_counter()
    model = GravityModel(sc.mu_m3s2)
    chief, deputy, xi_cl = _dual_propagation(sc, model)
    n = len(chief)

    actual = np.empty(n)
    bound = np.empty(n)
    for i in range(n):
        Xbar = chief.group_element(i)
        term = logerror.gravity_mismatch_term(xi_cl[i], Xbar, deputy.p[i], model)
        actual[i] = np.linalg.norm(term)
        bound[i] = logerror.pointwise_bound(
            logerror.bound_inputs_from_states(xi_cl[i], Xbar, model))

    ratio = actual / np.maximum(bound, 1e-300)
    np_cl, nv_cl, nr_cl = _xi_slot_norms(xi_cl)
    r_ref = np.linalg.norm(chief.p, axis=1)
    gb = logerror.global_bound(float(r_ref.min()), float(np_cl.max()),
                               float(nr_cl.max()), model.mu)

    summary = RunSummary(
        mode="bound",
        max_position_error_m=float(np_cl.max()),
        max_velocity_error_ms=float(nv_cl.max()),
        max_attitude_error_rad=float(nr_cl.max()),
        max_mismatch_ms2=float(actual.max()),
        max_pointwise_bound_ms2=float(bound.max()),
        global_bound_ms2=gb,
        ratio_actual_to_global=float(actual.max() / gb) if gb > 0.0 else 0.0,
        min_reference_radius_m=float(r_ref.min()),
        achieved_perigee_radius_m=sc.orbit.perigee_radius_m,
        wall_time_s=time.perf_counter() - t_start,
    )

    header = ["t_s", "actual_mismatch_ms2", "pointwise_bound_ms2", "ratio"]
    rows = np.column_stack([chief.t, actual, bound, ratio])
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_table(out_dir / f"bound_samples.{fmt}", header, rows, fmt)
    write_summary(out_dir / "bound_summary.json", summary)

    violations = int(np.sum(ratio >= 1.0))
    if violations:
        raise BoundViolation(
            f"{violations} of {n} samples exceed the pointwise bound "
            f"(max ratio {ratio.max():.6f})")
    return summary


def _stabilize_leg_a(sc, model):
    """u1 only, full span: classical loop vs xidot = A(t) xi."""
    chief0, deputy0 = sc.initial_states()
    cfg = sc.integrator
    t_end = sc.t_end_s

    def deputy_control(t, X, Xbar):
        u1 = control.u1_dynamic_inversion(X, Xbar, model)
        return control.apply_mismatch_as_input(
            input_vector(sc.chief_input(t)), u1)

    chief, deputy = propagate_pair(chief0, deputy0, sc.chief_input,
                                   deputy_control, model, cfg, t_end)
    n = len(chief)
    xi_cl = np.empty((n, 9))
    for i in range(n):
        xi_cl[i] = logerror.log_error(deputy.group_element(i),
                                      chief.group_element(i))

    def A_of_t(t):
        return control.closed_loop_A(input_vector(sc.chief_input(t)))

    xi_lin = propagate_linear(xi_cl[0], A_of_t, chief.t, cfg)
    denom = max(np.linalg.norm(xi_cl, axis=1).max(), 1e-12)
    rel = float(np.linalg.norm(xi_cl - xi_lin, axis=1).max() / denom)
    return chief.t, xi_cl, xi_lin, rel


def _stabilize_leg_b(sc, model, decay_rate):
    """u1 + u2 under constant reference input; envelope + (A+BK) prediction."""
    chief0, deputy0 = sc.initial_states()
    cfg = sc.integrator
    t_end = min(sc.t_end_s, 15.0 / decay_rate)

    def ref_input(t):
        u = sc.chief_input(t)
        return type(u)(np.zeros(3), u.omega)      # thrust off: constant n_bar

    n_bar = input_vector(ref_input(0.0))
    gain = control.default_gain(n_bar, decay_rate)

    def deputy_control(t, X, Xbar):
        n_tilde = control.u1_dynamic_inversion(X, Xbar, model)
        xi = logerror.log_error(X, Xbar)
        n_tilde = n_tilde + control.u2_stabilizing(xi, gain)
        return control.apply_mismatch_as_input(n_bar, n_tilde)

    chief, deputy = propagate_pair(chief0, deputy0, ref_input,
                                   deputy_control, model, cfg, t_end)
    n = len(chief)
    xi_cl = np.empty((n, 9))
    for i in range(n):
        xi_cl[i] = logerror.log_error(deputy.group_element(i),
                                      chief.group_element(i))

    Acl = control.closed_loop_A(n_bar) + control.input_matrix() @ gain.K
    xi_lin = np.empty_like(xi_cl)
    for i, t in enumerate(chief.t):
        xi_lin[i] = scipy.linalg.expm(Acl * t) @ xi_cl[0]

    norms = np.linalg.norm(xi_cl, axis=1)
    envelope = _ENVELOPE_MARGIN * norms[0] * np.exp(-0.5 * decay_rate * chief.t)
    env_ok = bool(np.all(norms <= envelope))
    denom = max(np.linalg.norm(xi_lin, axis=1).max(), 1e-12)
    rel = float(np.linalg.norm(xi_cl - xi_lin, axis=1).max() / denom)
    return chief.t, norms, np.linalg.norm(xi_lin, axis=1), envelope, env_ok, rel


_ENVELOPE_MARGIN = 1.5
_LEG_A_REL_TOL = 1e-6


def run_stabilize(sc, out_dir, fmt="csv", decay_rate=control.DEFAULT_DECAY_RATE):
    """Dynamic-inversion demonstration (legs A and B)."""
    t_start = time.perf_counter()
    model = GravityModel(sc.mu_m3s2)

    t_a, xi_cl_a, xi_lin_a, rel_a = _stabilize_leg_a(sc, model)
    t_b, norm_b, norm_lin_b, env_b, env_ok, rel_b = _stabilize_leg_b(
        sc, model, decay_rate)

    summary = RunSummary(
        mode="stabilize",
        max_position_error_m=float(np.linalg.norm(xi_cl_a[:, XI_P], axis=1).max()),
        max_velocity_error_ms=float(np.linalg.norm(xi_cl_a[:, XI_V], axis=1).max()),
        max_attitude_error_rad=float(np.linalg.norm(xi_cl_a[:, XI_R], axis=1).max()),
        stabilize_u1_rel_agreement=rel_a,
        stabilize_u1u2_rel_agreement=rel_b,
        stabilize_envelope_ok=env_ok,
        achieved_perigee_radius_m=sc.orbit.perigee_radius_m,
        wall_time_s=time.perf_counter() - t_start,
    )

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    header_a = (["t_s"] + [f"xi_{s}" for s in _SLOT_NAMES]
                + [f"xi_pred_{s}" for s in _SLOT_NAMES])
    write_table(out_dir / f"stabilize_u1_samples.{fmt}", header_a,
                np.column_stack([t_a, xi_cl_a, xi_lin_a]), fmt)
    header_b = ["t_s", "xi_norm", "xi_norm_linear", "envelope"]
    write_table(out_dir / f"stabilize_u1u2_samples.{fmt}", header_b,
                np.column_stack([t_b, norm_b, norm_lin_b, env_b]), fmt)
    write_summary(out_dir / "stabilize_summary.json", summary)

    if not env_ok:
        raise BoundViolation("closed-loop norm exceeded the decay envelope")
    if rel_a > _LEG_A_REL_TOL:
        raise BoundViolation(
            f"u1 leg deviates from the log-linear prediction: {rel_a:.3e}")
    return summary
