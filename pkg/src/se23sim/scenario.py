"""Scenario description, config file round-trip, and orbit conversions.

Scenario files are TOML with unit-suffixed keys; serialization is
canonical (fixed key order, repr floats) so parse -> serialize is
byte-identical.
"""

import math
from dataclasses import dataclass, field

import numpy as np
import tomli

from .dynamics import BodyInput, EARTH_MU_M3S2
from .exceptions import DomainError
from .integrate import IntegratorConfig
from .liegroup import GroupElement, so3_exp

MODES = ("validate", "bound", "stabilize")


@dataclass(frozen=True)
class OrbitElements:
    semi_major_axis_m: float
    eccentricity: float
    inclination_rad: float
    raan_rad: float
    arg_perigee_rad: float
    true_anomaly_rad: float

    def __post_init__(self):
        if not (0.0 <= self.eccentricity < 1.0):
            raise DomainError("eccentricity must be in [0, 1)")
        if self.semi_major_axis_m <= 0.0:
            raise DomainError("semi-major axis must be positive")

    @property
    def perigee_radius_m(self):
        return self.semi_major_axis_m * (1.0 - self.eccentricity)


@dataclass(frozen=True)
class ThrustProfile:
    """Sinusoidal body-frame thrust along a fixed body axis."""

    type: str = "sinusoidal"
    max_accel_ms2: float = 0.002
    period_s: float = 5373.0
    axis: tuple = (1.0, 0.0, 0.0)
    phase_rad: float = 0.0

    def __post_init__(self):
        if self.type != "sinusoidal":
            raise ValueError(f"unsupported thrust type {self.type!r}")
        ax = np.asarray(self.axis, dtype=float)
        if abs(np.linalg.norm(ax) - 1.0) > 1e-6:
            raise ValueError("thrust axis must be a unit vector")

    def accel_at(self, t):
        ax = np.asarray(self.axis, dtype=float)
        return (self.max_accel_ms2
                * math.sin(2.0 * math.pi * t / self.period_s + self.phase_rad)) * ax


@dataclass(frozen=True)
class InitialOffsets:
    """Deputy-minus-chief offsets: inertial position/velocity, body axis-angle."""

    position_m: tuple = (0.0, 0.0, 0.0)
    velocity_ms: tuple = (0.0, 0.0, 0.0)
    attitude_rad: tuple = (0.0, 0.0, 0.0)


@dataclass(frozen=True)
class Scenario:
    mode: str = "validate"
    seed: int = 1
    mu_m3s2: float = EARTH_MU_M3S2
    duration_orbits: float = 2.0
    omega_ref_rads: tuple = (2.0e-4, 1.0e-4, 1.0e-4)
    omega_actual_rads: tuple = (2.0e-4, 1.0e-4, 1.0e-4)
    orbit: OrbitElements = field(default_factory=lambda: OrbitElements(
        2.6521e7, 0.74, math.radians(63.4), 0.0, 1.5 * math.pi, math.pi))
    chief_thrust: ThrustProfile = field(default_factory=ThrustProfile)
    initial_offsets: InitialOffsets = field(default_factory=InitialOffsets)
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.mu_m3s2 <= 0.0 or self.duration_orbits <= 0.0:
            raise ValueError("mu and duration must be positive")
        rp = self.orbit.perigee_radius_m
        if rp <= 1.0:
            raise DomainError("perigee radius inside the gravity guard radius")
        if np.linalg.norm(self.initial_offsets.position_m) >= rp:
            raise DomainError("position offset must stay below the perigee radius")

    @property
    def orbit_period_s(self):
        return orbital_period(self.orbit.semi_major_axis_m, self.mu_m3s2)

    @property
    def t_end_s(self):
        return self.duration_orbits * self.orbit_period_s

    def chief_input(self, t):
        return BodyInput(self.chief_thrust.accel_at(t),
                         np.asarray(self.omega_ref_rads, dtype=float))

    def deputy_input(self, t):
        return BodyInput(np.zeros(3), np.asarray(self.omega_actual_rads, dtype=float))

    def initial_states(self):
        """Chief and deputy group elements at t = 0 (chief attitude = I)."""
        p, v = elements_to_state(self.orbit, self.mu_m3s2)
        chief = GroupElement(np.eye(3), v, p)
        off = self.initial_offsets
        deputy = GroupElement(
            chief.R @ so3_exp(np.asarray(off.attitude_rad, dtype=float)),
            v + np.asarray(off.velocity_ms, dtype=float),
            p + np.asarray(off.position_m, dtype=float))
        return chief, deputy


def orbital_period(a, mu):
    return 2.0 * math.pi * math.sqrt(a ** 3 / mu)


def elements_to_state(orbit, mu):
    """Cartesian (p, v) in the inertial frame from Keplerian elements."""
    a, e = orbit.semi_major_axis_m, orbit.eccentricity
    if not e < 1.0:
        raise DomainError("conversion requires e < 1")
    nu = orbit.true_anomaly_rad
    p_semi = a * (1.0 - e * e)
    r = p_semi / (1.0 + e * math.cos(nu))
    pos_pf = np.array([r * math.cos(nu), r * math.sin(nu), 0.0])
    vfac = math.sqrt(mu / p_semi)
    vel_pf = np.array([-vfac * math.sin(nu), vfac * (e + math.cos(nu)), 0.0])

    cO, sO = math.cos(orbit.raan_rad), math.sin(orbit.raan_rad)
    ci, si = math.cos(orbit.inclination_rad), math.sin(orbit.inclination_rad)
    cw, sw = math.cos(orbit.arg_perigee_rad), math.sin(orbit.arg_perigee_rad)
    Rz_O = np.array([[cO, -sO, 0], [sO, cO, 0], [0, 0, 1.0]])
    Rx_i = np.array([[1.0, 0, 0], [0, ci, -si], [0, si, ci]])
    Rz_w = np.array([[cw, -sw, 0], [sw, cw, 0], [0, 0, 1.0]])
    Q = Rz_O @ Rx_i @ Rz_w
    return Q @ pos_pf, Q @ vel_pf


def state_to_elements(p, v, mu):
    """Keplerian elements from a Cartesian state (inverse conversion oracle)."""
    p = np.asarray(p, dtype=float)
    v = np.asarray(v, dtype=float)
    r = np.linalg.norm(p)
    h = np.cross(p, v)
    hn = np.linalg.norm(h)
    node = np.cross([0.0, 0.0, 1.0], h)
    nn = np.linalg.norm(node)
    e_vec = (np.cross(v, h) / mu) - p / r
    e = np.linalg.norm(e_vec)
    energy = 0.5 * (v @ v) - mu / r
    if energy >= 0.0:
        raise DomainError("state is not on a bound orbit")
    a = -mu / (2.0 * energy)
    inc = math.acos(np.clip(h[2] / hn, -1.0, 1.0))
    raan = math.atan2(node[1], node[0]) % (2.0 * math.pi)
    argp = math.atan2(np.dot(np.cross(node, e_vec), h) / hn,
                      np.dot(node, e_vec)) % (2.0 * math.pi)
    nu = math.atan2(np.dot(np.cross(e_vec, p), h) / hn,
                    np.dot(e_vec, p)) % (2.0 * math.pi)
    if nn < 1e-12:
        raise DomainError("equatorial orbit: RAAN undefined")
    return OrbitElements(a, e, inc, raan, argp, nu)


# ---------------------------------------------------------------------------
# canonical TOML serialization

def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, str):
        return f'"{v}"'
    if isinstance(v, (tuple, list, np.ndarray)):
        return "[" + ", ".join(_fmt(float(x)) for x in v) + "]"
    raise TypeError(f"cannot serialize {type(v)}")


def serialize_scenario(sc):
    """Canonical text form; parse -> serialize round-trips byte-identically."""
    o, th, off, ic = sc.orbit, sc.chief_thrust, sc.initial_offsets, sc.integrator
    lines = [
        f"mode = {_fmt(sc.mode)}",
        f"seed = {_fmt(int(sc.seed))}",
        f"mu_m3s2 = {_fmt(float(sc.mu_m3s2))}",
        f"duration_orbits = {_fmt(float(sc.duration_orbits))}",
        f"omega_ref_rads = {_fmt(sc.omega_ref_rads)}",
        f"omega_actual_rads = {_fmt(sc.omega_actual_rads)}",
        "",
        "[orbit]",
        f"semi_major_axis_m = {_fmt(float(o.semi_major_axis_m))}",
        f"eccentricity = {_fmt(float(o.eccentricity))}",
        f"inclination_rad = {_fmt(float(o.inclination_rad))}",
        f"raan_rad = {_fmt(float(o.raan_rad))}",
        f"arg_perigee_rad = {_fmt(float(o.arg_perigee_rad))}",
        f"true_anomaly_rad = {_fmt(float(o.true_anomaly_rad))}",
        "",
        "[chief_thrust]",
        f"type = {_fmt(th.type)}",
        f"max_accel_ms2 = {_fmt(float(th.max_accel_ms2))}",
        f"period_s = {_fmt(float(th.period_s))}",
        f"axis = {_fmt(th.axis)}",
        f"phase_rad = {_fmt(float(th.phase_rad))}",
        "",
        "[initial_offsets]",
        f"position_m = {_fmt(off.position_m)}",
        f"velocity_ms = {_fmt(off.velocity_ms)}",
        f"attitude_rad = {_fmt(off.attitude_rad)}",
        "",
        "[integrator]",
        f"method = {_fmt(ic.method)}",
        f"fixed_dt_s = {_fmt(float(ic.fixed_dt))}",
        f"rel_tol = {_fmt(float(ic.rel_tol))}",
        f"abs_tol = {_fmt(float(ic.abs_tol))}",
        f"max_dt_s = {_fmt(float(ic.max_dt))}",
        f"min_dt_s = {_fmt(float(ic.min_dt))}",
        f"sample_dt_s = {_fmt(float(ic.sample_dt))}",
        "",
    ]
    return "\n".join(lines)


_TOP_KEYS = {"mode", "seed", "mu_m3s2", "duration_orbits", "omega_ref_rads",
             "omega_actual_rads", "orbit", "chief_thrust", "initial_offsets",
             "integrator"}
_TABLE_KEYS = {
    "orbit": {"semi_major_axis_m", "eccentricity", "inclination_rad",
              "raan_rad", "arg_perigee_rad", "true_anomaly_rad"},
    "chief_thrust": {"type", "max_accel_ms2", "period_s", "axis", "phase_rad"},
    "initial_offsets": {"position_m", "velocity_ms", "attitude_rad"},
    "integrator": {"method", "fixed_dt_s", "rel_tol", "abs_tol", "max_dt_s",
                   "min_dt_s", "sample_dt_s"},
}


def parse_scenario(text):
    raw = tomli.loads(text)
    unknown = set(raw) - _TOP_KEYS
    if unknown:
        raise ValueError(f"unknown scenario keys: {sorted(unknown)}")
    for table, allowed in _TABLE_KEYS.items():
        extra = set(raw.get(table, {})) - allowed
        if extra:
            raise ValueError(f"unknown keys in [{table}]: {sorted(extra)}")
    orbit = OrbitElements(**{
        "semi_major_axis_m": raw["orbit"]["semi_major_axis_m"],
        "eccentricity": raw["orbit"]["eccentricity"],
        "inclination_rad": raw["orbit"]["inclination_rad"],
        "raan_rad": raw["orbit"]["raan_rad"],
        "arg_perigee_rad": raw["orbit"]["arg_perigee_rad"],
        "true_anomaly_rad": raw["orbit"]["true_anomaly_rad"],
    })
    tr = raw["chief_thrust"]
    thrust = ThrustProfile(tr["type"], tr["max_accel_ms2"], tr["period_s"],
                           tuple(tr["axis"]), tr.get("phase_rad", 0.0))
    offs = raw["initial_offsets"]
    offsets = InitialOffsets(tuple(offs["position_m"]),
                             tuple(offs["velocity_ms"]),
                             tuple(offs["attitude_rad"]))
    ic = raw["integrator"]
    integrator = IntegratorConfig(
        method=ic["method"], fixed_dt=ic["fixed_dt_s"], rel_tol=ic["rel_tol"],
        abs_tol=ic["abs_tol"], max_dt=ic["max_dt_s"], min_dt=ic["min_dt_s"],
        sample_dt=ic["sample_dt_s"])
    return Scenario(
        mode=raw["mode"], seed=raw["seed"], mu_m3s2=raw["mu_m3s2"],
        duration_orbits=raw["duration_orbits"],
        omega_ref_rads=tuple(raw["omega_ref_rads"]),
        omega_actual_rads=tuple(raw["omega_actual_rads"]),
        orbit=orbit, chief_thrust=thrust, initial_offsets=offsets,
        integrator=integrator)


def load_scenario(path):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_scenario(fh.read())


def save_scenario(sc, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(serialize_scenario(sc))


def molniya_scenario():
    """Two-orbit Molniya-like maneuver-tracking scenario (shipped default).

    Semi-major axis, eccentricity, thrust amplitude, angular velocities,
    duration, and offset magnitudes follow the validation experiment; the
    remaining free parameters (orbit orientation, starting anomaly, thrust
    period/axis/phase, offset directions) are calibrated so the two-orbit
    run reproduces the reported error-growth and gravity-bound figures.
    """
    u = 1.0 / math.sqrt(3.0)
    return Scenario(
        mode="validate",
        seed=1,
        mu_m3s2=EARTH_MU_M3S2,
        duration_orbits=2.0,
        omega_ref_rads=(2.0e-4, 1.0e-4, 1.0e-4),
        omega_actual_rads=(2.0e-4, 1.0e-4, 1.0e-4),
        orbit=OrbitElements(2.6521e7, 0.74, 1.106538745764405,
                            0.15144499, 4.64816528, 2.49488198),
        chief_thrust=ThrustProfile("sinusoidal", 0.002, 22218.40136397605,
                                   (0.0, 0.9999404565717896, 0.01091253),
                                   0.94226608),
        initial_offsets=InitialOffsets(
            (219.0 * u, 219.0 * u, 219.0 * u),
            (0.22 * u, 0.22 * u, 0.22 * u),
            (0.05 * u, 0.05 * u, 0.05 * u)),
        integrator=IntegratorConfig(method="adaptive853"))
