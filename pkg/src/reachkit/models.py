"""Dynamical systems fed to the recursion.

A SystemModel pairs a vector field f(s, u) with control bounds.  Vector
fields accept a single state (d,) or a batch (n, d) and one control
vector; everything downstream exploits the batched form.

Builtin systems:

* single_integrator, double_integrator, dubins_car: small systems with
  known answers, used to verify the solver.
* longitudinal_flight: pitch-plane motion of a large transport
  aircraft at constant airspeed, state [alpha, q, theta], control
  elevator deflection.  Thrust is chosen each instant so the airspeed
  derivative cancels exactly, which removes v from the state.
* ground_motion: landing-roll dynamics, state [v_x, v_y, r], control
  nose-wheel deflection.  The published parameter set underdetermines
  the ground-reaction forces; the closure here (static lever-arm load
  split, symmetric rolling friction, one tire formula for every wheel,
  a linear yaw-moment model, lift relief via C_L0, zero net thrust) is
  a documented engineering substitute, not a validated model.  See
  GroundMotionParams.
"""

from dataclasses import dataclass, fields
from typing import Callable, Optional, Tuple

import numpy as np

from .errors import ConfigError, ModelError, UsageError

BUILTIN_NAMES = (
    "single_integrator",
    "double_integrator",
    "dubins_car",
    "longitudinal_flight",
    "ground_motion",
)


@dataclass(frozen=True)
class SystemModel:
    """Immutable bundle of a vector field and its control description."""

    name: str
    dim: int
    control_dim: int
    control_bounds: Tuple[Tuple[float, float], ...]
    vector_field: Callable
    params: Optional[object] = None

    def __post_init__(self):
        if self.dim < 1 or self.control_dim < 1:
            raise UsageError("state and control dimensions must be positive")
        if len(self.control_bounds) != self.control_dim:
            raise UsageError("one control bound pair is required per control dimension")
        for lo, hi in self.control_bounds:
            if hi < lo:
                raise UsageError(f"control bound [{lo}, {hi}] has lo > hi")


def _params_from_dict(cls, values, defaults=None):
    """Build a parameter dataclass from a dict, merging over defaults.

    With no defaults every field must be present; the error lists what
    is missing.  Unknown keys are rejected either way.
    """
    names = [f.name for f in fields(cls)]
    known = set(names)
    unknown = sorted(set(values) - known)
    if unknown:
        raise ConfigError(f"unknown {cls.__name__} keys: {', '.join(unknown)}")
    merged = {} if defaults is None else {n: getattr(defaults, n) for n in names}
    merged.update({k: float(v) for k, v in values.items()})
    missing = sorted(known - set(merged))
    if missing:
        raise ConfigError(f"missing {cls.__name__} keys: {', '.join(missing)}")
    return cls(**merged)


@dataclass(frozen=True)
class LongitudinalParams:
    """Physical constants of the pitch-plane model.

    m mass (kg), I_y pitch inertia (kg m^2), S wing area (m^2), b_bar
    reference chord (m), rho air density (kg/m^3), v airspeed held
    constant (m/s), g gravity (m/s^2), remaining entries dimensionless
    aerodynamic derivatives.
    """

    m: float
    I_y: float
    S: float
    b_bar: float
    rho: float
    v: float
    g: float
    C_L0: float
    C_L_alpha: float
    C_L_de: float
    C_D0: float
    C_D_alpha: float
    C_D_alpha2: float
    C_D_de: float
    C_m0: float
    C_m_alpha: float
    C_m_q: float
    C_m_de: float

    def __post_init__(self):
        for name in ("m", "I_y", "S", "b_bar", "rho", "v"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"LongitudinalParams.{name} must be positive")

    @classmethod
    def from_dict(cls, values, defaults=None):
        return _params_from_dict(cls, values, defaults)


@dataclass(frozen=True)
class GroundMotionParams:
    """Physical constants of the ground-roll model.

    m mass (kg), I_z yaw inertia (kg m^2), S wing area (m^2), b_bar
    reference length for the yaw moment (m), rho air density, b_w
    main-gear track (m), a_n nose-gear arm (m), a_m main-gear arm (m),
    mu rolling friction coefficient, mu_d/mu_b/mu_c/mu_e tire-formula
    coefficients, C_* dimensionless derivatives, g gravity.

    The source data gives the tire formula and these constants but not
    the vertical-load or thrust models, so this module closes them as
    follows: vertical load m*g minus C_L0 lift is
    split statically by the lever arms a_n and a_m with the main gear
    sharing its part equally; every wheel rolls with friction mu times
    its vertical load; main-gear lateral forces use the same tire
    formula as the nose wheel with zero steering angle and arm -a_m;
    the aerodynamic yaw moment is linear in sideslip and yaw rate; net
    engine thrust is zero.
    """

    m: float
    I_z: float
    S: float
    b_bar: float
    rho: float
    b_w: float
    a_n: float
    a_m: float
    mu: float
    mu_d: float
    mu_b: float
    mu_c: float
    mu_e: float
    C_D0: float
    C_Y_beta: float
    C_n_beta: float
    C_n_r: float
    C_L0: float
    g: float

    def __post_init__(self):
        for name in ("m", "I_z", "a_n", "a_m", "b_w"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"GroundMotionParams.{name} must be positive")

    @classmethod
    def from_dict(cls, values, defaults=None):
        return _params_from_dict(cls, values, defaults)


# Reference large-transport parameter sets shipped as defaults.
# g is not part of the published data; 9.81 is used and stays
# overridable like every other entry.
DEFAULT_LONGITUDINAL_PARAMS = LongitudinalParams(
    m=235717.0,
    I_y=22428285.0,
    S=524.0,
    b_bar=6.32,
    rho=1.293,
    v=200.0,
    g=9.81,
    C_L0=0.1,
    C_L_alpha=2.4,
    C_L_de=0.2,
    C_D0=0.00108,
    C_D_alpha=0.01,
    C_D_alpha2=0.6,
    C_D_de=0.05,
    C_m0=0.04,
    C_m_alpha=-0.2,
    C_m_q=-1.0,
    C_m_de=-1.2,
)

# The published table lists two track-like lengths (23.8 and 6.9); the
# smaller one is the physically plausible main-gear track and is used
# for the differential-friction moment arm.
DEFAULT_GROUND_MOTION_PARAMS = GroundMotionParams(
    m=104915.9,
    I_z=10504308.1,
    S=249.9,
    b_bar=12.1,
    rho=1.293,
    b_w=6.9,
    a_n=17.9,
    a_m=2.3,
    mu=0.04,
    mu_d=0.1014,
    mu_b=-10.11,
    mu_c=1.438,
    mu_e=-0.8507,
    C_D0=0.061,
    C_Y_beta=-1.4,
    C_n_beta=0.2,
    C_n_r=-1.5,
    C_L0=-0.053,
    g=9.81,
)


def eval_vector_field(system, s, u):
    """Checked single-state evaluation of f(s, u).

    Validates shapes, runs the field with floating-point traps
    suppressed and turns any non-finite output into a ModelError that
    carries the offending state.
    """
    s = np.asarray(s, dtype=np.float64)
    u = np.asarray(u, dtype=np.float64)
    if s.shape != (system.dim,):
        raise UsageError(f"state has shape {s.shape}, expected ({system.dim},)")
    if u.shape != (system.control_dim,):
        raise UsageError(f"control has shape {u.shape}, expected ({system.control_dim},)")
    with np.errstate(all="ignore"):
        out = np.asarray(system.vector_field(s, u), dtype=np.float64)
    if out.shape != (system.dim,):
        raise ModelError(
            f"{system.name}: vector field returned shape {out.shape}", state=s
        )
    if not np.isfinite(out).all():
        raise ModelError(
            f"{system.name}: vector field returned a non-finite derivative", state=s
        )
    return out


def running_cost(target, s):
    """The 0/1 running cost: 1 outside the target, 0 inside."""
    s = np.asarray(s, dtype=np.float64)
    if s.ndim == 1:
        return 0.0 if target.contains(s) else 1.0
    return np.where(target.contains_many(s), 0.0, 1.0)


def modified_step(system, target, s, u, dt, in_target=None):
    """One discrete step of the target-frozen dynamics.

    States inside the target are returned unchanged (bitwise); states
    outside advance by an explicit Euler step s + f(s, u)*dt.
    Membership is evaluated at the pre-step state.  Accepts a single
    state or an (n, d) batch; in_target lets callers that already know
    the membership mask skip recomputing it.

    This is the one stepper in the package; the solver sweep and the
    oracle simulations both call it.
    """
    if dt <= 0:
        raise UsageError("dt must be positive")
    s = np.asarray(s, dtype=np.float64)
    single = s.ndim == 1
    pts = np.atleast_2d(s)
    if pts.shape[1] != system.dim:
        raise UsageError(f"state has shape {s.shape}, expected vectors of length {system.dim}")
    u = np.asarray(u, dtype=np.float64)
    if in_target is None:
        in_target = target.contains_many(pts)
    with np.errstate(all="ignore"):
        deriv = np.asarray(system.vector_field(pts, u), dtype=np.float64)
    # frozen rows never use their derivative, so only the moving rows
    # are required to be finite
    moving_bad = ~np.isfinite(deriv).all(axis=1) & ~in_target
    if moving_bad.any():
        row = int(np.argmax(moving_bad))
        raise ModelError(
            f"{system.name}: vector field returned a non-finite derivative",
            state=pts[row],
            node_index=row,
        )
    nxt = np.where(in_target[:, None], pts, pts + dt * deriv)
    return nxt[0] if single else nxt


def discretize_controls(bounds, counts):
    """Finite control grid: uniform per dimension, Cartesian product.

    counts[i] >= 2 places both endpoints; counts[i] == 1 picks the
    interval midpoint.  Rows come out in a fixed order (first dimension
    slowest) so optimization folds are reproducible.
    """
    bounds = list(bounds)
    if not bounds:
        raise UsageError("control bounds list is empty")
    counts = [int(c) for c in counts]
    if len(counts) != len(bounds):
        raise UsageError(
            f"{len(bounds)} control dimensions but {len(counts)} counts"
        )
    axes = []
    for (lo, hi), c in zip(bounds, counts):
        if c < 1:
            raise UsageError("control counts must be >= 1")
        if c == 1:
            axes.append(np.array([(float(lo) + float(hi)) / 2.0]))
        else:
            axes.append(np.linspace(float(lo), float(hi), c))
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


# ---------------------------------------------------------------------------
# builtin vector fields
# ---------------------------------------------------------------------------


def _single_integrator_field(s, u):
    s = np.asarray(s, dtype=np.float64)
    return np.broadcast_to(np.asarray(u, dtype=np.float64), s.shape)


def _double_integrator_field(s, u):
    s = np.asarray(s, dtype=np.float64)
    out = np.empty_like(s)
    out[..., 0] = s[..., 1]
    out[..., 1] = u[0]
    return out


def _make_dubins_field(speed):
    def field(s, u):
        s = np.asarray(s, dtype=np.float64)
        theta = s[..., 2]
        out = np.empty_like(s)
        out[..., 0] = speed * np.cos(theta)
        out[..., 1] = speed * np.sin(theta)
        out[..., 2] = u[0]
        return out

    return field


def thrust_for_constant_speed(params, s, de):
    """Thrust that cancels the airspeed derivative at state s.

    P = [q_bar*S*C_D(alpha, de) + m*g*sin(theta - alpha)] / cos(alpha).
    Raises a ModelError when cos(alpha) is numerically singular, which
    only happens far outside any sensible flight domain.
    """
    s = np.asarray(s, dtype=np.float64)
    alpha = s[..., 0]
    theta = s[..., 2]
    cos_a = np.cos(alpha)
    bad = np.abs(cos_a) < 1e-9
    if np.any(bad):
        if s.ndim == 1:
            state, row = s, None
        else:
            row = int(np.argmax(bad))
            state = s[row]
        raise ModelError(
            "longitudinal_flight: cos(alpha) singular in thrust solve",
            state=state,
            node_index=row,
        )
    qbar_s = 0.5 * params.rho * params.v * params.v * params.S
    c_d = (
        params.C_D0
        + params.C_D_alpha * alpha
        + params.C_D_alpha2 * alpha * alpha
        + params.C_D_de * de
    )
    return (qbar_s * c_d + params.m * params.g * np.sin(theta - alpha)) / cos_a


def airspeed_rate_residual(params, s, de):
    """The airspeed derivative with thrust_for_constant_speed applied.

    Zero up to rounding by construction; exposed so tests can check the
    constant-speed constraint instead of trusting it.
    """
    s = np.asarray(s, dtype=np.float64)
    alpha = s[..., 0]
    theta = s[..., 2]
    p_thrust = thrust_for_constant_speed(params, s, de)
    qbar_s = 0.5 * params.rho * params.v * params.v * params.S
    c_d = (
        params.C_D0
        + params.C_D_alpha * alpha
        + params.C_D_alpha2 * alpha * alpha
        + params.C_D_de * de
    )
    return (
        p_thrust * np.cos(alpha)
        - qbar_s * c_d
        - params.m * params.g * np.sin(theta - alpha)
    ) / params.m


def _make_longitudinal_field(p):
    qbar_s = 0.5 * p.rho * p.v * p.v * p.S

    def field(s, u):
        s = np.asarray(s, dtype=np.float64)
        de = u[0]
        alpha = s[..., 0]
        q = s[..., 1]
        theta = s[..., 2]
        c_l = p.C_L0 + p.C_L_alpha * alpha + p.C_L_de * de
        c_m = (
            p.C_m0
            + p.C_m_alpha * alpha
            + p.C_m_q * (q * p.b_bar / (2.0 * p.v))
            + p.C_m_de * de
        )
        thrust = thrust_for_constant_speed(p, s, de)
        out = np.empty_like(s)
        out[..., 0] = q + (
            -thrust * np.sin(alpha)
            - qbar_s * c_l
            + p.m * p.g * np.cos(theta - alpha)
        ) / (p.m * p.v)
        out[..., 1] = p.rho * p.v * p.v * p.S * p.b_bar * c_m / (2.0 * p.I_y)
        out[..., 2] = q
        return out

    return field


def tire_lateral_coefficient(params, slip):
    """Dimensionless lateral-force coefficient of the tire formula.

    Multiply by the wheel's vertical load to get the force.  slip is
    the wheel slip angle in radians.
    """
    t = params.mu_b * np.tan(slip)
    at = np.arctan(t)
    return -params.mu_d * np.sin(params.mu_c * at - params.mu_e * (t - at))


def _make_ground_motion_field(p):
    # static lever-arm split of the vertical load between nose and
    # main gear; lift (C_L0 < 0 means downforce) shifts the total
    arm_sum = p.a_n + p.a_m

    def field(s, u):
        s = np.asarray(s, dtype=np.float64)
        thw = u[0]
        v_x = s[..., 0]
        v_y = s[..., 1]
        r = s[..., 2]
        v_sq = v_x * v_x + v_y * v_y
        v = np.sqrt(v_sq)
        qbar_s = 0.5 * p.rho * v_sq * p.S
        beta = np.arctan2(v_y, v_x)
        drag = qbar_s * p.C_D0
        side = qbar_s * p.C_Y_beta * beta
        load = p.m * p.g - qbar_s * p.C_L0
        p_nose = load * p.a_m / arm_sum
        p_main_wheel = load * p.a_n / arm_sum / 2.0
        q_nose = p.mu * p_nose
        q_main_wheel = p.mu * p_main_wheel
        # wheel slip angles; the nose wheel is steered by thw, the main
        # gear is fixed and sits a_m behind the reference point
        lat_n = v_y + r * p.a_n
        beta_n = np.arctan2(
            lat_n * np.cos(thw) - v_x * np.sin(thw),
            v_x * np.cos(thw) + lat_n * np.sin(thw),
        )
        beta_m = np.arctan2(v_y - r * p.a_m, v_x)
        f_nose = tire_lateral_coefficient(p, beta_n) * p_nose
        f_main_wheel = tire_lateral_coefficient(p, beta_m) * p_main_wheel
        yaw_aero = qbar_s * p.b_bar * (
            p.C_n_beta * beta + p.C_n_r * r * p.b_bar / (2.0 * v)
        )
        f_x = -drag * np.cos(beta) - side * np.sin(beta) - q_nose - 2.0 * q_main_wheel
        f_y = side * np.cos(beta) - drag * np.sin(beta) - f_nose - 2.0 * f_main_wheel
        m_z = (
            yaw_aero
            + 2.0 * f_main_wheel * p.a_m
            - f_nose * p.a_n
            + 2.0 * q_main_wheel * p.b_w / 2.0
        )
        out = np.empty_like(s)
        out[..., 0] = r * v_y + f_x / p.m
        out[..., 1] = -r * v_x + f_y / p.m
        out[..., 2] = m_z / p.I_z
        return out

    return field


def builtin_system(name, params=None):
    """Construct one of the named systems.

    params is an optional dict of overrides.  The aircraft systems
    start from their embedded reference parameter sets; the toy systems
    accept the keys documented below.
    """
    params = dict(params or {})
    if name == "single_integrator":
        _reject_unknown(name, params, ())
        return SystemModel(
            name=name,
            dim=1,
            control_dim=1,
            control_bounds=((-1.0, 1.0),),
            vector_field=_single_integrator_field,
        )
    if name == "double_integrator":
        _reject_unknown(name, params, ())
        return SystemModel(
            name=name,
            dim=2,
            control_dim=1,
            control_bounds=((-1.0, 1.0),),
            vector_field=_double_integrator_field,
        )
    if name == "dubins_car":
        _reject_unknown(name, params, ("speed", "turn_rate"))
        speed = float(params.get("speed", 1.0))
        turn = float(params.get("turn_rate", 1.0))
        if speed <= 0 or turn <= 0:
            raise ConfigError("dubins_car speed and turn_rate must be positive")
        return SystemModel(
            name=name,
            dim=3,
            control_dim=1,
            control_bounds=((-turn, turn),),
            vector_field=_make_dubins_field(speed),
        )
    if name == "longitudinal_flight":
        p = LongitudinalParams.from_dict(params, defaults=DEFAULT_LONGITUDINAL_PARAMS)
        return SystemModel(
            name=name,
            dim=3,
            control_dim=1,
            control_bounds=((-0.3, 0.3),),
            vector_field=_make_longitudinal_field(p),
            params=p,
        )
    if name == "ground_motion":
        p = GroundMotionParams.from_dict(params, defaults=DEFAULT_GROUND_MOTION_PARAMS)
        return SystemModel(
            name=name,
            dim=3,
            control_dim=1,
            control_bounds=((-0.15, 0.15),),
            vector_field=_make_ground_motion_field(p),
            params=p,
        )
    raise UsageError(f"unknown system {name!r}; choose from {', '.join(BUILTIN_NAMES)}")


def _reject_unknown(name, params, allowed):
    unknown = sorted(set(params) - set(allowed))
    if unknown:
        raise ConfigError(f"{name} does not take parameters: {', '.join(unknown)}")
