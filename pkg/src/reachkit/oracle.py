"""Independent ground truth for validating solver output.

Two flavors: exhaustive search over piecewise-constant control
sequences (exact for the discretized problem, exponential in step
count, guarded), and closed-form minimum-time answers for the
integrator systems.  Both deliberately avoid the recursion code path;
only the single-step integrator is shared so that disagreements point
at interpolation or recursion error rather than at a different
discretization.
"""

import itertools
import math
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .errors import UsageError
from .models import discretize_controls, modified_step

SEQUENCE_GUARD = 10**7


@dataclass(frozen=True)
class TrajectoryResult:
    """A simulated trajectory with its first target entry, if any."""

    states: np.ndarray  # (steps+1, dim)
    first_hit_step: Optional[int]
    controls: np.ndarray  # (steps, control_dim)


def simulate(system, target, s0, control_sequence, dt):
    """Run the frozen-target stepper along one control sequence.

    The hit test runs before each step and once more after the final
    one, so first_hit_step = 0 means s0 itself is in the target.
    """
    s0 = np.asarray(s0, dtype=np.float64)
    if s0.shape != (system.dim,):
        raise UsageError(f"initial state has shape {s0.shape}, expected ({system.dim},)")
    controls = np.asarray(control_sequence, dtype=np.float64)
    if controls.size == 0:
        controls = controls.reshape(0, system.control_dim)
    elif controls.ndim == 1:
        # a flat sequence is n steps of a scalar control
        if system.control_dim != 1:
            raise UsageError("flat control sequences only apply to single-input systems")
        controls = controls.reshape(-1, 1)
    if controls.ndim != 2 or controls.shape[1] != system.control_dim:
        raise UsageError(
            f"control sequence has shape {controls.shape}, "
            f"expected (steps, {system.control_dim})"
        )
    states = np.empty((controls.shape[0] + 1, system.dim))
    states[0] = s0
    first_hit = 0 if target.contains(s0) else None
    s = s0
    for i, u in enumerate(controls):
        s = modified_step(system, target, s, u, dt)
        states[i + 1] = s
        if first_hit is None and target.contains(s):
            first_hit = i + 1
    return TrajectoryResult(states=states, first_hit_step=first_hit, controls=controls)


def _steps_for(horizon, dt):
    if not (dt > 0):
        raise UsageError("dt must be positive")
    if horizon < 0:
        raise UsageError("horizon must be nonnegative")
    return int(math.ceil(horizon / dt))


def _check_guard(n_controls, steps):
    total = n_controls**steps
    if total > SEQUENCE_GUARD:
        raise UsageError(
            f"{n_controls}^{steps} = {total} control sequences exceeds the "
            f"{SEQUENCE_GUARD} enumeration guard; use fewer steps or coarser controls"
        )
    return total


def brute_classify(system, target, s0, horizon, dt, control_counts, kind):
    """Exhaustive answer to one reachability question at one state.

    max_reach: does SOME piecewise-constant sequence hit the target by
    step ceil(horizon/dt)?  min_reach: does EVERY sequence?  Because
    the stepper freezes states inside the target, a trajectory has hit
    by the deadline iff its final state is in the target, so only the
    endpoint is tested.
    """
    if kind not in ("max_reach", "min_reach"):
        raise UsageError(f"kind must be max_reach or min_reach, got {kind!r}")
    s0 = np.asarray(s0, dtype=np.float64)
    steps = _steps_for(horizon, dt)
    if target.contains(s0):
        return True
    controls = discretize_controls(system.control_bounds, control_counts)
    _check_guard(len(controls), steps)
    want_all = kind == "min_reach"
    for seq in itertools.product(controls, repeat=steps):
        s = s0
        for u in seq:
            s = modified_step(system, target, s, u, dt)
        hit = bool(target.contains(s))
        if want_all and not hit:
            return False
        if not want_all and hit:
            return True
    return want_all


def classify_nodes(system, target, points, horizon, dt, control_counts):
    """Batched exhaustive classification of many states at once.

    Returns (exists_hit, forall_hit) boolean arrays: whether some
    sequence hits, and whether every sequence hits.  One pass over the
    sequence enumeration serves both questions for all points, with an
    early exit once every point has a hitting sequence and a miss on
    record (nothing further can change).
    """
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if points.shape[1] != system.dim:
        raise UsageError(f"points have length {points.shape[1]}, expected {system.dim}")
    steps = _steps_for(horizon, dt)
    controls = discretize_controls(system.control_bounds, control_counts)
    _check_guard(len(controls), steps)
    n = points.shape[0]
    start_in = target.contains_many(points)
    exists_hit = start_in.copy()
    forall_hit = np.ones(n, dtype=bool)
    for seq in itertools.product(controls, repeat=steps):
        s = points
        in_t = start_in
        for u in seq:
            s = modified_step(system, target, s, u, dt, in_target=in_t)
            in_t = target.contains_many(s)
        exists_hit |= in_t
        forall_hit &= in_t
        if exists_hit.all() and not forall_hit.any():
            break
    return exists_hit, forall_hit


def boundary_band(mask):
    """Nodes within one cell of a membership change (Moore neighborhood).

    Agreement tests exclude this band: interpolation blurs the set
    boundary by about one cell, so disagreements there carry no signal.
    """
    mask = np.asarray(mask, dtype=bool)
    band = np.zeros_like(mask)
    for offset in itertools.product((-1, 0, 1), repeat=mask.ndim):
        if not any(offset):
            continue
        src = tuple(
            slice(max(o, 0), mask.shape[i] + min(o, 0)) for i, o in enumerate(offset)
        )
        dst = tuple(
            slice(max(-o, 0), mask.shape[i] + min(-o, 0)) for i, o in enumerate(offset)
        )
        band[dst] |= mask[dst] != mask[src]
    return band


def analytic_min_time(name, s0, half_width=0.0):
    """Closed-form minimum time to a centered target, |u| <= 1.

    single_integrator: time to K=[-a, a] is max(0, |s0| - a).
    double_integrator: time to the origin (half_width ignored) via the
    classical bang-bang switching-curve formula.
    """
    s0 = np.asarray(s0, dtype=np.float64)
    a = float(half_width)
    if a < 0:
        raise UsageError("half_width must be nonnegative")
    if name == "single_integrator":
        if s0.shape != (1,):
            raise UsageError("single_integrator states have one component")
        return max(0.0, abs(float(s0[0])) - a)
    if name == "double_integrator":
        if s0.shape != (2,):
            raise UsageError("double_integrator states have two components")
        x, v = float(s0[0]), float(s0[1])
        # switching curve x = -v|v|/2: above it brake with u=-1 first,
        # below it push with u=+1 first, on it coast straight in
        if x > -v * abs(v) / 2.0:
            return v + 2.0 * math.sqrt(x + v * v / 2.0)
        if x < -v * abs(v) / 2.0:
            return -v + 2.0 * math.sqrt(v * v / 2.0 - x)
        return abs(v)
    raise UsageError(f"no analytic oracle for {name!r}")
