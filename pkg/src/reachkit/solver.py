"""Backward value-function recursion and set extraction.

A solve starts from the all-zero field and applies m recursion steps.
Each step maps every grid node x to

    opt_u [ cost(x)*dt + interpolate(previous field, step(x, u)) ]

where opt is min or max over the discretized control grid, cost is 1
outside the target and 0 inside, and step freezes states inside the
target.  Sublevel sets of the result at a horizon T < k*dt are
reachable sets; superlevel sets against a complemented target are
viable or invariant sets.

Floating-point discipline: node values are kept exactly inside
[previous value, k*dt] by clipping, nodes whose optimum is already
saturated are pinned to the next saturation value, and nodes inside
the target keep their previous value bitwise.  These rules cost
nothing where the arithmetic is already exact and make the bound,
monotonicity and absorption invariants hold exactly instead of only
up to rounding.  They also make the output independent of how nodes
are partitioned across workers: every node's value is a function of
the previous field alone.
"""

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dataclass_field
from typing import List, Tuple

import numpy as np

from .errors import ConfigError, ModelError, UsageError
from .grid import MODES, Grid, ValueField, interpolate_many, level_mask, saturation_value, zero_field
from .models import SystemModel, discretize_controls, modified_step
from .targets import Complement, TargetSet

SET_KINDS = ("max_reach", "min_reach", "viable", "invariant")

# Which optimization direction pairs with which set kind, and whether
# the recursion target is the query's set K itself or its complement.
KIND_TO_MODE = {
    "max_reach": "minimize",
    "min_reach": "maximize",
    "viable": "maximize",
    "invariant": "minimize",
}
KIND_COMPLEMENTS_TARGET = {
    "max_reach": False,
    "min_reach": False,
    "viable": True,
    "invariant": True,
}


@dataclass(frozen=True)
class SolveConfig:
    """Everything one recursion run needs."""

    system: SystemModel
    target: TargetSet
    grid: Grid
    dt: float
    recursions: int
    control_counts: Tuple[int, ...]
    mode: str

    def __post_init__(self):
        if self.mode not in MODES:
            raise UsageError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not (self.dt > 0):
            raise UsageError("dt must be positive")
        if int(self.recursions) != self.recursions or self.recursions < 0:
            raise UsageError("recursions must be a nonnegative integer")
        if self.system.dim != self.grid.ndim:
            raise UsageError(
                f"system dimension {self.system.dim} does not match grid dimension {self.grid.ndim}"
            )
        if self.target.dim != self.system.dim:
            raise UsageError(
                f"target dimension {self.target.dim} does not match system dimension {self.system.dim}"
            )
        counts = tuple(int(c) for c in self.control_counts)
        if len(counts) != self.system.control_dim:
            raise UsageError(
                f"{self.system.control_dim} control dimensions but {len(counts)} control counts"
            )
        if any(c < 1 for c in counts):
            raise UsageError("control counts must be >= 1")
        object.__setattr__(self, "control_counts", counts)
        object.__setattr__(self, "recursions", int(self.recursions))
        object.__setattr__(self, "dt", float(self.dt))


@dataclass(frozen=True)
class SetQuery:
    """A set kind plus the horizon it is asked at."""

    kind: str
    horizon: float

    def __post_init__(self):
        if self.kind not in SET_KINDS:
            raise UsageError(f"kind must be one of {SET_KINDS}, got {self.kind!r}")
        h = float(self.horizon)
        if not np.isfinite(h) or h < 0:
            raise UsageError("horizon must be a finite nonnegative number")
        object.__setattr__(self, "horizon", h)


@dataclass
class SolveStats:
    """Counters a solve fills in when handed one."""

    clamped_lookups: int = 0
    step_sums: List[float] = dataclass_field(default_factory=list)
    wall_time: float = 0.0
    workers: int = 0


def resolve_workers(explicit=None):
    """Worker count: explicit argument, else REACHKIT_THREADS, else all cores.

    The value 0 means "all cores" in both the argument and the
    environment variable.
    """
    if explicit is not None:
        w = int(explicit)
    else:
        raw = os.environ.get("REACHKIT_THREADS")
        if raw is None or raw.strip() == "":
            w = 0
        else:
            try:
                w = int(raw)
            except ValueError:
                raise ConfigError(f"REACHKIT_THREADS must be an integer, got {raw!r}")
    if w < 0:
        raise UsageError("worker count must be >= 0")
    if w == 0:
        w = os.cpu_count() or 1
    return w


def _chunk_bounds(n, workers):
    # even partition of n rows into <= workers contiguous chunks
    k = min(workers, n) if n else 0
    return [(i * n // k, (i + 1) * n // k) for i in range(k)]


def _sweep(field, config, nodes, in_target, controls, workers):
    """One full pass over the nodes; returns (new values, clamp count)."""
    grid = config.grid
    dt = config.dt
    n = nodes.shape[0]
    prev_flat = field.values.reshape(-1)
    out = np.empty(n, dtype=np.float64)
    reduce_fn = np.minimum if config.mode == "minimize" else np.maximum
    s_prev = np.float64(saturation_value(dt, field.k))
    s_next = np.float64(saturation_value(dt, field.k + 1))

    def run_chunk(a, b):
        pts = nodes[a:b]
        ink = in_target[a:b]
        prev = prev_flat[a:b]
        fold = None
        clamped = 0
        for u in controls:
            try:
                nxt = modified_step(config.system, config.target, pts, u, dt, in_target=ink)
            except ModelError as e:
                idx = a + e.node_index if e.node_index is not None else None
                raise ModelError(e.args[0], state=e.state, node_index=idx) from None
            vals, c = interpolate_many(field, nxt)
            clamped += c
            fold = vals if fold is None else reduce_fn(fold, vals)
        raw = fold + np.where(ink, 0.0, dt)
        # exact envelope: never below the previous value, never above
        # the saturation bound for this step count
        new = np.minimum(np.maximum(raw, prev), s_next)
        new[(~ink) & (fold == s_prev)] = s_next
        new[ink] = prev[ink]
        out[a:b] = new
        return clamped

    bounds = _chunk_bounds(n, workers)
    if workers > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=len(bounds)) as pool:
            futures = [pool.submit(run_chunk, a, b) for a, b in bounds]
            clamped_total = sum(f.result() for f in futures)
    else:
        clamped_total = sum(run_chunk(a, b) for a, b in bounds)
    return out.reshape(grid.dims), clamped_total


def recursion_step(field, config, stats=None, workers=None):
    """Apply one recursion update; returns a new field with k+1.

    The input field is left untouched.
    """
    if field.grid != config.grid:
        raise UsageError("field and config use different grids")
    if field.mode != config.mode:
        raise UsageError(f"field mode {field.mode!r} does not match config mode {config.mode!r}")
    w = resolve_workers(workers)
    nodes = config.grid.node_matrix()
    in_target = config.target.contains_many(nodes)
    controls = discretize_controls(config.system.control_bounds, config.control_counts)
    values, clamped = _sweep(field, config, nodes, in_target, controls, w)
    if stats is not None:
        stats.clamped_lookups += clamped
        stats.workers = w
    return ValueField(config.grid, values, config.mode, config.dt, field.k + 1)


def solve(config, workers=None, stats=None):
    """Run the recursion from the zero field for config.recursions steps."""
    w = resolve_workers(workers)
    start = time.perf_counter()
    fld = zero_field(config.grid, config.mode, config.dt)
    nodes = config.grid.node_matrix()
    in_target = config.target.contains_many(nodes)
    controls = discretize_controls(config.system.control_bounds, config.control_counts)
    for _ in range(config.recursions):
        values, clamped = _sweep(fld, config, nodes, in_target, controls, w)
        fld = ValueField(config.grid, values, config.mode, config.dt, fld.k + 1)
        if stats is not None:
            stats.clamped_lookups += clamped
            stats.step_sums.append(float(np.sum(fld.values)))
    if stats is not None:
        stats.wall_time += time.perf_counter() - start
        stats.workers = w
    return fld


def extract_set(field, query, target):
    """Threshold a solved field into the queried set's node mask.

    target must be the set the field was solved against, so the
    kind/mode/target pairing can be checked.
    """
    if not isinstance(query, SetQuery):
        query = SetQuery(*query)
    horizon_cap = field.horizon()
    if not (query.horizon < horizon_cap):
        raise UsageError(
            f"horizon {query.horizon} must be strictly less than k*dt = {horizon_cap}; "
            "set extraction is only valid below the computed horizon"
        )
    required_mode = KIND_TO_MODE[query.kind]
    if field.mode != required_mode:
        raise UsageError(
            f"kind {query.kind!r} requires a field solved with mode {required_mode!r} "
            f"(got {field.mode!r}); pairings: max_reach->minimize over K, "
            "min_reach->maximize over K, viable->maximize over complement(K), "
            "invariant->minimize over complement(K)"
        )
    # Reach kinds accept any target, including a complement (that is the
    # duality route: viable(K) is the complement of min_reach(complement K)).
    # The lifted kinds require the complement structure to be explicit.
    if KIND_COMPLEMENTS_TARGET[query.kind] and not isinstance(target, Complement):
        raise UsageError(
            f"kind {query.kind!r} requires a field solved against the complement of the "
            "constraint set; solve against complement_within(K) or use solve_query"
        )
    relation = "<=" if query.kind in ("max_reach", "min_reach") else ">="
    return level_mask(field, query.horizon, relation)


def default_recursions(horizon, dt):
    """Smallest m with m*dt strictly above the horizon: ceil(T/dt) + 1."""
    if not (dt > 0):
        raise UsageError("dt must be positive")
    h = float(horizon)
    if h < 0:
        raise UsageError("horizon must be nonnegative")
    return int(np.ceil(h / dt)) + 1


def solve_query(system, target, query, grid, dt, control_counts=None,
                recursions=None, workers=None, stats=None):
    """Solve and extract in one call, picking mode/target/m from the kind.

    target is always the set K the question is about; viable and
    invariant queries complement it internally.  Returns (field, mask).
    """
    if not isinstance(query, SetQuery):
        query = SetQuery(*query)
    if control_counts is None:
        control_counts = (5,) * system.control_dim
    if recursions is None:
        recursions = default_recursions(query.horizon, dt)
    effective = Complement(target) if KIND_COMPLEMENTS_TARGET[query.kind] else target
    config = SolveConfig(
        system=system,
        target=effective,
        grid=grid,
        dt=dt,
        recursions=recursions,
        control_counts=tuple(control_counts),
        mode=KIND_TO_MODE[query.kind],
    )
    fld = solve(config, workers=workers, stats=stats)
    return fld, extract_set(fld, query, effective)
