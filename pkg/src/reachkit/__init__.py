"""Reachable, viable and invariant sets of nonlinear control systems.

The method: run a backward dynamic-programming recursion for a value
function on a Cartesian grid, with multilinear interpolation between
nodes and dynamics frozen inside the target set, then read the wanted
set off a sublevel or superlevel slice of the result.

Typical use:

    from reachkit import Box, Grid, SetQuery, builtin_system, solve_query

    system = builtin_system("single_integrator")
    target = Box([[-0.2, 0.2]])
    grid = Grid([[-2.0, 2.0]], [401])
    field, mask = solve_query(system, target, SetQuery("max_reach", 1.0),
                              grid, dt=0.005)

`mask` flags every grid node from which the target is reachable within
the horizon; `field` holds the underlying value function.
"""

from .errors import ConfigError, ModelError, ReachkitError, UsageError
from .grid import (
    Grid,
    ValueField,
    interpolate,
    interpolate_many,
    level_mask,
    load_field,
    node_coordinate,
    save_field,
    saturation_value,
    zero_field,
)
from .models import (
    BUILTIN_NAMES,
    GroundMotionParams,
    LongitudinalParams,
    SystemModel,
    builtin_system,
    discretize_controls,
    eval_vector_field,
    modified_step,
    running_cost,
)
from .oracle import (
    TrajectoryResult,
    analytic_min_time,
    boundary_band,
    brute_classify,
    classify_nodes,
    simulate,
)
from .solver import (
    KIND_TO_MODE,
    SET_KINDS,
    SetQuery,
    SolveConfig,
    SolveStats,
    default_recursions,
    extract_set,
    recursion_step,
    resolve_workers,
    solve,
    solve_query,
)
from .targets import (
    Box,
    Complement,
    TargetSet,
    UnionSet,
    VoxelMask,
    complement_within,
    contains,
    load_voxel_mask,
    save_voxel_mask,
    voxel_from_cells,
)

__version__ = "0.1.0"

__all__ = [
    "BUILTIN_NAMES",
    "Box",
    "Complement",
    "ConfigError",
    "Grid",
    "GroundMotionParams",
    "KIND_TO_MODE",
    "LongitudinalParams",
    "ModelError",
    "ReachkitError",
    "SET_KINDS",
    "SetQuery",
    "SolveConfig",
    "SolveStats",
    "SystemModel",
    "TargetSet",
    "TrajectoryResult",
    "UnionSet",
    "UsageError",
    "ValueField",
    "VoxelMask",
    "analytic_min_time",
    "boundary_band",
    "brute_classify",
    "builtin_system",
    "classify_nodes",
    "complement_within",
    "contains",
    "default_recursions",
    "discretize_controls",
    "eval_vector_field",
    "extract_set",
    "interpolate",
    "interpolate_many",
    "level_mask",
    "load_field",
    "load_voxel_mask",
    "modified_step",
    "node_coordinate",
    "recursion_step",
    "resolve_workers",
    "running_cost",
    "save_field",
    "save_voxel_mask",
    "saturation_value",
    "simulate",
    "solve",
    "solve_query",
    "voxel_from_cells",
    "zero_field",
]
