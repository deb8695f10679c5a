"""Command-line front end: solve, query, export, verify.

Run configurations are TOML files.  A full example:

    dt = 0.01
    recursions = 101          # optional; ceil(horizon/dt)+1 if omitted

    [system]
    name = "longitudinal_flight"
    [system.params]           # optional overrides of the named preset
    v = 200.0

    [domain]
    bounds = [[-0.4, 0.4], [-0.75, 0.75], [-0.75, 0.75]]

    [grid]
    dims = [101, 101, 101]

    [target]
    variant = "box"           # box | union | complement | voxel_mask
    data = [[-0.05, 0.05], [-0.1, 0.1], [-0.1, 0.1]]

    [query]
    kind = "max_reach"        # max_reach | min_reach | viable | invariant
    horizon = 1.0

    [controls]
    counts = [5]

    [output]
    prefix = "out/flight_max"

Relative paths in the config (output.prefix, target.mask_file) resolve
against the config file's directory, so config + outputs relocate as a
unit.  Exit codes: 0 success, 2 usage or configuration problem, 3 model
evaluation failure.
"""

import argparse
import hashlib
import json
import math
import os
import sys

import numpy as np

try:
    import tomllib
except ImportError:  # Python 3.10
    import tomli as tomllib

from .errors import ConfigError, ModelError, UsageError
from .grid import Grid, interpolate, load_field, save_field
from .models import BUILTIN_NAMES, builtin_system, discretize_controls
from .oracle import SEQUENCE_GUARD, boundary_band, classify_nodes
from .solver import (
    KIND_COMPLEMENTS_TARGET,
    KIND_TO_MODE,
    SET_KINDS,
    SetQuery,
    SolveConfig,
    SolveStats,
    default_recursions,
    extract_set,
    solve,
)
from .targets import Box, Complement, UnionSet, load_voxel_mask

TARGET_VARIANTS = ("box", "union", "complement", "voxel_mask")
_TOP_KEYS = ("dt", "recursions", "system", "domain", "grid", "target", "query", "controls", "output")


# ---------------------------------------------------------------------------
# config schema
# ---------------------------------------------------------------------------


def _reject_extra(table, allowed, where):
    extra = sorted(set(table) - set(allowed))
    if extra:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(extra)}")


def _require(table, key, where):
    if key not in table:
        raise ConfigError(f"missing required key {where}.{key}")
    return table[key]


def _table(raw, key):
    value = _require(raw, key, "config")
    if not isinstance(value, dict):
        raise ConfigError(f"[{key}] must be a table")
    return value


def _number(value, key, positive=False, nonnegative=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{key} must be a number")
    v = float(value)
    if not math.isfinite(v):
        raise ConfigError(f"{key} must be finite")
    if positive and not v > 0:
        raise ConfigError(f"{key} must be positive")
    if nonnegative and v < 0:
        raise ConfigError(f"{key} must be nonnegative")
    return v


def _integer(value, key, minimum):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{key} must be an integer")
    if value < minimum:
        raise ConfigError(f"{key} must be >= {minimum}")
    return int(value)


def _string(value, key):
    if not isinstance(value, str) or not value:
        raise ConfigError(f"{key} must be a non-empty string")
    return value


def _interval_list(value, key, strict):
    if not isinstance(value, list) or not value:
        raise ConfigError(f"{key} must be a non-empty list of [lo, hi] pairs")
    out = []
    for i, pair in enumerate(value):
        if not isinstance(pair, list) or len(pair) != 2:
            raise ConfigError(f"{key}[{i}] must be a [lo, hi] pair")
        lo = _number(pair[0], f"{key}[{i}][0]")
        hi = _number(pair[1], f"{key}[{i}][1]")
        if strict and not lo < hi:
            raise ConfigError(f"{key}[{i}] needs lo < hi, got [{lo}, {hi}]")
        if not strict and not lo <= hi:
            raise ConfigError(f"{key}[{i}] needs lo <= hi, got [{lo}, {hi}]")
        out.append([lo, hi])
    return out


def validate_config(raw):
    """Normalize a parsed TOML document into the canonical schema dict.

    Everything is checked before any compute happens; every rejection
    names the key at fault.
    """
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a table")
    _reject_extra(raw, _TOP_KEYS, "config")
    dt = _number(_require(raw, "dt", "config"), "dt", positive=True)
    recursions = None
    if "recursions" in raw:
        recursions = _integer(raw["recursions"], "recursions", minimum=0)

    system_tbl = _table(raw, "system")
    _reject_extra(system_tbl, ("name", "params"), "[system]")
    name = _string(_require(system_tbl, "name", "system"), "system.name")
    params = {}
    if "params" in system_tbl:
        if not isinstance(system_tbl["params"], dict):
            raise ConfigError("[system.params] must be a table")
        for k, v in system_tbl["params"].items():
            params[k] = _number(v, f"system.params.{k}")

    domain_tbl = _table(raw, "domain")
    _reject_extra(domain_tbl, ("bounds",), "[domain]")
    bounds = _interval_list(_require(domain_tbl, "bounds", "domain"), "domain.bounds", strict=True)
    ndim = len(bounds)

    grid_tbl = _table(raw, "grid")
    _reject_extra(grid_tbl, ("dims",), "[grid]")
    dims_raw = _require(grid_tbl, "dims", "grid")
    if not isinstance(dims_raw, list) or not dims_raw:
        raise ConfigError("grid.dims must be a non-empty list of integers")
    dims = [_integer(v, f"grid.dims[{i}]", minimum=2) for i, v in enumerate(dims_raw)]
    if len(dims) != ndim:
        raise ConfigError(
            f"grid.dims has {len(dims)} entries but domain.bounds has {ndim}"
        )

    target_tbl = _table(raw, "target")
    variant = _string(_require(target_tbl, "variant", "target"), "target.variant")
    if variant not in TARGET_VARIANTS:
        raise ConfigError(
            f"target.variant must be one of {', '.join(TARGET_VARIANTS)}, got {variant!r}"
        )
    target = {"variant": variant}
    if variant == "voxel_mask":
        _reject_extra(target_tbl, ("variant", "mask_file"), "[target]")
        target["mask_file"] = _string(
            _require(target_tbl, "mask_file", "target"), "target.mask_file"
        )
    else:
        _reject_extra(target_tbl, ("variant", "data"), "[target]")
        data = _require(target_tbl, "data", "target")
        if variant == "union":
            if not isinstance(data, list) or not data:
                raise ConfigError("target.data must be a non-empty list of boxes")
            boxes = []
            for i, box in enumerate(data):
                ivs = _interval_list(box, f"target.data[{i}]", strict=False)
                if len(ivs) != ndim:
                    raise ConfigError(
                        f"target.data[{i}] has {len(ivs)} intervals but the domain has {ndim} dimensions"
                    )
                boxes.append(ivs)
            target["data"] = boxes
        else:
            ivs = _interval_list(data, "target.data", strict=False)
            if len(ivs) != ndim:
                raise ConfigError(
                    f"target.data has {len(ivs)} intervals but the domain has {ndim} dimensions"
                )
            target["data"] = ivs

    query_tbl = _table(raw, "query")
    _reject_extra(query_tbl, ("kind", "horizon"), "[query]")
    kind = _string(_require(query_tbl, "kind", "query"), "query.kind")
    if kind not in SET_KINDS:
        raise ConfigError(f"query.kind must be one of {', '.join(SET_KINDS)}, got {kind!r}")
    horizon = _number(_require(query_tbl, "horizon", "query"), "query.horizon", nonnegative=True)

    controls_tbl = _table(raw, "controls")
    _reject_extra(controls_tbl, ("counts",), "[controls]")
    counts_raw = _require(controls_tbl, "counts", "controls")
    if not isinstance(counts_raw, list) or not counts_raw:
        raise ConfigError("controls.counts must be a non-empty list of integers")
    counts = [_integer(v, f"controls.counts[{i}]", minimum=1) for i, v in enumerate(counts_raw)]

    output_tbl = _table(raw, "output")
    _reject_extra(output_tbl, ("prefix",), "[output]")
    prefix = _string(_require(output_tbl, "prefix", "output"), "output.prefix")

    return {
        "dt": dt,
        "recursions": recursions,
        "system": {"name": name, "params": params},
        "domain": {"bounds": bounds},
        "grid": {"dims": dims},
        "target": target,
        "query": {"kind": kind, "horizon": horizon},
        "controls": {"counts": counts},
        "output": {"prefix": prefix},
    }


def load_config(path):
    """Parse and validate a config file; returns (schema, base_dir)."""
    with open(path, "rb") as fh:
        try:
            raw = tomllib.load(fh)
        except tomllib.TOMLDecodeError as e:
            raise ConfigError(f"{path}: invalid TOML: {e}")
    return validate_config(raw), os.path.dirname(os.path.abspath(path))


def _toml_scalar(value):
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, bool):
        raise ConfigError("booleans do not appear in this schema")
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        text = repr(value)
        return text if ("." in text or "e" in text or "E" in text) else text + ".0"
    if isinstance(value, list):
        return "[" + ", ".join(_toml_scalar(v) for v in value) + "]"
    raise ConfigError(f"cannot serialize {type(value).__name__} to TOML")


def serialize_config(schema):
    """Emit the canonical schema as TOML; parse(serialize(s)) == s."""
    lines = [f"dt = {_toml_scalar(schema['dt'])}"]
    if schema["recursions"] is not None:
        lines.append(f"recursions = {schema['recursions']}")
    lines += ["", "[system]", f"name = {_toml_scalar(schema['system']['name'])}"]
    if schema["system"]["params"]:
        lines += ["", "[system.params]"]
        for k in sorted(schema["system"]["params"]):
            lines.append(f"{k} = {_toml_scalar(schema['system']['params'][k])}")
    lines += ["", "[domain]", f"bounds = {_toml_scalar(schema['domain']['bounds'])}"]
    lines += ["", "[grid]", f"dims = {_toml_scalar(schema['grid']['dims'])}"]
    lines += ["", "[target]", f"variant = {_toml_scalar(schema['target']['variant'])}"]
    if "mask_file" in schema["target"]:
        lines.append(f"mask_file = {_toml_scalar(schema['target']['mask_file'])}")
    if "data" in schema["target"]:
        lines.append(f"data = {_toml_scalar(schema['target']['data'])}")
    lines += [
        "",
        "[query]",
        f"kind = {_toml_scalar(schema['query']['kind'])}",
        f"horizon = {_toml_scalar(schema['query']['horizon'])}",
    ]
    lines += ["", "[controls]", f"counts = {_toml_scalar(schema['controls']['counts'])}"]
    lines += ["", "[output]", f"prefix = {_toml_scalar(schema['output']['prefix'])}"]
    return "\n".join(lines) + "\n"


def config_sha256(schema):
    """Hash of the canonical schema; stable under reformatting."""
    return hashlib.sha256(
        json.dumps(schema, sort_keys=True, separators=(",", ":")).encode()
    ).hexdigest()


# ---------------------------------------------------------------------------
# building runtime objects from a schema
# ---------------------------------------------------------------------------


def _resolve(path, base_dir):
    return path if os.path.isabs(path) else os.path.join(base_dir, path)


def build_problem(schema, base_dir):
    """Instantiate (system, grid, target, mask_path) from a schema."""
    name = schema["system"]["name"]
    if name not in BUILTIN_NAMES:
        raise ConfigError(
            f"system.name {name!r} is not a builtin system ({', '.join(BUILTIN_NAMES)})"
        )
    try:
        system = builtin_system(name, schema["system"]["params"])
    except ConfigError as e:
        raise ConfigError(f"system.params: {e}")
    bounds = schema["domain"]["bounds"]
    if system.dim != len(bounds):
        raise ConfigError(
            f"domain.bounds has {len(bounds)} dimensions but system {name!r} has {system.dim}"
        )
    if len(schema["controls"]["counts"]) != system.control_dim:
        raise ConfigError(
            f"controls.counts has {len(schema['controls']['counts'])} entries but "
            f"system {name!r} has {system.control_dim} control dimension(s)"
        )
    grid = Grid(bounds, schema["grid"]["dims"])
    tgt = schema["target"]
    mask_path = None
    if tgt["variant"] == "box":
        target = Box(tgt["data"])
    elif tgt["variant"] == "complement":
        target = Complement(Box(tgt["data"]))
    elif tgt["variant"] == "union":
        target = UnionSet([Box(b) for b in tgt["data"]])
    else:
        mask_path = _resolve(tgt["mask_file"], base_dir)
        target = load_voxel_mask(mask_path)
    if target.dim != system.dim:
        raise ConfigError(
            f"target.mask_file has dimension {target.dim} but system {name!r} has {system.dim}"
        )
    return system, grid, target, mask_path


def _schema_recursions(schema):
    if schema["recursions"] is not None:
        return schema["recursions"]
    return default_recursions(schema["query"]["horizon"], schema["dt"])


def _file_sha256(path):
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


def _atomic_write_text(path, text):
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def build_manifest(schema, stats, field, field_path, mask_path):
    grid_desc = "x".join(str(n) for n in schema["grid"]["dims"])
    lines = [
        "reachkit manifest",
        f"config_sha256 {config_sha256(schema)}",
        f"kind {schema['query']['kind']}",
        f"horizon {_toml_scalar(schema['query']['horizon'])}",
        f"mode {field.mode}",
        f"dt {_toml_scalar(schema['dt'])}",
        f"recursions {field.k}",
        f"grid {grid_desc}",
        f"workers {stats.workers}",
        f"wall_time_s {stats.wall_time:.6f}",
        f"clamped_lookups {stats.clamped_lookups}",
    ]
    if mask_path is not None:
        lines.append(f"mask_file_sha256 {_file_sha256(mask_path)}")
    lines.append(f"field_sha256 {_file_sha256(field_path)}")
    for i, s in enumerate(stats.step_sums, start=1):
        lines.append(f"step_sum {i} {repr(s)}")
    return "\n".join(lines) + "\n"


def read_manifest_kind(manifest_path):
    """Pull the query kind out of a manifest; None if unavailable."""
    try:
        with open(manifest_path) as fh:
            for line in fh:
                if line.startswith("kind "):
                    kind = line.split(None, 1)[1].strip()
                    return kind if kind in SET_KINDS else None
    except OSError:
        return None
    return None


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_solve(args):
    schema, base_dir = load_config(args.config)
    system, grid, target, mask_path = build_problem(schema, base_dir)
    kind = schema["query"]["kind"]
    effective = Complement(target) if KIND_COMPLEMENTS_TARGET[kind] else target
    config = SolveConfig(
        system=system,
        target=effective,
        grid=grid,
        dt=schema["dt"],
        recursions=_schema_recursions(schema),
        control_counts=tuple(schema["controls"]["counts"]),
        mode=KIND_TO_MODE[kind],
    )
    stats = SolveStats()
    field = solve(config, stats=stats)
    prefix = _resolve(schema["output"]["prefix"], base_dir)
    parent = os.path.dirname(prefix)
    if parent:
        os.makedirs(parent, exist_ok=True)
    field_path = prefix + ".vf"
    save_field(field, field_path)
    _atomic_write_text(prefix + ".manifest", build_manifest(schema, stats, field, field_path, mask_path))
    print(
        f"wrote {field_path} and {prefix}.manifest "
        f"({field.k} recursions, {stats.workers} workers, {stats.wall_time:.3f}s)"
    )
    return 0


def _parse_state(text, ndim):
    parts = [p for p in text.split(",") if p.strip() != ""]
    try:
        values = [float(p) for p in parts]
    except ValueError:
        raise UsageError(f"--state must be comma-separated numbers, got {text!r}")
    if len(values) != ndim:
        raise UsageError(f"--state has {len(values)} components but the field has {ndim}")
    return np.array(values, dtype=np.float64)


def cmd_query(args):
    field = load_field(args.field)
    state = _parse_state(args.state, field.grid.ndim)
    horizon = float(args.horizon)
    if horizon < 0:
        raise UsageError("--horizon must be nonnegative")
    kind = args.kind
    if kind is None:
        base, _ = os.path.splitext(args.field)
        kind = read_manifest_kind(base + ".manifest")
        if kind is None:
            raise UsageError(
                "no sibling manifest records this field's query kind; pass --kind"
            )
    if kind not in SET_KINDS:
        raise UsageError(f"--kind must be one of {', '.join(SET_KINDS)}")
    if field.mode != KIND_TO_MODE[kind]:
        raise UsageError(
            f"kind {kind!r} needs a field solved with mode {KIND_TO_MODE[kind]!r}, "
            f"this field used {field.mode!r}"
        )
    if not horizon < field.horizon():
        raise UsageError(
            f"horizon {horizon} is not below the field's computed horizon "
            f"k*dt = {field.horizon()}; rerun the solve with more recursions"
        )
    value = interpolate(field, state)
    member = value <= horizon if kind in ("max_reach", "min_reach") else value >= horizon
    print(f"kind {kind}")
    print(f"value {repr(float(value))}")
    print(f"member {'true' if member else 'false'}")
    return 0


def _export_vtk(field, path):
    if field.grid.ndim > 3:
        raise UsageError("vtk export supports at most 3 dimensions")
    dims = list(field.grid.dims) + [1] * (3 - field.grid.ndim)
    origin = [float(lo) for lo, _ in field.grid.bounds] + [0.0] * (3 - field.grid.ndim)
    spacing = list(field.grid.spacing) + [1.0] * (3 - field.grid.ndim)
    lines = [
        "# vtk DataFile Version 3.0",
        "reachkit value field",
        "ASCII",
        "DATASET STRUCTURED_POINTS",
        "DIMENSIONS " + " ".join(str(n) for n in dims),
        "ORIGIN " + " ".join(repr(float(v)) for v in origin),
        "SPACING " + " ".join(repr(float(v)) for v in spacing),
        f"POINT_DATA {field.grid.n_nodes}",
        "SCALARS value double 1",
        "LOOKUP_TABLE default",
    ]
    # VTK iterates the first axis fastest; our arrays are C-ordered
    lines.extend(repr(float(v)) for v in field.values.ravel(order="F"))
    _atomic_write_text(path, "\n".join(lines) + "\n")


def _export_csv_slice(field, path, axis, index):
    ndim = field.grid.ndim
    if ndim == 2:
        if axis is not None or index is not None:
            raise UsageError("2-D fields are exported whole; drop --axis/--index")
        plane = field.values
        free = (0, 1)
    elif ndim == 3:
        if axis is None or index is None:
            raise UsageError("3-D fields need --axis and --index to pick a slice")
        if not 0 <= axis < 3:
            raise UsageError(f"--axis must be 0, 1 or 2, got {axis}")
        if not 0 <= index < field.grid.dims[axis]:
            raise UsageError(
                f"--index must be in [0, {field.grid.dims[axis] - 1}], got {index}"
            )
        plane = np.take(field.values, index, axis=axis)
        free = tuple(a for a in range(3) if a != axis)
    else:
        raise UsageError("csv_slice export needs a 2-D or 3-D field")
    xs = field.grid.axes[free[0]]
    ys = field.grid.axes[free[1]]
    rows = ["x,y,value"]
    for i, x in enumerate(xs):
        for j, y in enumerate(ys):
            rows.append(f"{repr(float(x))},{repr(float(y))},{repr(float(plane[i, j]))}")
    _atomic_write_text(path, "\n".join(rows) + "\n")


def cmd_export(args):
    field = load_field(args.field)
    base, _ = os.path.splitext(args.field)
    if args.format == "vtk":
        out = args.output or base + ".vtk"
        _export_vtk(field, out)
    else:
        out = args.output or base + ".csv"
        _export_csv_slice(field, out, args.axis, args.index)
    print(f"wrote {out}")
    return 0


def cmd_verify(args):
    schema, base_dir = load_config(args.config)
    system, grid, target, _ = build_problem(schema, base_dir)
    kind = schema["query"]["kind"]
    if kind not in ("max_reach", "min_reach"):
        raise UsageError("verify needs a max_reach or min_reach query; the exhaustive "
                         "oracle answers reach questions only")
    if args.samples < 0:
        raise UsageError("--samples must be nonnegative")
    dt = schema["dt"]
    horizon = schema["query"]["horizon"]
    steps = int(math.ceil(horizon / dt))
    n_controls = len(discretize_controls(system.control_bounds, schema["controls"]["counts"]))
    if n_controls**steps > SEQUENCE_GUARD:
        raise UsageError(
            f"{n_controls}^{steps} control sequences exceed the {SEQUENCE_GUARD} "
            "enumeration guard; verify needs a coarser dt or shorter horizon"
        )
    config = SolveConfig(
        system=system,
        target=target,
        grid=grid,
        dt=dt,
        recursions=_schema_recursions(schema),
        control_counts=tuple(schema["controls"]["counts"]),
        mode=KIND_TO_MODE[kind],
    )
    stats = SolveStats()
    field = solve(config, stats=stats)
    mask = extract_set(field, SetQuery(kind, horizon), target)
    band = boundary_band(mask).reshape(-1)
    flat_mask = mask.reshape(-1)

    rng = np.random.default_rng(args.seed)
    n_nodes = grid.n_nodes
    n_samples = min(args.samples, n_nodes)
    sample = np.sort(rng.choice(n_nodes, size=n_samples, replace=False))
    nodes = grid.node_matrix()[sample]
    if n_samples:
        exists_hit, forall_hit = classify_nodes(
            system, target, nodes, horizon, dt, schema["controls"]["counts"]
        )
        oracle_label = exists_hit if kind == "max_reach" else forall_hit
    else:
        oracle_label = np.zeros(0, dtype=bool)
    solver_label = flat_mask[sample]
    agree = solver_label == oracle_label
    off_band = ~band[sample]

    prefix = _resolve(schema["output"]["prefix"], base_dir)
    parent = os.path.dirname(prefix)
    if parent:
        os.makedirs(parent, exist_ok=True)
    rows = ["node_index,solver,oracle,agree"]
    for i in range(n_samples):
        rows.append(
            f"{int(sample[i])},{_bool_word(solver_label[i])},"
            f"{_bool_word(oracle_label[i])},{_bool_word(agree[i])}"
        )
    csv_path = prefix + ".verify.csv"
    _atomic_write_text(csv_path, "\n".join(rows) + "\n")

    pct = 100.0 * np.count_nonzero(agree) / n_samples if n_samples else 100.0
    n_off = int(np.count_nonzero(off_band))
    pct_off = (
        100.0 * np.count_nonzero(agree & off_band) / n_off if n_off else 100.0
    )
    print(
        f"verify {kind}: agreement {pct:.1f}% overall, "
        f"{pct_off:.1f}% off-boundary ({n_off} nodes), "
        f"csv {csv_path}, {n_samples} sampled"
    )
    return 0


def _bool_word(b):
    return "true" if b else "false"


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(
        prog="reachkit",
        description="Reachable, viable and invariant sets of nonlinear control "
        "systems by backward value-function recursion on a grid.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="run a config file; write field + manifest")
    p.add_argument("config", help="TOML run configuration")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("query", help="interpolate a solved field at a state")
    p.add_argument("field", help="value-field file from solve")
    p.add_argument("--state", required=True, help="comma-separated state, e.g. 0.1,0.0,-0.2")
    p.add_argument("--horizon", required=True, type=float, help="horizon T to test against")
    p.add_argument("--kind", choices=SET_KINDS, default=None,
                   help="set kind; defaults to the sibling manifest's record")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("export", help="convert a field file for external tools")
    p.add_argument("field", help="value-field file from solve")
    p.add_argument("--format", required=True, choices=("vtk", "csv_slice"))
    p.add_argument("--axis", type=int, default=None, help="slice axis (csv_slice, 3-D)")
    p.add_argument("--index", type=int, default=None, help="node index along the slice axis")
    p.add_argument("-o", "--output", default=None, help="output path")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("verify", help="compare solver output with exhaustive search")
    p.add_argument("config", help="TOML run configuration (reach kinds only)")
    p.add_argument("--samples", type=int, default=200, help="nodes to sample")
    p.add_argument("--seed", type=int, default=0, help="sampling seed")
    p.set_defaults(func=cmd_verify)

    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code else 0
    try:
        return args.func(args)
    except ModelError as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
