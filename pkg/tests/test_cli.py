"""Config schema, file outputs, and end-to-end command flows."""

import os

import numpy as np
import pytest

try:
    import tomllib
except ImportError:
    import tomli as tomllib

import reachkit as rk
from reachkit.cli import (
    build_manifest,
    build_problem,
    config_sha256,
    load_config,
    main,
    read_manifest_kind,
    serialize_config,
    validate_config,
)

BASE_CONFIG = """\
dt = 0.01
recursions = 51

[system]
name = "single_integrator"

[domain]
bounds = [[-1.0, 1.0]]

[grid]
dims = [101]

[target]
variant = "box"
data = [[-0.2, 0.2]]

[query]
kind = "max_reach"
horizon = 0.4

[controls]
counts = [2]

[output]
prefix = "out/si"
"""


def write_config(tmp_path, text=BASE_CONFIG, name="run.toml"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_validate_serialize_roundtrip():
    schema = validate_config(tomllib.loads(BASE_CONFIG))
    text = serialize_config(schema)
    again = validate_config(tomllib.loads(text))
    assert again == schema
    assert serialize_config(again) == text
    assert config_sha256(again) == config_sha256(schema)


def test_config_sha_ignores_formatting():
    schema = validate_config(tomllib.loads(BASE_CONFIG))
    noisy = BASE_CONFIG.replace("dt = 0.01", "dt    = 0.01   # step size")
    noisy += "\n# trailing comment\n"
    assert config_sha256(validate_config(tomllib.loads(noisy))) == config_sha256(schema)
    changed = BASE_CONFIG.replace("horizon = 0.4", "horizon = 0.5")
    assert config_sha256(validate_config(tomllib.loads(changed))) != config_sha256(schema)
    changed = BASE_CONFIG.replace("counts = [2]", "counts = [3]")
    assert config_sha256(validate_config(tomllib.loads(changed))) != config_sha256(schema)


def test_validate_rejections():
    good = tomllib.loads(BASE_CONFIG)

    def variant(**edits):
        doc = {k: (dict(v) if isinstance(v, dict) else v) for k, v in good.items()}
        doc.update(edits)
        return doc

    cases = [
        (variant(dt=-0.5), "dt"),
        (variant(extra=1), "extra"),
        (variant(recursions=-1), "recursions"),
        (variant(system={"name": "single_integrator", "typo": 1}), "typo"),
        (variant(domain={"bounds": [[1.0, -1.0]]}), "domain.bounds"),
        (variant(grid={"dims": [101, 7]}), "grid.dims"),
        (variant(grid={"dims": [1]}), "grid.dims"),
        (variant(target={"variant": "sphere", "data": []}), "target.variant"),
        (variant(target={"variant": "box", "data": [[0.3, 0.1]]}), "target.data"),
        (variant(query={"kind": "reach", "horizon": 0.4}), "query.kind"),
        (variant(query={"kind": "max_reach", "horizon": -1.0}), "query.horizon"),
        (variant(controls={"counts": [0]}), "controls.counts"),
        (variant(output={}), "output.prefix"),
    ]
    for doc, needle in cases:
        with pytest.raises(rk.ConfigError) as err:
            validate_config(doc)
        assert needle in str(err.value)
    # "warp_drive" passes schema validation; build_problem rejects it
    schema = validate_config(variant(system={"name": "warp_drive"}))
    with pytest.raises(rk.ConfigError, match="warp_drive"):
        build_problem(schema, ".")


def test_solve_query_export_flow(tmp_path, capsys):
    cfg = write_config(tmp_path)
    assert main(["solve", cfg]) == 0
    out = capsys.readouterr().out
    assert "wrote" in out and "51 recursions" in out
    vf = str(tmp_path / "out" / "si.vf")
    manifest = str(tmp_path / "out" / "si.manifest")
    assert os.path.exists(vf) and os.path.exists(manifest)

    lines = open(manifest).read().splitlines()
    assert lines[0] == "reachkit manifest"
    keys = [ln.split()[0] for ln in lines]
    for key in ("config_sha256", "kind", "mode", "dt", "recursions", "grid",
                "workers", "wall_time_s", "clamped_lookups", "field_sha256"):
        assert key in keys
    assert "kind max_reach" in lines
    assert "grid 101" in lines
    assert sum(k == "step_sum" for k in keys) == 51
    assert read_manifest_kind(manifest) == "max_reach"

    # in the target: value exactly 0, member at any horizon
    assert main(["query", vf, "--state", "0.1", "--horizon", "0.3"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out == ["kind max_reach", "value 0.0", "member true"]

    # too far to arrive within 0.3
    assert main(["query", vf, "--state", "0.9", "--horizon", "0.3"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[2] == "member false"

    # same field read as an invariant query (same mode); now >= applies
    assert main(["query", vf, "--state", "0.9", "--horizon", "0.3",
                 "--kind", "invariant"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "kind invariant" and out[2] == "member true"

    # horizon at or above k*dt is refused
    assert main(["query", vf, "--state", "0.1", "--horizon", "0.51"]) == 2
    # wrong mode for the kind
    assert main(["query", vf, "--state", "0.1", "--horizon", "0.3",
                 "--kind", "min_reach"]) == 2
    # malformed state
    assert main(["query", vf, "--state", "0.1,oops", "--horizon", "0.3"]) == 2
    assert main(["query", vf, "--state", "0.1,0.2", "--horizon", "0.3"]) == 2

    assert main(["export", vf, "--format", "vtk"]) == 0
    capsys.readouterr()
    vtk = open(str(tmp_path / "out" / "si.vtk")).read().splitlines()
    assert vtk[0] == "# vtk DataFile Version 3.0"
    assert vtk[3] == "DATASET STRUCTURED_POINTS"
    assert vtk[4] == "DIMENSIONS 101 1 1"
    assert vtk[5] == "ORIGIN -1.0 0.0 0.0"
    assert vtk[6] == "SPACING 0.02 1.0 1.0"
    assert vtk[7] == "POINT_DATA 101"
    assert len(vtk) == 10 + 101
    field = rk.load_field(vf)
    reparsed = np.array([float(v) for v in vtk[10:]])
    np.testing.assert_array_equal(reparsed, field.values)  # repr round-trips

    # 1-D fields have no csv slice
    assert main(["export", vf, "--format", "csv_slice"]) == 2


def test_query_without_manifest_needs_kind(tmp_path, capsys):
    cfg = write_config(tmp_path)
    assert main(["solve", cfg]) == 0
    capsys.readouterr()
    vf = tmp_path / "out" / "si.vf"
    orphan = tmp_path / "orphan.vf"
    orphan.write_bytes(vf.read_bytes())
    assert main(["query", str(orphan), "--state", "0.1", "--horizon", "0.3"]) == 2
    assert "--kind" in capsys.readouterr().err
    assert main(["query", str(orphan), "--state", "0.1", "--horizon", "0.3",
                 "--kind", "max_reach"]) == 0


def test_export_csv_3d(tmp_path):
    grid = rk.Grid([[0.0, 1.0], [0.0, 2.0], [0.0, 3.0]], [3, 4, 5])
    rng = np.random.default_rng(5)
    values = rng.uniform(0.0, 1.0, size=(3, 4, 5))
    field = rk.ValueField(grid, values, "minimize", 0.1, 7)
    path = tmp_path / "f.vf"
    rk.save_field(field, str(path))

    out = tmp_path / "slice.csv"
    assert main(["export", str(path), "--format", "csv_slice",
                 "--axis", "2", "--index", "1", "-o", str(out)]) == 0
    rows = out.read_text().splitlines()
    assert rows[0] == "x,y,value"
    assert len(rows) == 1 + 3 * 4
    x, y, v = rows[1].split(",")
    assert float(x) == 0.0 and float(y) == 0.0
    assert float(v) == values[0, 0, 1]  # bit-exact through repr

    # slice bounds and axis checking
    assert main(["export", str(path), "--format", "csv_slice",
                 "--axis", "3", "--index", "0", "-o", str(out)]) == 2
    assert main(["export", str(path), "--format", "csv_slice",
                 "--axis", "2", "--index", "5", "-o", str(out)]) == 2
    assert main(["export", str(path), "--format", "csv_slice",
                 "--axis", "2", "-o", str(out)]) == 2

    vtk_out = tmp_path / "f.vtk"
    assert main(["export", str(path), "--format", "vtk", "-o", str(vtk_out)]) == 0
    vtk = vtk_out.read_text().splitlines()
    assert vtk[4] == "DIMENSIONS 3 4 5"
    assert len(vtk) == 10 + 60
    # first axis varies fastest in the payload
    assert float(vtk[10]) == values[0, 0, 0]
    assert float(vtk[11]) == values[1, 0, 0]


def test_export_csv_2d_whole(tmp_path):
    grid = rk.Grid([[0.0, 1.0], [0.0, 1.0]], [3, 3])
    field = rk.ValueField(grid, np.arange(9.0).reshape(3, 3), "minimize", 0.1, 2)
    path = tmp_path / "f2.vf"
    rk.save_field(field, str(path))
    out = tmp_path / "f2.csv"
    assert main(["export", str(path), "--format", "csv_slice", "-o", str(out)]) == 0
    rows = out.read_text().splitlines()
    assert len(rows) == 10
    assert main(["export", str(path), "--format", "csv_slice",
                 "--axis", "0", "--index", "1", "-o", str(out)]) == 2


def test_verify_flow(tmp_path, capsys):
    text = BASE_CONFIG.replace("dt = 0.01", "dt = 0.1")
    text = text.replace("recursions = 51", "recursions = 6")
    text = text.replace("dims = [101]", "dims = [41]")
    cfg = write_config(tmp_path, text)
    assert main(["verify", cfg, "--samples", "10", "--seed", "3"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("verify max_reach: agreement ")
    assert out.rstrip().endswith("10 sampled")
    csv_path = tmp_path / "out" / "si.verify.csv"
    rows = csv_path.read_text().splitlines()
    assert rows[0] == "node_index,solver,oracle,agree"
    assert len(rows) == 11
    for row in rows[1:]:
        idx, solver, oracle, agree = row.split(",")
        assert 0 <= int(idx) < 41
        assert solver in ("true", "false") and oracle in ("true", "false")
        assert agree == ("true" if solver == oracle else "false")
    # deterministic under a fixed seed
    assert main(["verify", cfg, "--samples", "10", "--seed", "3"]) == 0
    capsys.readouterr()
    assert csv_path.read_text().splitlines() == rows

    assert main(["verify", cfg, "--samples", "0"]) == 0
    out = capsys.readouterr().out
    assert "0 sampled" in out
    assert csv_path.read_text().splitlines() == [rows[0]]


def test_verify_guard_and_kind(tmp_path, capsys):
    cfg = write_config(tmp_path)  # dt=0.01, horizon 0.4 -> 2^40 sequences
    assert main(["verify", cfg, "--samples", "5"]) == 2
    assert "guard" in capsys.readouterr().err
    text = BASE_CONFIG.replace('kind = "max_reach"', 'kind = "viable"')
    cfg = write_config(tmp_path, text, name="viable.toml")
    assert main(["verify", cfg, "--samples", "5"]) == 2
    assert "reach" in capsys.readouterr().err


def test_exit_codes_basic(tmp_path, capsys):
    assert main(["solve", str(tmp_path / "missing.toml")]) == 2
    bad = write_config(tmp_path, BASE_CONFIG + "\nwhatever = 1\n", name="bad.toml")
    assert main(["solve", bad]) == 2
    assert "whatever" in capsys.readouterr().err
    broken = write_config(tmp_path, "dt = [unclosed", name="broken.toml")
    assert main(["solve", broken]) == 2
    assert "TOML" in capsys.readouterr().err
    # argparse's own rejection paths surface as exit 2
    assert main(["query"]) == 2
    assert main(["export", "x.vf", "--format", "midi"]) == 2
    assert main([]) == 2


def test_exit_code_3_model_failure(tmp_path, capsys):
    text = """\
dt = 0.01
recursions = 2

[system]
name = "longitudinal_flight"

[domain]
bounds = [[1.5707963267948966, 1.6], [-0.1, 0.1], [-0.1, 0.1]]

[grid]
dims = [3, 3, 3]

[target]
variant = "box"
data = [[1.55, 1.58], [-0.02, 0.02], [-0.02, 0.02]]

[query]
kind = "max_reach"
horizon = 0.01

[controls]
counts = [2]

[output]
prefix = "out/sing"
"""
    cfg = write_config(tmp_path, text, name="singular.toml")
    assert main(["solve", cfg]) == 3
    err = capsys.readouterr().err
    assert "error:" in err and "node index" in err


def test_threads_env_recorded(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("REACHKIT_THREADS", "2")
    cfg = write_config(tmp_path)
    assert main(["solve", cfg]) == 0
    capsys.readouterr()
    manifest = (tmp_path / "out" / "si.manifest").read_text()
    assert "workers 2" in manifest.splitlines()
    monkeypatch.setenv("REACHKIT_THREADS", "soon")
    assert main(["solve", cfg]) == 2


def test_union_and_complement_targets(tmp_path, capsys):
    text = BASE_CONFIG.replace(
        'variant = "box"\ndata = [[-0.2, 0.2]]',
        'variant = "union"\ndata = [[[-0.5, -0.3]], [[0.3, 0.5]]]',
    )
    cfg = write_config(tmp_path, text, name="union.toml")
    assert main(["solve", cfg]) == 0
    capsys.readouterr()
    vf = str(tmp_path / "out" / "si.vf")
    for state, expect in (("-0.4", "value 0.0"), ("0.4", "value 0.0")):
        assert main(["query", vf, "--state", state, "--horizon", "0.3"]) == 0
        assert capsys.readouterr().out.splitlines()[1] == expect

    text = BASE_CONFIG.replace('variant = "box"', 'variant = "complement"')
    cfg = write_config(tmp_path, text, name="comp.toml")
    assert main(["solve", cfg]) == 0
    capsys.readouterr()
    assert main(["query", vf, "--state", "0.5", "--horizon", "0.3"]) == 0
    assert capsys.readouterr().out.splitlines()[1] == "value 0.0"  # in complement


def test_voxel_mask_target_flow(tmp_path, capsys):
    mask = rk.voxel_from_cells([[-1.0, 1.0]], [10], [[2], [3], [7]])
    mask_path = tmp_path / "cells.vox"
    rk.save_voxel_mask(mask, str(mask_path))
    text = BASE_CONFIG.replace(
        'variant = "box"\ndata = [[-0.2, 0.2]]',
        'variant = "voxel_mask"\nmask_file = "cells.vox"',
    )
    cfg = write_config(tmp_path, text, name="vox.toml")
    assert main(["solve", cfg]) == 0
    capsys.readouterr()
    manifest = (tmp_path / "out" / "si.manifest").read_text().splitlines()
    assert any(ln.startswith("mask_file_sha256 ") for ln in manifest)
    vf = str(tmp_path / "out" / "si.vf")
    # x = -0.5 sits in marked cell 2 ([-0.6, -0.4))
    assert main(["query", vf, "--state", "-0.5", "--horizon", "0.3"]) == 0
    assert capsys.readouterr().out.splitlines()[1] == "value 0.0"


def test_manifest_identity_same_schema(tmp_path):
    cfg_a = write_config(tmp_path, name="a.toml")
    noisy = BASE_CONFIG + "\n# a comment\n"
    cfg_b = write_config(tmp_path, noisy, name="b.toml")
    schema_a, _ = load_config(cfg_a)
    schema_b, _ = load_config(cfg_b)
    assert schema_a == schema_b
    assert config_sha256(schema_a) == config_sha256(schema_b)
