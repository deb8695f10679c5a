"""Recursion steps, full solves, and set extraction."""

import numpy as np
import pytest

import reachkit as rk


def si_setup(n=201, lo=-1.0, hi=1.0, half=0.2, dt=0.01, mode="minimize"):
    system = rk.builtin_system("single_integrator")
    target = rk.Box([[-half, half]])
    grid = rk.Grid([[lo, hi]], [n])
    config = rk.SolveConfig(
        system=system, target=target, grid=grid, dt=dt,
        recursions=0, control_counts=(2,), mode=mode,
    )
    return system, target, grid, config


def test_config_validation():
    system = rk.builtin_system("single_integrator")
    target = rk.Box([[-0.2, 0.2]])
    grid = rk.Grid([[-1.0, 1.0]], [11])
    ok = dict(system=system, target=target, grid=grid, dt=0.01,
              recursions=3, control_counts=(2,), mode="minimize")
    rk.SolveConfig(**ok)
    with pytest.raises(rk.UsageError):
        rk.SolveConfig(**{**ok, "mode": "fastest"})
    with pytest.raises(rk.UsageError):
        rk.SolveConfig(**{**ok, "dt": 0.0})
    with pytest.raises(rk.UsageError):
        rk.SolveConfig(**{**ok, "recursions": -1})
    with pytest.raises(rk.UsageError):
        rk.SolveConfig(**{**ok, "control_counts": (2, 2)})
    with pytest.raises(rk.UsageError):
        rk.SolveConfig(**{**ok, "target": rk.Box([[-0.2, 0.2], [-0.2, 0.2]])})
    with pytest.raises(rk.UsageError):
        rk.SolveConfig(**{**ok, "grid": rk.Grid([[-1.0, 1.0], [-1.0, 1.0]], [5, 5])})


def test_set_query_validation():
    rk.SetQuery("max_reach", 1.0)
    with pytest.raises(rk.UsageError):
        rk.SetQuery("reach", 1.0)
    with pytest.raises(rk.UsageError):
        rk.SetQuery("max_reach", -0.5)
    with pytest.raises(rk.UsageError):
        rk.SetQuery("max_reach", np.inf)


def test_first_step_is_cost_only():
    """From the zero field one step gives dt outside, 0 inside, for
    either optimization direction."""
    for mode in ("minimize", "maximize"):
        system, target, grid, config = si_setup(mode=mode)
        field = rk.zero_field(grid, mode, 0.01)
        stepped = rk.recursion_step(field, config)
        assert stepped.k == 1
        ink = target.contains_many(grid.node_matrix())
        flat = stepped.values.reshape(-1)
        assert np.all(flat[ink] == 0.0)
        assert np.all(flat[~ink] == 0.01)
        # input untouched
        assert field.k == 0 and np.all(field.values == 0.0)


def test_two_steps_from_adjacent_node():
    # node one spacing outside the target pays one dt then enters
    system, target, grid, config = si_setup()
    field = rk.zero_field(grid, "minimize", 0.01)
    for _ in range(2):
        field = rk.recursion_step(field, config)
    x = grid.node_matrix()[:, 0]
    node = np.argmin(np.abs(x - 0.21))
    assert abs(field.values.reshape(-1)[node] - 0.01) < 1e-12


def test_zero_recursions_zero_field():
    system, target, grid, config = si_setup()
    field = rk.solve(config)
    assert field.k == 0
    assert np.all(field.values == 0.0)


def test_absorption_bound_monotonicity():
    system = rk.builtin_system("dubins_car")
    target = rk.Box([[-0.3, 0.3]] * 3)
    grid = rk.Grid([[-1.0, 1.0]] * 3, [11, 11, 11])
    ink = target.contains_many(grid.node_matrix())
    for mode in ("minimize", "maximize"):
        config = rk.SolveConfig(
            system=system, target=target, grid=grid, dt=0.05,
            recursions=0, control_counts=(3,), mode=mode,
        )
        field = rk.zero_field(grid, mode, 0.05)
        for k in range(1, 9):
            nxt = rk.recursion_step(field, config)
            flat_prev = field.values.reshape(-1)
            flat = nxt.values.reshape(-1)
            assert np.all(flat[ink] == 0.0)  # absorption, bitwise
            assert np.all(flat >= flat_prev)  # monotone, bitwise
            assert np.all(flat <= rk.saturation_value(0.05, k))  # bound
            field = nxt


def test_minimize_below_maximize():
    system = rk.builtin_system("dubins_car")
    target = rk.Box([[-0.3, 0.3]] * 3)
    grid = rk.Grid([[-1.0, 1.0]] * 3, [11, 11, 11])
    fields = {}
    for mode in ("minimize", "maximize"):
        config = rk.SolveConfig(
            system=system, target=target, grid=grid, dt=0.05,
            recursions=8, control_counts=(3,), mode=mode,
        )
        fields[mode] = rk.solve(config)
    gap = fields["maximize"].values - fields["minimize"].values
    assert gap.min() >= -1e-12


def test_mode_mismatch_rejected():
    system, target, grid, config = si_setup(mode="minimize")
    field = rk.zero_field(grid, "maximize", 0.01)
    with pytest.raises(rk.UsageError):
        rk.recursion_step(field, config)


def test_extract_set_pairing_and_horizon():
    system, target, grid, config = si_setup(mode="minimize")
    config = rk.SolveConfig(**{**config.__dict__, "recursions": 51})
    field = rk.solve(config)
    mask = rk.extract_set(field, rk.SetQuery("max_reach", 0.3), target)
    assert mask.dtype == bool and mask.shape == grid.dims
    with pytest.raises(rk.UsageError, match="strictly less"):
        rk.extract_set(field, rk.SetQuery("max_reach", 0.51), target)
    with pytest.raises(rk.UsageError, match="mode"):
        rk.extract_set(field, rk.SetQuery("min_reach", 0.3), target)
    with pytest.raises(rk.UsageError, match="complement"):
        rk.extract_set(field, rk.SetQuery("invariant", 0.3), target)
    comp_field = rk.ValueField(grid, field.values, "maximize", 0.01, 51)
    with pytest.raises(rk.UsageError, match="complement"):
        rk.extract_set(comp_field, rk.SetQuery("viable", 0.3), target)
    # a complement is an ordinary target for the reach kinds (duality route)
    dual = rk.extract_set(comp_field, rk.SetQuery("min_reach", 0.3),
                          rk.Complement(target))
    np.testing.assert_array_equal(dual, rk.level_mask(comp_field, 0.3, "<="))


def test_zero_horizon_reach_set_is_target():
    system, target, grid, config = si_setup(mode="minimize")
    config = rk.SolveConfig(**{**config.__dict__, "recursions": 3})
    field = rk.solve(config)
    mask = rk.extract_set(field, rk.SetQuery("max_reach", 0.0), target)
    ink = target.contains_many(grid.node_matrix()).reshape(grid.dims)
    np.testing.assert_array_equal(mask, ink)


def test_default_recursions_rule():
    assert rk.default_recursions(1.0, 0.01) == 101
    assert rk.default_recursions(2.0, 0.01) == 201
    assert rk.default_recursions(1.5, 0.01) == 151
    assert rk.default_recursions(0.8, 0.1) == 9
    assert rk.default_recursions(0.0, 0.01) == 1
    with pytest.raises(rk.UsageError):
        rk.default_recursions(1.0, 0.0)


def test_solve_query_reach():
    """Horizon-1 forward band of the 1-D integrator is [-1.2, 1.2].

    The recursion count is pushed well past the horizon so the
    saturation cap sits far above the threshold; otherwise the whole
    far field hovers just under the cap and the sublevel set balloons.
    """
    system = rk.builtin_system("single_integrator")
    target = rk.Box([[-0.2, 0.2]])
    grid = rk.Grid([[-2.0, 2.0]], [201])
    field, mask = rk.solve_query(
        system, target, rk.SetQuery("max_reach", 1.0), grid,
        dt=0.005, control_counts=[2], recursions=401,
    )
    assert field.k == 401
    assert field.mode == "minimize"
    np.testing.assert_array_equal(mask, rk.level_mask(field, 1.0, "<="))
    x = grid.node_matrix()[:, 0]
    sel = mask.reshape(-1).nonzero()[0]
    dx = 0.02
    assert abs(x[sel[0]] - (-1.2)) <= dx + 1e-12
    assert abs(x[sel[-1]] - 1.2) <= dx + 1e-12
    assert np.array_equal(sel, np.arange(sel[0], sel[-1] + 1))  # contiguous


def test_solve_query_viable_keeps_interior():
    """With a coasting control available, exactly the constraint box
    stays viable for a 1-D integrator."""
    system = rk.builtin_system("single_integrator")
    keep = rk.Box([[-0.5, 0.5]])
    grid = rk.Grid([[-1.0, 1.0]], [41])
    field, mask = rk.solve_query(
        system, keep, rk.SetQuery("viable", 1.0), grid,
        dt=0.05, control_counts=[3],
    )
    assert field.mode == "maximize"
    ink = keep.contains_many(grid.node_matrix()).reshape(grid.dims)
    np.testing.assert_array_equal(mask, ink)


def test_solve_query_invariant_mostly_empty():
    # an adversarial control always pushes a 1-D integrator out
    system = rk.builtin_system("single_integrator")
    keep = rk.Box([[-0.5, 0.5]])
    grid = rk.Grid([[-1.0, 1.0]], [41])
    field, mask = rk.solve_query(
        system, keep, rk.SetQuery("invariant", 1.0), grid,
        dt=0.05, control_counts=[3],
    )
    assert field.mode == "minimize"
    assert not mask.any()


def test_stats_filled():
    system, target, grid, config = si_setup(n=41)
    config = rk.SolveConfig(**{**config.__dict__, "recursions": 5})
    stats = rk.SolveStats()
    rk.solve(config, workers=2, stats=stats)
    assert stats.workers == 2
    assert len(stats.step_sums) == 5
    assert stats.step_sums == sorted(stats.step_sums)  # sums grow with k
    assert stats.wall_time > 0
    assert stats.clamped_lookups > 0  # boundary nodes step outside


def test_worker_count_determinism():
    system = rk.builtin_system("dubins_car")
    target = rk.Box([[-0.3, 0.3]] * 3)
    grid = rk.Grid([[-1.0, 1.0]] * 3, [11, 11, 11])
    config = rk.SolveConfig(
        system=system, target=target, grid=grid, dt=0.05,
        recursions=10, control_counts=(2,), mode="minimize",
    )
    one = rk.solve(config, workers=1)
    four = rk.solve(config, workers=4)
    assert np.array_equal(one.values, four.values)  # bitwise


def test_resolve_workers(monkeypatch):
    assert rk.resolve_workers(3) == 3
    monkeypatch.setenv("REACHKIT_THREADS", "7")
    assert rk.resolve_workers() == 7
    assert rk.resolve_workers(2) == 2  # explicit beats env
    monkeypatch.setenv("REACHKIT_THREADS", "0")
    assert rk.resolve_workers() >= 1
    monkeypatch.setenv("REACHKIT_THREADS", "many")
    with pytest.raises(rk.ConfigError):
        rk.resolve_workers()
    monkeypatch.delenv("REACHKIT_THREADS")
    assert rk.resolve_workers() >= 1
    with pytest.raises(rk.UsageError):
        rk.resolve_workers(-2)


def test_model_error_carries_node_index():
    def patchy(s, u):
        s = np.atleast_2d(s)
        out = np.full_like(s, 1.0)
        out[np.abs(s[:, 0]) > 0.9, 0] = np.nan
        return out

    system = rk.SystemModel(
        name="patchy", dim=1, control_dim=1,
        control_bounds=((-1.0, 1.0),), vector_field=patchy,
    )
    target = rk.Box([[-0.1, 0.1]])
    grid = rk.Grid([[-1.0, 1.0]], [21])
    config = rk.SolveConfig(
        system=system, target=target, grid=grid, dt=0.01,
        recursions=2, control_counts=(2,), mode="minimize",
    )
    with pytest.raises(rk.ModelError) as err:
        rk.solve(config)
    idx = err.value.node_index
    assert idx is not None
    assert abs(grid.node_matrix()[idx, 0]) > 0.9
    assert abs(err.value.state[0]) > 0.9
    assert "node index" in str(err.value)
