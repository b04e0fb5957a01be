"""Fluxes, the semi-discrete operator, CFL sizing, and single steps."""

from __future__ import annotations

import math

import numpy as np
import pytest

from exprabelo import (
    BlowUpError,
    FieldV,
    SchemeConfig,
    ShapeError,
    StateError,
    build_grid,
    cfl_dt,
    godunov_flux,
    interface_fluxes,
    prefix_integral,
    rusanov_flux,
    semi_discrete_rhs,
    step,
)


def f(v):
    return 0.5 * v * v


def godunov_brute_force(a, b, samples=4001):
    """Independent oracle: extremize f over the interval between the states."""
    grid = np.linspace(min(a, b), max(a, b), samples)
    return np.min(f(grid)) if a <= b else np.max(f(grid))


def test_godunov_matches_brute_force_oracle():
    rng = np.random.default_rng(23)
    for _ in range(200):
        a, b = rng.uniform(-4.0, 4.0, size=2)
        expected = godunov_brute_force(a, b)
        assert godunov_flux(a, b) == pytest.approx(expected, abs=2e-6)


def test_flux_consistency_within_4_ulp():
    a = np.arange(-4.0, 4.0 + 1e-9, 1e-2)
    for flux in (godunov_flux, rusanov_flux):
        vals = flux(a, a)
        assert np.all(np.abs(vals - f(a)) <= 4.0 * np.spacing(np.maximum(np.abs(f(a)), 1e-300)))


def test_godunov_named_values():
    assert godunov_flux(1.0, 2.0) == 0.5
    assert godunov_flux(2.0, 1.0) == 2.0
    assert godunov_flux(-1.0, 1.0) == 0.0


def test_rusanov_value_and_dissipativity():
    # 0.5 (0.5 + 2.0) - 0.5 * 2 * (2 - 1) = 0.25
    assert rusanov_flux(1.0, 2.0) == pytest.approx(0.25)
    # rusanov never exceeds godunov on a rarefaction-side pair
    rng = np.random.default_rng(4)
    a = rng.uniform(0.0, 3.0, 100)
    b = a + rng.uniform(0.0, 1.0, 100)
    assert np.all(rusanov_flux(a, b) <= godunov_flux(a, b) + 1e-14)


def test_interface_fluxes_use_zero_ghosts():
    fluxes = interface_fluxes(np.array([1.0, 2.0]), "godunov")
    assert np.array_equal(fluxes, [0.0, 0.5, 2.0])


def test_rhs_breakdown_additivity_and_constant_state_example():
    g = build_grid(-1.0, 1.0, 4)
    fv = FieldV(np.ones(4), 0.0)
    p = prefix_integral(g, fv)
    rhs = semi_discrete_rhs(g, fv, p, SchemeConfig(epsilon=0.0))
    assert np.array_equal(rhs.total, rhs.flux_divergence + rhs.source + rhs.viscous)
    # interior source equals -P(x_i) = -x_i and interior flux divergence vanishes
    assert np.allclose(rhs.source, -g.centers, rtol=1e-15)
    assert rhs.flux_divergence[1] == 0.0
    assert rhs.flux_divergence[2] == 0.0
    assert rhs.flux_divergence[0] != 0.0  # inflow ghost sees the jump
    assert np.array_equal(rhs.viscous, np.zeros(4))


def test_viscous_term_flattens_a_spike():
    g = build_grid(-1.0, 1.0, 8)
    v = np.full(8, 1e-12)
    v[4] = 1.0
    fv = FieldV(v, 0.0)
    rhs = semi_discrete_rhs(g, fv, prefix_integral(g, fv), SchemeConfig(epsilon=0.1))
    assert rhs.viscous[4] < 0.0
    assert rhs.viscous[3] > 0.0


def test_rhs_shape_errors():
    g = build_grid(-1.0, 1.0, 8)
    fv = FieldV(np.ones(8), 0.0)
    p_other = prefix_integral(build_grid(-1.0, 1.0, 16), FieldV(np.ones(16), 0.0))
    with pytest.raises(ShapeError):
        semi_discrete_rhs(g, fv, p_other, SchemeConfig())
    with pytest.raises(ShapeError):
        semi_discrete_rhs(g, FieldV(np.ones(9), 0.0), prefix_integral(g, fv), SchemeConfig())


def test_scheme_config_validation():
    with pytest.raises(ValueError):
        SchemeConfig(flux="roe")
    with pytest.raises(ValueError):
        SchemeConfig(cfl=0.0)
    with pytest.raises(ValueError):
        SchemeConfig(cfl=1.5)
    with pytest.raises(ValueError):
        SchemeConfig(epsilon=-1e-6)
    with pytest.raises(ValueError):
        SchemeConfig(v_floor=0.0)
    with pytest.raises(ValueError):
        SchemeConfig(integrator="rk4")
    with pytest.raises(ValueError):
        SchemeConfig(boundary="periodic")


def test_cfl_worked_examples():
    g = build_grid(-1.0, 1.0, 200)  # dx = 0.01
    fv = FieldV(np.ones(200), 0.0)
    p = prefix_integral(g, fv)  # p_sup just under 1, so 1/p_sup is not binding
    dt0 = cfl_dt(g, fv, p, SchemeConfig(epsilon=0.0, cfl=0.4))
    assert dt0 == pytest.approx(0.004, rel=1e-12)
    dt1 = cfl_dt(g, fv, p, SchemeConfig(epsilon=0.01, cfl=0.4))
    assert dt1 == pytest.approx(0.002, rel=1e-12)
    # strictly decreasing in epsilon once the diffusive branch binds
    dts = [cfl_dt(g, fv, p, SchemeConfig(epsilon=e, cfl=0.4)) for e in (0.01, 0.02, 0.04)]
    assert dts[0] > dts[1] > dts[2]


def test_cfl_rejects_nonpositive_field():
    g = build_grid(-1.0, 1.0, 8)
    fv = FieldV(np.zeros(8), 0.0)
    with pytest.raises(StateError):
        cfl_dt(g, fv, prefix_integral(g, fv), SchemeConfig())


def test_forward_euler_is_exactly_state_plus_dt_rate():
    rng = np.random.default_rng(9)
    g = build_grid(-2.0, 2.0, 32)
    v0 = rng.uniform(0.5, 1.5, 32)
    fv = FieldV(v0, 0.0)
    cfg = SchemeConfig(integrator="forward-euler", epsilon=1e-2)
    rhs = semi_discrete_rhs(g, fv, prefix_integral(g, fv), cfg)
    dt = 0.5 * cfl_dt(g, fv, prefix_integral(g, fv), cfg)
    out = step(g, fv, cfg, dt)
    assert out.clip_count == 0
    assert np.array_equal(out.values, v0 + dt * rhs.total)
    assert out.time == dt


def test_ssp_rk2_is_half_sum_of_euler_chain():
    # Heun's method: the rk2 result equals the average of the state and two
    # chained Euler steps, bitwise, when nothing clips
    rng = np.random.default_rng(29)
    g = build_grid(-2.0, 2.0, 48)
    v0 = rng.uniform(0.5, 1.5, 48)
    fv = FieldV(v0, 0.0)
    euler = SchemeConfig(integrator="forward-euler", epsilon=1e-3)
    heun = SchemeConfig(integrator="ssp-rk2", epsilon=1e-3)
    dt = 0.5 * cfl_dt(g, fv, prefix_integral(g, fv), heun)
    e1 = step(g, fv, euler, dt)
    e2 = step(g, e1, euler, dt)
    rk = step(g, fv, heun, dt)
    assert e1.clip_count == 0 and e2.clip_count == 0 and rk.clip_count == 0
    assert np.array_equal(rk.values, 0.5 * v0 + 0.5 * e2.values)


def test_single_step_is_monotone_source_off():
    # Godunov + forward Euler under CFL is order-preserving in each argument
    rng = np.random.default_rng(41)
    g = build_grid(-2.0, 2.0, 64)
    cfg = SchemeConfig(
        flux="godunov",
        epsilon=0.0,
        source_enabled=False,
        integrator="forward-euler",
        v_floor=1e-300,
    )
    for _ in range(25):
        v = rng.uniform(0.0, 2.0, 64)
        w = v + rng.uniform(0.0, 1.0, 64)
        fv, fw = FieldV(v, 0.0), FieldV(w, 0.0)
        dt = 0.9 * min(
            cfl_dt(g, fv, prefix_integral(g, fv), cfg) if v.max() > 0 else np.inf,
            cfl_dt(g, fw, prefix_integral(g, fw), cfg),
        )
        sv = step(g, fv, cfg, dt)
        sw = step(g, fw, cfg, dt)
        assert np.all(sv.values <= sw.values + 1e-12)


def test_positivity_without_clipping():
    # with the stated CFL no cell should need rescuing from below zero
    rng = np.random.default_rng(57)
    for integrator in ("forward-euler", "ssp-rk2"):
        cfg = SchemeConfig(
            epsilon=0.0, source_enabled=True, integrator=integrator, v_floor=1e-300
        )
        for _ in range(10):
            g = build_grid(-2.0, 2.0, 64)
            v = rng.uniform(1e-6, 2.0, 64)
            fv = FieldV(v, 0.0)
            dt = cfl_dt(g, fv, prefix_integral(g, fv), cfg)
            out = step(g, fv, cfg, dt)
            assert out.clip_count == 0
            assert np.all(out.values >= 0.0)


def test_discrete_conservation_single_step():
    rng = np.random.default_rng(71)
    g = build_grid(-2.0, 2.0, 64)
    v = rng.uniform(0.1, 2.0, 64)
    fv = FieldV(v, 0.0)
    cfg = SchemeConfig(
        epsilon=0.0, source_enabled=False, integrator="forward-euler", v_floor=1e-300
    )
    dt = cfl_dt(g, fv, prefix_integral(g, fv), cfg)
    out = step(g, fv, cfg, dt)
    fluxes = interface_fluxes(v, "godunov")
    expected = np.sum(v) * g.dx - dt * (fluxes[-1] - fluxes[0])
    assert np.sum(out.values) * g.dx == pytest.approx(expected, rel=1e-13)


def test_clip_counts_cells_below_floor():
    # all cells start below the floor except the bump; after one Euler
    # step only the bump and the cell its flux feeds sit above it, so
    # exactly six cells are lifted
    g = build_grid(-2.0, 2.0, 8)
    v = np.full(8, 1e-15)
    v[4] = 1.0
    cfg = SchemeConfig(epsilon=0.0, source_enabled=True, integrator="forward-euler")
    out = step(g, FieldV(v, 0.0), cfg, 1e-3)
    assert out.clip_count == 6
    assert np.all(out.values >= cfg.v_floor)


def test_blow_up_reports_first_cell_and_time():
    g = build_grid(-2.0, 2.0, 8)
    fv = FieldV(np.ones(8), 0.0)

    def bad_forcing(t, x):
        out = np.zeros_like(x)
        out[3] = np.inf
        return out

    cfg = SchemeConfig(forcing=bad_forcing, integrator="forward-euler")
    with pytest.raises(BlowUpError) as exc:
        step(g, fv, cfg, 1e-3)
    assert exc.value.cell_index == 3
    assert exc.value.time == pytest.approx(1e-3)


def test_step_rejects_bad_dt():
    g = build_grid(-2.0, 2.0, 8)
    fv = FieldV(np.ones(8), 0.0)
    with pytest.raises(ValueError):
        step(g, fv, SchemeConfig(), 0.0)
    with pytest.raises(ValueError):
        step(g, fv, SchemeConfig(), math.nan)
