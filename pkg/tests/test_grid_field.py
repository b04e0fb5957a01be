"""Grid construction, field validation, and the initial-data presets."""

from __future__ import annotations

import math

import numpy as np
import pytest
from scipy.special import expit

from exprabelo import (
    AmplitudeError,
    DomainTooSmallError,
    FieldU,
    FieldV,
    GridAlignmentError,
    GridSizeError,
    InitialDataSpec,
    build_grid,
    init_field,
    u_from_v,
    v_from_u,
)


def test_basic_grid_geometry():
    g = build_grid(-1.0, 1.0, 4)
    assert g.dx == 0.5
    assert g.anchor_index == 2
    assert np.array_equal(g.interfaces, [-1.0, -0.5, 0.0, 0.5, 1.0])
    assert np.array_equal(g.centers, [-0.75, -0.25, 0.25, 0.75])


def test_anchor_interface_is_exactly_zero_even_asymmetric():
    for args in ((-8.0, 8.0, 256), (-3.0, 5.0, 64), (-0.5, 1.5, 16)):
        g = build_grid(*args)
        assert g.interfaces[g.anchor_index] == 0.0


def test_misaligned_endpoints_rejected_with_suggestion():
    with pytest.raises(GridAlignmentError) as exc:
        build_grid(-1.0, 1.1, 4)
    # the message should propose admissible endpoints
    assert "x_min" in str(exc.value)


def test_grid_size_and_sign_validation():
    with pytest.raises(GridSizeError):
        build_grid(-1.0, 1.0, 3)
    with pytest.raises(ValueError):
        build_grid(1.0, 2.0, 8)  # zero not interior
    with pytest.raises(ValueError):
        build_grid(-math.inf, 1.0, 8)


def test_grid_arrays_are_read_only():
    g = build_grid(-1.0, 1.0, 8)
    with pytest.raises(ValueError):
        g.centers[0] = 99.0
    with pytest.raises(ValueError):
        g.interfaces[0] = 99.0


def test_field_v_validation():
    FieldV(np.array([0.0, 1.0, 2.0]), 0.0)  # zeros allowed
    with pytest.raises(ValueError):
        FieldV(np.array([1.0, -1e-30]), 0.0)
    with pytest.raises(ValueError):
        FieldV(np.array([1.0, np.nan]), 0.0)
    with pytest.raises(ValueError):
        FieldV(np.ones((2, 2)), 0.0)
    with pytest.raises(ValueError):
        FieldV(np.array([]), 0.0)
    fv = FieldV(np.array([1.0, 2.0]), 0.0)
    with pytest.raises(ValueError):
        fv.values[0] = 3.0


def test_u_from_v_floors_and_counts():
    fv = FieldV(np.array([1.0, 1e-40, 0.0]), 0.25)
    fu = u_from_v(fv, v_floor=1e-12)
    assert fu.values[0] == 0.0
    assert fu.values[1] == math.log(1e-12)
    assert fu.values[2] == math.log(1e-12)
    assert fu.floor_count == 2
    assert fu.time == 0.25


def test_v_from_u_roundtrip_and_overflow():
    rng = np.random.default_rng(11)
    u = rng.uniform(-20.0, 2.0, size=64)
    fu = FieldU(u, 0.0)
    fv = v_from_u(fu)
    back = u_from_v(fv, v_floor=1e-300)
    assert np.allclose(back.values, u, rtol=0, atol=1e-13)
    with pytest.raises(AmplitudeError):
        v_from_u(FieldU(np.array([701.0]), 0.0))


def test_gaussian_profile_matches_formula():
    spec = InitialDataSpec.gaussian(amplitude=0.3, center=-1.0, sigma=2.0)
    x = np.linspace(-4, 4, 17)
    expected = np.exp(0.3 - ((x + 1.0) / 2.0) ** 2)
    assert np.allclose(spec.profile(x), expected, rtol=1e-15)


def test_two_bump_is_sum_of_gaussians():
    spec = InitialDataSpec.two_bump()
    x = np.linspace(-6, 6, 25)
    left = InitialDataSpec.gaussian(center=-2.0).profile(x)
    right = InitialDataSpec.gaussian(center=2.0).profile(x)
    assert np.allclose(spec.profile(x), left + right, rtol=1e-15)


def test_plateau_profile_shape():
    spec = InitialDataSpec.plateau(height=0.5, width=4.0, steepness=4.0)
    x = np.array([0.0])
    expected = math.exp(0.5) * expit(8.0) * expit(8.0)
    assert np.allclose(spec.profile(x), expected, rtol=1e-15)
    # symmetric and decaying outward
    xs = np.linspace(0.0, 8.0, 30)
    vals = spec.profile(xs)
    assert np.all(np.diff(vals) <= 0)
    assert np.allclose(spec.profile(-xs), vals, rtol=1e-15)


def test_unknown_preset_and_bad_param_rejected():
    with pytest.raises(ValueError):
        InitialDataSpec("bump", {})
    with pytest.raises(ValueError):
        InitialDataSpec("gaussian", {"centre": 0.0})
    with pytest.raises(ValueError):
        InitialDataSpec.gaussian(sigma=0.0)


def test_tail_fraction_against_closed_form():
    # for exp(-x^2), the mass outside [-L, L] is erfc(L) relative to sqrt(pi)
    spec = InitialDataSpec.gaussian()
    from scipy.special import erfc

    for L in (2.0, 3.0, 4.0):
        expected = erfc(L)
        assert spec.tail_fraction(-L, L) == pytest.approx(expected, rel=1e-8)


def test_init_field_samples_midpoints():
    g = build_grid(-8.0, 8.0, 64)
    fv = init_field(g, InitialDataSpec.gaussian())
    assert np.array_equal(fv.values, np.exp(-g.centers**2))
    assert fv.time == 0.0


def test_init_field_rejects_small_domain():
    g = build_grid(-2.0, 2.0, 16)
    with pytest.raises(DomainTooSmallError) as exc:
        init_field(g, InitialDataSpec.gaussian())
    assert "try" in str(exc.value)
    # shifted mass near the right edge is also rejected
    g2 = build_grid(-8.0, 8.0, 64)
    with pytest.raises(DomainTooSmallError):
        init_field(g2, InitialDataSpec.gaussian(center=7.0))
