"""Shared fixtures: the stock run configurations and a session-level cache so
expensive ladders are computed once for the whole suite."""

from __future__ import annotations

import math

import pytest

from exprabelo import InitialDataSpec, RunConfig, SchemeConfig, build_grid
from exprabelo.solver import run_simulation
from exprabelo.verifiers import run_ladder

STOCK_DOMAIN = (-8.0, 8.0)


def stock_config(
    n_cells: int = 512,
    epsilon: float = 0.0,
    final_time: float = 1.0,
    snapshot_times: tuple = (),
    alphas: tuple = (0.0, 1.0, 2.0),
    init: InitialDataSpec | None = None,
    source_enabled: bool = True,
) -> RunConfig:
    return RunConfig(
        grid=build_grid(*STOCK_DOMAIN, n_cells),
        init=init if init is not None else InitialDataSpec.gaussian(),
        scheme=SchemeConfig(epsilon=epsilon, source_enabled=source_enabled),
        final_time=final_time,
        snapshot_times=snapshot_times,
        diagnostic_alphas=alphas,
    )


def perturbed_gaussian() -> InitialDataSpec:
    """The stock gaussian plus a bump of relative size 0.01 centered at 1."""
    return InitialDataSpec.two_bump(
        amplitude1=0.0,
        center1=0.0,
        sigma1=1.0,
        amplitude2=math.log(0.01),
        center2=1.0,
        sigma2=1.0,
    )


@pytest.fixture(scope="session")
def stock_ladder_runs():
    """Stock gaussian runs on {512, 1024, 2048} for epsilon in {0, 1e-2},
    keyed by (n_cells, epsilon)."""
    runs = {}
    for eps in (0.0, 1e-2):
        base = stock_config(512, epsilon=eps)
        for result in run_ladder(base, (512, 1024, 2048)):
            runs[(result.grid.n_cells, eps)] = result
    return runs


@pytest.fixture(scope="session")
def stock_run_256():
    """Small, quick stock run with snapshots, reused by solver and IO tests."""
    cfg = stock_config(256, final_time=0.5, snapshot_times=(0.0, 0.25, 0.5))
    return run_simulation(cfg)
