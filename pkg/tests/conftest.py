"""Shared scenario factories and expensive session-scoped runs."""

import numpy as np
import pytest

from darwintd import MaterialRegion, Scenario, run

COPPER = 5.96e7  # S/m
RESISTIVE = 1.0e4  # S/m, resistance-dominated regime for Maxwell comparison


def loop_scenario(kappa=COPPER, n=11, spacing=1e-3, dt=2.5e-9, n_end=51,
                  scheme="euler", method="direct", frequency=1e7, **kwargs):
    """Single-turn rectangular conductor loop between full-face electrodes.

    The conductor is a Z-shaped square-section loop: one leg reaching the
    excited plate, one leg reaching the grounded plate, joined by a bar.
    """
    extent = (n - 1) * spacing
    h = spacing
    mid = (n - 1) // 2
    y0, y1 = mid * h, (mid + 1) * h
    xa = (mid - 1) * h
    regions = [
        MaterialRegion(box=(0.0, extent, 0.0, extent, 0.0, extent), kappa=0.0),
        MaterialRegion(box=(xa, xa + h, y0, y1, xa, extent), kappa=kappa),
        MaterialRegion(box=(xa + 2 * h, xa + 3 * h, y0, y1, 0.0, xa + h), kappa=kappa),
        MaterialRegion(box=(xa, xa + 3 * h, y0, y1, xa, xa + h), kappa=kappa),
    ]
    return Scenario(
        nx=n, ny=n, nz=n, dx=spacing, dy=spacing, dz=spacing,
        regions=regions,
        excited_boxes=[(0.0, extent, 0.0, extent, extent, extent)],
        grounded_boxes=[(0.0, extent, 0.0, extent, 0.0, 0.0)],
        dt=dt, n_end=n_end, frequency=frequency, scheme=scheme,
        solver_method=method, label="loop", **kwargs,
    )


def bar_scenario(kappa=RESISTIVE, n=9, spacing=1e-3, dt=2.5e-9, n_end=51,
                 scheme="euler", method="direct", frequency=1e7, **kwargs):
    """Straight square-section conductor bar joining the two electrode plates."""
    extent = (n - 1) * spacing
    h = spacing
    regions = [
        MaterialRegion(box=(0.0, extent, 0.0, extent, 0.0, extent), kappa=0.0),
        MaterialRegion(box=(3 * h, 4 * h, 4 * h, 5 * h, 0.0, extent), kappa=kappa),
    ]
    return Scenario(
        nx=n, ny=n, nz=n, dx=spacing, dy=spacing, dz=spacing,
        regions=regions,
        excited_boxes=[(0.0, extent, 0.0, extent, extent, extent)],
        grounded_boxes=[(0.0, extent, 0.0, extent, 0.0, 0.0)],
        dt=dt, n_end=n_end, frequency=frequency, scheme=scheme,
        solver_method=method, label="bar", **kwargs,
    )


def capacitor_scenario(n=9, spacing=1e-3, dt=2.5e-9, n_end=11,
                       scheme="euler", method="direct", **kwargs):
    """Vacuum-filled parallel-plate box, full top/bottom faces as plates."""
    extent = (n - 1) * spacing
    regions = [MaterialRegion(box=(0.0, extent, 0.0, extent, 0.0, extent), kappa=0.0)]
    return Scenario(
        nx=n, ny=n, nz=n, dx=spacing, dy=spacing, dz=spacing,
        regions=regions,
        excited_boxes=[(0.0, extent, 0.0, extent, extent, extent)],
        grounded_boxes=[(0.0, extent, 0.0, extent, 0.0, 0.0)],
        dt=dt, n_end=n_end, scheme=scheme, solver_method=method,
        label="capacitor", **kwargs,
    )


def uniform_conductor_scenario(kappa=1e2, n=9, spacing=1e-3, dt=2.5e-9,
                               n_end=5, method="direct", **kwargs):
    """Whole domain uniformly conductive between the two plates."""
    extent = (n - 1) * spacing
    regions = [MaterialRegion(box=(0.0, extent, 0.0, extent, 0.0, extent), kappa=kappa)]
    return Scenario(
        nx=n, ny=n, nz=n, dx=spacing, dy=spacing, dz=spacing,
        regions=regions,
        excited_boxes=[(0.0, extent, 0.0, extent, extent, extent)],
        grounded_boxes=[(0.0, extent, 0.0, extent, 0.0, 0.0)],
        dt=dt, n_end=n_end, solver_method=method, label="uniform-conductor",
        **kwargs,
    )


def max_divergence_ratio(history):
    """max_n ||G^T M_kappa a^n||_inf / max_n ||M_kappa a^n||_inf (interior)."""
    mats = history.problem.materials
    div = max(row["divergence_monitor"] for row in history.diagnostics)
    scale = max(float(np.max(np.abs(mats.m_kappa * a))) for a in history.a_s)
    return div / scale


@pytest.fixture(scope="session")
def copper_loop_direct():
    """480-step copper loop history with prefactorized direct solves."""
    return run(loop_scenario(n_end=481, method="direct"))


@pytest.fixture(scope="session")
def copper_loop_cg():
    """480-step copper loop history with CG at tol 1e-10."""
    return run(loop_scenario(n_end=481, method="cg", solver_tol=1e-10))
