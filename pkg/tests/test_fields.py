"""Field recovery and weighted comparison metrics."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import capacitor_scenario
from darwintd import (
    UndefinedMetricError,
    build_curl,
    build_grid,
    build_gradient,
    edge_field_difference,
    face_field_difference,
    recover_fields,
    relative_difference,
    run,
)
from darwintd.fields import b_to_flux_density, recover_fields_central


def small_grid():
    g = build_grid(3, 3, 3, 1e-3, 1e-3, 1e-3)
    return g, build_gradient(g), build_curl(g)


class TestRecovery:
    def test_static_potential_no_rem_part(self):
        g, grad, curl = small_grid()
        phi = np.random.default_rng(0).standard_normal(g.n_nodes)
        a = np.zeros(g.n_edges)
        snap = recover_fields(g, grad, curl, a, a, phi, 2.5e-9)
        assert np.all(snap.e_rem == 0)
        assert np.array_equal(snap.e_total, snap.e_irr)
        assert np.allclose(snap.e_irr, -(grad @ phi) / g.edge_lengths(), rtol=1e-15)

    def test_linear_vector_potential_no_irr_part(self):
        g, grad, curl = small_grid()
        rng = np.random.default_rng(1)
        rate = rng.standard_normal(g.n_edges)
        dt = 2.5e-9
        snap1 = recover_fields(g, grad, curl, 1 * dt * rate, 0 * rate,
                               np.zeros(g.n_nodes), dt)
        snap2 = recover_fields(g, grad, curl, 2 * dt * rate, 1 * dt * rate,
                               np.zeros(g.n_nodes), dt)
        assert np.all(snap1.e_irr == 0)
        assert np.allclose(snap1.e_rem, snap2.e_rem, rtol=1e-12)
        assert np.allclose(snap1.e_rem, -rate / g.edge_lengths(), rtol=1e-12)

    def test_central_difference_is_second_order(self):
        g, grad, curl = small_grid()
        rng = np.random.default_rng(2)
        shape = rng.standard_normal(g.n_edges)
        dt = 1e-3
        t0 = 1.0  # away from inflection points of the test signal
        a = lambda t: shape * math.sin(t)
        snap = recover_fields_central(g, grad, curl, a(t0 + dt), a(t0 - dt),
                                      np.zeros(g.n_nodes), a(t0), dt)
        exact = -shape * math.cos(t0) / g.edge_lengths()
        err_central = np.max(np.abs(snap.e_rem - exact))
        snap_bwd = recover_fields(g, grad, curl, a(t0), a(t0 - dt),
                                  np.zeros(g.n_nodes), dt)
        err_bwd = np.max(np.abs(snap_bwd.e_rem - exact))
        assert err_central < 1e-2 * err_bwd

    def test_capacitor_plateau_field_magnitude(self):
        # 12 V across a 4-cell 1 mm gap -> uniform 3000 V/m interior field
        scenario = capacitor_scenario(n=5, n_end=6, excitation_kind="step")
        history = run(scenario)
        snap = history.snapshot_at(5 * scenario.dt)
        g = history.problem.grid
        z_edges = slice(g.edge_offset(2), g.n_edges)
        assert np.allclose(np.abs(snap.e_total[z_edges]), 3000.0, rtol=1e-9)

    def test_b_is_exact_curl(self):
        g, grad, curl = small_grid()
        a = np.random.default_rng(3).standard_normal(g.n_edges)
        snap = recover_fields(g, grad, curl, a, np.zeros(g.n_edges),
                              np.zeros(g.n_nodes), 2.5e-9)
        assert np.array_equal(snap.b, curl @ a)

    def test_flux_density_conversion(self):
        g, _, _ = small_grid()
        b = np.arange(g.n_faces, dtype=float)
        assert np.allclose(b_to_flux_density(g, b), b / g.face_areas(), rtol=1e-15)


class TestRelativeDifference:
    def test_real_reference_matching_test_is_zero(self):
        f = np.array([1.0, -2.0, 3.0])
        w = np.array([1.0, 2.0, 0.5])
        assert relative_difference(f, f, w) == 0.0

    def test_zero_test_bounded_by_one(self):
        rng = np.random.default_rng(4)
        f = rng.standard_normal(20) + 1j * rng.standard_normal(20)
        w = rng.uniform(0.1, 2.0, 20)
        assert relative_difference(f, np.zeros(20), w) <= 1.0

    def test_manual_five_entry_oracle(self):
        f_ref = [1.0 + 1.0j, 2.0, -1.0, 0.5j, 3.0]
        f_test = [1.0, 1.5, -1.5, 0.0, 3.0]
        w = [2.0, 1.0, 4.0, 1.0, 0.5]
        num = 0.0
        den = 0.0
        for r, t, wt in zip(f_ref, f_test, w):
            num += wt * (r.real - t) ** 2
            den += wt * abs(r) ** 2
        expected = math.sqrt(num) / math.sqrt(den)
        got = relative_difference(np.array(f_ref), np.array(f_test), np.array(w))
        assert got == pytest.approx(expected, rel=1e-15)

    def test_zero_reference_raises(self):
        with pytest.raises(UndefinedMetricError):
            relative_difference(np.zeros(3), np.ones(3), np.ones(3))

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            relative_difference(np.ones(3), np.ones(4), np.ones(3))

    @given(st.integers(min_value=1, max_value=8), st.integers(0, 2**31 - 1))
    @settings(max_examples=25, deadline=None)
    def test_scale_invariance(self, n, seed):
        rng = np.random.default_rng(seed)
        f_ref = rng.standard_normal(n) + 1.0
        f_test = rng.standard_normal(n)
        w = rng.uniform(0.5, 2.0, n)
        base = relative_difference(f_ref, f_test, w)
        scaled = relative_difference(7.0 * f_ref, 7.0 * f_test, w)
        assert scaled == pytest.approx(base, rel=1e-12)

    def test_entity_weighting(self):
        # edge metric weights are length * dual area, face weights area * dual
        # length applied to flux densities
        g, _, _ = small_grid()
        rng = np.random.default_rng(5)
        e_ref = rng.standard_normal(g.n_edges) + 2.0
        e_test = rng.standard_normal(g.n_edges)
        expected = relative_difference(e_ref, e_test, g.edge_volumes())
        assert edge_field_difference(g, e_ref, e_test) == pytest.approx(expected, rel=1e-15)
        b_ref = rng.standard_normal(g.n_faces) + 2.0
        b_test = rng.standard_normal(g.n_faces)
        areas = g.face_areas()
        expected = relative_difference(b_ref / areas, b_test / areas, g.face_volumes())
        assert face_field_difference(g, b_ref, b_test) == pytest.approx(expected, rel=1e-15)
