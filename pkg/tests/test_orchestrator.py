"""Excitation, scenario plumbing, and the two-step run drivers."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import bar_scenario, capacitor_scenario, loop_scenario
from darwintd import (
    ConfigurationError,
    build_problem,
    excitation,
    run,
    run_interleaved,
    run_two_loop,
)
from darwintd.eqs import eqs_advance, solve_stationary, total_current
from darwintd.mqs import mqs_advance


class TestExcitation:
    def test_zero_at_start(self):
        assert excitation(0.0, 12.0, 1e7) == 0.0

    def test_quarter_period_during_ramp(self):
        # 12 * 1e7 * 2.5e-8 * sin(pi/2) = 3.0 V
        assert excitation(2.5e-8, 12.0, 1e7) == pytest.approx(3.0, abs=1e-12)

    def test_saturated_ramp(self):
        # t > 1/f: 12 * sin(2.5 pi) = 12.0 V
        assert excitation(1.25e-7, 12.0, 1e7) == pytest.approx(12.0, abs=1e-12)

    def test_continuity_at_ramp_end(self):
        f = 1e7
        t0 = 1.0 / f
        left = excitation(t0 * (1 - 1e-9), 12.0, f)
        right = excitation(t0 * (1 + 1e-9), 12.0, f)
        at = excitation(t0, 12.0, f)
        assert abs(left - at) < 1e-5
        assert abs(right - at) < 1e-5

    @given(st.floats(min_value=0.0, max_value=1e-5, allow_nan=False),
           st.floats(min_value=1e3, max_value=1e9))
    @settings(max_examples=50, deadline=None)
    def test_amplitude_bound_and_finite(self, t, f):
        value = excitation(t, 12.0, f)
        assert np.isfinite(value)
        assert abs(value) <= 12.0 + 1e-12

    def test_negative_time_rejected(self):
        with pytest.raises(ValueError):
            excitation(-1e-9, 12.0, 1e7)
        with pytest.raises(ValueError):
            excitation(1e-9, 12.0, 0.0)


class TestScenario:
    def test_validation(self):
        scenario = capacitor_scenario()
        scenario.dt = -1.0
        with pytest.raises(ConfigurationError):
            scenario.validate()
        scenario = capacitor_scenario()
        scenario.mode = "sideways"
        with pytest.raises(ConfigurationError):
            scenario.validate()

    def test_quasistatic_ratio(self):
        scenario = capacitor_scenario()  # 8 mm, 1e7 Hz
        assert scenario.quasistatic_ratio == pytest.approx(8e-3 * 1e7 / 299792458.0)

    def test_quasistatic_warning_recorded(self):
        scenario = capacitor_scenario(n=5, n_end=2, frequency=1e12)
        history = run(scenario)
        assert any("quasistatic" in w for w in history.warnings)

    def test_electrode_selection_required(self):
        scenario = capacitor_scenario()
        scenario.excited_boxes = [(1.0, 2.0, 1.0, 2.0, 1.0, 2.0)]  # off-grid
        with pytest.raises(ConfigurationError):
            build_problem(scenario)


class TestRun:
    def test_n_end_one_returns_initial_state_only(self):
        history = run(capacitor_scenario(n=5, n_end=1))
        assert history.n_states == 1
        assert np.all(history.a_s[0] == 0)
        assert history.diagnostics == []

    def test_zero_excitation_zero_history(self):
        history = run(loop_scenario(n=5, n_end=6, phi_max=0.0))
        for phi, a in zip(history.phis, history.a_s):
            assert np.all(phi == 0) and np.all(a == 0)

    def test_compositional_oracle(self):
        # the orchestrated run must equal standalone EQS and MQS sequences
        scenario = loop_scenario(n=5, n_end=11)
        history = run(scenario)
        problem = build_problem(scenario)
        phi, _ = solve_stationary(problem.eqs, scenario.boundary_value(0.0))
        a = np.zeros(problem.grid.n_edges)
        assert np.array_equal(history.phis[0], phi)
        for n in range(10):
            phi_next, _ = eqs_advance(problem.eqs, phi,
                                      scenario.boundary_value((n + 1) * scenario.dt))
            current = total_current(problem.eqs, phi_next, phi, n + 1)
            a, _ = mqs_advance(problem.mqs, a, current.j)
            phi = phi_next
            assert np.array_equal(history.phis[n + 1], phi)
            assert np.array_equal(history.a_s[n + 1], a)

    def test_modes_bitwise_identical_direct(self):
        for factory in (capacitor_scenario, bar_scenario, loop_scenario):
            scenario = factory(n=5, n_end=8, method="direct")
            h1 = run_two_loop(scenario)
            h2 = run_interleaved(scenario)
            for phi1, phi2 in zip(h1.phis, h2.phis):
                assert np.array_equal(phi1, phi2)
            for a1, a2 in zip(h1.a_s, h2.a_s):
                assert np.array_equal(a1, a2)

    def test_modes_close_iterative(self):
        scenario = bar_scenario(n=5, n_end=8, method="cg", solver_tol=1e-10)
        h1 = run_two_loop(scenario)
        h2 = run_interleaved(scenario)
        for a1, a2 in zip(h1.a_s[1:], h2.a_s[1:]):
            assert np.linalg.norm(a1 - a2) <= 10 * 1e-10 * max(np.linalg.norm(a1), 1e-300)

    def test_mode_dispatch(self):
        scenario = capacitor_scenario(n=5, n_end=3, mode="interleaved")
        h = run(scenario)
        assert h.n_states == 3

    def test_constant_boundary_is_stationary(self):
        for scheme in ("euler", "trapezoidal"):
            scenario = bar_scenario(n=5, n_end=6, excitation_kind="step",
                                    scheme=scheme)
            history = run(scenario)
            # the potential jumps at n=1 and then stays at the steady state
            phi1 = history.phis[1]
            for phi in history.phis[2:]:
                assert np.linalg.norm(phi - phi1) <= 1e-11 * np.linalg.norm(phi1)

    def test_diagnostics_rows(self):
        scenario = loop_scenario(n=5, n_end=6)
        history = run(scenario)
        assert len(history.diagnostics) == 5
        row = history.diagnostics[0]
        for key in ("n", "t", "eqs_iterations", "eqs_residual", "mqs_iterations",
                    "mqs_residual", "solenoidality_residual", "divergence_monitor",
                    "phi_norm", "a_norm"):
            assert key in row


class TestSampling:
    def test_state_index(self):
        scenario = capacitor_scenario(n=5, n_end=5)
        history = run(scenario)
        assert history.state_index(2 * scenario.dt) == 2
        with pytest.raises(ValueError):
            history.state_index(2.5 * scenario.dt)
        with pytest.raises(ValueError):
            history.state_index(10 * scenario.dt)

    def test_euler_needs_backward_neighbor(self):
        history = run(capacitor_scenario(n=5, n_end=5, scheme="euler"))
        with pytest.raises(ValueError):
            history.snapshot_at(0.0)
        snap = history.snapshot_at(4 * history.scenario.dt)
        assert snap.t == pytest.approx(4 * history.scenario.dt)

    def test_trapezoidal_needs_both_neighbors(self):
        history = run(capacitor_scenario(n=5, n_end=5, scheme="trapezoidal"))
        with pytest.raises(ValueError):
            history.snapshot_at(4 * history.scenario.dt)
        snap = history.snapshot_at(3 * history.scenario.dt)
        assert snap.t == pytest.approx(3 * history.scenario.dt)
