"""Scenario definition and the two-step time-domain driver.

A run produces the full potential history: loop 1 advances the nodal
potential and records the solenoidal total current of every step, loop 2
advances the vector potential from those currents. The interleaved mode
executes both solves per time step instead; because the two systems are
decoupled the histories are identical (bitwise with a direct solver).
"""

from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy.constants import speed_of_light

from .errors import ConfigurationError
from .eqs import assemble_eqs, eqs_advance, solve_stationary, total_current
from .fields import recover_fields, recover_fields_central
from .grid import build_grid, build_curl, build_gradient
from .materials import assemble_materials
from .mqs import assemble_mqs, divergence_monitor, mqs_advance

MODES = ("two-loop", "interleaved")
EXCITATION_KINDS = ("ramped-sine", "step")
QUASISTATIC_LIMIT = 0.01


def excitation(t, phi_max, f):
    """Ramped sinusoidal electrode voltage, smooth start over one period.

    phi(t) = phi_max * f * min(t, 1/f) * sin(2 pi f t); for t >= 1/f this is
    the plain sinusoid phi_max * sin(2 pi f t).
    """
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    if not (f > 0):
        raise ValueError(f"f must be > 0, got {f}")
    return phi_max * f * min(t, 1.0 / f) * np.sin(2.0 * np.pi * f * t)


@dataclass
class Scenario:
    """Complete declarative description of one time-domain run."""

    nx: int
    ny: int
    nz: int
    dx: float
    dy: float
    dz: float
    regions: list
    excited_boxes: list   # node boxes (x0,x1,y0,y1,z0,z1) forming Gamma_E
    grounded_boxes: list  # node boxes forming Gamma_G
    dt: float
    n_end: int
    phi_max: float = 12.0
    frequency: float = 1e7
    excitation_kind: str = "ramped-sine"
    scheme: str = "euler"
    mode: str = "two-loop"
    kappa_hat: float = 1e-2
    regularization: str = "constant"
    solver_method: str = "cg"
    solver_tol: float = 1e-10
    solver_max_iter: int = 0  # 0 -> solver default
    stabilize_eqs: bool = True
    label: str = "scenario"

    def validate(self):
        if not (self.dt > 0):
            raise ConfigurationError(f"dt must be > 0, got {self.dt}")
        if self.n_end < 1:
            raise ConfigurationError(f"n_end must be >= 1, got {self.n_end}")
        if self.mode not in MODES:
            raise ConfigurationError(f"unknown mode {self.mode!r}, expected one of {MODES}")
        if self.excitation_kind not in EXCITATION_KINDS:
            raise ConfigurationError(
                f"unknown excitation {self.excitation_kind!r}, expected one of {EXCITATION_KINDS}"
            )
        if self.excitation_kind == "ramped-sine" and not (self.frequency > 0):
            raise ConfigurationError(f"frequency must be > 0, got {self.frequency}")
        if not self.excited_boxes or not self.grounded_boxes:
            raise ConfigurationError("both excited and grounded electrode boxes are required")

    @property
    def quasistatic_ratio(self):
        """Longest domain side over the excitation wavelength in vacuum."""
        extent = max(
            (self.nx - 1) * self.dx, (self.ny - 1) * self.dy, (self.nz - 1) * self.dz
        )
        return extent * self.frequency / speed_of_light

    def boundary_value(self, t):
        if self.excitation_kind == "step":
            return self.phi_max if t > 0 else 0.0
        return excitation(t, self.phi_max, self.frequency)


def select_nodes(grid, boxes):
    """Indices of nodes lying inside any of the coordinate boxes."""
    pos = grid.node_positions()
    tol = 1e-9 * min(grid.spacings)
    mask = np.zeros(grid.n_nodes, dtype=bool)
    for box in boxes:
        x0, x1, y0, y1, z0, z1 = box
        mask |= (
            (pos[:, 0] >= x0 - tol) & (pos[:, 0] <= x1 + tol)
            & (pos[:, 1] >= y0 - tol) & (pos[:, 1] <= y1 + tol)
            & (pos[:, 2] >= z0 - tol) & (pos[:, 2] <= z1 + tol)
        )
    return np.flatnonzero(mask)


@dataclass
class Problem:
    """Assembled operators and systems for one scenario."""

    scenario: Scenario
    grid: object
    gradient: object
    curl: object
    materials: object
    gamma_e: np.ndarray
    gamma_g: np.ndarray
    eqs: object
    mqs: object
    interior_nodes: np.ndarray


def build_problem(scenario):
    scenario.validate()
    grid = build_grid(scenario.nx, scenario.ny, scenario.nz,
                      scenario.dx, scenario.dy, scenario.dz)
    gradient = build_gradient(grid)
    curl = build_curl(grid)
    materials = assemble_materials(
        grid, scenario.regions, scenario.kappa_hat, scenario.dt,
        regularization=scenario.regularization,
    )
    gamma_e = select_nodes(grid, scenario.excited_boxes)
    gamma_g = select_nodes(grid, scenario.grounded_boxes)
    if gamma_e.size == 0:
        raise ConfigurationError("excited electrode boxes select no grid nodes")
    if gamma_g.size == 0:
        raise ConfigurationError("grounded electrode boxes select no grid nodes")
    max_iter = scenario.solver_max_iter or None
    eqs = assemble_eqs(
        grid, materials, gradient, gamma_e, gamma_g, scenario.dt,
        scheme=scenario.scheme, stabilize=scenario.stabilize_eqs,
        method=scenario.solver_method, tol=scenario.solver_tol, max_iter=max_iter,
    )
    mqs = assemble_mqs(
        grid, materials, curl, scenario.dt, scheme=scenario.scheme,
        method=scenario.solver_method, tol=scenario.solver_tol, max_iter=max_iter,
    )
    return Problem(
        scenario=scenario, grid=grid, gradient=gradient, curl=curl,
        materials=materials, gamma_e=gamma_e, gamma_g=gamma_g,
        eqs=eqs, mqs=mqs, interior_nodes=grid.interior_node_mask(),
    )


@dataclass
class RunHistory:
    """Full state history plus per-step diagnostics of one run."""

    scenario: Scenario
    problem: Problem
    times: np.ndarray
    phis: list
    a_s: list
    j_totals: list           # j_totals[n] drives the step t^n -> t^{n+1}
    diagnostics: list = dc_field(default_factory=list)
    warnings: list = dc_field(default_factory=list)

    @property
    def n_states(self):
        return len(self.phis)

    def state_index(self, t):
        n = int(round(t / self.scenario.dt))
        if n < 0 or n >= self.n_states or abs(n * self.scenario.dt - t) > 1e-9 * self.scenario.dt:
            raise ValueError(f"time {t} is not a stored state time of this run")
        return n

    def snapshot_at(self, t):
        """Field snapshot at a stored state time.

        Backward-Euler runs use the backward difference of a; trapezoidal
        runs use the central difference, which needs the state one step past
        t (size the run with one spare step when sampling its final times).
        """
        n = self.state_index(t)
        p = self.problem
        if self.scenario.scheme == "trapezoidal":
            if n == 0 or n + 1 >= self.n_states:
                raise ValueError(
                    f"central-difference sampling at state {n} needs neighbors on both sides"
                )
            return recover_fields_central(
                p.grid, p.gradient, p.curl,
                self.a_s[n + 1], self.a_s[n - 1], self.phis[n], self.a_s[n],
                self.scenario.dt, t=t,
            )
        if n == 0:
            raise ValueError("no backward difference available at the initial state")
        return recover_fields(
            p.grid, p.gradient, p.curl,
            self.a_s[n], self.a_s[n - 1], self.phis[n], self.scenario.dt, t=t,
        )


def _initial_state(problem):
    scenario = problem.scenario
    phi0, report = solve_stationary(problem.eqs, scenario.boundary_value(0.0))
    a0 = np.zeros(problem.grid.n_edges)
    return phi0, a0, report


def _eqs_step(problem, n, phi_n):
    """Advance phi from state n to n+1; returns (phi, total current, report)."""
    scenario = problem.scenario
    t_np1 = (n + 1) * scenario.dt
    phi_np1, report = eqs_advance(problem.eqs, phi_n, scenario.boundary_value(t_np1))
    current = total_current(problem.eqs, phi_np1, phi_n, n + 1)
    return phi_np1, current, report


def _mqs_step(problem, a_n, current):
    a_np1, report = mqs_advance(problem.mqs, a_n, current.j)
    monitor = divergence_monitor(
        problem.gradient, problem.materials, a_np1, problem.interior_nodes
    )
    return a_np1, monitor, report


def _base_history(scenario, problem):
    history = RunHistory(
        scenario=scenario, problem=problem,
        times=np.arange(scenario.n_end) * scenario.dt,
        phis=[], a_s=[], j_totals=[],
    )
    ratio = scenario.quasistatic_ratio
    if ratio >= QUASISTATIC_LIMIT:
        history.warnings.append(
            f"quasistatic validity doubtful: domain/wavelength ratio "
            f"{ratio:.3e} >= {QUASISTATIC_LIMIT}"
        )
    return history


def _diagnostics_row(n, scenario, phi, a, current, monitor, eqs_report, mqs_report):
    return {
        "n": n,
        "t": n * scenario.dt,
        "eqs_iterations": eqs_report.iterations,
        "eqs_residual": eqs_report.relative_residual,
        "mqs_iterations": mqs_report.iterations,
        "mqs_residual": mqs_report.relative_residual,
        "solenoidality_residual": current.solenoidality_residual,
        "divergence_monitor": monitor,
        "phi_norm": float(np.linalg.norm(phi)),
        "a_norm": float(np.linalg.norm(a)),
    }


def run_two_loop(scenario, problem=None):
    """Algorithm with two separate loops: all EQS solves, then all MQS solves."""
    problem = problem or build_problem(scenario)
    history = _base_history(scenario, problem)
    phi0, a0, _ = _initial_state(problem)
    history.phis.append(phi0)
    eqs_reports = []
    for n in range(scenario.n_end - 1):
        phi_np1, current, report = _eqs_step(problem, n, history.phis[n])
        history.phis.append(phi_np1)
        history.j_totals.append(current)
        eqs_reports.append(report)
    history.a_s.append(a0)
    for n in range(scenario.n_end - 1):
        a_np1, monitor, mqs_report = _mqs_step(problem, history.a_s[n], history.j_totals[n])
        history.a_s.append(a_np1)
        history.diagnostics.append(_diagnostics_row(
            n + 1, scenario, history.phis[n + 1], a_np1, history.j_totals[n],
            monitor, eqs_reports[n], mqs_report,
        ))
    return history


def run_interleaved(scenario, problem=None):
    """Per-step variant: one EQS and one MQS solve per time step."""
    problem = problem or build_problem(scenario)
    history = _base_history(scenario, problem)
    phi0, a0, _ = _initial_state(problem)
    history.phis.append(phi0)
    history.a_s.append(a0)
    for n in range(scenario.n_end - 1):
        phi_np1, current, eqs_report = _eqs_step(problem, n, history.phis[n])
        a_np1, monitor, mqs_report = _mqs_step(problem, history.a_s[n], current)
        history.phis.append(phi_np1)
        history.a_s.append(a_np1)
        history.j_totals.append(current)
        history.diagnostics.append(_diagnostics_row(
            n + 1, scenario, phi_np1, a_np1, current, monitor, eqs_report, mqs_report,
        ))
    return history


def run(scenario, problem=None):
    """Dispatch on scenario.mode."""
    if scenario.mode == "interleaved":
        return run_interleaved(scenario, problem)
    return run_two_loop(scenario, problem)
