"""Electro-quasistatic potential step (step 1 of the two-step scheme).

Advances the nodal potential through the implicit one-step update of the
conduction/displacement continuity equation and exposes the resulting
solenoidal total current that drives the magnetic step. Both the backward
Euler and the trapezoidal update share the same algebraic shape

    [G^T diag(c_lhs) G] phi_{n+1} = G^T j_term + G^T diag(c_rhs) G phi_n

with scheme-dependent edge coefficients; the total current is then
j_term - diag(c_lhs) G phi_{n+1} + diag(c_rhs) G phi_n, whose discrete
divergence vanishes on all non-Dirichlet nodes by construction.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import ConfigurationError
from .linalg import DEFAULT_TOL, SpdSolver, eliminate_dirichlet

SCHEMES = ("euler", "trapezoidal")


@dataclass
class EqsSystem:
    grid: object
    materials: object
    gradient: sp.csr_matrix
    gamma_e: np.ndarray  # excited electrode nodes
    gamma_g: np.ndarray  # grounded electrode nodes
    dt: float
    scheme: str
    c_lhs: np.ndarray  # edge coefficient of the implicit operator
    c_rhs: np.ndarray  # edge coefficient of the history term
    reduced: object
    solver: SpdSolver
    tol: float

    @property
    def dirichlet_nodes(self):
        return self.reduced.fixed

    @property
    def free_nodes(self):
        return self.reduced.free

    def dirichlet_values(self, excited_value):
        """Full-length nodal vector of prescribed potentials."""
        vals = np.zeros(self.reduced.n_full)
        vals[self.gamma_e] = excited_value
        return vals


def scheme_coefficients(materials, dt, scheme, stabilize=True):
    """Edge coefficients (c_lhs, c_rhs) of the one-step potential update."""
    if scheme not in SCHEMES:
        raise ConfigurationError(f"unknown scheme {scheme!r}, expected one of {SCHEMES}")
    m_k = materials.m_kappa_hat if stabilize else materials.m_kappa
    m_eps_dt = materials.m_eps / dt
    if scheme == "euler":
        return m_k + m_eps_dt, m_eps_dt
    return 0.5 * m_k + m_eps_dt, m_eps_dt - 0.5 * m_k


def assemble_eqs(grid, materials, gradient, gamma_e, gamma_g, dt,
                 scheme="euler", stabilize=True, method="cg",
                 tol=DEFAULT_TOL, max_iter=None):
    """Build the eliminated SPD potential system for one time-step length."""
    gamma_e = np.unique(np.asarray(gamma_e, dtype=np.int64))
    gamma_g = np.unique(np.asarray(gamma_g, dtype=np.int64))
    if gamma_e.size + gamma_g.size == 0:
        raise ConfigurationError(
            "no Dirichlet nodes: at least one electrode node is required "
            "(the potential would float)"
        )
    if np.intersect1d(gamma_e, gamma_g).size:
        raise ConfigurationError("excited and grounded electrode node sets overlap")

    c_lhs, c_rhs = scheme_coefficients(materials, dt, scheme, stabilize=stabilize)
    k = (gradient.T @ sp.diags(c_lhs) @ gradient).tocsr()
    reduced = eliminate_dirichlet(k, np.concatenate([gamma_e, gamma_g]))
    solver = SpdSolver(reduced.k_ff, method=method, tol=tol, max_iter=max_iter)
    return EqsSystem(
        grid=grid, materials=materials, gradient=gradient,
        gamma_e=gamma_e, gamma_g=gamma_g, dt=float(dt), scheme=scheme,
        c_lhs=c_lhs, c_rhs=c_rhs, reduced=reduced, solver=solver, tol=tol,
    )


def solve_stationary(system, excited_value):
    """Steady-state potential for frozen boundary data (used at t = 0).

    Solves G^T diag(c_dc) G phi = 0 with the Dirichlet data folded in, where
    c_dc is the conduction coefficient of the assembled scheme (the fixed
    point of the one-step update).
    """
    vals = system.dirichlet_values(excited_value)
    # fixed point of the update: (c_lhs - c_rhs) = theta-weighted conduction
    c_dc = system.c_lhs - system.c_rhs
    k = (system.gradient.T @ sp.diags(c_dc) @ system.gradient).tocsr()
    reduced = eliminate_dirichlet(k, system.reduced.fixed)
    solver = SpdSolver(reduced.k_ff, method=system.solver.method, tol=system.tol)
    rhs = reduced.reduce_rhs(np.zeros(reduced.n_full), vals[reduced.fixed])
    x, report = solver.solve(rhs)
    return reduced.expand(x, vals[reduced.fixed]), report


def eqs_advance(system, phi_n, excited_value_np1, j_term=None):
    """One potential step; returns (phi_{n+1}, SolveReport).

    `j_term` is the scheme-consistent source-current edge vector (the new
    value for Euler, the step average for trapezoidal); it defaults to zero.
    """
    g = system.gradient
    rhs_full = g.T @ (system.c_rhs * (g @ phi_n))
    if j_term is not None:
        rhs_full = rhs_full + g.T @ j_term
    vals = system.dirichlet_values(excited_value_np1)
    fixed_vals = vals[system.reduced.fixed]
    x, report = system.solver.solve(system.reduced.reduce_rhs(rhs_full, fixed_vals))
    return system.reduced.expand(x, fixed_vals), report


@dataclass
class TotalCurrent:
    """Edge vector of total (conduction + displacement + source) currents."""

    j: np.ndarray
    time_index: int
    solenoidality_residual: float  # inf-norm of G^T j over non-Dirichlet nodes
    scale: float                   # inf-norm of diag(c_lhs) G phi_{n+1}


def total_current(system, phi_np1, phi_n, time_index, j_term=None):
    """Total current through dual faces after a completed potential step."""
    g = system.gradient
    drive = system.c_lhs * (g @ phi_np1)
    j = -drive + system.c_rhs * (g @ phi_n)
    if j_term is not None:
        j = j + j_term
    div = g.T @ j
    residual = float(np.max(np.abs(div[system.reduced.free]))) if system.reduced.free.size else 0.0
    return TotalCurrent(
        j=j,
        time_index=time_index,
        solenoidality_residual=residual,
        scale=float(np.max(np.abs(drive))) if drive.size else 0.0,
    )
