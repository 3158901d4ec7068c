"""Full-Maxwell A-phi frequency-domain reference solver.

Uses the same grid, incidence operators, materials and regularization as
the time-domain solver, so differences between the two measure the Darwin
approximation rather than discretization or gauge mismatch. The assembled
block system is complex symmetric: with Y = M_kappa_hat + j w M_eps,

    [ C^T M_nu C + j w Y        Y G           ] [ a   ]   [ j_s          ]
    [ (Y G)^T                   (1/jw) G^T Y G ] [ phi ] = [ (1/jw) G^T j_s ]

where the second row is the divergence (continuity) equation scaled by
1/(jw). Electrode nodes carry the steady sinusoid amplitude phi_max; PEC
boundary edges are eliminated to zero.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import ConfigurationError
from .fields import FieldSnapshot
from .linalg import solve_complex_symmetric


@dataclass
class PhasorSolution:
    """Complex field phasors of one frequency-domain solve."""

    omega: float
    a_hat: np.ndarray    # complex edge vector, full length
    phi_hat: np.ndarray  # complex nodal vector, full length
    e_hat: np.ndarray    # complex edge field, V/m
    e_irr_hat: np.ndarray
    e_rem_hat: np.ndarray
    b_hat: np.ndarray    # complex face fluxes, Wb
    residual: float
    report: object


def assemble_reference(problem, omega):
    """Symmetric complex block matrix and Dirichlet bookkeeping.

    Returns (K, fixed_idx, fixed_unit_values) in the stacked
    [edges; nodes] numbering; fixed values are for phi_max = 1.
    """
    if not (omega > 0):
        raise ConfigurationError(f"omega must be > 0, got {omega}")
    grid = problem.grid
    mats = problem.materials
    g = problem.gradient
    c = problem.curl
    jw = 1j * omega
    y = sp.diags(mats.m_kappa_hat + jw * mats.m_eps)
    k_cc = (c.T @ sp.diags(mats.m_nu) @ c).astype(complex)
    a11 = k_cc + jw * y - sp.diags(omega**2 * mats.m_eps)
    a12 = (y @ g).tocsr()
    a22 = (g.T @ y @ g) / jw
    k = sp.bmat([[a11, a12], [a12.T, a22]], format="csr")

    n_edges = grid.n_edges
    fixed_edges = np.flatnonzero(grid.boundary_edge_mask())
    fixed_nodes = np.concatenate([problem.gamma_e, problem.gamma_g]) + n_edges
    fixed_idx = np.concatenate([fixed_edges, np.sort(fixed_nodes)])
    unit_values = np.zeros(fixed_idx.size, dtype=complex)
    excited = np.isin(fixed_idx, problem.gamma_e + n_edges)
    unit_values[excited] = 1.0
    return k, fixed_idx, unit_values


def solve_reference(problem, omega, tol=1e-10, method="auto"):
    """Solve the frequency-domain reference at angular frequency `omega`."""
    scenario = problem.scenario
    grid = problem.grid
    k, fixed_idx, unit_values = assemble_reference(problem, omega)
    # time-domain drive is phi_max sin(w t) = Re(-j phi_max exp(j w t))
    fixed_values = (-1j) * scenario.phi_max * unit_values

    n = k.shape[0]
    mask = np.zeros(n, dtype=bool)
    mask[fixed_idx] = True
    free = np.flatnonzero(~mask)
    fixed = np.flatnonzero(mask)
    full_fixed = np.zeros(n, dtype=complex)
    full_fixed[fixed_idx] = fixed_values

    k_f = k[free]
    rhs = -(k_f[:, fixed] @ full_fixed[fixed])
    if np.all(rhs == 0):
        x_free = np.zeros(free.size, dtype=complex)
        residual = 0.0
        report = None
    else:
        x_free, report = solve_complex_symmetric(k_f[:, free], rhs, tol=tol, method=method)
        residual = report.relative_residual

    x = full_fixed.copy()
    x[free] = x_free
    a_hat = x[:grid.n_edges]
    phi_hat = x[grid.n_edges:]

    lengths = grid.edge_lengths()
    e_irr_hat = -(problem.gradient @ phi_hat) / lengths
    e_rem_hat = -(1j * omega) * a_hat / lengths
    return PhasorSolution(
        omega=float(omega),
        a_hat=a_hat,
        phi_hat=phi_hat,
        e_hat=e_irr_hat + e_rem_hat,
        e_irr_hat=e_irr_hat,
        e_rem_hat=e_rem_hat,
        b_hat=problem.curl @ a_hat,
        residual=residual,
        report=report,
    )


def time_sample(solution, t):
    """Real field snapshot Re(F_hat exp(j w t)) at time t >= 0."""
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    rot = np.exp(1j * solution.omega * t)
    return FieldSnapshot(
        t=float(t),
        e_total=np.real(solution.e_hat * rot),
        e_irr=np.real(solution.e_irr_hat * rot),
        e_rem=np.real(solution.e_rem_hat * rot),
        b=np.real(solution.b_hat * rot),
    )
