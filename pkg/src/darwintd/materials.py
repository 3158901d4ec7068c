"""Box-primitive material regions and diagonal FIT material matrices.

Cell properties are mapped to edges (conductivity, permittivity) by
dual-area-weighted averaging over the up-to-four adjacent cells, and to
faces (reluctivity) by dual-length-weighted averaging over the up-to-two
adjacent cells. Averaged values are scaled by the staggered-grid metric
(dual area / edge length, dual length / face area) so all matrices are
diagonal and, apart from the raw conductivity, strictly positive.
"""

from dataclasses import dataclass

import numpy as np
from scipy.constants import epsilon_0, mu_0

from .errors import ConfigurationError

REGULARIZATION_MODES = ("constant", "eps-over-dt")


@dataclass(frozen=True)
class MaterialRegion:
    """Axis-aligned box with homogeneous linear material properties."""

    box: tuple  # (x0, x1, y0, y1, z0, z1) in meters
    kappa: float = 0.0  # electric conductivity [S/m]
    epsilon_r: float = 1.0
    mu_r: float = 1.0

    def __post_init__(self):
        if len(self.box) != 6:
            raise ConfigurationError(f"region box must have 6 bounds, got {self.box}")
        x0, x1, y0, y1, z0, z1 = self.box
        if not (x0 <= x1 and y0 <= y1 and z0 <= z1):
            raise ConfigurationError(f"region box bounds out of order: {self.box}")
        if self.kappa < 0:
            raise ConfigurationError(f"conductivity must be >= 0, got {self.kappa}")
        if self.epsilon_r < 1:
            raise ConfigurationError(f"epsilon_r must be >= 1, got {self.epsilon_r}")
        if not (self.mu_r > 0):
            raise ConfigurationError(f"mu_r must be > 0, got {self.mu_r}")

    def contains(self, points):
        """Boolean mask of points (N, 3) inside the box (inclusive)."""
        x0, x1, y0, y1, z0, z1 = self.box
        p = np.asarray(points)
        return (
            (p[:, 0] >= x0) & (p[:, 0] <= x1)
            & (p[:, 1] >= y0) & (p[:, 1] <= y1)
            & (p[:, 2] >= z0) & (p[:, 2] <= z1)
        )


@dataclass(frozen=True)
class MaterialAssembly:
    """Diagonals of the FIT material matrices on a fixed grid."""

    grid: object
    dt: float
    kappa_hat: float
    regularization: str
    m_nu: np.ndarray         # faces, reluctance metric
    m_kappa: np.ndarray      # edges, physical conductance
    m_eps: np.ndarray        # edges, capacitance metric
    m_kappa_hat: np.ndarray  # edges, regularized conductance (> 0 everywhere)
    cell_kappa: np.ndarray
    cell_eps: np.ndarray
    cell_nu: np.ndarray

    def m_sigma(self, dt):
        """Diagonal of M_kappa + (1/dt) M_eps (physical conductivity)."""
        return self.m_kappa + self.m_eps / dt

    def m_sigma_hat(self, dt):
        """Diagonal of M_kappa_hat + (1/dt) M_eps (regularized)."""
        return self.m_kappa_hat + self.m_eps / dt


def _expand_to_planes(arr, dim):
    """Sum pairs of adjacent entries along `dim`, growing that size by one.

    out[p] = arr[p-1] + arr[p] with out-of-range terms dropped, which is the
    cell-to-node accumulation used by the dual-metric averaging.
    """
    shape = list(arr.shape)
    shape[dim] += 1
    out = np.zeros(shape, dtype=arr.dtype)
    lo = [slice(None)] * arr.ndim
    hi = [slice(None)] * arr.ndim
    lo[dim] = slice(0, arr.shape[dim])
    hi[dim] = slice(1, arr.shape[dim] + 1)
    out[tuple(lo)] += arr
    out[tuple(hi)] += arr
    return out


def _edge_average(cell_3d, axis):
    """Average a (z, y, x) cell array onto edges directed along `axis`."""
    # arr dims are (z, y, x) -> numpy dim of spatial axis a is 2 - a
    transverse = [2 - t for t in (0, 1, 2) if t != axis]
    total = cell_3d
    count = np.ones_like(cell_3d)
    for d in transverse:
        total = _expand_to_planes(total, d)
        count = _expand_to_planes(count, d)
    return (total / count).ravel()


def _face_average(cell_3d, axis):
    """Average a (z, y, x) cell array onto faces with normal `axis`."""
    d = 2 - axis
    total = _expand_to_planes(cell_3d, d)
    count = _expand_to_planes(np.ones_like(cell_3d), d)
    return (total / count).ravel()


def _cell_properties(grid, regions):
    centers = grid.cell_centers()
    kappa = np.full(grid.n_cells, np.nan)
    eps = np.full(grid.n_cells, np.nan)
    nu = np.full(grid.n_cells, np.nan)
    for region in regions:
        mask = region.contains(centers)
        kappa[mask] = region.kappa
        eps[mask] = region.epsilon_r * epsilon_0
        nu[mask] = 1.0 / (region.mu_r * mu_0)
    uncovered = np.flatnonzero(np.isnan(kappa))
    if uncovered.size:
        idx = int(uncovered[0])
        raise ConfigurationError(
            f"{uncovered.size} grid cell(s) not covered by any material region, "
            f"first: cell {idx} at ijk={grid.cell_inv(idx)} "
            "(a background region spanning the whole domain is required)"
        )
    return kappa, eps, nu


def assemble_materials(grid, regions, kappa_hat, dt, regularization="constant"):
    """Assemble the diagonal material matrices for a region list.

    Later regions override earlier ones where boxes overlap. `kappa_hat` is
    the artificial conductivity assigned to otherwise non-conductive cells;
    with regularization="eps-over-dt" the regularized cell conductivity is
    kappa + epsilon/dt instead of max(kappa, kappa_hat).
    """
    if not (kappa_hat > 0):
        raise ConfigurationError(f"kappa_hat must be > 0, got {kappa_hat}")
    if not (dt > 0):
        raise ConfigurationError(f"dt must be > 0, got {dt}")
    if regularization not in REGULARIZATION_MODES:
        raise ConfigurationError(
            f"unknown regularization {regularization!r}, expected one of {REGULARIZATION_MODES}"
        )
    if not regions:
        raise ConfigurationError("at least one material region is required")

    cell_kappa, cell_eps, cell_nu = _cell_properties(grid, regions)
    if regularization == "constant":
        cell_kappa_hat = np.maximum(cell_kappa, kappa_hat)
    else:
        cell_kappa_hat = cell_kappa + cell_eps / dt

    shape3 = (grid.nz - 1, grid.ny - 1, grid.nx - 1)
    k3 = cell_kappa.reshape(shape3)
    kh3 = cell_kappa_hat.reshape(shape3)
    e3 = cell_eps.reshape(shape3)
    n3 = cell_nu.reshape(shape3)

    edge_metric = grid.edge_dual_areas() / grid.edge_lengths()
    face_metric = grid.face_dual_lengths() / grid.face_areas()

    m_kappa = np.concatenate([_edge_average(k3, a) for a in (0, 1, 2)]) * edge_metric
    m_kappa_hat = np.concatenate([_edge_average(kh3, a) for a in (0, 1, 2)]) * edge_metric
    m_eps = np.concatenate([_edge_average(e3, a) for a in (0, 1, 2)]) * edge_metric
    m_nu = np.concatenate([_face_average(n3, a) for a in (0, 1, 2)]) * face_metric

    return MaterialAssembly(
        grid=grid,
        dt=float(dt),
        kappa_hat=float(kappa_hat),
        regularization=regularization,
        m_nu=m_nu,
        m_kappa=m_kappa,
        m_eps=m_eps,
        m_kappa_hat=m_kappa_hat,
        cell_kappa=cell_kappa,
        cell_eps=cell_eps,
        cell_nu=cell_nu,
    )


def classify_edges(assembly):
    """Boolean mask: True where an edge touches physically conductive material."""
    return assembly.m_kappa > 0.0
