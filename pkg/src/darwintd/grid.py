"""Structured staggered hexahedral grid and its integer incidence operators.

Conventions (fixed for reproducible matrix layouts):
  * edges point in the +axis direction, face normals in the +axis direction,
  * entities are linearized axis-major, then k, j, i (i fastest),
  * primal quantities live on nodes/edges/faces, dual metrics are clipped at
    the domain boundary.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import ConfigurationError

AXES = (0, 1, 2)
# cyclic successors: axis a -> (b, c) with (a, b, c) right-handed
_CYCLIC = {0: (1, 2), 1: (2, 0), 2: (0, 1)}


@dataclass(frozen=True)
class StructuredGrid:
    """Tensor-product hexahedral grid with canonical entity numbering."""

    nx: int
    ny: int
    nz: int
    dx: float
    dy: float
    dz: float

    # derived, filled in __post_init__
    n_nodes: int = field(init=False)
    n_edges: int = field(init=False)
    n_faces: int = field(init=False)
    n_cells: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "n_nodes", self.nx * self.ny * self.nz)
        object.__setattr__(self, "n_edges", sum(int(np.prod(self.edge_dims(a))) for a in AXES))
        object.__setattr__(self, "n_faces", sum(int(np.prod(self.face_dims(a))) for a in AXES))
        object.__setattr__(self, "n_cells", (self.nx - 1) * (self.ny - 1) * (self.nz - 1))

    # --- basic metric ----------------------------------------------------
    @property
    def counts(self):
        return (self.nx, self.ny, self.nz)

    @property
    def spacings(self):
        return (self.dx, self.dy, self.dz)

    @property
    def extents(self):
        return ((self.nx - 1) * self.dx, (self.ny - 1) * self.dy, (self.nz - 1) * self.dz)

    # --- entity dimensions ----------------------------------------------
    def edge_dims(self, axis):
        """(di, dj, dk) index ranges of edges directed along `axis`."""
        d = list(self.counts)
        d[axis] -= 1
        return tuple(d)

    def face_dims(self, axis):
        """(di, dj, dk) index ranges of faces with normal `axis`."""
        d = [c - 1 for c in self.counts]
        d[axis] += 1
        return tuple(d)

    @property
    def cell_dims(self):
        return (self.nx - 1, self.ny - 1, self.nz - 1)

    def edge_offset(self, axis):
        return sum(int(np.prod(self.edge_dims(a))) for a in range(axis))

    def face_offset(self, axis):
        return sum(int(np.prod(self.face_dims(a))) for a in range(axis))

    # --- index maps ------------------------------------------------------
    @staticmethod
    def _ravel(i, j, k, dims):
        return (k * dims[1] + j) * dims[0] + i

    @staticmethod
    def _unravel(idx, dims):
        i = idx % dims[0]
        jk = idx // dims[0]
        return (i, jk % dims[1], jk // dims[1])

    def node(self, i, j, k):
        return self._ravel(i, j, k, self.counts)

    def node_inv(self, idx):
        return self._unravel(idx, self.counts)

    def edge(self, axis, i, j, k):
        return self.edge_offset(axis) + self._ravel(i, j, k, self.edge_dims(axis))

    def edge_inv(self, idx):
        for a in AXES:
            n = int(np.prod(self.edge_dims(a)))
            off = self.edge_offset(a)
            if idx < off + n:
                return (a, *self._unravel(idx - off, self.edge_dims(a)))
        raise IndexError(f"edge index {idx} out of range")

    def face(self, axis, i, j, k):
        return self.face_offset(axis) + self._ravel(i, j, k, self.face_dims(axis))

    def face_inv(self, idx):
        for a in AXES:
            n = int(np.prod(self.face_dims(a)))
            off = self.face_offset(a)
            if idx < off + n:
                return (a, *self._unravel(idx - off, self.face_dims(a)))
        raise IndexError(f"face index {idx} out of range")

    def cell(self, i, j, k):
        return self._ravel(i, j, k, self.cell_dims)

    def cell_inv(self, idx):
        return self._unravel(idx, self.cell_dims)

    # --- per-entity index grids (vectorized helpers) ---------------------
    def _index_grids(self, dims):
        # linearization is i fastest, then j, then k
        k, j, i = np.meshgrid(
            np.arange(dims[2]), np.arange(dims[1]), np.arange(dims[0]), indexing="ij"
        )
        return i.ravel(), j.ravel(), k.ravel()

    def edge_ijk(self, axis):
        return self._index_grids(self.edge_dims(axis))

    def face_ijk(self, axis):
        return self._index_grids(self.face_dims(axis))

    def cell_ijk(self):
        return self._index_grids(self.cell_dims)

    # --- metric vectors --------------------------------------------------
    def _dual_len(self, positions, axis):
        """Dual spacing at node plane `positions` along `axis` (halved at boundary)."""
        h = self.spacings[axis]
        n = self.counts[axis]
        full = np.full(positions.shape, h, dtype=float)
        full[(positions == 0) | (positions == n - 1)] = h / 2.0
        return full

    def edge_lengths(self):
        out = np.empty(self.n_edges)
        for a in AXES:
            n = int(np.prod(self.edge_dims(a)))
            out[self.edge_offset(a):self.edge_offset(a) + n] = self.spacings[a]
        return out

    def edge_dual_areas(self):
        """Area of the dual face pierced by each edge (boundary-clipped)."""
        out = np.empty(self.n_edges)
        for a in AXES:
            b, c = _CYCLIC[a]
            i, j, k = self.edge_ijk(a)
            pos = (i, j, k)
            area = self._dual_len(pos[b], b) * self._dual_len(pos[c], c)
            off = self.edge_offset(a)
            out[off:off + area.size] = area
        return out

    def face_areas(self):
        out = np.empty(self.n_faces)
        for a in AXES:
            b, c = _CYCLIC[a]
            n = int(np.prod(self.face_dims(a)))
            out[self.face_offset(a):self.face_offset(a) + n] = (
                self.spacings[b] * self.spacings[c]
            )
        return out

    def face_dual_lengths(self):
        """Length of the dual edge through each face (boundary-clipped)."""
        out = np.empty(self.n_faces)
        for a in AXES:
            i, j, k = self.face_ijk(a)
            pos = (i, j, k)
            ln = self._dual_len(pos[a], a)
            off = self.face_offset(a)
            out[off:off + ln.size] = ln
        return out

    def edge_volumes(self):
        return self.edge_lengths() * self.edge_dual_areas()

    def face_volumes(self):
        return self.face_areas() * self.face_dual_lengths()

    # --- boundary masks --------------------------------------------------
    def boundary_node_mask(self):
        i, j, k = self._index_grids(self.counts)
        return (
            (i == 0) | (i == self.nx - 1)
            | (j == 0) | (j == self.ny - 1)
            | (k == 0) | (k == self.nz - 1)
        )

    def boundary_edge_mask(self):
        """Edges lying in a boundary surface (tangential edges, PEC-constrained)."""
        out = np.zeros(self.n_edges, dtype=bool)
        for a in AXES:
            b, c = _CYCLIC[a]
            i, j, k = self.edge_ijk(a)
            pos = (i, j, k)
            on_bnd = (
                (pos[b] == 0) | (pos[b] == self.counts[b] - 1)
                | (pos[c] == 0) | (pos[c] == self.counts[c] - 1)
            )
            off = self.edge_offset(a)
            out[off:off + on_bnd.size] = on_bnd
        return out

    def interior_node_mask(self):
        return ~self.boundary_node_mask()

    def node_positions(self):
        """(n_nodes, 3) physical node coordinates in linearization order."""
        i, j, k = self._index_grids(self.counts)
        return np.column_stack([i * self.dx, j * self.dy, k * self.dz])

    def cell_centers(self):
        i, j, k = self.cell_ijk()
        return np.column_stack(
            [(i + 0.5) * self.dx, (j + 0.5) * self.dy, (k + 0.5) * self.dz]
        )


def build_grid(nx, ny, nz, dx, dy, dz):
    """Validate parameters and construct a StructuredGrid."""
    for name, n in (("nx", nx), ("ny", ny), ("nz", nz)):
        if int(n) != n or n < 2:
            raise ConfigurationError(f"{name} must be an integer >= 2, got {n}")
    for name, h in (("dx", dx), ("dy", dy), ("dz", dz)):
        if not (h > 0):
            raise ConfigurationError(f"{name} must be positive, got {h}")
    return StructuredGrid(int(nx), int(ny), int(nz), float(dx), float(dy), float(dz))


def build_gradient(grid):
    """Edge-node incidence matrix G (n_edges x n_nodes), entries in {-1, +1}.

    Row of the edge starting at node p carries -1 at p and +1 at the +axis
    successor of p, so G @ phi is the potential difference along each edge.
    """
    rows, cols, vals = [], [], []
    for a in AXES:
        i, j, k = grid.edge_ijk(a)
        e = grid.edge_offset(a) + np.arange(i.size)
        tail = grid.node(i, j, k)
        step = [0, 0, 0]
        step[a] = 1
        head = grid.node(i + step[0], j + step[1], k + step[2])
        rows.append(np.concatenate([e, e]))
        cols.append(np.concatenate([tail, head]))
        vals.append(np.concatenate([-np.ones(e.size, dtype=np.int64),
                                    np.ones(e.size, dtype=np.int64)]))
    g = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(grid.n_edges, grid.n_nodes),
        dtype=np.int64,
    ).tocsr()
    g.sort_indices()
    return g


def build_curl(grid):
    """Face-edge incidence matrix C (n_faces x n_edges), entries in {-1, +1}.

    Each face row is the oriented boundary loop of the face, right-handed
    about the +axis face normal; C @ (G @ phi) vanishes identically.
    """
    rows, cols, vals = [], [], []
    for a in AXES:
        b, c = _CYCLIC[a]
        i, j, k = grid.face_ijk(a)
        f = grid.face_offset(a) + np.arange(i.size)

        def shifted(axis, di):
            s = [i.copy(), j.copy(), k.copy()]
            s[axis] = s[axis] + di
            return s

        # loop: +b edge at base, +c edge shifted along b, -b edge shifted
        # along c, -c edge at base
        for edge_axis, shift_axis, sign in (
            (b, None, +1),
            (c, b, +1),
            (b, c, -1),
            (c, None, -1),
        ):
            si, sj, sk = shifted(shift_axis, 1) if shift_axis is not None else (i, j, k)
            e = grid.edge(edge_axis, si, sj, sk)
            rows.append(f)
            cols.append(e)
            vals.append(np.full(f.size, sign, dtype=np.int64))
    cmat = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(grid.n_faces, grid.n_edges),
        dtype=np.int64,
    ).tocsr()
    cmat.sort_indices()
    return cmat
