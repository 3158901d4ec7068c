"""On-disk artifacts of a run: CSV diagnostics, summaries, VTK, raw dumps.

All writers are atomic: content goes to a temporary file in the target
directory which is renamed over the destination, so readers never observe
a half-written file. Binary field dumps are little-endian float64 (or
complex128) with a fixed-size header carrying the grid fingerprint.
"""

import contextlib
import json
import os
import struct
import tempfile

import numpy as np
import yaml

from .errors import ConfigurationError
from .grid import AXES, _CYCLIC

DUMP_MAGIC = b"DWTDFLD1"
_ENTITY_CODES = {"node": 0, "edge": 1, "face": 2}
_ENTITY_NAMES = {v: k for k, v in _ENTITY_CODES.items()}
_DTYPE_CODES = {np.dtype("<f8"): 0, np.dtype("<c16"): 1}
_DTYPE_NAMES = {0: np.dtype("<f8"), 1: np.dtype("<c16")}
_HEADER = struct.Struct("<8s64sBBQ")

FLOAT_FORMAT = "%.16e"  # 17 significant digits


@contextlib.contextmanager
def atomic_open(path, mode="w"):
    """Open a temporary file that replaces `path` on successful close."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp.", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, mode) as fh:
            yield fh
        os.replace(tmp, path)
    except BaseException:
        with contextlib.suppress(OSError):
            os.unlink(tmp)
        raise


def _format_value(value):
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return FLOAT_FORMAT % float(value)
    return str(value)


def write_csv(path, fieldnames, rows):
    """Comma-separated table, '.' decimal separator, 17 significant digits."""
    with atomic_open(path) as fh:
        fh.write(",".join(fieldnames) + "\n")
        for row in rows:
            fh.write(",".join(_format_value(row[name]) for name in fieldnames) + "\n")


def write_diagnostics_csv(path, diagnostics):
    if not diagnostics:
        raise ConfigurationError("run produced no diagnostics rows (n_end < 2?)")
    write_csv(path, list(diagnostics[0].keys()), diagnostics)


def read_csv(path):
    """Read a table written by write_csv back into a list of dicts."""
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    header = lines[0].split(",")
    rows = []
    for line in lines[1:]:
        cells = line.split(",")
        row = {}
        for name, cell in zip(header, cells):
            try:
                value = int(cell)
            except ValueError:
                try:
                    value = float(cell)
                except ValueError:
                    value = cell
            row[name] = value
        rows.append(row)
    return rows


def write_json(path, payload):
    with atomic_open(path) as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_json(path):
    with open(path) as fh:
        return json.load(fh)


def write_yaml(path, payload):
    with atomic_open(path) as fh:
        yaml.safe_dump(payload, fh, sort_keys=False)


# --- raw binary field dumps ---------------------------------------------

def write_field_dump(path, values, entity, fingerprint):
    """Little-endian binary dump with header (magic, fingerprint, entity)."""
    if entity not in _ENTITY_CODES:
        raise ConfigurationError(f"unknown entity class {entity!r}")
    values = np.asarray(values)
    dtype = np.dtype("<c16") if np.iscomplexobj(values) else np.dtype("<f8")
    data = np.ascontiguousarray(values, dtype=dtype)
    header = _HEADER.pack(
        DUMP_MAGIC, fingerprint.encode("ascii"),
        _ENTITY_CODES[entity], _DTYPE_CODES[dtype], data.size,
    )
    with atomic_open(path, "wb") as fh:
        fh.write(header)
        fh.write(data.tobytes())


def read_field_dump(path):
    """Returns (values, entity name, fingerprint) of one binary dump."""
    with open(path, "rb") as fh:
        raw = fh.read(_HEADER.size)
        if len(raw) != _HEADER.size:
            raise ConfigurationError(f"{path}: truncated dump header")
        magic, fp, entity_code, dtype_code, count = _HEADER.unpack(raw)
        if magic != DUMP_MAGIC:
            raise ConfigurationError(f"{path}: not a field dump (bad magic {magic!r})")
        dtype = _DTYPE_NAMES.get(dtype_code)
        entity = _ENTITY_NAMES.get(entity_code)
        if dtype is None or entity is None:
            raise ConfigurationError(f"{path}: unknown entity/dtype codes in header")
        payload = fh.read(count * dtype.itemsize)
    if len(payload) != count * dtype.itemsize:
        raise ConfigurationError(f"{path}: truncated dump payload")
    return np.frombuffer(payload, dtype=dtype).copy(), entity, fp.decode("ascii")


# --- cell-centered vector reconstruction for VTK -------------------------

def edge_to_cell_vectors(grid, edge_values):
    """Average the 4 like-directed edges of each cell into a cell vector."""
    out = np.empty((grid.n_cells, 3))
    for a in AXES:
        dims = grid.edge_dims(a)
        off = grid.edge_offset(a)
        arr = np.asarray(edge_values[off:off + int(np.prod(dims))], dtype=float)
        arr = arr.reshape(dims[2], dims[1], dims[0])
        for t in _CYCLIC[a]:
            na = 2 - t  # numpy axis of spatial axis t in (k, j, i) layout
            lo = [slice(None)] * 3
            hi = [slice(None)] * 3
            lo[na] = slice(0, -1)
            hi[na] = slice(1, None)
            arr = 0.5 * (arr[tuple(lo)] + arr[tuple(hi)])
        out[:, a] = arr.ravel()
    return out


def face_to_cell_vectors(grid, face_values):
    """Average the 2 opposing like-normal faces of each cell into a vector."""
    out = np.empty((grid.n_cells, 3))
    for a in AXES:
        dims = grid.face_dims(a)
        off = grid.face_offset(a)
        arr = np.asarray(face_values[off:off + int(np.prod(dims))], dtype=float)
        arr = arr.reshape(dims[2], dims[1], dims[0])
        na = 2 - a
        lo = [slice(None)] * 3
        hi = [slice(None)] * 3
        lo[na] = slice(0, -1)
        hi[na] = slice(1, None)
        arr = 0.5 * (arr[tuple(lo)] + arr[tuple(hi)])
        out[:, a] = arr.ravel()
    return out


def write_vtk_snapshot(path, grid, snapshot, title="fields"):
    """Legacy-VTK ASCII structured-points file with cell-centered vectors."""
    vectors = {
        "e_total": edge_to_cell_vectors(grid, snapshot.e_total),
        "e_irr": edge_to_cell_vectors(grid, snapshot.e_irr),
        "e_rem": edge_to_cell_vectors(grid, snapshot.e_rem),
        "b": face_to_cell_vectors(grid, snapshot.b / grid.face_areas()),
    }
    with atomic_open(path) as fh:
        fh.write("# vtk DataFile Version 3.0\n")
        fh.write(f"{title} t={snapshot.t!r}\n")
        fh.write("ASCII\n")
        fh.write("DATASET STRUCTURED_POINTS\n")
        fh.write(f"DIMENSIONS {grid.nx} {grid.ny} {grid.nz}\n")
        fh.write("ORIGIN 0.0 0.0 0.0\n")
        fh.write(f"SPACING {grid.dx!r} {grid.dy!r} {grid.dz!r}\n")
        fh.write(f"CELL_DATA {grid.n_cells}\n")
        for name, data in vectors.items():
            fh.write(f"VECTORS {name} double\n")
            for vx, vy, vz in data:
                fh.write(f"{vx!r} {vy!r} {vz!r}\n")


# --- run / reference directory layouts -----------------------------------

_SNAPSHOT_FIELDS = (("e_total", "edge"), ("e_irr", "edge"),
                    ("e_rem", "edge"), ("b", "face"))


def sampleable_indices(history):
    """State indices at which snapshot_at() is defined for this run."""
    last = history.n_states - 1
    if history.scenario.scheme == "trapezoidal":
        last -= 1
    return list(range(1, last + 1))


def write_run_artifacts(out_dir, history, fingerprint, dump_fields="none",
                        scenario_doc=None, write_vtk=False):
    """Write diagnostics, summary and (optionally) field dumps of one run."""
    os.makedirs(out_dir, exist_ok=True)
    scenario = history.scenario
    write_diagnostics_csv(os.path.join(out_dir, "diagnostics.csv"), history.diagnostics)
    if scenario_doc is not None:
        write_yaml(os.path.join(out_dir, "scenario.yaml"), scenario_doc)

    indices = sampleable_indices(history)
    if dump_fields == "none":
        dumped = []
    elif dump_fields == "summary":
        dumped = indices[-1:]
    else:
        dumped = indices
    dumps = {}
    if dumped:
        fields_dir = os.path.join(out_dir, "fields")
        os.makedirs(fields_dir, exist_ok=True)
        for n in dumped:
            snapshot = history.snapshot_at(n * scenario.dt)
            entry = {}
            for name, entity in _SNAPSHOT_FIELDS:
                fname = f"{name}_n{n:05d}.bin"
                write_field_dump(os.path.join(fields_dir, fname),
                                 getattr(snapshot, name), entity, fingerprint)
                entry[name] = os.path.join("fields", fname)
            if write_vtk:
                vname = f"fields_n{n:05d}.vtk"
                write_vtk_snapshot(os.path.join(fields_dir, vname),
                                   history.problem.grid, snapshot)
                entry["vtk"] = os.path.join("fields", vname)
            dumps[str(n)] = entry

    summary = {
        "kind": "run",
        "label": scenario.label,
        "fingerprint": fingerprint,
        "scheme": scenario.scheme,
        "mode": scenario.mode,
        "dt": scenario.dt,
        "n_states": history.n_states,
        "sampleable_indices": indices,
        "dumped": dumps,
        "warnings": list(history.warnings),
    }
    write_json(os.path.join(out_dir, "summary.json"), summary)
    return summary


def write_reference_artifacts(out_dir, solution, scenario, fingerprint):
    """Write phasor dumps and a summary for one frequency-domain solve."""
    os.makedirs(out_dir, exist_ok=True)
    phasors = {
        "a_hat": ("edge", solution.a_hat),
        "phi_hat": ("node", solution.phi_hat),
        "e_hat": ("edge", solution.e_hat),
        "e_irr_hat": ("edge", solution.e_irr_hat),
        "e_rem_hat": ("edge", solution.e_rem_hat),
        "b_hat": ("face", solution.b_hat),
    }
    files = {}
    for name, (entity, values) in phasors.items():
        fname = f"{name}.bin"
        write_field_dump(os.path.join(out_dir, fname), values, entity, fingerprint)
        files[name] = fname
    summary = {
        "kind": "reference",
        "label": scenario.label,
        "fingerprint": fingerprint,
        "omega": solution.omega,
        "frequency": solution.omega / (2.0 * np.pi),
        "phi_max": scenario.phi_max,
        "residual": solution.residual,
        "phasors": files,
    }
    write_json(os.path.join(out_dir, "summary.json"), summary)
    return summary
