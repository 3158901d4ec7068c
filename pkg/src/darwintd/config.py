"""Scenario file parsing, validation and serialization.

The on-disk format is a strict YAML document: every section and key is
checked against the schema below and unknown keys are rejected with the
full key path, before any grid allocation happens.
"""

import hashlib
import json

import yaml

from .errors import ConfigurationError
from .materials import REGULARIZATION_MODES, MaterialRegion
from .orchestrator import EXCITATION_KINDS, MODES, Scenario

_SOLVER_METHODS = ("cg", "direct", "dense")
_DUMP_MODES = ("none", "summary", "all")


def _require(mapping, key, path, kind=None):
    if key not in mapping:
        raise ConfigurationError(f"missing required key '{path}.{key}'")
    value = mapping[key]
    if kind is not None and not isinstance(value, kind):
        raise ConfigurationError(
            f"key '{path}.{key}' has wrong type {type(value).__name__}"
        )
    return value


def _check_keys(mapping, allowed, path):
    if not isinstance(mapping, dict):
        raise ConfigurationError(f"section '{path}' must be a mapping")
    unknown = set(mapping) - set(allowed)
    if unknown:
        raise ConfigurationError(
            f"unknown key(s) {sorted(unknown)} in section '{path}' "
            f"(allowed: {sorted(allowed)})"
        )


def _number(mapping, key, path, default=None):
    if key not in mapping:
        if default is None:
            raise ConfigurationError(f"missing required key '{path}.{key}'")
        return default
    value = _coerce_number(mapping[key])
    if value is None:
        raise ConfigurationError(
            f"key '{path}.{key}' must be a number, got {mapping[key]!r}"
        )
    return value


def _coerce_number(value):
    """Accept ints/floats plus numeric strings (YAML resolves '1.0e4' as str)."""
    if isinstance(value, bool):
        return None
    if isinstance(value, (int, float)):
        return value
    if isinstance(value, str):
        try:
            return float(value)
        except ValueError:
            return None
    return None


def _box(value, path):
    if not isinstance(value, (list, tuple)) or len(value) != 6:
        raise ConfigurationError(f"'{path}' must be a list of 6 coordinates, got {value!r}")
    coords = [_coerce_number(v) for v in value]
    for raw, v in zip(value, coords):
        if v is None:
            raise ConfigurationError(f"'{path}' contains a non-number: {raw!r}")
    return tuple(float(v) for v in coords)


def _choice(mapping, key, path, choices, default):
    value = mapping.get(key, default)
    if value not in choices:
        raise ConfigurationError(
            f"key '{path}.{key}' must be one of {choices}, got {value!r}"
        )
    return value


def scenario_from_dict(doc):
    """Validate a parsed scenario document and build the Scenario."""
    _check_keys(doc, ("label", "grid", "materials", "electrodes", "excitation",
                      "time", "solver", "output"), "<root>")
    label = doc.get("label", "scenario")
    if not isinstance(label, str):
        raise ConfigurationError("key '<root>.label' must be a string")

    grid = _require(doc, "grid", "<root>", dict)
    _check_keys(grid, ("nx", "ny", "nz", "dx", "dy", "dz"), "grid")
    counts = {k: _number(grid, k, "grid") for k in ("nx", "ny", "nz")}
    for k, v in counts.items():
        if int(v) != v:
            raise ConfigurationError(f"key 'grid.{k}' must be an integer, got {v!r}")
    spacings = {k: float(_number(grid, k, "grid")) for k in ("dx", "dy", "dz")}

    mats = _require(doc, "materials", "<root>", dict)
    _check_keys(mats, ("kappa_hat", "regularization", "regions"), "materials")
    kappa_hat = float(_number(mats, "kappa_hat", "materials", default=1e-2))
    regularization = _choice(mats, "regularization", "materials",
                             REGULARIZATION_MODES, "constant")
    regions_doc = _require(mats, "regions", "materials", list)
    if not regions_doc:
        raise ConfigurationError("'materials.regions' must contain at least one region")
    regions = []
    for idx, rd in enumerate(regions_doc):
        path = f"materials.regions[{idx}]"
        _check_keys(rd, ("box", "kappa", "epsilon_r", "mu_r"), path)
        regions.append(MaterialRegion(
            box=_box(_require(rd, "box", path), f"{path}.box"),
            kappa=float(_number(rd, "kappa", path, default=0.0)),
            epsilon_r=float(_number(rd, "epsilon_r", path, default=1.0)),
            mu_r=float(_number(rd, "mu_r", path, default=1.0)),
        ))

    electrodes = _require(doc, "electrodes", "<root>", dict)
    _check_keys(electrodes, ("excited", "grounded"), "electrodes")
    def _boxes(key):
        boxes_doc = _require(electrodes, key, "electrodes", list)
        if not boxes_doc:
            raise ConfigurationError(f"'electrodes.{key}' must contain at least one box")
        return [_box(b, f"electrodes.{key}[{i}]") for i, b in enumerate(boxes_doc)]
    excited = _boxes("excited")
    grounded = _boxes("grounded")

    excitation = _require(doc, "excitation", "<root>", dict)
    _check_keys(excitation, ("kind", "phi_max", "frequency"), "excitation")
    kind = _choice(excitation, "kind", "excitation", EXCITATION_KINDS, "ramped-sine")
    phi_max = float(_number(excitation, "phi_max", "excitation", default=12.0))
    frequency = float(_number(excitation, "frequency", "excitation", default=1e7))

    time_doc = _require(doc, "time", "<root>", dict)
    _check_keys(time_doc, ("dt", "n_end", "scheme", "mode"), "time")
    dt = float(_number(time_doc, "dt", "time"))
    n_end = _number(time_doc, "n_end", "time")
    if int(n_end) != n_end:
        raise ConfigurationError(f"key 'time.n_end' must be an integer, got {n_end!r}")
    scheme = _choice(time_doc, "scheme", "time", ("euler", "trapezoidal"), "euler")
    mode = _choice(time_doc, "mode", "time", MODES, "two-loop")

    solver = doc.get("solver", {})
    _check_keys(solver, ("method", "tol", "max_iter", "stabilize_eqs"), "solver")
    method = _choice(solver, "method", "solver", _SOLVER_METHODS, "cg")
    tol = float(_number(solver, "tol", "solver", default=1e-10))
    max_iter = _number(solver, "max_iter", "solver", default=0)
    if int(max_iter) != max_iter or max_iter < 0:
        raise ConfigurationError(f"key 'solver.max_iter' must be a non-negative integer")
    stabilize = solver.get("stabilize_eqs", True)
    if not isinstance(stabilize, bool):
        raise ConfigurationError("key 'solver.stabilize_eqs' must be a boolean")

    output = doc.get("output", {})
    _check_keys(output, ("dump_fields",), "output")
    dump_fields = _choice(output, "dump_fields", "output", _DUMP_MODES, "none")

    scenario = Scenario(
        nx=int(counts["nx"]), ny=int(counts["ny"]), nz=int(counts["nz"]),
        dx=spacings["dx"], dy=spacings["dy"], dz=spacings["dz"],
        regions=regions, excited_boxes=excited, grounded_boxes=grounded,
        dt=dt, n_end=int(n_end), phi_max=phi_max, frequency=frequency,
        excitation_kind=kind, scheme=scheme, mode=mode,
        kappa_hat=kappa_hat, regularization=regularization,
        solver_method=method, solver_tol=tol, solver_max_iter=int(max_iter),
        stabilize_eqs=stabilize, label=label,
    )
    scenario.validate()
    return scenario, dump_fields


def scenario_to_dict(scenario, dump_fields="none"):
    return {
        "label": scenario.label,
        "grid": {"nx": scenario.nx, "ny": scenario.ny, "nz": scenario.nz,
                 "dx": scenario.dx, "dy": scenario.dy, "dz": scenario.dz},
        "materials": {
            "kappa_hat": scenario.kappa_hat,
            "regularization": scenario.regularization,
            "regions": [
                {"box": list(r.box), "kappa": r.kappa,
                 "epsilon_r": r.epsilon_r, "mu_r": r.mu_r}
                for r in scenario.regions
            ],
        },
        "electrodes": {
            "excited": [list(b) for b in scenario.excited_boxes],
            "grounded": [list(b) for b in scenario.grounded_boxes],
        },
        "excitation": {"kind": scenario.excitation_kind,
                       "phi_max": scenario.phi_max,
                       "frequency": scenario.frequency},
        "time": {"dt": scenario.dt, "n_end": scenario.n_end,
                 "scheme": scenario.scheme, "mode": scenario.mode},
        "solver": {"method": scenario.solver_method, "tol": scenario.solver_tol,
                   "max_iter": scenario.solver_max_iter,
                   "stabilize_eqs": scenario.stabilize_eqs},
        "output": {"dump_fields": dump_fields},
    }


def load_scenario(path):
    """Parse and validate a scenario YAML file."""
    try:
        with open(path) as fh:
            doc = yaml.safe_load(fh)
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"cannot parse {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigurationError(f"{path} does not contain a scenario mapping")
    return scenario_from_dict(doc)


def save_scenario(path, scenario, dump_fields="none"):
    with open(path, "w") as fh:
        yaml.safe_dump(scenario_to_dict(scenario, dump_fields), fh, sort_keys=False)


def grid_fingerprint(scenario):
    """Stable hash of the discretization: counts, spacings, region list."""
    payload = {
        "counts": [scenario.nx, scenario.ny, scenario.nz],
        "spacings": [scenario.dx, scenario.dy, scenario.dz],
        "regions": [
            [list(r.box), r.kappa, r.epsilon_r, r.mu_r] for r in scenario.regions
        ],
    }
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()
