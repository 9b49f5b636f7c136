"""Experiment configuration: JSON parsing, presets, reproducibility manifest.

A config file fully determines a run: system parameters, the kernel matrix,
the initial datum (explicit particles, an explicit quantile grid, or a named
preset), and solver settings.  Parsing either returns a fully built
:class:`ExperimentConfig` or raises :class:`ConfigError` listing every
detected schema problem as ``path: expected``.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import measures
from .convexity import SystemParams
from .errors import ConfigError
from .measures import ParticleState, QuantileState
from .potentials import (ConfiningSpec, DoubleWell, GaussianAR, Morse, Power,
                         PotentialMatrix, Quadratic, ScalarPotential, Tabulated, Zero)
from .quantile_solver import SolverConfig

DEFAULT_M = 256
DEFAULT_INITIAL = {"type": "preset", "name": "uniform", "args": {"lo": -1.0, "hi": 1.0}}

_KIND_FIELDS = {
    "quadratic": ("a",),
    "power": ("q", "a"),
    "morse": ("ca", "la", "cr", "lr", "eps"),
    "gaussian_ar": ("ca", "la", "cr", "lr"),
    "double_well": ("a", "b"),
    "zero": (),
    "tabulated": ("knots", "values", "derivs"),
}

_KIND_BUILDERS = {
    "quadratic": Quadratic,
    "power": Power,
    "morse": Morse,
    "gaussian_ar": GaussianAR,
    "double_well": DoubleWell,
    "zero": Zero,
    "tabulated": lambda knots, values, derivs: Tabulated(tuple(knots), tuple(values), tuple(derivs)),
}


@dataclass
class ExperimentConfig:
    params: SystemParams
    potential: PotentialMatrix
    solver: SolverConfig
    M: int
    seed: int
    initial_quantile: Optional[QuantileState]
    initial_particles: Optional[ParticleState]
    raw: dict
    source_hash: Optional[str] = None


def potential_from_dict(d: dict, path: str) -> ScalarPotential:
    if not isinstance(d, dict) or "kind" not in d:
        raise ConfigError(f"{path}: expected an object with a 'kind' field")
    kind = d["kind"]
    if kind not in _KIND_FIELDS:
        raise ConfigError(f"{path}.kind: expected one of {sorted(_KIND_FIELDS)}, got {kind!r}")
    fields = _KIND_FIELDS[kind]
    missing = [f for f in fields if f not in d]
    if missing:
        raise ConfigError(f"{path}: kind {kind!r} requires fields {list(fields)}, missing {missing}")
    extra = set(d) - set(fields) - {"kind"}
    if extra:
        raise ConfigError(f"{path}: unknown fields {sorted(extra)} for kind {kind!r}")
    for f in fields:
        if kind == "tabulated":
            if not isinstance(d[f], list) or not all(isinstance(v, (int, float)) for v in d[f]):
                raise ConfigError(f"{path}.{f}: expected a list of numbers")
        elif not isinstance(d[f], (int, float)) or isinstance(d[f], bool):
            raise ConfigError(f"{path}.{f}: expected a number, got {d[f]!r}")
    try:
        return _KIND_BUILDERS[kind](**{f: d[f] for f in fields})
    except (TypeError, ValueError) as err:
        raise ConfigError(f"{path}: {err}") from err


def _number(raw, path, issues, positive=False, integer=False):
    if not isinstance(raw, (int, float)) or isinstance(raw, bool):
        issues.append(f"{path}: expected a number, got {raw!r}")
        return None
    if integer and int(raw) != raw:
        issues.append(f"{path}: expected an integer, got {raw!r}")
        return None
    if positive and raw <= 0:
        issues.append(f"{path}: expected a positive value, got {raw!r}")
        return None
    return int(raw) if integer else float(raw)


def _vector(raw, path, issues, length=None):
    if not isinstance(raw, list) or not all(isinstance(v, (int, float)) for v in raw):
        issues.append(f"{path}: expected a list of numbers")
        return None
    if length is not None and len(raw) != length:
        issues.append(f"{path}: expected length {length}, got {len(raw)}")
        return None
    return [float(v) for v in raw]


def _matrix(raw, path, issues, n, symmetric=True):
    if (not isinstance(raw, list) or len(raw) != n
            or any(not isinstance(r, list) or len(r) != n for r in raw)):
        issues.append(f"{path}: expected an {n}x{n} matrix")
        return None
    arr = np.asarray(raw, dtype=float)
    if symmetric and not np.array_equal(arr, arr.T):
        issues.append(f"{path}: must be symmetric")
        return None
    return arr


def _potential_matrix(raw, n, issues) -> Optional[PotentialMatrix]:
    if not isinstance(raw, dict):
        issues.append("potential: expected an object with 'entries' and 'kappa'")
        return None
    entries_raw = raw.get("entries")
    if (not isinstance(entries_raw, list) or len(entries_raw) != n
            or any(not isinstance(r, list) or len(r) != n for r in entries_raw)):
        issues.append(f"potential.entries: expected an {n}x{n} grid of kernel objects")
        return None
    entries = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            try:
                entries[i][j] = potential_from_dict(entries_raw[i][j],
                                                    f"potential.entries[{i}][{j}]")
            except ConfigError as err:
                issues.extend(err.issues)
    if any(e is None for row in entries for e in row):
        return None
    for i in range(n):
        for j in range(i + 1, n):
            if entries[i][j] != entries[j][i]:
                issues.append(f"potential.entries: entries[{i}][{j}] != entries[{j}][{i}] "
                              "(interaction kernels must be symmetric)")
                return None
    kappa = _matrix(raw.get("kappa"), "potential.kappa", issues, n)
    growth = None
    if "growth" in raw:
        growth = _matrix(raw["growth"], "potential.growth", issues, n, symmetric=False)
    confining = None
    if "confining" in raw:
        spec = raw["confining"]
        if not isinstance(spec, dict) or "R" not in spec or "C" not in spec:
            issues.append("potential.confining: expected an object with 'R' and 'C'")
        else:
            radius = _number(spec["R"], "potential.confining.R", issues, positive=True)
            cmat = _matrix(spec["C"], "potential.confining.C", issues, n)
            if radius is not None and cmat is not None:
                confining = ConfiningSpec(radius, cmat)
    if kappa is None:
        return None
    return PotentialMatrix(tuple(tuple(row) for row in entries), kappa, growth, confining)


def _build_preset(name: str, args: dict, n: int, M: int, rng) -> np.ndarray:
    z = measures.cell_midpoints(M)
    if name == "two_diracs":
        positions = args.get("positions")
        if not isinstance(positions, list) or len(positions) != n:
            raise ConfigError(f"initial.args.positions: expected {n} positions")
        return np.array([[float(x)] * M for x in positions])
    if name == "uniform":
        lo = args.get("lo", -1.0)
        hi = args.get("hi", 1.0)
        lo = [lo] * n if isinstance(lo, (int, float)) else lo
        hi = [hi] * n if isinstance(hi, (int, float)) else hi
        if len(lo) != n or len(hi) != n:
            raise ConfigError(f"initial.args.lo/hi: expected scalars or {n}-vectors")
        u = np.empty((n, M))
        for i in range(n):
            if not hi[i] > lo[i]:
                raise ConfigError(f"initial.args: species {i} needs lo < hi")
            u[i] = lo[i] + (hi[i] - lo[i]) * z
        return u
    if name == "gauss_pair":
        centers = args.get("centers", [-1.0, 1.0])
        sigma = args.get("sigma", 0.25)
        weights = args.get("weights", [0.5, 0.5])
        if len(centers) != 2 or len(weights) != 2:
            raise ConfigError("initial.args: gauss_pair needs two centers and two weights")
        u = np.empty((n, M))
        for i in range(n):
            which = rng.random(M) < weights[0] / (weights[0] + weights[1])
            samples = np.where(which, centers[0], centers[1]) + sigma * rng.standard_normal(M)
            u[i] = np.sort(samples)
        return u
    raise ConfigError(f"initial.name: unknown preset {name!r} "
                      "(expected two_diracs, uniform or gauss_pair)")


def _build_initial(raw_initial: dict, m, p, d: int, M: int, seed: int):
    """Returns (quantile u array or None, particle (positions, masses) or None)."""
    itype = raw_initial.get("type")
    if itype == "particles":
        species = raw_initial.get("species")
        if not isinstance(species, list) or len(species) != len(m):
            raise ConfigError(f"initial.species: expected a list of {len(m)} species objects")
        positions, masses = [], []
        for i, s in enumerate(species):
            if not isinstance(s, dict) or "x" not in s or "mass" not in s:
                raise ConfigError(f"initial.species[{i}]: expected an object with 'x' and 'mass'")
            x = np.asarray(s["x"], dtype=float)
            if x.ndim == 1:
                x = x[:, None]
            if x.ndim != 2 or x.shape[1] != d:
                raise ConfigError(f"initial.species[{i}].x: expected positions of dimension d={d}")
            w = np.asarray(s["mass"], dtype=float)
            if w.shape != (x.shape[0],):
                raise ConfigError(f"initial.species[{i}].mass: expected one mass per particle")
            total = float(w.sum())
            if abs(total - p[i]) > 1e-12 * p[i]:
                raise ConfigError(f"initial.species[{i}]: particle masses sum to {total!r} "
                                  f"but params.p[{i}] is {p[i]!r}")
            positions.append(x)
            masses.append(w)
        return None, (positions, masses)
    if itype == "quantile_grid":
        if d != 1:
            raise ConfigError("initial.type: quantile_grid requires d=1")
        values = raw_initial.get("values")
        if not isinstance(values, list) or len(values) != len(m):
            raise ConfigError(f"initial.values: expected {len(m)} rows of quantile values")
        u = np.asarray(values, dtype=float)
        if u.ndim != 2:
            raise ConfigError("initial.values: rows must have equal length")
        for i in range(u.shape[0]):
            if np.any(np.diff(u[i]) < 0.0):
                raise ConfigError(f"initial.values[{i}]: quantile values must be non-decreasing")
        return u, None
    if itype == "preset":
        if d != 1:
            raise ConfigError("initial.type: presets are one-dimensional; "
                              "use explicit particles for d > 1")
        rng = np.random.default_rng(seed)
        u = _build_preset(raw_initial.get("name", ""), raw_initial.get("args", {}),
                          len(m), M, rng)
        return u, None
    raise ConfigError(f"initial.type: expected particles, quantile_grid or preset, got {itype!r}")


def config_from_dict(raw: dict, dt: Optional[float] = None, t_end: Optional[float] = None,
                     seed: Optional[int] = None, source_hash: Optional[str] = None) -> ExperimentConfig:
    """Validate and build a config from parsed JSON; flags override file values."""
    if not isinstance(raw, dict):
        raise ConfigError("config: expected a JSON object")
    issues: list = []
    known = {"params", "potential", "initial", "solver", "M", "seed"}
    for key in raw:
        if key not in known:
            issues.append(f"{key}: unknown section (expected one of {sorted(known)})")

    params_raw = raw.get("params")
    m = p = None
    d = 1
    declared_E = None
    if not isinstance(params_raw, dict):
        issues.append("params: expected an object with 'm' and 'p'")
    else:
        m = _vector(params_raw.get("m"), "params.m", issues)
        p = _vector(params_raw.get("p"), "params.p", issues, length=len(m) if m else None)
        if m is not None and any(v <= 0 for v in m):
            issues.append("params.m: mobilities must be positive")
        if p is not None and any(v <= 0 for v in p):
            issues.append("params.p: masses must be positive")
        if "n" in params_raw and m is not None:
            n_decl = _number(params_raw["n"], "params.n", issues, positive=True, integer=True)
            if n_decl is not None and n_decl != len(m):
                issues.append(f"params.n: declared {n_decl} but params.m has length {len(m)}")
        if "d" in params_raw:
            d = _number(params_raw["d"], "params.d", issues, positive=True, integer=True) or 1
        if "E" in params_raw:
            e_raw = params_raw["E"]
            if isinstance(e_raw, (int, float)):
                declared_E = np.array([float(e_raw)])
            else:
                vec = _vector(e_raw, "params.E", issues, length=d)
                declared_E = None if vec is None else np.asarray(vec)
            if declared_E is not None and declared_E.shape != (d,):
                issues.append(f"params.E: expected a scalar or length-{d} vector")
                declared_E = None
    if issues:
        raise ConfigError(issues)
    n = len(m)

    potential = _potential_matrix(raw.get("potential"), n, issues)

    M = DEFAULT_M
    if "M" in raw:
        M = _number(raw["M"], "M", issues, positive=True, integer=True) or DEFAULT_M
    file_seed = 0
    if "seed" in raw:
        file_seed = _number(raw["seed"], "seed", issues, integer=True)
        file_seed = 0 if file_seed is None else file_seed
    used_seed = file_seed if seed is None else int(seed)
    if used_seed < 0:
        issues.append(f"seed: expected a non-negative integer, got {used_seed}")

    solver_raw = raw.get("solver", {})
    solver = None
    if not isinstance(solver_raw, dict):
        issues.append("solver: expected an object")
    else:
        allowed = {"dt", "t_end", "scheme", "repair", "cfl_safety", "record_every"}
        unknown = set(solver_raw) - allowed
        if unknown:
            issues.append(f"solver: unknown fields {sorted(unknown)} (expected {sorted(allowed)})")
        kwargs = dict(solver_raw)
        if dt is not None:
            kwargs["dt"] = dt
        if t_end is not None:
            kwargs["t_end"] = t_end
        kwargs.setdefault("record_every", 10)
        try:
            solver = SolverConfig(**{k: v for k, v in kwargs.items() if k in allowed})
        except (TypeError, ValueError) as err:
            issues.append(f"solver: {err}")
    if issues or potential is None or solver is None:
        raise ConfigError(issues)

    initial_raw = raw.get("initial", DEFAULT_INITIAL)
    u, particles = _build_initial(initial_raw, m, p, d, M, used_seed)
    if u is not None:
        M = u.shape[1]  # an explicit grid fixes the resolution

    # The conserved center is computed from the initial datum; an explicitly
    # declared value must agree with it.
    if particles is not None:
        positions, masses = particles
        center = np.zeros(d)
        for i in range(n):
            center += (masses[i][:, None] * positions[i]).sum(axis=0) / m[i]
    else:
        center = np.array([float(np.sum(np.asarray(p) / np.asarray(m) * u.mean(axis=1)))])
    if declared_E is not None:
        scale = 1.0 + float(np.abs(declared_E).max())
        if float(np.abs(declared_E - center).max()) > 1e-9 * scale:
            raise ConfigError(f"params.E: declared {declared_E.tolist()} but the initial datum "
                              f"has weighted center {center.tolist()}")
    params = SystemParams(np.asarray(m), np.asarray(p), center, d=d)

    initial_quantile = None
    initial_particles = None
    if particles is not None:
        initial_particles = ParticleState(particles[0], particles[1], params)
        if d == 1:
            initial_quantile = measures.quantile_from_particles(initial_particles, M)
    else:
        initial_quantile = QuantileState(u, params)
        initial_particles = measures.particles_from_quantile(initial_quantile)

    return ExperimentConfig(params=params, potential=potential, solver=solver, M=M,
                            seed=used_seed, initial_quantile=initial_quantile,
                            initial_particles=initial_particles, raw=raw,
                            source_hash=source_hash)


def parse_config(path, dt: Optional[float] = None, t_end: Optional[float] = None,
                 seed: Optional[int] = None) -> ExperimentConfig:
    """Read, validate and build an experiment config from a JSON file."""
    try:
        with open(path, "rb") as fh:
            blob = fh.read()
    except OSError as err:
        raise ConfigError(f"config: cannot read {path}: {err}") from err
    try:
        raw = json.loads(blob)
    except json.JSONDecodeError as err:
        raise ConfigError(f"config: {path} is not valid JSON: {err}") from err
    return config_from_dict(raw, dt=dt, t_end=t_end, seed=seed,
                            source_hash=hashlib.sha256(blob).hexdigest())


def manifest(cfg: ExperimentConfig, command: str, dt_used: Optional[float]) -> dict:
    from . import __version__

    return {
        "command": command,
        "config_hash": cfg.source_hash,
        "version": __version__,
        "dt": dt_used,
        "seed": cfg.seed,
    }


def write_manifest(out_path, cfg: ExperimentConfig, command: str, dt_used: float) -> str:
    path = f"{out_path}.manifest.json"
    with open(path, "w") as fh:
        json.dump(manifest(cfg, command, dt_used), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path
