"""Command-line driver: TOML scenario files in, CSV or JSON tables out.

    cpforge list CONFIG
    cpforge run CONFIG SCENARIO [--out PATH] [--format csv|json] ...

Config files declare [units], [materials], [atoms], [stacks] and
[scenarios].  A bare file name that does not exist in the working
directory is looked up among the configs shipped with the package.
Frequencies are given in units of ``units.frequency``
(rad/s, default 1e15) and lengths in units of c / ``units.frequency``.

Exit codes: 0 success, 2 configuration error, 3 a numerical result was
flagged as not converged (suppressed by --allow-flags).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
from scipy.constants import c

from . import asymptotics as asym
from . import dynamics as dyn
from .atom import Atom, Transition, dipole_sq_from_strength
from .materials import Material
from .potential import sample_curve, scales
from .quad import QuadratureSpec
from .stack import Layer, LayerStack

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_FLAGGED = 3

KINDS = ("potential", "coeffs", "border", "wall", "thickness-opt", "cavity", "dynamics")
DEFAULT_FREQUENCY = 1e15


class ConfigError(Exception):
    """Schema violation; the message starts with the offending key path."""


# units of output columns: powers of (energy, length, frequency)

@dataclass(frozen=True)
class Column:
    name: str
    dims: tuple[int, int, int] = (0, 0, 0)


def _unit_label(dims, mode):
    names = {"si": ("J", "m", "rad/s"), "dimensionless": ("hbar w10 beta", "c/w10", "w10")}[mode]
    parts = []
    for name, p in zip(names, dims):
        if p == 0:
            continue
        base = f"({name})" if " " in name or "/" in name else name
        parts.append(base if p == 1 else f"{base}^{p}")
    return " ".join(parts) if parts else "1"


@dataclass
class Table:
    columns: list[Column]
    rows: list[list[Any]]
    meta: dict = field(default_factory=dict)
    flags: list[str] = field(default_factory=list)

    def scaled(self, mode: str, atom: Atom | None) -> "Table":
        if mode == "si" or atom is None:
            return self
        length, energy, _ = scales(atom)
        w10 = atom.omega_min
        factors = [energy ** col.dims[0] * length ** col.dims[1] * w10 ** col.dims[2] for col in self.columns]
        rows = [
            [v / f if isinstance(v, float) else v for v, f in zip(row, factors)]
            for row in self.rows
        ]
        return Table(self.columns, rows, self.meta, self.flags)

    def header(self, mode: str) -> list[str]:
        return [f"{col.name} [{_unit_label(col.dims, mode)}]" for col in self.columns]

    def to_csv(self, mode: str) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.header(mode))
        for row in self.rows:
            w.writerow([_fmt(v) for v in row])
        return buf.getvalue()

    def to_json(self, mode: str) -> str:
        doc = {
            "columns": self.header(mode),
            "rows": [[_json_value(v) for v in row] for row in self.rows],
            "metadata": _jsonable(self.meta),
            "flags": list(self.flags),
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _fmt(v):
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _json_value(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None if math.isnan(v) else ("inf" if v > 0 else "-inf")
    return v


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return _json_value(obj.item())
    if isinstance(obj, float):
        return _json_value(obj)
    return obj


# config parsing

def _get(d: dict, key: str, path: str, kind=None, default=...):
    if key not in d:
        if default is ...:
            raise ConfigError(f"{path}.{key}: missing required key")
        return default
    v = d[key]
    if kind is float and isinstance(v, int) and not isinstance(v, bool):
        v = float(v)
    if kind is not None and not isinstance(v, kind):
        name = kind.__name__ if isinstance(kind, type) else "/".join(k.__name__ for k in kind)
        raise ConfigError(f"{path}.{key}: expected {name}, got {type(v).__name__}")
    return v


def _positive(v, path):
    if not (isinstance(v, (int, float)) and not isinstance(v, bool) and v > 0 and math.isfinite(v)):
        raise ConfigError(f"{path}: expected a positive number, got {v!r}")
    return float(v)


def _grid(spec, path: str, scale: float = 1.0) -> np.ndarray:
    """A list of values or {start, stop, num, spacing = "linear"|"log"}."""
    if isinstance(spec, list):
        vals = []
        for i, v in enumerate(spec):
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ConfigError(f"{path}[{i}]: expected a number, got {v!r}")
            vals.append(float(v))
        arr = np.array(vals)
    elif isinstance(spec, dict):
        start = _get(spec, "start", path, float)
        stop = _get(spec, "stop", path, float)
        num = _get(spec, "num", path, int)
        spacing = _get(spec, "spacing", path, str, "linear")
        if num < 1:
            raise ConfigError(f"{path}.num: grid must be non-empty")
        if spacing == "linear":
            arr = np.linspace(start, stop, num)
        elif spacing == "log":
            if not (start > 0 and stop > 0):
                raise ConfigError(f"{path}: log spacing needs positive bounds")
            arr = np.geomspace(start, stop, num)
        else:
            raise ConfigError(f"{path}.spacing: expected 'linear' or 'log', got {spacing!r}")
    else:
        raise ConfigError(f"{path}: expected a list or a table with start/stop/num")
    if arr.size == 0:
        raise ConfigError(f"{path}: grid must be non-empty")
    if not np.all(np.isfinite(arr)):
        raise ConfigError(f"{path}: grid values must be finite")
    if arr.size > 1 and not np.all(np.diff(arr) > 0):
        raise ConfigError(f"{path}: grid must be strictly increasing")
    return arr * scale


def _band(v, path: str, scale: float) -> tuple[float, float]:
    if not (isinstance(v, list) and len(v) == 2):
        raise ConfigError(f"{path}: expected [low, high]")
    lo, hi = (_positive(x, f"{path}[{i}]") for i, x in enumerate(v))
    if not lo < hi:
        raise ConfigError(f"{path}: low must be < high")
    return lo * scale, hi * scale


@dataclass
class Config:
    frequency: float
    materials: dict[str, Material]
    atoms: dict[str, Atom]
    stacks: dict[str, LayerStack]
    scenarios: dict[str, dict]

    @property
    def length(self) -> float:
        return c / self.frequency


def _parse_resonances(v, path, unit):
    if not isinstance(v, list):
        raise ConfigError(f"{path}: expected a list of [plasma, transverse, damping]")
    out = []
    for i, r in enumerate(v):
        p = f"{path}[{i}]"
        if not (isinstance(r, list) and len(r) in (2, 3)):
            raise ConfigError(f"{p}: expected [plasma, transverse] or [plasma, transverse, damping]")
        try:
            out.append(tuple(float(x) * unit for x in r))
        except (TypeError, ValueError):
            raise ConfigError(f"{p}: entries must be numbers") from None
    return out


def parse_config(doc: dict) -> Config:
    if not isinstance(doc, dict):
        raise ConfigError("<root>: expected a table")
    known = {"units", "materials", "atoms", "stacks", "scenarios"}
    for key in doc:
        if key not in known:
            raise ConfigError(f"{key}: unknown section (expected one of {sorted(known)})")
    units = _get(doc, "units", "<root>", dict, {})
    freq = _positive(units.get("frequency", DEFAULT_FREQUENCY), "units.frequency")
    length = c / freq

    materials = {"vacuum": Material.vacuum()}
    for name, m in _get(doc, "materials", "<root>", dict, {}).items():
        path = f"materials.{name}"
        if not isinstance(m, dict):
            raise ConfigError(f"{path}: expected a table")
        try:
            materials[name] = Material(
                tuple(_parse_resonances(m.get("electric", []), f"{path}.electric", freq)),
                tuple(_parse_resonances(m.get("magnetic", []), f"{path}.magnetic", freq)),
                name=name,
            )
        except ValueError as e:
            raise ConfigError(f"{path}: {e}") from None

    atoms = {}
    for name, a in _get(doc, "atoms", "<root>", dict, {}).items():
        atoms[name] = _parse_atom(a, f"atoms.{name}", freq)

    stacks = {}
    for name, s in _get(doc, "stacks", "<root>", dict, {}).items():
        stacks[name] = _parse_stack(s, f"stacks.{name}", materials, length)

    scenarios = _get(doc, "scenarios", "<root>", dict, {})
    for name, sc in scenarios.items():
        if not isinstance(sc, dict):
            raise ConfigError(f"scenarios.{name}: expected a table")
        kind = _get(sc, "kind", f"scenarios.{name}", str)
        if kind not in KINDS:
            raise ConfigError(f"scenarios.{name}.kind: unknown kind {kind!r} (expected one of {list(KINDS)})")
    return Config(freq, materials, atoms, stacks, scenarios)


def _parse_atom(a, path, freq) -> Atom:
    if not isinstance(a, dict):
        raise ConfigError(f"{path}: expected a table")
    w10 = _positive(_get(a, "omega10", path), f"{path}.omega10") * freq
    has_beta, has_d2 = "beta" in a, "dipole_sq" in a
    if has_beta == has_d2:
        raise ConfigError(f"{path}: give exactly one of beta or dipole_sq")
    if has_beta:
        beta = _positive(a["beta"], f"{path}.beta")
        ref = _positive(a.get("beta_reference", a["omega10"]), f"{path}.beta_reference") * freq
        d2 = dipole_sq_from_strength(ref, beta)
    else:
        d2 = _positive(a["dipole_sq"], f"{path}.dipole_sq")
    return Atom((Transition(w10, d2),), name=path.split(".", 1)[1])


def _material(name, path, materials):
    if not isinstance(name, str):
        raise ConfigError(f"{path}: expected a material name")
    if name not in materials:
        raise ConfigError(f"{path}: unknown material {name!r}")
    return materials[name]


def _parse_stack(s, path, materials, length) -> LayerStack:
    if not isinstance(s, dict):
        raise ConfigError(f"{path}: expected a table")
    kind = _get(s, "kind", path, str)
    try:
        if kind == "half-space":
            return LayerStack.half_space(_material(s.get("material"), f"{path}.material", materials))
        if kind == "slab":
            m = _material(s.get("material"), f"{path}.material", materials)
            d = _positive(_get(s, "thickness", path), f"{path}.thickness")
            return LayerStack.slab(m, d * length)
        if kind == "cavity":
            m = _material(s.get("material"), f"{path}.material", materials)
            right = s.get("material_right")
            mr = None if right is None else _material(right, f"{path}.material_right", materials)
            gap = _positive(_get(s, "gap", path), f"{path}.gap")
            return LayerStack.cavity(m, gap * length, mr)
        if kind == "layers":
            layers = _get(s, "layers", path, list)
            out = []
            for i, layer in enumerate(layers):
                p = f"{path}.layers[{i}]"
                if not isinstance(layer, dict):
                    raise ConfigError(f"{p}: expected {{material = ..., thickness = ...}}")
                m = _material(layer.get("material"), f"{p}.material", materials)
                if 0 < i < len(layers) - 1:
                    d = _positive(_get(layer, "thickness", p), f"{p}.thickness") * length
                else:
                    d = math.inf
                out.append(Layer(m, d))
            return LayerStack(tuple(out), _get(s, "atom_layer", path, int))
    except ValueError as e:
        raise ConfigError(f"{path}: {e}") from None
    raise ConfigError(f"{path}.kind: unknown stack kind {kind!r}")


SHIPPED_CONFIGS = Path(__file__).parent / "configs"


def resolve_config(path: str | Path) -> Path:
    """Return ``path``, or the shipped config of that name when ``path`` does not exist."""
    p = Path(path)
    if not p.exists() and p.parent == Path(".") and (SHIPPED_CONFIGS / p.name).is_file():
        return SHIPPED_CONFIGS / p.name
    return p


def load_config(path: str | Path) -> Config:
    try:
        with open(resolve_config(path), "rb") as fh:
            doc = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"{path}: file not found") from None
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"{path}: malformed TOML: {e}") from None
    return parse_config(doc)


def list_scenarios(path: str | Path) -> list[str]:
    return list(load_config(path).scenarios)


# scenario drivers

@dataclass
class RunOptions:
    rel_tol: float | None = None
    threads: int = 1
    eps_max: float | None = None
    variants: tuple[str, ...] | None = None


def _spec(sc: dict, path: str, opts: RunOptions) -> QuadratureSpec:
    tol = opts.rel_tol if opts.rel_tol is not None else sc.get("rel_tol", 1e-8)
    try:
        return QuadratureSpec(rel_tol=float(tol))
    except (TypeError, ValueError) as e:
        raise ConfigError(f"{path}.rel_tol: {e}") from None


def _ref(cfg_map: dict, key: str, sc: dict, path: str, label: str):
    name = _get(sc, key, path, str)
    if name not in cfg_map:
        raise ConfigError(f"{path}.{key}: unknown {label} {name!r}")
    return name, cfg_map[name]


def _stack_list(cfg: Config, sc: dict, path: str) -> list[tuple[str, LayerStack]]:
    if "stacks" in sc:
        names = _get(sc, "stacks", path, list)
        if not names:
            raise ConfigError(f"{path}.stacks: list must be non-empty")
    else:
        names = [_get(sc, "stack", path, str)]
    out = []
    for i, n in enumerate(names):
        if n not in cfg.stacks:
            raise ConfigError(f"{path}.stacks[{i}]: unknown stack {n!r}")
        out.append((n, cfg.stacks[n]))
    return out


def _material_list(cfg: Config, sc: dict, path: str) -> list[tuple[str, Material]]:
    names = sc.get("materials", [sc["material"]] if "material" in sc else None)
    if not names:
        raise ConfigError(f"{path}.materials: missing required key")
    return [(n, _material(n, f"{path}.materials[{i}]", cfg.materials)) for i, n in enumerate(names)]


def run_potential(cfg: Config, sc: dict, path: str, opts: RunOptions):
    _, atom = _ref(cfg.atoms, "atom", sc, path, "atom")
    stacks = _stack_list(cfg, sc, path)
    z = _grid(_get(sc, "z", path), f"{path}.z", cfg.length)
    spec = _spec(sc, path, opts)
    cols = [Column("z", (0, 1, 0))]
    curves = []
    flags = []
    for name, stack in stacks:
        try:
            curve = sample_curve(stack, atom, z, spec, True, opts.threads)
        except ValueError as e:
            raise ConfigError(f"{path}: stack {name!r}: {e}") from None
        curves.append(curve)
        cols += [Column(f"U[{name}]", (1, 0, 0)), Column(f"F[{name}]", (1, -1, 0))]
        flags += [f"{name}: z = {s.z:g} m not converged" for s in curve.samples if not s.converged]
    rows = []
    for i, zi in enumerate(z):
        row = [float(zi)]
        for curve in curves:
            s = curve.samples[i]
            row += [s.U, s.F]
        rows.append(row)
    meta = {"rel_tol": spec.rel_tol, "max_error": [float(np.max(cv.errors)) for cv in curves]}
    return Table(cols, rows, meta, flags), atom


def run_coeffs(cfg: Config, sc: dict, path: str, opts: RunOptions):
    _, atom = _ref(cfg.atoms, "atom", sc, path, "atom")
    mats = _material_list(cfg, sc, path)
    spec = _spec(sc, path, opts)
    d = sc.get("thickness")
    cols = [Column("material"), Column("C4", (1, 4, 0)), Column("C3", (1, 3, 0)), Column("C1", (1, 1, 0)),
            Column("z_max", (0, 1, 0)), Column("U_max", (1, 0, 0))]
    if d is not None:
        d = _positive(d, f"{path}.thickness") * cfg.length
        cols += [Column("D5", (1, 5, 0)), Column("D4", (1, 4, 0)), Column("D2", (1, 2, 0))]
    rows, flags = [], []
    for name, m in mats:
        hs = asym.half_space_asymptotics(m, atom, spec)
        if not hs.converged:
            flags.append(f"{name}: short-distance coefficients not converged")
        wall = asym.wall_geometry(hs.short_attractive, hs.short_repulsive)
        row = [name, hs.long, hs.short_attractive, hs.short_repulsive, wall.z_max, wall.U_max]
        if d is not None:
            row += list(asym.d5_d4_d2(m, atom, d, spec))
        rows.append(row)
    return Table(cols, rows, {"rel_tol": spec.rel_tol}, flags), atom


def run_border(cfg: Config, sc: dict, path: str, opts: RunOptions):
    raw = _get(sc, "eps", path)
    if opts.eps_max is not None:
        if isinstance(raw, dict):
            raw = dict(raw, stop=opts.eps_max)
        elif isinstance(raw, list):
            raw = [v for v in raw if isinstance(v, (int, float)) and v <= opts.eps_max]
    eps = _grid(raw, f"{path}.eps")
    if eps[0] < 1:
        raise ConfigError(f"{path}.eps: eps(0) must be >= 1")
    mu_max = _positive(sc.get("mu_max", 1e4), f"{path}.mu_max")
    pts = asym.border_curve(eps, QuadratureSpec(rel_tol=opts.rel_tol or 1e-12), mu_max)
    cols = [Column("eps0"), Column("mu0"), Column("mu0_weak"), Column("mu0_strong")]
    rows = [[p.eps0, p.mu0, p.mu0_weak, p.mu0_strong] for p in pts]
    flags = [f"eps0 = {p.eps0:g}: no border below mu0 = {mu_max:g}" for p in pts if not p.converged]
    meta = {"weak_ratio": asym.weak_border_ratio(), "strong_impedance": asym.strong_border_impedance()}
    return Table(cols, rows, meta, flags), None


def run_wall(cfg: Config, sc: dict, path: str, opts: RunOptions):
    _, atom = _ref(cfg.atoms, "atom", sc, path, "atom")
    stacks = _stack_list(cfg, sc, path)
    band = _band(_get(sc, "z_band", path), f"{path}.z_band", cfg.length)
    spec = _spec(sc, path, opts)
    cols = [Column("stack"), Column("z_max", (0, 1, 0)), Column("U_max", (1, 0, 0)),
            Column("z_max_short", (0, 1, 0)), Column("U_max_short", (1, 0, 0))]
    rows = []
    for name, stack in stacks:
        if not stack.is_outer:
            raise ConfigError(f"{path}: stack {name!r} must hold the atom in an outer layer")
        wall = asym.wall_maximum(stack, atom, band, spec)
        inner = stack.layers[0 if stack.atom_layer == stack.n else -1]
        short = asym.NO_WALL
        if stack.n == 1:
            short = asym.wall_geometry(*asym.c3_c1(inner.material, atom, spec))
        rows.append([name, wall.z_max, wall.U_max, short.z_max, short.U_max])
    return Table(cols, rows, {"rel_tol": spec.rel_tol}), atom


def run_thickness(cfg: Config, sc: dict, path: str, opts: RunOptions):
    _, atom = _ref(cfg.atoms, "atom", sc, path, "atom")
    m = _material(_get(sc, "material", path, str), f"{path}.material", cfg.materials)
    zb = _band(_get(sc, "z_band", path), f"{path}.z_band", cfg.length)
    db = _band(_get(sc, "d_band", path), f"{path}.d_band", cfg.length)
    n_scan = _get(sc, "n_scan", path, int, 9)
    if n_scan < 3:
        raise ConfigError(f"{path}.n_scan: need at least 3 scan points")
    spec = _spec(sc, path, opts)
    opt = asym.optimal_thickness(m, atom, zb, db, spec, n_scan=n_scan)
    cols = [Column("d", (0, 1, 0)), Column("U_max", (1, 0, 0)), Column("optimum")]
    rows = [[d, h if math.isfinite(h) else math.nan, 0] for d, h in opt.scanned]
    rows.append([opt.d, opt.wall.U_max, 1])
    meta = {"d_opt": opt.d, "z_max_opt": opt.wall.z_max, "U_max_opt": opt.wall.U_max}
    return Table(cols, rows, meta), atom


def run_dynamics(cfg: Config, sc: dict, path: str, opts: RunOptions):
    _, atom = _ref(cfg.atoms, "atom", sc, path, "atom")
    m = _material(_get(sc, "material", path, str), f"{path}.material", cfg.materials)
    z = _positive(_get(sc, "z", path), f"{path}.z") * cfg.length
    spec = _spec(sc, path, opts)
    mode = _get(sc, "mode", path, str, "profile")
    d2 = atom.transitions[0].dipole_sq
    if mode == "profile":
        grid = _grid(_get(sc, "omega10", path), f"{path}.omega10", cfg.frequency)
        variants = opts.variants or tuple(_get(sc, "variants", path, list, list(dyn.VARIANTS)))
        for i, v in enumerate(variants):
            if v not in dyn.VARIANTS:
                raise ConfigError(f"{path}.variants[{i}]: unknown variant {v!r}")
        cols = [Column("omega10", (0, 0, 1))] + [Column(f"F1r[{v}]", (1, -1, 0)) for v in variants]
        spectra = {}
        flags = []
        for w10 in grid:
            a = Atom((Transition(float(w10), d2),))
            if {"full", "shift-only"} & set(variants):
                s = dyn.self_consistent_spectrum(a, m, z, spec)
                if not s.converged:
                    flags.append(f"omega10 = {w10:g} rad/s: spectrum not converged")
                spectra[float(w10)] = s
        rows = []
        for w10 in grid:
            w10 = float(w10)
            a = Atom((Transition(w10, d2),))
            row = [w10]
            for v in variants:
                if v == "perturbative":
                    s = dyn.DynamicSpectrum.bare(w10)
                elif v == "broadening-only":
                    s = dyn.DynamicSpectrum.bare(w10).with_width(dyn.level_width(a, m, z, w10, spec))
                else:
                    s = dyn.spectrum_variant(spectra[w10], v)
                row.append(dyn.resonant_force_nearfield(a, m, s, z))
            rows.append(row)
        meta = {"z": z, "iterations": [spectra[k].iterations for k in sorted(spectra)]}
        return Table(cols, rows, meta, flags), atom
    if mode == "trajectory":
        t = _grid(_get(sc, "t", path), f"{path}.t", 1.0 / cfg.frequency)
        tt, force, s = dyn.force_trajectory(atom, m, z, t, spec)
        occ = dyn.population_dynamics(1, s, tt)
        cols = [Column("t", (0, 0, -1)), Column("sigma11"), Column("F", (1, -1, 0))]
        rows = [[float(a), float(b), float(f)] for a, b, f in zip(tt, occ.level(1), force)]
        meta = {"omega_shifted": s.omega_shifted, "widths": list(s.widths), "shifts": list(s.shifts),
                "iterations": s.iterations, "converged": s.converged}
        flags = [] if s.converged else ["spectrum not converged"]
        return Table(cols, rows, meta, flags), atom
    raise ConfigError(f"{path}.mode: expected 'profile' or 'trajectory', got {mode!r}")


DRIVERS = {
    "potential": run_potential,
    "cavity": run_potential,
    "coeffs": run_coeffs,
    "border": run_border,
    "wall": run_wall,
    "thickness-opt": run_thickness,
    "dynamics": run_dynamics,
}


def run_scenario(cfg: Config, name: str, opts: RunOptions | None = None) -> tuple[Table, Atom | None]:
    opts = opts or RunOptions()
    if name not in cfg.scenarios:
        raise ConfigError(f"scenarios.{name}: no such scenario (available: {', '.join(cfg.scenarios) or 'none'})")
    sc = cfg.scenarios[name]
    path = f"scenarios.{name}"
    table, atom = DRIVERS[sc["kind"]](cfg, sc, path, opts)
    table.meta = {"scenario": name, "kind": sc["kind"], "units_frequency": cfg.frequency, **table.meta}
    return table, atom


def render(table: Table, atom: Atom | None, fmt: str, normalize: str) -> str:
    mode = normalize if atom is not None else "si"
    scaled = table.scaled(mode, atom)
    if fmt == "json":
        scaled = Table(scaled.columns, scaled.rows, dict(scaled.meta, normalization=mode), scaled.flags)
        return scaled.to_json(mode)
    return scaled.to_csv(mode)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cpforge", description="Casimir-Polder potentials and forces in planar multilayers.")
    sub = p.add_subparsers(dest="command", required=True)
    ls = sub.add_parser("list", help="list the scenarios of a config file")
    ls.add_argument("config")
    run = sub.add_parser("run", help="run one scenario")
    run.add_argument("config")
    run.add_argument("scenario")
    run.add_argument("--rel-tol", type=float, default=None, help="override the quadrature tolerance")
    run.add_argument("--out", default=None, help="output file (default stdout)")
    run.add_argument("--format", choices=("csv", "json"), default="csv")
    run.add_argument("--normalize", choices=("si", "dimensionless"), default="dimensionless")
    run.add_argument("--allow-flags", action="store_true", help="exit 0 even if results are flagged")
    run.add_argument("--threads", type=int, default=1)
    run.add_argument("--eps-max", type=float, default=None, help="upper end of the border eps(0) grid")
    run.add_argument("--variants", default=None, help="comma-separated dynamics profile variants")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "list":
            for name in list_scenarios(args.config):
                print(name)
            return EXIT_OK
        if args.rel_tol is not None and not 0 < args.rel_tol < 1:
            raise ConfigError(f"--rel-tol: must be in (0, 1), got {args.rel_tol}")
        if args.threads < 1:
            raise ConfigError("--threads: must be >= 1")
        variants = tuple(v.strip() for v in args.variants.split(",")) if args.variants else None
        opts = RunOptions(args.rel_tol, args.threads, args.eps_max, variants)
        cfg = load_config(args.config)
        table, atom = run_scenario(cfg, args.scenario, opts)
    except ConfigError as e:
        print(f"cpforge: config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    text = render(table, atom, args.format, args.normalize)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    if table.flags:
        for f in table.flags:
            print(f"cpforge: flagged: {f}", file=sys.stderr)
        if not args.allow_flags:
            return EXIT_FLAGGED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
