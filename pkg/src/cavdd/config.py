"""Run configuration: TOML schema, validation, canonical serialization, presets.

A config is a single TOML file.  Unknown keys are rejected with the full key
path, since silent typos are the dominant user error in physics configs.
Serialization is canonical (fixed key order, repr floats) so identical
configs hash identically and round-trip exactly.
"""

from __future__ import annotations

import hashlib
import sys
from dataclasses import dataclass

if sys.version_info >= (3, 11):
    import tomllib as _toml
else:
    import tomli as _toml

import numpy as np

from .core import CavityGeometry, Constants, Dipole, EwaldParams, ValidationError


class ConfigError(ValidationError):
    """Configuration rejected; message names the field and the constraint."""


SWEEP_VARIABLES = ("separation", "offset", "frequency")
AXES = ("x", "y", "z")
LEVEL_UNITS = ("frequency", "energy")

DATA_COLUMNS = (
    "u", "v", "a", "b", "class", "omega_21", "omega_12", "V21", "V12", "Vsym",
    "V21_image", "V21_mode", "V12_image", "V12_mode", "tail_21", "tail_12",
    "V0_free", "Vw_free", "status",
)

TERM_CLASSES = ("permanent", "permanent-transition", "resonant", "co-rotating",
                "counter-rotating")


@dataclass(frozen=True)
class ConstantsSpec:
    c: float = 1.0
    mu0: float = 1.0
    hbar: float = 1.0

    def build(self) -> Constants:
        return Constants(c=self.c, mu0=self.mu0, hbar=self.hbar)


@dataclass(frozen=True)
class GeometrySpec:
    Lx: float
    Ly: float
    Lz: float

    def build(self) -> CavityGeometry:
        return CavityGeometry(Lx=self.Lx, Ly=self.Ly, Lz=self.Lz)


@dataclass(frozen=True)
class DipoleSpec:
    position: tuple
    levels: tuple
    level_unit: str = "frequency"
    moments: tuple = ()  # sorted ((u, v), (mx, my, mz)) pairs, Hermitian-completed

    def build(self, constants: Constants) -> Dipole:
        n = len(self.levels)
        if self.level_unit == "frequency":
            energies = tuple(constants.hbar * w for w in self.levels)
        else:
            energies = self.levels
        mom = np.zeros((n, n, 3))
        for (u, v), vec in self.moments:
            mom[u, v] = vec
        return Dipole(position=np.array(self.position), energies=np.array(energies),
                      moments=mom)


@dataclass(frozen=True)
class EwaldSpec:
    Kc: float | None = None
    image_range: int | None = None
    mode_cutoff: float | None = None
    resonance_tol: float | None = None
    target_tail: float = 1e-12

    def build(self) -> EwaldParams:
        return EwaldParams(Kc=self.Kc, image_range=self.image_range,
                           mode_cutoff=self.mode_cutoff,
                           resonance_tol=self.resonance_tol,
                           target_tail=self.target_tail)


@dataclass(frozen=True)
class SweepSpec:
    variable: str
    start: float
    stop: float
    samples: int
    axis: str = "x"

    def values(self):
        return np.linspace(self.start, self.stop, self.samples)

    @property
    def column(self):
        return {"separation": "R", "offset": "d", "frequency": "omega"}[self.variable]


@dataclass(frozen=True)
class OutputSpec:
    csv: str | None = None
    columns: tuple = ()   # empty = all data columns
    classes: tuple = ()   # empty = all term classes
    workers: int = 1


@dataclass(frozen=True)
class RunConfig:
    constants: ConstantsSpec = ConstantsSpec()
    geometry: GeometrySpec | None = None
    dipoles: tuple = ()
    ewald: EwaldSpec = EwaldSpec()
    sweep: SweepSpec | None = None
    output: OutputSpec = OutputSpec()


def _need(table, key, path, types, constraint=""):
    if key not in table:
        raise ConfigError(f"{path}.{key}: required key missing{'; ' + constraint if constraint else ''}")
    return _typed(table[key], f"{path}.{key}", types, constraint)


def _typed(value, path, types, constraint=""):
    if types is float and isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    if not isinstance(value, types if isinstance(types, tuple) else (types,)) or isinstance(value, bool):
        raise ConfigError(f"{path}: expected {getattr(types, '__name__', types)}"
                          f"{'; ' + constraint if constraint else ''}, got {value!r}")
    return value


def _reject_unknown(table, known, path):
    for key in table:
        if key not in known:
            raise ConfigError(f"{path}.{key}: unknown key (known keys: {', '.join(sorted(known))})")


def _vec(value, path):
    if not (isinstance(value, list) and len(value) == 3):
        raise ConfigError(f"{path}: expected a 3-element array")
    return tuple(float(_typed(v, f"{path}[{i}]", (int, float))) for i, v in enumerate(value))


def _parse_moments(table, n_levels, path):
    given = {}
    for key, vec in table.items():
        parts = key.split(",")
        if len(parts) != 2:
            raise ConfigError(f'{path}."{key}": moment keys must look like "u,v"')
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise ConfigError(f'{path}."{key}": moment keys must be integer pairs "u,v"')
        if not (0 <= u < n_levels and 0 <= v < n_levels):
            raise ConfigError(f'{path}."{key}": level index out of range for '
                              f"{n_levels} levels")
        given[(u, v)] = _vec(vec, f'{path}."{key}"')
    out = dict(given)
    for (u, v), vec in given.items():
        rev = (v, u)
        if rev in given:
            if given[rev] != vec:
                raise ConfigError(f'{path}: moments "{u},{v}" and "{v},{u}" must match '
                                  "(real moment matrices are symmetric)")
        else:
            out[rev] = vec
    return tuple(sorted(out.items()))


def _parse_dipole(table, idx):
    path = f"dipoles[{idx}]"
    _reject_unknown(table, {"position", "levels", "level_unit", "moments"}, path)
    position = _vec(_need(table, "position", path, list), f"{path}.position")
    levels_raw = _need(table, "levels", path, list, "list of level values")
    if not levels_raw:
        raise ConfigError(f"{path}.levels: at least one level required")
    levels = tuple(float(_typed(x, f"{path}.levels[{i}]", (int, float)))
                   for i, x in enumerate(levels_raw))
    if any(levels[i + 1] < levels[i] for i in range(len(levels) - 1)):
        raise ConfigError(f"{path}.levels: must be sorted non-decreasing")
    unit = table.get("level_unit", "frequency")
    if unit not in LEVEL_UNITS:
        raise ConfigError(f"{path}.level_unit: must be one of {LEVEL_UNITS}, got {unit!r}")
    moments = _parse_moments(_typed(table.get("moments", {}), f"{path}.moments", dict),
                             len(levels), f"{path}.moments")
    return DipoleSpec(position=position, levels=levels, level_unit=unit, moments=moments)


def parse_config(text: str) -> RunConfig:
    try:
        raw = _toml.loads(text)
    except _toml.TOMLDecodeError as err:
        raise ConfigError(f"config is not valid TOML: {err}")
    _reject_unknown(raw, {"constants", "geometry", "dipoles", "ewald", "sweep", "output"},
                    "config")

    const_tbl = _typed(raw.get("constants", {}), "constants", dict)
    _reject_unknown(const_tbl, {"c", "mu0", "hbar"}, "constants")
    constants = ConstantsSpec(
        c=float(_typed(const_tbl.get("c", 1.0), "constants.c", float, "> 0")),
        mu0=float(_typed(const_tbl.get("mu0", 1.0), "constants.mu0", float, "> 0")),
        hbar=float(_typed(const_tbl.get("hbar", 1.0), "constants.hbar", float, "> 0")),
    )
    for name in ("c", "mu0", "hbar"):
        if getattr(constants, name) <= 0:
            raise ConfigError(f"constants.{name}: must be > 0")

    geometry = None
    if "geometry" in raw:
        gt = _typed(raw["geometry"], "geometry", dict)
        _reject_unknown(gt, {"Lx", "Ly", "Lz"}, "geometry")
        geometry = GeometrySpec(
            Lx=float(_need(gt, "Lx", "geometry", float, "> 0")),
            Ly=float(_need(gt, "Ly", "geometry", float, "> 0")),
            Lz=float(_need(gt, "Lz", "geometry", float, "> 0")),
        )
        for name in ("Lx", "Ly", "Lz"):
            if getattr(geometry, name) <= 0:
                raise ConfigError(f"geometry.{name}: must be > 0")

    dip_raw = raw.get("dipoles", [])
    if not (isinstance(dip_raw, list) and len(dip_raw) == 2):
        raise ConfigError("dipoles: exactly two [[dipoles]] tables are required")
    dipoles = tuple(_parse_dipole(_typed(t, f"dipoles[{i}]", dict), i)
                    for i, t in enumerate(dip_raw))

    ew_tbl = _typed(raw.get("ewald", {}), "ewald", dict)
    _reject_unknown(ew_tbl, {"Kc", "image_range", "mode_cutoff", "resonance_tol",
                             "target_tail"}, "ewald")
    ewald = EwaldSpec(
        Kc=None if "Kc" not in ew_tbl else float(_typed(ew_tbl["Kc"], "ewald.Kc", float, "> 0")),
        image_range=None if "image_range" not in ew_tbl
        else _typed(ew_tbl["image_range"], "ewald.image_range", int, ">= 0"),
        mode_cutoff=None if "mode_cutoff" not in ew_tbl
        else float(_typed(ew_tbl["mode_cutoff"], "ewald.mode_cutoff", float, "> 0")),
        resonance_tol=None if "resonance_tol" not in ew_tbl
        else float(_typed(ew_tbl["resonance_tol"], "ewald.resonance_tol", float, "> 0")),
        target_tail=float(_typed(ew_tbl.get("target_tail", 1e-12), "ewald.target_tail",
                                 float, "> 0")),
    )
    try:
        ewald.build()
    except ValidationError as err:
        raise ConfigError(f"ewald: {err}")

    sweep = None
    if "sweep" in raw:
        st = _typed(raw["sweep"], "sweep", dict)
        _reject_unknown(st, {"variable", "axis", "start", "stop", "samples"}, "sweep")
        variable = _need(st, "variable", "sweep", str, f"one of {SWEEP_VARIABLES}")
        if variable not in SWEEP_VARIABLES:
            raise ConfigError(f"sweep.variable: must be one of {SWEEP_VARIABLES}, got {variable!r}")
        axis = st.get("axis", "x")
        if axis not in AXES:
            raise ConfigError(f"sweep.axis: must be one of {AXES}, got {axis!r}")
        start = float(_need(st, "start", "sweep", float))
        stop = float(_need(st, "stop", "sweep", float))
        samples = _need(st, "samples", "sweep", int, ">= 2")
        if samples < 2:
            raise ConfigError("sweep.samples: must be >= 2")
        if not stop > start:
            raise ConfigError("sweep.stop: must exceed sweep.start (positive-length range)")
        sweep = SweepSpec(variable=variable, axis=axis, start=start, stop=stop,
                          samples=samples)

    out_tbl = _typed(raw.get("output", {}), "output", dict)
    _reject_unknown(out_tbl, {"csv", "columns", "classes", "workers"}, "output")
    columns = tuple(out_tbl.get("columns", []))
    for c in columns:
        if c not in DATA_COLUMNS:
            raise ConfigError(f"output.columns: unknown column {c!r} "
                              f"(known: {', '.join(DATA_COLUMNS)})")
    classes = tuple(out_tbl.get("classes", []))
    for c in classes:
        if c not in TERM_CLASSES:
            raise ConfigError(f"output.classes: unknown term class {c!r} "
                              f"(known: {', '.join(TERM_CLASSES)})")
    workers = _typed(out_tbl.get("workers", 1), "output.workers", int, ">= 1")
    if workers < 1:
        raise ConfigError("output.workers: must be >= 1")
    output = OutputSpec(csv=out_tbl.get("csv"), columns=columns, classes=classes,
                        workers=workers)

    cfg = RunConfig(constants=constants, geometry=geometry, dipoles=dipoles, ewald=ewald,
                    sweep=sweep, output=output)
    _validate_semantics(cfg)
    return cfg


def _validate_semantics(cfg: RunConfig):
    constants = cfg.constants.build()
    geom = cfg.geometry.build() if cfg.geometry else None
    for i, spec in enumerate(cfg.dipoles):
        try:
            d = spec.build(constants)
        except ValidationError as err:
            raise ConfigError(f"dipoles[{i}]: {err}")
        if geom is not None and not geom.contains(d.position):
            raise ConfigError(f"dipoles[{i}].position: outside the cavity box")
    if cfg.sweep is not None:
        if cfg.sweep.variable == "frequency":
            lv = cfg.dipoles[0].levels
            if lv[-1] - lv[0] <= 0:
                raise ConfigError("sweep.variable = frequency requires dipole 0 to have "
                                  "a nonzero level span to scale")
            if cfg.sweep.start <= 0:
                raise ConfigError("sweep.start: frequency sweeps must stay positive")
        if cfg.sweep.variable in ("separation", "offset") and geom is None:
            # free-space position sweeps are fine; nothing to validate here
            pass


def _fmt_toml_value(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        r = repr(v)
        return r if ("e" in r or "." in r or "inf" in r or "nan" in r) else r + ".0"
    if isinstance(v, str):
        return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_fmt_toml_value(x) for x in v) + "]"
    raise TypeError(f"cannot serialize {v!r}")


def serialize_config(cfg: RunConfig) -> str:
    """Canonical TOML text; parse(serialize(cfg)) == cfg."""
    lines = []
    lines.append("[constants]")
    for k in ("c", "mu0", "hbar"):
        lines.append(f"{k} = {_fmt_toml_value(getattr(cfg.constants, k))}")
    if cfg.geometry is not None:
        lines.append("")
        lines.append("[geometry]")
        for k in ("Lx", "Ly", "Lz"):
            lines.append(f"{k} = {_fmt_toml_value(getattr(cfg.geometry, k))}")
    for d in cfg.dipoles:
        lines.append("")
        lines.append("[[dipoles]]")
        lines.append(f"position = {_fmt_toml_value(list(d.position))}")
        lines.append(f"levels = {_fmt_toml_value(list(d.levels))}")
        lines.append(f"level_unit = {_fmt_toml_value(d.level_unit)}")
        if d.moments:
            lines.append("[dipoles.moments]")
            for (u, v), vec in d.moments:
                lines.append(f'"{u},{v}" = {_fmt_toml_value(list(vec))}')
    ew = cfg.ewald
    ew_items = [(k, getattr(ew, k)) for k in ("Kc", "image_range", "mode_cutoff",
                                              "resonance_tol")]
    ew_items = [(k, v) for k, v in ew_items if v is not None]
    ew_items.append(("target_tail", ew.target_tail))
    lines.append("")
    lines.append("[ewald]")
    for k, v in ew_items:
        lines.append(f"{k} = {_fmt_toml_value(v)}")
    if cfg.sweep is not None:
        lines.append("")
        lines.append("[sweep]")
        lines.append(f"variable = {_fmt_toml_value(cfg.sweep.variable)}")
        lines.append(f"axis = {_fmt_toml_value(cfg.sweep.axis)}")
        for k in ("start", "stop"):
            lines.append(f"{k} = {_fmt_toml_value(getattr(cfg.sweep, k))}")
        lines.append(f"samples = {cfg.sweep.samples}")
    lines.append("")
    lines.append("[output]")
    if cfg.output.csv is not None:
        lines.append(f"csv = {_fmt_toml_value(cfg.output.csv)}")
    if cfg.output.columns:
        lines.append(f"columns = {_fmt_toml_value(list(cfg.output.columns))}")
    if cfg.output.classes:
        lines.append(f"classes = {_fmt_toml_value(list(cfg.output.classes))}")
    lines.append(f"workers = {cfg.output.workers}")
    return "\n".join(lines) + "\n"


def config_hash(cfg: RunConfig) -> str:
    return hashlib.sha256(serialize_config(cfg).encode("utf-8")).hexdigest()


def load_config(path) -> RunConfig:
    with open(path, "rb") as fh:
        return parse_config(fh.read().decode("utf-8"))


# ---------------------------------------------------------------------------
# Embedded figure presets.  Header comments echo the scenario parameters.

def _fig_sweep_preset(name, r1, m1, m2, comment, sweep_lines):
    m1s = ", ".join(repr(float(x)) for x in m1)
    m2s = ", ".join(repr(float(x)) for x in m2)
    return f"""# preset {name}: {comment}
# cube Lx = Ly = Lz = L = 1, transition frequency omega/c = 20 / L

[geometry]
Lx = 1.0
Ly = 1.0
Lz = 1.0

[[dipoles]]
position = [{r1[0]!r}, {r1[1]!r}, {r1[2]!r}]
levels = [0.0, 20.0]
level_unit = "frequency"
[dipoles.moments]
"0,1" = [{m1s}]

[[dipoles]]
position = [{r1[0] + 0.1!r}, {r1[1]!r}, {r1[2]!r}]
levels = [0.0, 20.0]
level_unit = "frequency"
[dipoles.moments]
"0,1" = [{m2s}]

[sweep]
{sweep_lines}

[output]
csv = "{name}.csv"
"""


_SEP_SWEEP = """variable = "separation"
axis = "x"
start = 0.005
stop = 0.495
samples = 99"""

_OFFSET_SWEEP = """variable = "offset"
axis = "z"
start = 0.005
stop = 0.995
samples = 100"""

EZ = (0.0, 0.0, 1.0)
EX = (1.0, 0.0, 0.0)

PRESETS = {
    "fig2a": _fig_sweep_preset(
        "fig2a", (0.5, 0.5, 0.5), EZ, EZ,
        "dipole-1 in the box center, dipole-2 at r1 + R ex, both moments along z; "
        "2<-1 strength vs R in (0, L/2)", _SEP_SWEEP),
    "fig2b": _fig_sweep_preset(
        "fig2b", (0.5, 0.5, 0.5), EZ, EZ,
        "same placement as fig2a; read the V12 column for the 1<-2 direction",
        _SEP_SWEEP),
    "fig2c": _fig_sweep_preset(
        "fig2c", (0.5, 0.5, 0.01), EZ, EZ,
        "dipoles placed near the bottom wall (z = 0.01 L), moments along z",
        _SEP_SWEEP),
    "fig2d": _fig_sweep_preset(
        "fig2d", (0.5, 0.5, 0.5), EX, EX,
        "dipole-1 in the box center, both moments along x", _SEP_SWEEP),
    "fig2e": _fig_sweep_preset(
        "fig2e", (0.5, 0.5, 0.01), EX, EX,
        "dipoles near the bottom wall (z = 0.01 L), both moments along x",
        _SEP_SWEEP),
    "fig2f": _fig_sweep_preset(
        "fig2f", (0.5, 0.5, 0.5), EZ, EZ,
        "fixed separation R = 0.1 L along x; both dipoles move bottom to top, "
        "r1 = (0.5 L, 0.5 L, d) with d in (0, Lz); moments along z",
        _OFFSET_SWEEP),
    "fig2g": _fig_sweep_preset(
        "fig2g", (0.5, 0.5, 0.5), EZ, EX,
        "as fig2f but dipole-2 oriented along x", _OFFSET_SWEEP),
}


def preset_config(name: str) -> RunConfig:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r} (available: {', '.join(sorted(PRESETS))})")
    return parse_config(PRESETS[name])
