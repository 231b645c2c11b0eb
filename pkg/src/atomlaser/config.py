"""Experiment configuration files.

Configs are INI files with the sections ``[physics]``, ``[trap]``, ``[run]``,
``[solver]``, ``[compare]``, ``[sweep]`` and ``[output]``. Angular
frequencies must carry a unit: ``Hz``/``kHz`` (multiplied by 2 pi) or
``rad/s``, ``1/s``, ``s^-1`` (taken as angular). A run manifest written by
:mod:`atomlaser.runner` is also accepted in place of an INI file.
"""

from __future__ import annotations

import configparser
import json
import math
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from .errors import AtomLaserError, ConfigError
from .units import ATOMIC_MASS, BOHR_RADIUS, HBAR, PhysicalParams, TrapCoupling

MODES = ("analytic-3d", "analytic-1d", "gpe-1d", "compare", "sweep", "chirp")

# section -> key -> default (None: no default)
SCHEMA: Dict[str, Dict[str, Optional[str]]] = {
    "physics": {
        "mass_u": "22.9897692820",
        "scatter_len_bohr": "53",
        "interaction_u1": "matched",
    },
    "trap": {
        "omega_t": None,
        "detuning0": None,
        "rabi": None,
        "v_off": "0",
        "b_field_amp": "",
        "g_factor": "-0.5",
    },
    "run": {
        "mode": "analytic-3d",
        "n_atoms": None,
        "method": "implicit",
        "dimension": "3d",
        "t_end": "auto",
        "dt": "auto",
    },
    "solver": {
        "t_end": "",
        "dt": "auto",
        "n_points": "4096",
        "half_width_tf": "8",
        "components": "2",
        "absorber_width_tf": "2",
        "absorber_strength": "2e4 rad/s",
        "detector_tf": "4",
        "n_records": "400",
        "snapshot_times": "",
        "ground_state": "imaginary-time",
    },
    "compare": {
        "transient": "auto",
        "threshold": "0.05",
    },
    "sweep": {
        "parameter": "",
        "values": "",
        "mode": "analytic-3d",
        "jobs": "1",
    },
    "output": {
        "directory": "",
    },
}

# trap.rabi may be replaced by trap.b_field_amp
REQUIRED = [("trap", "omega_t"), ("trap", "detuning0"), ("trap", "rabi"), ("run", "n_atoms")]

_CYCLIC = {"hz": 1.0, "khz": 1e3, "mhz": 1e6}
_ANGULAR = {"rad/s": 1.0, "1/s": 1.0, "s^-1": 1.0, "s-1": 1.0}
_NUMBER = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"
_FREQ_RE = re.compile(rf"^\s*(?:2\s*\*?\s*pi\s*\*\s*)?({_NUMBER})\s*([A-Za-z/^\-1]+)\s*$", re.IGNORECASE)


def parse_frequency(text: str, name: str) -> float:
    """Angular frequency (rad/s) from ``"106 Hz"``, ``"3500 rad/s"`` or ``"20 1/s"``."""
    m = _FREQ_RE.match(text)
    if not m:
        raise ConfigError(f"{name}: expected a number with a unit (Hz or rad/s), got {text!r}")
    value = float(m.group(1))
    unit = m.group(2).lower()
    if unit in _CYCLIC:
        if text.lower().lstrip().startswith("2"):
            if "pi" in text.lower():
                raise ConfigError(f"{name}: write cyclic frequencies as plain Hz, got {text!r}")
        return 2.0 * math.pi * value * _CYCLIC[unit]
    if unit in _ANGULAR:
        if "pi" in text.lower():
            raise ConfigError(f"{name}: 2*pi prefix only makes sense with Hz, got {text!r}")
        return value * _ANGULAR[unit]
    raise ConfigError(f"{name}: unknown frequency unit {m.group(2)!r}; use Hz, kHz or rad/s")


def _float(text: str, name: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ConfigError(f"{name}: expected a number, got {text!r}") from None
    if not math.isfinite(value):
        raise ConfigError(f"{name}: must be finite")
    return value


def _positive(text, name):
    value = _float(text, name)
    if value <= 0:
        raise ConfigError(f"{name}: must be positive, got {value!r}")
    return value


def _optional(text: str) -> bool:
    return text.strip().lower() not in ("", "auto", "none")


@dataclass(frozen=True)
class SolverSettings:
    t_end: Optional[float]
    dt: Optional[float]
    n_points: int
    half_width_tf: float
    components: int
    absorber_width_tf: float
    absorber_strength: float  # J
    detector_tf: float
    n_records: int
    snapshot_times: Tuple[float, ...]
    ground_state: str


@dataclass
class ExperimentConfig:
    phys: PhysicalParams
    trap: TrapCoupling
    n_atoms: float
    mode: str
    method: str
    dimension: str
    t_end: Optional[float]
    dt: Optional[float]
    solver: SolverSettings
    transient: Optional[float]
    threshold: float
    sweep_parameter: str
    sweep_values: List[str]
    sweep_mode: str
    jobs: int
    output_dir: str
    sections: Dict[str, Dict[str, str]] = field(default_factory=dict)
    source: str = ""

    def with_mode(self, mode: str, dimension: Optional[str] = None) -> "ExperimentConfig":
        sections = {s: dict(v) for s, v in self.sections.items()}
        sections["run"]["mode"] = mode
        if dimension is not None:
            sections["run"]["dimension"] = dimension
        return config_from_sections(sections, self.source)

    def with_value(self, dotted: str, value: str) -> "ExperimentConfig":
        section, _, key = dotted.lower().partition(".")
        if section not in SCHEMA or key not in SCHEMA[section]:
            raise ConfigError(f"unknown parameter {dotted!r}")
        sections = {s: dict(v) for s, v in self.sections.items()}
        sections[section][key] = value
        return config_from_sections(sections, self.source)


def _read_ini(text: str, source: str) -> Dict[str, Dict[str, str]]:
    parser = configparser.ConfigParser(
        interpolation=None, inline_comment_prefixes=("#", ";"), comment_prefixes=("#", ";")
    )
    try:
        parser.read_string(text, source=source)
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError(f"{source}: line {exc.lineno}: key outside of any [section]") from None
    except configparser.DuplicateOptionError as exc:
        raise ConfigError(f"{source}: line {exc.lineno}: duplicate key {exc.option!r}") from None
    except configparser.DuplicateSectionError as exc:
        raise ConfigError(f"{source}: line {exc.lineno}: duplicate section {exc.section!r}") from None
    except configparser.ParsingError as exc:
        lines = ", ".join(str(lineno) for lineno, _ in exc.errors)
        raise ConfigError(f"{source}: parse error on line(s) {lines}") from None
    return {s: dict(parser.items(s)) for s in parser.sections()}


def config_from_sections(raw: Dict[str, Dict[str, str]], source: str = "<config>") -> ExperimentConfig:
    """Validate raw section/key strings and apply defaults."""
    unknown = []
    for section, items in raw.items():
        if section not in SCHEMA:
            unknown.append(f"[{section}]")
            continue
        unknown += [f"{section}.{k}" for k in items if k not in SCHEMA[section]]
    if unknown:
        raise ConfigError(f"{source}: unknown keys: {', '.join(unknown)}")

    sections = {s: {k: (raw.get(s, {}).get(k, d) or "") for k, d in keys.items()} for s, keys in SCHEMA.items()}
    missing = []
    for s, k in REQUIRED:
        if s == "trap" and k == "rabi":
            if not sections[s][k].strip() and not sections[s]["b_field_amp"].strip():
                missing.append("trap.rabi")
        elif not sections[s][k].strip():
            missing.append(f"{s}.{k}")
    if missing:
        raise ConfigError(f"{source}: missing required fields: {', '.join(missing)}")

    try:
        return _build(sections, source)
    except ConfigError:
        raise
    except AtomLaserError as exc:
        raise ConfigError(f"{source}: {exc}") from None


def _build(sections, source) -> ExperimentConfig:
    ph, tr, rn, so, co, sw = (sections[k] for k in ("physics", "trap", "run", "solver", "compare", "sweep"))

    mode = rn["mode"].strip().lower()
    if mode not in MODES:
        raise ConfigError(f"run.mode: must be one of {', '.join(MODES)}, got {mode!r}")
    method = rn["method"].strip().lower()
    if method not in ("ode-rk4", "implicit"):
        raise ConfigError(f"run.method: must be ode-rk4 or implicit, got {method!r}")

    dimension = rn["dimension"].strip().lower()
    if dimension not in ("1d", "3d"):
        raise ConfigError(f"run.dimension: must be 1d or 3d, got {dimension!r}")
    if mode.startswith("analytic-"):
        dimension = mode[-2:]

    n_atoms = _positive(rn["n_atoms"], "run.n_atoms")
    rabi = parse_frequency(tr["rabi"], "trap.rabi") if tr["rabi"].strip() else None
    if rabi is not None and rabi < 0:
        raise ConfigError(f"trap.rabi: must be >= 0, got {rabi!r}")
    b_field = _float(tr["b_field_amp"], "trap.b_field_amp") if tr["b_field_amp"].strip() else None
    trap = TrapCoupling(
        omega_T=_positive_freq(tr["omega_t"], "trap.omega_T"),
        detuning0=parse_frequency(tr["detuning0"], "trap.detuning0"),
        rabi=rabi,
        V_off=_float(tr["v_off"], "trap.V_off"),
        b_field_amp=b_field,
        g_factor=_float(tr["g_factor"], "trap.g_factor") if b_field is not None else None,
    )
    if trap.rabi is not None and trap.b_field_amp is not None:
        trap = trap.with_changes(rabi=trap.rabi)

    phys = PhysicalParams(
        mass=_positive(ph["mass_u"], "physics.mass_u") * ATOMIC_MASS,
        scatter_len=_float(ph["scatter_len_bohr"], "physics.scatter_len_bohr") * BOHR_RADIUS,
    )
    if phys.scatter_len < 0:
        raise ConfigError("physics.scatter_len_bohr: must be >= 0")
    u1_text = ph["interaction_u1"].strip().lower()
    if u1_text in ("", "matched", "auto"):
        from .analytic import matched_interaction_1d

        u1 = matched_interaction_1d(n_atoms, phys, trap) if phys.interaction_U > 0 else 0.0
    else:
        u1 = _float(u1_text, "physics.interaction_u1")
        if u1 < 0:
            raise ConfigError("physics.interaction_u1: must be >= 0")
    phys = phys.with_changes(interaction_U1=u1)

    t_end = _positive(rn["t_end"], "run.t_end") if _optional(rn["t_end"]) else None
    dt = _positive(rn["dt"], "run.dt") if _optional(rn["dt"]) else None

    snaps = tuple(_float(v, "solver.snapshot_times") for v in so["snapshot_times"].split(",") if v.strip())
    if any(s < 0 for s in snaps):
        raise ConfigError("solver.snapshot_times: must be >= 0")
    components = int(_positive(so["components"], "solver.components"))
    if components not in (2, 3):
        raise ConfigError("solver.components: must be 2 or 3")
    n_points = int(_positive(so["n_points"], "solver.n_points"))
    if n_points & (n_points - 1):
        raise ConfigError("solver.n_points: must be a power of two")
    ground = so["ground_state"].strip().lower()
    if ground not in ("imaginary-time", "tf-profile"):
        raise ConfigError("solver.ground_state: must be imaginary-time or tf-profile")
    solver = SolverSettings(
        t_end=_positive(so["t_end"], "solver.t_end") if _optional(so["t_end"]) else None,
        dt=_positive(so["dt"], "solver.dt") if _optional(so["dt"]) else None,
        n_points=n_points,
        half_width_tf=_positive(so["half_width_tf"], "solver.half_width_tf"),
        components=components,
        absorber_width_tf=_float(so["absorber_width_tf"], "solver.absorber_width_tf"),
        absorber_strength=parse_frequency(so["absorber_strength"], "solver.absorber_strength") * HBAR,
        detector_tf=_positive(so["detector_tf"], "solver.detector_tf"),
        n_records=int(_positive(so["n_records"], "solver.n_records")),
        snapshot_times=snaps,
        ground_state=ground,
    )
    if solver.absorber_width_tf < 0 or solver.absorber_strength < 0:
        raise ConfigError("solver absorber settings must be >= 0")
    if mode in ("gpe-1d", "compare") and solver.t_end is None:
        raise ConfigError(f"{source}: mode {mode} needs solver.t_end")

    transient = _float(co["transient"], "compare.transient") if _optional(co["transient"]) else None
    threshold = _positive(co["threshold"], "compare.threshold")

    values = [v.strip() for v in sw["values"].split(",") if v.strip()]
    sweep_mode = sw["mode"].strip().lower()
    if mode == "sweep":
        if not sw["parameter"].strip() or not values:
            raise ConfigError(f"{source}: mode sweep needs sweep.parameter and sweep.values")
        section, _, key = sw["parameter"].strip().lower().partition(".")
        if section not in SCHEMA or key not in SCHEMA[section]:
            raise ConfigError(f"sweep.parameter: unknown parameter {sw['parameter']!r}")
        if sweep_mode not in MODES or sweep_mode == "sweep":
            raise ConfigError(f"sweep.mode: invalid mode {sweep_mode!r}")

    return ExperimentConfig(
        phys=phys,
        trap=trap,
        n_atoms=n_atoms,
        mode=mode,
        method=method,
        dimension=dimension,
        t_end=t_end,
        dt=dt,
        solver=solver,
        transient=transient,
        threshold=threshold,
        sweep_parameter=sw["parameter"].strip().lower(),
        sweep_values=values,
        sweep_mode=sweep_mode,
        jobs=int(_positive(sw["jobs"], "sweep.jobs")),
        output_dir=sections["output"]["directory"].strip(),
        sections=sections,
        source=source,
    )


def _positive_freq(text, name):
    value = parse_frequency(text, name)
    if value <= 0:
        raise ConfigError(f"{name}: must be positive")
    return value


def load_config(path) -> ExperimentConfig:
    """Load an INI experiment file or a JSON run manifest."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")  # OSError propagates as an I/O failure
    if path.suffix == ".json":
        try:
            manifest = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: line {exc.lineno}: invalid JSON") from None
        if "config" not in manifest:
            raise ConfigError(f"{path}: not a run manifest (no 'config' entry)")
        return config_from_sections(manifest["config"], str(path))
    return config_from_sections(_read_ini(text, str(path)), str(path))


def preset_names() -> List[str]:
    return sorted(p.name[: -len(".preset")] for p in resources.files("atomlaser.presets").iterdir()
                  if p.name.endswith(".preset"))


def load_preset(name: str) -> ExperimentConfig:
    res = resources.files("atomlaser.presets").joinpath(f"{name}.preset")
    if not res.is_file():
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(preset_names())}")
    return config_from_sections(_read_ini(res.read_text(encoding="utf-8"), f"preset:{name}"), f"preset:{name}")
