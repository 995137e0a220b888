"""Scenario files: ``[section]`` headers, ``key = value`` lines, ``#`` comments.

Numbers may carry a unit suffix (``532 nm``, ``9 um``, ``29.5 C``, ``2000 fs2``);
they are converted to internal units (um, mm for the crystal length, fs,
deg C).  ``auto`` requests calibration for length and focal length.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field, replace

from .errors import ConfigError
from .experiment import CrystalConfig, GeometryConfig, GridConfig
from .masks import KINDS
from .scan import NoiseModel, ScanSpec

# unit -> (dimension, factor to internal unit); temperatures use an additive offset
UNITS = {
    "nm": ("length", 1e-3), "um": ("length", 1.0), "mm": ("length", 1e3),
    "fs": ("time", 1.0), "fs2": ("gdd", 1.0),
    "C": ("temperature", 0.0), "K": ("temperature", -273.15),
    "s": ("seconds", 1.0), "cps": ("rate", 1.0), "px": ("pixel", 1.0),
}
_NUMBER = re.compile(r"^([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*([A-Za-z0-9]*)$")


@dataclass(frozen=True)
class ScanConfig:
    preset: str = "fig2a"
    mode: str = "ideal"
    compensate: str = "flat"
    swept_parameter: str | None = None
    lo: float | None = None
    hi: float | None = None
    n_steps: int | None = None
    units: str = "rad/fs"
    slice_fraction: float = 0.1
    mask_kind: str | None = None
    mask_params: tuple = ()


@dataclass(frozen=True)
class OutputConfig:
    dir: str = "out"
    prefix: str | None = None  # defaults to the preset name


@dataclass(frozen=True)
class Scenario:
    crystal: CrystalConfig = field(default_factory=CrystalConfig)
    geometry: GeometryConfig = field(default_factory=GeometryConfig)
    grid: GridConfig = field(default_factory=GridConfig)
    scan: ScanConfig = field(default_factory=ScanConfig)
    noise: NoiseModel | None = None
    output: OutputConfig = field(default_factory=OutputConfig)

    def scan_spec(self) -> ScanSpec:
        s = self.scan
        rng = None
        if s.lo is not None or s.hi is not None:
            if s.lo is None or s.hi is None:
                raise ConfigError("scan needs both lo and hi")
            rng = (s.lo, s.hi)
        return ScanSpec(preset=s.preset, swept_parameter=s.swept_parameter, range=rng,
                        n_steps=s.n_steps, mode=s.mode, noise=self.noise,
                        compensate=s.compensate, units=s.units, mask_kind=s.mask_kind,
                        mask_params=s.mask_params, slice_fraction=s.slice_fraction)


# section -> key -> (field, kind)
#   kinds: str, int, float, or a dimension name from UNITS; a trailing "?" allows "auto"
SCHEMA = {
    "crystal": {
        "material": ("material", "str"),
        "length": ("length", "mm?"),
        "poling_period": ("poling_period", "length"),
        "temperature": ("temperature", "temperature"),
        "pump_wavelength": ("pump_wavelength", "length"),
        "target_fwhm": ("target_fwhm", "nm"),
    },
    "geometry": {
        "prism_material": ("prism_material", "str"),
        "magnification": ("magnification", "float"),
        "focal": ("focal", "mm?"),
        "beam_waist": ("beam_waist", "length?"),
        "n_pixels": ("n_pixels", "int"),
        "pitch": ("pitch", "length"),
        "center_offset": ("center_offset", "length"),
        "fill_fraction": ("fill_fraction", "float"),
    },
    "grid": {
        "half_span": ("half_span", "float"),
        "n_points": ("n_points", "int"),
        "calibration_points": ("calibration_points", "int"),
    },
    "scan": {
        "preset": ("preset", "str"),
        "mode": ("mode", "str"),
        "compensate": ("compensate", "str"),
        "swept_parameter": ("swept_parameter", "str?"),
        "lo": ("lo", "scanvalue"),
        "hi": ("hi", "scanvalue"),
        "n_steps": ("n_steps", "int?"),
        "slice_fraction": ("slice_fraction", "float"),
        "mask.kind": ("mask_kind", "str?"),
    },
    "noise": {
        "dwell_time": ("dwell_time", "seconds"),
        "peak_rate": ("peak_rate", "rate"),
        "dark_rate": ("dark_rate", "rate"),
        "seed": ("seed", "int"),
    },
    "output": {
        "dir": ("dir", "str"),
        "prefix": ("prefix", "str?"),
    },
}
MASK_PARAMS = sorted({k for d, r in KINDS.values() for k in list(d) + list(r)} - {"parts"})
STRING_MASK_PARAMS = ("side",)


def parse_number(text: str, where: str, dimension: str | None = None):
    """Float plus the dimension of its suffix (None when unitless)."""
    m = _NUMBER.match(text.strip())
    if not m:
        raise ConfigError(f"{where}: malformed number {text!r}")
    value, unit = float(m.group(1)), m.group(2)
    if not unit:
        return value, None
    if unit not in UNITS:
        raise ConfigError(f"{where}: unknown unit {unit!r}")
    dim, factor = UNITS[unit]
    if dimension is not None and dim != dimension:
        raise ConfigError(f"{where}: unit {unit!r} is not a {dimension}")
    if dim == "temperature":
        return value + factor, dim
    return value * factor, dim


def _convert(kind: str, text: str, where: str):
    optional = kind.endswith("?")
    kind = kind.rstrip("?")
    if optional and text.strip() in ("auto", "none"):
        return None
    if kind == "str":
        if not text.strip():
            raise ConfigError(f"{where}: empty value")
        return text.strip()
    if kind == "int":
        try:
            return int(text.strip())
        except ValueError:
            raise ConfigError(f"{where}: expected an integer, got {text.strip()!r}") from None
    if kind == "float":
        value, dim = parse_number(text, where)
        if dim is not None:
            raise ConfigError(f"{where}: this key takes a plain number, got {text.strip()!r}")
        return value
    if kind == "mm":  # crystal length / focal: bare numbers are mm
        value, dim = parse_number(text, where, "length")
        return value if dim is None else value * 1e-3
    if kind == "nm":
        value, dim = parse_number(text, where, "length")
        return value if dim is None else value * 1e3
    if kind == "scanvalue":
        return parse_number(text, where)
    return parse_number(text, where, kind)[0]


def parse_scenario(text: str, source: str = "<scenario>") -> Scenario:
    values: dict[str, dict] = {name: {} for name in SCHEMA}
    seen_noise = False
    mask_params: dict = {}
    scan_units: dict = {}
    section = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"{source}:{lineno}"
        if line.startswith("["):
            if not line.endswith("]") or line[1:-1].strip() not in SCHEMA:
                raise ConfigError(f"{where}: unknown section {line!r}")
            section = line[1:-1].strip()
            seen_noise = seen_noise or section == "noise"
            continue
        if section is None:
            raise ConfigError(f"{where}: key outside any section")
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep:
            raise ConfigError(f"{where}: expected key = value")
        if section == "scan" and key.startswith("mask.") and key != "mask.kind":
            name = key[5:]
            if name not in MASK_PARAMS:
                raise ConfigError(f"{where}: unknown mask parameter {name!r}")
            if name in STRING_MASK_PARAMS:
                mask_params[name] = value.strip()
            else:
                mask_params[name] = parse_number(value, where)[0]
            continue
        if key not in SCHEMA[section]:
            raise ConfigError(f"{where}: unknown key {key!r} in [{section}]")
        name, kind = SCHEMA[section][key]
        converted = _convert(kind, value, where)
        if kind == "scanvalue":
            converted, dim = converted
            scan_units[key] = "pixel" if dim == "pixel" else "rad/fs"
        values[section][name] = converted

    units = set(scan_units.values())
    if len(units) > 1:
        raise ConfigError(f"{source}: scan lo and hi use different units")
    scan_kw = dict(values["scan"])
    if units:
        scan_kw["units"] = units.pop()
    scan_kw["mask_params"] = tuple(sorted(mask_params.items()))
    try:
        scenario = Scenario(
            crystal=CrystalConfig(**values["crystal"]),
            geometry=GeometryConfig(**values["geometry"]),
            grid=GridConfig(**values["grid"]),
            scan=ScanConfig(**scan_kw),
            noise=NoiseModel(**values["noise"]) if seen_noise else None,
            output=OutputConfig(**values["output"]),
        )
        scenario.scan_spec()
    except ConfigError as exc:
        raise ConfigError(f"{source}: {exc}") from None
    return scenario


def _fmt(value) -> str:
    if value is None:
        return "auto"
    if isinstance(value, float):
        return repr(value)
    return str(value)


# suffix written for each kind; bare numbers already mean mm / nm for those keys
_SUFFIX = {"length": " um", "temperature": " C", "seconds": " s", "rate": " cps"}


def format_scenario(scenario: Scenario) -> str:
    """Scenario text that parses back to an identical Scenario."""
    out = []
    sections = [("crystal", scenario.crystal), ("geometry", scenario.geometry),
                ("grid", scenario.grid), ("scan", scenario.scan)]
    if scenario.noise is not None:
        sections.append(("noise", scenario.noise))
    sections.append(("output", scenario.output))
    for name, obj in sections:
        out.append(f"[{name}]")
        for key, (attr, kind) in SCHEMA[name].items():
            value = getattr(obj, attr)
            base = kind.rstrip("?")
            if base == "scanvalue":
                if value is None:
                    continue
                suffix = " px" if scenario.scan.units == "pixel" else ""
                out.append(f"{key} = {_fmt(float(value))}{suffix}")
                continue
            if kind.endswith("?") and value is None:
                out.append(f"{key} = auto")
                continue
            suffix = _SUFFIX.get(base, "")
            out.append(f"{key} = {_fmt(value)}{suffix}")
        if name == "scan":
            for k, v in scenario.scan.mask_params:
                out.append(f"mask.{k} = {_fmt(v)}")
        out.append("")
    return "\n".join(out)


def with_overrides(scenario: Scenario, preset=None, mode=None, out=None, seed=None) -> Scenario:
    """Apply command-line overrides."""
    if preset is not None:
        scenario = replace(scenario, scan=replace(scenario.scan, preset=preset))
    if mode is not None:
        scenario = replace(scenario, scan=replace(scenario.scan, mode=mode))
    if out is not None:
        scenario = replace(scenario, output=replace(scenario.output, dir=out))
    if seed is not None:
        noise = scenario.noise or NoiseModel()
        scenario = replace(scenario, noise=replace(noise, seed=seed))
    return scenario
