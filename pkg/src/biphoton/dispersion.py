"""Material dispersion and phase-matching primitives.

Units throughout: wavelength in um, angular frequency in rad/fs, crystal
length in mm, temperature in deg C.  Wave numbers come out in rad/um and
the phase mismatch in rad/mm.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, replace
from functools import lru_cache
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import ConfigError, DomainError

C_LIGHT = 0.299792458  # um/fs
COEFFS_ENV = "BIPHOTON_COEFFS"
FD_STEP = 1e-4  # um, central-difference step for dn/dlambda


@dataclass(frozen=True)
class MaterialModel:
    """Sellmeier plus thermo-optic dispersion model.

    ``sellmeier`` is ``(A, F, B1, C1, B2, C2, ...)`` with
    ``n^2 = A + sum B_i l^2/(l^2 - C_i) - F l^2``.  ``thermo`` is a flat
    list of rows of four; row k multiplies ``(T - t_ref)^(k+1)`` by
    ``sum_m d_km l^-m``.
    """

    name: str
    sellmeier: tuple[float, ...]
    thermo: tuple[float, ...] = ()
    valid_range: tuple[float, float] = (0.2, 4.0)
    t_ref: float = 25.0

    def __post_init__(self):
        if len(self.sellmeier) < 2 or len(self.sellmeier) % 2:
            raise ConfigError(f"material {self.name}: sellmeier needs A F and (B, C) pairs")
        if len(self.thermo) % 4:
            raise ConfigError(f"material {self.name}: thermo length must be a multiple of 4")
        lo, hi = self.valid_range
        if not 0 < lo < hi:
            raise ConfigError(f"material {self.name}: bad range {self.valid_range}")


@dataclass(frozen=True)
class CrystalParams:
    material: MaterialModel
    length_L: float  # mm
    poling_period_G: float  # um
    temperature: float = 29.5  # deg C
    qpm_offset: float = 0.0  # rad/mm

    def __post_init__(self):
        if not self.length_L > 0:
            raise ConfigError(f"crystal length must be positive, got {self.length_L}")
        if not self.poling_period_G > 0:
            raise ConfigError(f"poling period must be positive, got {self.poling_period_G}")


@dataclass(frozen=True)
class PrismDispersion:
    gamma: float  # fs/um
    lambda_c: float  # um

    def __post_init__(self):
        if not np.isfinite(self.gamma):
            raise ConfigError("prism gamma must be finite")


# -- coefficient file -------------------------------------------------------

_KEYS = ("sellmeier", "thermo", "range", "tref")


def parse_materials(text: str, source: str = "<string>") -> dict[str, MaterialModel]:
    """Parse the line-oriented coefficient format into named models."""
    raw: dict[str, dict[str, list[float]]] = {}
    current = None
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"{source}:{lineno}"
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError(f"{where}: malformed section header")
            head = line[1:-1].split()
            if len(head) != 2 or head[0] != "material":
                raise ConfigError(f"{where}: expected [material <name>]")
            current = head[1]
            if current in raw:
                raise ConfigError(f"{where}: duplicate material {current}")
            raw[current] = {}
            continue
        if current is None:
            raise ConfigError(f"{where}: key outside a material section")
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or key not in _KEYS:
            raise ConfigError(f"{where}: unknown key {key!r}")
        try:
            raw[current][key] = [float(tok) for tok in value.split()]
        except ValueError as exc:
            raise ConfigError(f"{where}: malformed number ({exc})") from None

    models = {}
    for name, entry in raw.items():
        if "sellmeier" not in entry:
            raise ConfigError(f"{source}: material {name} has no sellmeier line")
        rng = entry.get("range", [0.2, 4.0])
        tref = entry.get("tref", [25.0])
        if len(rng) != 2 or len(tref) != 1:
            raise ConfigError(f"{source}: material {name} has malformed range/tref")
        models[name] = MaterialModel(
            name=name,
            sellmeier=tuple(entry["sellmeier"]),
            thermo=tuple(entry.get("thermo", ())),
            valid_range=(rng[0], rng[1]),
            t_ref=tref[0],
        )
    return models


def coefficient_path() -> Path:
    override = os.environ.get(COEFFS_ENV)
    if override:
        return Path(override)
    return Path(str(resources.files("biphoton") / "data" / "materials.txt"))


@lru_cache(maxsize=8)
def _load(path: str) -> dict[str, MaterialModel]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read coefficient file {path}: {exc}") from None
    return parse_materials(text, source=path)


def load_materials(path: str | os.PathLike | None = None) -> dict[str, MaterialModel]:
    return dict(_load(str(path or coefficient_path())))


def get_material(name: str, path=None) -> MaterialModel:
    models = load_materials(path)
    if name not in models:
        raise ConfigError(f"unknown material {name!r}; known: {sorted(models)}")
    return models[name]


# -- index and wave number --------------------------------------------------

def _check_range(model: MaterialModel, lam) -> None:
    lo, hi = model.valid_range
    lam = np.asarray(lam, dtype=float)
    bad = ~((lam >= lo) & (lam <= hi))
    if np.any(bad):
        value = float(lam[bad].flat[0]) if lam.ndim else float(lam)
        raise DomainError(
            f"wavelength {value!r} um outside {model.name} range [{lo}, {hi}]"
        )


def refractive_index(model: MaterialModel, lam, T: float | None = None):
    """Index of refraction at wavelength ``lam`` (um) and temperature ``T``."""
    _check_range(model, lam)
    lam = np.asarray(lam, dtype=float)
    T = model.t_ref if T is None else T
    l2 = lam * lam
    a, f = model.sellmeier[0], model.sellmeier[1]
    n2 = a - f * l2
    for b, c in zip(model.sellmeier[2::2], model.sellmeier[3::2]):
        n2 = n2 + b * l2 / (l2 - c)
    n = np.sqrt(n2)
    dT = T - model.t_ref
    if model.thermo and dT != 0.0:
        inv = 1.0 / lam
        for k in range(len(model.thermo) // 4):
            d0, d1, d2, d3 = model.thermo[4 * k:4 * k + 4]
            n = n + dT ** (k + 1) * (d0 + inv * (d1 + inv * (d2 + inv * d3)))
    return n if n.ndim else float(n)


def wavenumber(model: MaterialModel, omega, T: float | None = None):
    """k = n(lambda) omega / c in rad/um."""
    omega = np.asarray(omega, dtype=float)
    if np.any(omega <= 0):
        raise DomainError("angular frequency must be positive")
    lam = 2 * np.pi * C_LIGHT / omega
    k = refractive_index(model, lam, T) * omega / C_LIGHT
    return k


# -- phase matching ---------------------------------------------------------

def mismatch_at_detuning(crystal: CrystalParams, delta, omega_pc: float):
    """Delta k (rad/mm) for signal at omega_pc/2 + delta, idler at omega_pc/2 - delta.

    Written in the detuning so that delta -> -delta swaps the two wave numbers
    and the result is symmetric to the last bit.
    """
    m, T = crystal.material, crystal.temperature
    center = 0.5 * omega_pc
    delta = np.asarray(delta, dtype=float)
    k_pair = wavenumber(m, center + delta, T) + wavenumber(m, center - delta, T)
    k_p = wavenumber(m, omega_pc, T)
    dk = (k_p - k_pair - 2 * np.pi / crystal.poling_period_G) * 1e3 + crystal.qpm_offset
    return dk if np.ndim(dk) else float(dk)


def phase_mismatch(crystal: CrystalParams, omega_s, omega_pc: float):
    """Delta k = k_p - k_s - k_i - 2 pi / G (+ offset), rad/mm."""
    omega_s = np.asarray(omega_s, dtype=float)
    if np.any((omega_s <= 0) | (omega_s >= omega_pc)):
        raise DomainError("signal frequency must lie in (0, omega_pc)")
    return mismatch_at_detuning(crystal, omega_s - 0.5 * omega_pc, omega_pc)


def calibrate_qpm(crystal: CrystalParams, omega_pc: float) -> CrystalParams:
    """Set qpm_offset so that Delta k vanishes at exact degeneracy."""
    raw = mismatch_at_detuning(replace(crystal, qpm_offset=0.0), 0.0, omega_pc)
    return replace(crystal, qpm_offset=-raw)


# -- prism ------------------------------------------------------------------

def prism_gamma(model: MaterialModel, lambda_c: float, step: float = FD_STEP,
                T: float | None = None) -> PrismDispersion:
    """Angular-dispersion coefficient gamma = -(2 lambda_c / c) dn/dlambda."""
    lo, hi = model.valid_range
    if not (lo < lambda_c - step and lambda_c + step < hi):
        raise DomainError(
            f"lambda_c {lambda_c!r} um too close to {model.name} range [{lo}, {hi}]"
        )
    dn = (refractive_index(model, lambda_c + step, T)
          - refractive_index(model, lambda_c - step, T)) / (2 * step)
    return PrismDispersion(gamma=-2 * lambda_c / C_LIGHT * dn, lambda_c=lambda_c)


def pump_frequency(wavelength_um: float = 0.532) -> float:
    return 2 * np.pi * C_LIGHT / wavelength_um
