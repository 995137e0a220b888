"""Parameter sweeps reproducing the shaping experiments.

Every preset sweeps one parameter of one mask kind and records the
coincidence rate normalized to the open shaper.  In ideal mode the shaper is
the analytic mask clipped to the frequency interval that lands on the pixel
array; in physical mode pixel masks are rendered and space averaged.

Default ranges are placed on the spectral grid so that mask boundaries fall
midway between samples (half-integer multiples of the grid step), which keeps
the quadrature free of boundary jitter and makes the mirror-blocking zeros
exact.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from .amplitude import (BiphotonAmplitude, SpectralGrid, normalize_compensation,
                        spdc_amplitude, spectrum_fwhm_omega)
from .coincidence import g2
from .dispersion import CrystalParams
from .errors import ConfigError
from .masks import MaskSpec
from .shaper import (ShaperGeometry, effective_transfer, ideal_transfer, pixel_to_detuning,
                     render_mask)

PRESETS = ("fig2a", "fig2b", "fig2c", "fig3a", "fig3b", "fig4a", "fig4b", "custom")
POSITIONAL = ("position", "center", "offset")
UNITS = {"position": "rad_fs", "center": "rad_fs", "offset": "rad_fs", "period": "rad_fs",
         "width": "rad_fs", "phi2": "fs2", "slope": "fs", "tau": "fs", "phi": "rad",
         "gamma": "1"}
PORTS = (("phi0", 0.0), ("phipi", np.pi))
GRATING_HALF_PERIODS = 19  # scan steps per half grating period (odd)


@dataclass(frozen=True)
class NoiseModel:
    dwell_time: float = 10.0  # s
    peak_rate: float = 300.0  # cps at normalized rate 1
    dark_rate: float = 60.0  # cps
    seed: int = 0

    def __post_init__(self):
        if not self.dwell_time > 0:
            raise ConfigError(f"noise dwell_time must be positive, got {self.dwell_time!r}")
        if self.peak_rate < 0 or self.dark_rate < 0:
            raise ConfigError("noise rates must be non-negative")


@dataclass(frozen=True)
class ScanSpec:
    """What to sweep.  ``None`` fields take the preset's defaults."""

    preset: str = "fig2a"
    swept_parameter: str | None = None
    range: tuple[float, float] | None = None
    n_steps: int | None = None
    mode: str = "ideal"
    noise: NoiseModel | None = None
    compensate: str = "flat"
    units: str = "rad/fs"  # or "pixel" for positional sweeps
    mask_kind: str | None = None  # custom preset only
    mask_params: tuple = ()  # fixed mask parameters overriding preset defaults
    slice_fraction: float = 0.1  # fig2b slice width as a fraction of the FWHM

    def __post_init__(self):
        if self.preset not in PRESETS:
            raise ConfigError(f"unknown preset {self.preset!r}; choose from {PRESETS}")
        if self.mode not in ("ideal", "physical"):
            raise ConfigError(f"mode must be ideal or physical, got {self.mode!r}")
        if self.n_steps is not None and (int(self.n_steps) != self.n_steps or self.n_steps < 2):
            raise ConfigError(f"n_steps must be an integer >= 2, got {self.n_steps!r}")
        if self.range is not None:
            lo, hi = self.range
            if not lo < hi:
                raise ConfigError(f"scan range needs lo < hi, got {self.range!r}")
        if self.units not in ("rad/fs", "pixel"):
            raise ConfigError(f"units must be rad/fs or pixel, got {self.units!r}")
        if self.preset == "custom" and (self.mask_kind is None or self.swept_parameter is None):
            raise ConfigError("custom scans need mask_kind and swept_parameter")
        if not 0 < self.slice_fraction < 2:
            raise ConfigError("slice_fraction must lie in (0, 2)")
        normalize_compensation(self.compensate)
        object.__setattr__(self, "mask_params", tuple(sorted(dict(self.mask_params).items())))


@dataclass(eq=False)
class ScanResult:
    preset: str
    parameter: str
    unit: str
    values: np.ndarray
    rates: dict[str, np.ndarray]
    counts: dict[str, np.ndarray] | None = None
    metadata: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        n = len(self.values)
        for col in list(self.rates.values()) + list((self.counts or {}).values()):
            if len(col) != n:
                raise ConfigError("scan columns have different lengths")

    @property
    def rate(self) -> np.ndarray:
        """The first (or only) rate column."""
        return next(iter(self.rates.values()))

    def header(self) -> list[str]:
        cols = [f"{self.parameter}_{self.unit}"] + list(self.rates)
        if self.counts:
            cols += list(self.counts)
        return cols

    def to_csv(self) -> str:
        lines = [",".join(self.header())]
        rate_cols = list(self.rates.values())
        count_cols = list((self.counts or {}).values())
        for i, v in enumerate(self.values):
            row = [repr(float(v))] + [repr(float(c[i])) for c in rate_cols]
            row += [str(int(c[i])) for c in count_cols]
            lines.append(",".join(row))
        return "\n".join(lines) + "\n"


# -- grid-aware helpers ------------------------------------------------------

def half_lattice(value: float, step: float) -> float:
    """Nearest odd multiple of step / 2 (a midpoint between grid samples)."""
    return (np.round(value / step - 0.5) + 0.5) * step


def aperture(geom: ShaperGeometry, grid: SpectralGrid) -> tuple[float, float]:
    """Pixel-array aperture in detuning, with edges moved to grid midpoints."""
    lo, hi = geom.aperture_detuning()
    d = grid.d_omega
    if np.isclose(lo, -hi, rtol=1e-12, atol=0):
        h = half_lattice(hi, d)
        return (-h, h)
    return (half_lattice(lo, d), half_lattice(hi, d))


@lru_cache(maxsize=64)
def amplitude_for(crystal: CrystalParams, grid: SpectralGrid, compensate: str,
                  reference: CrystalParams | None = None) -> BiphotonAmplitude:
    return spdc_amplitude(crystal, grid, compensate, reference)


@dataclass(frozen=True)
class Plan:
    kind: str
    parameter: str
    values: np.ndarray
    fixed: dict
    ports: tuple  # ((column suffix, phi), ...) or ()


def plan_scan(spec: ScanSpec, geom: ShaperGeometry, amp: BiphotonAmplitude) -> Plan:
    """Resolve preset defaults into a mask kind, swept values and fixed parameters."""
    grid = amp.grid
    d = grid.d_omega
    n_default = 81
    fixed: dict = {}
    ports: tuple = ()
    a_hi = aperture(geom, grid)[1]
    fwhm = spectrum_fwhm_omega(amp)
    preset = spec.preset
    if preset == "fig2a":
        kind, param = "edge", "position"
        n = spec.n_steps or n_default
        step = max(1, round(1.6 * a_hi / (n - 1) / d))
        first = np.round(-1.1 * a_hi / d - 0.5) + 0.5
        values = (first + np.arange(n) * step) * d
    elif preset == "fig2b":
        kind, param = "slice", "center"
        width_cells = int(round(spec.slice_fraction * fwhm / d))
        width_cells += 1 - width_cells % 2  # odd: boundaries on midpoints
        fixed["width"] = width_cells * d
        n = spec.n_steps or n_default
        n += 1 - n % 2
        step = max(1, round(2.2 * a_hi / (n - 1) / d))
        values = (np.arange(n) - n // 2) * step * d
    elif preset == "fig2c":
        kind, param = "grating", "offset"
        n = spec.n_steps or n_default
        n += 1 - n % 2
        t = int(round(0.5 * fwhm / (2 * GRATING_HALF_PERIODS * d)))
        t += 1 - t % 2
        half_period = GRATING_HALF_PERIODS * t
        fixed["period"] = 2 * half_period * d
        # centre of the sweep: symmetric alignment with the centre passing
        values = (-0.5 * half_period + (np.arange(n) - n // 2) * t) * d
    elif preset == "fig3a":
        kind, param = "quadratic_phase", "phi2"
        n = spec.n_steps or n_default
        values = np.linspace(-4000.0, 4000.0, n)
    elif preset == "fig3b":
        kind, param = "v_phase", "slope"
        n = spec.n_steps or 241
        values = np.linspace(-300.0, 300.0, n)
    elif preset in ("fig4a", "fig4b"):
        kind, param = "interferometer", "tau"
        n = spec.n_steps or 2401
        values = np.linspace(0.0, 600.0, n)
        fixed["gamma"] = 1.0 if preset == "fig4a" else 0.0
        ports = PORTS
    else:
        kind, param = spec.mask_kind, spec.swept_parameter
        n = spec.n_steps or n_default
        if spec.range is None:
            raise ConfigError("custom scans need a range")
        values = np.linspace(spec.range[0], spec.range[1], n)

    if spec.swept_parameter is not None and spec.swept_parameter != param:
        if preset != "custom":
            raise ConfigError(
                f"preset {preset} sweeps {param!r}, not {spec.swept_parameter!r}")
    if spec.range is not None and preset != "custom":
        values = np.linspace(spec.range[0], spec.range[1], n)
    fixed.update(dict(spec.mask_params))
    fixed.pop(param, None)
    if spec.units == "pixel":
        if param not in POSITIONAL:
            raise ConfigError(f"pixel units only apply to positional parameters, not {param!r}")
        values = pixel_to_detuning(geom, values)
    if ports and "phi" in fixed:
        ports = ()
    return Plan(kind, param, np.asarray(values, dtype=float), fixed, ports)


def _mask(plan: Plan, value: float, phi=None) -> MaskSpec:
    params = {**plan.fixed, plan.parameter: float(value)}
    if phi is not None:
        params["phi"] = phi
    return MaskSpec.make(plan.kind, **params)


def make_transfer(spec: MaskSpec, mode: str, geom: ShaperGeometry, grid: SpectralGrid):
    if mode == "ideal":
        return ideal_transfer(spec, grid, aperture(geom, grid))
    return effective_transfer(render_mask(spec, geom, grid), geom, grid)


def scan_metadata(spec: ScanSpec, crystal: CrystalParams, geom: ShaperGeometry,
                  grid: SpectralGrid, plan: Plan) -> dict[str, str]:
    meta = {
        "preset": spec.preset,
        "mode": spec.mode,
        "compensate": normalize_compensation(spec.compensate),
        "mask_kind": plan.kind,
        "swept_parameter": plan.parameter,
        "n_steps": str(len(plan.values)),
        "crystal.material": crystal.material.name,
        "crystal.length_mm": repr(crystal.length_L),
        "crystal.poling_period_um": repr(crystal.poling_period_G),
        "crystal.temperature_C": repr(crystal.temperature),
        "crystal.qpm_offset_rad_mm": repr(crystal.qpm_offset),
        "grid.omega_pc": repr(grid.omega_pc),
        "grid.half_span": repr(grid.half_span),
        "grid.n_points": str(grid.n_points),
        "geometry.focal_mm": repr(geom.focal_f),
        "geometry.magnification": repr(geom.magnification_m),
        "geometry.gamma_fs_um": repr(geom.gamma.gamma),
        "geometry.beam_waist_um": repr(geom.beam_waist_w),
        "geometry.n_pixels": str(geom.n_pixels),
        "geometry.pitch_um": repr(geom.pitch),
    }
    for k, v in plan.fixed.items():
        meta[f"mask.{k}"] = repr(v)
    return meta


def point_masks(plan: Plan) -> dict[str, list[MaskSpec]]:
    """Mask for every scan point, keyed by output column."""
    columns = [(f"g2_norm_{suffix}", phi) for suffix, phi in plan.ports] or [("g2_norm", None)]
    return {name: [_mask(plan, v, phi) for v in plan.values] for name, phi in columns}


def run_scan(spec: ScanSpec, crystal: CrystalParams, geom: ShaperGeometry,
             grid: SpectralGrid, reference_crystal: CrystalParams | None = None) -> ScanResult:
    """Sweep the preset and return normalized coincidence rates.

    ``reference_crystal`` is the crystal the compressor was aligned to; it
    defaults to ``crystal`` itself.
    """
    mode = normalize_compensation(spec.compensate)
    amp = amplitude_for(crystal, grid, mode, reference_crystal)
    plan = plan_scan(spec, geom, amp_nominal(crystal, grid, mode, reference_crystal))
    ref = make_transfer(MaskSpec.make("open"), spec.mode, geom, grid)
    rates = {
        name: np.array([g2(amp, make_transfer(m, spec.mode, geom, grid), ref).normalized
                        for m in masks])
        for name, masks in point_masks(plan).items()
    }
    result = ScanResult(spec.preset, plan.parameter, UNITS.get(plan.parameter, "1"),
                        plan.values, rates,
                        metadata=scan_metadata(spec, crystal, geom, grid, plan))
    if spec.noise is not None:
        result = synthesize_counts(result, spec.noise)
    return result


def amp_nominal(crystal, grid, mode, reference):
    """Amplitude used to place preset ranges: the nominal (reference) crystal."""
    return amplitude_for(reference or crystal, grid, mode)


def synthesize_counts(result: ScanResult, noise: NoiseModel) -> ScanResult:
    """Poisson counts with mean (rate * peak + dark) * dwell, drawn in point order."""
    rng = np.random.default_rng(noise.seed)
    counts = {}
    for name, rate in result.rates.items():
        mean = (np.asarray(rate) * noise.peak_rate + noise.dark_rate) * noise.dwell_time
        counts[name.replace("g2_norm", "counts")] = rng.poisson(np.clip(mean, 0, None))
    meta = dict(result.metadata)
    meta.update({"noise.dwell_time_s": repr(noise.dwell_time),
                 "noise.peak_rate_cps": repr(noise.peak_rate),
                 "noise.dark_rate_cps": repr(noise.dark_rate),
                 "noise.seed": str(noise.seed)})
    return replace(result, counts=counts, metadata=meta)


def uncertainty_band(spec: ScanSpec, crystal: CrystalParams, geom: ShaperGeometry,
                     grid: SpectralGrid, d_temperature: float = 1.0,
                     d_waist: float = 0.3) -> tuple[ScanResult, ScanResult]:
    """Pointwise min/max over the nominal run and the four (T, w) corners.

    The compressor and the quasi-phase-matching offset stay at their nominal
    values while the crystal temperature is perturbed.
    """
    if spec.mode != "physical":
        raise ConfigError("uncertainty bands need a physical-mode scan")
    plain = replace(spec, noise=None)
    runs = [run_scan(plain, crystal, geom, grid)]
    for dT in (-d_temperature, d_temperature):
        for dw in (-d_waist, d_waist):
            c = replace(crystal, temperature=crystal.temperature + dT)
            g = replace(geom, beam_waist_w=geom.beam_waist_w * (1 + dw))
            runs.append(run_scan(plain, c, g, grid, reference_crystal=crystal))
    nominal = runs[0]
    low = {k: np.min([r.rates[k] for r in runs], axis=0) for k in nominal.rates}
    high = {k: np.max([r.rates[k] for r in runs], axis=0) for k in nominal.rates}
    meta = dict(nominal.metadata, **{"band.d_temperature_K": repr(d_temperature),
                                     "band.d_waist_rel": repr(d_waist)})
    return (replace(nominal, rates=low, metadata=dict(meta, band="low")),
            replace(nominal, rates=high, metadata=dict(meta, band="high")))
