"""Configuration dataclasses and the calibrated default setup."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .amplitude import (BiphotonAmplitude, SpectralGrid, calibrate_length, make_grid,
                        normalize_compensation, spdc_amplitude)
from .dispersion import C_LIGHT, CrystalParams, calibrate_qpm, get_material, pump_frequency
from .shaper import ShaperGeometry, calibrate_geometry, default_geometry


@dataclass(frozen=True)
class CrystalConfig:
    material: str = "ktp_z"
    length: float | None = None  # mm; None -> calibrate to target_fwhm
    poling_period: float = 9.0  # um
    temperature: float = 29.5  # deg C
    pump_wavelength: float = 0.532  # um
    target_fwhm: float = 50.0  # nm


@dataclass(frozen=True)
class GridConfig:
    half_span: float = 0.125  # rad/fs
    n_points: int = 4096
    calibration_points: int = 16384  # grid used for the length calibration


@dataclass(frozen=True)
class GeometryConfig:
    prism_material: str = "fused_silica"
    magnification: float = 1.0
    focal: float | None = None  # mm; None -> calibrate to fill_fraction
    beam_waist: float | None = None  # um; None -> 2 * pitch
    n_pixels: int = 640
    pitch: float = 100.0  # um
    center_offset: float = 0.0  # um
    fill_fraction: float = 0.7


@dataclass(frozen=True)
class Setup:
    crystal: CrystalParams
    grid: SpectralGrid
    geometry: ShaperGeometry
    amplitude: BiphotonAmplitude


@lru_cache(maxsize=32)
def build_setup(crystal_cfg: CrystalConfig = CrystalConfig(),
                grid_cfg: GridConfig = GridConfig(),
                geom_cfg: GeometryConfig = GeometryConfig(),
                compensate: str = "flat") -> Setup:
    """Run the calibration chain: qpm offset, crystal length, focal length."""
    omega_pc = pump_frequency(crystal_cfg.pump_wavelength)
    grid = make_grid(omega_pc, grid_cfg.half_span, grid_cfg.n_points)
    crystal = CrystalParams(
        material=get_material(crystal_cfg.material),
        length_L=crystal_cfg.length or 10.0,
        poling_period_G=crystal_cfg.poling_period,
        temperature=crystal_cfg.temperature,
    )
    crystal = calibrate_qpm(crystal, omega_pc)
    if crystal_cfg.length is None:
        fine = make_grid(omega_pc, grid_cfg.half_span, grid_cfg.calibration_points)
        crystal = calibrate_length(crystal, fine, crystal_cfg.target_fwhm)
    amp = spdc_amplitude(crystal, grid, normalize_compensation(compensate))
    geom = default_geometry(
        lambda_c=2 * np.pi * C_LIGHT / grid.center,
        prism_material=geom_cfg.prism_material,
        magnification=geom_cfg.magnification,
        beam_waist=geom_cfg.beam_waist,
        n_pixels=geom_cfg.n_pixels,
        pitch=geom_cfg.pitch,
        focal_f=geom_cfg.focal or 1000.0,
        center_offset=geom_cfg.center_offset,
    )
    if geom_cfg.focal is None:
        geom = calibrate_geometry(geom, amp, geom_cfg.fill_fraction)
    return Setup(crystal, grid, geom, amp)
