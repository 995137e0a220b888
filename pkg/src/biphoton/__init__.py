"""Simulation of spectrally shaped time-energy entangled photon pairs."""

from .amplitude import (BiphotonAmplitude, SpectralGrid, calibrate_length, make_grid,
                        spdc_amplitude, spectrum_fwhm)
from .coincidence import CoincidenceResult, g2, g2_reference
from .dispersion import (CrystalParams, MaterialModel, PrismDispersion, calibrate_qpm,
                         get_material, phase_mismatch, prism_gamma, refractive_index,
                         wavenumber)
from .errors import (AnalysisError, BiphotonError, CalibrationError, ConfigError, DomainError,
                     NumericError)
from .experiment import CrystalConfig, GeometryConfig, GridConfig, Setup, build_setup
from .masks import MaskSpec
from .scan import NoiseModel, ScanResult, ScanSpec, run_scan, synthesize_counts, uncertainty_band
from .shaper import (PixelMask, ShaperGeometry, TransferFunction, calibrate_geometry,
                     effective_transfer, frequency_to_position, ideal_transfer, render_mask)

__version__ = "0.1.0"

__all__ = [
    "AnalysisError",
    "BiphotonAmplitude",
    "BiphotonError",
    "CalibrationError",
    "CoincidenceResult",
    "ConfigError",
    "CrystalConfig",
    "CrystalParams",
    "DomainError",
    "GeometryConfig",
    "GridConfig",
    "MaskSpec",
    "MaterialModel",
    "NoiseModel",
    "NumericError",
    "PixelMask",
    "PrismDispersion",
    "ScanResult",
    "ScanSpec",
    "Setup",
    "ShaperGeometry",
    "SpectralGrid",
    "TransferFunction",
    "build_setup",
    "calibrate_geometry",
    "calibrate_length",
    "calibrate_qpm",
    "effective_transfer",
    "frequency_to_position",
    "g2",
    "g2_reference",
    "get_material",
    "ideal_transfer",
    "make_grid",
    "phase_mismatch",
    "prism_gamma",
    "refractive_index",
    "render_mask",
    "run_scan",
    "spdc_amplitude",
    "spectrum_fwhm",
    "synthesize_counts",
    "uncertainty_band",
    "wavenumber",
]
