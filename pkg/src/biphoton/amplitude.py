"""Two-photon spectral amplitude on a symmetric frequency grid."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

from .dispersion import C_LIGHT, CrystalParams, mismatch_at_detuning
from .errors import AnalysisError, CalibrationError, ConfigError, NumericError

COMPENSATION_MODES = ("none", "flat", "quadratic")


@dataclass(frozen=True)
class SpectralGrid:
    """Uniform signal-frequency grid, symmetric about omega_pc / 2.

    Sample j sits at ``center + (j - n/2) * d_omega``; the exchange partner of
    sample j (0 < j < n) is sample n - j, whose detuning is the exact negative.
    """

    omega_pc: float
    half_span: float
    n_points: int

    def __post_init__(self):
        n = self.n_points
        if not isinstance(n, (int, np.integer)) or n < 256 or n & (n - 1):
            raise ConfigError(f"n_points must be a power of two >= 256, got {n!r}")
        if not self.half_span > 0:
            raise ConfigError(f"half_span must be positive, got {self.half_span!r}")
        if not 0 < self.half_span < 0.5 * self.omega_pc:
            raise ConfigError("half_span must be smaller than omega_pc / 2")

    @property
    def center(self) -> float:
        return 0.5 * self.omega_pc

    @property
    def d_omega(self) -> float:
        return 2.0 * self.half_span / self.n_points

    @cached_property
    def delta(self) -> np.ndarray:
        """Detuning from degeneracy, rad/fs."""
        d = (np.arange(self.n_points) - self.n_points // 2) * self.d_omega
        d.setflags(write=False)
        return d

    @cached_property
    def omega(self) -> np.ndarray:
        w = self.center + self.delta
        w.setflags(write=False)
        return w

    @cached_property
    def mirror(self) -> np.ndarray:
        """Index of the exchange partner; index 0 has none and maps to itself."""
        j = np.arange(self.n_points)
        m = np.where(j == 0, 0, self.n_points - j)
        m.setflags(write=False)
        return m


def make_grid(omega_pc: float, half_span: float, n_points: int) -> SpectralGrid:
    return SpectralGrid(float(omega_pc), float(half_span), int(n_points))


def sinc(x):
    """sin(x)/x, with a two-term series near the removable singularity."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 1e-4
    safe = np.where(small, 1.0, x)
    return np.where(small, 1.0 - x * x / 6.0, np.sin(safe) / safe)


@dataclass(frozen=True)
class AmplitudeParams:
    """Everything needed to rebuild an amplitude on a different grid."""

    crystal: CrystalParams
    omega_pc: float
    half_span: float
    n_points: int
    compensate: str = "flat"
    reference: CrystalParams | None = None  # crystal the compressor was aligned to
    quad_coeff: float | None = None  # fitted quadratic phase, rad fs^2


@dataclass(frozen=True, eq=False)
class BiphotonAmplitude:
    grid: SpectralGrid
    values: np.ndarray
    compensated: str = "none"
    params: AmplitudeParams | None = field(default=None, repr=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=complex)
        if v.shape != (self.grid.n_points,):
            raise ConfigError("amplitude length does not match its grid")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)


def half_phase(crystal: CrystalParams, grid: SpectralGrid) -> np.ndarray:
    """x = Delta k L / 2 at every grid point (rad)."""
    return 0.5 * crystal.length_L * mismatch_at_detuning(crystal, grid.delta, grid.omega_pc)


def main_lobe(x: np.ndarray, grid: SpectralGrid) -> np.ndarray:
    """Boolean mask of the contiguous |x| < pi region around degeneracy."""
    c = grid.n_points // 2
    inside = np.abs(x) < np.pi
    if not inside[c]:
        raise NumericError("crystal is not phase matched at degeneracy")
    lo = c
    while lo > 0 and inside[lo - 1]:
        lo -= 1
    hi = c
    while hi < grid.n_points - 1 and inside[hi + 1]:
        hi += 1
    keep = np.zeros(grid.n_points, dtype=bool)
    keep[lo:hi + 1] = True
    return keep


def fit_quadratic_phase(phase: np.ndarray, grid: SpectralGrid, region: np.ndarray) -> float:
    """Least-squares coefficient of u = delta^2 in a cubic-in-u fit of ``phase``."""
    u = grid.delta[region] ** 2
    scale = u.max() if u.max() > 0 else 1.0
    t = u / scale
    design = np.stack([np.ones_like(t), t, t * t, t ** 3], axis=1)
    coef, *_ = np.linalg.lstsq(design, phase[region], rcond=None)
    return float(coef[1] / scale)


def _compensation_phase(mode, reference, grid):
    """Phase the compressor subtracts from the intrinsic phase -x."""
    if mode == "none":
        return np.zeros(grid.n_points), None
    x_ref = half_phase(reference, grid)
    if mode == "flat":
        return -x_ref, None
    b = fit_quadratic_phase(-x_ref, grid, main_lobe(x_ref, grid))
    return b * grid.delta ** 2, b


def normalize_compensation(compensate) -> str:
    if compensate is True:
        return "flat"
    if compensate is False or compensate is None:
        return "none"
    if compensate not in COMPENSATION_MODES:
        raise ConfigError(f"compensate must be one of {COMPENSATION_MODES}, got {compensate!r}")
    return compensate


def spdc_amplitude(crystal: CrystalParams, grid: SpectralGrid, compensate="flat",
                   reference: CrystalParams | None = None) -> BiphotonAmplitude:
    """xi = sinc(x) exp(-i x) with x = Delta k L / 2, peak normalized.

    ``compensate`` selects the compressor model: ``"flat"`` cancels the whole
    intrinsic phase of the reference crystal, ``"quadratic"`` only its fitted
    delta^2 term, ``"none"`` leaves it.  ``reference`` defaults to ``crystal``;
    pass the nominal crystal to model a compressor that stays aligned while the
    crystal is perturbed.
    """
    mode = normalize_compensation(compensate)
    reference = crystal if reference is None else reference
    x = half_phase(crystal, grid)
    comp, b = _compensation_phase(mode, reference, grid)
    residual = -x - comp
    values = sinc(x) * np.exp(1j * residual)
    values = values / np.abs(values).max()
    params = AmplitudeParams(crystal, grid.omega_pc, grid.half_span, grid.n_points,
                             mode, None if reference is crystal else reference, b)
    return BiphotonAmplitude(grid, values, mode, params)


def _lobe(amp: BiphotonAmplitude) -> np.ndarray:
    """Contiguous region around the center where |xi| falls monotonically."""
    mag = np.abs(amp.values)
    n = amp.grid.n_points
    lo = hi = n // 2
    while lo > 0 and 0 < mag[lo - 1] <= mag[lo]:
        lo -= 1
    while hi < n - 1 and 0 < mag[hi + 1] <= mag[hi]:
        hi += 1
    keep = np.zeros(n, dtype=bool)
    keep[lo:hi + 1] = True
    return keep


def quadratic_phase_coefficient(amp: BiphotonAmplitude) -> float:
    """Fitted delta^2 coefficient (rad fs^2) of the unwrapped phase over the main lobe."""
    keep = _lobe(amp)
    phase = np.zeros(amp.grid.n_points)
    phase[keep] = np.unwrap(np.angle(amp.values[keep]))
    phase -= phase[amp.grid.n_points // 2]
    return fit_quadratic_phase(phase, amp.grid, keep)


def compensate_quadratic(amp: BiphotonAmplitude) -> BiphotonAmplitude:
    """Remove the fitted quadratic phase of an existing amplitude."""
    b = quadratic_phase_coefficient(amp)
    values = amp.values * np.exp(-1j * b * amp.grid.delta ** 2)
    mode = amp.compensated if amp.compensated != "none" else "quadratic"
    return BiphotonAmplitude(amp.grid, values, mode, amp.params)


# -- bandwidth --------------------------------------------------------------

def _half_max_width(y: np.ndarray, x: np.ndarray) -> float:
    peak = int(np.argmax(y))
    half = 0.5 * y[peak]
    i = peak
    while i > 0 and y[i - 1] >= half:
        i -= 1
    j = peak
    while j < len(y) - 1 and y[j + 1] >= half:
        j += 1
    if i == 0 or j == len(y) - 1:
        raise AnalysisError("half-maximum crossing not found within the sampled range")
    left = x[i - 1] + (half - y[i - 1]) * (x[i] - x[i - 1]) / (y[i] - y[i - 1])
    right = x[j] + (half - y[j]) * (x[j + 1] - x[j]) / (y[j + 1] - y[j])
    return float(right - left)


def spectrum_fwhm_omega(amp: BiphotonAmplitude) -> float:
    """FWHM of |xi|^2 in rad/fs."""
    return _half_max_width(np.abs(amp.values) ** 2, amp.grid.delta)


def omega_to_nm(width: float, center: float) -> float:
    return 2 * np.pi * C_LIGHT / center ** 2 * width * 1e3


def spectrum_fwhm(amp: BiphotonAmplitude) -> float:
    """FWHM of |xi|^2 expressed as a wavelength width in nm."""
    return omega_to_nm(spectrum_fwhm_omega(amp), amp.grid.center)


def calibrate_length(crystal: CrystalParams, grid: SpectralGrid, target_fwhm_nm: float,
                     bracket=(0.1, 50.0), rtol: float = 1e-9) -> CrystalParams:
    """Bisect the crystal length so the |xi|^2 FWHM equals the target."""

    def width(length):
        amp = spdc_amplitude(replace(crystal, length_L=length), grid, "none")
        try:
            return spectrum_fwhm(amp)
        except AnalysisError:
            return np.inf

    lo, hi = bracket
    w_lo, w_hi = width(lo), width(hi)
    if not (w_hi <= target_fwhm_nm <= w_lo) or not np.isfinite(target_fwhm_nm):
        raise CalibrationError(
            f"target FWHM {target_fwhm_nm} nm not reachable with L in {bracket} mm "
            f"(widths {w_lo:.4g} .. {w_hi:.4g} nm)"
        )
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        w_mid = width(mid)
        if not w_hi <= w_mid <= w_lo:
            raise CalibrationError("bandwidth is not monotone in crystal length")
        if w_mid > target_fwhm_nm:
            lo, w_lo = mid, w_mid
        else:
            hi, w_hi = mid, w_mid
    length = 0.5 * (lo + hi)
    # an unmeasurable (wider than the grid) width can bracket any target
    reached = width(length)
    if not abs(reached - target_fwhm_nm) <= 1e-3 * target_fwhm_nm:
        raise CalibrationError(
            f"target FWHM {target_fwhm_nm} nm not reachable on this grid "
            f"(closest {reached:.4g} nm at L = {length:.4g} mm)"
        )
    return replace(crystal, length_L=length)
