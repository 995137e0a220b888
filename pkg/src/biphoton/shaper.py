"""Pulse-shaper geometry, SLM rendering and the effective transfer function.

The SLM sits in the Fourier plane of a prism/lens line.  A frequency omega is
mapped to ``X(omega) = f (m+1) gamma (omega - omega_c) / k_c``; a Gaussian beam
of waist w centred there sees the pixel pattern at ``M(-m x - X(omega))`` with
a quadratic chirp ``exp(-i k_c m x^2 / f)``.  Averaging over x gives the
effective spectral transfer.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np
from scipy import sparse

from .amplitude import BiphotonAmplitude, SpectralGrid, spectrum_fwhm_omega
from .dispersion import PrismDispersion, get_material, prism_gamma
from .errors import ConfigError
from .masks import MaskSpec, evaluate

WINDOW_WAISTS = 4.0  # F(x) truncated at |x| <= 4 w
GL_NODES = 8


@dataclass(frozen=True)
class ShaperGeometry:
    """Prism/lens line plus SLM layout.  Lengths: f in mm, everything else um."""

    focal_f: float
    magnification_m: float
    gamma: PrismDispersion
    k_c: float
    beam_waist_w: float
    n_pixels: int = 640
    pitch: float = 100.0
    center_offset: float = 0.0
    prism_sep_b: float = field(init=False)

    def __post_init__(self):
        if not self.focal_f > 0:
            raise ConfigError(f"focal length must be positive, got {self.focal_f!r}")
        if not self.magnification_m > 0:
            raise ConfigError(f"magnification must be positive, got {self.magnification_m!r}")
        if not self.beam_waist_w > 0:
            raise ConfigError(f"beam waist must be positive, got {self.beam_waist_w!r}")
        if not self.k_c > 0:
            raise ConfigError("k_c must be positive")
        if self.gamma.gamma == 0:
            raise ConfigError("prism gamma is zero: the shaper would not disperse")
        if int(self.n_pixels) != self.n_pixels or self.n_pixels < 2:
            raise ConfigError(f"n_pixels must be an integer >= 2, got {self.n_pixels!r}")
        if not self.pitch > 0:
            raise ConfigError(f"pitch must be positive, got {self.pitch!r}")
        object.__setattr__(self, "prism_sep_b", self.focal_f * (self.magnification_m + 1))

    @property
    def dispersion_scale(self) -> float:
        """um of Fourier-plane displacement per rad/fs of detuning."""
        f_um = self.focal_f * 1e3
        return f_um * (self.magnification_m + 1) * self.gamma.gamma / self.k_c

    @property
    def pixel_edges(self) -> np.ndarray:
        n = self.n_pixels
        return self.center_offset + (np.arange(n + 1) - n / 2) * self.pitch

    @property
    def pixel_centers(self) -> np.ndarray:
        n = self.n_pixels
        return self.center_offset + (np.arange(n) - n / 2 + 0.5) * self.pitch

    def aperture_detuning(self) -> tuple[float, float]:
        """Detuning interval whose beam centre falls on the pixel array."""
        e = self.pixel_edges
        a, b = -e[0] / self.dispersion_scale, -e[-1] / self.dispersion_scale
        return (min(a, b), max(a, b))


def default_geometry(lambda_c: float = 1.064, prism_material: str = "fused_silica",
                     magnification: float = 1.0, beam_waist: float | None = None,
                     n_pixels: int = 640, pitch: float = 100.0, focal_f: float = 1000.0,
                     center_offset: float = 0.0) -> ShaperGeometry:
    """Geometry with pitch-relative defaults; focal_f is normally calibrated afterwards."""
    return ShaperGeometry(
        focal_f=focal_f,
        magnification_m=magnification,
        gamma=prism_gamma(get_material(prism_material), lambda_c),
        k_c=2 * np.pi / lambda_c,
        beam_waist_w=2.0 * pitch if beam_waist is None else beam_waist,
        n_pixels=n_pixels,
        pitch=pitch,
        center_offset=center_offset,
    )


def frequency_to_position(geom: ShaperGeometry, omega, omega_c: float):
    """SLM-plane position (um) of the beam centre for frequency omega.

    The lens images with inversion, so this is ``-X(omega)``; it is the inverse
    of ``pixel_detunings``.
    """
    return -geom.dispersion_scale * (np.asarray(omega, dtype=float) - omega_c)


def pixel_to_detuning(geom: ShaperGeometry, pixels):
    """Detuning addressed by a position given in pixels from the array centre."""
    s = geom.center_offset + np.asarray(pixels, dtype=float) * geom.pitch
    return -s / geom.dispersion_scale


def calibrate_geometry(geom: ShaperGeometry, amp: BiphotonAmplitude,
                       fill_fraction: float) -> ShaperGeometry:
    """Choose f so the spectral FWHM spans ``fill_fraction`` of the pixel array."""
    if not 0 < fill_fraction <= 1:
        raise ConfigError(f"fill_fraction must lie in (0, 1], got {fill_fraction!r}")
    width = spectrum_fwhm_omega(amp)
    scale = fill_fraction * geom.n_pixels * geom.pitch / width
    f_um = scale * geom.k_c / ((geom.magnification_m + 1) * abs(geom.gamma.gamma))
    return replace(geom, focal_f=f_um * 1e-3)


# -- masks on the SLM -------------------------------------------------------

@dataclass(frozen=True, eq=False)
class PixelMask:
    n_pixels: int
    pitch: float
    center_pixel_offset: float
    transmissions: np.ndarray

    def __post_init__(self):
        t = np.array(self.transmissions, dtype=complex)
        if self.n_pixels < 2 or t.shape != (self.n_pixels,):
            raise ConfigError("pixel mask needs n_pixels >= 2 transmissions")
        if np.any(np.abs(t) > 1 + 1e-12):
            raise ConfigError("pixel transmission exceeds 1 (modulator is passive)")
        t.setflags(write=False)
        object.__setattr__(self, "transmissions", t)

    def to_text(self) -> str:
        """Three whitespace columns: pixel index, amplitude, phase (rad)."""
        lines = ["# pixel amplitude phase"]
        for k, t in enumerate(self.transmissions):
            lines.append(f"{k} {abs(t)!r} {float(np.angle(t))!r}")
        return "\n".join(lines) + "\n"


def pixel_detunings(geom: ShaperGeometry) -> np.ndarray:
    """Detuning mapped to each pixel centre (beam centred on the pixel)."""
    return -geom.pixel_centers / geom.dispersion_scale


def render_mask(spec: MaskSpec, geom: ShaperGeometry, grid: SpectralGrid) -> PixelMask:
    t = evaluate(spec, pixel_detunings(geom), grid.omega_pc)
    if spec.is_amplitude():
        t = t.real.astype(complex)
    elif spec.is_phase():
        t = np.exp(1j * np.angle(t))
    return PixelMask(geom.n_pixels, geom.pitch, geom.center_offset, t)


@dataclass(frozen=True, eq=False)
class TransferFunction:
    grid: SpectralGrid
    values: np.ndarray
    mode: str = "ideal"

    def __post_init__(self):
        v = np.array(self.values, dtype=complex)
        if v.shape != (self.grid.n_points,):
            raise ConfigError("transfer length does not match its grid")
        if self.mode not in ("ideal", "physical"):
            raise ConfigError(f"unknown transfer mode {self.mode!r}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)


def ideal_transfer(spec: MaskSpec, grid: SpectralGrid, aperture=None) -> TransferFunction:
    """Analytic mask at every grid sample, optionally clipped to an open aperture."""
    values = evaluate(spec, grid.delta, grid.omega_pc)
    if aperture is not None:
        lo, hi = aperture
        values = values * ((grid.delta > lo) & (grid.delta < hi))
    return TransferFunction(grid, values, "ideal")


# -- space-averaged transfer -------------------------------------------------

_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _gauss_legendre(n):
    if n not in _GL_CACHE:
        _GL_CACHE[n] = np.polynomial.legendre.leggauss(n)
    return _GL_CACHE[n]


def _row_weights(geom, X, nodes, max_panel, edges, chirp):
    """Integrals of F(x) chirp(x) over each pixel for a beam centred at X."""
    w, m = geom.beam_waist_w, geom.magnification_m
    half = WINDOW_WAISTS * w
    # s(x) = -m x - X decreases in x; pixel boundaries in x
    cuts = -(edges + X) / m
    cuts = cuts[(cuts > -half) & (cuts < half)]
    breaks = np.concatenate(([-half], np.sort(cuts), [half]))
    a, b = breaks[:-1], breaks[1:]
    n_sub = np.maximum(np.ceil((b - a) / (max_panel * w)),
                       np.ceil(chirp * np.abs(b * b - a * a)))
    n_sub = n_sub.astype(int)
    starts = np.repeat(a, n_sub)
    widths = np.repeat((b - a) / n_sub, n_sub)
    starts = starts + widths * (np.arange(len(starts)) - np.repeat(np.cumsum(n_sub) - n_sub, n_sub))
    t, wt = _gauss_legendre(nodes)
    x = starts[:, None] + 0.5 * widths[:, None] * (t[None, :] + 1.0)
    f = np.exp(-(x / w) ** 2 - 1j * chirp * x * x) * (0.5 * widths[:, None] * wt[None, :])
    panel = f.sum(axis=1)
    mid = starts + 0.5 * widths
    s_mid = -m * mid - X
    pix = np.floor((s_mid - edges[0]) / geom.pitch).astype(int)
    return panel, pix


@lru_cache(maxsize=16)
def transfer_matrix(geom: ShaperGeometry, grid: SpectralGrid, nodes: int = GL_NODES,
                    max_panel: float = 0.5) -> sparse.csr_matrix:
    """Sparse map from pixel transmissions to the effective transfer on ``grid``.

    Each row integrates the Gaussian footprint against the chirp with composite
    Gauss-Legendre panels split at pixel boundaries, no wider than
    ``max_panel * w`` and spanning at most one radian of chirp phase.  Rows are
    normalized by the integral over the full window so an all-ones mask gives
    exactly one for beams fully on the array.
    """
    edges = geom.pixel_edges
    n_pix = geom.n_pixels
    chirp = geom.k_c * geom.magnification_m / (geom.focal_f * 1e3)
    X = geom.dispersion_scale * grid.delta
    reach = WINDOW_WAISTS * geom.beam_waist_w * geom.magnification_m
    rows, cols, vals = [], [], []
    for j in range(grid.n_points):
        if -X[j] + reach < edges[0] or -X[j] - reach > edges[-1]:
            continue
        panel, pix = _row_weights(geom, X[j], nodes, max_panel, edges, chirp)
        norm = panel.sum()
        ok = (pix >= 0) & (pix < n_pix)
        if not ok.any():
            continue
        acc = np.bincount(pix[ok], weights=panel[ok].real, minlength=n_pix) \
            + 1j * np.bincount(pix[ok], weights=panel[ok].imag, minlength=n_pix)
        nz = np.nonzero(acc)[0]
        rows.append(np.full(len(nz), j))
        cols.append(nz)
        vals.append(acc[nz] / norm)
    if rows:
        r, c, v = np.concatenate(rows), np.concatenate(cols), np.concatenate(vals)
    else:
        r = c = np.zeros(0, dtype=int)
        v = np.zeros(0, dtype=complex)
    return sparse.csr_matrix((v, (r, c)), shape=(grid.n_points, n_pix))


def effective_transfer(mask: PixelMask, geom: ShaperGeometry, grid: SpectralGrid,
                       **quadrature) -> TransferFunction:
    """Space-averaged transfer of a pixel mask (physical mode)."""
    if mask.n_pixels != geom.n_pixels or mask.pitch != geom.pitch \
            or mask.center_pixel_offset != geom.center_offset:
        raise ConfigError("pixel mask layout does not match the shaper geometry")
    W = transfer_matrix(geom, grid, **quadrature)
    return TransferFunction(grid, W @ mask.transmissions, "physical")
