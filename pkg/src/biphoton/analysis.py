"""Post-processing of delay scans: carrier, visibility, coherence time."""
from __future__ import annotations

import numpy as np
from scipy.signal import find_peaks, get_window, peak_prominences

from .errors import AnalysisError
from .scan import ScanResult

PEAK_FLOOR_FACTOR = 3.0
NUMERIC_FLOOR = 1e-6  # relative to the strongest bin: below the quadrature accuracy of the rates
CARRIER_WINDOW = "hann"
VISIBILITY_MIN_DENOM = 1e-12


def _uniform_step(x: np.ndarray) -> float:
    steps = np.diff(x)
    if len(x) < 3 or not np.allclose(steps, steps[0], rtol=1e-9, atol=0):
        raise AnalysisError("carrier analysis needs uniformly sampled delays")
    return float(steps[0])


def rate_spectrum(taus, rates, even: bool = True, window: str | None = None):
    """|DFT| of the mean-subtracted rate against angular frequency (rad/fs).

    Delay scans of a symmetric interferometer are even in tau; with ``even``
    the curve is reflected about its first sample before transforming, which
    removes the window-edge jump when the scan starts at tau = 0.  ``window``
    names an optional taper from ``scipy.signal.get_window``.
    """
    taus = np.asarray(taus, dtype=float)
    y = np.asarray(rates, dtype=float)
    dt = _uniform_step(taus)
    if even:
        y = np.concatenate([y[:0:-1], y])
    y = y - y.mean()
    if window is not None:
        y = y * get_window(window, len(y), fftbins=False)
    spec = np.abs(np.fft.rfft(y))
    freqs = 2 * np.pi * np.fft.rfftfreq(len(y), dt)
    return freqs, spec


def _carrier_peak(freqs, spec):
    """Strongest line standing 3x above both its local and the global floor.

    The local floor of a peak is the higher of its two prominence bases, so
    ripple on the slope of the DC lobe does not count as a line.
    """
    floor = max(np.median(spec[1:]), NUMERIC_FLOOR * spec[1:].max())
    peaks, _ = find_peaks(spec)
    peaks = peaks[peaks > 1]
    if len(peaks):
        _, left, right = peak_prominences(spec, peaks)
        local = np.maximum(spec[left], spec[right])
        keep = (spec[peaks] > PEAK_FLOOR_FACTOR * floor) & (spec[peaks] > PEAK_FLOOR_FACTOR * local)
        peaks = peaks[keep]
    if len(peaks) == 0:
        raise AnalysisError("no carrier: no spectral peak above 3x the noise floor")
    return int(peaks[np.argmax(spec[peaks])])


def carrier_frequency(result: ScanResult, column: str | None = None, even: bool = True) -> float:
    """Frequency of the strongest non-DC spectral line, parabolically refined.

    The curve is Hann tapered so that window sidelobes and leakage cannot
    pose as lines; see ``_carrier_peak`` for the acceptance rule.
    """
    rates = result.rates[column] if column else result.rate
    freqs, spec = rate_spectrum(result.values, rates, even, CARRIER_WINDOW)
    k = _carrier_peak(freqs, spec)
    a, b, c = spec[k - 1], spec[k], spec[k + 1]
    denom = a - 2 * b + c
    shift = 0.5 * (a - c) / denom if denom != 0 else 0.0
    return float(freqs[k] + shift * (freqs[1] - freqs[0]))


def frequency_bin(result: ScanResult, even: bool = True) -> float:
    """Spacing of the DFT bins used by ``carrier_frequency``."""
    dt = _uniform_step(np.asarray(result.values, dtype=float))
    n = 2 * len(result.values) - 1 if even else len(result.values)
    return 2 * np.pi / (n * dt)


def band_level(result: ScanResult, omega: float, column: str | None = None,
               half_width_bins: int = 2, even: bool = True) -> float:
    """Largest spectral magnitude within a few bins of ``omega``."""
    rates = result.rates[column] if column else result.rate
    freqs, spec = rate_spectrum(result.values, rates, even)
    k = int(np.argmin(np.abs(freqs - omega)))
    return float(spec[max(k - half_width_bins, 1):k + half_width_bins + 1].max())


def dc_level(result: ScanResult, column: str | None = None, even: bool = True) -> float:
    """Magnitude of the zero-frequency bin before mean subtraction."""
    rates = np.asarray(result.rates[column] if column else result.rate, dtype=float)
    if even:
        rates = np.concatenate([rates[:0:-1], rates])
    return float(abs(rates.sum()))


def port_lag(result: ScanResult, carrier: float, col_a: str = "g2_norm_phi0",
             col_b: str = "g2_norm_phipi") -> float:
    """Delay within one carrier period that best maps curve b onto curve a.

    Maximizes sum_t a(t + L) b(t) over lags L in [0, 2 pi / carrier).
    """
    taus = np.asarray(result.values, dtype=float)
    dt = _uniform_step(taus)
    a = result.rates[col_a] - result.rates[col_a].mean()
    b = result.rates[col_b] - result.rates[col_b].mean()
    n_lag = int(np.ceil(2 * np.pi / carrier / dt))
    if n_lag >= len(taus):
        raise AnalysisError("scan too short for a lag search")
    scores = [np.dot(a[k:], b[:len(b) - k]) / (len(b) - k) for k in range(n_lag)]
    return float(np.argmax(scores) * dt)


def visibility(result_phi0: ScanResult, result_phipi: ScanResult | None = None) -> np.ndarray:
    """V = |G0 - Gpi| / (G0 + Gpi); NaN where the denominator vanishes.

    Pass either two single-port results on the same delays or one result
    holding both ports.
    """
    if result_phipi is None:
        g0 = result_phi0.rates["g2_norm_phi0"]
        gp = result_phi0.rates["g2_norm_phipi"]
    else:
        if not np.array_equal(result_phi0.values, result_phipi.values):
            raise AnalysisError("visibility needs identical delay grids")
        g0, gp = result_phi0.rate, result_phipi.rate
    g0 = np.asarray(g0, dtype=float)
    gp = np.asarray(gp, dtype=float)
    denom = g0 + gp
    out = np.full(len(g0), np.nan)
    ok = denom >= VISIBILITY_MIN_DENOM
    out[ok] = np.abs(g0[ok] - gp[ok]) / denom[ok]
    return out


def coherence_time(result: ScanResult, delay_factor: float = 2.0) -> float:
    """FWHM of the V-phase scan against effective delay (fs).

    A V-shaped phase of slope s delays the signal by +s and the idler by -s,
    so the relative delay is 2 s.
    """
    x = delay_factor * np.asarray(result.values, dtype=float)
    y = np.asarray(result.rate, dtype=float)
    peak = int(np.argmax(y))
    if y[0] > 0.1 * y[peak] or y[-1] > 0.1 * y[peak]:
        raise AnalysisError("scan does not cover the decay of the rate")
    half = 0.5 * y[peak]
    i = peak
    while i > 0 and y[i - 1] >= half:
        i -= 1
    j = peak
    while j < len(y) - 1 and y[j + 1] >= half:
        j += 1
    left = x[i - 1] + (half - y[i - 1]) * (x[i] - x[i - 1]) / (y[i] - y[i - 1])
    right = x[j] + (half - y[j]) * (x[j + 1] - x[j]) / (y[j + 1] - y[j])
    return float(right - left)
