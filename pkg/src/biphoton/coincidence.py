"""Sum-frequency coincidence rate G2(0,0) = |int M(w) M(w_pc - w) xi(w) dw|^2."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .amplitude import AmplitudeParams, BiphotonAmplitude
from .dispersion import wavenumber
from .errors import ConfigError
from .masks import MaskSpec, evaluate
from .shaper import TransferFunction

ORACLE_FACTOR = 16


@dataclass(frozen=True)
class CoincidenceResult:
    raw: float
    normalized: float
    grid_n: int


def pair_integral(amp: BiphotonAmplitude, values: np.ndarray) -> complex:
    """Trapezoid over samples 1..n-1, each paired with its mirrored partner."""
    m = np.asarray(values)
    f = m[1:] * m[1:][::-1] * amp.values[1:]
    s = f.sum() - 0.5 * (f[0] + f[-1])
    return complex(s * amp.grid.d_omega)


def g2(amp: BiphotonAmplitude, tf: TransferFunction,
       reference: TransferFunction | None = None) -> CoincidenceResult:
    """Coincidence rate, normalized to ``reference`` (identity transfer by default)."""
    if tf.grid != amp.grid or (reference is not None and reference.grid != amp.grid):
        raise ConfigError("transfer function and amplitude live on different grids")
    raw = abs(pair_integral(amp, tf.values)) ** 2
    if reference is None:
        ref = abs(pair_integral(amp, np.ones(amp.grid.n_points))) ** 2
    else:
        ref = abs(pair_integral(amp, reference.values)) ** 2
    if ref == 0:
        raise ConfigError("reference transfer blocks every photon pair")
    return CoincidenceResult(raw, raw / ref, amp.grid.n_points)


# -- independent dense-grid oracle -----------------------------------------

@lru_cache(maxsize=32)
def _dense_amplitude(params: AmplitudeParams, factor: int):
    """xi on a half-offset grid ``factor`` times denser, built from scratch."""
    d_coarse = 2.0 * params.half_span / params.n_points
    n_fine = factor * (params.n_points - 2)
    d_fine = d_coarse / factor
    delta = (np.arange(n_fine) - 0.5 * (n_fine - 1)) * d_fine

    def x_of(crystal):
        mat, T = crystal.material, crystal.temperature
        c = 0.5 * params.omega_pc
        dk = (wavenumber(mat, params.omega_pc, T)
              - wavenumber(mat, c + delta, T) - wavenumber(mat, c - delta, T)
              - 2 * np.pi / crystal.poling_period_G) * 1e3 + crystal.qpm_offset
        return 0.5 * crystal.length_L * dk

    x = x_of(params.crystal)
    if params.compensate == "none":
        phase = -x
    elif params.compensate == "flat":
        ref = params.reference or params.crystal
        phase = -x + (x if ref is params.crystal else x_of(ref))
    else:
        phase = -x - params.quad_coeff * delta ** 2
    xi = np.sinc(x / np.pi) * np.exp(1j * phase)
    return delta, xi, d_fine


def g2_reference(params: AmplitudeParams, spec: MaskSpec, aperture=None,
                 factor: int = ORACLE_FACTOR) -> CoincidenceResult:
    """Normalized rate by direct midpoint summation on a dense offset grid.

    The dense grid covers the same interval as the trapezoid of ``g2``; its
    nodes avoid the coarse samples, and the mirror of node i is node N-1-i.
    """
    delta, xi, d = _dense_amplitude(params, factor)
    m = evaluate(spec, delta, params.omega_pc)
    window = np.ones(len(delta))
    if aperture is not None:
        window = ((delta > aperture[0]) & (delta < aperture[1])).astype(float)
    m = m * window
    pair = m * m[::-1]
    raw = abs(np.sum(pair * xi) * d) ** 2
    ref = abs(np.sum(window * window[::-1] * xi) * d) ** 2
    return CoincidenceResult(raw, raw / ref, len(delta))
