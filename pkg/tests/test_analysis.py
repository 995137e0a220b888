import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from biphoton import AnalysisError, ScanResult, ScanSpec, make_grid, run_scan
from biphoton.analysis import (carrier_frequency, coherence_time, frequency_bin, port_lag,
                               rate_spectrum, visibility)
from biphoton.verify import gaussian_coherence

TAUS = np.linspace(0.0, 600.0, 2401)


def delay_result(**cols):
    return ScanResult("custom", "tau", "fs", TAUS, {k: np.asarray(v) for k, v in cols.items()})


@settings(max_examples=30, deadline=None)
@given(st.floats(1.0, 6.0), st.floats(0.0, 2 * np.pi))
def test_synthetic_cosine(freq, phase):
    r = delay_result(g2_norm=0.5 + 0.4 * np.cos(freq * TAUS + phase))
    assert carrier_frequency(r, even=False) == pytest.approx(freq, rel=1e-3)


def test_synthetic_even_cosine():
    r = delay_result(g2_norm=0.5 + 0.5 * np.cos(1.7703 * TAUS) * np.exp(-TAUS / 200))
    assert carrier_frequency(r) == pytest.approx(1.7703, rel=1e-3)


def test_flat_curve_has_no_carrier():
    r = delay_result(g2_norm=np.exp(-(TAUS / 100) ** 2))
    with pytest.raises(AnalysisError, match="no carrier"):
        carrier_frequency(r)


def test_nonuniform_delays_rejected():
    t = np.sort(np.random.default_rng(0).uniform(0, 100, 50))
    with pytest.raises(AnalysisError):
        rate_spectrum(t, np.cos(t))


def test_frequency_bin():
    r = delay_result(g2_norm=np.zeros(len(TAUS)))
    assert frequency_bin(r) == pytest.approx(2 * np.pi / ((2 * len(TAUS) - 1) * 0.25))


def test_port_lag_half_period():
    w = 1.7703
    a = 0.5 + 0.5 * np.cos(w * TAUS)
    b = 0.5 - 0.5 * np.cos(w * TAUS)
    lag = port_lag(delay_result(g2_norm_phi0=a, g2_norm_phipi=b), w)
    assert abs(lag - np.pi / w) <= 0.25


@given(st.floats(1e-3, 1e3))
def test_visibility_scale_invariant(scale):
    g0 = 0.5 + 0.4 * np.cos(TAUS)
    gp = 0.5 - 0.3 * np.cos(TAUS)
    v1 = visibility(delay_result(g2_norm_phi0=g0, g2_norm_phipi=gp))
    v2 = visibility(delay_result(g2_norm_phi0=scale * g0, g2_norm_phipi=scale * gp))
    assert np.allclose(v1, v2, rtol=0, atol=1e-12)


def test_visibility_flags_empty_points():
    v = visibility(delay_result(g2_norm_phi0=np.zeros(len(TAUS)), g2_norm_phipi=np.zeros(len(TAUS))))
    assert np.all(np.isnan(v))


def test_visibility_two_results():
    a = delay_result(g2_norm=np.ones(len(TAUS)))
    b = delay_result(g2_norm=np.zeros(len(TAUS)))
    assert np.all(visibility(a, b) == 1.0)
    short = ScanResult("custom", "tau", "fs", TAUS[:10], {"g2_norm": np.ones(10)})
    with pytest.raises(AnalysisError):
        visibility(a, short)


def test_fig4b_has_no_carrier(setup):
    r = run_scan(ScanSpec("fig4b"), setup.crystal, setup.geometry, setup.grid)
    with pytest.raises(AnalysisError, match="no carrier"):
        carrier_frequency(r, "g2_norm_phi0")
    assert visibility(r)[0] == pytest.approx(1.0, abs=1e-9)


def test_fig4a_port_difference_carrier(setup):
    r = run_scan(ScanSpec("fig4a"), setup.crystal, setup.geometry, setup.grid)
    freqs, spec = rate_spectrum(r.values, r.rates["g2_norm_phi0"] - r.rates["g2_norm_phipi"])
    assert abs(freqs[np.argmax(spec)] - setup.grid.center) < 0.05 * setup.grid.center


def test_gaussian_coherence_time():
    numeric, exact = gaussian_coherence()
    assert numeric == pytest.approx(exact, rel=0.01)


def test_coherence_time_converges(setup):
    spec = ScanSpec("fig3b")
    t1 = coherence_time(run_scan(spec, setup.crystal, setup.geometry, setup.grid))
    fine = make_grid(setup.grid.omega_pc, setup.grid.half_span, 2 * setup.grid.n_points)
    t2 = coherence_time(run_scan(spec, setup.crystal, setup.geometry, fine))
    assert t2 == pytest.approx(t1, rel=5e-3)


def test_coherence_time_needs_decay():
    slopes = np.linspace(-10.0, 10.0, 21)
    r = ScanResult("custom", "slope", "fs", slopes, {"g2_norm": np.exp(-(slopes / 50) ** 2)})
    with pytest.raises(AnalysisError):
        coherence_time(r)
