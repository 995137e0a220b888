import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from biphoton import ConfigError, MaskSpec, g2, g2_reference, ideal_transfer, make_grid, spdc_amplitude
from biphoton.scan import ScanSpec, plan_scan
from biphoton.shaper import TransferFunction

G2_PHI2_2000 = 0.17677445357293137  # aperture-clipped ideal quadratic phase, 4096 grid


def test_open_transfer_is_one(setup, ap):
    amp = setup.amplitude
    assert g2(amp, ideal_transfer(MaskSpec.make("open"), setup.grid)).normalized == 1.0
    ref = ideal_transfer(MaskSpec.make("open"), setup.grid, ap)
    assert g2(amp, ref, ref).normalized == 1.0
    assert g2_reference(amp.params, MaskSpec.make("open"), ap).normalized == 1.0


def test_edge_at_center_blocks_everything(setup):
    tf = ideal_transfer(MaskSpec.make("edge", position=0.5 * setup.grid.d_omega), setup.grid)
    assert g2(setup.amplitude, tf).normalized < 1e-12


def test_quadratic_phase_golden(setup, ap):
    spec = MaskSpec.make("quadratic_phase", phi2=2000.0)
    ref = ideal_transfer(MaskSpec.make("open"), setup.grid, ap)
    value = g2(setup.amplitude, ideal_transfer(spec, setup.grid, ap), ref).normalized
    assert value == pytest.approx(G2_PHI2_2000, rel=1e-10)
    assert value == pytest.approx(g2_reference(setup.amplitude.params, spec, ap).normalized, abs=1e-6)


def _symmetric_grating(setup):
    plan = plan_scan(ScanSpec("fig2c"), setup.geometry, setup.amplitude)
    offset = plan.values[len(plan.values) // 2]
    return MaskSpec.make("grating", offset=offset, **plan.fixed)


@pytest.mark.parametrize("name", ["v_phase", "grating"])
def test_oracle_agrees(setup, ap, name):
    spec = MaskSpec.make("v_phase", slope=100.0) if name == "v_phase" else _symmetric_grating(setup)
    ref = ideal_transfer(MaskSpec.make("open"), setup.grid, ap)
    coarse = g2(setup.amplitude, ideal_transfer(spec, setup.grid, ap), ref).normalized
    dense = g2_reference(setup.amplitude.params, spec, ap).normalized
    assert abs(coarse - dense) < 1e-6


@given(st.floats(-np.pi, np.pi))
def test_global_phase_invariance(setup, theta):
    tf = ideal_transfer(MaskSpec.make("v_phase", slope=80.0), setup.grid)
    rotated = TransferFunction(setup.grid, tf.values * np.exp(1j * theta))
    a = g2(setup.amplitude, tf).raw
    assert g2(setup.amplitude, rotated).raw == pytest.approx(a, rel=1e-12)


@given(st.floats(0.01, 1.0))
def test_scaling_covariance(setup, alpha):
    tf = ideal_transfer(MaskSpec.make("quadratic_phase", phi2=900.0), setup.grid)
    scaled = TransferFunction(setup.grid, alpha * tf.values)
    a = g2(setup.amplitude, tf).raw
    assert g2(setup.amplitude, scaled).raw == pytest.approx(alpha ** 4 * a, rel=1e-12)


@settings(max_examples=25)
@given(st.lists(st.booleans(), min_size=2048, max_size=2048))
def test_conjugate_pair_blocking(setup, low_side):
    # block exactly one photon of every pair, choosing which side at random
    n = setup.grid.n_points
    m = np.ones(n, dtype=complex)
    c = n // 2
    for k, low in enumerate(low_side[:c - 1], start=1):
        m[c - k if low else c + k] = 0
    m[c] = 0
    tf = TransferFunction(setup.grid, m)
    assert g2(setup.amplitude, tf).raw < 1e-12


def test_rates_bounded_for_passive_masks(setup, ap):
    ref = ideal_transfer(MaskSpec.make("open"), setup.grid, ap)
    for spec in (MaskSpec.make("slice", center=0.01, width=0.005),
                 MaskSpec.make("interferometer", tau=40.0, gamma=0.0),
                 MaskSpec.make("v_phase", slope=-50.0)):
        r = g2(setup.amplitude, ideal_transfer(spec, setup.grid, ap), ref)
        assert r.raw >= 0 and r.normalized <= 1 + 1e-9


PHI2_SWEEP = np.linspace(-4000.0, 4000.0, 81)


def _on_interval(grid, h):
    """Transfer window for the trapezoid on [-h, h]; sqrt(1/2) gives pair weight 1/2."""
    d = np.abs(grid.delta)
    win = np.where(d < h - 1e-12, 1.0, 0.0)
    win[np.isclose(d, h, rtol=0, atol=1e-12)] = np.sqrt(0.5)
    return win


def test_grid_convergence_fixed_interval(setup):
    coarse = setup.amplitude
    fine = spdc_amplitude(setup.crystal, make_grid(setup.grid.omega_pc, setup.grid.half_span, 8192))
    win = _on_interval(fine.grid, coarse.grid.delta[-1])
    ref = TransferFunction(fine.grid, win)
    for phi2 in PHI2_SWEEP:
        spec = MaskSpec.make("quadratic_phase", phi2=phi2)
        a = g2(coarse, ideal_transfer(spec, coarse.grid)).normalized
        b = g2(fine, TransferFunction(fine.grid, ideal_transfer(spec, fine.grid).values * win),
               ref).normalized
        assert abs(a - b) < 1e-6


@pytest.mark.xfail(strict=True, reason="at fixed span the trapezoid interval grows by one "
                   "step on doubling and the truncated sinc tail moves the rate by up to 3e-6")
def test_grid_convergence_fixed_span(setup):
    fine = spdc_amplitude(setup.crystal, make_grid(setup.grid.omega_pc, setup.grid.half_span, 8192))
    for phi2 in PHI2_SWEEP:
        spec = MaskSpec.make("quadratic_phase", phi2=phi2)
        a = g2(setup.amplitude, ideal_transfer(spec, setup.grid)).normalized
        b = g2(fine, ideal_transfer(spec, fine.grid)).normalized
        assert abs(a - b) < 1e-6


def test_grid_mismatch(setup):
    other = make_grid(setup.grid.omega_pc, setup.grid.half_span, 2048)
    with pytest.raises(ConfigError):
        g2(setup.amplitude, ideal_transfer(MaskSpec.make("open"), other))


def test_zero_reference(setup):
    zero = TransferFunction(setup.grid, np.zeros(setup.grid.n_points))
    with pytest.raises(ConfigError):
        g2(setup.amplitude, zero, zero)
