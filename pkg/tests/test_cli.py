import pytest
from hypothesis import given, strategies as st

from biphoton import ConfigError
from biphoton.cli import EXIT_CONFIG, EXIT_NUMERIC, EXIT_OK, main
from biphoton.scenario import Scenario, format_scenario, parse_number, parse_scenario


def test_minimal_scenario_defaults():
    sc = parse_scenario("[scan]\npreset = fig2a\n")
    assert sc == Scenario()


def test_units_convert():
    sc = parse_scenario("""
[crystal]
temperature = 29.5 C     # set point
poling_period = 9 um
pump_wavelength = 532 nm
length = 9.3 mm
[geometry]
pitch = 0.1 mm
[scan]
preset = fig3a
lo = -2000 fs2
hi = 2000 fs2
""")
    assert sc.crystal.temperature == 29.5
    assert sc.crystal.pump_wavelength == pytest.approx(0.532)
    assert sc.crystal.length == pytest.approx(9.3)
    assert sc.geometry.pitch == pytest.approx(100.0)
    assert sc.scan_spec().range == (-2000.0, 2000.0)
    assert parse_scenario("[crystal]\ntemperature = 302.65 K\n").crystal.temperature == pytest.approx(29.5)


def test_bad_unit_names_line():
    with pytest.raises(ConfigError, match="s.ini:3"):
        parse_scenario("[geometry]\n\npitch = 100 banana\n", "s.ini")


@pytest.mark.parametrize("text, match", [
    ("[nope]\n", "unknown section"),
    ("[scan]\ncolour = red\n", "unknown key"),
    ("preset = fig2a\n", "outside any section"),
    ("[scan]\npreset\n", "key = value"),
    ("[geometry]\nn_pixels = 6.5\n", "integer"),
    ("[geometry]\nmagnification = 2 mm\n", "plain number"),
    ("[crystal]\ntemperature = 3 fs\n", "not a temperature"),
    ("[scan]\nmask.colour = 1\n", "unknown mask parameter"),
    ("[scan]\npreset = fig2a\nlo = 0.1\n", "both lo and hi"),
])
def test_scenario_errors(text, match):
    with pytest.raises(ConfigError, match=match):
        parse_scenario(text)


def test_auto_values():
    sc = parse_scenario("[crystal]\nlength = auto\n[geometry]\nfocal = auto\nbeam_waist = 150 um\n")
    assert sc.crystal.length is None and sc.geometry.focal is None
    assert sc.geometry.beam_waist == 150.0


@given(st.floats(-1e4, 1e4, allow_nan=False), st.sampled_from(["", " um", " nm", " fs"]))
def test_parse_number_round_trip(value, unit):
    parsed, dim = parse_number(repr(value) + unit, "here")
    factor = {"": 1.0, " um": 1.0, " nm": 1e-3, " fs": 1.0}[unit]
    assert parsed == pytest.approx(value * factor, rel=1e-15, abs=0)


@given(st.floats(1.0, 40.0), st.floats(0.0, 80.0), st.floats(5.0, 200.0),
       st.sampled_from(["fig2a", "fig3b", "fig4a"]))
def test_format_round_trip(length, temperature, target, preset):
    text = f"[crystal]\nlength = {length!r}\ntemperature = {temperature!r} C\ntarget_fwhm = {target!r} nm\n" \
           f"[scan]\npreset = {preset}\nmask.slope = 3\n[noise]\nseed = 4\n"
    sc = parse_scenario(text)
    assert parse_scenario(format_scenario(sc)) == sc


def test_pixel_scan_round_trip():
    sc = parse_scenario("[scan]\npreset = fig2a\nlo = -100 px\nhi = 100 px\nn_steps = 5\n")
    assert sc.scan.units == "pixel"
    assert parse_scenario(format_scenario(sc)) == sc


def run_cli(tmp_path, text, *extra):
    path = tmp_path / "scenario.ini"
    path.write_text(text)
    return main(["--scenario", str(path), "--out", str(tmp_path / "out"), *extra])


def test_fig4a_csv(tmp_path):
    assert run_cli(tmp_path, "[scan]\npreset = fig4a\nn_steps = 21\n") == EXIT_OK
    lines = (tmp_path / "out" / "fig4a.csv").read_text().splitlines()
    assert lines[0] == "tau_fs,g2_norm_phi0,g2_norm_phipi"
    assert len(lines) == 22


def test_runs_byte_identical(tmp_path):
    text = "[scan]\npreset = fig2c\n[noise]\nseed = 5\n"
    for name in ("a", "b"):
        assert main_in(tmp_path / name, text) == EXIT_OK
    a, b = tmp_path / "a", tmp_path / "b"
    assert (a / "fig2c.csv").read_bytes() == (b / "fig2c.csv").read_bytes()

    def meta(folder):  # identical apart from the output directory
        return [l for l in (folder / "fig2c.meta").read_text().splitlines() if not l.startswith("dir =")]

    assert meta(a) == meta(b)


def main_in(folder, text):
    folder.mkdir()
    (folder / "s.ini").write_text(text)
    return main(["--scenario", str(folder / "s.ini"), "--out", str(folder)])


def test_sidecar_reproduces_run(tmp_path):
    assert run_cli(tmp_path, "[scan]\npreset = fig3b\nn_steps = 31\n[noise]\nseed = 2\n") == EXIT_OK
    out = tmp_path / "out"
    first = (out / "fig3b.csv").read_bytes()
    meta = out / "fig3b.meta"
    again = tmp_path / "again"
    assert main(["--scenario", str(meta), "--out", str(again)]) == EXIT_OK
    assert (again / "fig3b.csv").read_bytes() == first


def test_meta_records_resolved_calibration(tmp_path):
    run_cli(tmp_path, "[scan]\npreset = fig2a\nn_steps = 5\n")
    sc = parse_scenario((tmp_path / "out" / "fig2a.meta").read_text())
    assert sc.crystal.length == pytest.approx(9.30347126434208, rel=1e-12)
    assert sc.geometry.focal is not None


def test_preset_and_seed_overrides(tmp_path):
    assert run_cli(tmp_path, "[scan]\npreset = fig2a\nn_steps = 5\n", "--preset", "fig3a",
                   "--seed", "1") == EXIT_OK
    head = (tmp_path / "out" / "fig3a.csv").read_text().splitlines()[0]
    assert head == "phi2_fs2,g2_norm,counts"


def test_config_error_exit(tmp_path, capsys):
    assert run_cli(tmp_path, "[geometry]\npitch = 100 banana\n") == EXIT_CONFIG
    assert "scenario.ini:2" in capsys.readouterr().err


def test_missing_scenario_file(tmp_path):
    assert main(["--scenario", str(tmp_path / "missing.ini")]) == EXIT_CONFIG


def test_unreachable_bandwidth_exit(tmp_path, capsys):
    assert run_cli(tmp_path, "[crystal]\ntarget_fwhm = 1e6 nm\n") == EXIT_NUMERIC
    assert "CalibrationError" in capsys.readouterr().err


def test_physical_mode_flag(tmp_path):
    assert run_cli(tmp_path, "[scan]\npreset = fig2a\nn_steps = 5\n", "--mode", "physical") == EXIT_OK
    assert "mode = physical" in (tmp_path / "out" / "fig2a.meta").read_text()
