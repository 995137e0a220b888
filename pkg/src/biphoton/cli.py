"""Command-line entry point: run a scenario or the verification suite."""
from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .errors import ConfigError, NumericError
from .experiment import build_setup
from .scan import PRESETS, run_scan
from .scenario import Scenario, format_scenario, parse_scenario, with_overrides

EXIT_OK, EXIT_FAILED_CHECKS, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


def resolved(scenario: Scenario, setup) -> Scenario:
    """Scenario with calibrated length and focal length written in."""
    return replace(
        scenario,
        crystal=replace(scenario.crystal, length=setup.crystal.length_L),
        geometry=replace(scenario.geometry, focal=setup.geometry.focal_f),
    )


def run(scenario: Scenario) -> list[Path]:
    """Calibrate, scan, and write ``<prefix>.csv`` plus a ``<prefix>.meta`` sidecar."""
    setup = build_setup(scenario.crystal, scenario.grid, scenario.geometry,
                        scenario.scan.compensate)
    result = run_scan(scenario.scan_spec(), setup.crystal, setup.geometry, setup.grid)
    out = Path(scenario.output.dir)
    out.mkdir(parents=True, exist_ok=True)
    prefix = scenario.output.prefix or scenario.scan.preset
    csv_path, meta_path = out / f"{prefix}.csv", out / f"{prefix}.meta"
    csv_path.write_text(result.to_csv())
    meta = ["# scan metadata"] + [f"#   {k} = {v}" for k, v in result.metadata.items()]
    meta_path.write_text("\n".join(meta) + "\n\n" + format_scenario(resolved(scenario, setup)))
    return [csv_path, meta_path]


def verify(stream=sys.stdout) -> int:
    from .verify import run_all

    results = run_all(stream)
    n_pass = sum(r.passed for r in results)
    print(f"{n_pass}/{len(results)} checks passed", file=stream)
    return EXIT_OK if n_pass == len(results) else EXIT_FAILED_CHECKS


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="biphoton", description=__doc__)
    p.add_argument("--scenario", type=Path, help="scenario file (defaults apply otherwise)")
    p.add_argument("--preset", choices=PRESETS, help="override the scan preset")
    p.add_argument("--out", help="output directory")
    p.add_argument("--mode", choices=("ideal", "physical"), help="shaper model")
    p.add_argument("--seed", type=int, help="seed for count noise (enables noise)")
    p.add_argument("--verify", action="store_true", help="run the verification suite")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.verify:
            return verify()
        if args.scenario is not None:
            try:
                text = args.scenario.read_text()
            except OSError as exc:
                raise ConfigError(f"cannot read scenario: {exc}") from None
            scenario = parse_scenario(text, str(args.scenario))
        else:
            scenario = Scenario()
        scenario = with_overrides(scenario, args.preset, args.mode, args.out, args.seed)
        for path in run(scenario):
            print(path)
        return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericError as exc:
        print(f"numeric error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
