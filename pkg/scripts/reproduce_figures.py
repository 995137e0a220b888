"""Run every figure preset on the calibrated default setup and write CSV files.

    python scripts/reproduce_figures.py [--out DIR] [--mode ideal|physical] [--seed N]
"""
import argparse
from dataclasses import replace

from biphoton.analysis import carrier_frequency, coherence_time, visibility
from biphoton.cli import run
from biphoton.errors import AnalysisError
from biphoton.experiment import build_setup
from biphoton.scan import PRESETS, NoiseModel, ScanSpec, run_scan
from biphoton.scenario import Scenario, ScanConfig


def summarize(setup, mode):
    scan = lambda preset: run_scan(ScanSpec(preset, mode=mode), setup.crystal, setup.geometry,
                                   setup.grid)
    print(f"coherence time from fig3b: {coherence_time(scan('fig3b')):.1f} fs")
    a = scan("fig4a")
    print(f"fig4a strongest line of the phi=0 rate: {carrier_frequency(a, 'g2_norm_phi0'):.4f} rad/fs")
    b = scan("fig4b")
    try:
        carrier_frequency(b, "g2_norm_phi0")
        print("fig4b: carrier found")
    except AnalysisError:
        print("fig4b: no carrier")
    print(f"fig4b visibility at tau = 0: {visibility(b)[0]:.6f}")


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--out", default="out/figures")
    p.add_argument("--mode", choices=("ideal", "physical"), default="ideal")
    p.add_argument("--seed", type=int, help="add Poisson count noise with this seed")
    args = p.parse_args()
    noise = NoiseModel(seed=args.seed) if args.seed is not None else None
    for preset in PRESETS:
        if preset == "custom":
            continue
        sc = Scenario(scan=ScanConfig(preset=preset, mode=args.mode), noise=noise)
        sc = replace(sc, output=replace(sc.output, dir=args.out))
        for path in run(sc):
            print(path)
    summarize(build_setup(), args.mode)


if __name__ == "__main__":
    main()
