"""Physical-mode scans with min/max envelopes over temperature and beam-waist corners.

    python scripts/uncertainty_bands.py [--presets fig2a fig3a ...] [--dT 1] [--dw 0.3] [--out DIR]
"""
import argparse
from pathlib import Path

import numpy as np

from biphoton.experiment import build_setup
from biphoton.scan import ScanResult, ScanSpec, run_scan, uncertainty_band


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--presets", nargs="+", default=["fig2a", "fig2b", "fig2c", "fig3a", "fig3b"])
    p.add_argument("--dT", type=float, default=1.0, help="temperature excursion, K")
    p.add_argument("--dw", type=float, default=0.3, help="relative beam-waist excursion")
    p.add_argument("--out", default="out/bands")
    args = p.parse_args()
    s = build_setup()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for preset in args.presets:
        spec = ScanSpec(preset, mode="physical")
        nominal = run_scan(spec, s.crystal, s.geometry, s.grid)
        low, high = uncertainty_band(spec, s.crystal, s.geometry, s.grid, args.dT, args.dw)
        rates = {}
        for name in nominal.rates:
            rates[name] = nominal.rates[name]
            rates[name + "_low"] = low.rates[name]
            rates[name + "_high"] = high.rates[name]
        table = ScanResult(preset, nominal.parameter, nominal.unit, nominal.values, rates)
        path = out / f"{preset}_band.csv"
        path.write_text(table.to_csv())
        spread = max(np.max(high.rates[k] - low.rates[k]) for k in nominal.rates)
        print(f"{path}: widest band {spread:.3g}")


if __name__ == "__main__":
    main()
