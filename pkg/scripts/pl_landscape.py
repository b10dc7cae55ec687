#!/usr/bin/env python3
"""Field dependence of the steady-state photoluminescence and its derivative.

Sweeps the static field for the configured center, writes both curves as CSV
and prints the local extrema together with the nearest level crossings, which
is the quickest way to see which anticrossing each feature belongs to.
"""

from __future__ import annotations

import argparse
from pathlib import Path

import numpy as np

from silvac.cli import load_config
from silvac.observables import pl_derivative_sweep, pl_field_sweep, sweep_with_overrides


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", type=Path, default=Path(__file__).resolve().parents[1] / "configs" / "default.toml")
    ap.add_argument("--start", type=float, default=0.0)
    ap.add_argument("--stop", type=float, default=20.0)
    ap.add_argument("--points", type=int, default=501)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--out-prefix", type=Path, default=Path("pl_landscape"))
    args = ap.parse_args()

    cfg = load_config(args.config, "pl-sweep")
    spec = sweep_with_overrides(cfg.sweep, start=args.start, stop=args.stop, points=args.points)

    pl = pl_field_sweep(cfg.system, cfg.rates, spec, threads=args.threads)
    dpl = pl_derivative_sweep(cfg.system, cfg.rates, spec, threads=args.threads)

    for name, result in (("pl", pl), ("dpl_db", dpl)):
        path = args.out_prefix.with_name(args.out_prefix.name + f"_{name}.csv")
        np.savetxt(
            path,
            np.column_stack([result.abscissa, result.raw]),
            delimiter=",",
            header="field_mT,value_per_ns",
            comments="",
        )
        print(f"wrote {path} ({len(result.abscissa)} points)")

    y = pl.raw
    d = np.diff(y)
    print("\nlocal extrema of I_PL(B):")
    for i in range(len(d) - 1):
        if d[i] * d[i + 1] < 0:
            b = float(pl.abscissa[i + 1])
            kind = "max" if d[i] > 0 else "min"
            label, off = pl.nearest_annotation(b)
            print(f"  B = {b:7.3f} mT  {kind}  I_PL = {y[i + 1]:.6e}  nearest crossing: {label} ({off:+.3f} mT away)")
    print(f"\nsolver diagnostics: {pl.diagnostics}")


if __name__ == "__main__":
    main()
