#!/usr/bin/env python3
"""Level-crossing atlas: positions, mixing elements and numeric gaps.

Thin driver over the `lc-atlas` subcommand; runs it for the given config and
prints the resulting table in a readable layout.
"""

from __future__ import annotations

import argparse
import csv
import sys
import tempfile
from pathlib import Path

from silvac.cli import main as cli_main


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", type=Path, default=Path(__file__).resolve().parents[1] / "configs" / "default.toml")
    ap.add_argument("--out", type=Path, default=None)
    args = ap.parse_args()

    out = args.out or Path(tempfile.mkdtemp()) / "lc_atlas.csv"
    code = cli_main(["lc-atlas", "--config", str(args.config), "--out", str(out)])
    if code != 0:
        sys.exit(code)

    with out.open() as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    header, body = rows[0], rows[1:]
    col = {name: i for i, name in enumerate(header)}

    def fmt(r: list[str], key: str, spec: str) -> str:
        raw = r[col[key]]
        if raw in ("", "nan"):
            return "-"
        return format(float(raw), spec)

    print(f"\n{'block':5s} {'family':8s} {'B (mT)':>9s} {'pair':>18s} {'|V| (mT)':>10s} {'gap (rad/ns)':>13s} {'gap/2V':>8s}")
    for r in body:
        print(
            f"{r[col['state_block']]:5s} {r[col['family']]:8s} {float(r[col['b_cross_mT']]):9.4f} "
            f"{r[col['pair']]:>18s} {fmt(r, 'element_abs_mT', '10.5f'):>10s} "
            f"{fmt(r, 'gap_radns', '13.4e'):>13s} {fmt(r, 'gap_over_two_elements', '8.3f'):>8s}"
        )
    print(f"\nfull table: {out}")


if __name__ == "__main__":
    main()
