#!/usr/bin/env python3
"""Dump a few generated arrows per class (and one multi-symbol sheet) as PGM
files, for eyeballing the generator output.

Usage: python scripts/render_samples.py [--out DIR] [--seeds N]
"""

import argparse
from pathlib import Path

from hpl.dataset import compose_sheet, gen_arrow
from hpl.imaging import encode_pgm
from hpl.symbols import SymbolClass


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="samples")
    parser.add_argument("--seeds", type=int, default=3)
    args = parser.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for cls in SymbolClass:
        for seed in range(args.seeds):
            item = gen_arrow(cls, seed=seed, size=300)
            (out / f"{item.id}.pgm").write_bytes(encode_pgm(item.image))
    sheet = compose_sheet([gen_arrow(cls, seed=0, size=300).image for cls in SymbolClass])
    (out / "sheet.pgm").write_bytes(encode_pgm(sheet))
    print(f"wrote {6 * args.seeds + 1} files to {out}/")


if __name__ == "__main__":
    main()
