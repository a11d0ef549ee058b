#!/usr/bin/env python3
"""Run the synthetic end-to-end benchmark and print the metrics table.

Usage: python scripts/benchmark.py [--per-class N] [--seed S]
"""

import argparse

from hpl.classifier import format_metrics_table
from hpl.pipeline import run_benchmark
from hpl.symbols import SymbolClass


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--per-class", type=int, default=200)
    parser.add_argument("--seed", type=int, default=42)
    args = parser.parse_args()

    result = run_benchmark(per_class=args.per_class, seed=args.seed)
    print(format_metrics_table(result.report))
    print()
    m = result.report.confusion
    masses = {
        (a, b): int(m[a, b] + m[b, a])
        for a in range(len(SymbolClass))
        for b in range(a + 1, len(SymbolClass))
    }
    worst = max(masses, key=masses.get)
    print(f"train/test: {result.n_train}/{result.n_test}")
    print(f"macro-F1:   {result.report.macro_f1:.4f}")
    print(
        f"hardest pair: {SymbolClass(worst[0]).canonical_name} / "
        f"{SymbolClass(worst[1]).canonical_name} ({masses[worst]} confusions)"
    )
    print(f"elapsed:    {result.elapsed_s:.1f}s")


if __name__ == "__main__":
    main()
