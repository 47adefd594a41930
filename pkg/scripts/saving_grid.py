"""Print the analytic bytes-saved grid for the sampled parallel strategy.

For a cluster shape (node count, records per node, record size) this tabulates
how many megabytes the two-round sampling protocol saves versus plain parallel
collection, for each (k, N) pair. Cells with k >= N are inapplicable. With
--fit it instead re-derives the record size from the built-in reference grid
and reports the residuals.

    python3 scripts/saving_grid.py --nodes 4 --per-node 1000000
    python3 scripts/saving_grid.py --fit
"""

import argparse
import json
import sys

from sensorsearch.distributed import (REFERENCE_K_VALUES, REFERENCE_N_VALUES,
                                      analytic_saving, fit_record_size)

MB = 1e6


def grid_rows(nodes: int, per_node: int, record_size: float,
              k_values: list[int], n_values: list[int]) -> list[list[str]]:
    rows = [["k\\N"] + [str(n) for n in n_values]]
    for k in k_values:
        row = [str(k)]
        for n in n_values:
            if k >= n:
                row.append("-")
                continue
            estimate = analytic_saving(nodes, per_node, n, k, record_size)
            row.append(f"{estimate.reconstruction_bytes / MB:+.1f}")
        rows.append(row)
    return rows


def print_aligned(rows: list[list[str]]) -> None:
    widths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]))]
    for row in rows:
        print("  ".join(cell.rjust(widths[i]) for i, cell in enumerate(row)))


def run_fit(as_json: bool) -> int:
    fit = fit_record_size()
    if as_json:
        print(json.dumps({
            "record_size": fit.record_size,
            "fraction_within": fit.fraction_within(),
            "worst_error_mb": max(abs(cell.error_mb) for cell in fit.cells),
        }, indent=2))
        return 0
    print(f"fitted record size: {fit.record_size:.2f} bytes")
    print(f"cells within max(5%, 0.3 MB): {fit.fraction_within():.1%}")
    worst = max(fit.cells, key=lambda cell: abs(cell.error_mb))
    print(f"worst cell: k={worst.k} N={worst.n_requested} "
          f"error {worst.error_mb:+.3f} MB")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--nodes", type=int, default=4)
    parser.add_argument("--per-node", type=int, default=1_000_000)
    parser.add_argument("--record-size", type=float, default=202.33)
    parser.add_argument("--k-values",
                        default=",".join(str(k) for k in REFERENCE_K_VALUES))
    parser.add_argument("--n-values",
                        default=",".join(str(n) for n in REFERENCE_N_VALUES))
    parser.add_argument("--fit", action="store_true",
                        help="re-derive the record size from the reference grid")
    parser.add_argument("--json", action="store_true")
    args = parser.parse_args(argv)

    if args.fit:
        return run_fit(args.json)
    k_values = [int(part) for part in args.k_values.split(",")]
    n_values = [int(part) for part in args.n_values.split(",")]
    rows = grid_rows(args.nodes, args.per_node, args.record_size,
                     k_values, n_values)
    if args.json:
        print(json.dumps({"rows": rows}, indent=2))
        return 0
    print(f"{args.nodes} nodes, {args.per_node} records per node, "
          f"{args.record_size:.2f} B per record; saving in MB, - where k >= N")
    print_aligned(rows)
    return 0


if __name__ == "__main__":
    sys.exit(main())
