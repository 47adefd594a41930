"""Sweep the pruning margin and report top-N overlap against the exact rank.

Generates one seeded corpus, draws a batch of random priority panels, and for
each margin value measures how much of the exact top-N survives pruning, plus
the phase timings. Output is an aligned table, or JSON rows with --json.

    python3 scripts/margin_sweep.py --count 100000 --seeds 30 --n 50
"""

import argparse
import json
import random
import sys
from statistics import fmean

from sensorsearch.corpus import Corpus, GeneratorConfig
from sensorsearch.engine import Engine


def sweep(count: int, corpus_seed: int, panel_seeds: int, n: int,
          margins: list[float]) -> list[dict]:
    corpus = Corpus.from_config(GeneratorConfig(count=count, seed=corpus_seed))
    engine = Engine(corpus)
    rng = random.Random(corpus_seed + 1)
    overlaps: dict[float, list[float]] = {margin: [] for margin in margins}
    timings: dict[float, list[float]] = {margin: [] for margin in margins}
    for _ in range(panel_seeds):
        priorities = [{"key": key, "slider": rng.uniform(1.0, 100.0)}
                      for key in corpus.property_keys]
        base = {"priorities": priorities, "n": n}
        exact_uids = {entry["uid"] for entry in engine.search(base)["entries"]}
        for margin in margins:
            doc = dict(base)
            doc["heuristic"] = {"enabled": True, "margin": margin}
            response = engine.search(doc)
            got = {entry["uid"] for entry in response["entries"]}
            overlaps[margin].append(len(exact_uids & got) / n)
            timing = response["timing_ms"]
            timings[margin].append(timing["prune"] + timing["rank"])
    return [{"margin": margin,
             "mean_overlap": fmean(overlaps[margin]),
             "min_overlap": min(overlaps[margin]),
             "mean_prune_rank_ms": fmean(timings[margin])}
            for margin in margins]


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--count", type=int, default=100_000)
    parser.add_argument("--seed", type=int, default=424242,
                        help="corpus seed")
    parser.add_argument("--seeds", type=int, default=30,
                        help="random priority panels per margin")
    parser.add_argument("--n", type=int, default=50)
    parser.add_argument("--margins", default="0,25,50,75,100",
                        help="comma-separated margin values")
    parser.add_argument("--json", action="store_true")
    args = parser.parse_args(argv)

    margins = [float(part) for part in args.margins.split(",")]
    rows = sweep(args.count, args.seed, args.seeds, args.n, margins)
    if args.json:
        print(json.dumps(rows, indent=2))
        return 0
    print(f"{args.count} sensors, top {args.n}, {args.seeds} priority panels")
    print(f"{'margin':>8}  {'mean overlap':>12}  {'min overlap':>11}  "
          f"{'prune+rank ms':>13}")
    for row in rows:
        print(f"{row['margin']:>8.0f}  {row['mean_overlap']:>12.4f}  "
              f"{row['min_overlap']:>11.4f}  "
              f"{row['mean_prune_rank_ms']:>13.2f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
