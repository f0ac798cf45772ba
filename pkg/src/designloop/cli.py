"""Command-line entry points: catalog generation, descriptor inspection,
benchmark runs, and the live session server."""

from __future__ import annotations

import argparse
import json
import sys

from . import catalog as catalog_mod
from . import imaging, simbench


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="designloop")
    sub = parser.add_subparsers(dest="command", required=True)

    p_catalog = sub.add_parser("catalog", help="catalog operations")
    catalog_sub = p_catalog.add_subparsers(dest="subcommand", required=True)
    p_gen = catalog_sub.add_parser("gen", help="generate a design catalog")
    p_gen.add_argument("--size", type=int, required=True)
    p_gen.add_argument("--px", type=int, default=128, help="square image size in pixels")
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--out", required=True)

    p_imaging = sub.add_parser("imaging", help="descriptor operations")
    imaging_sub = p_imaging.add_subparsers(dest="subcommand", required=True)
    p_desc = imaging_sub.add_parser("describe", help="print a design's descriptors as JSON")
    p_desc.add_argument("--design", required=True)
    p_desc.add_argument("--catalog", required=True)

    p_bench = sub.add_parser("bench", help="simulated-user benchmark")
    bench_sub = p_bench.add_subparsers(dest="subcommand", required=True)
    p_run = bench_sub.add_parser("run", help="run the automated experiment")
    p_run.add_argument("--task", required=True, choices=sorted(simbench.TASKS))
    p_run.add_argument("--strategy", required=True)
    p_run.add_argument("--rounds", type=int, default=26)
    p_run.add_argument("--runs", type=int, default=90)
    p_run.add_argument("--holdout", type=int, default=2000)
    p_run.add_argument("--catalog", required=True)
    p_run.add_argument("--seed", type=int, default=0)
    p_run.add_argument("--out", required=True)

    p_serve = sub.add_parser("serve", help="serve the session API")
    p_serve.add_argument("--catalog", required=True)
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--transcript-dir", default=None)

    args = parser.parse_args(argv)

    if args.command == "catalog" and args.subcommand == "gen":
        cat = catalog_mod.generate_catalog(args.size, (args.px, args.px), args.seed)
        out = catalog_mod.save_catalog(cat, args.out)
        print(f"wrote {len(cat)} designs to {out}")
        return 0

    if args.command == "imaging" and args.subcommand == "describe":
        cat = catalog_mod.load_catalog(args.catalog)
        if args.design not in cat:
            print(f"unknown design {args.design!r}", file=sys.stderr)
            return 1
        design = cat[args.design]
        payload = {
            "shape": imaging.shape_descriptor(design.mask).vector.tolist(),
            "color": imaging.color_descriptor(design.image, design.mask).vector.tolist(),
        }
        print(json.dumps(payload))
        return 0

    if args.command == "bench" and args.subcommand == "run":
        cat = catalog_mod.load_catalog(args.catalog)
        config = simbench.ExperimentConfig(
            task=args.task,
            strategy=args.strategy,
            rounds=args.rounds,
            runs=args.runs,
            holdout=args.holdout,
            base_seed=args.seed,
        )
        table = simbench.run_experiment(cat, config)
        table.save_csv(args.out)
        print(f"wrote {len(table.rows)} rows to {args.out}")
        if table.errors:
            print(f"{len(table.errors)} runs failed:", file=sys.stderr)
            for err in table.errors:
                print(f"  {err}", file=sys.stderr)
            return 1
        return 0

    if args.command == "serve":
        from .service import serve

        serve(
            args.catalog,
            port=args.port,
            host=args.host,
            transcript_dir=args.transcript_dir,
        )
        return 0

    parser.error("unknown command")
    return 2


if __name__ == "__main__":
    raise SystemExit(main())
