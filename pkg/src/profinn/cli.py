"""Command-line interface.

Subcommands: train, evaluate, oracle-compare, benchmark, emit-plots,
presets. Exit codes: 0 success, 2 configuration error, 3 numerical
failure, 4 I/O failure.

`--threads N` is applied to the BLAS/OpenMP pools before numpy loads;
the default of 1 is the reproducible mode.
"""

from __future__ import annotations

import argparse
import json
import os
import sys


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="profinn",
        description="High-precision PINN training of self-similar blowup profiles.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="run a training configuration")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", help="path to a JSON run configuration")
    src.add_argument("--preset", help="name of a built-in preset")
    p.add_argument("--seed", type=int, default=None, help="override the seed")
    p.add_argument("--threads", type=int, default=1,
                   help="BLAS/OpenMP threads (1 = reproducible, default)")
    p.add_argument("--out", default=None, help="output directory")

    p = sub.add_parser("evaluate", help="evaluate a checkpoint on a grid")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--grid", default=None,
                   help="grid spec: z:lo,hi,n | ylog:lo,hi,n | z2:lo,hi,n")
    p.add_argument("--out", default=None, help="output CSV path")

    p = sub.add_parser("oracle-compare",
                       help="compare a Burgers checkpoint to the implicit oracle")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--grid", default="ylog:1e-6,1e6,999")
    p.add_argument("--out", default=None, help="output CSV path")

    p = sub.add_parser("benchmark", help="compare optimizer rules")
    p.add_argument("--suite", required=True,
                   choices=["quadratics", "rosenbrock", "burgers-loss-snapshot"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-iters", type=int, default=500)
    p.add_argument("--out", default=None, help="output CSV path")

    p = sub.add_parser("emit-plots", help="write plot scripts and render figures")
    p.add_argument("--run", required=True, help="run directory with CSV artifacts")
    p.add_argument("--no-render", action="store_true",
                   help="only write the scripts, do not execute them")

    p = sub.add_parser("presets", help="list or dump the built-in presets")
    p.add_argument("--dump", default=None, metavar="DIR",
                   help="write each preset as JSON into DIR")

    return parser


def _set_threads(n: int) -> None:
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS",
                "NUMEXPR_NUM_THREADS"):
        os.environ[var] = str(n)


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if getattr(args, "threads", None) is not None:
        _set_threads(args.threads)

    # heavy imports happen after the thread pools are pinned
    from .errors import ConfigError, NumericalError

    try:
        return _dispatch(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"I/O failure: {exc}", file=sys.stderr)
        return 4


def _dispatch(args) -> int:
    from . import benchmark as bench
    from . import trainer
    from .plots import emit_plots

    if args.command == "train":
        if args.preset:
            config = trainer.preset(args.preset)
        else:
            config = trainer.RunConfig.load(args.config)
        if args.seed is not None:
            config.seed = args.seed
        artifacts = trainer.train(config, out_dir=args.out)
        print(f"run complete: {artifacts.out_dir}")
        final = artifacts.summary["final"]
        print(f"final loss {final['total']:.6e} (epoch {final['epoch']}, "
              f"lambda {final['lambda']:.6g})")
        return 0

    if args.command == "evaluate":
        report = trainer.evaluate(args.checkpoint, args.grid, args.out)
        print(json.dumps(report, indent=2, sort_keys=True))
        return 0

    if args.command == "oracle-compare":
        report = trainer.oracle_compare(args.checkpoint, lam=args.lam, c=args.c,
                                        grid_spec=args.grid, out_csv=args.out)
        print(json.dumps(report, indent=2, sort_keys=True))
        return 0

    if args.command == "benchmark":
        out = args.out or f"benchmark_{args.suite}.csv"
        rows = bench.benchmark_optimizers(args.suite, seed=args.seed,
                                          max_iters=args.max_iters, out_csv=out)
        print(bench.TABLE_HEADER)
        for r in rows:
            print(f"{r['rule']},{r['problem']},{r['iters_to_1e-6']},"
                  f"{r['iters_to_1e-10']},{r['final_value']:.6e}")
        print(f"table written to {out}")
        return 0

    if args.command == "emit-plots":
        scripts = emit_plots(args.run, render=not args.no_render)
        for s in scripts:
            print(f"wrote {s}")
        return 0

    if args.command == "presets":
        from .trainer import PRESETS, preset
        if args.dump:
            from pathlib import Path
            out_dir = Path(args.dump)
            out_dir.mkdir(parents=True, exist_ok=True)
            for name in sorted(PRESETS):
                path = out_dir / f"{name}.json"
                preset(name).save(path)
                print(f"wrote {path}")
        else:
            for name in sorted(PRESETS):
                cfg = preset(name)
                stages = " + ".join(f"{s.optimizer}:{s.epochs}" for s in cfg.stages)
                print(f"{name:18s} {cfg.problem:10s} {stages}")
        return 0

    raise AssertionError(f"unhandled command {args.command}")


if __name__ == "__main__":
    sys.exit(main())
