"""Command line interface.

Subcommands::

    ditherdoa run <preset|custom> [--config FILE] [--seed N] [--out DIR]
                  [--trials N] [--workers K] [--no-figures]
    ditherdoa doa estimate --input snapshots.csv --scheme rect|tri|analog
                  --lambda L [--bits B] --sources S [--seed N]
    ditherdoa quantize --input snapshots.csv --scheme rect|tri|round
                  --lambda L [--bits B] [--seed N] --out q.csv

``run`` writes one CSV per experiment plus a JSON metadata sidecar and (by
default) a rendered PNG figure into the output directory.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys

from ._version import __version__
from .doa import esprit_from_quantized
from .experiments import EXPERIMENTS, run_experiment, preset
from .quantizers import QuantizerSpec, quantize_batch
from .reportio import emit_results, ingest_snapshots, load_config, write_metadata, write_snapshots
from .rng import ROLE_DITHER_A, ROLE_DITHER_B, trial_stream


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ditherdoa", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a Monte-Carlo experiment preset")
    run.add_argument("preset", choices=list(EXPERIMENTS) + ["custom"],
                     help="named experiment, or 'custom' with --config")
    run.add_argument("--config", help="flat key=value config file overriding the preset")
    run.add_argument("--seed", type=int, help="master seed (64-bit)")
    run.add_argument("--out", default=".", help="output directory (default: cwd)")
    run.add_argument("--trials", type=int, help="override the trial count")
    run.add_argument("--workers", type=int, help="worker processes for the trial loop")
    run.add_argument("--no-figures", action="store_true", help="skip PNG rendering")

    doa = sub.add_parser("doa", help="direction-of-arrival estimation")
    doa_sub = doa.add_subparsers(dest="doa_command", required=True)
    est = doa_sub.add_parser("estimate", help="estimate angles from a snapshot file")
    est.add_argument("--input", required=True, help="analog snapshot CSV")
    est.add_argument("--scheme", required=True, choices=["rect", "tri", "analog"])
    est.add_argument("--lambda", dest="lam", type=float, default=None,
                     help="quantizer input range")
    est.add_argument("--bits", type=int, default=None, help="bits per real part (tri)")
    est.add_argument("--sources", type=int, required=True, help="number of sources s")
    est.add_argument("--seed", type=int, default=1, help="dither seed")

    quant = sub.add_parser("quantize", help="quantize a snapshot file")
    quant.add_argument("--input", required=True, help="analog snapshot CSV")
    quant.add_argument("--scheme", required=True, choices=["rect", "tri", "round"])
    quant.add_argument("--lambda", dest="lam", type=float, required=True,
                       help="quantizer input range")
    quant.add_argument("--bits", type=int, default=None, help="bits per real part")
    quant.add_argument("--seed", type=int, default=1, help="dither seed")
    quant.add_argument("--out", required=True, help="output CSV path")
    return parser


def _make_spec(scheme: str, lam: float, bits: int | None, field: str) -> QuantizerSpec:
    if lam is None:
        raise SystemExit("--lambda is required for quantized schemes")
    if scheme == "rect":
        return QuantizerSpec("rect", lam, field)
    if bits is None:
        raise SystemExit(f"--bits is required for the {scheme} scheme")
    return QuantizerSpec(scheme, lam, field, bits=bits)


def _cmd_run(args) -> int:
    if args.preset == "custom":
        if not args.config:
            raise SystemExit("custom runs need --config")
        cfg = load_config(args.config)
    else:
        cfg = preset(args.preset)
        if args.config:
            cfg = load_config(args.config, base=cfg)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.trials is not None:
        overrides["trials"] = args.trials
    if args.workers is not None:
        overrides["workers"] = args.workers
    if overrides:
        cfg = dataclasses.replace(cfg, **overrides)

    table = run_experiment(cfg)
    os.makedirs(args.out, exist_ok=True)
    base = os.path.join(args.out, cfg.experiment)
    emit_results(table, base + ".csv")
    write_metadata(table, base + ".meta.json")
    print(f"wrote {base}.csv ({len(table.rows)} rows)")
    if not args.no_figures:
        from .figures import render_figure  # deferred: matplotlib import is slow

        render_figure(table, base + ".png")
        print(f"wrote {base}.png")
    phase = table.metadata.get("phase")
    if phase:
        for label, info in phase.items():
            if "slope" in info:
                print(f"{label}: fitted phase-boundary slope {info['slope']:.4f}")
    return 0


def _cmd_doa_estimate(args) -> int:
    batch = ingest_snapshots(args.input)
    if args.scheme == "analog":
        spec = None
        quantized = batch
    else:
        spec = _make_spec(args.scheme, args.lam, args.bits, batch.field)
        quantized = quantize_batch(
            batch,
            spec,
            trial_stream(args.seed, 0, ROLE_DITHER_A),
            trial_stream(args.seed, 0, ROLE_DITHER_B),
        )
    result = esprit_from_quantized(quantized, spec, args.sources)
    print("theta")
    for t in result.estimated.thetas:
        print(repr(float(t)))
    return 0


def _cmd_quantize(args) -> int:
    batch = ingest_snapshots(args.input)
    spec = _make_spec(args.scheme, args.lam, args.bits, batch.field)
    quantized = quantize_batch(
        batch,
        spec,
        trial_stream(args.seed, 0, ROLE_DITHER_A),
        trial_stream(args.seed, 0, ROLE_DITHER_B),
    )
    write_snapshots(
        dataclasses.replace(quantized, scheme=None, data_dot=None), args.out
    )
    print(f"wrote {args.out}")
    if quantized.data_dot is not None:
        root, ext = os.path.splitext(args.out)
        dot_path = f"{root}_dot{ext or '.csv'}"
        write_snapshots(
            dataclasses.replace(quantized, scheme=None, data=quantized.data_dot, data_dot=None),
            dot_path,
        )
        print(f"wrote {dot_path} (second sign pattern)")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "doa":
        return _cmd_doa_estimate(args)
    if args.command == "quantize":
        return _cmd_quantize(args)
    raise SystemExit(2)


if __name__ == "__main__":
    sys.exit(main())
