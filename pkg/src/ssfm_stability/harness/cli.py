"""Command-line entry point: ``simulate``, ``predict``, ``oracle`` and ``scan``."""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .config import PRESETS, ConfigError, load_config
from .runner import (
    RUNNERS,
    run_scan,
    write_json,
    write_rows_csv,
    write_spectrum_csv,
)

EXIT_OK, EXIT_FAILED, EXIT_INVALID, EXIT_BLOWUP = 0, 1, 2, 3

COLUMNS = ("method", "dz", "T", "stable", "left_offset", "right_offset", "half_separation", "increment")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="ssfm-stability",
        description="Numerical instability of the split-step Fourier method on soliton backgrounds.",
    )
    sub = p.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="YAML experiment file")
    common.add_argument("--paper-case", choices=sorted(PRESETS), help="start from a preset")
    common.add_argument("--dz", type=float, help="step size")
    common.add_argument("--T", type=float, help="window length")
    common.add_argument("--N", type=int, help="number of grid points")
    common.add_argument("--zmax", type=float, help="propagation distance")
    common.add_argument("--seed", type=int, help="noise seed")
    common.add_argument("--out", type=Path, help="output prefix; writes <out>.csv and <out>.json")
    common.add_argument("--emit-spectrum", action="store_true", help="write the z_max spectrum as CSV")
    common.add_argument("--workers", type=int, help="parallel scan workers")
    common.add_argument("-v", "--verbose", action="store_true")
    for name, text in (
        ("simulate", "propagate and measure the instability"),
        ("predict", "asymptotic prediction of unstable peaks"),
        ("oracle", "dense eigenanalysis of the linearised step"),
        ("scan", "sweep dz or T with the configured methods"),
    ):
        sp = sub.add_parser(name, parents=[common], help=text)
        if name == "scan":
            sp.add_argument("--methods", help="comma-separated subset of simulate,predict,oracle")
    return p


def _print_rows(rows, stream=None):
    stream = stream or sys.stdout
    print("  ".join(f"{c:>15}" for c in COLUMNS), file=stream)
    for r in rows:
        vals = []
        for c in COLUMNS:
            v = getattr(r, c)
            if isinstance(v, float):
                v = f"{v:.6g}"
            vals.append(f"{'' if v is None else v!s:>15}")
        line = "  ".join(vals)
        if r.error:
            line += f"  ! {r.error}"
        print(line, file=stream)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    overrides = {
        "paper_case": args.paper_case,
        "dz": args.dz,
        "T": args.T,
        "N": args.N,
        "z_max": args.zmax,
        "seed": args.seed,
        "workers": args.workers,
        "out": str(args.out) if args.out else None,
        "emit_spectrum": True if args.emit_spectrum else None,
    }
    if args.command == "scan" and args.methods:
        overrides["methods"] = [m.strip() for m in args.methods.split(",") if m.strip()]
    try:
        cfg = load_config(args.config, **overrides)
        cfg = replace(cfg, mode=args.command)
        if args.command == "scan":
            outcomes = run_scan(cfg)
        else:
            if cfg.dz_list or cfg.T_list:
                raise ConfigError(f"{args.command} runs one configuration; use 'scan' for dz_list/T_list")
            outcomes = [RUNNERS[args.command](cfg)]
    except ConfigError as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_INVALID
    rows = [o.row for o in outcomes]
    _print_rows(rows)
    if cfg.out:
        prefix = Path(cfg.out)
        if prefix.suffix in (".csv", ".json"):
            prefix = prefix.with_suffix("")
        write_rows_csv(rows, prefix.with_suffix(".csv"), cfg)
        write_json(outcomes, prefix.with_suffix(".json"), cfg)
        if cfg.emit_spectrum:
            for o in outcomes:
                if o.spectrum is not None:
                    name = f"{prefix.name}_spectrum_dz{o.row.dz:g}_T{o.row.T:.6g}.csv"
                    write_spectrum_csv(*o.spectrum, prefix.parent / name)
    if any(r.blown_up for r in rows):
        return EXIT_BLOWUP
    if any(r.error and r.method != "predict" for r in rows):
        return EXIT_FAILED
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
