"""Command-line entry point.

Subcommands:
  run <config>          evolve one configuration and persist its results
  phase-scan <config>   classify a (K, eps) grid in parallel, resumable
  oracle-check <config> compare the fast pipeline against the exact oracle
  collapse <result-dir> rescale persisted snapshots and score the collapse
  fit-thermo <nk-file>  invert one momentum distribution into (T_eff, mu_eff)

``--threads`` (or the KICKEDTG_THREADS environment variable) sets the
worker count for scan points and parallel row computation.
"""

from __future__ import annotations

import argparse
import json
import sys

from .config import load_run_config
from .runner import (
    collapse_directory,
    default_workers,
    fit_thermo_file,
    oracle_check,
    phase_scan,
    run,
)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kickedtg", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute one run configuration")
    p_run.add_argument("config")
    p_run.add_argument("--out", default="run_out", help="output directory")
    p_run.add_argument("--threads", type=int, default=None)

    p_scan = sub.add_parser("phase-scan", help="gamma over a (K, eps) grid")
    p_scan.add_argument("config")
    p_scan.add_argument("--out", default="scan_out")
    p_scan.add_argument("--threads", type=int, default=None)
    p_scan.add_argument("--resume", action="store_true",
                        help="skip grid points already completed in --out")

    p_orc = sub.add_parser("oracle-check", help="fast pipeline vs exact Fock-space oracle")
    p_orc.add_argument("config")

    p_col = sub.add_parser("collapse", help="one-parameter scaling collapse of snapshots")
    p_col.add_argument("result_dir")
    p_col.add_argument("--alpha", type=float, required=True)
    p_col.add_argument("--regime", choices=["moderate", "tail"], required=True)
    p_col.add_argument("--flavor", choices=["fermion", "boson"], default="fermion")
    p_col.add_argument("--out", default=None, help="write collapsed curves to this CSV")

    p_fit = sub.add_parser("fit-thermo", help="effective (T, mu) of one nk CSV")
    p_fit.add_argument("nk_file")
    p_fit.add_argument("--hbar-eff", type=float, default=1.0)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)

    if args.command == "run":
        config = load_run_config(args.config)
        result = run(config, out_dir=args.out, workers=args.threads or default_workers())
        print(json.dumps(result.summary(), indent=2, sort_keys=True))
        return 0

    if args.command == "phase-scan":
        config = load_run_config(args.config)
        table = phase_scan(config, out_dir=args.out,
                           workers=args.threads or default_workers(), resume=args.resume)
        failed = [rec for rec in table if rec["status"] != "ok"]
        for rec in table:
            print(f"K={rec['kick_strength']:g} eps={rec['anisotropy']:g} "
                  f"gamma={rec['gamma']:.4f} phase={rec['phase']}")
        if failed:
            print(f"{len(failed)} point(s) failed", file=sys.stderr)
            return 1
        return 0

    if args.command == "oracle-check":
        config = load_run_config(args.config)
        report = oracle_check(config)
        print(json.dumps(report, indent=2, sort_keys=True))
        return 0 if report["passed"] else 1

    if args.command == "collapse":
        info = collapse_directory(args.result_dir, alpha=args.alpha, regime=args.regime,
                                  flavor=args.flavor, out_path=args.out)
        print(json.dumps(info, indent=2, sort_keys=True))
        return 0

    if args.command == "fit-thermo":
        print(json.dumps(fit_thermo_file(args.nk_file, hbar_eff=args.hbar_eff),
                         indent=2, sort_keys=True))
        return 0

    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
