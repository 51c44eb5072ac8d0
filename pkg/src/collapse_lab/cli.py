"""Command line entry point: ``collapse-lab run|validate|oracle``."""

from __future__ import annotations

import argparse
import json
import sys

from .coherence import QubitParams, qubit_oracle
from .config import FORMATS, load_config
from .errors import CollapseLabError, InvalidParams, ParseError, ValidationError
from .runner import dumps, emit, run

EXIT_OK, EXIT_RUNTIME, EXIT_VALIDATION = 0, 1, 2


def _parser():
    ap = argparse.ArgumentParser(prog="collapse-lab", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a scenario config and write its report")
    r.add_argument("config")
    r.add_argument("--seed", type=int)
    r.add_argument("--shots", type=int)
    r.add_argument("--out", help="output file (json) or directory (csv); stdout if omitted")
    r.add_argument("--format", choices=FORMATS)

    v = sub.add_parser("validate", help="parse and validate a scenario config")
    v.add_argument("config")

    o = sub.add_parser("oracle", help="print the closed-form qubit predictions")
    o.add_argument("--p", type=float, required=True)
    o.add_argument("--gamma-re", type=float, default=0.0)
    o.add_argument("--gamma-im", type=float, default=0.0)
    o.add_argument("--theta", type=float, default=0.0)
    o.add_argument("--phi", type=float, default=0.0)
    return ap


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "oracle":
            params = QubitParams(args.p, complex(args.gamma_re, args.gamma_im), args.theta, args.phi)
            o = qubit_oracle(params)
            print(json.dumps({
                "labels": [-1, 1],
                "P_direct": [float(v) for v in o.P_direct],
                "P_post": [float(v) for v in o.P_post],
                "residual_plus": float(o.residual),
                "trace_distance": o.trace_distance,
                "variance_gap_at_optimum": o.variance_gap_at_optimum,
            }, indent=2))
            return EXIT_OK

        cfg = load_config(args.config)
        if args.command == "validate":
            print(f"ok: {args.config} ({cfg.kind})")
            return EXIT_OK

        cfg = cfg.with_overrides(args.seed, args.shots, args.format, args.out)
        report = run(cfg)
        if cfg.output_path is None:
            if cfg.output_format != "json":
                raise ValidationError("output.path", "csv output needs a directory path")
            print(dumps(report))
        else:
            for path in emit(report, cfg.output_format, cfg.output_path):
                print(path)
        return EXIT_OK
    except (ParseError, ValidationError, InvalidParams) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (CollapseLabError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
