"""Command-line entry point ``afba``.

Exit codes: 0 success, 1 usage or configuration error, 2 data error,
3 numerical failure.
"""

import argparse
import logging
import os
import sys

from .dataio import LibsvmFormatError
from .harness import (
    ConfigError,
    DataError,
    ExperimentConfig,
    ReferenceNotConverged,
    load_config,
    parse_schedule,
    run_compare,
    run_rates,
    run_table,
)
from .momentum import check_momentum_condition
from .solver import NonFiniteError

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common(p):
    p.add_argument("--config", help="INI experiment config")
    p.add_argument("--data-dir")
    p.add_argument("--out-dir")
    p.add_argument("--max-iters", type=int)
    p.add_argument("--seed", type=int, help="problem seed (split seed for svm)")
    p.add_argument("--trace-every", type=int)
    p.add_argument("--schedule", action="append", dest="schedules",
                   help="schedule spec, repeatable: fba, fista, cd:ALPHA, gn:OMEGA,A,B")


def build_parser():
    parser = _Parser(prog="afba", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, help_ in (
        ("solve", "run one schedule and write its trace"),
        ("compare", "run all configured schedules"),
        ("table", "iterations needed to reach each test-accuracy threshold"),
        ("rates", "convergence-rate diagnostics per schedule"),
    ):
        _common(sub.add_parser(name, help=help_))
    cs = sub.add_parser("check-schedule", help="scan a schedule for Momentum-Condition")
    cs.add_argument("spec", help="fba, fista, cd:ALPHA or gn:OMEGA,A,B")
    cs.add_argument("--horizon", type=int, default=10000)
    return parser


def _resolve(args):
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    if args.data_dir is not None:
        cfg.data_dir = args.data_dir
    if args.out_dir is not None:
        cfg.out_dir = args.out_dir
    if args.max_iters is not None:
        cfg.max_iters = args.max_iters
    if args.trace_every is not None:
        cfg.trace_every = args.trace_every
    if args.seed is not None:
        if cfg.problem == "svm":
            cfg.split_seed = args.seed
        else:
            cfg.seed = args.seed
    if args.schedules:
        cfg.schedules = args.schedules
    return cfg.validate()


def _check_schedule(args):
    sched = parse_schedule(args.spec)
    if args.horizon < 10:
        raise ConfigError("horizon must be at least 10")
    report = check_momentum_condition(sched, args.horizon)
    print(f"schedule={sched.name}")
    for line in report.lines():
        print(line)
    return EXIT_OK


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "check-schedule":
            return _check_schedule(args)
        cfg = _resolve(args)
        if args.command == "solve":
            cfg.schedules = cfg.schedules[:1]
            out = run_compare(cfg)
        elif args.command == "compare":
            out = run_compare(cfg)
        elif args.command == "table":
            out = run_table(cfg)
            with open(out["table"]) as fh:
                sys.stdout.write(fh.read())
        else:
            out = run_rates(cfg)
            for path, rep in out["reports"].values():
                print(f"{os.path.basename(path)}: fv_decay={rep.fv_decay} "
                      f"dci_decay={rep.dci_decay} epsilon_monotone={rep.epsilon_monotone}")
        print(f"wrote {out['summary']} and {out['manifest']}")
        return EXIT_OK
    except ConfigError as exc:
        print(f"afba: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, LibsvmFormatError) as exc:
        print(f"afba: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (NonFiniteError, ReferenceNotConverged) as exc:
        print(f"afba: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
