"""Command-line entry point: ``lcbal run | synth | gradcheck``.

Exit codes: 0 success, 1 configuration error, 2 runtime abort.
"""

import argparse
import logging
import sys

from .bench import ConfigError, ExperimentAbort, ExperimentConfig, gradient_check, run_experiment
from .data import DataError, make_synthetic, save_csv
from .learners import ALGORITHMS
from .losses import LOSS_KINDS

EXIT_OK, EXIT_CONFIG, EXIT_ABORT = 0, 1, 2

# flag destination -> config key
_OVERRIDES = {
    "dataset": "dataset", "label_column": "label_column", "label_encoding": "label_encoding",
    "header": "header", "scale": "scale", "bias": "bias", "test_fraction": "test_fraction",
    "algorithm": "algorithms", "loss": "loss", "budget": "budget", "pmin": "p_min",
    "radius": "radius", "delta": "delta", "repeats": "repeats", "seed": "seed",
    "oracle": "oracle", "out_dir": "out_dir", "round_cap": "round_cap", "mu": "mu",
    "refit_every": "refit_every", "tol": "tol", "max_iter": "max_iter", "risk_scale": "risk_scale",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _label_column(value):
    try:
        return int(value)
    except ValueError:
        return value


def build_parser():
    parser = _Parser(prog="lcbal", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="run repeated trials and write results")
    run.add_argument("--config", help="JSON config file; flags override its keys")
    run.add_argument("--dataset", help="CSV path")
    run.add_argument("--label-column", type=_label_column, help="label column name or index")
    run.add_argument("--label-encoding", choices=("pm1", "zero-one"))
    run.add_argument("--no-header", dest="header", action="store_const", const=False)
    run.add_argument("--no-scale", dest="scale", action="store_const", const=False)
    run.add_argument("--bias", action="store_const", const=True, help="append a constant-1 feature")
    run.add_argument("--test-fraction", type=float)
    run.add_argument("--algorithm", action="append",
                     help=f"one of {'|'.join(ALGORITHMS)}; repeat or comma-separate for several")
    run.add_argument("--oracle", choices=("simulated", "interactive"))
    run.add_argument("--loss", choices=LOSS_KINDS)
    run.add_argument("--budget", type=int)
    run.add_argument("--pmin", type=float, help="sampling floor (default 1/(10n))")
    run.add_argument("--radius", type=float)
    run.add_argument("--delta", type=float)
    run.add_argument("--repeats", type=int)
    run.add_argument("--seed", type=int)
    run.add_argument("--out-dir")
    run.add_argument("--round-cap", type=int)
    run.add_argument("--mu", type=float)
    run.add_argument("--refit-every", type=int)
    run.add_argument("--tol", type=float)
    run.add_argument("--max-iter", type=int)
    run.add_argument("--risk-scale", choices=("sum", "mean"))

    synth = sub.add_parser("synth", help="write a synthetic dataset as CSV")
    synth.add_argument("--kind", choices=("separable", "noisy-margin"), default="separable")
    synth.add_argument("--n", type=int, default=500)
    synth.add_argument("--d", type=int, default=2)
    synth.add_argument("--margin", type=float, default=0.1)
    synth.add_argument("--flip-prob", type=float, default=0.0)
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--out", default="-", help="output path, '-' for stdout")

    grad = sub.add_parser("gradcheck", help="finite-difference check of the surrogate gradient")
    grad.add_argument("--points", type=int, default=20)
    grad.add_argument("--n", type=int, default=30)
    grad.add_argument("--d", type=int, default=3)
    grad.add_argument("--rounds", type=int, default=10)
    grad.add_argument("--loss", choices=LOSS_KINDS, default="logistic")
    grad.add_argument("--seed", type=int, default=0)
    grad.add_argument("--threshold", type=float, default=1e-5)
    return parser


def _experiment_config(args):
    data = {}
    if args.config:
        cfg = ExperimentConfig.from_file(args.config)
        data = {k: getattr(cfg, k) for k in cfg.__dataclass_fields__}
    for dest, key in _OVERRIDES.items():
        value = getattr(args, dest, None)
        if value is None:
            continue
        if dest == "algorithm":
            value = [a.strip() for item in value for a in item.split(",") if a.strip()]
        data[key] = value
    try:
        return ExperimentConfig.from_dict(data)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def _print_summary(summary, out):
    out.write(f"{'algorithm':<10} {'final_error':>18} {'auc':>18}\n")
    for alg, s in summary.items():
        out.write(f"{alg:<10} {s.final_error_mean:>9.4f} +/- {s.final_error_std:<6.4f}"
                  f" {s.auc_mean:>9.3f} +/- {s.auc_std:<6.3f}\n")


def _cmd_run(args):
    cfg = _experiment_config(args)
    summary, _ = run_experiment(cfg)
    _print_summary(summary, sys.stdout)
    print(f"results written to {cfg.out_dir}")


def _cmd_synth(args):
    ds = make_synthetic(args.kind, args.n, args.d, args.margin, args.flip_prob, args.seed)
    save_csv(ds, sys.stdout if args.out == "-" else args.out)


def _cmd_gradcheck(args):
    worst = gradient_check(points=args.points, n=args.n, d=args.d, rounds=args.rounds,
                           loss=args.loss, seed=args.seed)
    print(f"max relative error: {worst:.3e} over {args.points} points")
    return EXIT_OK if worst <= args.threshold else EXIT_ABORT


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handlers = {"run": _cmd_run, "synth": _cmd_synth, "gradcheck": _cmd_gradcheck}
    try:
        return handlers[args.command](args) or EXIT_OK
    except (ConfigError, DataError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        # precondition violations surfaced by the data or learner layers
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ExperimentAbort as exc:
        print(f"aborted: {exc}", file=sys.stderr)
        return EXIT_ABORT
    except OSError as exc:
        print(f"aborted: {exc}", file=sys.stderr)
        return EXIT_ABORT
