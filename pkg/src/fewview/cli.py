"""Command-line front end.

Subcommands: phantom, reconstruct, experiment, sweep-boxes, sweep-mu,
tune, report.  Exit codes: 0 success, 1 usage error, 2 runtime failure.
"""

import argparse
import os
import sys

from . import harness
from .baselines import BASELINES, BaselineConfig, run_baseline
from .imaging import PHANTOM_KINDS, PhantomSpec, generate_phantom
from .optimizers import SQRT3, OptimizerConfig, run_optimizer


class _Parser(argparse.ArgumentParser):
    """argparse defaults to exit code 2 on usage errors; we reserve 2 for
    runtime failures."""

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write("%s: error: %s\n" % (self.prog, message))
        raise SystemExit(1)


def _int_list(text):
    return [int(v) for v in text.split(",") if v.strip()]


def _float_list(text):
    return [float(v) for v in text.split(",") if v.strip()]


def build_parser():
    parser = _Parser(prog="fewview",
                     description="Few-view tomographic reconstruction workbench")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("phantom", help="render a phantom as PGM")
    p.add_argument("--kind", choices=PHANTOM_KINDS, default="shepp-logan")
    p.add_argument("--side", type=int, default=32)
    p.add_argument("--out", required=True)

    p = sub.add_parser("reconstruct",
                       help="run one algorithm on one problem")
    p.add_argument("--kind", choices=PHANTOM_KINDS, default="shepp-logan")
    p.add_argument("--side", type=int, default=32)
    p.add_argument("--alpha", type=int, default=6,
                   help="number of projection angles")
    p.add_argument("--algorithm", default="dfo-tr-mu",
                   choices=harness.ALGORITHM_TOKENS)
    p.add_argument("--budget", type=int, default=100_000)
    p.add_argument("--boxes", type=int, default=50)
    p.add_argument("--mu", type=float, default=55.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="write the reconstruction as PGM")
    p.add_argument("--snapshot-dir",
                   help="dump the best image every budget/10 evaluations")

    p = sub.add_parser("experiment", help="run a full suite from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--workers", type=int, help="override config workers")

    p = sub.add_parser("sweep-boxes", help="box-count sweep on one problem")
    p.add_argument("--kind", choices=PHANTOM_KINDS, default="shepp-logan")
    p.add_argument("--side", type=int, default=32)
    p.add_argument("--alpha", type=int, default=6)
    p.add_argument("--boxes", type=_int_list, default=[1, 2, 3, 10, 50, 100])
    p.add_argument("--runs", type=int, default=30)
    p.add_argument("--budget", type=int, default=100_000)
    p.add_argument("--mu", type=float, default=0.0)
    p.add_argument("--base-seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("sweep-mu", help="TV-weight sweep on one problem")
    p.add_argument("--kind", choices=PHANTOM_KINDS, default="shepp-logan")
    p.add_argument("--side", type=int, default=32)
    p.add_argument("--alpha", type=int, default=6)
    p.add_argument("--mus", type=_float_list, default=[0.0, 55.0])
    p.add_argument("--boxes", type=int, default=50)
    p.add_argument("--runs", type=int, default=30)
    p.add_argument("--budget", type=int, default=100_000)
    p.add_argument("--base-seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("tune", help="tune the flies hyper-parameters")
    p.add_argument("--kind", choices=PHANTOM_KINDS, default="binary-disk")
    p.add_argument("--side", type=int, default=32)
    p.add_argument("--alpha", type=int, default=6)
    p.add_argument("--meta-budget", type=int, default=1000)
    p.add_argument("--inner-budget", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("report", help="emit CSV tables from a stored run")
    p.add_argument("--store", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--alpha", type=float, default=0.05,
                   help="significance level")
    return parser


def _cmd_phantom(args):
    image = generate_phantom(PhantomSpec(args.kind, args.side))
    harness.render_image(image.ravel(), args.side, args.side, args.out,
                         comment="%s %dx%d" % (args.kind, args.side, args.side))
    print("wrote %s" % args.out)


def _cmd_reconstruct(args):
    problem = harness.build_problem(args.kind, args.side, args.alpha)
    if args.algorithm in BASELINES:
        record = run_baseline(problem, BaselineConfig(args.algorithm))
    else:
        _, config = harness.make_algorithm(
            args.algorithm,
            harness.ExperimentConfig(budget=args.budget, boxes=args.boxes,
                                     mu=args.mu))
        snapshot_every = args.budget // 10 if args.snapshot_dir else None
        record = run_optimizer(problem, config, args.seed,
                               snapshot_every=snapshot_every)
    print("problem=%s algorithm=%s e1=%.6g e2=%.6g e2_quantised=%.6g"
          % (problem.problem_id, args.algorithm, record.e1, record.e2,
             record.e2_quantised))
    if args.out:
        from .objective import scale_to_range
        harness.render_image(scale_to_range(record.best), args.side, args.side,
                             args.out, comment="%s %s seed=%d"
                             % (problem.problem_id, args.algorithm, args.seed))
        print("wrote %s" % args.out)
    if args.snapshot_dir and record.snapshots:
        os.makedirs(args.snapshot_dir, exist_ok=True)
        for fe, image in record.snapshots:
            path = os.path.join(args.snapshot_dir, "fe%07d.pgm" % fe)
            harness.render_image(image, args.side, args.side, path,
                                 comment="%s fe=%d" % (problem.problem_id, fe))
        print("wrote %d snapshots to %s" % (len(record.snapshots),
                                            args.snapshot_dir))


def _cmd_experiment(args):
    config = harness.parse_config_file(args.config)
    os.makedirs(config.output_dir, exist_ok=True)
    store_path = os.path.join(config.output_dir, "records.jsonl")
    store = harness.run_experiment(config, store_path=store_path,
                                   workers=args.workers)
    paths = harness.emit_tables(store, config.output_dir,
                                repetitions=config.repetitions)
    print("stored %d records in %s" % (len(store), store_path))
    for path in paths:
        print("wrote %s" % path)


def _cmd_sweep_boxes(args):
    harness.sweep_boxes(kind=args.kind, side=args.side, alpha=args.alpha,
                        box_counts=args.boxes, repetitions=args.runs,
                        budget=args.budget, mu=args.mu,
                        base_seed=args.base_seed, out_dir=args.out,
                        workers=args.workers)
    print("wrote %s" % os.path.join(args.out, "sweep_boxes.csv"))


def _cmd_sweep_mu(args):
    harness.sweep_mu(kind=args.kind, side=args.side, alpha=args.alpha,
                     mus=args.mus, boxes=args.boxes, repetitions=args.runs,
                     budget=args.budget, base_seed=args.base_seed,
                     out_dir=args.out, workers=args.workers)
    print("wrote %s" % os.path.join(args.out, "sweep_mu.csv"))


def _cmd_tune(args):
    n, phi, delta = harness.tune_command(
        kind=args.kind, side=args.side, alpha=args.alpha,
        meta_budget=args.meta_budget, inner_budget=args.inner_budget,
        seed=args.seed)
    print("N=%d phi=%.7f delta=%.6g" % (n, phi, delta))


def _cmd_report(args):
    store = harness.ResultStore.load(args.store)
    for path in harness.emit_tables(store, args.out, alpha=args.alpha):
        print("wrote %s" % path)


_COMMANDS = {
    "phantom": _cmd_phantom,
    "reconstruct": _cmd_reconstruct,
    "experiment": _cmd_experiment,
    "sweep-boxes": _cmd_sweep_boxes,
    "sweep-mu": _cmd_sweep_mu,
    "tune": _cmd_tune,
    "report": _cmd_report,
}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code or 0
    try:
        _COMMANDS[args.command](args)
    except Exception as exc:  # noqa: BLE001 - runtime failures map to exit 2
        sys.stderr.write("fewview: error: %s\n" % exc)
        return 2
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
