"""Command line entry point: ``evfusion {fuse,demo,train,bench}``."""

import argparse
import json
import os
import sys

from .data import SyntheticSpec, generate_synthetic, load_feature_csv, write_feature_csv
from .fusion import METHODS, fuse, fuse_bcf, fuse_cbf, fuse_baf_pair, fuse_dbf
from .opinion import SubjectiveOpinion
from .train import TrainConfig, read_key_values, train, write_history_csv

ZADEH = (
    SubjectiveOpinion([0.99, 0.0, 0.01], 0.0),
    SubjectiveOpinion([0.0, 0.99, 0.01], 0.0),
)


def zadeh_table():
    """Rows of (label, beliefs, uncertainty) for the two-source Zadeh example."""
    first, second = ZADEH
    rows = [("Modality 1", first), ("Modality 2", second),
            ("BCF", fuse_bcf(first, second)),
            ("CBF", fuse_cbf([first, second])),
            ("BAF", fuse_baf_pair(first, second)),
            ("DBF lambda=1", fuse_dbf([first, second], 1.0)[0]),
            ("DBF lambda=3", fuse_dbf([first, second], 3.0)[0])]
    return [(label, o.beliefs, o.uncertainty) for label, o in rows]


def format_zadeh_table():
    lines = [f"{'method':<14}{'b1':>8}{'b2':>8}{'b3':>8}{'u':>8}"]
    for label, b, u in zadeh_table():
        lines.append(f"{label:<14}" + "".join(f"{x:>8.4f}" for x in b) + f"{u:>8.4f}")
    return "\n".join(lines)


def _cmd_fuse(args):
    text = sys.stdin.read() if args.input == "-" else open(args.input).read()
    data = json.loads(text)
    if not isinstance(data, list):
        raise ValueError("expected a JSON array of opinions")
    opinions = [SubjectiveOpinion.from_dict(item) for item in data]
    order = list(range(len(opinions)))
    if args.order:
        order = [int(x) for x in args.order.replace(",", " ").split()]
        if sorted(order) != list(range(len(opinions))):
            raise ValueError(f"--order must be a permutation of 0..{len(opinions) - 1}")
    fused, diagnostics = fuse(args.method, [opinions[i] for i in order], args.lam)
    out = {"method": args.method, "order": order, "fused": fused.to_dict(),
           "diagnostics": diagnostics.to_dict() if diagnostics else None}
    json.dump(out, sys.stdout, indent=2)
    sys.stdout.write("\n")


def _cmd_demo(args):
    print(format_zadeh_table())


def _cmd_train(args):
    config = TrainConfig.from_file(args.config) if args.config else TrainConfig()
    batch = load_feature_csv(args.features, args.labels)
    network, history = train(batch, config)
    os.makedirs(args.out, exist_ok=True)
    network.save(os.path.join(args.out, "network.json"))
    write_history_csv(history, os.path.join(args.out, f"loss_history_{config.seed}.csv"))
    print(f"trained {config.fusion} model: final loss {history[-1].total:.6g}" if history
          else "no epochs run")


def _cmd_bench_run(args):
    from .experiment import run_experiment

    report = run_experiment(args.config, args.out)
    for method, stats in report.methods.items():
        print(f"{method:<6} auc {stats['auc']['mean']:.3f} +/- {stats['auc']['std']:.3f}  "
              f"clean acc {stats['clean_accuracy']['mean']:.3f}  "
              f"conflict acc {stats['conflict_accuracy']['mean']:.3f}")
    print(f"report written to {args.out}")


def _cmd_bench_gen(args):
    values = read_key_values(args.spec)
    types = {"n_classes": int, "n_views": int, "dim": int, "separation": float,
             "noise": float, "n_samples": int, "seed": int, "test_fraction": float}
    unknown = set(values) - set(types)
    if unknown:
        raise ValueError(f"unknown spec keys: {sorted(unknown)}")
    spec = SyntheticSpec.uniform(**{k: types[k](v) for k, v in values.items()})
    train_set, test_set = generate_synthetic(spec)
    write_feature_csv(train_set, args.out, "train")
    write_feature_csv(test_set, args.out, "test")
    print(f"wrote {train_set.n_samples} train and {test_set.n_samples} test samples to {args.out}")


def build_parser():
    parser = argparse.ArgumentParser(prog="evfusion", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fuse", help="fuse a JSON array of opinions")
    p.add_argument("input", nargs="?", default="-", help="JSON file (default: stdin)")
    p.add_argument("--method", choices=METHODS, default="dbf")
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--order", help="permutation of input indices, e.g. 2,1,0")
    p.set_defaults(func=_cmd_fuse)

    p = sub.add_parser("demo", help="worked examples")
    p.add_argument("name", choices=["zadeh"])
    p.set_defaults(func=_cmd_demo)

    p = sub.add_parser("train", help="train an evidential network on CSV features")
    p.add_argument("--config", help="key = value training config")
    p.add_argument("--features", nargs="+", required=True, help="one CSV per view")
    p.add_argument("--labels", required=True, help="CSV of integer class ids")
    p.add_argument("--out", default="train_out")
    p.set_defaults(func=_cmd_train)

    bench = sub.add_parser("bench", help="conflict-detection benchmark")
    bench_sub = bench.add_subparsers(dest="bench_command", required=True)
    p = bench_sub.add_parser("run", help="run an experiment config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default="bench_out")
    p.set_defaults(func=_cmd_bench_run)
    p = bench_sub.add_parser("gen", help="write a synthetic dataset as CSV")
    p.add_argument("--spec", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_bench_gen)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (ValueError, OSError, RuntimeError, KeyError) as exc:
        print(f"evfusion: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
