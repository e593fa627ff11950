"""Command-line interface.

Subcommands: train, extract, eval, experiment, synth, oracle-check.
Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric error.
"""

import argparse
import csv
import sys

import numpy as np

from . import classifier as clf
from . import dataio
from . import harness
from . import network as nw
from . import oracle_suite
from . import report
from .errors import (
    DataError,
    DegenerateDataError,
    InvalidParameterError,
    InvalidStateError,
    NumericError,
)
from .rng import derive_seed
from .synth import write_synthetic_dataset

USAGE_EXIT, DATA_EXIT, NUMERIC_EXIT = 1, 2, 3


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors; the CLI contract says 1
    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit_Usage(message)


class SystemExit_Usage(Exception):
    pass


def _parse_grid(text):
    try:
        bh, bw = text.lower().split("x")
        return (int(bh), int(bw))
    except ValueError:
        raise InvalidParameterError(
            f"expected HxW (e.g. 4x2), got {text!r}"
        ) from None


def _parse_size(text):
    m, n = _parse_grid(text)
    return (m, n)


def build_parser():
    parser = _Parser(prog="l1pcanet",
                     description="L1-2D2PCANet feature-learning toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a network + classifier")
    p.add_argument("--data", required=True)
    p.add_argument("--variant", default="L1-2D2PCANet")
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--l1", type=int, default=4)
    p.add_argument("--l2", type=int, default=4)
    p.add_argument("--blocks", default="4x2")
    p.add_argument("--classifier", choices=["linear", "nearest", "none"],
                   default="linear")
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--out", required=True)

    p = sub.add_parser("extract", help="write feature CSV for a dataset")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("eval", help="classification accuracy on a dataset")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--occlusion", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("experiment", help="run a declarative experiment spec")
    p.add_argument("--spec", default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--data", default=None)
    p.add_argument("--variants", default=None)
    p.add_argument("--k", default=None)
    p.add_argument("--l1", default=None)
    p.add_argument("--l2", default=None)
    p.add_argument("--blocks", default=None)
    p.add_argument("--train-per-class", default=None)
    p.add_argument("--occlusion", default=None)
    p.add_argument("--repeats", default=None)
    p.add_argument("--seed", default=None)
    p.add_argument("--classifier", default=None)
    p.add_argument("--sweep", default=None)
    p.add_argument("--no-figures", action="store_true")

    p = sub.add_parser("synth", help="generate a synthetic PGM dataset")
    p.add_argument("--classes", type=int, default=10)
    p.add_argument("--per-class", type=int, default=12)
    p.add_argument("--size", default="32x32")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--noise", type=float, default=8.0)
    p.add_argument("--shadow-prob", type=float, default=0.2)
    p.add_argument("--out", required=True)

    p = sub.add_parser("oracle-check", help="run the subspace oracle suites")
    p.add_argument("--trials", type=int, default=500)
    p.add_argument("--seed", type=int, default=101)
    return parser


def cmd_train(args):
    ds = dataio.load_dataset(args.data)
    cfg = nw.NetworkConfig(variant=args.variant, k=args.k, l1=args.l1,
                           l2=args.l2, block_grid=_parse_grid(args.blocks))
    net = nw.train_network(ds.images, cfg)
    if args.classifier == "linear":
        feats = np.array([nw.extract_feature(im, net) for im in ds.images],
                         dtype=np.float64)
        labeled = clf.LabeledFeatures.from_arrays(feats, ds.labels)
        net.classifier = clf.train_linear_ovr(labeled, c=args.c,
                                              epochs=args.epochs)
    nw.save_model(net, args.out)
    print(f"trained {cfg.variant} on {len(ds)} images "
          f"({ds.class_count} classes) -> {args.out}")
    return 0


def cmd_extract(args):
    net = nw.load_model(args.model)
    ds = dataio.load_dataset(args.data)
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        for i, img in enumerate(ds.images):
            feat = nw.extract_feature(img, net)
            path = ds.source_manifest[i] if ds.source_manifest else f"#{i}"
            writer.writerow([path, int(ds.labels[i])] + [int(v) for v in feat])
    print(f"wrote {len(ds)} feature rows to {args.out}")
    return 0


def cmd_eval(args):
    net = nw.load_model(args.model)
    if net.classifier is None:
        raise DataError(f"model {args.model!r} carries no classifier section")
    ds = dataio.load_dataset(args.data)
    images = ds.images
    if args.occlusion is not None:
        images = [
            dataio.corrupt_with_block_noise(
                im, args.occlusion, derive_seed(args.seed, "occlusion", i))
            for i, im in enumerate(images)
        ]
    feats = np.array([nw.extract_feature(im, net) for im in images],
                     dtype=np.float64)
    pred = clf.predict_batch(net.classifier, feats)
    acc = float((pred == ds.labels).mean())
    print(f"accuracy: {acc:.4f} ({int((pred == ds.labels).sum())}/{len(ds)})")
    return 0


def cmd_experiment(args):
    overrides = {
        "data": args.data, "variants": args.variants, "k": args.k,
        "l1": args.l1, "l2": args.l2, "blocks": args.blocks,
        "train-per-class": args.train_per_class, "occlusion": args.occlusion,
        "repeats": args.repeats, "seed": args.seed,
        "classifier": args.classifier, "sweep": args.sweep,
    }
    if args.spec:
        spec = harness.read_spec_file(args.spec, overrides)
    else:
        import tempfile
        # no file: synthesize the spec entirely from flags
        with tempfile.NamedTemporaryFile("w", suffix=".ini", delete=False) as fh:
            fh.write("[experiment]\n")
            path = fh.name
        spec = harness.read_spec_file(path, overrides)
    if spec.block_size_sweep:
        table = harness.run_block_size_sweep(spec)
    else:
        table = harness.run_experiment(spec)
    paths = report.emit_results(table, args.out, figures=not args.no_figures)
    for row in table.rows:
        print(f"{row.variant:14s} {row.parameter:16s} "
              f"{report.format_cell(row.mean, row.rmse)}")
    print("wrote: " + ", ".join(paths))
    return 0


def cmd_synth(args):
    size = _parse_size(args.size)
    ds = write_synthetic_dataset(args.out, classes=args.classes,
                                 per_class=args.per_class, size=size,
                                 seed=args.seed, noise_sigma=args.noise,
                                 shadow_prob=args.shadow_prob)
    print(f"wrote {len(ds)} images ({args.classes} classes, "
          f"{size[0]}x{size[1]}) under {args.out}")
    return 0


def cmd_oracle_check(args):
    suites = [
        oracle_suite.l1pca_suite(trials=args.trials, seed=args.seed),
        oracle_suite.l1_2dpca_suite(trials=args.trials, seed=args.seed + 1),
        oracle_suite.l2_baseline_suite(trials=min(args.trials, 100),
                                       seed=args.seed + 2),
        oracle_suite.deflation_suite(trials=min(args.trials, 100),
                                     seed=args.seed + 3),
        oracle_suite.robustness_suite(trials=min(args.trials, 50),
                                      seed=args.seed + 4),
    ]
    checks = []
    for s in suites:
        st = s.stats
        if "attainment_rate" in st:
            checks += [
                (f"{s.name}: converged <= 1000 iters", st["all_converged"]),
                (f"{s.name}: objective nondecreasing",
                 st["max_monotone_violation"] <= 1e-9),
                (f"{s.name}: fixed-point identity",
                 st["max_fixed_point_error"] <= 1e-10),
                (f"{s.name}: never above oracle",
                 st["max_excess_over_oracle"] <= 1e-9),
                (f"{s.name}: attainment >= 90% "
                 f"(got {st['attainment_rate']:.1%})",
                 st["attainment_rate"] >= 0.9),
            ]
        elif "max_direction_error" in st:
            checks.append((f"{s.name}: matches power iteration "
                           f"(err {st['max_direction_error']:.2e})",
                           st["max_direction_error"] <= 1e-8))
        elif "max_abs_inner_product" in st:
            checks.append((f"{s.name}: orthogonal "
                           f"(max {st['max_abs_inner_product']:.2e})",
                           st["max_abs_inner_product"] <= 1e-8))
        else:
            checks.append((f"{s.name}: L1 median angle "
                           f"{st['median_angle_l1']:.4f} < "
                           f"L2 {st['median_angle_l2']:.4f}",
                           st["median_angle_l1"] < st["median_angle_l2"]))
    failed = 0
    for name, ok in checks:
        print(f"[{'PASS' if ok else 'FAIL'}] {name}")
        failed += not ok
    print(f"{len(checks) - failed}/{len(checks)} checks passed")
    return 0 if failed == 0 else NUMERIC_EXIT


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        handler = {
            "train": cmd_train,
            "extract": cmd_extract,
            "eval": cmd_eval,
            "experiment": cmd_experiment,
            "synth": cmd_synth,
            "oracle-check": cmd_oracle_check,
        }[args.command]
        return handler(args)
    except SystemExit_Usage as e:
        print(f"error: {e}", file=sys.stderr)
        return USAGE_EXIT
    except (InvalidParameterError, InvalidStateError) as e:
        print(f"error: {e}", file=sys.stderr)
        return USAGE_EXIT
    except (DataError, OSError) as e:
        print(f"data error: {e}", file=sys.stderr)
        return DATA_EXIT
    except (DegenerateDataError, NumericError) as e:
        print(f"numeric error: {e}", file=sys.stderr)
        return NUMERIC_EXIT


if __name__ == "__main__":
    sys.exit(main())
