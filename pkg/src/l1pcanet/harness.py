"""Experiment orchestration: repeated seeded runs with mean +/- RMSE.

A run draws a split from (master_seed, run index), optionally corrupts the
test images, and evaluates every configured network variant on the SAME
split and the SAME corrupted images (paired design, so variant differences
are not split noise). RMSE here is the population root-mean-square
deviation of the per-run accuracies from their mean, the stability measure
reported next to every accuracy.
"""

import time
from configparser import ConfigParser
from dataclasses import dataclass, field

import numpy as np

from . import classifier as clf
from . import dataio
from . import network as nw
from .errors import DataError, InvalidParameterError, L1PCANetError
from .rng import derive_seed

__all__ = [
    "ExperimentSpec",
    "ResultRow",
    "ResultTable",
    "rmse",
    "run_single",
    "run_experiment",
    "run_block_size_sweep",
    "read_spec_file",
]


@dataclass
class ExperimentSpec:
    dataset_root: str = None
    dataset: object = None  # in-memory LabeledDataset alternative
    configs: list = field(default_factory=list)
    train_per_class: int = 2
    occlusion: float = None
    block_size_sweep: list = None
    repeats: int = 10
    master_seed: int = 0
    classifier: str = "linear"
    classifier_c: float = 1.0
    classifier_epochs: int = 200

    def __post_init__(self):
        if self.repeats < 1:
            raise InvalidParameterError("repeats must be >= 1")
        if not self.configs:
            raise InvalidParameterError("need at least one network config")
        if self.classifier not in ("linear", "nearest"):
            raise InvalidParameterError(
                f"classifier must be 'linear' or 'nearest', got {self.classifier!r}"
            )

    def load(self):
        if self.dataset is not None:
            return self.dataset
        if self.dataset_root is None:
            raise DataError("experiment spec names no dataset")
        return dataio.load_dataset(self.dataset_root)


@dataclass
class ResultRow:
    variant: str
    parameter: str
    per_run: list
    wall_time: float = 0.0

    @property
    def mean(self):
        return float(np.mean(self.per_run))

    @property
    def rmse(self):
        return rmse(self.per_run)


@dataclass
class ResultTable:
    rows: list = field(default_factory=list)

    def row(self, variant, parameter):
        for r in self.rows:
            if r.variant == variant and r.parameter == parameter:
                return r
        raise KeyError((variant, parameter))


def rmse(values):
    """Population root-mean-square deviation from the mean."""
    v = np.asarray(values, dtype=np.float64)
    return float(np.sqrt(np.mean((v - v.mean()) ** 2)))


def _phase(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except L1PCANetError as e:
        raise type(e)(f"[{name}] {e}") from e


def run_single(cfg, train_ds, test_ds, classifier="linear", c=1.0, epochs=200):
    """Train the network and classifier on train, return test accuracy."""
    if len(train_ds) == 0 or len(test_ds) == 0:
        raise InvalidParameterError("train and test sets must be non-empty")
    net = _phase("train-network", nw.train_network, train_ds.images, cfg)
    train_f = _phase(
        "extract-train",
        lambda: np.array([nw.extract_feature(im, net) for im in train_ds.images],
                         dtype=np.float64),
    )
    test_f = _phase(
        "extract-test",
        lambda: np.array([nw.extract_feature(im, net) for im in test_ds.images],
                         dtype=np.float64),
    )
    labeled = clf.LabeledFeatures.from_arrays(train_f, train_ds.labels)
    if classifier == "linear":
        model = _phase("train-classifier", clf.train_linear_ovr, labeled,
                       c=c, epochs=epochs)
        pred = clf.predict_batch(model, test_f)
    else:
        pred = np.array([
            clf.nearest_neighbor_predict(labeled, f) for f in test_f
        ])
    return float((pred == test_ds.labels).mean())


def _corrupted_test(test_ds, q, run_seed):
    images = [
        dataio.corrupt_with_block_noise(im, q, derive_seed(run_seed, "occlusion", i))
        for i, im in enumerate(test_ds.images)
    ]
    return dataio.LabeledDataset(images, test_ds.labels, test_ds.class_names)


def run_experiment(spec):
    """Repeated paired runs; one result row per variant."""
    ds = spec.load()
    param = f"i={spec.train_per_class}"
    if spec.occlusion is not None:
        param += f",q={spec.occlusion}"
    accs = {cfg.variant: [] for cfg in spec.configs}
    times = {cfg.variant: 0.0 for cfg in spec.configs}
    for r in range(1, spec.repeats + 1):
        run_seed = derive_seed(spec.master_seed, "run", r)
        try:
            train_ds, test_ds = dataio.split_random_per_class(
                ds, spec.train_per_class, run_seed
            )
            if spec.occlusion is not None:
                test_ds = _corrupted_test(test_ds, spec.occlusion, run_seed)
            for cfg in spec.configs:
                t0 = time.perf_counter()
                acc = run_single(cfg, train_ds, test_ds, spec.classifier,
                                 spec.classifier_c, spec.classifier_epochs)
                times[cfg.variant] += time.perf_counter() - t0
                accs[cfg.variant].append(acc)
        except L1PCANetError as e:
            raise type(e)(f"run {r}: {e}") from e
    return ResultTable(rows=[
        ResultRow(variant=v, parameter=param, per_run=accs[v], wall_time=times[v])
        for v in accs
    ])


def run_block_size_sweep(spec):
    """One table row per (variant, block grid), everything else fixed."""
    if not spec.block_size_sweep:
        raise InvalidParameterError("spec has no block_size_sweep grids")
    table = ResultTable()
    for grid in spec.block_size_sweep:
        configs = []
        for cfg in spec.configs:
            configs.append(nw.NetworkConfig(
                variant=cfg.variant, k=cfg.k, l1=cfg.l1, l2=cfg.l2,
                block_grid=tuple(grid), tol=cfg.tol, max_iter=cfg.max_iter,
            ))
        sub = ExperimentSpec(
            dataset_root=spec.dataset_root, dataset=spec.dataset,
            configs=configs, train_per_class=spec.train_per_class,
            occlusion=spec.occlusion, repeats=spec.repeats,
            master_seed=spec.master_seed, classifier=spec.classifier,
            classifier_c=spec.classifier_c,
            classifier_epochs=spec.classifier_epochs,
        )
        for row in run_experiment(sub).rows:
            row.parameter += f",B={grid[0]}x{grid[1]}"
            table.rows.append(row)
    return table


# --- plain-text spec files -------------------------------------------------

def _parse_grid(text):
    try:
        bh, bw = text.lower().split("x")
        return (int(bh), int(bw))
    except ValueError:
        raise InvalidParameterError(
            f"block grid must look like '4x2', got {text!r}"
        ) from None


def read_spec_file(path, overrides=None):
    """Build an ExperimentSpec from an INI-style key=value file.

    Recognized keys in the [experiment] section mirror the CLI flags:
    data, variants, k, l1, l2, blocks, train-per-class, occlusion, repeats,
    seed, classifier, c, epochs, sweep. `overrides` (a dict from CLI flags)
    wins over file values.
    """
    parser = ConfigParser()
    read = parser.read(path)
    if not read:
        raise DataError(f"cannot read experiment spec file {path!r}")
    section = parser["experiment"] if parser.has_section("experiment") else (
        parser[parser.sections()[0]] if parser.sections() else {})
    values = dict(section)
    for key, val in (overrides or {}).items():
        if val is not None:
            values[key] = val

    def get(key, default=None):
        return values.get(key, default)

    variants = get("variants", "L1-2D2PCANet")
    if isinstance(variants, str):
        variants = [v.strip() for v in variants.split(",") if v.strip()]
    blocks = get("blocks", "4x2")
    grid = _parse_grid(blocks) if isinstance(blocks, str) else tuple(blocks)
    configs = [
        nw.NetworkConfig(
            variant=v, k=int(get("k", 5)), l1=int(get("l1", 4)),
            l2=int(get("l2", 4)), block_grid=grid,
        )
        for v in variants
    ]
    sweep = get("sweep")
    if isinstance(sweep, str):
        sweep = [_parse_grid(g.strip()) for g in sweep.split(",") if g.strip()]
    occ = get("occlusion")
    return ExperimentSpec(
        dataset_root=get("data"),
        configs=configs,
        train_per_class=int(get("train-per-class", 2)),
        occlusion=float(occ) if occ is not None else None,
        block_size_sweep=sweep,
        repeats=int(get("repeats", 10)),
        master_seed=int(get("seed", 0)),
        classifier=get("classifier", "linear"),
        classifier_c=float(get("c", 1.0)),
        classifier_epochs=int(get("epochs", 200)),
    )
