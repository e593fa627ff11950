"""Synthetic grayscale datasets for CI and desk-scale experiments.

The generator mimics the gross statistics of aligned face galleries so the
qualitative behavior of the four network variants carries over without any
licensed data:

  * a smooth base pattern shared by every class (the "mean face"),
  * a smaller smooth class-specific deviation (identity),
  * per-sample Gaussian pixel noise,
  * and, for a random minority of samples, a strong multiplicative smooth
    shadow field (extreme illumination, the heavy-tailed contamination
    that separates L1 from L2 filter learning).

All randomness is derived from the dataset seed, so a given parameter set
always produces the identical dataset.
"""

import os

import numpy as np
from scipy import ndimage

from .dataio import LabeledDataset, write_pgm
from .errors import InvalidParameterError
from .rng import derive_rng

__all__ = ["make_synthetic_dataset", "write_synthetic_dataset"]


def _smooth_field(rng, shape, coarse):
    """A coarse random grid upsampled with bicubic interpolation."""
    grid = rng.standard_normal(coarse)
    up = ndimage.zoom(
        grid, (shape[0] / coarse[0], shape[1] / coarse[1]), order=3, mode="nearest"
    )
    return up[: shape[0], : shape[1]]


def _unit(field):
    return (field - field.mean()) / field.std()


def make_synthetic_dataset(classes=10, per_class=12, size=(32, 32), seed=0,
                           base_amp=90.0, class_amp=35.0, noise_sigma=8.0,
                           shadow_prob=0.2, shadow_range=(0.5, 0.85)):
    """In-memory LabeledDataset of face-like synthetic images."""
    if classes < 1 or per_class < 1:
        raise InvalidParameterError("need at least one class and one sample")
    m, n = size
    base = _unit(_smooth_field(derive_rng(seed, "base"), (m, n), (4, 3)))
    images, labels = [], []
    for cls in range(classes):
        dev = _unit(_smooth_field(derive_rng(seed, "template", cls), (m, n), (7, 6)))
        template = 128.0 + base_amp * base + class_amp * dev
        for j in range(per_class):
            rng = derive_rng(seed, "sample", cls, j)
            img = template.copy()
            if rng.random() < shadow_prob:
                sh = _smooth_field(rng, (m, n), (3, 3))
                sh = (sh - sh.min()) / (sh.max() - sh.min() + 1e-12)
                img = img * (1.0 - rng.uniform(*shadow_range) * sh)
            img = img + noise_sigma * rng.standard_normal((m, n))
            images.append(np.clip(img, 0.0, 255.0))
            labels.append(cls)
    names = [f"class{cls:02d}" for cls in range(classes)]
    return LabeledDataset(images, labels, names)


def write_synthetic_dataset(root, classes=10, per_class=12, size=(32, 32),
                            seed=0, **kwargs):
    """Generate and write a dataset tree of binary PGM files under root."""
    ds = make_synthetic_dataset(classes, per_class, size, seed, **kwargs)
    counters = {}
    for img, label in zip(ds.images, ds.labels):
        cls = ds.class_names[label]
        cdir = os.path.join(root, cls)
        os.makedirs(cdir, exist_ok=True)
        idx = counters.get(cls, 0)
        counters[cls] = idx + 1
        write_pgm(img, os.path.join(cdir, f"sample{idx:03d}.pgm"))
    return ds
