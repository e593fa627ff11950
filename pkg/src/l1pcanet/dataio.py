"""Dataset ingestion, deterministic splits, and block-noise corruption.

Dataset layout on disk: one subdirectory per class under the root, each
holding grayscale image files. PGM (binary P5 and ASCII P2) is parsed
natively; 8-bit grayscale PNG is read through Pillow when available.
Classes and files are sorted lexicographically so label assignment is
reproducible. All randomness is seeded through rng.derive_rng.
"""

import csv
import logging
import os
import re

import numpy as np

from .errors import DataError, InvalidParameterError
from .imagepatch import as_gray_image
from .rng import derive_rng

__all__ = [
    "LabeledDataset",
    "read_pgm",
    "write_pgm",
    "load_dataset",
    "load_manifest",
    "split_random_per_class",
    "corrupt_with_block_noise",
    "block_side",
    "resize_nearest",
]

log = logging.getLogger(__name__)

SUPPORTED_EXTENSIONS = (".pgm", ".pnm", ".png")


class LabeledDataset:
    """Images of uniform size with dense integer labels."""

    def __init__(self, images, labels, class_names, source_manifest=None):
        self.images = [as_gray_image(im) for im in images]
        self.labels = np.asarray(labels, dtype=np.int64)
        self.class_names = list(class_names)
        self.source_manifest = list(source_manifest or [])
        if len(self.images) != len(self.labels):
            raise DataError("image/label count mismatch")
        shape = self.images[0].shape if self.images else None
        for i, im in enumerate(self.images):
            if im.shape != shape:
                name = self.source_manifest[i] if self.source_manifest else f"#{i}"
                raise DataError(
                    f"image {name} has shape {im.shape}, expected {shape}"
                )

    def __len__(self):
        return len(self.images)

    @property
    def class_count(self):
        return len(self.class_names)

    def subset(self, indices):
        idx = list(indices)
        return LabeledDataset(
            [self.images[i] for i in idx],
            self.labels[idx],
            self.class_names,
            [self.source_manifest[i] for i in idx] if self.source_manifest else None,
        )


def read_pgm(path):
    """Parse a binary (P5) or ASCII (P2) PGM file into a float image."""
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:2] not in (b"P5", b"P2"):
        raise DataError(f"{path}: not a PGM file (magic {data[:2]!r})")
    binary = data[:2] == b"P5"

    # header tokens: magic, width, height, maxval; '#' comments allowed
    pos = 2
    tokens = []
    while len(tokens) < 3:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos:pos + 1] != b"\n":
                pos += 1
            continue
        m = re.match(rb"\d+", data[pos:])
        if m is None:
            raise DataError(f"{path}: malformed PGM header")
        tokens.append(int(m.group()))
        pos += m.end()
    width, height, maxval = tokens
    if not 0 < maxval <= 255:
        raise DataError(f"{path}: only 8-bit PGM is supported (maxval {maxval})")
    if width < 1 or height < 1:
        raise DataError(f"{path}: bad dimensions {width}x{height}")

    if binary:
        pos += 1  # single whitespace after maxval
        raster = data[pos:pos + width * height]
        if len(raster) != width * height:
            raise DataError(f"{path}: truncated PGM raster")
        pixels = np.frombuffer(raster, dtype=np.uint8)
    else:
        values = data[pos:].split()
        if len(values) != width * height:
            raise DataError(f"{path}: expected {width * height} samples, "
                            f"got {len(values)}")
        pixels = np.array([int(v) for v in values])
    return pixels.reshape(height, width).astype(np.float64)


def write_pgm(img, path):
    """Write as binary PGM; pixels are rounded and clipped to [0, 255]."""
    img = as_gray_image(img)
    m, n = img.shape
    raster = np.clip(np.rint(img), 0, 255).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{n} {m}\n255\n".encode())
        fh.write(raster.tobytes())


def _read_image_file(path):
    ext = os.path.splitext(path)[1].lower()
    if ext in (".pgm", ".pnm"):
        return read_pgm(path)
    if ext == ".png":
        try:
            from PIL import Image
        except ImportError as e:
            raise DataError(f"{path}: PNG support requires Pillow") from e
        with Image.open(path) as im:
            return np.asarray(im.convert("L"), dtype=np.float64)
    raise DataError(f"{path}: unsupported image format")


def load_dataset(root):
    """Load `root/<class>/<image>` with lexicographic class/file order."""
    if not os.path.isdir(root):
        raise DataError(f"dataset root {root!r} is not a directory")
    class_names = sorted(
        d for d in os.listdir(root) if os.path.isdir(os.path.join(root, d))
    )
    if not class_names:
        raise DataError(f"dataset root {root!r} has no class subdirectories")
    images, labels, manifest = [], [], []
    for label, cls in enumerate(class_names):
        cdir = os.path.join(root, cls)
        for name in sorted(os.listdir(cdir)):
            path = os.path.join(cdir, name)
            if not os.path.isfile(path):
                continue
            if os.path.splitext(name)[1].lower() not in SUPPORTED_EXTENSIONS:
                log.warning("skipping unsupported file %s", path)
                continue
            images.append(_read_image_file(path))
            labels.append(label)
            manifest.append(path)
    if not images:
        raise DataError(f"no supported image files under {root!r}")
    shape = images[0].shape
    for im, path in zip(images, manifest):
        if im.shape != shape:
            raise DataError(
                f"{path}: image shape {im.shape} differs from {shape}"
            )
    return LabeledDataset(images, labels, class_names, manifest)


def load_manifest(csv_path):
    """Alternative ingestion: CSV rows `path,label` (paths relative to CSV)."""
    base = os.path.dirname(os.path.abspath(csv_path))
    images, labels, manifest = [], [], []
    with open(csv_path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].startswith("#"):
                continue
            path = row[0] if os.path.isabs(row[0]) else os.path.join(base, row[0])
            images.append(_read_image_file(path))
            labels.append(int(row[1]))
            manifest.append(path)
    if not images:
        raise DataError(f"manifest {csv_path!r} lists no images")
    raw = np.asarray(labels)
    uniq = sorted(set(raw.tolist()))
    dense = np.searchsorted(uniq, raw)
    return LabeledDataset(images, dense, [str(u) for u in uniq], manifest)


def split_random_per_class(ds, train_per_class, seed):
    """Exactly `train_per_class` training images per class; rest is test."""
    if train_per_class < 1:
        raise InvalidParameterError("train_per_class must be >= 1")
    train_idx, test_idx = [], []
    for cls in range(ds.class_count):
        members = np.flatnonzero(ds.labels == cls)
        if train_per_class >= len(members):
            raise DataError(
                f"class {ds.class_names[cls]!r} has {len(members)} images, "
                f"cannot reserve {train_per_class} for training"
            )
        rng = derive_rng(seed, "split", cls)
        chosen = rng.choice(len(members), size=train_per_class, replace=False)
        mask = np.zeros(len(members), dtype=bool)
        mask[chosen] = True
        train_idx.extend(members[mask])
        test_idx.extend(members[~mask])
    return ds.subset(sorted(train_idx)), ds.subset(sorted(test_idx))


def block_side(q, m, n):
    """Side of the corruption square covering fraction q of an m x n image."""
    s = int(round(np.sqrt(q * m * n)))
    return max(1, min(s, m, n))


def corrupt_with_block_noise(img, q, seed, per_block_value=False):
    """Overwrite one random square block with 0/255 noise.

    By default every pixel inside the block is independently 0 or 255;
    with per_block_value the whole block takes a single random 0 or 255.
    """
    img = as_gray_image(img)
    m, n = img.shape
    if not 0.0 < q < 1.0:
        raise InvalidParameterError(f"area fraction must be in (0, 1), got {q}")
    if q * m * n < 1.0:
        raise InvalidParameterError(f"area fraction {q} selects less than one pixel")
    s = block_side(q, m, n)
    rng = derive_rng(seed, "block-noise")
    r0 = int(rng.integers(0, m - s + 1))
    c0 = int(rng.integers(0, n - s + 1))
    out = img.copy()
    if per_block_value:
        out[r0:r0 + s, c0:c0 + s] = float(rng.integers(0, 2) * 255)
    else:
        out[r0:r0 + s, c0:c0 + s] = rng.integers(0, 2, size=(s, s)) * 255.0
    return out


def resize_nearest(img, new_m, new_n):
    """Nearest-neighbor resize (convenience; alignment is out of scope)."""
    img = as_gray_image(img)
    if new_m < 1 or new_n < 1:
        raise InvalidParameterError("target size must be positive")
    m, n = img.shape
    rows = np.minimum((np.arange(new_m) + 0.5) * m / new_m, m - 1).astype(int)
    cols = np.minimum((np.arange(new_n) + 0.5) * n / new_n, n - 1).astype(int)
    return img[np.ix_(rows, cols)]
