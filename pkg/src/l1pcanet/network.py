"""The two-stage PCA-filter cascade shared by all four network variants.

Variants differ only in how filters are learned from the training patches:

    PCANet        vectorized patches, L2 eigendecomposition
    2DPCANet      row patches, L2 eigendecomposition, rank-1 filters
    L1-PCANet     vectorized patches, L1 polarity iteration
    L1-2D2PCANet  row patches, L1 polarity iteration, rank-1 filters

Mean removal applies to patches during filter learning only; the forward
pass convolves the raw image. Stage-2 filters are learned once from the
patch pool of all stage-1 maps of all training images and shared across
channels. Pooling binarizes each stage-1 group's L2 maps at zero, packs
the bits into an integer code per pixel (map l carries weight 2^(l-1)),
and histograms the codes over a bh x bw block partition.
"""

import hashlib
import io
import struct
from dataclasses import dataclass, field

import numpy as np

from . import imagepatch as ip
from . import subspace as ss
from .errors import (
    DegenerateDataError,
    InvalidParameterError,
    ModelFormatError,
)

__all__ = [
    "VARIANTS",
    "NetworkConfig",
    "FilterBank",
    "TrainedNetwork",
    "default_block_grid",
    "learn_stage1_filters",
    "stage1_forward",
    "build_stage2_input",
    "learn_stage2_filters",
    "stage2_forward",
    "binarize_and_hash",
    "block_histogram",
    "extract_feature",
    "train_network",
    "save_model",
    "load_model",
]

VARIANTS = ("PCANet", "2DPCANet", "L1-PCANet", "L1-2D2PCANet")

_CANONICAL = {v.lower(): v for v in VARIANTS}
_CANONICAL["l1-2d²pcanet"] = "L1-2D2PCANet"  # unicode superscript form


def canonical_variant(name):
    try:
        return _CANONICAL[str(name).lower()]
    except KeyError:
        raise InvalidParameterError(
            f"unknown variant {name!r}; choose from {', '.join(VARIANTS)}"
        ) from None


def default_block_grid(b, portrait=True):
    """A bh x bw grid for a scalar block count B."""
    if b < 1:
        raise InvalidParameterError("block count must be >= 1")
    pairs = [(bh, b // bh) for bh in range(1, b + 1) if b % bh == 0]
    # most square factorization, taller side first (B=8 -> 4x2, B=10 -> 5x2)
    bh, bw = min(pairs, key=lambda p: (abs(p[0] - p[1]), -p[0]))
    if bh < bw:
        bh, bw = bw, bh
    return (bh, bw) if portrait else (bw, bh)


@dataclass
class NetworkConfig:
    variant: str = "L1-2D2PCANet"
    k: int = 5
    l1: int = 4
    l2: int = 4
    block_grid: tuple = (4, 2)
    tol: float = ss.DEFAULT_TOL
    max_iter: int = ss.DEFAULT_MAX_ITER

    def __post_init__(self):
        self.variant = canonical_variant(self.variant)
        if self.k % 2 == 0 or self.k < 3:
            raise InvalidParameterError(f"patch side must be odd and >= 3, got {self.k}")
        cap = self.k if self.two_d else self.k * self.k
        for name, val in (("l1", self.l1), ("l2", self.l2)):
            if not 1 <= val <= cap:
                raise InvalidParameterError(
                    f"{name}={val} out of range [1, {cap}] for {self.variant}"
                )
        bh, bw = self.block_grid
        if bh < 1 or bw < 1:
            raise InvalidParameterError(f"bad block grid {self.block_grid}")
        self.block_grid = (int(bh), int(bw))

    @property
    def two_d(self):
        return self.variant in ("2DPCANet", "L1-2D2PCANet")

    @property
    def l1_norm(self):
        return self.variant.startswith("L1")

    @property
    def block_count(self):
        return self.block_grid[0] * self.block_grid[1]

    @property
    def feature_length(self):
        return (2 ** self.l2) * self.l1 * self.block_count


@dataclass
class FilterBank:
    stage1: list  # L1 arrays of shape (k, k)
    stage2: list  # L2 arrays of shape (k, k)


@dataclass
class TrainedNetwork:
    config: NetworkConfig
    filters: FilterBank
    image_shape: tuple
    training_fingerprint: bytes = b""
    classifier: object = field(default=None, compare=False)


def _check_images(images):
    if len(images) == 0:
        raise InvalidParameterError("need at least one training image")
    imgs = [ip.as_gray_image(im) for im in images]
    shape = imgs[0].shape
    for i, im in enumerate(imgs):
        if im.shape != shape:
            raise InvalidParameterError(
                f"image {i} has shape {im.shape}, expected {shape}"
            )
    return imgs


def _solve(cfg, n_components, columns=None, rows_x=None, rows_y=None, stage=""):
    """Run the variant's solver and return k x k filters."""
    try:
        if cfg.two_d:
            if cfg.l1_norm:
                dx = ss.l1_2dpca_components(rows_x, n_components, cfg.tol, cfg.max_iter)
                dy = ss.l1_2dpca_components(rows_y, n_components, cfg.tol, cfg.max_iter)
            else:
                dx = ss.l2_2dpca_components(rows_x, n_components)
                dy = ss.l2_2dpca_components(rows_y, n_components)
            return [np.outer(a.w, b.w) for a, b in zip(dx, dy)]
        if cfg.l1_norm:
            dirs = ss.l1pca_components(columns, n_components, cfg.tol, cfg.max_iter)
        else:
            dirs = ss.l2pca_components(columns, n_components)
        return [d.w.reshape(cfg.k, cfg.k) for d in dirs]
    except DegenerateDataError as e:
        raise DegenerateDataError(f"{stage}: {e}") from e


def _pool_patches(images, cfg):
    """Mean-removed patch pools of all images, in the variant's layout."""
    if cfg.two_d:
        xs, ys = [], []
        for im in images:
            rp = ip.remove_patch_mean(ip.extract_row_patches(im, cfg.k))
            xs.append(rp.rows_along_x)
            ys.append(rp.rows_along_y)
        # one row per (patch, patch-row) pair
        rows_x = np.hstack(xs).reshape(cfg.k, -1, cfg.k).transpose(1, 0, 2)
        rows_y = np.hstack(ys).reshape(cfg.k, -1, cfg.k).transpose(1, 0, 2)
        return {
            "rows_x": rows_x.reshape(-1, cfg.k),
            "rows_y": rows_y.reshape(-1, cfg.k),
        }
    cols = [
        ip.remove_patch_mean(ip.extract_vectorized_patches(im, cfg.k)).patches
        for im in images
    ]
    return {"columns": np.hstack(cols)}


def learn_stage1_filters(images, cfg):
    """Stage-1 filter bank from the pooled training patches."""
    imgs = _check_images(images)
    return _solve(cfg, cfg.l1, stage="stage 1", **_pool_patches(imgs, cfg))


def stage1_forward(img, filters):
    """Same-size maps of the image under every stage-1 filter."""
    if len(filters) == 0:
        raise InvalidParameterError("empty filter bank")
    return ip.convolve_bank(img, np.stack(filters))


def build_stage2_input(stage1_maps, cfg):
    """Patch pool over all images and all stage-1 channels.

    `stage1_maps` is an iterable of per-image stacks from stage1_forward.
    The pool is shared: stage-2 filters are learned once for every channel.
    """
    maps = [m for stack in stage1_maps for m in stack]
    if len(maps) == 0:
        raise InvalidParameterError("no stage-1 maps to pool")
    return _pool_patches(maps, cfg)


def learn_stage2_filters(stage2_input, cfg):
    return _solve(cfg, cfg.l2, stage="stage 2", **stage2_input)


def stage2_forward(stage1_maps, stage2_filters):
    """L1*L2 maps grouped by stage-1 parent: out[p][q] = O_p * W_q."""
    bank = np.stack(stage2_filters)
    return [ip.convolve_bank(m, bank) for m in stage1_maps]


def binarize_and_hash(group):
    """Pack the signs of a stage-1 group's L2 maps into integer codes.

    Map l (1-based) contributes 2^(l-1) wherever its value is >= 0.
    """
    group = np.asarray(group, dtype=np.float64)
    if group.ndim != 3 or group.shape[0] == 0:
        raise InvalidParameterError("expected a non-empty stack of same-size maps")
    weights = 2 ** np.arange(group.shape[0], dtype=np.int64)
    bits = (group >= 0.0).astype(np.int64)
    return np.tensordot(weights, bits, axes=1)


def block_histogram(hashed, cfg):
    """Concatenated 2^L2-bin histograms over a bh x bw block partition.

    Blocks are non-overlapping; remainder rows/cols go to the last block
    in each direction. Counts are raw, not normalized.
    """
    t = np.asarray(hashed)
    m, n = t.shape
    bh, bw = cfg.block_grid
    if bh > m or bw > n:
        raise InvalidParameterError(
            f"block grid {cfg.block_grid} does not fit a {m}x{n} map"
        )
    nbins = 2 ** cfg.l2
    r_edges = [(m // bh) * i for i in range(bh)] + [m]
    c_edges = [(n // bw) * j for j in range(bw)] + [n]
    segs = []
    for bi in range(bh):
        for bj in range(bw):
            block = t[r_edges[bi]:r_edges[bi + 1], c_edges[bj]:c_edges[bj + 1]]
            segs.append(np.bincount(block.ravel(), minlength=nbins)[:nbins])
    return np.concatenate(segs)


def extract_feature(img, net):
    """Block-histogram feature vector, length 2^L2 * L1 * B."""
    img = ip.as_gray_image(img)
    if img.shape != tuple(net.image_shape):
        raise InvalidParameterError(
            f"image shape {img.shape} does not match training shape {net.image_shape}"
        )
    cfg = net.config
    maps1 = stage1_forward(img, net.filters.stage1)
    groups = stage2_forward(maps1, net.filters.stage2)
    segs = [block_histogram(binarize_and_hash(g), cfg) for g in groups]
    return np.concatenate(segs)


def _fingerprint(images, cfg):
    h = hashlib.sha256()
    h.update(repr((cfg.variant, cfg.k, cfg.l1, cfg.l2, cfg.block_grid)).encode())
    for im in images:
        h.update(np.ascontiguousarray(im, dtype=np.float64).tobytes())
    return h.digest()


def train_network(images, cfg):
    """Learn both filter stages from the training images."""
    imgs = _check_images(images)
    stage1 = learn_stage1_filters(imgs, cfg)
    all_maps = [stage1_forward(im, stage1) for im in imgs]
    stage2 = learn_stage2_filters(build_stage2_input(all_maps, cfg), cfg)
    return TrainedNetwork(
        config=cfg,
        filters=FilterBank(stage1=stage1, stage2=stage2),
        image_shape=imgs[0].shape,
        training_fingerprint=_fingerprint(imgs, cfg),
    )


# --- model serialization -------------------------------------------------
#
# Layout (all little-endian):
#   magic "L12DPCANET" | version u32 | variant u8 | k u32 | L1 u32 | L2 u32
#   | bh u32 | bw u32 | m u32 | n u32 | fingerprint 32 bytes
#   | stage-1 filters (L1 * k * k f64, row-major)
#   | stage-2 filters (L2 * k * k f64, row-major)
# An optional classifier section (see classifier.py) may follow.

MAGIC = b"L12DPCANET"
FORMAT_VERSION = 1


def save_model(net, path_or_file):
    buf = io.BytesIO()
    cfg = net.config
    buf.write(MAGIC)
    buf.write(struct.pack("<IB", FORMAT_VERSION, VARIANTS.index(cfg.variant)))
    m, n = net.image_shape
    buf.write(struct.pack("<7I", cfg.k, cfg.l1, cfg.l2, *cfg.block_grid, m, n))
    fp = net.training_fingerprint or b"\x00" * 32
    buf.write(fp[:32].ljust(32, b"\x00"))
    for bank in (net.filters.stage1, net.filters.stage2):
        for f in bank:
            buf.write(np.ascontiguousarray(f, dtype="<f8").tobytes())
    if net.classifier is not None:
        from .classifier import write_classifier_section

        write_classifier_section(buf, net.classifier)
    data = buf.getvalue()
    if hasattr(path_or_file, "write"):
        path_or_file.write(data)
    else:
        with open(path_or_file, "wb") as fh:
            fh.write(data)


def _read_exact(fh, count, what):
    data = fh.read(count)
    if len(data) != count:
        raise ModelFormatError(f"truncated model file while reading {what}")
    return data


def load_model(path_or_file):
    if hasattr(path_or_file, "read"):
        fh = path_or_file
        close = False
    else:
        fh = open(path_or_file, "rb")
        close = True
    try:
        magic = fh.read(len(MAGIC))
        if magic != MAGIC:
            raise ModelFormatError(f"bad magic {magic!r}, not a model file")
        version, variant_tag = struct.unpack("<IB", _read_exact(fh, 5, "header"))
        if version != FORMAT_VERSION:
            raise ModelFormatError(f"unsupported format version {version}")
        if variant_tag >= len(VARIANTS):
            raise ModelFormatError(f"unknown variant tag {variant_tag}")
        k, l1, l2, bh, bw, m, n = struct.unpack("<7I", _read_exact(fh, 28, "dims"))
        fingerprint = _read_exact(fh, 32, "fingerprint")
        cfg = NetworkConfig(
            variant=VARIANTS[variant_tag], k=k, l1=l1, l2=l2, block_grid=(bh, bw)
        )

        def read_bank(count):
            raw = _read_exact(fh, count * k * k * 8, "filters")
            arr = np.frombuffer(raw, dtype="<f8").reshape(count, k, k)
            return [a.astype(np.float64) for a in arr]

        net = TrainedNetwork(
            config=cfg,
            filters=FilterBank(stage1=read_bank(l1), stage2=read_bank(l2)),
            image_shape=(m, n),
            training_fingerprint=fingerprint,
        )
        from .classifier import read_classifier_section

        net.classifier = read_classifier_section(fh)
        return net
    finally:
        if close:
            fh.close()
