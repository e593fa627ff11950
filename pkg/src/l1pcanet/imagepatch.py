"""Grayscale images, overlapping patch extraction, and same-size convolution.

Images are plain 2-D float64 numpy arrays (row-major, nominal range
[0, 255]). Patches of odd side k are taken around every pixel of the
zero-padded image, so an m x n image always yields m*n patches. The patch
window scan order is row-major everywhere, which makes filtering with a
reshaped direction vector identical to cross-correlation (no kernel flip).
"""

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import InvalidParameterError, InvalidStateError

__all__ = [
    "as_gray_image",
    "zero_pad",
    "extract_vectorized_patches",
    "extract_row_patches",
    "remove_patch_mean",
    "convolve_same",
    "convolve_bank",
    "PatchSet",
    "RowPatchSet",
]


@dataclass
class PatchSet:
    """Vectorized patches: one k^2-long column per patch center."""

    k: int
    patches: np.ndarray  # (k*k, P)
    mean_removed: bool = False


@dataclass
class RowPatchSet:
    """Patches kept 2-D: k x k slices side by side, plus their transposes."""

    k: int
    rows_along_x: np.ndarray  # (k, k*P), patches verbatim
    rows_along_y: np.ndarray  # (k, k*P), transposed patches
    mean_removed: bool = False

    @property
    def patch_count(self):
        return self.rows_along_x.shape[1] // self.k


def as_gray_image(pixels):
    """Validate and convert to a 2-D float64 image array."""
    img = np.asarray(pixels, dtype=np.float64)
    if img.ndim != 2 or img.shape[0] < 1 or img.shape[1] < 1:
        raise InvalidParameterError(
            f"expected a non-empty 2-D image, got shape {img.shape}"
        )
    return img


def _check_patch_side(k):
    if k % 2 == 0 or k < 3:
        raise InvalidParameterError(f"patch side must be odd and >= 3, got {k}")


def zero_pad(img, k):
    """Pad with (k-1)/2 rows/cols of zeros on every side."""
    img = as_gray_image(img)
    _check_patch_side(k)
    r = (k - 1) // 2
    return np.pad(img, r, mode="constant")


def _windows(img, k):
    """All k x k windows of the zero-padded image, shape (m, n, k, k)."""
    return sliding_window_view(zero_pad(img, k), (k, k))


def extract_vectorized_patches(img, k):
    """One column per pixel: the row-major scan of its k x k window."""
    img = as_gray_image(img)
    w = _windows(img, k)
    m, n = img.shape
    patches = w.reshape(m * n, k * k).T.copy()
    return PatchSet(k=k, patches=patches)


def extract_row_patches(img, k):
    """Patches kept as k x k slices; rows_along_y holds their transposes."""
    img = as_gray_image(img)
    w = _windows(img, k)
    m, n = img.shape
    slabs = w.reshape(m * n, k, k)
    # (k, P*k): patch j occupies columns j*k .. (j+1)*k
    along_x = slabs.transpose(1, 0, 2).reshape(k, m * n * k)
    along_y = slabs.transpose(2, 0, 1).reshape(k, m * n * k)
    return RowPatchSet(k=k, rows_along_x=along_x.copy(), rows_along_y=along_y.copy())


def remove_patch_mean(ps):
    """Subtract each patch's own scalar mean (over all k^2 entries)."""
    if ps.mean_removed:
        raise InvalidStateError("patch mean already removed")
    if isinstance(ps, PatchSet):
        centered = ps.patches - ps.patches.mean(axis=0, keepdims=True)
        return PatchSet(k=ps.k, patches=centered, mean_removed=True)
    if isinstance(ps, RowPatchSet):
        k, total = ps.k, ps.rows_along_x.shape[1]
        p = total // k
        # per-slice scalar mean; identical for the slice and its transpose
        means = ps.rows_along_x.reshape(k, p, k).mean(axis=(0, 2))
        shift = np.repeat(means, k)[None, :]
        return RowPatchSet(
            k=k,
            rows_along_x=ps.rows_along_x - shift,
            rows_along_y=ps.rows_along_y - shift,
            mean_removed=True,
        )
    raise InvalidParameterError(f"unsupported patch set type: {type(ps).__name__}")


def convolve_bank(img, filters):
    """Cross-correlate one image with a stack of k x k filters at once.

    Returns an array of shape (len(filters), m, n). Output pixel (r, c) of
    filter W is the dot product of W's row-major scan with the window
    centered at (r, c) of the zero-padded image.
    """
    img = as_gray_image(img)
    filters = np.asarray(filters, dtype=np.float64)
    if filters.ndim == 2:
        filters = filters[None]
    k = filters.shape[-1]
    if filters.shape[-2] != k or k % 2 == 0:
        raise InvalidParameterError(
            f"filters must be square with odd side, got shape {filters.shape[-2:]}"
        )
    if k == 1:
        return filters.reshape(-1, 1, 1) * img[None]
    m, n = img.shape
    w = _windows(img, k).reshape(m * n, k * k)
    flat = filters.reshape(len(filters), k * k)
    out = w @ flat.T  # (m*n, F)
    return out.T.reshape(len(filters), m, n)


def convolve_same(img, filt):
    """Same-size 2-D cross-correlation with zero padding."""
    return convolve_bank(img, filt)[0]
