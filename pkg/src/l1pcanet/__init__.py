"""L1-2D2PCANet feature-learning toolkit.

A library and CLI implementing the two-stage PCA-filter cascade in four
variants (PCANet, 2DPCANet, L1-PCANet, L1-2D2PCANet), the L1-norm
subspace solvers behind the L1 variants, binary-hash block-histogram
pooling, a linear one-vs-rest classifier, and a seeded experiment harness
producing mean +/- RMSE accuracy tables.
"""

from . import classifier, dataio, harness, imagepatch, network, report, subspace
from .errors import (
    DataError,
    DegenerateDataError,
    InvalidParameterError,
    InvalidStateError,
    L1PCANetError,
    ModelFormatError,
    NumericError,
)
from .network import NetworkConfig, TrainedNetwork, train_network, extract_feature

__version__ = "0.1.0"

__all__ = [
    "classifier",
    "dataio",
    "harness",
    "imagepatch",
    "network",
    "report",
    "subspace",
    "NetworkConfig",
    "TrainedNetwork",
    "train_network",
    "extract_feature",
    "L1PCANetError",
    "InvalidParameterError",
    "InvalidStateError",
    "DataError",
    "ModelFormatError",
    "DegenerateDataError",
    "NumericError",
]
