"""Fusion of global appearance embeddings with local pose features.

Global-only keeps the appearance embedding as-is; global-local appends the
54 pooled pose values, so the fused dimension is appearance_dim + 54.
"""

from enum import Enum

import numpy as np

from .errors import DimensionMismatch, MissingPose
from .pose import SEGMENT_FEATURE_DIM


class FusionMode(Enum):
    GLOBAL_ONLY = "global"
    GLOBAL_LOCAL_CONCAT = "global-local"


def fused_dim(appearance_dim: int, mode: FusionMode) -> int:
    """Embedding dimension produced by `fuse` for a given appearance dim."""
    if mode is FusionMode.GLOBAL_LOCAL_CONCAT:
        return appearance_dim + SEGMENT_FEATURE_DIM
    return appearance_dim


def fuse(appearance, pose, mode: FusionMode, expected_dim: int | None = None) -> np.ndarray:
    """Combine one segment's appearance embedding with its pose feature.

    `pose` must be present exactly when the mode is GLOBAL_LOCAL_CONCAT.
    `expected_dim`, when given, pins the appearance dimension to the
    dataset's feature dimension.
    """
    appearance = np.asarray(appearance, dtype=np.float64)
    if appearance.ndim != 1:
        raise DimensionMismatch(
            f"appearance embedding must be a vector, got shape {appearance.shape}"
        )
    if expected_dim is not None and appearance.shape[0] != expected_dim:
        raise DimensionMismatch(
            f"appearance embedding has dimension {appearance.shape[0]}, "
            f"dataset dimension is {expected_dim}"
        )
    if mode is FusionMode.GLOBAL_ONLY:
        if pose is not None:
            raise ValueError("pose feature supplied in global-only mode")
        return appearance.copy()
    if pose is None:
        raise MissingPose("global-local fusion requires a pose feature")
    pose = np.asarray(pose, dtype=np.float64)
    if pose.shape != (SEGMENT_FEATURE_DIM,):
        raise DimensionMismatch(
            f"pose feature must have shape ({SEGMENT_FEATURE_DIM},), got {pose.shape}"
        )
    return np.concatenate([appearance, pose])
