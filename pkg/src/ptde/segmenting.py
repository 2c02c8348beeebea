"""Segment planning and clip-feature aggregation.

A video of T frames is cut into floor(T / L) contiguous, non-overlapping
segments of exactly L frames; trailing T mod L frames are dropped. The
external appearance extractor emits one feature vector per 16-frame clip,
so a segment's embedding is the mean of its clips' L2-normalized features.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, EmptySegment, EmptyVideo, NonFiniteInput


@dataclass(frozen=True)
class SegmentPlan:
    """Frame ranges covering one video at a fixed segment length."""

    total_frames: int
    segment_length: int
    segments: tuple[tuple[int, int], ...]  # [start, end) frame ranges
    dropped_tail: int

    @property
    def num_segments(self) -> int:
        return len(self.segments)


def plan_segments(total_frames: int, segment_length: int) -> SegmentPlan:
    """Cut [0, total_frames) into floor(T/L) ranges of exactly L frames."""
    if segment_length < 1:
        raise ValueError(f"segment_length must be >= 1, got {segment_length}")
    if total_frames < 0:
        raise ValueError(f"total_frames must be >= 0, got {total_frames}")
    count = total_frames // segment_length
    if count == 0:
        raise EmptyVideo(
            f"video of {total_frames} frames is shorter than one segment "
            f"of {segment_length} frames"
        )
    ranges = tuple(
        (i * segment_length, (i + 1) * segment_length) for i in range(count)
    )
    return SegmentPlan(
        total_frames=total_frames,
        segment_length=segment_length,
        segments=ranges,
        dropped_tail=total_frames % segment_length,
    )


def l2_normalize(v) -> np.ndarray:
    """Scale v to unit Euclidean norm; the zero vector is returned unchanged.

    Absent people or blank clips produce all-zero features, and those must
    not abort a pipeline run.
    """
    v = np.asarray(v, dtype=np.float64)
    if not np.all(np.isfinite(v)):
        raise NonFiniteInput("vector contains NaN or infinite entries")
    norm = np.linalg.norm(v)
    if norm == 0.0:
        return v.copy()
    return v / norm


def aggregate_segment(clips) -> np.ndarray:
    """Mean of the L2-normalized clip features belonging to one segment."""
    clips = [np.asarray(c, dtype=np.float64) for c in clips]
    if len(clips) == 0:
        raise EmptySegment("segment contains no clip features")
    shape = clips[0].shape
    for i, c in enumerate(clips[1:], start=1):
        if c.shape != shape:
            raise DimensionMismatch(
                f"clip 0 has shape {shape}, clip {i} has shape {c.shape}"
            )
    return np.mean([l2_normalize(c) for c in clips], axis=0)
