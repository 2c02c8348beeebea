"""Pose keypoint parsing and the local (pose) segment feature.

The external pose estimator writes one JSON document per video: an array of
frames, each frame an array of candidate persons, each person exactly 18
[x_pixels, y_pixels, confidence] triples in COCO-18 joint order. Per frame
we keep the single most confident person, normalize pixel coordinates by the
image size, and clamp everything to [0, 1]. A segment's pose feature is the
mean of its frames' flattened 18x3 features.
"""

import json
from dataclasses import dataclass

import numpy as np

from .errors import EmptySegment, MalformedPoseFile

JOINT_COUNT = 18
JOINT_VALUES = 3  # x, y, confidence
SEGMENT_FEATURE_DIM = JOINT_COUNT * JOINT_VALUES


@dataclass(frozen=True)
class PoseFrame:
    """One frame's selected person: (18, 3) values, all within [0, 1]."""

    joints: np.ndarray
    person_present: bool


def zero_pose_frame() -> PoseFrame:
    """Placeholder for frames with nobody detected; keeps segments aligned."""
    return PoseFrame(
        joints=np.zeros((JOINT_COUNT, JOINT_VALUES)), person_present=False
    )


def parse_pose_document(doc: str) -> list[list[np.ndarray]]:
    """Parse a pose document into per-frame candidate keypoint arrays.

    Returns one entry per frame; each entry holds zero or more (18, 3)
    float arrays in raw pixel coordinates. Raises MalformedPoseFile on bad
    syntax, wrong joint counts, or non-numeric/non-finite values.
    """
    try:
        frames = json.loads(doc)
    except json.JSONDecodeError as exc:
        raise MalformedPoseFile(f"invalid JSON: {exc}") from exc
    if not isinstance(frames, list):
        raise MalformedPoseFile("top level must be an array of frames")
    parsed = []
    for f_idx, frame in enumerate(frames):
        if not isinstance(frame, list):
            raise MalformedPoseFile(f"frame {f_idx} is not an array of persons")
        parsed.append(
            [_parse_person(person, f_idx, p_idx) for p_idx, person in enumerate(frame)]
        )
    return parsed


def _parse_person(person, f_idx: int, p_idx: int) -> np.ndarray:
    if not isinstance(person, list) or len(person) != JOINT_COUNT:
        got = len(person) if isinstance(person, list) else type(person).__name__
        raise MalformedPoseFile(
            f"frame {f_idx} person {p_idx}: expected {JOINT_COUNT} joints, got {got}"
        )
    joints = np.empty((JOINT_COUNT, JOINT_VALUES))
    for j_idx, triple in enumerate(person):
        if not isinstance(triple, list) or len(triple) != JOINT_VALUES:
            raise MalformedPoseFile(
                f"frame {f_idx} person {p_idx} joint {j_idx}: "
                f"expected [x, y, confidence]"
            )
        for v_idx, value in enumerate(triple):
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise MalformedPoseFile(
                    f"frame {f_idx} person {p_idx} joint {j_idx}: "
                    f"non-numeric value {value!r}"
                )
            joints[j_idx, v_idx] = float(value)
    if not np.all(np.isfinite(joints)):
        raise MalformedPoseFile(
            f"frame {f_idx} person {p_idx}: non-finite keypoint value"
        )
    return joints


def pose_feature(frame_candidates, image_width: float, image_height: float) -> PoseFrame:
    """Select one person and normalize the keypoints to image coordinates.

    The person with the highest mean joint confidence wins; ties go to the
    lowest person index. No person gives the all-zero frame. Coordinates are
    divided by the image size and clamped to [0, 1] because estimators
    occasionally emit out-of-frame joints.
    """
    if image_width <= 0 or image_height <= 0:
        raise ValueError(
            f"image dimensions must be positive, got {image_width}x{image_height}"
        )
    if not frame_candidates:
        return zero_pose_frame()
    mean_conf = [float(np.mean(np.asarray(c)[:, 2])) for c in frame_candidates]
    best = int(np.argmax(mean_conf))  # argmax resolves ties to the lowest index
    joints = np.asarray(frame_candidates[best], dtype=np.float64).copy()
    joints[:, 0] /= image_width
    joints[:, 1] /= image_height
    np.clip(joints, 0.0, 1.0, out=joints)
    return PoseFrame(joints=joints, person_present=True)


def pool_pose(frames) -> np.ndarray:
    """Element-wise mean of the flattened per-frame features over one segment."""
    frames = list(frames)
    if len(frames) == 0:
        raise EmptySegment("cannot pool pose features over an empty segment")
    stacked = np.stack([f.joints.reshape(SEGMENT_FEATURE_DIM) for f in frames])
    return stacked.mean(axis=0)
