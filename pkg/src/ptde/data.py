"""Manifest-driven dataset loading, feature files, and checkpoints.

This module is the contract boundary with the external appearance and pose
extractors. Appearance features arrive in PTDF binary files (header: magic
"PTDF", version, clip count, dimension as 32-bit little-endian integers,
then clip_count x dim little-endian float32 values). Pose keypoints arrive
as the JSON documents described in the pose module. A JSON manifest ties
the files to labels, splits, and category tags.

Checkpoints carry the scoring head: magic "PTDE", version, input_dim, the
three layer widths, fusion-mode tag, and seed, followed by the parameters
as little-endian float64 in layer order, row-major. Round-trips are
bit-exact.
"""

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    BadCategory,
    CorruptCheckpoint,
    CorruptFeatureFile,
    InconsistentDimension,
    MalformedPoseFile,
    ManifestSyntax,
    MissingFeatureFile,
    MissingPose,
    UnknownVideo,
    UnsupportedVersion,
)
from .fusion import FusionMode, fuse
from .metrics import CATEGORIES, THEFT_CATEGORY
from .pose import parse_pose_document, pool_pose, pose_feature
from .scoring import ScoringHead
from .segmenting import aggregate_segment, plan_segments

CLIP_FRAMES = 16

FEATURE_MAGIC = b"PTDF"
FEATURE_VERSION = 1
_FEATURE_HEADER = struct.Struct("<4sIII")  # magic, version, clip_count, dim

CHECKPOINT_MAGIC = b"PTDE"
CHECKPOINT_VERSION = 1
# magic, version, input_dim, hidden1, hidden2, out, fusion tag, seed
_CHECKPOINT_HEADER = struct.Struct("<4sIIIIIIq")

_FUSION_TAGS = {FusionMode.GLOBAL_ONLY: 0, FusionMode.GLOBAL_LOCAL_CONCAT: 1}
_TAG_FUSIONS = {tag: mode for mode, tag in _FUSION_TAGS.items()}

DEFAULT_IMAGE_WIDTH = 320
DEFAULT_IMAGE_HEIGHT = 240
SPLITS = ("train", "test")


# ---------------------------------------------------------------- features

def write_feature_file(path, clips) -> None:
    """Write one video's clip features as a PTDF file (float32 payload)."""
    clips = np.ascontiguousarray(clips, dtype="<f4")
    if clips.ndim != 2:
        raise ValueError(f"clips must be a (count, dim) array, got {clips.shape}")
    header = _FEATURE_HEADER.pack(
        FEATURE_MAGIC, FEATURE_VERSION, clips.shape[0], clips.shape[1]
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(clips.tobytes())


def read_feature_header(path) -> tuple[int, int]:
    """(clip_count, dim) from a PTDF header; validates total file size."""
    path = Path(path)
    size = path.stat().st_size
    with open(path, "rb") as fh:
        head = fh.read(_FEATURE_HEADER.size)
    if len(head) < _FEATURE_HEADER.size:
        raise CorruptFeatureFile(f"{path}: header truncated at byte {len(head)}")
    magic, version, count, dim = _FEATURE_HEADER.unpack(head)
    if magic != FEATURE_MAGIC:
        raise CorruptFeatureFile(f"{path}: bad magic {magic!r}")
    if version != FEATURE_VERSION:
        raise CorruptFeatureFile(f"{path}: unsupported feature version {version}")
    if dim < 1:
        raise CorruptFeatureFile(f"{path}: feature dimension {dim}")
    expected = _FEATURE_HEADER.size + count * dim * 4
    if size != expected:
        raise CorruptFeatureFile(
            f"{path}: expected {expected} bytes, file ends at byte offset {size}"
        )
    return count, dim


def read_feature_file(path) -> np.ndarray:
    """Load a PTDF file as a (clip_count, dim) float64 array."""
    count, dim = read_feature_header(path)
    data = Path(path).read_bytes()
    clips = np.frombuffer(
        data, dtype="<f4", offset=_FEATURE_HEADER.size, count=count * dim
    ).reshape(count, dim)
    if not np.all(np.isfinite(clips)):
        raise CorruptFeatureFile(f"{path}: non-finite feature values")
    return clips.astype(np.float64)


# ---------------------------------------------------------------- manifest

@dataclass(frozen=True)
class VideoRecord:
    video_id: str
    split: str
    category: str
    feature_path: Path
    pose_path: Path | None
    annotations: tuple[int, ...] | None
    clip_count: int

    @property
    def is_positive(self) -> bool:
        return self.category == THEFT_CATEGORY


@dataclass(frozen=True)
class Manifest:
    name: str
    feature_dim: int
    clip_length: int
    segment_length: int
    image_width: int
    image_height: int
    videos: tuple[VideoRecord, ...]
    metadata: dict
    path: Path

    def record(self, video_id: str) -> VideoRecord:
        for rec in self.videos:
            if rec.video_id == video_id:
                return rec
        raise UnknownVideo(f"video id {video_id!r} not in manifest {self.path}")

    def split_records(self, split: str) -> tuple[VideoRecord, ...]:
        return tuple(rec for rec in self.videos if rec.split == split)


def _field(obj: dict, key: str, kind, where: str):
    if key not in obj:
        raise ManifestSyntax(f"{where}: missing field {key!r}")
    value = obj[key]
    if kind is int and isinstance(value, bool):
        raise ManifestSyntax(f"{where}: field {key!r} must be an integer")
    if not isinstance(value, kind):
        raise ManifestSyntax(
            f"{where}: field {key!r} has type {type(value).__name__}"
        )
    return value


def load_manifest(path) -> Manifest:
    """Load and validate a manifest, probing every referenced file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ManifestSyntax(f"cannot read manifest {path}: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ManifestSyntax(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ManifestSyntax(f"{path}: top level must be an object")

    name = _field(raw, "name", str, str(path))
    feature_dim = _field(raw, "feature_dim", int, str(path))
    clip_length = _field(raw, "clip_length", int, str(path))
    segment_length = _field(raw, "segment_length", int, str(path))
    width = raw.get("image_width", DEFAULT_IMAGE_WIDTH)
    height = raw.get("image_height", DEFAULT_IMAGE_HEIGHT)
    if feature_dim < 1:
        raise ManifestSyntax(f"{path}: feature_dim must be >= 1")
    if clip_length != CLIP_FRAMES:
        raise ManifestSyntax(
            f"{path}: clip_length is fixed at {CLIP_FRAMES} by the extractor "
            f"contract, got {clip_length}"
        )
    if segment_length < clip_length or segment_length % clip_length != 0:
        raise ManifestSyntax(
            f"{path}: segment_length must be a positive multiple of "
            f"{clip_length}, got {segment_length}"
        )
    if not isinstance(width, int) or not isinstance(height, int) or width < 1 or height < 1:
        raise ManifestSyntax(f"{path}: image dimensions must be positive integers")

    videos_raw = _field(raw, "videos", list, str(path))
    metadata = raw.get("metadata", {})
    if not isinstance(metadata, dict):
        raise ManifestSyntax(f"{path}: metadata must be an object")

    records = []
    seen_ids = set()
    for idx, video in enumerate(videos_raw):
        where = f"{path} videos[{idx}]"
        if not isinstance(video, dict):
            raise ManifestSyntax(f"{where}: must be an object")
        vid = _field(video, "id", str, where)
        if vid in seen_ids:
            raise ManifestSyntax(f"{where}: duplicate video id {vid!r}")
        seen_ids.add(vid)
        split = _field(video, "split", str, where)
        if split not in SPLITS:
            raise ManifestSyntax(f"{where}: split must be one of {SPLITS}")
        category = _field(video, "category", str, where)
        if category not in CATEGORIES:
            raise BadCategory(
                f"{where}: category {category!r} not in {sorted(CATEGORIES)}"
            )
        feature_path = path.parent / _field(video, "feature_file", str, where)
        if not feature_path.is_file():
            raise MissingFeatureFile(str(feature_path))
        clip_count, dim = read_feature_header(feature_path)
        if dim != feature_dim:
            raise InconsistentDimension(
                f"{feature_path}: file dimension {dim} != manifest "
                f"feature_dim {feature_dim}"
            )
        pose_path = None
        if "pose_file" in video and video["pose_file"] is not None:
            pose_path = path.parent / _field(video, "pose_file", str, where)
            if not pose_path.is_file():
                raise MissingFeatureFile(str(pose_path))
        annotations = None
        if "annotations" in video and video["annotations"] is not None:
            ann = _field(video, "annotations", list, where)
            for a in ann:
                if isinstance(a, bool) or a not in (0, 1):
                    raise ManifestSyntax(f"{where}: annotations must be 0 or 1")
            num_segments = (clip_count * clip_length) // segment_length
            if len(ann) != num_segments:
                raise ManifestSyntax(
                    f"{where}: {len(ann)} annotations but the video has "
                    f"{num_segments} segments"
                )
            if category != THEFT_CATEGORY and any(ann):
                raise ManifestSyntax(
                    f"{where}: theft annotations on a {category} video"
                )
            annotations = tuple(int(a) for a in ann)
        records.append(
            VideoRecord(
                video_id=vid,
                split=split,
                category=category,
                feature_path=feature_path,
                pose_path=pose_path,
                annotations=annotations,
                clip_count=clip_count,
            )
        )

    return Manifest(
        name=name,
        feature_dim=feature_dim,
        clip_length=clip_length,
        segment_length=segment_length,
        image_width=width,
        image_height=height,
        videos=tuple(records),
        metadata=metadata,
        path=path,
    )


# -------------------------------------------------------------------- bags

@dataclass(frozen=True)
class VideoBag:
    """One video as an ordered set of segment embeddings plus its bag label."""

    video_id: str
    embeddings: np.ndarray  # (num_segments, dim)
    is_positive: bool
    category: str
    ground_truth: tuple[int, ...] | None


def load_video_bag(manifest: Manifest, video_id: str, fusion_mode: FusionMode) -> VideoBag:
    """Assemble one video's bag: aggregate clips, pool pose, fuse."""
    rec = manifest.record(video_id)
    clips = read_feature_file(rec.feature_path)
    plan = plan_segments(
        clips.shape[0] * manifest.clip_length, manifest.segment_length
    )

    appearance = [
        aggregate_segment(
            clips[start // manifest.clip_length : end // manifest.clip_length]
        )
        for start, end in plan.segments
    ]

    pose_per_segment = None
    if fusion_mode is FusionMode.GLOBAL_LOCAL_CONCAT:
        if rec.pose_path is None:
            raise MissingPose(f"video {video_id!r} has no pose file in the manifest")
        frames = parse_pose_document(rec.pose_path.read_text(encoding="utf-8"))
        covered = plan.num_segments * manifest.segment_length
        if len(frames) < covered:
            raise MalformedPoseFile(
                f"{rec.pose_path}: {len(frames)} pose frames but segments "
                f"cover {covered} frames"
            )
        pose_per_segment = [
            pool_pose(
                pose_feature(frames[i], manifest.image_width, manifest.image_height)
                for i in range(start, end)
            )
            for start, end in plan.segments
        ]

    embeddings = np.stack(
        [
            fuse(
                app,
                pose_per_segment[i] if pose_per_segment is not None else None,
                fusion_mode,
                expected_dim=manifest.feature_dim,
            )
            for i, app in enumerate(appearance)
        ]
    )

    ground_truth = rec.annotations
    if ground_truth is not None and len(ground_truth) != plan.num_segments:
        raise ManifestSyntax(
            f"video {video_id!r}: {len(ground_truth)} annotations for "
            f"{plan.num_segments} segments"
        )
    return VideoBag(
        video_id=video_id,
        embeddings=embeddings,
        is_positive=rec.is_positive,
        category=rec.category,
        ground_truth=ground_truth,
    )


def load_split_bags(manifest: Manifest, split: str, fusion_mode: FusionMode) -> list[VideoBag]:
    """All bags of one split, in manifest order."""
    return [
        load_video_bag(manifest, rec.video_id, fusion_mode)
        for rec in manifest.split_records(split)
    ]


# ------------------------------------------------------------- checkpoints

@dataclass(frozen=True)
class CheckpointMeta:
    """Header fields persisted alongside the parameters."""

    input_dim: int
    layer_dims: tuple[int, int, int]
    seed: int
    fusion_mode: FusionMode


def save_checkpoint(head: ScoringHead, config, path) -> None:
    """Persist a head; `config` supplies the seed and fusion-mode tag."""
    h1, h2, out = head.layer_dims
    header = _CHECKPOINT_HEADER.pack(
        CHECKPOINT_MAGIC,
        CHECKPOINT_VERSION,
        head.input_dim,
        h1,
        h2,
        out,
        _FUSION_TAGS[config.fusion_mode],
        config.seed,
    )
    with open(path, "wb") as fh:
        fh.write(header)
        for p in head.params():
            fh.write(np.ascontiguousarray(p, dtype="<f8").tobytes())


def load_checkpoint(path) -> tuple[ScoringHead, CheckpointMeta]:
    """Bit-exact inverse of save_checkpoint."""
    data = Path(path).read_bytes()
    if len(data) < _CHECKPOINT_HEADER.size:
        raise CorruptCheckpoint(f"{path}: header truncated at byte {len(data)}")
    magic, version, input_dim, h1, h2, out, tag, seed = _CHECKPOINT_HEADER.unpack(
        data[: _CHECKPOINT_HEADER.size]
    )
    if magic != CHECKPOINT_MAGIC:
        raise CorruptCheckpoint(f"{path}: bad magic {magic!r}")
    if version != CHECKPOINT_VERSION:
        raise UnsupportedVersion(
            f"{path}: checkpoint version {version}, expected {CHECKPOINT_VERSION}"
        )
    if tag not in _TAG_FUSIONS:
        raise CorruptCheckpoint(f"{path}: unknown fusion tag {tag}")
    shapes = [
        (input_dim, h1), (h1,), (h1, h2), (h2,), (h2, out), (out,)
    ]
    counts = [int(np.prod(s)) for s in shapes]
    expected = _CHECKPOINT_HEADER.size + sum(counts) * 8
    if len(data) != expected:
        raise CorruptCheckpoint(
            f"{path}: expected {expected} bytes, file ends at byte offset {len(data)}"
        )
    params = []
    offset = _CHECKPOINT_HEADER.size
    for shape, count in zip(shapes, counts):
        arr = np.frombuffer(data, dtype="<f8", offset=offset, count=count)
        params.append(arr.reshape(shape).copy())
        offset += count * 8
    head = ScoringHead(*params)
    if not all(np.all(np.isfinite(p)) for p in head.params()):
        raise CorruptCheckpoint(f"{path}: non-finite parameter values")
    return head, CheckpointMeta(
        input_dim=input_dim,
        layer_dims=(h1, h2, out),
        seed=seed,
        fusion_mode=_TAG_FUSIONS[tag],
    )
