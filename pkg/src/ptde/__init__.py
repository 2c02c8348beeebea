"""Weakly supervised package-theft scoring for segmented surveillance video.

Per-clip appearance embeddings and per-frame pose keypoints are fused into
segment embeddings; a small feedforward head is trained with a ranking
objective over (theft video, normal video) bag pairs and evaluated with
ROC/AUC reports.
"""

from .data import (
    CheckpointMeta,
    Manifest,
    VideoBag,
    VideoRecord,
    load_checkpoint,
    load_manifest,
    load_split_bags,
    load_video_bag,
    read_feature_file,
    save_checkpoint,
    write_feature_file,
)
from .errors import PtdeError
from .fusion import FusionMode, fuse, fused_dim
from .loss import (
    LossBreakdown,
    batch_objective,
    loss_score_gradients,
    mil_ranking_loss,
    ranking_satisfied,
)
from .metrics import (
    DEFAULT_THRESHOLD,
    EvalReport,
    RocCurve,
    ScoredSegment,
    apply_threshold,
    auc,
    per_category_eval,
    roc_curve,
)
from .pose import PoseFrame, parse_pose_document, pool_pose, pose_feature
from .scoring import (
    HeadGradients,
    ScoringHead,
    backprop,
    init_head,
    score,
    score_segments,
)
from .segmenting import SegmentPlan, aggregate_segment, l2_normalize, plan_segments
from .synth import SynthSpec, generate_synthetic
from .trainer import AdagradState, TrainConfig, TrainRun, adagrad_step, train

__version__ = "0.1.0"

__all__ = [
    "AdagradState",
    "CheckpointMeta",
    "DEFAULT_THRESHOLD",
    "EvalReport",
    "FusionMode",
    "HeadGradients",
    "LossBreakdown",
    "Manifest",
    "PoseFrame",
    "PtdeError",
    "RocCurve",
    "ScoredSegment",
    "ScoringHead",
    "SegmentPlan",
    "SynthSpec",
    "TrainConfig",
    "TrainRun",
    "VideoBag",
    "VideoRecord",
    "adagrad_step",
    "aggregate_segment",
    "apply_threshold",
    "auc",
    "backprop",
    "batch_objective",
    "fuse",
    "fused_dim",
    "generate_synthetic",
    "init_head",
    "l2_normalize",
    "load_checkpoint",
    "load_manifest",
    "load_split_bags",
    "load_video_bag",
    "loss_score_gradients",
    "mil_ranking_loss",
    "parse_pose_document",
    "per_category_eval",
    "plan_segments",
    "pool_pose",
    "pose_feature",
    "ranking_satisfied",
    "read_feature_file",
    "roc_curve",
    "save_checkpoint",
    "score",
    "score_segments",
    "train",
    "write_feature_file",
]
