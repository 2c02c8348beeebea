"""Command-line surface: synth, train, score, eval, roc.

Exit codes: 0 success, 1 usage error, 2 data/contract error. Errors go to
stderr. When --seed is omitted the PTDE_SEED environment variable is used,
then 0.
"""

import argparse
import json
import os
import sys

from .data import (
    load_checkpoint,
    load_manifest,
    load_split_bags,
    load_video_bag,
    save_checkpoint,
)
from .errors import MissingGroundTruth, PtdeError
from .fusion import FusionMode
from .metrics import (
    DEFAULT_THRESHOLD,
    ScoredSegment,
    per_category_eval,
    roc_curve,
    write_roc_csv,
    write_roc_svg,
)
from .scoring import score_segments
from .synth import SynthSpec, generate_synthetic
from .trainer import TrainConfig, train, write_run_log


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on usage errors; the contract wants 1
    def error(self, message):
        raise _UsageError(message)


def _resolve_seed(value):
    if value is not None:
        return value
    env = os.environ.get("PTDE_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise _UsageError(f"PTDE_SEED must be an integer, got {env!r}") from None


def scored_test_segments(manifest, head, fusion_mode):
    """Score every test-split segment and attach ground truth + category.

    Theft videos must carry segment-level annotations; normal videos are
    all-negative by definition.
    """
    segments = []
    for rec in manifest.split_records("test"):
        bag = load_video_bag(manifest, rec.video_id, fusion_mode)
        scores = score_segments(head, bag.embeddings)
        if bag.is_positive:
            if bag.ground_truth is None:
                raise MissingGroundTruth(
                    f"test video {rec.video_id!r} has no segment annotations"
                )
            labels = bag.ground_truth
        else:
            labels = (0,) * len(scores)
        for s, label in zip(scores, labels):
            segments.append(
                ScoredSegment(
                    score=float(s), is_theft=bool(label), category=bag.category
                )
            )
    return segments


def _cmd_synth(args) -> int:
    spec = SynthSpec(
        seed=_resolve_seed(args.seed),
        name=args.name,
        feature_dim=args.dim,
        segment_length=args.segment_length,
        segments_min=args.segments_min,
        segments_max=args.segments_max,
        class_separation=args.separation,
        noise_scale=args.noise,
        theft_fraction=args.theft_fraction,
        train_counts={
            "PackageTheft": args.train_theft,
            "Pickup": args.train_pickup,
            "Delivery": args.train_delivery,
            "Irrelevant": args.train_irrelevant,
        },
        test_counts={
            "PackageTheft": args.test_theft,
            "Pickup": args.test_pickup,
            "Delivery": args.test_delivery,
            "Irrelevant": args.test_irrelevant,
        },
    )
    manifest_path = generate_synthetic(spec, args.out_dir)
    print(manifest_path)
    return 0


def _cmd_train(args) -> int:
    manifest = load_manifest(args.manifest)
    fusion = FusionMode(args.fusion)
    config = TrainConfig(
        learning_rate=args.lr,
        epochs=args.epochs,
        pairs_per_epoch=args.pairs_per_epoch,
        lambda1=args.lambda1,
        lambda2=args.lambda2,
        seed=_resolve_seed(args.seed),
        fusion_mode=fusion,
    )
    bags = load_split_bags(manifest, "train", fusion)
    run = train(bags, config)
    save_checkpoint(run.head, config, args.out_checkpoint)
    log_path = args.out_log if args.out_log else f"{args.out_checkpoint}.log"
    write_run_log(run, log_path)
    print(
        f"trained {config.epochs} epochs, final objective "
        f"{run.history[-1, 0]:.6f}, checkpoint {args.out_checkpoint}"
    )
    return 0


def _cmd_score(args) -> int:
    head, meta = load_checkpoint(args.checkpoint)
    manifest = load_manifest(args.manifest)
    bag = load_video_bag(manifest, args.video_id, meta.fusion_mode)
    for s in score_segments(head, bag.embeddings):
        print(f"{s:.6f}")
    return 0


def _cmd_eval(args) -> int:
    head, meta = load_checkpoint(args.checkpoint)
    manifest = load_manifest(args.manifest)
    segments = scored_test_segments(manifest, head, meta.fusion_mode)
    report = per_category_eval(segments, threshold=args.threshold)
    print(json.dumps(report.to_dict(), indent=2))
    return 0


def _cmd_roc(args) -> int:
    head, meta = load_checkpoint(args.checkpoint)
    manifest = load_manifest(args.manifest)
    segments = scored_test_segments(manifest, head, meta.fusion_mode)
    curve = roc_curve(
        [s.score for s in segments], [1 if s.is_theft else 0 for s in segments]
    )
    write_roc_csv(curve, args.out_csv)
    if args.out_svg:
        write_roc_svg(curve, args.out_svg)
    print(f"auc {curve.area():.6f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ptde", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic dataset")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--name", default="synthetic-package-theft")
    p.add_argument("--dim", type=int, default=64)
    p.add_argument("--segment-length", type=int, default=32)
    p.add_argument("--segments-min", type=int, default=4)
    p.add_argument("--segments-max", type=int, default=8)
    p.add_argument("--separation", type=float, default=1.0)
    p.add_argument("--noise", type=float, default=0.1)
    p.add_argument("--theft-fraction", type=float, default=0.35)
    p.add_argument("--train-theft", type=int, default=60)
    p.add_argument("--train-pickup", type=int, default=20)
    p.add_argument("--train-delivery", type=int, default=20)
    p.add_argument("--train-irrelevant", type=int, default=20)
    p.add_argument("--test-theft", type=int, default=40)
    p.add_argument("--test-pickup", type=int, default=10)
    p.add_argument("--test-delivery", type=int, default=20)
    p.add_argument("--test-irrelevant", type=int, default=10)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("train", help="train a scoring head on the train split")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out-checkpoint", required=True)
    p.add_argument("--out-log", default=None)
    p.add_argument(
        "--fusion", choices=[m.value for m in FusionMode], default="global-local"
    )
    p.add_argument("--lr", type=float, default=0.01)
    p.add_argument("--epochs", type=int, default=5000)
    p.add_argument("--pairs-per-epoch", type=int, default=30)
    p.add_argument("--lambda1", type=float, default=8e-5)
    p.add_argument("--lambda2", type=float, default=8e-5)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("score", help="print per-segment scores for one video")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--video-id", required=True)
    p.set_defaults(func=_cmd_score)

    p = sub.add_parser("eval", help="evaluate the test split, JSON report on stdout")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("roc", help="export the test-split ROC curve")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--out-csv", required=True)
    p.add_argument("--out-svg", default=None)
    p.set_defaults(func=_cmd_roc)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except (_UsageError, ValueError) as exc:
        # ValueError bubbles up from config validation of flag values
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (PtdeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
