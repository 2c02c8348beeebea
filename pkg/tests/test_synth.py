import numpy as np
import pytest

from ptde.data import load_manifest, load_split_bags, load_video_bag
from ptde.fusion import FusionMode
from ptde.synth import SynthSpec, generate_synthetic

SMALL_COUNTS = dict(
    train_counts={"PackageTheft": 3, "Pickup": 1, "Delivery": 1, "Irrelevant": 1},
    test_counts={"PackageTheft": 2, "Pickup": 1, "Delivery": 1, "Irrelevant": 1},
)


def small_spec(**overrides):
    kwargs = dict(seed=5, feature_dim=8, **SMALL_COUNTS)
    kwargs.update(overrides)
    return SynthSpec(**kwargs)


def tree_bytes(root):
    return {
        str(p.relative_to(root)): p.read_bytes()
        for p in sorted(root.rglob("*"))
        if p.is_file()
    }


class TestSpecValidation:
    def test_table_defaults(self):
        spec = SynthSpec()
        assert spec.train_counts == {
            "PackageTheft": 60, "Pickup": 20, "Delivery": 20, "Irrelevant": 20
        }
        assert spec.test_counts == {
            "PackageTheft": 40, "Pickup": 10, "Delivery": 20, "Irrelevant": 10
        }

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"class_separation": -1.0},
            {"noise_scale": 0.0},
            {"theft_fraction": 0.0},
            {"theft_fraction": 1.5},
            {"segments_min": 0},
            {"segment_length": 20},
        ],
    )
    def test_invalid_specs(self, kwargs):
        with pytest.raises(ValueError):
            small_spec(**kwargs)

    def test_needs_both_classes(self):
        counts = dict(SMALL_COUNTS["train_counts"])
        counts["PackageTheft"] = 0
        with pytest.raises(ValueError):
            small_spec(train_counts=counts)


class TestGenerate:
    def test_category_distribution_matches_table(self, tmp_path):
        # full-size default dataset: 60/20/20/20 training, 40/10/20/10 testing
        manifest = load_manifest(generate_synthetic(SynthSpec(seed=1), tmp_path))
        counts = {}
        for rec in manifest.videos:
            counts[(rec.split, rec.category)] = counts.get((rec.split, rec.category), 0) + 1
        assert counts[("train", "PackageTheft")] == 60
        assert counts[("train", "Pickup")] == 20
        assert counts[("train", "Delivery")] == 20
        assert counts[("train", "Irrelevant")] == 20
        assert counts[("test", "PackageTheft")] == 40
        assert counts[("test", "Pickup")] == 10
        assert counts[("test", "Delivery")] == 20
        assert counts[("test", "Irrelevant")] == 10

    def test_byte_identical_for_same_spec(self, tmp_path):
        a = tmp_path / "a"
        b = tmp_path / "b"
        generate_synthetic(small_spec(), a)
        generate_synthetic(small_spec(), b)
        ta, tb = tree_bytes(a), tree_bytes(b)
        assert set(ta) == set(tb)
        assert all(ta[k] == tb[k] for k in ta)

    def test_different_seeds_differ(self, tmp_path):
        a = tmp_path / "a"
        b = tmp_path / "b"
        generate_synthetic(small_spec(seed=1), a)
        generate_synthetic(small_spec(seed=2), b)
        assert tree_bytes(a) != tree_bytes(b)

    def test_separable_oracle_is_perfect(self, tmp_path):
        spec = small_spec(class_separation=1.0, noise_scale=0.1)
        manifest = load_manifest(generate_synthetic(spec, tmp_path))
        assert manifest.metadata["oracle_auc"] == 1.0

    def test_zero_separation_oracle_near_chance(self, tmp_path):
        spec = SynthSpec(seed=2, feature_dim=8, class_separation=0.0)
        manifest = load_manifest(generate_synthetic(spec, tmp_path))
        assert abs(manifest.metadata["oracle_auc"] - 0.5) < 0.1

    def test_theft_annotations_form_contiguous_block(self, tmp_path):
        manifest = load_manifest(generate_synthetic(small_spec(), tmp_path))
        for rec in manifest.videos:
            ann = list(rec.annotations)
            if rec.category == "PackageTheft":
                ones = [i for i, a in enumerate(ann) if a == 1]
                assert ones, "theft video without theft segments"
                assert ones == list(range(ones[0], ones[-1] + 1))
            else:
                assert not any(ann)

    def test_bags_load_in_both_modes(self, tmp_path):
        manifest = load_manifest(generate_synthetic(small_spec(), tmp_path))
        vid = manifest.videos[0].video_id
        plain = load_video_bag(manifest, vid, FusionMode.GLOBAL_ONLY)
        fused = load_video_bag(manifest, vid, FusionMode.GLOBAL_LOCAL_CONCAT)
        assert plain.embeddings.shape[1] == 8
        assert fused.embeddings.shape[1] == 8 + 54
        # the appearance part is identical across modes
        np.testing.assert_array_equal(fused.embeddings[:, :8], plain.embeddings)
        # pose values are normalized coordinates/confidences
        assert np.all(fused.embeddings[:, 8:] >= 0.0)
        assert np.all(fused.embeddings[:, 8:] <= 1.0)

    def test_train_split_has_both_classes(self, tmp_path):
        manifest = load_manifest(generate_synthetic(small_spec(), tmp_path))
        bags = load_split_bags(manifest, "train", FusionMode.GLOBAL_ONLY)
        assert any(b.is_positive for b in bags)
        assert any(not b.is_positive for b in bags)

    def test_generator_metadata_snapshot(self, tmp_path):
        spec = small_spec()
        manifest = load_manifest(generate_synthetic(spec, tmp_path))
        gen = manifest.metadata["generator"]
        assert gen["seed"] == spec.seed
        assert gen["feature_dim"] == spec.feature_dim
        assert gen["class_separation"] == spec.class_separation
