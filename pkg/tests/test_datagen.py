"""Tests for the synthetic generator, negative sampling, and their determinism."""

from __future__ import annotations

import math

import numpy as np
import pytest

from waclex.composition import Scene, SceneObject
from waclex.datagen import (
    AttributeGroup,
    Dataset,
    EpisodeRecord,
    GenerativeSpec,
    color_shape_spec,
    generate,
    left_right_spec,
    object_tokens,
    positive_examples,
    sample_negatives,
    scene_at,
    word_seed,
)
from waclex.errors import DimensionError, ValidationError


class TestSpecValidation:
    def test_noise_must_stay_separable(self):
        with pytest.raises(ValidationError):
            GenerativeSpec(noise_sigma=0.5)

    def test_zero_width_spec_rejected(self):
        with pytest.raises(DimensionError):
            GenerativeSpec(groups=(), include_position=False)

    def test_duplicate_tokens_across_groups_rejected(self):
        with pytest.raises(ValidationError):
            GenerativeSpec(groups=(
                AttributeGroup("a", ("x", "y")),
                AttributeGroup("b", ("y", "z")),
            ))

    def test_layout_widths(self):
        spec = color_shape_spec()
        assert spec.dim == 8 + 6 + 2
        assert left_right_spec().dim == 2
        assert spec.feature_index["red"] == 0
        assert spec.feature_index["square"] == 8


class TestGenerate:
    def test_left_right_gold_side_matches_token(self):
        """Every 'right' episode's gold point sits at screen-x > 0, by construction."""
        spec = left_right_spec(noise_sigma=0.05, seed=41)
        dataset = generate(spec, 500, 2, 1, episode_mode="per_object")
        assert len(dataset.episodes) == 1000
        for ep in dataset.episodes:
            gold = dataset.scene(ep.scene_id).object(ep.gold_object_id)
            if ep.tokens == ("right",):
                assert gold.features[0] > 0
            else:
                assert ep.tokens == ("left",)
                assert gold.features[0] <= 0

    def test_determinism_identical_reruns(self):
        spec = color_shape_spec(noise_sigma=0.1, seed=42)
        a = generate(spec, 20, 3, 2)
        b = generate(spec, 20, 3, 2)
        assert a.episodes == b.episodes
        for sa, sb in zip(a.scenes, b.scenes):
            for oa, ob in zip(sa.objects, sb.objects):
                assert np.array_equal(oa.features, ob.features)
                assert oa.attributes == ob.attributes

    def test_scene_at_matches_generate_stream(self):
        spec = color_shape_spec(seed=43)
        dataset = generate(spec, 10, 4, 2)
        for i, scene in enumerate(dataset.scenes):
            replayed = scene_at(spec, 4, spec.seed, i)
            for a, b in zip(scene.objects, replayed.objects):
                assert np.array_equal(a.features, b.features)

    def test_label_fidelity_without_noise(self):
        """At sigma=0 every expression token is a true attribute of its gold object."""
        spec = color_shape_spec(noise_sigma=0.0, seed=44)
        dataset = generate(spec, 100, 5, 2)
        for ep in dataset.episodes:
            gold = dataset.scene(ep.scene_id).object(ep.gold_object_id)
            truths = object_tokens(spec, gold)
            for token in ep.tokens:
                assert token in truths

    def test_expressions_prefer_discriminating_attributes(self):
        """The emitted token is never shared by more scene objects than the alternative."""
        spec = color_shape_spec(noise_sigma=0.0, seed=45)
        dataset = generate(spec, 200, 5, 1)
        for ep in dataset.episodes:
            scene = dataset.scene(ep.scene_id)
            gold = scene.object(ep.gold_object_id)
            others = [o for o in scene.objects if o.object_id != gold.object_id]

            def share_count(token):
                return sum(1 for o in others if token in object_tokens(spec, o))

            chosen = share_count(ep.tokens[0])
            for alternative in object_tokens(spec, gold):
                assert chosen <= share_count(alternative)

    def test_too_few_objects_rejected(self):
        with pytest.raises(ValidationError):
            generate(color_shape_spec(), 5, 1, 2)

    def test_vocab_covers_episode_tokens(self):
        dataset = generate(color_shape_spec(seed=46), 50, 4, 2)
        assert dataset.vocab == {t for ep in dataset.episodes for t in ep.tokens}

    def test_position_attributes_mirror_features(self):
        spec = left_right_spec(noise_sigma=0.2, seed=47)
        dataset = generate(spec, 50, 2, 1, episode_mode="per_object")
        for scene in dataset.scenes:
            for o in scene.objects:
                assert o.attributes["x"] == o.features[0]
                assert o.attributes["y"] == o.features[1]
                assert -1.0 <= o.features[0] <= 1.0


class TestSampleNegatives:
    def test_protocol_count(self):
        """Ratio 3 yields 300 negatives for 100 positives."""
        spec = color_shape_spec(seed=48)
        dataset = generate(spec, 400, 5, 2)
        word = sorted(dataset.vocab)[0]
        n_pos = len(positive_examples(dataset, word))
        negs = sample_negatives(dataset, word, 3.0, seed=1)
        assert len(negs) == math.ceil(3.0 * n_pos)

    def test_ceil_rounding(self):
        dataset = generate(color_shape_spec(seed=49), 400, 5, 2)
        word = max(dataset.vocab, key=lambda w: len(positive_examples(dataset, w)))
        n_pos = len(positive_examples(dataset, word))
        assert n_pos >= 10
        negs = sample_negatives(dataset, word, 0.01, seed=1)
        assert len(negs) == math.ceil(0.01 * n_pos)

    def test_negative_purity(self):
        """Sampled negatives never coincide with the word's referent objects."""
        dataset = generate(color_shape_spec(seed=50), 50, 4, 2)
        for word in sorted(dataset.vocab)[:5]:
            referents = {
                (ep.scene_id, ep.gold_object_id)
                for ep in dataset.episodes
                if word in ep.tokens
            }
            referent_rows = {
                dataset.scene(s).object(o).features.tobytes() for s, o in referents
            }
            for vec in sample_negatives(dataset, word, 3.0, seed=2):
                assert vec.tobytes() not in referent_rows

    def test_no_eligible_negatives_rejected(self):
        scene = Scene("s", (
            SceneObject("a", np.array([1.0])),
            SceneObject("b", np.array([2.0])),
        ))
        dataset = Dataset(
            (scene,),
            (EpisodeRecord(("w",), "s", "a"), EpisodeRecord(("w",), "s", "b")),
        )
        with pytest.raises(ValidationError):
            sample_negatives(dataset, "w", 3.0, seed=0)

    def test_seeded_sampling_is_deterministic(self):
        dataset = generate(color_shape_spec(seed=51), 50, 4, 2)
        word = sorted(dataset.vocab)[0]
        a = sample_negatives(dataset, word, 2.0, seed=word_seed(9, word))
        b = sample_negatives(dataset, word, 2.0, seed=word_seed(9, word))
        assert all(np.array_equal(x, y) for x, y in zip(a, b))


class TestDatasetIntegrity:
    def test_missing_scene_rejected(self):
        with pytest.raises(ValidationError):
            Dataset((), (EpisodeRecord(("w",), "nope", "a"),))

    def test_missing_gold_rejected(self):
        scene = Scene("s", (SceneObject("a", np.array([1.0])),
                            SceneObject("b", np.array([2.0]))))
        with pytest.raises(ValidationError):
            Dataset((scene,), (EpisodeRecord(("w",), "s", "zzz"),))
