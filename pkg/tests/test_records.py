"""Tests for records, record types, and classifier-backed typing judgments."""

from __future__ import annotations

import math

import numpy as np
import pytest

from waclex.composition import score_phrase
from waclex.datagen import build_lexicon, generate, left_right_spec
from waclex.errors import FileFormatError, ValidationError
from waclex.lexicon import Lexicon, TrainConfig
from waclex.records import (
    BasicType,
    ClassifierPredicate,
    Record,
    RecordType,
    holds,
    judge,
    object_record,
    parse_record_type,
    phrase_type,
)


def lexicon_with_probs(probs: dict[str, float]) -> Lexicon:
    lex = Lexicon(1)
    for word, p in probs.items():
        lex.update(word)
        lex.classifier(word).weights[:] = [math.log(p / (1.0 - p))]
    return lex


X = np.array([1.0])


class TestJudge:
    def test_single_predicate_equals_apply(self):
        lex = lexicon_with_probs({"red": 0.9})
        rtype = RecordType((("obj", ClassifierPredicate("red")),))
        record = Record((("obj", X),))
        assert judge(record, rtype, lex) == lex.apply("red", X)

    def test_two_predicates_multiply(self):
        lex = lexicon_with_probs({"red": 0.9, "box": 0.5})
        rtype = RecordType((
            ("a", ClassifierPredicate("red")),
            ("b", ClassifierPredicate("box")),
        ))
        record = Record((("a", X), ("b", X)))
        np.testing.assert_allclose(judge(record, rtype, lex), 0.45, rtol=1e-12)

    def test_structural_only_judgments_are_boolean(self):
        lex = Lexicon(1)
        rtype = RecordType((("name", BasicType("str")), ("n", BasicType("int"))))
        good = Record((("name", "point"), ("n", 3)))
        bad = Record((("name", "point"), ("n", "three")))
        assert judge(good, rtype, lex) == 1.0
        assert judge(bad, rtype, lex) == 0.0

    def test_missing_label_is_an_error_not_zero(self):
        lex = Lexicon(1)
        rtype = RecordType((("name", BasicType("str")),))
        with pytest.raises(ValidationError, match="missing label"):
            judge(Record((("other", "x"),)), rtype, lex)

    def test_unknown_predicate_word_is_an_error(self):
        lex = Lexicon(1)
        rtype = RecordType((("obj", ClassifierPredicate("ghost")),))
        with pytest.raises(ValidationError):
            judge(Record((("obj", X),)), rtype, lex)

    def test_mixed_structural_and_perceptual(self):
        lex = lexicon_with_probs({"red": 0.8})
        rtype = RecordType((
            ("label", BasicType("str")),
            ("obj", ClassifierPredicate("red")),
        ))
        record = Record((("label", "thing"), ("obj", X)))
        np.testing.assert_allclose(judge(record, rtype, lex), 0.8, rtol=1e-12)

    def test_monotone_in_added_predicates(self):
        """Every added factor is <= 1, so judgments never increase."""
        rng = np.random.default_rng(90)
        for _ in range(50):
            words = {f"w{i}": float(rng.uniform(0.05, 0.95)) for i in range(4)}
            lex = lexicon_with_probs(words)
            labels = []
            prev = 1.0
            for i, w in enumerate(words):
                labels.append((f"l{i}", ClassifierPredicate(w)))
                rtype = RecordType(tuple(labels))
                record = object_record(rtype, X)
                cur = judge(record, rtype, lex)
                assert cur <= prev + 1e-15
                prev = cur

    def test_judge_equals_score_phrase_bitwise(self):
        rng = np.random.default_rng(91)
        lex = Lexicon(3)
        for w in ("red", "small", "near"):
            lex.update(w)
            lex.classifier(w).weights[:] = rng.normal(0, 1, 3)
        for _ in range(20):
            feats = rng.normal(0, 1, 3)
            tokens = ["red", "small", "near"][: int(rng.integers(1, 4))]
            rtype = phrase_type(tokens)
            record = object_record(rtype, feats)
            assert judge(record, rtype, lex) == score_phrase(lex, tokens, feats)

    def test_trained_side_classifier_accepts_right_points(self):
        """A clearly-right point inhabits the 'right' type with high probability."""
        spec = left_right_spec(noise_sigma=0.05, seed=92)
        dataset = generate(spec, 300, 2, 1, episode_mode="per_object")
        lex = build_lexicon(dataset, TrainConfig(neg_ratio=1.0), seed=92)
        rtype = RecordType((("point", ClassifierPredicate("right")),))
        record = Record((("point", np.array([0.9, 0.1])),))
        assert judge(record, rtype, lex) > 0.9


class TestHolds:
    def test_threshold_gates(self):
        lex = lexicon_with_probs({"red": 0.9, "box": 0.5})
        rtype = phrase_type(["red", "box"])
        record = object_record(rtype, X)  # judge = 0.45
        assert not holds(record, rtype, lex, threshold=0.5)
        assert holds(record, rtype, lex, threshold=0.4)

    def test_threshold_domain(self):
        lex = lexicon_with_probs({"red": 0.9})
        rtype = phrase_type(["red"])
        record = object_record(rtype, X)
        with pytest.raises(ValidationError):
            holds(record, rtype, lex, threshold=0.0)
        with pytest.raises(ValidationError):
            holds(record, rtype, lex, threshold=1.0)

    def test_default_threshold_agrees_with_best_object(self):
        """Judging objects one at a time mostly agrees with argmax resolution.

        Needs calibrated classifiers, so the lexicon trains with balanced
        contrast sets; an absolute 0.5 threshold is meaningless for the
        systematically shifted probabilities an imbalanced protocol produces.
        """
        from waclex.composition import resolve
        from waclex.datagen import color_shape_spec

        spec = color_shape_spec(noise_sigma=0.05, seed=93)
        train = generate(spec, 300, 4, 2)
        held = generate(color_shape_spec(noise_sigma=0.05, seed=94), 100, 4, 2)
        lex = build_lexicon(train, TrainConfig(neg_ratio=1.0), seed=93)
        agree = total = winner_held = episodes = 0
        for ep in held.resolved_episodes():
            winner = resolve(lex, ep.tokens, ep.scene).argmax_id()
            rtype = phrase_type(ep.tokens)
            for obj in ep.scene.objects:
                verdict = holds(object_record(rtype, obj.features), rtype, lex)
                total += 1
                agree += verdict == (obj.object_id == winner)
                if obj.object_id == winner:
                    winner_held += verdict
            episodes += 1
        assert agree / total >= 0.95
        assert winner_held / episodes >= 0.95


class TestRecordTypeFormat:
    def test_parse_basic_and_predicates(self):
        text = """
        # a point judged by the side classifier
        name : str
        point : vec
        side : word:right
        """
        rtype = parse_record_type(text)
        assert rtype.labels[0] == ("name", BasicType("str"))
        assert rtype.labels[1] == ("point", BasicType("vec"))
        assert rtype.labels[2] == ("side", ClassifierPredicate("right"))

    def test_unknown_constraint_reports_line(self):
        with pytest.raises(FileFormatError) as err:
            parse_record_type("a : str\nb : blob\n")
        assert err.value.line == 2

    def test_missing_colon_rejected(self):
        with pytest.raises(FileFormatError):
            parse_record_type("just a label\n")

    def test_empty_type_rejected(self):
        with pytest.raises(FileFormatError):
            parse_record_type("# nothing but comments\n")

    def test_duplicate_labels_rejected(self):
        with pytest.raises(ValidationError):
            parse_record_type("a : str\na : int\n")
