"""Tests for embedding export, the distributional builder, fusion, and attention."""

from __future__ import annotations

import numpy as np
import pytest

from waclex.datagen import AttributeGroup, GenerativeSpec, build_lexicon, generate
from waclex.embeddings import (
    DenotationVector,
    EmbeddingTable,
    attention_combine,
    build_text_embeddings,
    cooccurrence_counts,
    denotation_vector,
    export_visual_embeddings,
    fuse,
)
from waclex.errors import DimensionError, ValidationError
from waclex.lexicon import Lexicon


def ones_table(words, dim):
    return EmbeddingTable(dim, {w: np.ones(dim) for w in words}, "textual")


def zeros_table(words, dim):
    return EmbeddingTable(dim, {w: np.zeros(dim) for w in words}, "textual")


def cosine(a, b):
    return float(a @ b / (np.linalg.norm(a) * np.linalg.norm(b)))


class TestExportVisual:
    def test_identity_extraction(self):
        lex = Lexicon(2)
        lex.update("w")
        lex.classifier("w").weights[:] = [0.3, -0.2]
        lex.classifier("w").bias = 9.9  # must be excluded
        table = export_visual_embeddings(lex)
        assert table.modality == "visual"
        assert table.bias_excluded is True
        np.testing.assert_array_equal(table.vector("w"), [0.3, -0.2])

    def test_width_follows_lexicon(self):
        lex = Lexicon(128)
        lex.update("w", [np.ones(128)], [np.zeros(128)])
        assert export_visual_embeddings(lex).dim == 128

    def test_empty_lexicon_rejected(self):
        with pytest.raises(ValidationError):
            export_visual_embeddings(Lexicon(3))

    def test_mult_with_ones_is_identity_on_export(self):
        rng = np.random.default_rng(70)
        lex = Lexicon(4)
        for i in range(3):
            lex.update(f"w{i}", rng.normal(0, 1, (4, 4)), rng.normal(0, 1, (4, 4)))
        exported = export_visual_embeddings(lex)
        fused = fuse(exported, ones_table(exported.words, 4), "mult")
        for w in exported.words:
            assert np.array_equal(fused.vector(w), exported.vector(w))

    def test_export_fuse_import_round_trip_is_identity(self, tmp_path):
        """export -> mult-by-ones -> save -> load returns the exported vectors bit-exactly."""
        from waclex.storage import load_embeddings, save_embeddings

        rng = np.random.default_rng(81)
        lex = Lexicon(6)
        for i in range(4):
            lex.update(f"w{i}", rng.normal(0, 1, (5, 6)), rng.normal(0, 1, (5, 6)))
        exported = export_visual_embeddings(lex)
        fused = fuse(exported, ones_table(exported.words, 6), "mult")
        path = str(tmp_path / "fused.jsonl")
        save_embeddings(fused, path)
        loaded = load_embeddings(path)
        assert loaded.words == exported.words
        for w in exported.words:
            assert np.array_equal(loaded.vector(w), exported.vector(w))


class TestTextEmbeddings:
    def test_shared_contexts_cluster(self):
        """Words with identical contexts coincide; disjoint contexts score lower.

        The oracle recomputes PPMI rows by brute force before projection.
        """
        corpus = [
            ["the", "cat", "sat", "here"],
            ["the", "dog", "sat", "here"],
            ["a", "rocket", "launched", "fast"],
            ["the", "cat", "sat", "here"],
            ["the", "dog", "sat", "here"],
        ]
        vocab, counts = cooccurrence_counts(corpus, 2)
        # brute-force PPMI oracle
        total = counts.sum()
        expected = np.zeros_like(counts)
        for i in range(len(vocab)):
            for j in range(len(vocab)):
                if counts[i, j] > 0:
                    val = np.log(counts[i, j] * total / (counts[i].sum() * counts[:, j].sum()))
                    expected[i, j] = max(0.0, val)
        cat, dog = vocab.index("cat"), vocab.index("dog")
        np.testing.assert_allclose(expected[cat], expected[dog], atol=1e-12)

        table = build_text_embeddings(corpus, 2, 16, seed=0)
        assert cosine(table.vector("cat"), table.vector("dog")) > cosine(
            table.vector("cat"), table.vector("rocket")
        )
        np.testing.assert_allclose(
            cosine(table.vector("cat"), table.vector("dog")), 1.0, atol=1e-12
        )

    def test_unseen_word_absent(self):
        table = build_text_embeddings([["only", "one", "sentence"]], 2, 4, seed=1)
        assert "zebra" not in table
        assert set(table.words) == {"only", "one", "sentence"}

    def test_deterministic_under_seed(self):
        corpus = [["a", "b", "c"], ["b", "c", "d"]]
        t1 = build_text_embeddings(corpus, 1, 8, seed=5)
        t2 = build_text_embeddings(corpus, 1, 8, seed=5)
        assert t1.words == t2.words
        for w in t1.words:
            assert np.array_equal(t1.vector(w), t2.vector(w))

    def test_zero_window_rejected(self):
        with pytest.raises(ValidationError):
            build_text_embeddings([["a", "b"]], 0, 4, seed=0)

    def test_empty_corpus_rejected(self):
        with pytest.raises(ValidationError):
            build_text_embeddings([], 2, 4, seed=0)


class TestFuse:
    def test_mult_with_ones_is_identity(self):
        rng = np.random.default_rng(71)
        a = EmbeddingTable(3, {w: rng.normal(0, 1, 3) for w in "xyz"}, "visual")
        fused = fuse(a, ones_table("xyz", 3), "mult")
        for w in "xyz":
            assert np.array_equal(fused.vector(w), a.vector(w))

    def test_add_with_zeros_is_identity(self):
        rng = np.random.default_rng(72)
        a = EmbeddingTable(3, {w: rng.normal(0, 1, 3) for w in "xyz"}, "visual")
        fused = fuse(a, zeros_table("xyz", 3), "add")
        for w in "xyz":
            assert np.array_equal(fused.vector(w), a.vector(w))

    def test_concat_widens(self):
        rng = np.random.default_rng(73)
        a = EmbeddingTable(128, {"w": rng.normal(0, 1, 128)}, "visual")
        b = EmbeddingTable(128, {"w": rng.normal(0, 1, 128)}, "textual")
        fused = fuse(a, b, "concat")
        assert fused.dim == 256
        np.testing.assert_array_equal(
            fused.vector("w"), np.concatenate([a.vector("w"), b.vector("w")])
        )

    def test_add_and_mult_commute(self):
        rng = np.random.default_rng(74)
        words = [f"w{i}" for i in range(20)]
        a = EmbeddingTable(6, {w: rng.normal(0, 1, 6) for w in words}, "visual")
        b = EmbeddingTable(6, {w: rng.normal(0, 1, 6) for w in words}, "textual")
        for method in ("add", "mult"):
            ab = fuse(a, b, method)
            ba = fuse(b, a, method)
            for w in words:
                np.testing.assert_allclose(ab.vector(w), ba.vector(w), atol=1e-12)

    def test_add_and_mult_associate_up_to_float_association(self):
        rng = np.random.default_rng(75)
        words = [f"w{i}" for i in range(10)]
        tables = [
            EmbeddingTable(5, {w: rng.normal(0, 1, 5) for w in words}, "visual")
            for _ in range(3)
        ]
        a, b, c = tables
        for method in ("add", "mult"):
            left = fuse(fuse(a, b, method), c, method)
            right = fuse(a, fuse(b, c, method), method)
            for w in words:
                np.testing.assert_allclose(left.vector(w), right.vector(w), atol=1e-12)

    def test_partial_overlap_reported_not_silent(self):
        a = EmbeddingTable(2, {"shared": np.ones(2), "only_a": np.ones(2)}, "visual")
        b = EmbeddingTable(2, {"shared": np.ones(2), "only_b": np.ones(2)}, "textual")
        with pytest.warns(UserWarning, match="only_a"):
            fused = fuse(a, b, "add")
        assert fused.words == ("shared",)

    def test_dim_mismatch_for_elementwise(self):
        a = EmbeddingTable(2, {"w": np.ones(2)}, "visual")
        b = EmbeddingTable(3, {"w": np.ones(3)}, "textual")
        with pytest.raises(DimensionError):
            fuse(a, b, "mult")
        assert fuse(a, b, "concat").dim == 5

    def test_empty_intersection_rejected(self):
        a = EmbeddingTable(2, {"x": np.ones(2)}, "visual")
        b = EmbeddingTable(2, {"y": np.ones(2)}, "textual")
        with pytest.raises(ValidationError):
            fuse(a, b, "add")

    def test_unknown_method_rejected(self):
        a = ones_table("x", 2)
        with pytest.raises(ValidationError):
            fuse(a, a, "divide")


class TestDenotationVector:
    def test_zero_parameter_lexicon_gives_half_everywhere(self):
        lex = Lexicon(3)
        for w in "abc":
            lex.update(w)
        d = denotation_vector(lex, [1.0, -1.0, 0.5])
        np.testing.assert_array_equal(d.probs, [0.5, 0.5, 0.5])
        assert d.words == ("a", "b", "c")

    def test_trained_object_words_dominate(self):
        """A kite-featured object lights up the kite classifier, not the table one."""
        spec = GenerativeSpec(
            groups=(AttributeGroup("object", ("kite", "table")),),
            include_position=True,
            noise_sigma=0.05,
            seed=75,
        )
        dataset = generate(spec, 150, 2, 1, episode_mode="per_object")
        # supervised binary layout: balanced contrast sets give calibrated probs
        from waclex.lexicon import TrainConfig

        lex = build_lexicon(dataset, TrainConfig(neg_ratio=1.0), seed=75)
        rng = np.random.default_rng(76)
        feats = np.zeros(spec.dim)
        feats[spec.feature_index["kite"]] = 1.0
        feats[spec.position_slice] = rng.uniform(-1, 1, 2)
        feats += rng.normal(0, spec.noise_sigma, spec.dim)
        d = denotation_vector(lex, feats)
        by_word = dict(zip(d.words, d.probs))
        assert by_word["kite"] > 0.9 > by_word["table"]

    def test_entries_strictly_inside_unit_interval(self):
        rng = np.random.default_rng(77)
        lex = Lexicon(2)
        for i in range(4):
            lex.update(f"w{i}")
            lex.classifier(f"w{i}").weights[:] = rng.normal(0, 50, 2)
        d = denotation_vector(lex, [100.0, -100.0])
        assert np.all(d.probs > 0.0) and np.all(d.probs < 1.0)

    def test_permutation_consistency(self):
        rng = np.random.default_rng(78)
        lex = Lexicon(2)
        for w in ("a", "b", "c"):
            lex.update(w)
            lex.classifier(w).weights[:] = rng.normal(0, 1, 2)
        x = rng.normal(0, 1, 2)
        before = dict(zip(*[denotation_vector(lex, x).words, denotation_vector(lex, x).probs]))
        lex.reorder_vocab(["c", "a", "b"])
        d = denotation_vector(lex, x)
        assert d.words == ("c", "a", "b")
        for w, p in zip(d.words, d.probs):
            assert p == before[w]

    def test_empty_lexicon_rejected(self):
        with pytest.raises(ValidationError):
            denotation_vector(Lexicon(2), [0.0, 0.0])


class TestAttentionCombine:
    def test_matches_naive_double_loop(self):
        """Oracle: explicit i,j loops over weights and value rows."""
        rng = np.random.default_rng(79)
        for _ in range(25):
            n = int(rng.integers(1, 9))
            dv = int(rng.integers(1, 7))
            probs = rng.uniform(0.01, 0.99, n)
            d = DenotationVector(tuple(f"w{i}" for i in range(n)), probs)
            values = rng.normal(0, 1, (n, dv))
            for normalize in (True, False):
                weights = probs / probs.sum() if normalize else probs
                expected = np.zeros(dv)
                for i in range(n):
                    for j in range(dv):
                        expected[j] += weights[i] * values[i, j]
                got = attention_combine(d, values, normalize=normalize)
                np.testing.assert_allclose(got, expected, atol=1e-12)

    def test_one_hot_limit_selects_row(self):
        probs = np.array([1 - 1e-9, 1e-12, 1e-12, 1e-12])
        d = DenotationVector(("a", "b", "c", "d"), probs)
        values = np.arange(20.0).reshape(4, 5)
        np.testing.assert_allclose(attention_combine(d, values), values[0], atol=1e-6)

    def test_uniform_gives_row_mean(self):
        d = DenotationVector(("a", "b"), np.array([0.37, 0.37]))
        values = np.array([[2.0, 4.0], [6.0, 8.0]])
        np.testing.assert_allclose(attention_combine(d, values), [4.0, 6.0], atol=1e-12)

    def test_normalized_combination_is_scale_invariant(self):
        rng = np.random.default_rng(80)
        probs = rng.uniform(0.2, 0.8, 5)
        values = rng.normal(0, 1, (5, 3))
        a = attention_combine(DenotationVector(tuple("abcde"), probs), values)
        b = attention_combine(DenotationVector(tuple("abcde"), probs / 4), values)
        np.testing.assert_allclose(a, b, atol=1e-12)

    def test_row_count_mismatch_rejected(self):
        d = DenotationVector(("a", "b"), np.array([0.5, 0.5]))
        with pytest.raises(DimensionError):
            attention_combine(d, np.ones((3, 2)))
