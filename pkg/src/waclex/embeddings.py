"""Word embedding tables: classifier-coefficient vectors, a distributional
builder, fusion operators, and the denotation-vector attention combination.

A trained lexicon exports one visual vector per word (its classifier
weights). A small PPMI-plus-random-projection builder supplies the textual
side without any external language model. Tables fuse by addition,
concatenation, or elementwise multiplication over the vocabulary
intersection. Separately, the vocabulary-length vector of all classifiers'
fit probabilities for one object ("denotation vector") combines with a
values matrix as an attention-style weighted sum.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import DimensionError, ValidationError
from .lexicon import Lexicon, validate_feature_vector

MODALITIES = ("visual", "textual", "fused")


@dataclass(frozen=True)
class EmbeddingTable:
    """Immutable vocabulary-indexed vectors of one shared width.

    ``bias_excluded`` records that coefficient exports drop the classifier
    bias (kept in the file header so downstream users know).
    """

    dim: int
    vectors: Mapping[str, np.ndarray]
    modality: str
    bias_excluded: bool = False

    def __post_init__(self):
        if self.modality not in MODALITIES:
            raise ValidationError(f"modality must be one of {MODALITIES}, got {self.modality!r}")
        if int(self.dim) < 1:
            raise DimensionError("embedding dimension must be >= 1")
        fixed = {}
        for word, vec in self.vectors.items():
            arr = validate_feature_vector(vec, int(self.dim))
            fixed[str(word)] = arr
        object.__setattr__(self, "vectors", fixed)
        object.__setattr__(self, "dim", int(self.dim))

    def __len__(self) -> int:
        return len(self.vectors)

    def __contains__(self, word: str) -> bool:
        return word in self.vectors

    @property
    def words(self) -> tuple[str, ...]:
        return tuple(self.vectors.keys())

    def vector(self, word: str) -> np.ndarray:
        return self.vectors[word]


def export_visual_embeddings(lexicon: Lexicon) -> EmbeddingTable:
    """One vector per word: the classifier's weight coefficients, bias excluded."""
    if len(lexicon) == 0:
        raise ValidationError("cannot export embeddings from an empty lexicon")
    vectors = {w: lexicon.classifier(w).weights.copy() for w in lexicon.vocab_order}
    return EmbeddingTable(lexicon.dim, vectors, "visual", bias_excluded=True)


def cooccurrence_counts(
    corpus: Sequence[Sequence[str]], window: int
) -> tuple[tuple[str, ...], np.ndarray]:
    """Symmetric within-window co-occurrence counts over a tokenized corpus."""
    if window < 1:
        raise ValidationError("window must be >= 1")
    if not corpus:
        raise ValidationError("corpus is empty")
    vocab = tuple(sorted({t for sent in corpus for t in sent}))
    if not vocab:
        raise ValidationError("corpus has no tokens")
    index = {w: i for i, w in enumerate(vocab)}
    counts = np.zeros((len(vocab), len(vocab)))
    for sent in corpus:
        for i, w in enumerate(sent):
            lo = max(0, i - window)
            hi = min(len(sent), i + window + 1)
            for j in range(lo, hi):
                if j != i:
                    counts[index[w], index[sent[j]]] += 1.0
    return vocab, counts


def ppmi(counts: np.ndarray) -> np.ndarray:
    """Positive pointwise mutual information of a co-occurrence matrix."""
    total = counts.sum()
    if total == 0:
        return np.zeros_like(counts)
    row = counts.sum(axis=1, keepdims=True)
    col = counts.sum(axis=0, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        pmi = np.log(counts * total / (row * col))
    pmi[~np.isfinite(pmi)] = 0.0
    pmi[pmi < 0] = 0.0
    return pmi


def build_text_embeddings(
    corpus: Sequence[Sequence[str]], window: int, dim: int, seed: int
) -> EmbeddingTable:
    """Distributional vectors: windowed PPMI rows under a seeded random projection.

    Words with identical contexts get identical PPMI rows and therefore
    identical projected vectors; unseen words are simply absent. Deterministic
    for a fixed seed.
    """
    if dim < 1:
        raise DimensionError("embedding dimension must be >= 1")
    vocab, counts = cooccurrence_counts(corpus, window)
    matrix = ppmi(counts)
    rng = np.random.default_rng(seed)
    projection = rng.standard_normal((len(vocab), dim)) / np.sqrt(dim)
    projected = matrix @ projection
    return EmbeddingTable(dim, {w: projected[i] for i, w in enumerate(vocab)}, "textual")


FUSE_METHODS = ("add", "concat", "mult")


def fuse(a: EmbeddingTable, b: EmbeddingTable, method: str) -> EmbeddingTable:
    """Combine two tables over their shared vocabulary.

    "add" and "mult" are elementwise and require equal dims; "concat" joins
    the vectors into width dim_a + dim_b. Words outside the intersection are
    excluded from the result and reported via a UserWarning (never silently
    dropped).
    """
    if method not in FUSE_METHODS:
        raise ValidationError(f"method must be one of {FUSE_METHODS}, got {method!r}")
    if method in ("add", "mult") and a.dim != b.dim:
        raise DimensionError(f"{method} requires equal dims, got {a.dim} and {b.dim}")
    shared = [w for w in a.words if w in b]
    if not shared:
        raise ValidationError("embedding tables share no vocabulary")
    excluded = sorted(set(a.words).symmetric_difference(b.words))
    if excluded:
        warnings.warn(
            f"fuse({method}): {len(excluded)} word(s) outside the shared vocabulary "
            f"excluded: {', '.join(excluded[:10])}{'...' if len(excluded) > 10 else ''}",
            UserWarning,
            stacklevel=2,
        )
    if method == "add":
        vectors = {w: a.vector(w) + b.vector(w) for w in shared}
        out_dim = a.dim
    elif method == "mult":
        vectors = {w: a.vector(w) * b.vector(w) for w in shared}
        out_dim = a.dim
    else:
        vectors = {w: np.concatenate([a.vector(w), b.vector(w)]) for w in shared}
        out_dim = a.dim + b.dim
    return EmbeddingTable(out_dim, vectors, "fused")


@dataclass(frozen=True)
class DenotationVector:
    """All classifiers' fit probabilities for one object, in vocab order."""

    words: tuple[str, ...]
    probs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "words", tuple(self.words))
        p = np.asarray(self.probs, dtype=np.float64)
        object.__setattr__(self, "probs", p)
        if p.shape != (len(self.words),):
            raise DimensionError("denotation vector length must equal vocabulary size")
        if np.any(p <= 0.0) or np.any(p >= 1.0):
            raise ValidationError("denotation probabilities must lie strictly in (0, 1)")


def denotation_vector(lexicon: Lexicon, x) -> DenotationVector:
    """Pass one object's features through every classifier in vocab order."""
    if len(lexicon) == 0:
        raise ValidationError("denotation vector of an empty lexicon is undefined")
    xv = validate_feature_vector(x, lexicon.dim)
    probs = np.array([lexicon.apply(w, xv) for w in lexicon.vocab_order])
    return DenotationVector(lexicon.vocab_order, probs)


def attention_combine(d: DenotationVector, values, normalize: bool = True) -> np.ndarray:
    """Weighted sum of value rows under denotation weights.

    With ``normalize`` (default) the probabilities are scaled to sum to one,
    making the output invariant to positive rescaling of the denotation
    entries; otherwise raw probabilities weight the rows directly.
    """
    rows = np.asarray(values, dtype=np.float64)
    if rows.ndim != 2:
        raise DimensionError(f"values matrix must be 2-D, got shape {rows.shape}")
    if rows.shape[0] != len(d.words):
        raise DimensionError(
            f"values matrix has {rows.shape[0]} rows, expected {len(d.words)}"
        )
    if not np.all(np.isfinite(rows)):
        raise ValidationError("values matrix contains non-finite entries")
    weights = d.probs / d.probs.sum() if normalize else d.probs
    return weights @ rows
