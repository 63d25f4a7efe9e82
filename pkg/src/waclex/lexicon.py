"""Per-word probabilistic classifiers and the lexicon that owns them.

Every vocabulary word carries an independent binary logistic-regression
classifier over object feature vectors. Applying a classifier to an object
yields the word's fit probability for that object, and the classifier's
weight vector doubles as the word's visual embedding. Training minimizes a
regularized cross-entropy by deterministic full-batch gradient descent, so
identical inputs and configuration always produce bit-identical parameters.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Deque, Iterable, Sequence

import numpy as np

from .errors import DimensionError, ValidationError


def validate_feature_vector(values, dim: int | None = None) -> np.ndarray:
    """Coerce one feature vector to a finite 1-D float64 array.

    Args:
        values: Anything array-like holding the feature activations.
        dim: Required length, or None to accept any length.

    Raises:
        DimensionError: Not 1-D, or length differs from ``dim``.
        ValidationError: NaN or infinite entries.
    """
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise DimensionError(f"feature vector must be 1-D, got shape {arr.shape}")
    if dim is not None and arr.shape[0] != dim:
        raise DimensionError(f"feature vector has length {arr.shape[0]}, expected {dim}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError("feature vector contains NaN or infinite entries")
    return arr


def sigmoid(z):
    """Overflow-safe logistic function; scalar in, float out; array in, array out.

    Uses the two-branch form so exp() is only ever evaluated on non-positive
    arguments; safe for |z| well beyond 1e4.
    """
    z = np.asarray(z, dtype=np.float64)
    if z.ndim == 0:
        zf = float(z)
        if zf >= 0.0:
            return 1.0 / (1.0 + math.exp(-zf))
        e = math.exp(zf)
        return e / (1.0 + e)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters shared by every classifier in one lexicon.

    ``neg_ratio`` is the negative:positive sampling ratio used when drawing
    counter-examples for a word (default 3, i.e. 300 negatives for 100
    positives). ``tol`` is an absolute loss-delta convergence threshold and
    ``cache_cap`` bounds each word's stored examples per polarity.
    """

    learning_rate: float = 0.1
    l2_lambda: float = 0.01
    max_epochs: int = 500
    tol: float = 1e-6
    neg_ratio: float = 3.0
    cache_cap: int = 1000
    prob_clamp_eps: float = 1e-12

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValidationError("learning_rate must be > 0")
        if self.l2_lambda < 0:
            raise ValidationError("l2_lambda must be >= 0")
        if self.max_epochs < 1:
            raise ValidationError("max_epochs must be >= 1")
        if self.tol <= 0:
            raise ValidationError("tol must be > 0")
        if self.neg_ratio <= 0:
            raise ValidationError("neg_ratio must be > 0")
        if self.cache_cap < 1:
            raise ValidationError("cache_cap must be >= 1")
        if not 0.0 < self.prob_clamp_eps < 0.5:
            raise ValidationError("prob_clamp_eps must be in (0, 0.5)")


@dataclass
class WordClassifier:
    """Weights, bias, and training counters for one vocabulary word.

    ``n_pos``/``n_neg`` count the examples used in the most recent fit;
    ``update_count`` increments once per train or update call.
    ``loss_trace`` records the loss at each accepted step of the most recent
    fit (diagnostics only, not persisted).
    """

    word: str
    weights: np.ndarray
    bias: float
    n_pos: int = 0
    n_neg: int = 0
    update_count: int = 0
    loss_trace: tuple = ()

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        if self.weights.ndim != 1:
            raise DimensionError("classifier weights must be 1-D")
        if not np.all(np.isfinite(self.weights)) or not math.isfinite(self.bias):
            raise ValidationError(f"classifier for {self.word!r} has non-finite parameters")
        if self.n_pos < 0 or self.n_neg < 0 or self.update_count < 0:
            raise ValidationError("classifier counters must be non-negative")

    @property
    def dim(self) -> int:
        return int(self.weights.shape[0])

    def apply(self, x, clamp_eps: float = 1e-12) -> float:
        """Fit probability of an object: sigmoid(weights . x + bias).

        The result is clamped into [clamp_eps, 1 - clamp_eps] so it stays in
        the open interval (0, 1) even for saturating activations.
        """
        xv = validate_feature_vector(x, self.dim)
        p = sigmoid(float(self.weights @ xv) + self.bias)
        return min(max(p, clamp_eps), 1.0 - clamp_eps)


def loss_and_grad(
    weights: np.ndarray,
    bias: float,
    features,
    labels,
    l2_lambda: float,
    clamp_eps: float = 1e-12,
) -> tuple[float, np.ndarray]:
    """Regularized mean cross-entropy and its analytic gradient.

    The objective is mean BCE over the examples plus (l2_lambda/2)*||w||^2;
    the bias is unregularized. Probabilities are clamped to
    [clamp_eps, 1-clamp_eps] inside the logarithms only; the gradient is the
    exact derivative of the unclamped objective, which coincides with finite
    differences wherever the clamp is inactive.

    Args:
        weights: Current weight vector, shape (D,).
        bias: Current bias.
        features: Example matrix, shape (N, D), N >= 1.
        labels: Binary labels in {0, 1}, shape (N,).
        l2_lambda: Ridge strength on the weights.
        clamp_eps: Probability clamp for the log terms.

    Returns:
        (loss, grad) where grad has D weight components followed by the bias
        component.
    """
    X = np.atleast_2d(np.asarray(features, dtype=np.float64))
    y = np.asarray(labels, dtype=np.float64)
    n = X.shape[0]
    if n == 0 or y.shape[0] == 0:
        raise ValidationError("loss_and_grad requires at least one labeled example")
    if y.shape != (n,):
        raise DimensionError(f"labels have shape {y.shape}, expected ({n},)")
    if not np.all((y == 0.0) | (y == 1.0)):
        raise ValidationError("labels must be 0 or 1")
    w = np.asarray(weights, dtype=np.float64)
    if X.shape[1] != w.shape[0]:
        raise DimensionError(f"features have width {X.shape[1]}, weights have {w.shape[0]}")

    z = X @ w + bias
    p = sigmoid(z)
    pc = np.clip(p, clamp_eps, 1.0 - clamp_eps)
    loss = float(-np.mean(y * np.log(pc) + (1.0 - y) * np.log(1.0 - pc)))
    loss += 0.5 * l2_lambda * float(w @ w)

    resid = (p - y) / n
    grad_w = X.T @ resid + l2_lambda * w
    grad_b = float(resid.sum())
    return loss, np.concatenate([grad_w, [grad_b]])


def _fit(
    weights: np.ndarray,
    bias: float,
    X: np.ndarray,
    y: np.ndarray,
    config: TrainConfig,
) -> tuple[np.ndarray, float, tuple]:
    """Full-batch gradient descent from the given parameters.

    A candidate step is rejected (and descent stops) when it changes the loss
    by less than ``config.tol``, so refitting already-converged parameters on
    unchanged data is a no-op.
    """
    dim = weights.shape[0]
    lr = config.learning_rate
    loss, grad = loss_and_grad(weights, bias, X, y, config.l2_lambda, config.prob_clamp_eps)
    trace = [loss]
    for _ in range(config.max_epochs):
        cand_w = weights - lr * grad[:dim]
        cand_b = bias - lr * grad[dim]
        cand_loss, cand_grad = loss_and_grad(
            cand_w, cand_b, X, y, config.l2_lambda, config.prob_clamp_eps
        )
        if abs(loss - cand_loss) < config.tol:
            break
        weights, bias, loss, grad = cand_w, cand_b, cand_loss, cand_grad
        trace.append(loss)
    return weights, bias, tuple(trace)


class Lexicon:
    """Vocabulary-indexed collection of word classifiers sharing one feature dimension.

    Also keeps a capped FIFO cache of each word's positive/negative examples
    so that later updates can warm-start over everything seen so far.
    Reads (apply, resolve) are safe to run concurrently; mutation follows a
    single-writer contract and training of distinct words is independent.
    """

    def __init__(self, dim: int, config: TrainConfig | None = None):
        dim = int(dim)
        if dim < 1:
            raise DimensionError(f"feature dimension must be >= 1, got {dim}")
        self.dim = dim
        self.config = config if config is not None else TrainConfig()
        self._entries: dict[str, WordClassifier] = {}
        self._vocab_order: list[str] = []
        self._pos_cache: dict[str, Deque[np.ndarray]] = {}
        self._neg_cache: dict[str, Deque[np.ndarray]] = {}

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, word: str) -> bool:
        return word in self._entries

    @property
    def vocab_order(self) -> tuple[str, ...]:
        return tuple(self._vocab_order)

    @property
    def words(self) -> tuple[str, ...]:
        return tuple(self._vocab_order)

    def classifier(self, word: str) -> WordClassifier:
        return self._entries[word]

    def apply(self, word: str, x) -> float:
        """Fit probability of the word's classifier on one feature vector."""
        return self._entries[word].apply(x, self.config.prob_clamp_eps)

    def reorder_vocab(self, new_order: Sequence[str]) -> None:
        """Replace vocab_order with a permutation of the current vocabulary."""
        if sorted(new_order) != sorted(self._vocab_order):
            raise ValidationError("new vocab order must be a permutation of the vocabulary")
        self._vocab_order = list(new_order)

    def cache_sizes(self, word: str) -> tuple[int, int]:
        """(cached positives, cached negatives) for a word; (0, 0) if unseen."""
        return (len(self._pos_cache.get(word, ())), len(self._neg_cache.get(word, ())))

    def _as_matrix(self, vectors: Iterable) -> np.ndarray:
        rows = [validate_feature_vector(v, self.dim) for v in vectors]
        if not rows:
            return np.empty((0, self.dim))
        return np.stack(rows)

    def _ensure_caches(self, word: str) -> tuple[Deque[np.ndarray], Deque[np.ndarray]]:
        if word not in self._pos_cache:
            cap = self.config.cache_cap
            self._pos_cache[word] = deque(maxlen=cap)
            self._neg_cache[word] = deque(maxlen=cap)
        return self._pos_cache[word], self._neg_cache[word]

    def _install(self, word: str, clf: WordClassifier) -> None:
        if word not in self._entries:
            self._vocab_order.append(word)
        self._entries[word] = clf

    def train(self, word: str, pos: Iterable, neg: Iterable = ()) -> WordClassifier:
        """Fit the word's classifier from zero initialization.

        Trains on exactly the given positives/negatives and appends them to
        the word's example cache (FIFO eviction at the cap). Deterministic:
        same examples and config give bit-identical parameters.

        Raises:
            ValidationError: Empty positive set.
            DimensionError: Any example of the wrong length.
        """
        P = self._as_matrix(pos)
        N = self._as_matrix(neg)
        if P.shape[0] == 0:
            raise ValidationError(f"training {word!r} requires at least one positive example")
        X = np.vstack([P, N]) if N.shape[0] else P
        y = np.concatenate([np.ones(P.shape[0]), np.zeros(N.shape[0])])
        w, b, trace = _fit(np.zeros(self.dim), 0.0, X, y, self.config)
        prev = self._entries.get(word)
        clf = WordClassifier(
            word=word,
            weights=w,
            bias=b,
            n_pos=P.shape[0],
            n_neg=N.shape[0],
            update_count=(prev.update_count + 1) if prev else 1,
            loss_trace=trace,
        )
        self._install(word, clf)
        pos_cache, neg_cache = self._ensure_caches(word)
        pos_cache.extend(P)
        neg_cache.extend(N)
        return clf

    def update(self, word: str, new_pos: Iterable = (), new_neg: Iterable = ()) -> WordClassifier:
        """Fast-mapping update: append examples, continue descent over the full cache.

        The word may be novel, in which case this is equivalent to training
        from zero on the seeded cache. Descent warm-starts from the current
        parameters; with no new information and a converged loss the
        parameters are left untouched. ``update_count`` always increments.
        """
        P = self._as_matrix(new_pos)
        N = self._as_matrix(new_neg)
        pos_cache, neg_cache = self._ensure_caches(word)
        pos_cache.extend(P)
        neg_cache.extend(N)

        prev = self._entries.get(word)
        if prev is None:
            w0, b0 = np.zeros(self.dim), 0.0
            count = 1
        else:
            w0, b0 = prev.weights.copy(), prev.bias
            count = prev.update_count + 1

        n_pos, n_neg = len(pos_cache), len(neg_cache)
        if n_pos + n_neg == 0:
            clf = WordClassifier(word, w0, b0, 0, 0, count, loss_trace=())
        else:
            X = np.vstack([np.stack(list(pos_cache)) if n_pos else np.empty((0, self.dim)),
                           np.stack(list(neg_cache)) if n_neg else np.empty((0, self.dim))])
            y = np.concatenate([np.ones(n_pos), np.zeros(n_neg)])
            w, b, trace = _fit(w0, b0, X, y, self.config)
            clf = WordClassifier(word, w, b, n_pos, n_neg, count, loss_trace=trace)
        self._install(word, clf)
        return clf
