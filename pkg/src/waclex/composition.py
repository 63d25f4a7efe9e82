"""Phrase-level semantics: composing word fit probabilities over candidate objects.

A phrase's score for an object is the product of each token's fit
probability, accumulated in log space. Scores over a scene normalize into a
referent distribution; resolution can run batch or token-at-a-time, and the
two are bit-identical because the batch path feeds the same state machine.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DimensionError, ValidationError
from .lexicon import Lexicon, validate_feature_vector

LOG_HALF = math.log(0.5)


@dataclass(frozen=True)
class SceneObject:
    """One candidate object: an id, its feature vector, and optional renderable attributes."""

    object_id: str
    features: np.ndarray
    attributes: Mapping[str, object] | None = None

    def __post_init__(self):
        object.__setattr__(self, "features", validate_feature_vector(self.features))


@dataclass(frozen=True)
class Scene:
    """A non-empty ordered set of candidate objects with unique ids and equal feature dims."""

    scene_id: str
    objects: tuple[SceneObject, ...]

    def __post_init__(self):
        object.__setattr__(self, "objects", tuple(self.objects))
        if not self.objects:
            raise ValidationError(f"scene {self.scene_id!r} has no objects")
        ids = [o.object_id for o in self.objects]
        if len(set(ids)) != len(ids):
            raise ValidationError(f"scene {self.scene_id!r} has duplicate object ids")
        dims = {o.features.shape[0] for o in self.objects}
        if len(dims) != 1:
            raise DimensionError(f"scene {self.scene_id!r} mixes feature dimensions {sorted(dims)}")

    @property
    def dim(self) -> int:
        return int(self.objects[0].features.shape[0])

    @cached_property
    def _by_id(self) -> dict[str, SceneObject]:
        return {o.object_id: o for o in self.objects}

    def __contains__(self, object_id: str) -> bool:
        return object_id in self._by_id

    def object(self, object_id: str) -> SceneObject:
        return self._by_id[object_id]

    def index_of(self, object_id: str) -> int:
        for i, o in enumerate(self.objects):
            if o.object_id == object_id:
                return i
        raise KeyError(object_id)


@dataclass(frozen=True)
class Episode:
    """One resolution task: tokens, the scene they refer into, and the gold referent."""

    tokens: tuple[str, ...]
    scene: Scene
    gold_object_id: str

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))


@dataclass(frozen=True)
class ReferentDistribution:
    """Normalized probabilities over a scene's objects, in scene order."""

    entries: tuple[tuple[str, float], ...]

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple((str(i), float(p)) for i, p in self.entries))
        probs = self.probabilities
        if np.any(probs < 0):
            raise ValidationError("referent probabilities must be non-negative")
        if abs(float(probs.sum()) - 1.0) > 1e-9:
            raise ValidationError(f"referent probabilities sum to {probs.sum()!r}, expected 1")

    @property
    def object_ids(self) -> tuple[str, ...]:
        return tuple(i for i, _ in self.entries)

    @property
    def probabilities(self) -> np.ndarray:
        return np.array([p for _, p in self.entries])

    def prob_of(self, object_id: str) -> float:
        for i, p in self.entries:
            if i == object_id:
                return p
        raise KeyError(object_id)

    def argmax_id(self) -> str:
        # ties broken by scene order: first maximum wins
        best_i, best_p = 0, self.entries[0][1]
        for j, (_, p) in enumerate(self.entries):
            if p > best_p:
                best_i, best_p = j, p
        return self.entries[best_i][0]

    def rank_of(self, object_id: str) -> int:
        """1-based rank of an object, ties broken by scene order."""
        target = self.index_of(object_id)
        target_p = self.entries[target][1]
        rank = 1
        for j, (_, p) in enumerate(self.entries):
            if p > target_p or (p == target_p and j < target):
                rank += 1
        return rank

    def index_of(self, object_id: str) -> int:
        for j, (i, _) in enumerate(self.entries):
            if i == object_id:
                return j
        raise KeyError(object_id)


class ResolutionState:
    """Token-at-a-time resolution over one scene.

    Per-object log scores accumulate only factors that differ across objects;
    factors constant over the scene (unknown-token 0.5) are tracked in
    ``neutral_log`` so they cancel exactly in the distribution while still
    entering raw scores.
    """

    def __init__(self, scene: Scene):
        self.scene = scene
        self.log_scores = np.zeros(len(scene.objects))
        self.neutral_log = 0.0
        self.tokens_consumed = 0

    def feed(self, lexicon: Lexicon, token: str) -> "ResolutionState":
        """Consume one token, multiplying every object's score by its fit probability."""
        if self.scene.dim != lexicon.dim:
            raise DimensionError(
                f"scene dimension {self.scene.dim} != lexicon dimension {lexicon.dim}"
            )
        if token in lexicon:
            clf = lexicon.classifier(token)
            eps = lexicon.config.prob_clamp_eps
            for i, obj in enumerate(self.scene.objects):
                self.log_scores[i] += math.log(clf.apply(obj.features, eps))
        else:
            self.neutral_log += LOG_HALF
        self.tokens_consumed += 1
        return self

    def raw_scores(self) -> np.ndarray:
        """Unnormalized per-object phrase scores (products of fit probabilities)."""
        return np.exp(self.log_scores + self.neutral_log)

    def distribution(self) -> ReferentDistribution:
        probs = _normalize_log_scores(self.log_scores)
        ids = [o.object_id for o in self.scene.objects]
        return ReferentDistribution(tuple(zip(ids, probs)))


def _normalize_log_scores(log_scores: np.ndarray) -> np.ndarray:
    m = float(np.max(log_scores))
    if not math.isfinite(m):
        return np.full(log_scores.shape[0], 1.0 / log_scores.shape[0])
    w = np.exp(log_scores - m)
    total = float(w.sum())
    if total <= 0.0 or not math.isfinite(total):
        return np.full(log_scores.shape[0], 1.0 / log_scores.shape[0])
    return w / total


def score_phrase(lexicon: Lexicon, tokens: Sequence[str], x) -> float:
    """Product of per-token fit probabilities on one object, in log space.

    Unknown tokens contribute a neutral 0.5 factor; an empty phrase scores 1.
    """
    xv = validate_feature_vector(x, lexicon.dim)
    eps = lexicon.config.prob_clamp_eps
    total = 0.0
    for token in tokens:
        if token in lexicon:
            total += math.log(lexicon.classifier(token).apply(xv, eps))
        else:
            total += LOG_HALF
    return math.exp(total)


def resolve(lexicon: Lexicon, tokens: Sequence[str], scene: Scene) -> ReferentDistribution:
    """Score a phrase against every object in the scene and normalize.

    Equivalent to feeding the tokens one at a time; the incremental and batch
    paths share the same accumulation code and are bit-identical.
    """
    state = ResolutionState(scene)
    for token in tokens:
        state.feed(lexicon, token)
    return state.distribution()


@dataclass(frozen=True)
class EvalMetrics:
    accuracy_at_1: float
    mrr: float
    mean_gold_rank: float
    n_episodes: int

    def as_dict(self) -> dict:
        return {
            "accuracy_at_1": self.accuracy_at_1,
            "mrr": self.mrr,
            "mean_gold_rank": self.mean_gold_rank,
            "n_episodes": self.n_episodes,
        }


def evaluate(lexicon: Lexicon, episodes: Iterable[Episode]) -> EvalMetrics:
    """Reference-resolution metrics over a batch of episodes.

    accuracy_at_1 counts episodes whose argmax (ties to scene order) is the
    gold object; mrr averages 1/rank of the gold referent.

    Raises:
        ValidationError: An episode's gold id is missing from its scene; the
            message names the episode.
    """
    correct = 0
    rr_total = 0.0
    rank_total = 0.0
    n = 0
    for idx, ep in enumerate(episodes):
        if ep.gold_object_id not in ep.scene:
            raise ValidationError(
                f"episode {idx} (scene {ep.scene.scene_id!r}): "
                f"gold object {ep.gold_object_id!r} not in scene"
            )
        dist = resolve(lexicon, ep.tokens, ep.scene)
        rank = dist.rank_of(ep.gold_object_id)
        if rank == 1:
            correct += 1
        rr_total += 1.0 / rank
        rank_total += rank
        n += 1
    if n == 0:
        raise ValidationError("evaluate requires at least one episode")
    return EvalMetrics(correct / n, rr_total / n, rank_total / n, n)
