"""Synthetic grounded-language data with known ground truth.

Objects are feature vectors built from disjoint one-hot attribute blocks
(colors, shapes, ...) plus an optional continuous screen-position block, with
Gaussian jitter applied to the final vector. Because the generative map is
known, every dataset comes with an analytic oracle: expression tokens are true
attributes of their gold object by construction.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .composition import Episode, Scene, SceneObject
from .errors import DimensionError, ValidationError
from .lexicon import Lexicon, TrainConfig

COLOR_WORDS = ("red", "green", "blue", "yellow", "orange", "purple", "brown", "gray")
SHAPE_WORDS = ("square", "circle", "triangle", "star", "diamond", "cross")


@dataclass(frozen=True)
class AttributeGroup:
    """One categorical attribute: a group name and its value tokens (one-hot block)."""

    name: str
    values: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))
        if not self.values:
            raise ValidationError(f"attribute group {self.name!r} has no values")


@dataclass(frozen=True)
class GenerativeSpec:
    """The generative feature map: attribute blocks, position block, jitter, seed.

    Feature layout is the groups' one-hot blocks in order, then (screen-x,
    screen-y) in [-1, 1] when ``include_position``. Noise is added to the
    final vector; position coordinates are re-clipped so the noised value is
    the object's actual (renderable) position, keeping side words exact.
    """

    groups: tuple[AttributeGroup, ...] = ()
    include_position: bool = True
    position_words: bool = False
    noise_sigma: float = 0.05
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "groups", tuple(self.groups))
        if not (0.0 <= self.noise_sigma < 0.5):
            raise ValidationError("noise_sigma must be in [0, 0.5) to keep classes separable")
        if self.position_words and not self.include_position:
            raise ValidationError("position_words requires include_position")
        tokens = [v for g in self.groups for v in g.values]
        if len(set(tokens)) != len(tokens):
            raise ValidationError("attribute value tokens must be unique across groups")
        if self.dim < 1:
            raise DimensionError("spec has zero feature width: add groups or a position block")

    @property
    def dim(self) -> int:
        return sum(len(g.values) for g in self.groups) + (2 if self.include_position else 0)

    @cached_property
    def feature_index(self) -> dict[str, int]:
        """Map from attribute value token to its one-hot feature index."""
        index: dict[str, int] = {}
        offset = 0
        for g in self.groups:
            for v in g.values:
                index[v] = offset
                offset += 1
        return index

    @property
    def position_slice(self) -> slice:
        if not self.include_position:
            raise ValidationError("spec has no position block")
        return slice(self.dim - 2, self.dim)


def left_right_spec(noise_sigma: float = 0.05, seed: int = 0) -> GenerativeSpec:
    """Points on a screen described only as 'left' or 'right' (D=2, pure position)."""
    return GenerativeSpec(
        groups=(),
        include_position=True,
        position_words=True,
        noise_sigma=noise_sigma,
        seed=seed,
    )


def color_shape_spec(noise_sigma: float = 0.05, seed: int = 0) -> GenerativeSpec:
    """Default scene spec: 8 colors x 6 shapes as one-hot blocks plus position (D=16)."""
    return GenerativeSpec(
        groups=(AttributeGroup("color", COLOR_WORDS), AttributeGroup("shape", SHAPE_WORDS)),
        include_position=True,
        position_words=False,
        noise_sigma=noise_sigma,
        seed=seed,
    )


@dataclass(frozen=True)
class EpisodeRecord:
    """Dataset-level episode: tokens plus references into the scene table."""

    tokens: tuple[str, ...]
    scene_id: str
    gold_object_id: str

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))


@dataclass(frozen=True)
class Dataset:
    """Scenes plus episodes with referential integrity and a derived vocabulary."""

    scenes: tuple[Scene, ...]
    episodes: tuple[EpisodeRecord, ...]
    vocab: frozenset[str] = field(default=frozenset())

    def __post_init__(self):
        object.__setattr__(self, "scenes", tuple(self.scenes))
        object.__setattr__(self, "episodes", tuple(self.episodes))
        derived = frozenset(t for ep in self.episodes for t in ep.tokens)
        object.__setattr__(self, "vocab", derived)
        by_id = {s.scene_id: s for s in self.scenes}
        if len(by_id) != len(self.scenes):
            raise ValidationError("duplicate scene ids in dataset")
        for idx, ep in enumerate(self.episodes):
            scene = by_id.get(ep.scene_id)
            if scene is None:
                raise ValidationError(f"episode {idx} references missing scene {ep.scene_id!r}")
            if ep.gold_object_id not in scene:
                raise ValidationError(
                    f"episode {idx}: gold object {ep.gold_object_id!r} "
                    f"not in scene {ep.scene_id!r}"
                )

    @cached_property
    def _scene_by_id(self) -> dict[str, Scene]:
        return {s.scene_id: s for s in self.scenes}

    @property
    def dim(self) -> int:
        return self.scenes[0].dim

    def scene(self, scene_id: str) -> Scene:
        return self._scene_by_id[scene_id]

    def resolved_episodes(self) -> list[Episode]:
        """Episodes with their scenes attached, ready for evaluation."""
        return [
            Episode(ep.tokens, self.scene(ep.scene_id), ep.gold_object_id)
            for ep in self.episodes
        ]


def object_tokens(spec: GenerativeSpec, obj: SceneObject) -> tuple[str, ...]:
    """All attribute tokens that truly apply to an object under the spec."""
    attrs = obj.attributes or {}
    tokens = [str(attrs[g.name]) for g in spec.groups]
    if spec.position_words:
        tokens.append("left" if float(attrs["x"]) < 0 else "right")
    return tuple(tokens)


def _generate_object(
    spec: GenerativeSpec, rng: np.random.Generator, object_id: str
) -> SceneObject:
    attrs: dict[str, object] = {}
    features = np.zeros(spec.dim)
    for g in spec.groups:
        value = g.values[int(rng.integers(len(g.values)))]
        attrs[g.name] = value
        features[spec.feature_index[value]] = 1.0
    if spec.include_position:
        features[spec.position_slice] = rng.uniform(-1.0, 1.0, 2)
    if spec.noise_sigma > 0:
        features = features + rng.normal(0.0, spec.noise_sigma, spec.dim)
    if spec.include_position:
        pos = np.clip(features[spec.position_slice], -1.0, 1.0)
        features[spec.position_slice] = pos
        attrs["x"] = float(pos[0])
        attrs["y"] = float(pos[1])
    return SceneObject(object_id=object_id, features=features, attributes=attrs)


def generate_scene(
    spec: GenerativeSpec,
    objects_per_scene: int,
    rng: np.random.Generator,
    scene_id: str,
) -> Scene:
    objects = tuple(
        _generate_object(spec, rng, f"{scene_id}-o{i}") for i in range(objects_per_scene)
    )
    return Scene(scene_id=scene_id, objects=objects)


def scene_at(
    spec: GenerativeSpec, objects_per_scene: int, seed: int, index: int
) -> Scene:
    """Random-access deterministic scene stream: scene ``index`` under ``seed``."""
    rng = np.random.default_rng([seed, index])
    return generate_scene(spec, objects_per_scene, rng, f"s{index:05d}")


def make_expression(
    spec: GenerativeSpec, scene: Scene, gold_index: int, tokens_per_expression: int
) -> tuple[str, ...]:
    """True-attribute expression for the gold object, preferring discriminating tokens.

    Candidate tokens are ranked by how few other scene objects share them
    (ties broken by attribute order), then the chosen tokens are emitted in
    attribute order, e.g. color before shape.
    """
    gold = scene.objects[gold_index]
    gold_tokens = object_tokens(spec, gold)
    others = [o for i, o in enumerate(scene.objects) if i != gold_index]
    ranked = sorted(
        range(len(gold_tokens)),
        key=lambda k: (
            sum(1 for o in others if object_tokens(spec, o)[k] == gold_tokens[k]),
            k,
        ),
    )
    chosen = sorted(ranked[: max(1, min(tokens_per_expression, len(gold_tokens)))])
    return tuple(gold_tokens[k] for k in chosen)


def generate(
    spec: GenerativeSpec,
    n_scenes: int,
    objects_per_scene: int,
    tokens_per_expression: int,
    episode_mode: str = "per_scene",
) -> Dataset:
    """Generate scenes and referring-expression episodes with known gold referents.

    ``episode_mode`` is "per_scene" (one episode per scene, gold drawn
    uniformly over the objects) or "per_object" (every object is the gold of
    its own episode — the supervised layout of the left/right point task).
    Deterministic for a fixed ``spec.seed``: scene i draws from an rng keyed
    by (seed, i), so datasets are reproducible and randomly addressable.
    """
    if objects_per_scene < 2:
        raise ValidationError("objects_per_scene must be >= 2")
    if n_scenes < 1:
        raise ValidationError("n_scenes must be >= 1")
    if episode_mode not in ("per_scene", "per_object"):
        raise ValidationError(f"unknown episode_mode {episode_mode!r}")

    scenes: list[Scene] = []
    episodes: list[EpisodeRecord] = []
    for i in range(n_scenes):
        rng = np.random.default_rng([spec.seed, i])
        scene = generate_scene(spec, objects_per_scene, rng, f"s{i:05d}")
        scenes.append(scene)
        if episode_mode == "per_scene":
            gold_index = int(rng.integers(objects_per_scene))
            tokens = make_expression(spec, scene, gold_index, tokens_per_expression)
            episodes.append(
                EpisodeRecord(tokens, scene.scene_id, scene.objects[gold_index].object_id)
            )
        else:
            for gold_index in range(objects_per_scene):
                tokens = make_expression(spec, scene, gold_index, tokens_per_expression)
                episodes.append(
                    EpisodeRecord(tokens, scene.scene_id, scene.objects[gold_index].object_id)
                )
    return Dataset(tuple(scenes), tuple(episodes))


def positive_examples(dataset: Dataset, word: str) -> list[np.ndarray]:
    """Gold-object feature vectors of every episode whose tokens include the word."""
    out = []
    for ep in dataset.episodes:
        if word in ep.tokens:
            out.append(dataset.scene(ep.scene_id).object(ep.gold_object_id).features)
    return out


def _referent_keys(dataset: Dataset, word: str) -> set[tuple[str, str]]:
    return {
        (ep.scene_id, ep.gold_object_id)
        for ep in dataset.episodes
        if word in ep.tokens
    }


def word_seed(seed: int, word: str) -> list[int]:
    """Stable per-word rng seed material: order-independent and hash()-free."""
    digest = hashlib.blake2s(word.encode("utf-8"), digest_size=8).digest()
    return [seed, int.from_bytes(digest, "big")]


def sample_negatives(dataset: Dataset, word: str, ratio: float, seed) -> list[np.ndarray]:
    """Sample counter-example features for a word from never-referred objects.

    Eligible objects are those never gold-referred by any episode containing
    the word. Draws ceil(ratio * positive_count) of them uniformly, without
    replacement when the pool is large enough.

    Raises:
        ValidationError: ratio <= 0, or no eligible negatives exist.
    """
    if ratio <= 0:
        raise ValidationError("negative sampling ratio must be > 0")
    excluded = _referent_keys(dataset, word)
    pool = [
        obj
        for scene in dataset.scenes
        for obj in scene.objects
        if (scene.scene_id, obj.object_id) not in excluded
    ]
    if not pool:
        raise ValidationError(f"no eligible negatives for word {word!r}")
    count = math.ceil(ratio * len(positive_examples(dataset, word)))
    if count == 0:
        return []
    rng = np.random.default_rng(seed)
    picks = rng.choice(len(pool), size=count, replace=count > len(pool))
    return [pool[int(j)].features.copy() for j in picks]


def build_lexicon(
    dataset: Dataset, config: TrainConfig | None = None, seed: int = 0
) -> Lexicon:
    """Train one classifier per vocabulary word from a dataset.

    Words train independently (sorted order; per-word seeds are stable hashes
    so results do not depend on iteration order), each on its gold-referent
    positives and ``config.neg_ratio`` sampled negatives.
    """
    lexicon = Lexicon(dataset.dim, config)
    for word in sorted(dataset.vocab):
        pos = positive_examples(dataset, word)
        neg = sample_negatives(dataset, word, lexicon.config.neg_ratio, word_seed(seed, word))
        lexicon.train(word, pos, neg)
    return lexicon
