"""Live teaching sessions: scenes served to a human, fast-mapping updates back.

Each session owns a lexicon and a deterministic scene stream. A teach call
simulates one spoken use of an expression witnessed over several camera
frames: the gold object's features are jittered into F frames (seeded, seed
logged) that become positives for every token, with the scene's other objects
as negatives. The append-only interaction log carries everything needed to
rebuild the lexicon bit-exactly by replay.
"""

from __future__ import annotations

import datetime as _dt
import threading
import uuid
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .composition import ReferentDistribution, Scene, resolve
from .datagen import GenerativeSpec, color_shape_spec, left_right_spec, scene_at
from .errors import UnknownSessionError, ValidationError
from .lexicon import Lexicon, TrainConfig

DEFAULT_FRAME_COUNT = 10

PRESET_SPECS = {
    "color-shape": color_shape_spec,
    "left-right": left_right_spec,
}


def jitter_frames(features: np.ndarray, count: int, sigma: float, seed: int) -> np.ndarray:
    """Simulated camera frames: seeded Gaussian jitter around one feature vector."""
    rng = np.random.default_rng(seed)
    return features + rng.normal(0.0, sigma, (count, features.shape[0]))


def teach_update(
    lexicon: Lexicon,
    tokens: Sequence[str],
    scene: Scene,
    gold_object_id: str,
    frame_seed: int,
    frame_count: int = DEFAULT_FRAME_COUNT,
    frame_sigma: float = 0.05,
) -> None:
    """Apply one teaching interaction to the lexicon (pure of session state).

    Every token gets the same jittered frames of the gold object as new
    positives and all other scene objects as negatives. Deterministic given
    the frame seed and the lexicon's current state.
    """
    if gold_object_id not in scene:
        raise ValidationError(
            f"gold object {gold_object_id!r} is not in scene {scene.scene_id!r}"
        )
    if not tokens:
        raise ValidationError("teaching requires at least one token")
    gold = scene.object(gold_object_id)
    frames = jitter_frames(gold.features, frame_count, frame_sigma, frame_seed)
    negatives = [o.features for o in scene.objects if o.object_id != gold_object_id]
    for token in tokens:
        lexicon.update(token, frames, negatives)


@dataclass(frozen=True)
class Interaction:
    """One logged teach call, with the distributions before and after."""

    index: int
    scene_index: int
    scene_id: str
    tokens: tuple[str, ...]
    gold_object_id: str
    frame_seed: int
    pre: ReferentDistribution
    post: ReferentDistribution
    timestamp: str


def _distribution_payload(dist: ReferentDistribution) -> list[dict]:
    return [{"object_id": i, "probability": p} for i, p in dist.entries]


def _scene_payload(scene: Scene) -> dict:
    return {
        "scene_id": scene.scene_id,
        "objects": [
            {
                "object_id": o.object_id,
                "features": [float(v) for v in o.features],
                "attributes": dict(o.attributes) if o.attributes is not None else {},
            }
            for o in scene.objects
        ],
    }


class TeachSession:
    """Single-writer teaching session: scenes, previews, teaches, and the log.

    All operations take the session lock, so concurrent teaches serialize and
    previews observe either the pre- or post-teach lexicon, never a torn state.
    """

    def __init__(
        self,
        session_id: str,
        spec: GenerativeSpec,
        objects_per_scene: int,
        seed: int,
        config: TrainConfig | None = None,
        frame_count: int = DEFAULT_FRAME_COUNT,
        preset: str = "color-shape",
    ):
        self.session_id = session_id
        self.spec = spec
        self.objects_per_scene = objects_per_scene
        self.seed = seed
        self.preset = preset
        self.frame_count = frame_count
        self.lexicon = Lexicon(spec.dim, config)
        self.scene_index = 0
        self.scene = scene_at(spec, objects_per_scene, seed, 0)
        self.log: list[Interaction] = []
        self._lock = threading.Lock()
        self._rng = np.random.default_rng([seed, 0xFACE])
        self._response_counter = 0

    def _next_response_id(self) -> str:
        self._response_counter += 1
        return f"{self.session_id}-r{self._response_counter}"

    def scene_payload(self) -> dict:
        with self._lock:
            return {"response_id": self._next_response_id(),
                    "scene_index": self.scene_index,
                    "scene": _scene_payload(self.scene)}

    def preview(self, tokens: Sequence[str]) -> dict:
        """Resolve without mutating anything."""
        with self._lock:
            dist = resolve(self.lexicon, tokens, self.scene)
            return {
                "response_id": self._next_response_id(),
                "scene_id": self.scene.scene_id,
                "tokens": list(tokens),
                "distribution": _distribution_payload(dist),
            }

    def teach(self, tokens: Sequence[str], gold_object_id: str,
              frame_seed: int | None = None) -> dict:
        """One teaching interaction; returns pre and post distributions.

        Validation failures leave the log and lexicon untouched.
        """
        with self._lock:
            if gold_object_id not in self.scene:
                raise ValidationError(
                    f"gold object {gold_object_id!r} is not in scene {self.scene.scene_id!r}"
                )
            if not tokens:
                raise ValidationError("teaching requires at least one token")
            if frame_seed is None:
                frame_seed = int(self._rng.integers(0, 2**31 - 1))
            pre = resolve(self.lexicon, tokens, self.scene)
            teach_update(
                self.lexicon,
                tokens,
                self.scene,
                gold_object_id,
                frame_seed,
                self.frame_count,
                self.spec.noise_sigma,
            )
            post = resolve(self.lexicon, tokens, self.scene)
            interaction = Interaction(
                index=len(self.log),
                scene_index=self.scene_index,
                scene_id=self.scene.scene_id,
                tokens=tuple(tokens),
                gold_object_id=gold_object_id,
                frame_seed=frame_seed,
                pre=pre,
                post=post,
                timestamp=_dt.datetime.now(_dt.timezone.utc).isoformat(),
            )
            self.log.append(interaction)
            return {
                "response_id": self._next_response_id(),
                "interaction_index": interaction.index,
                "scene_id": interaction.scene_id,
                "frame_seed": frame_seed,
                "pre": _distribution_payload(pre),
                "post": _distribution_payload(post),
            }

    def next_scene(self) -> dict:
        with self._lock:
            self.scene_index += 1
            self.scene = scene_at(self.spec, self.objects_per_scene, self.seed, self.scene_index)
            return {"response_id": self._next_response_id(),
                    "scene_index": self.scene_index,
                    "scene": _scene_payload(self.scene)}

    def log_document(self) -> dict:
        """Everything required to replay the session onto a fresh lexicon."""
        with self._lock:
            cfg = self.lexicon.config
            return {
                "session_id": self.session_id,
                "preset": self.preset,
                "noise_sigma": self.spec.noise_sigma,
                "objects_per_scene": self.objects_per_scene,
                "seed": self.seed,
                "frame_count": self.frame_count,
                "config": {
                    "learning_rate": cfg.learning_rate,
                    "l2_lambda": cfg.l2_lambda,
                    "max_epochs": cfg.max_epochs,
                    "tol": cfg.tol,
                    "neg_ratio": cfg.neg_ratio,
                    "cache_cap": cfg.cache_cap,
                    "prob_clamp_eps": cfg.prob_clamp_eps,
                },
                "interactions": [
                    {
                        "index": it.index,
                        "scene_index": it.scene_index,
                        "scene_id": it.scene_id,
                        "tokens": list(it.tokens),
                        "gold_object_id": it.gold_object_id,
                        "frame_seed": it.frame_seed,
                        "pre": _distribution_payload(it.pre),
                        "post": _distribution_payload(it.post),
                        "timestamp": it.timestamp,
                    }
                    for it in self.log
                ],
            }

    def export_lexicon_document(self) -> dict:
        from .storage import lexicon_to_document

        with self._lock:
            return lexicon_to_document(self.lexicon)


def replay(log_document: dict) -> Lexicon:
    """Re-apply a logged teach sequence to a fresh lexicon.

    With the logged seeds, scenes and frames regenerate exactly, so the
    result is bit-identical to the lexicon exported by the original session.
    """
    preset = log_document["preset"]
    if preset not in PRESET_SPECS:
        raise ValidationError(f"unknown preset {preset!r} in log")
    spec = PRESET_SPECS[preset](noise_sigma=float(log_document["noise_sigma"]))
    config = TrainConfig(**log_document["config"])
    lexicon = Lexicon(spec.dim, config)
    objects_per_scene = int(log_document["objects_per_scene"])
    seed = int(log_document["seed"])
    frame_count = int(log_document["frame_count"])
    for it in log_document["interactions"]:
        scene = scene_at(spec, objects_per_scene, seed, int(it["scene_index"]))
        teach_update(
            lexicon,
            tuple(it["tokens"]),
            scene,
            str(it["gold_object_id"]),
            int(it["frame_seed"]),
            frame_count,
            spec.noise_sigma,
        )
    return lexicon


class TeachingService:
    """Session registry; sessions are independent and internally serialized."""

    def __init__(
        self,
        default_preset: str = "color-shape",
        default_objects_per_scene: int = 4,
        noise_sigma: float = 0.05,
        config: TrainConfig | None = None,
        frame_count: int = DEFAULT_FRAME_COUNT,
    ):
        if default_preset not in PRESET_SPECS:
            raise ValidationError(f"unknown preset {default_preset!r}")
        self.default_preset = default_preset
        self.default_objects_per_scene = default_objects_per_scene
        self.noise_sigma = noise_sigma
        self.config = config
        self.frame_count = frame_count
        self._sessions: dict[str, TeachSession] = {}
        self._lock = threading.Lock()

    def create_session(
        self,
        seed: int | None = None,
        preset: str | None = None,
        objects_per_scene: int | None = None,
    ) -> TeachSession:
        preset = preset if preset is not None else self.default_preset
        if preset not in PRESET_SPECS:
            raise ValidationError(f"unknown preset {preset!r}")
        if seed is None:
            seed = int(np.random.default_rng().integers(0, 2**31 - 1))
        spec = PRESET_SPECS[preset](noise_sigma=self.noise_sigma)
        session = TeachSession(
            session_id=uuid.uuid4().hex[:12],
            spec=spec,
            objects_per_scene=(
                objects_per_scene
                if objects_per_scene is not None
                else self.default_objects_per_scene
            ),
            seed=seed,
            config=self.config,
            frame_count=self.frame_count,
            preset=preset,
        )
        with self._lock:
            self._sessions[session.session_id] = session
        return session

    def session(self, session_id: str) -> TeachSession:
        with self._lock:
            try:
                return self._sessions[session_id]
            except KeyError:
                raise UnknownSessionError(session_id) from None
