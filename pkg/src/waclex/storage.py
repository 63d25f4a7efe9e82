"""Persistence: JSON/JSONL documents with versioned headers and bit-exact floats.

Lexicons are single JSON documents; scenes, episodes, embedding tables, and
feature files are line-delimited JSON with a header line carrying the format
tag, version, and record count. Floats serialize through Python's
shortest-repr encoder, so every round-trip is bit-exact. Loaders reject
version mismatches, truncated files, and stored NaN/Inf values as distinct
error kinds, reporting the offending line or field path.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .composition import Scene, SceneObject
from .datagen import Dataset, EpisodeRecord
from .embeddings import EmbeddingTable
from .errors import (
    FileFormatError,
    StoredValueError,
    TruncatedFileError,
    ValidationError,
    VersionMismatchError,
)
from .lexicon import Lexicon, TrainConfig, WordClassifier

LEXICON_FORMAT = "waclex-lexicon"
SCENES_FORMAT = "waclex-scenes"
EPISODES_FORMAT = "waclex-episodes"
EMBEDDINGS_FORMAT = "waclex-embeddings"
FEATURES_FORMAT = "waclex-features"
FORMAT_VERSION = 1


def _dumps(obj) -> str:
    return json.dumps(obj, ensure_ascii=False, allow_nan=False)


def _parse_line(text: str, path: str, line_no: int) -> dict:
    try:
        value = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FileFormatError(f"invalid JSON ({exc.msg})", path=path, line=line_no) from exc
    if not isinstance(value, dict):
        raise FileFormatError("expected a JSON object", path=path, line=line_no)
    return value


def _check_header(header: dict, expected_format: str, path: str) -> dict:
    fmt = header.get("format")
    version = header.get("version")
    if fmt != expected_format or version != FORMAT_VERSION:
        raise VersionMismatchError(
            f"expected format {expected_format!r} version {FORMAT_VERSION}, "
            f"got {fmt!r} version {version!r}",
            path=path,
            line=1,
        )
    return header


def _float_field(value, field_path: str, path: str, line: int | None = None) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise FileFormatError(f"{field_path}: expected a number", path=path, line=line)
    f = float(value)
    if not math.isfinite(f):
        raise StoredValueError(f"{field_path}: non-finite value {value!r}", path=path, line=line)
    return f


def _float_array(values, field_path: str, path: str, line: int | None = None) -> np.ndarray:
    if not isinstance(values, list):
        raise FileFormatError(f"{field_path}: expected an array", path=path, line=line)
    out = np.empty(len(values))
    for i, v in enumerate(values):
        out[i] = _float_field(v, f"{field_path}[{i}]", path, line)
    return out


def _read_lines(path: str) -> list[str]:
    with open(path, "r", encoding="utf-8") as fh:
        return [ln for ln in (line.rstrip("\n") for line in fh) if ln.strip()]


def _load_jsonl(path: str, expected_format: str) -> tuple[dict, list[tuple[int, dict]]]:
    """Header plus (line_no, record) pairs; enforces the header's count."""
    lines = _read_lines(path)
    if not lines:
        raise TruncatedFileError("empty file", path=path)
    header = _check_header(_parse_line(lines[0], path, 1), expected_format, path)
    records = [(i + 2, _parse_line(text, path, i + 2)) for i, text in enumerate(lines[1:])]
    count = header.get("count")
    if not isinstance(count, int) or count < 0:
        raise FileFormatError("header is missing a valid 'count'", path=path, line=1)
    if len(records) < count:
        raise TruncatedFileError(
            f"header promises {count} records but file has {len(records)}", path=path
        )
    if len(records) > count:
        raise FileFormatError(
            f"header promises {count} records but file has {len(records)}", path=path
        )
    return header, records


def _write_text(path: str, text: str) -> None:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


# ---------------------------------------------------------------------------
# Lexicon: one JSON document per lexicon.
# ---------------------------------------------------------------------------


def lexicon_to_document(lexicon: Lexicon) -> dict:
    cfg = lexicon.config
    return {
        "format": LEXICON_FORMAT,
        "version": FORMAT_VERSION,
        "dim": lexicon.dim,
        "config": {
            "learning_rate": cfg.learning_rate,
            "l2_lambda": cfg.l2_lambda,
            "max_epochs": cfg.max_epochs,
            "tol": cfg.tol,
            "neg_ratio": cfg.neg_ratio,
            "cache_cap": cfg.cache_cap,
            "prob_clamp_eps": cfg.prob_clamp_eps,
        },
        "vocab_order": list(lexicon.vocab_order),
        "entries": {
            word: {
                "weights": [float(v) for v in lexicon.classifier(word).weights],
                "bias": float(lexicon.classifier(word).bias),
                "n_pos": lexicon.classifier(word).n_pos,
                "n_neg": lexicon.classifier(word).n_neg,
                "update_count": lexicon.classifier(word).update_count,
            }
            for word in lexicon.vocab_order
        },
    }


def lexicon_from_document(doc: dict, path: str = "<document>") -> Lexicon:
    _check_header(doc, LEXICON_FORMAT, path)
    dim = doc.get("dim")
    if not isinstance(dim, int) or dim < 1:
        raise FileFormatError("dim must be a positive integer", path=path)
    cfg_doc = doc.get("config")
    if not isinstance(cfg_doc, dict):
        raise FileFormatError("config must be an object", path=path)
    try:
        config = TrainConfig(**cfg_doc)
    except (TypeError, ValidationError) as exc:
        raise FileFormatError(f"bad config: {exc}", path=path) from exc
    entries = doc.get("entries")
    vocab_order = doc.get("vocab_order")
    if not isinstance(entries, dict) or not isinstance(vocab_order, list):
        raise FileFormatError("entries must be an object and vocab_order a list", path=path)
    if sorted(vocab_order) != sorted(entries.keys()):
        raise FileFormatError("vocab_order is not a permutation of the entry words", path=path)

    lexicon = Lexicon(dim, config)
    for word in vocab_order:
        entry = entries[word]
        field = f"entries[{word!r}]"
        weights = _float_array(entry.get("weights"), f"{field}.weights", path)
        if weights.shape[0] != dim:
            raise FileFormatError(
                f"{field}.weights has length {weights.shape[0]}, expected {dim}", path=path
            )
        bias = _float_field(entry.get("bias"), f"{field}.bias", path)
        counters = {}
        for name in ("n_pos", "n_neg", "update_count"):
            value = entry.get(name)
            if not isinstance(value, int) or value < 0:
                raise FileFormatError(
                    f"{field}.{name} must be a non-negative integer", path=path
                )
            counters[name] = value
        lexicon._install(word, WordClassifier(word, weights, bias, **counters))
    return lexicon


def save_lexicon(lexicon: Lexicon, path: str) -> None:
    _write_text(path, _dumps(lexicon_to_document(lexicon)) + "\n")


def load_lexicon(path: str) -> Lexicon:
    text = "\n".join(_read_lines(path))
    if not text.strip():
        raise TruncatedFileError("empty file", path=path)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FileFormatError(
            f"invalid JSON ({exc.msg})", path=path, line=exc.lineno
        ) from exc
    if not isinstance(doc, dict):
        raise FileFormatError("expected a JSON object", path=path, line=1)
    return lexicon_from_document(doc, path)


# ---------------------------------------------------------------------------
# Scenes and episodes: JSONL with a header line.
# ---------------------------------------------------------------------------


def save_scenes(scenes: Sequence[Scene], path: str) -> None:
    if not scenes:
        raise ValidationError("cannot save an empty scene set")
    lines = [
        _dumps(
            {
                "format": SCENES_FORMAT,
                "version": FORMAT_VERSION,
                "dim": scenes[0].dim,
                "count": len(scenes),
            }
        )
    ]
    for scene in scenes:
        lines.append(
            _dumps(
                {
                    "scene_id": scene.scene_id,
                    "objects": [
                        {
                            "object_id": o.object_id,
                            "features": [float(v) for v in o.features],
                            **(
                                {"attributes": dict(o.attributes)}
                                if o.attributes is not None
                                else {}
                            ),
                        }
                        for o in scene.objects
                    ],
                }
            )
        )
    _write_text(path, "\n".join(lines) + "\n")


def load_scenes(path: str) -> tuple[Scene, ...]:
    header, records = _load_jsonl(path, SCENES_FORMAT)
    dim = header.get("dim")
    if not isinstance(dim, int) or dim < 1:
        raise FileFormatError("header dim must be a positive integer", path=path, line=1)
    scenes = []
    for line_no, rec in records:
        objects = rec.get("objects")
        if not isinstance(objects, list) or not objects:
            raise FileFormatError("scene record needs a non-empty 'objects' array",
                                  path=path, line=line_no)
        built = []
        for k, obj in enumerate(objects):
            features = _float_array(
                obj.get("features"), f"objects[{k}].features", path, line_no
            )
            if features.shape[0] != dim:
                raise FileFormatError(
                    f"objects[{k}].features has length {features.shape[0]}, expected {dim}",
                    path=path,
                    line=line_no,
                )
            built.append(
                SceneObject(
                    object_id=str(obj.get("object_id")),
                    features=features,
                    attributes=obj.get("attributes"),
                )
            )
        scenes.append(Scene(scene_id=str(rec.get("scene_id")), objects=tuple(built)))
    return tuple(scenes)


def save_episodes(episodes: Sequence[EpisodeRecord], path: str) -> None:
    lines = [
        _dumps({"format": EPISODES_FORMAT, "version": FORMAT_VERSION, "count": len(episodes)})
    ]
    for ep in episodes:
        lines.append(
            _dumps(
                {
                    "scene_id": ep.scene_id,
                    "tokens": list(ep.tokens),
                    "gold_object_id": ep.gold_object_id,
                }
            )
        )
    _write_text(path, "\n".join(lines) + "\n")


def load_episodes(path: str) -> tuple[EpisodeRecord, ...]:
    _, records = _load_jsonl(path, EPISODES_FORMAT)
    episodes = []
    for line_no, rec in records:
        tokens = rec.get("tokens")
        if not isinstance(tokens, list) or not all(isinstance(t, str) for t in tokens):
            raise FileFormatError("'tokens' must be an array of strings", path=path, line=line_no)
        episodes.append(
            EpisodeRecord(
                tokens=tuple(tokens),
                scene_id=str(rec.get("scene_id")),
                gold_object_id=str(rec.get("gold_object_id")),
            )
        )
    return tuple(episodes)


def save_dataset(dataset: Dataset, scenes_path: str, episodes_path: str) -> None:
    save_scenes(dataset.scenes, scenes_path)
    save_episodes(dataset.episodes, episodes_path)


def load_dataset(scenes_path: str, episodes_path: str) -> Dataset:
    return Dataset(load_scenes(scenes_path), load_episodes(episodes_path))


# ---------------------------------------------------------------------------
# Embedding tables and canonical feature files.
# ---------------------------------------------------------------------------


def save_embeddings(table: EmbeddingTable, path: str) -> None:
    lines = [
        _dumps(
            {
                "format": EMBEDDINGS_FORMAT,
                "version": FORMAT_VERSION,
                "dim": table.dim,
                "modality": table.modality,
                "bias_excluded": table.bias_excluded,
                "count": len(table),
            }
        )
    ]
    for word in table.words:
        lines.append(_dumps({"word": word, "vector": [float(v) for v in table.vector(word)]}))
    _write_text(path, "\n".join(lines) + "\n")


def load_embeddings(path: str) -> EmbeddingTable:
    header, records = _load_jsonl(path, EMBEDDINGS_FORMAT)
    dim = header.get("dim")
    modality = header.get("modality")
    if not isinstance(dim, int) or dim < 1:
        raise FileFormatError("header dim must be a positive integer", path=path, line=1)
    vectors = {}
    for line_no, rec in records:
        word = rec.get("word")
        if not isinstance(word, str):
            raise FileFormatError("'word' must be a string", path=path, line=line_no)
        vec = _float_array(rec.get("vector"), f"vector({word!r})", path, line_no)
        if vec.shape[0] != dim:
            raise FileFormatError(
                f"vector({word!r}) has length {vec.shape[0]}, expected {dim}",
                path=path,
                line=line_no,
            )
        vectors[word] = vec
    return EmbeddingTable(
        dim, vectors, str(modality), bias_excluded=bool(header.get("bias_excluded", False))
    )


@dataclass(frozen=True)
class FeatureFile:
    """Canonical object-feature records: dim, source tag, (object_id, vector) pairs."""

    dim: int
    source: str
    records: tuple[tuple[str, np.ndarray], ...]


def save_features(records: Iterable[tuple[str, np.ndarray]], dim: int, source: str,
                  path: str) -> None:
    rows = list(records)
    lines = [
        _dumps(
            {
                "format": FEATURES_FORMAT,
                "version": FORMAT_VERSION,
                "dim": int(dim),
                "count": len(rows),
                "source": source,
            }
        )
    ]
    for object_id, vec in rows:
        arr = np.asarray(vec, dtype=np.float64)
        if arr.shape != (int(dim),):
            raise ValidationError(
                f"feature record {object_id!r} has shape {arr.shape}, expected ({dim},)"
            )
        lines.append(_dumps({"object_id": object_id, "features": [float(v) for v in arr]}))
    _write_text(path, "\n".join(lines) + "\n")


def load_features(path: str) -> FeatureFile:
    header, records = _load_jsonl(path, FEATURES_FORMAT)
    dim = header.get("dim")
    if not isinstance(dim, int) or dim < 1:
        raise FileFormatError("header dim must be a positive integer", path=path, line=1)
    rows = []
    for line_no, rec in records:
        vec = _float_array(rec.get("features"), "features", path, line_no)
        if vec.shape[0] != dim:
            raise FileFormatError(
                f"features has length {vec.shape[0]}, expected {dim}",
                path=path,
                line=line_no,
            )
        rows.append((str(rec.get("object_id")), vec))
    return FeatureFile(dim=dim, source=str(header.get("source", "")), records=tuple(rows))
