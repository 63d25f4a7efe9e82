"""Manifest-driven extraction into canonical waclex-features files."""

from __future__ import annotations

import json
import os
import sys
import tempfile
from dataclasses import dataclass, field

import numpy as np
from PIL import Image, UnidentifiedImageError

from .encoders import get_encoder

FEATURES_FORMAT = "waclex-features"
FORMAT_VERSION = 1


@dataclass(frozen=True)
class ExtractionManifest:
    """Word -> image paths, the encoder to run, and where outputs go."""

    words: dict[str, list[str]]
    encoder: str = "pixel-stats"
    output_dir: str = "features"
    pool: list[str] = field(default_factory=list)

    def __post_init__(self):
        if not self.words:
            raise ValueError("manifest lists no words")
        for word, paths in self.words.items():
            if not paths:
                raise ValueError(f"word {word!r} lists no images")

    def all_paths(self) -> list[str]:
        """Every manifest image once, in stable order (pool source)."""
        seen: dict[str, None] = {}
        for paths in self.words.values():
            for p in paths:
                seen.setdefault(p, None)
        for p in self.pool:
            seen.setdefault(p, None)
        return list(seen)


def load_manifest(path: str) -> ExtractionManifest:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict) or not isinstance(doc.get("words"), dict):
        raise ValueError(f"{path}: manifest must be an object with a 'words' mapping")
    return ExtractionManifest(
        words={str(w): [str(p) for p in paths] for w, paths in doc["words"].items()},
        encoder=str(doc.get("encoder", "pixel-stats")),
        output_dir=str(doc.get("output_dir", "features")),
        pool=[str(p) for p in doc.get("pool", [])],
    )


@dataclass(frozen=True)
class ExtractionResult:
    encoder: str
    dim: int
    written: dict[str, str]  # word (or "pool") -> output path
    encoded_count: int
    skipped: list[str]

    @property
    def skip_fraction(self) -> float:
        total = self.encoded_count + len(self.skipped)
        return len(self.skipped) / total if total else 0.0


def _write_feature_file(path: str, dim: int, source: str,
                        rows: list[tuple[str, np.ndarray]]) -> None:
    """Write the canonical format atomically (rename over the final name)."""
    lines = [json.dumps({
        "format": FEATURES_FORMAT,
        "version": FORMAT_VERSION,
        "dim": dim,
        "count": len(rows),
        "source": source,
    }, ensure_ascii=False, allow_nan=False)]
    for object_id, vec in rows:
        lines.append(json.dumps(
            {"object_id": object_id, "features": [float(v) for v in vec]},
            ensure_ascii=False, allow_nan=False,
        ))
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(os.path.abspath(path)))
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def extract(manifest: ExtractionManifest, warn=None) -> ExtractionResult:
    """Encode every manifest image and write per-word plus pool feature files.

    Undecodable or unreadable images are skipped with a warning line; the
    caller decides what skip fraction is fatal (the CLI exits nonzero above
    10%). Deterministic for a fixed encoder version.
    """
    warn = warn if warn is not None else (lambda msg: print(msg, file=sys.stderr))
    encoder = get_encoder(manifest.encoder)

    encoded: dict[str, np.ndarray] = {}
    skipped: list[str] = []
    for path in manifest.all_paths():
        try:
            with Image.open(path) as img:
                vec = encoder.encode(img)
        except (OSError, UnidentifiedImageError, ValueError) as exc:
            warn(f"warning: skipping {path}: {exc}")
            skipped.append(path)
            continue
        if vec.shape != (encoder.dim,) or not np.all(np.isfinite(vec)):
            warn(f"warning: skipping {path}: encoder produced an invalid vector")
            skipped.append(path)
            continue
        encoded[path] = vec

    written: dict[str, str] = {}
    for word, paths in manifest.words.items():
        rows = [(p, encoded[p]) for p in paths if p in encoded]
        out_path = os.path.join(manifest.output_dir, f"{word}.features")
        _write_feature_file(out_path, encoder.dim, manifest.encoder, rows)
        written[word] = out_path

    pool_rows = [(p, vec) for p, vec in encoded.items()]
    pool_path = os.path.join(manifest.output_dir, "pool.features")
    _write_feature_file(pool_path, encoder.dim, manifest.encoder, pool_rows)
    written["pool"] = pool_path

    return ExtractionResult(
        encoder=manifest.encoder,
        dim=encoder.dim,
        written=written,
        encoded_count=len(encoded),
        skipped=skipped,
    )
