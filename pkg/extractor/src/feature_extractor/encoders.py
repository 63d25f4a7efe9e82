"""Pluggable image encoders keyed by identifier.

The default "pixel-stats" encoder is dependency-light and fully
deterministic: a coarse grayscale thumbnail, per-channel color moments, and a
luminance histogram. A "clip" adapter is registered for environments that can
load pretrained vision weights; nothing in the extractor depends on it.
"""

from __future__ import annotations

import numpy as np
from PIL import Image


class PixelStatsEncoder:
    """Deterministic 32-dim image statistics: thumbnail + moments + histogram."""

    encoder_id = "pixel-stats"
    dim = 32

    def encode(self, image: Image.Image) -> np.ndarray:
        rgb = image.convert("RGB")
        thumb = np.asarray(rgb.resize((4, 4), Image.BILINEAR), dtype=np.float64) / 255.0
        gray_thumb = thumb.mean(axis=2).reshape(-1)  # 16

        full = np.asarray(rgb.resize((32, 32), Image.BILINEAR), dtype=np.float64) / 255.0
        means = full.mean(axis=(0, 1))  # 3
        stds = full.std(axis=(0, 1))  # 3
        lum = full.mean(axis=2).reshape(-1)
        hist, _ = np.histogram(lum, bins=10, range=(0.0, 1.0))
        hist = hist / lum.size  # 10

        return np.concatenate([gray_thumb, means, stds, hist])


class ClipEncoder:
    """Adapter around a pretrained CLIP vision tower (needs downloadable weights)."""

    encoder_id = "clip"
    dim = 512

    def __init__(self):
        try:
            from sentence_transformers import SentenceTransformer
        except ImportError as exc:  # pragma: no cover - environment dependent
            raise RuntimeError(
                "the 'clip' encoder needs sentence-transformers with downloadable "
                "weights; use 'pixel-stats' in offline environments"
            ) from exc
        self._model = SentenceTransformer("clip-ViT-B-32")

    def encode(self, image: Image.Image) -> np.ndarray:  # pragma: no cover
        return np.asarray(self._model.encode(image.convert("RGB")), dtype=np.float64)


ENCODERS = {
    PixelStatsEncoder.encoder_id: PixelStatsEncoder,
    ClipEncoder.encoder_id: ClipEncoder,
}


def get_encoder(encoder_id: str):
    try:
        return ENCODERS[encoder_id]()
    except KeyError:
        raise ValueError(
            f"unknown encoder {encoder_id!r}; known: {', '.join(sorted(ENCODERS))}"
        ) from None
