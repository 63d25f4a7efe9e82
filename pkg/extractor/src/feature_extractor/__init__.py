"""Convert image directories into canonical feature files for grounded lexicons.

A manifest maps words to image paths; each image runs through a pluggable
encoder and lands in one feature record. Per word the extractor writes a
positives file, plus one shared pool file over every manifest image (the
source negatives are later sampled from). Output follows the waclex-features
format exactly, so the files drop straight into the main toolkit's loaders.
"""

from .encoders import ENCODERS, PixelStatsEncoder, get_encoder
from .extract import ExtractionManifest, ExtractionResult, extract, load_manifest

__all__ = [
    "ENCODERS",
    "ExtractionManifest",
    "ExtractionResult",
    "PixelStatsEncoder",
    "extract",
    "get_encoder",
    "load_manifest",
]
