"""Conventional acoustic features and deep-representation ingestion."""

from .conventional import FeatureVector, extract_batch, extract_conventional
from .deep import DeepFeatureMatrix, aggregate_deep, ingest_deep_features
from .framing import FrameTrack, frame_samples, frame_signal
from .functionals import functionals, moments
from .manifest import FeatureManifest, load_manifest
from .spectral import delta_track, intensity_track, mfcc_track, zcr_track
from .voicing import f0_track, hnr_track, jitter_shimmer, pause_features

__all__ = [
    "DeepFeatureMatrix", "FeatureManifest", "FeatureVector", "FrameTrack",
    "aggregate_deep", "delta_track", "extract_batch", "extract_conventional",
    "f0_track", "frame_samples", "frame_signal", "functionals", "hnr_track",
    "ingest_deep_features", "intensity_track", "jitter_shimmer", "load_manifest",
    "mfcc_track", "moments", "pause_features", "zcr_track",
]
