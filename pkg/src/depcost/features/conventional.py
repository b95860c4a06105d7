"""Assembly of the conventional acoustic feature vector."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .functionals import functionals
from .manifest import FeatureManifest, load_manifest
from .spectral import delta_track, intensity_track, mfcc_track, zcr_track
from .voicing import analyze_pitch, f0_track, hnr_track, jitter_shimmer, pause_features


@dataclass(frozen=True)
class FeatureVector:
    values: np.ndarray
    manifest_id: str
    sample_id: str = ""
    flags: tuple[str, ...] = field(default_factory=tuple)

    def as_dict(self, manifest: FeatureManifest) -> dict[str, float]:
        return dict(zip(manifest.entries, self.values.tolist()))


def _all_descriptors(clip) -> tuple[dict[str, float], list[str]]:
    values: dict[str, float] = {}
    undefined: list[str] = []

    def add(track, which):
        v, u = functionals(track, which)
        values.update(v)
        undefined.extend(u)

    mfcc = mfcc_track(clip)
    for t in mfcc:
        add(t, "basic4+skew+kurt")
    for order in (1, 2):
        for t in mfcc:
            add(delta_track(t, order), "basic4+skew+kurt")
    add(zcr_track(clip), "basic4+skew+kurt")
    add(intensity_track(clip), "basic4")

    pitch = analyze_pitch(clip)
    f0 = f0_track(clip, pitch)
    add(f0, "basic4")
    add(hnr_track(clip, pitch), "basic4")

    vq = jitter_shimmer(clip, f0)
    values.update(jitter_local=vq.jitter_local, jitter_abs=vq.jitter_abs, shimmer_local=vq.shimmer_local)
    if not vq.defined:
        undefined.extend(["jitter_local", "jitter_abs", "shimmer_local"])

    ps = pause_features(clip)
    values.update(
        total_dur=ps.total_dur_s,
        speech_dur=ps.speech_dur_s,
        pause_count=float(ps.pause_count),
        mean_pause=ps.mean_pause_s,
        pause_rate=ps.pause_rate,
        phonation_rate=ps.phonation_rate,
        voiced_fraction=float(np.mean(~np.isnan(f0.values))),
    )
    if ps.pause_count == 0:
        undefined.append("mean_pause")
    return values, undefined


def extract_conventional(clip, manifest: FeatureManifest | None = None) -> FeatureVector:
    """Compute every manifest entry for ``clip`` in manifest order.

    Undefined statistics are imputed as 0 and named in ``flags``.
    """
    manifest = manifest or load_manifest()
    values, undefined = _all_descriptors(clip)
    missing = [e for e in manifest.entries if e not in values]
    if missing:
        raise KeyError(f"manifest {manifest.version} asks for unknown entries: {missing[:5]}")
    vec = np.array([values[e] for e in manifest.entries], dtype=float)
    wanted = set(manifest.entries)
    flags = tuple(u for u in undefined if u in wanted)
    return FeatureVector(vec, manifest.version, clip.id, flags)


def _extract_one(args):
    clip, manifest = args
    return extract_conventional(clip, manifest)


def extract_batch(clips, manifest: FeatureManifest | None = None, jobs: int = 1) -> list[FeatureVector]:
    """Extract many clips; results keep input order regardless of ``jobs``."""
    manifest = manifest or load_manifest()
    if jobs <= 1:
        return [extract_conventional(c, manifest) for c in clips]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_extract_one, [(c, manifest) for c in clips]))
