"""Versioned, ordered list of (descriptor, functional) feature names."""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

from .functionals import BASIC4, BASIC6

N_MFCC = 13
VOICE_QUALITY = ("jitter_local", "jitter_abs", "shimmer_local")
DURATIONAL = ("total_dur", "speech_dur", "pause_count", "mean_pause", "pause_rate",
              "phonation_rate", "voiced_fraction")


@dataclass(frozen=True)
class FeatureManifest:
    version: str
    entries: tuple[str, ...]
    notes: tuple[str, ...] = ()

    def __post_init__(self):
        if len(set(self.entries)) != len(self.entries):
            raise ValueError("manifest entries must be unique")

    def __len__(self):
        return len(self.entries)

    def index(self, name: str) -> int:
        return self.entries.index(name)


def build_v1_entries() -> tuple[str, ...]:
    names = []
    for c in range(N_MFCC):
        names += [f"MFCC{c}_{f}" for f in BASIC6]
    for prefix in ("dMFCC", "ddMFCC"):
        for c in range(N_MFCC):
            names += [f"{prefix}{c}_{f}" for f in ("skew", "kurt")]
    names += [f"ZCR_{f}" for f in BASIC6]
    for lld in ("intensity", "F0", "HNR"):
        names += [f"{lld}_{f}" for f in BASIC4]
    names += list(VOICE_QUALITY) + list(DURATIONAL)
    return tuple(names)


def parse_manifest(text: str) -> FeatureManifest:
    version, entries, notes = None, [], []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("version:"):
                version = body.split(":", 1)[1].strip()
            elif body.startswith("note:"):
                notes.append(body.split(":", 1)[1].strip())
            continue
        entries.append(line)
    if version is None:
        raise ValueError("manifest has no version header")
    return FeatureManifest(version, tuple(entries), tuple(notes))


def format_manifest(manifest: FeatureManifest) -> str:
    lines = [f"# version: {manifest.version}"]
    lines += [f"# note: {n}" for n in manifest.notes]
    lines += list(manifest.entries)
    return "\n".join(lines) + "\n"


def load_manifest(version: str = "v1") -> FeatureManifest:
    text = resources.files("depcost.features").joinpath("manifests", f"manifest_{version}.txt").read_text()
    return parse_manifest(text)
