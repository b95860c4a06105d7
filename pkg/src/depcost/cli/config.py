"""Declarative pipeline configuration: packaged defaults overlaid with a user YAML file."""

from __future__ import annotations

import copy
import hashlib
import json
import os
from importlib import resources

import yaml

from ..audio import EnhancementConfig
from ..errors import ConfigError
from ..evaluation.cv import CvConfig
from ..evaluation.meta import TASKS
from ..models.search import FAMILIES, GridSearchPlan

# keys that do not affect results and are left out of the config hash
VOLATILE_KEYS = ("out", "jobs")


def default_config() -> dict:
    text = resources.files("depcost.cli").joinpath("defaults.yaml").read_text(encoding="utf-8")
    return yaml.safe_load(text)


def _merge(base: dict, override: dict, path: str = "") -> dict:
    out = copy.deepcopy(base)
    for key, val in override.items():
        where = f"{path}{key}"
        if key not in base:
            raise ConfigError(f"unknown config key {where!r}")
        if isinstance(base[key], dict) and key != "grids" and key != "params":
            if not isinstance(val, dict):
                raise ConfigError(f"{where} must be a mapping")
            out[key] = _merge(base[key], val, where + ".")
        else:
            out[key] = copy.deepcopy(val)
    return out


def load_config(path=None, overrides: dict | None = None) -> dict:
    """Defaults, then the YAML file at ``path``, then ``overrides`` (e.g. CLI flags)."""
    cfg = default_config()
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                user = yaml.safe_load(fh) or {}
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        except yaml.YAMLError as exc:
            raise ConfigError(f"invalid YAML in {path}: {exc}") from exc
        if not isinstance(user, dict):
            raise ConfigError("config file must hold a mapping")
        base_dir = os.path.dirname(os.path.abspath(path))
        for key in ("metadata", "audio_dir", "deep_dir", "features"):
            val = (user.get("data") or {}).get(key)
            if isinstance(val, str) and not os.path.isabs(val):
                user["data"][key] = os.path.join(base_dir, val)
        cfg = _merge(cfg, user)
    for key, val in (overrides or {}).items():
        if val is not None:
            cfg[key] = val
    validate(cfg)
    return cfg


def validate(cfg: dict) -> None:
    try:
        if cfg["feature_source"] not in ("conventional", "deep"):
            raise ConfigError("feature_source must be 'conventional' or 'deep'")
        if int(cfg["cv"]["k"]) < 2 or int(cfg["cv"]["inner_folds"]) < 2:
            raise ConfigError("cv.k and cv.inner_folds must be >= 2")
        if cfg["cv"]["gender_mode"] not in ("separate", "sliced"):
            raise ConfigError("cv.gender_mode must be 'separate' or 'sliced'")
        tf = cfg["cv"]["task_filter"]
        if tf is not None and (not isinstance(tf, list) or set(tf) - set(TASKS)):
            raise ConfigError(f"cv.task_filter must be a list drawn from {TASKS}")
        fams = cfg["models"]["families"]
        if not fams or set(fams) - set(FAMILIES):
            raise ConfigError(f"models.families must be a nonempty subset of {FAMILIES}")
        for fam in fams:
            grid = cfg["models"]["grids"].get(fam)
            if not grid or any(not isinstance(v, list) or not v for v in grid.values()):
                raise ConfigError(f"models.grids.{fam} must map names to nonempty lists")
        if not 0 < float(cfg["selection"]["fraction"]) <= 1:
            raise ConfigError("selection.fraction must lie in (0, 1]")
        if cfg["selection"]["scheme"] not in ("difference", "quotient"):
            raise ConfigError("selection.scheme must be 'difference' or 'quotient'")
        if cfg["audio"]["order"] not in ("normalize_first", "enhance_first"):
            raise ConfigError("audio.order must be 'normalize_first' or 'enhance_first'")
        enhancement_config(cfg)
        if int(cfg["jobs"]) < 1:
            raise ConfigError("jobs must be >= 1")
        if not 0 <= float(cfg["synth"]["coupling"]) <= 1:
            raise ConfigError("synth.coupling must lie in [0, 1]")
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"invalid config: {exc}") from exc


def enhancement_config(cfg: dict) -> EnhancementConfig:
    try:
        return EnhancementConfig(**cfg["audio"]["enhancement"])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"audio.enhancement: {exc}") from exc


def cv_config(cfg: dict) -> CvConfig:
    plan = GridSearchPlan(grids=copy.deepcopy(cfg["models"]["grids"]),
                          inner_folds=int(cfg["cv"]["inner_folds"]), seed=int(cfg["seed"]))
    return CvConfig(k=int(cfg["cv"]["k"]), seed=int(cfg["seed"]),
                    selection_fraction=float(cfg["selection"]["fraction"]),
                    mrmr_scheme=cfg["selection"]["scheme"],
                    gender_mode=cfg["cv"]["gender_mode"], plan=plan,
                    clamp=bool(cfg["models"]["clamp"]))


def config_hash(cfg: dict) -> str:
    stable = {k: v for k, v in cfg.items() if k not in VOLATILE_KEYS}
    blob = json.dumps(stable, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()
