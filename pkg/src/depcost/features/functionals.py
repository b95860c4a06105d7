"""Statistical functionals that reduce a frame track to named scalars."""

from __future__ import annotations

import numpy as np

BASIC4 = ("min", "max", "mean", "var")
BASIC6 = BASIC4 + ("skew", "kurt")
FUNCTIONAL_SETS = {"basic4": BASIC4, "basic4+skew+kurt": BASIC6}

# relative spread below which a track counts as constant
_DEGENERATE_REL = 1e-9


def moments(values) -> dict[str, float | None]:
    """min/max/mean, population variance, skewness m3/m2^1.5 and excess kurtosis.

    Entries are ``None`` where the statistic is undefined: no values at all,
    fewer than 2 values for the variance, fewer than 3 values or a constant
    track for skewness and kurtosis. NaN entries are ignored.
    """
    x = np.asarray(values, dtype=float)
    x = x[~np.isnan(x)]
    n = len(x)
    out: dict[str, float | None] = dict.fromkeys(BASIC6)
    if n == 0:
        return out
    mean = float(np.mean(x))
    out["min"] = float(np.min(x))
    out["max"] = float(np.max(x))
    out["mean"] = mean
    centred = x - mean
    m2 = float(np.mean(centred ** 2))
    scale = max(abs(out["min"]), abs(out["max"]))
    constant = out["max"] == out["min"] or np.sqrt(m2) <= _DEGENERATE_REL * scale
    if n >= 2:
        out["var"] = 0.0 if constant else m2
    if n >= 3 and not constant:
        m3 = float(np.mean(centred ** 3))
        m4 = float(np.mean(centred ** 4))
        out["skew"] = m3 / m2 ** 1.5
        out["kurt"] = m4 / (m2 * m2) - 3.0
    return out


def functionals(track, which: str = "basic4") -> tuple[dict[str, float], list[str]]:
    """Apply a functional set to a FrameTrack.

    Returns ``(values, undefined)``: values keyed ``"<descriptor>_<stat>"``
    with undefined statistics imputed as 0, and the list of imputed keys.
    """
    stats = FUNCTIONAL_SETS[which]
    m = moments(track.values)
    values, undefined = {}, []
    for stat in stats:
        key = f"{track.descriptor_name}_{stat}"
        v = m[stat]
        if v is None or not np.isfinite(v):
            undefined.append(key)
            v = 0.0
        values[key] = float(v)
    return values, undefined
