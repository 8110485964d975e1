"""File formats: moment sequences, mixtures, Fourier samples and samples.

JSON numbers are written with ``repr`` precision, which round-trips doubles
exactly. Complex numbers are encoded as ``[re, im]`` pairs.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from .moments import (
    LocalDiracMixture,
    MomentSequence,
    ParetoParams,
    local_dirac_moments,
    mixture_of,
    pareto_moments,
)


def encode(obj):
    """Recursively convert numpy / complex values to JSON-compatible types."""
    if isinstance(obj, dict):
        return {str(k): encode(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [encode(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return encode(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if math.isfinite(f) else str(f)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def dumps(obj) -> str:
    return json.dumps(encode(obj), indent=2, sort_keys=True)


def _decode_scalar(v):
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise ValueError(f"complex values must be [re, im] pairs, got {v!r}")
        return complex(float(v[0]), float(v[1]))
    return float(v)


def _decode_array(vals) -> np.ndarray:
    out = [_decode_scalar(v) for v in vals]
    if any(isinstance(v, complex) for v in out):
        return np.array(out, dtype=complex)
    return np.array(out, dtype=float)


# ---------------------------------------------------------------------------
# moments


def moments_to_json(m: MomentSequence) -> str:
    normalized = bool(m.normalized or m.values[0] == 1)
    return dumps({"moments": m.values, "normalized": normalized})


def moments_to_csv(m: MomentSequence) -> str:
    """One value per line; complex values as ``re,im``."""
    if m.is_complex:
        lines = [f"{v.real!r},{v.imag!r}" for v in m.values.tolist()]
    else:
        lines = [repr(float(v)) for v in m.values.tolist()]
    return "\n".join(lines) + "\n"


def parse_moments(text: str) -> MomentSequence:
    """Moments from JSON ({"moments": [...], "normalized": bool} or a bare list) or CSV."""
    stripped = text.strip()
    if not stripped:
        raise ValueError("empty moment file")
    if stripped[0] in "[{":
        data = json.loads(stripped)
        if isinstance(data, dict):
            if "moments" not in data:
                raise ValueError("moment JSON needs a 'moments' list")
            return MomentSequence(_decode_array(data["moments"]), bool(data.get("normalized", False)))
        return MomentSequence(_decode_array(data))
    vals = []
    for row in csv.reader(io.StringIO(stripped)):
        row = [c.strip() for c in row if c.strip()]
        if not row:
            continue
        if len(row) == 1:
            vals.append(float(row[0]))
        elif len(row) == 2:
            vals.append(complex(float(row[0]), float(row[1])))
        else:
            raise ValueError(f"moment CSV rows hold one value or 're,im', got {row!r}")
    return MomentSequence(np.array(vals))


def _is_number(s: str) -> bool:
    try:
        float(s)
        return True
    except ValueError:
        return False


# ---------------------------------------------------------------------------
# mixtures


def mixture_to_dict(mix: LocalDiracMixture) -> dict:
    return {"components": [{"xi": c.xi, "lambdas": c.lambdas} for c in mix.components]}


def mixture_from_dict(d: dict) -> LocalDiracMixture:
    comps = d.get("components")
    if not isinstance(comps, list) or not comps:
        raise ValueError("mixture spec needs a non-empty 'components' list")
    xis, lams = [], []
    for c in comps:
        if "xi" not in c or "lambdas" not in c:
            raise ValueError("each component needs 'xi' and 'lambdas'")
        xis.append(_decode_scalar(c["xi"]))
        lams.append(_decode_array(c["lambdas"]))
    return mixture_of(xis, lams)


def moments_from_spec(d: dict, degree: int) -> MomentSequence:
    """Forward moments from a mixture spec or a Pareto spec {"pareto": {"alpha", "xi"}}."""
    if "pareto" in d:
        p = d["pareto"]
        return pareto_moments(ParetoParams(float(p["alpha"]), float(p["xi"])), degree)
    return local_dirac_moments(mixture_from_dict(d), degree)


# ---------------------------------------------------------------------------
# Fourier samples and raw samples


def fourier_from_csv(text: str):
    """Rows (k, re, im) covering k = -s..s in any order."""
    from .fourier import FourierSamples

    rows = [r for r in csv.reader(io.StringIO(text.strip())) if r]
    if rows and not _is_number(rows[0][0]):
        rows = rows[1:]
    entries = {int(float(r[0])): complex(float(r[1]), float(r[2])) for r in rows}
    if not entries:
        raise ValueError("no Fourier coefficients found")
    s = max(abs(k) for k in entries)
    missing = [k for k in range(-s, s + 1) if k not in entries]
    if missing:
        raise ValueError(f"missing coefficients for k in {missing}")
    return FourierSamples(s, np.array([entries[k] for k in range(-s, s + 1)]))


def fourier_to_csv(c) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["k", "re", "im"])
    for k, v in zip(c.ks.tolist(), c.coefficients.tolist()):
        w.writerow([k, repr(v.real), repr(v.imag)])
    return buf.getvalue()


def read_sample(text: str) -> np.ndarray:
    vals = []
    for line in text.splitlines():
        line = line.strip().split(",")[0]
        if not line:
            continue
        if not _is_number(line):
            if vals:
                raise ValueError(f"non-numeric sample entry {line!r}")
            continue  # header
        vals.append(float(line))
    if not vals:
        raise ValueError("empty sample")
    return np.array(vals)


def read_text(path: str | Path) -> str:
    return Path(path).read_text()
