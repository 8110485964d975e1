"""Polynomial relations satisfied by moment vectors of local Dirac measures.

Every evaluator works on the dehomogenised sequence (M_0 = 1) and returns
the value of a single generator. Scales returned by :func:`family_values`
are Σ_t |c_t| Π|M| over the terms of the generator, i.e. the size of the
round-off one should expect when the exact value is zero.

Two families are conjectural: ``second_order_conjecture`` and
``delta_power`` with n = 2l + 1 > 3. Their vanishing on the right moment
vectors is checked, nothing more.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .moments import as_moments, binomial_row

FAMILIES = (
    "fij_first_order",
    "eisenbud_delta3",
    "second_order_conjecture",
    "delta_power",
    "pareto_inverse",
)
CONJECTURAL = ("second_order_conjecture",)


def _vals(m) -> np.ndarray:
    return as_moments(m).values


def _check(cond: bool, msg: str):
    if not cond:
        raise IndexError(msg)


# ---------------------------------------------------------------------------
# term lists: each generator is Σ_t c_t Π_{q} M_{idx_{t,q}}


def _fij_terms(i: int, j: int):
    g = j - i
    return [
        (g + 3, (i, j)),
        (-2 * (g + 2), (i - 1, j + 1)),
        (g + 1, (i - 2, j + 2)),
    ]


def _delta_terms(a0: int, a1: int, n: int):
    row = binomial_row(n)
    return [((-1) ** k * row[k], (a0 + k, a1 + n - k)) for k in range(n + 1)]


def second_order_coefficients(i: int, j: int) -> tuple[int, int, int, int]:
    g = j - i
    return (
        (g + 1) * (g + 2),
        -3 * (g - 1) * (g + 2),
        3 * (g + 1) * (g - 2),
        -(g - 1) * (g - 2),
    )


def _second_order_terms(i: int, j: int):
    c0, c1, c2, c3 = second_order_coefficients(i, j)
    return [(c0, (i + 3, j)), (c1, (i + 2, j + 1)), (c2, (i + 1, j + 2)), (c3, (i, j + 3))]


def _pareto_terms(i: int, j: int):
    g = j - i
    return [
        (g + 3, (i - 2, i - 1, j + 1, j + 2)),
        (-2 * (g + 2), (i - 2, i, j, j + 2)),
        (g + 1, (i - 1, i, j, j + 1)),
    ]


def _evaluate(v: np.ndarray, terms) -> tuple:
    total = 0
    scale = 0.0
    for c, idx in terms:
        prod = 1
        for q in idx:
            prod = prod * v[q]
        total = total + c * prod
        scale += abs(c) * float(np.prod([abs(v[q]) for q in idx]))
    return total, scale


# ---------------------------------------------------------------------------
# single generators


def eval_fij(m, i: int, j: int):
    """(j-i+3) M_i M_j - 2(j-i+2) M_{i-1} M_{j+1} + (j-i+1) M_{i-2} M_{j+2}."""
    v = _vals(m)
    d = v.size - 1
    _check(2 <= i <= j <= d - 2, f"f_ij needs 2 <= i <= j <= d-2, got i={i}, j={j}, d={d}")
    return _evaluate(v, _fij_terms(i, j))[0]


def eval_delta_power(m, a0: int, a1: int, n: int):
    """Σ_k (-1)^k C(n,k) M_{a0+k} M_{a1+n-k}."""
    v = _vals(m)
    d = v.size - 1
    _check(n >= 0 and a0 >= 0 and a1 >= 0, "indices must be non-negative")
    _check(a0 + n <= d and a1 + n <= d, f"a0+n and a1+n must not exceed d={d}")
    return _evaluate(v, _delta_terms(a0, a1, n))[0]


def eval_second_order_generator(m, i: int, j: int):
    """c_0 M_{i+3}M_j + c_1 M_{i+2}M_{j+1} + c_2 M_{i+1}M_{j+2} + c_3 M_i M_{j+3} (conjectural)."""
    v = _vals(m)
    d = v.size - 1
    _check(i >= 0 and j >= 0 and i >= j - 3, f"need i, j >= 0 and i >= j-3, got i={i}, j={j}")
    _check(i + 3 <= d and j + 3 <= d, f"i+3 and j+3 must not exceed d={d}")
    return _evaluate(v, _second_order_terms(i, j))[0]


def eval_pareto_generator(m, i: int, j: int):
    """Quartic relation of Pareto moment vectors; M_0 is taken to be 1."""
    v = np.array(_vals(m), copy=True)
    v[0] = 1
    d = v.size - 1
    _check(2 <= i <= j <= d - 2, f"Pareto generator needs 2 <= i <= j <= d-2, got i={i}, j={j}")
    return _evaluate(v, _pareto_terms(i, j))[0]


# ---------------------------------------------------------------------------
# families


@dataclass(frozen=True)
class GeneratorValue:
    family: str
    index: tuple
    value: complex | float
    scale: float

    def passes(self, rel_tol: float) -> bool:
        return bool(abs(self.value) <= rel_tol * max(self.scale, np.finfo(float).tiny))

    def as_dict(self, rel_tol: float) -> dict:
        val = self.value
        val = [val.real, val.imag] if isinstance(val, complex) else float(val)
        return {
            "family": self.family,
            "index": list(self.index),
            "value": val,
            "scale": self.scale,
            "pass": self.passes(rel_tol),
        }


def family_indices(family: str, d: int, n: int | None = None) -> Iterator[tuple]:
    """All valid index tuples of a family at degree d."""
    if family in ("fij_first_order", "pareto_inverse"):
        for i in range(2, d - 1):
            for j in range(i, d - 1):
                yield (i, j)
    elif family == "eisenbud_delta3":
        for a0 in range(0, d - 2):
            for a1 in range(a0 + 1, d - 2):
                yield (a0, a1, 3)
    elif family == "delta_power":
        if n is None:
            raise ValueError("delta_power needs the exponent n")
        for a0 in range(0, d - n + 1):
            for a1 in range(a0 + 1, d - n + 1):
                yield (a0, a1, n)
    elif family == "second_order_conjecture":
        for i in range(0, d - 2):
            for j in range(0, min(i + 3, d - 3) + 1):
                yield (i, j)
    else:
        raise ValueError(f"unknown family {family!r}; choose from {FAMILIES}")


def _terms_for(family: str, idx: tuple):
    if family == "fij_first_order":
        return _fij_terms(*idx)
    if family in ("eisenbud_delta3", "delta_power"):
        return _delta_terms(*idx)
    if family == "second_order_conjecture":
        return _second_order_terms(*idx)
    if family == "pareto_inverse":
        return _pareto_terms(*idx)
    raise ValueError(f"unknown family {family!r}")


def family_values(m, family: str, n: int | None = None) -> list[GeneratorValue]:
    v = np.array(_vals(m), copy=True)
    if family == "pareto_inverse":
        v[0] = 1
    d = v.size - 1
    out = []
    for idx in family_indices(family, d, n):
        val, scale = _evaluate(v, _terms_for(family, idx))
        out.append(GeneratorValue(family, idx, val, scale))
    return out


def check_family(m, family: str, rel_tol: float = 1e-9, n: int | None = None) -> list[dict]:
    """JSON-ready report, one record per generator."""
    return [g.as_dict(rel_tol) for g in family_values(m, family, n)]


def max_relative(m, family: str, n: int | None = None) -> float:
    """Largest |value| / scale over the family (0 when the family is empty)."""
    vals = family_values(m, family, n)
    return max((abs(g.value) / g.scale if g.scale > 0 else 0.0 for g in vals), default=0.0)


# ---------------------------------------------------------------------------
# Cremona linearisation


def _z_sequence(m1, m2, m3, d: int, magnitude: bool = False) -> list:
    """z_0..z_d; with ``magnitude`` every term is taken in absolute value."""
    z = [1, m1, m2, m3]
    sign = 1 if magnitude else -1
    for i in range(4, d + 1):
        k = i // 2
        if i % 2:
            z.append(0.5 * k * (k + 1) * z[k - 1] * z[k + 2] + sign * 0.5 * (k - 1) * (k + 2) * z[k] * z[k + 1])
        else:
            z.append(k * k * z[k - 1] * z[k + 1] + sign * (k - 1) * (k + 1) * z[k] ** 2)
    return z[: d + 1]


def cremona_transform(m) -> np.ndarray:
    """(y_1..y_d) with y_i = M_i for i <= 3 and y_i = M_i - z_i beyond.

    z_i depends on M_1, M_2, M_3 only, so the map is triangular; on the
    variety of single first-order local Diracs y_4 = ... = y_d = 0.
    """
    v = _vals(m)
    d = v.size - 1
    if d < 3:
        raise ValueError("the Cremona transform needs d >= 3")
    if v[0] != 1:
        raise ValueError("the Cremona transform expects M_0 = 1")
    z = _z_sequence(v[1], v[2], v[3], d)
    y = np.array([v[i] - (z[i] if i > 3 else 0) for i in range(1, d + 1)])
    return y


def cremona_scale(m) -> np.ndarray:
    """Round-off scale of each y_i: |M_i| plus the magnitude of the terms of z_i."""
    v = np.abs(_vals(m))
    d = v.size - 1
    if d < 3:
        raise ValueError("the Cremona transform needs d >= 3")
    z = _z_sequence(v[1], v[2], v[3], d, magnitude=True)
    return np.array([v[i] + (z[i] if i > 3 else 0) for i in range(1, d + 1)])


def cremona_inverse(y) -> np.ndarray:
    """Moments M_0..M_d from (y_1..y_d)."""
    y = np.asarray(y)
    d = y.size
    if d < 3:
        raise ValueError("need y_1..y_3 at least")
    z = _z_sequence(y[0], y[1], y[2], d)
    out = [1] + [y[i - 1] + (z[i] if i > 3 else 0) for i in range(1, d + 1)]
    return np.array(out)


def eval_discriminant_quartic(y1, y2, y3):
    """3y_1²y_2² - 4y_1³y_3 - 4y_2³ + 6y_1y_2y_3 - y_3²."""
    return 3 * y1**2 * y2**2 - 4 * y1**3 * y3 - 4 * y2**3 + 6 * y1 * y2 * y3 - y3**2


def discriminant_scale(y1, y2, y3) -> float:
    a1, a2, a3 = abs(y1), abs(y2), abs(y3)
    return 3 * a1**2 * a2**2 + 4 * a1**3 * a3 + 4 * a2**3 + 6 * a1 * a2 * a3 + a3**2
