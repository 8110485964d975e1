"""Closed-form recovery of a two-component mixture of first-order local Diracs.

The model is

    m_i = λ (ξ_1^i + i α_1 ξ_1^(i-1)) + (1 - λ)(ξ_2^i + i α_2 ξ_2^(i-1)).

Eliminating the parameters from the first five cumulant equations leaves a
quartic g_s in s = ξ_1 + ξ_2 and a relation linear in p = ξ_1 ξ_2. Each root
s gives (ξ_1, ξ_2); the remaining parameters enter the moments linearly once
λ'_j = λ_j α_j are used. m_6 ranks the (at most four) candidates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateError, InsufficientMomentsError
from .moments import MomentSequence, as_moments, moments_to_cumulants


@dataclass(frozen=True)
class TwoMixCumulants:
    k1: complex | float
    k2: complex | float
    k3: complex | float
    k4: complex | float
    k5: complex | float
    k6: complex | float | None = None  # carried along, not used by the quartic

    @classmethod
    def from_moments(cls, m) -> "TwoMixCumulants":
        m = as_moments(m)
        if m.degree < 5:
            raise InsufficientMomentsError("need m_0..m_5 for k_1..k_5")
        k = moments_to_cumulants(m)
        return cls(*k.values[:5], k6=k.values[5] if m.degree >= 6 else None)

    def as_tuple(self):
        return (self.k1, self.k2, self.k3, self.k4, self.k5)


@dataclass(frozen=True)
class TwoMixParams:
    """(ξ_1, ξ_2, λ, α_1, α_2); α_j is None when its weight vanishes."""

    xi1: complex | float
    xi2: complex | float
    lam: complex | float
    alpha1: complex | float | None
    alpha2: complex | float | None
    residual_m6: float = math.nan
    boundary: bool = False

    def moments(self, d: int) -> np.ndarray:
        return two_mix_moments(self.xi1, self.xi2, self.lam, self.alpha1 or 0.0, self.alpha2 or 0.0, d)


def two_mix_moments(xi1, xi2, lam, alpha1, alpha2, d: int) -> np.ndarray:
    i = np.arange(d + 1)
    xi1, xi2 = np.asarray(xi1), np.asarray(xi2)

    def part(xi, a):
        # i·ξ^(i-1) with the i = 0 term dropped explicitly (ξ may be 0)
        low = np.concatenate([[0], i[1:] * xi ** (i[1:] - 1)])
        return xi**i + a * low

    return lam * part(xi1, alpha1) + (1 - lam) * part(xi2, alpha2)


def g_s_poly(k: TwoMixCumulants) -> np.ndarray:
    """Coefficients of g_s, highest power of s first."""
    k1, k2, k3, k4, k5 = k.as_tuple()
    c4 = 4 * k2**3 + k3**2
    c3 = -(32 * k1 * k2**3 + 24 * k2**2 * k3 + 8 * k1 * k3**2 + 4 * k3 * k4)
    c2 = (
        96 * k1**2 * k2**3 + 24 * k2**4 + 144 * k1 * k2**2 * k3 + 24 * k1**2 * k3**2
        + 36 * k2 * k3**2 + 20 * k2**2 * k4 + 24 * k1 * k3 * k4 + 4 * k4**2
        + 2 * k3 * k5
    )
    c1 = -(
        128 * k1**3 * k2**3 + 96 * k1 * k2**4 + 288 * k1**2 * k2**2 * k3 + 32 * k1**3 * k3**2
        + 80 * k2**3 * k3 + 144 * k1 * k2 * k3**2 + 80 * k1 * k2**2 * k4
        + 48 * k1**2 * k3 * k4 + 8 * k3**3 + 40 * k2 * k3 * k4 + 16 * k1 * k4**2
        + 8 * k2**2 * k5 + 8 * k1 * k3 * k5 + 4 * k4 * k5
    )
    c0 = (
        64 * k1**4 * k2**3 + 96 * k1**2 * k2**4 + 192 * k1**3 * k2**2 * k3 + 16 * k1**4 * k3**2
        + 160 * k1 * k2**3 * k3 + 144 * k1**2 * k2 * k3**2 + 80 * k1**2 * k2**2 * k4
        + 32 * k1**3 * k3 * k4 + 72 * k2**2 * k3**2 + 16 * k1 * k3**3 + 80 * k1 * k2 * k3 * k4
        + 16 * k1**2 * k4**2 + 16 * k1 * k2**2 * k5 + 8 * k1**2 * k3 * k5
        + 4 * k3**2 * k4 + 16 * k2 * k3 * k5 + 8 * k1 * k4 * k5 + k5**2
    )
    return np.array([c4, c3, c2, c1, c0])


def eval_g_s(s, k: TwoMixCumulants):
    return np.polyval(g_s_poly(k), s)


def p_from_s(s, k: TwoMixCumulants, rel_tol: float = 1e-12):
    """ξ_1ξ_2 from s through the relation linear in p.

    The relation is exact for centred data (k_1 = 0), so it is applied to
    s_c = s - 2k_1 and p_c = (ξ_1 - k_1)(ξ_2 - k_1) and shifted back.
    """
    k1, k2, k3, k4, k5 = k.as_tuple()
    sc = s - 2 * k1
    lin = 2 * sc * k2 - 2 * k3
    const = 6 * sc * k2**2 - sc**2 * k3 - 10 * k2 * k3 + 2 * sc * k4 - k5
    scale = max(abs(2 * sc * k2), abs(2 * k3), 1e-300)
    if lin == 0 or abs(lin) <= rel_tol * scale:
        raise DegenerateError(f"degenerate s={s}: the coefficient of p vanishes", {"s": s})
    pc = -const / lin
    return pc + k1 * s - k1**2


def g_s_roots(k: TwoMixCumulants, rel_tol: float = 1e-12) -> np.ndarray:
    """Roots of g_s, deflating vanishing leading coefficients."""
    coeffs = np.asarray(g_s_poly(k), dtype=complex)
    scale = np.max(np.abs(coeffs))
    if scale == 0:
        raise DegenerateError("g_s vanishes identically")
    lead = 0
    while lead < coeffs.size - 1 and abs(coeffs[lead]) < rel_tol * scale:
        lead += 1
    return np.roots(coeffs[lead:])


def _weights(xi1, xi2, m: np.ndarray) -> np.ndarray:
    """Least-squares (λ, λ'_1, λ'_2) from m_1..m_5 with m_i - ξ_2^i moved right."""
    i = np.arange(1, 6)
    A = np.column_stack([xi1**i - xi2**i, i * xi1 ** (i - 1), i * xi2 ** (i - 1)])
    b = m[1:6] - xi2**i
    sol, *_ = np.linalg.lstsq(A.astype(complex), b.astype(complex), rcond=None)
    return sol


def _polish(x: np.ndarray, m: np.ndarray, iters: int = 30) -> np.ndarray:
    """Newton on m_1..m_5 in (ξ_1, ξ_2, λ, λ'_1, λ'_2); keeps only improving steps."""
    i = np.arange(1, 6)

    def pw(z, e):
        return np.where(e >= 0, z ** np.maximum(e, 0), 0)

    def F(x):
        x1, x2, lam, l1, l2 = x
        return lam * x1**i + l1 * i * pw(x1, i - 1) + (1 - lam) * x2**i + l2 * i * pw(x2, i - 1) - m[1:6]

    def J(x):
        x1, x2, lam, l1, l2 = x
        return np.column_stack([
            lam * i * pw(x1, i - 1) + l1 * i * (i - 1) * pw(x1, i - 2),
            (1 - lam) * i * pw(x2, i - 1) + l2 * i * (i - 1) * pw(x2, i - 2),
            x1**i - x2**i,
            i * pw(x1, i - 1),
            i * pw(x2, i - 1),
        ])

    x = np.asarray(x, dtype=complex)
    res = np.linalg.norm(F(x))
    for _ in range(iters):
        try:
            step = np.linalg.solve(J(x), -F(x))
        except np.linalg.LinAlgError:
            break
        xn = x + step
        rn = np.linalg.norm(F(xn))
        if not rn < res:
            break
        x, res = xn, rn
    return x


def _clean(z, tol=1e-9):
    z = complex(z)
    return z.real if abs(z.imag) <= tol * (1 + abs(z)) else z


def recover_two_component(m, statistical: bool = False, rel_tol: float = 1e-12,
                          polish: bool = True) -> list[TwoMixParams]:
    """Candidate parameter tuples, best m_6 fit first.

    With ``statistical`` only tuples with real ξ_j and real λ in [0, 1] are
    kept. ``polish`` refines each candidate by Newton's method on the five
    moment equations, which recovers accuracy lost to nearly repeated roots
    of g_s.
    """
    m = as_moments(m)
    if m.degree < 6:
        raise InsufficientMomentsError("two-component elimination needs m_0..m_6")
    if abs(m.values[0] - 1) > 1e-12:
        raise ValueError("elimination expects a normalized sequence (m_0 = 1)")
    k = TwoMixCumulants.from_moments(m.truncate(6))
    mv = m.values.astype(complex)
    out: list[TwoMixParams] = []
    degenerate = 0
    for s in g_s_roots(k, rel_tol):
        try:
            p = p_from_s(s, k)
        except DegenerateError:
            degenerate += 1
            continue
        disc = np.sqrt(complex(s * s - 4 * p))
        xi1, xi2 = (s - disc) / 2, (s + disc) / 2
        if abs(xi1 - xi2) <= 1e-9 * (1 + abs(s)):
            degenerate += 1
            continue
        lam, l1, l2 = _weights(xi1, xi2, mv)
        if polish:
            xi1, xi2, lam, l1, l2 = _polish(np.array([xi1, xi2, lam, l1, l2]), mv)
        boundary = abs(lam) <= rel_tol or abs(1 - lam) <= rel_tol
        a1 = None if abs(lam) <= rel_tol else l1 / lam
        a2 = None if abs(1 - lam) <= rel_tol else l2 / (1 - lam)
        pred = (
            lam * xi1**6 + 6 * l1 * xi1**5 + (1 - lam) * xi2**6 + 6 * l2 * xi2**5
        )
        res = float(abs(pred - mv[6]))
        out.append(
            TwoMixParams(
                _clean(xi1), _clean(xi2), _clean(lam),
                None if a1 is None else _clean(a1),
                None if a2 is None else _clean(a2),
                res, boundary,
            )
        )
    plain = _plain_two_dirac(mv)
    if plain is not None:
        out.append(plain)
    if not out:
        raise DegenerateError(
            "every root of g_s is degenerate; use the general recovery instead",
            {"degenerate_roots": degenerate},
        )
    if statistical:
        out = [c for c in out if _is_statistical(c)]
    out.sort(key=lambda c: c.residual_m6)
    return out


def _plain_two_dirac(m: np.ndarray, rel_tol: float = 1e-9) -> TwoMixParams | None:
    """Two plain Diracs fitted to m_0..m_3, kept only if they explain m_4..m_6.

    With α_1 = α_2 = 0 the quartic has repeated roots and the moment map is
    singular, so this case is handled by Prony's method directly.
    """
    H = np.array([[m[0], m[1], m[2]], [m[1], m[2], m[3]]])
    _, sv, vh = np.linalg.svd(H)
    if sv[-1] <= rel_tol * sv[0]:
        return None
    v = np.conj(vh[-1])
    if v[2] == 0:
        return None
    xi1, xi2 = np.roots(v[::-1] / v[2])
    if abs(xi1 - xi2) <= 1e-9 * (1 + abs(xi1)):
        return None
    lam = (m[1] - xi2) / (xi1 - xi2)
    pred = two_mix_moments(xi1, xi2, lam, 0, 0, 6)
    err = np.abs(pred - m[:7])
    if np.max(err) > rel_tol * max(np.max(np.abs(m[:7])), 1.0):
        return None
    xi1, xi2 = sorted([xi1, xi2], key=lambda z: (z.real, z.imag))
    lam = (m[1] - xi2) / (xi1 - xi2)
    return TwoMixParams(_clean(xi1), _clean(xi2), _clean(lam), 0.0, 0.0, float(err[6]), False)


def _is_statistical(c: TwoMixParams, tol: float = 1e-9) -> bool:
    vals = [c.xi1, c.xi2, c.lam]
    if any(isinstance(v, complex) for v in vals):
        return False
    return -tol <= c.lam <= 1 + tol


def tuple_to_cumulants(xi1, xi2, lam, alpha1, alpha2, d: int = 5) -> TwoMixCumulants:
    m = MomentSequence(two_mix_moments(xi1, xi2, lam, alpha1, alpha2, max(d, 5)))
    return TwoMixCumulants.from_moments(m)
