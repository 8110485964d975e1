"""Truncated Hankel moment matrices, numerical rank and kernel generators."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InsufficientMomentsError, RankConditionError
from .moments import MomentSequence, as_moments

DEFAULT_RANK_TOL = 1e-8
NOISELESS_RANK_TOL = 1e-13


@dataclass(frozen=True, eq=False)
class HankelMatrix:
    """The (a+1) x (b+1) matrix with entries m_{i+j}."""

    entries: np.ndarray
    a: int
    b: int
    source: MomentSequence

    @property
    def shape(self):
        return self.entries.shape

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)


def hankel_entries(values: np.ndarray, a: int, b: int) -> np.ndarray:
    idx = np.arange(a + 1)[:, None] + np.arange(b + 1)[None, :]
    return np.asarray(values)[idx]


def moment_matrix(m, a: int, b: int) -> HankelMatrix:
    m = as_moments(m)
    if a < 0 or b < 0:
        raise ValueError("matrix degrees must be non-negative")
    if len(m) < a + b + 1:
        raise InsufficientMomentsError(
            f"M_{{{a},{b}}} needs moments up to m_{a + b}, have up to m_{m.degree}"
        )
    entries = hankel_entries(m.values, a, b)
    entries.setflags(write=False)
    return HankelMatrix(entries, a, b, m)


def equilibrate(A: np.ndarray) -> np.ndarray:
    """Scale rows, then columns, to unit 2-norm (zero lines are left alone).

    A diagonal congruence preserves rank but removes the geometric growth of
    m_i, which otherwise buries the smallest true singular values.
    """
    A = np.asarray(A)
    rn = np.linalg.norm(A, axis=1)
    A = A / np.where(rn > 0, rn, 1.0)[:, None]
    cn = np.linalg.norm(A, axis=0)
    return A / np.where(cn > 0, cn, 1.0)[None, :]


def numeric_rank(h, rel_tol: float = DEFAULT_RANK_TOL, equilibrated: bool = True) -> int:
    """Number of singular values above ``rel_tol`` times the largest.

    By default the SVD is taken of the row/column equilibrated matrix. For
    exact (noiseless) double precision moments :data:`NOISELESS_RANK_TOL` is
    the appropriate threshold; the default suits mildly perturbed data.
    """
    if not 0 < rel_tol < 1:
        raise ValueError("rel_tol must lie in (0, 1)")
    A = np.asarray(h)
    if A.size == 0:
        return 0
    if equilibrated:
        A = equilibrate(A)
    sv = np.linalg.svd(A, compute_uv=False)
    if sv[0] == 0:
        return 0
    return int(np.sum(sv > rel_tol * sv[0]))


def rank_profile(m, s_max: int | None = None, rel_tol: float = DEFAULT_RANK_TOL) -> list[int]:
    """Numerical ranks of M_{s,s} for s = 0..s_max."""
    m = as_moments(m)
    top = m.degree // 2 if s_max is None else min(s_max, m.degree // 2)
    return [numeric_rank(moment_matrix(m, s, s), rel_tol) for s in range(top + 1)]


def kernel_polynomial(m, s: int, rel_tol: float = DEFAULT_RANK_TOL, rank: int | None = None) -> np.ndarray:
    """Monic generator of k[X]·ker M_{s-1,s}, coefficients in ascending order.

    Requires rank M_{s-1,s-1} == rank M_{s,s}; the generator then has degree
    equal to that common rank and its roots, with multiplicity, are the
    support points ξ_j repeated 1 + deg Λ_j times.

    When the total multiplicity is known in advance, pass it as ``rank``:
    the rank check is skipped and only m_0..m_{2s-1} are needed.
    """
    m = as_moments(m)
    if s < 1:
        raise ValueError("s must be at least 1")
    if rank is not None:
        if not 0 <= rank <= s:
            raise ValueError("rank must lie in [0, s]")
        if len(m) < s + rank:
            raise InsufficientMomentsError(f"kernel at s={s}, rank={rank} needs m_0..m_{s + rank - 1}")
        return _kernel_generator(m, s, rank)
    if len(m) < 2 * s + 1:
        raise InsufficientMomentsError(f"kernel at s={s} needs m_0..m_{2 * s}")
    r_small = numeric_rank(moment_matrix(m, s - 1, s - 1), rel_tol)
    r_big = numeric_rank(moment_matrix(m, s, s), rel_tol)
    if r_small != r_big:
        raise RankConditionError(
            f"insufficient or inconsistent moments: rank M_{{s-1,s-1}}={r_small}, "
            f"rank M_{{s,s}}={r_big} at s={s}"
        )
    return _kernel_generator(m, s, r_big)


def _kernel_generator(m: MomentSequence, s: int, rank: int) -> np.ndarray:
    if rank == 0:
        return np.ones(1, dtype=m.values.dtype)
    # Polynomials of degree <= rank meet the kernel in a single line.
    sub = hankel_entries(m.values, s - 1, rank)
    _, _, vh = np.linalg.svd(sub)
    v = np.conj(vh[-1])
    if abs(v[-1]) < 1e-300:
        raise RankConditionError("kernel vector has vanishing leading coefficient")
    coeffs = v / v[-1]
    if not np.iscomplexobj(m.values):
        coeffs = coeffs.real
    return coeffs
