"""Moment sequences and closed-form moment generators.

Covers local Dirac mixtures, the Pareto family, the moment/cumulant
transform and binomial (exponential generating function) convolution.
All routines work for real and complex scalars alike; the dtype of the
output follows the inputs.

Factorial-type coefficients are built by iterated multiplication in
floating point, which keeps them exact up to degree ~30.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

MAX_SUPPORTED_DEGREE = 30


def _as_scalar_array(values) -> np.ndarray:
    arr = np.asarray(values)
    if arr.ndim != 1:
        arr = arr.reshape(-1)
    if np.iscomplexobj(arr):
        return arr.astype(complex)
    return arr.astype(float)


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, copy=True)
    arr.setflags(write=False)
    return arr


def falling_factorial(n: int, k: int) -> float:
    """n!/(n-k)!, zero when k > n."""
    if k > n:
        return 0.0
    out = 1.0
    for q in range(n - k + 1, n + 1):
        out *= q
    return out


def binomial_row(n: int) -> np.ndarray:
    """Row n of Pascal's triangle as floats."""
    row = np.ones(n + 1)
    for k in range(1, n + 1):
        row[k] = row[k - 1] * (n - k + 1) / k
    return row


@dataclass(frozen=True, eq=False)
class MomentSequence:
    """Moments m_0..m_d. ``normalized`` asserts m_0 == 1 exactly."""

    values: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        arr = _as_scalar_array(self.values)
        if arr.size < 1:
            raise ValueError("a moment sequence needs at least m_0")
        if self.normalized and arr[0] != 1:
            raise ValueError(f"normalized sequence must have m_0 == 1, got {arr[0]!r}")
        object.__setattr__(self, "values", _frozen(arr))

    @property
    def degree(self) -> int:
        return self.values.size - 1

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.values)

    def __len__(self):
        return self.values.size

    def __getitem__(self, idx):
        return self.values[idx]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)

    def __repr__(self):
        return f"MomentSequence({self.values.tolist()!r}, normalized={self.normalized})"

    def truncate(self, d: int) -> "MomentSequence":
        if d > self.degree:
            raise ValueError(f"cannot truncate degree {self.degree} sequence to {d}")
        return MomentSequence(self.values[: d + 1], self.normalized)

    def scaled(self, c) -> "MomentSequence":
        return MomentSequence(self.values * c, normalized=False)

    @property
    def scale(self) -> float:
        return float(np.max(np.abs(self.values)))


@dataclass(frozen=True, eq=False)
class CumulantSequence:
    """Cumulants k_1..k_d; k_0 = 0 is implied and not stored."""

    values: np.ndarray

    def __post_init__(self):
        arr = _as_scalar_array(self.values)
        if arr.size < 1:
            raise ValueError("a cumulant sequence needs at least k_1")
        object.__setattr__(self, "values", _frozen(arr))

    @property
    def degree(self) -> int:
        return self.values.size

    def __len__(self):
        return self.values.size

    def __getitem__(self, idx):
        return self.values[idx]

    def k(self, i: int):
        """Cumulant by its mathematical index (k(0) == 0)."""
        return 0.0 if i == 0 else self.values[i - 1]


@dataclass(frozen=True, eq=False)
class DiracComponent:
    """One local Dirac: support point ``xi`` and coefficients of Λ(∂).

    ``lambdas[k]`` multiplies the k-th derivative of the Dirac at ``xi``.
    """

    xi: complex | float
    lambdas: np.ndarray

    def __post_init__(self):
        lam = _as_scalar_array(self.lambdas)
        if lam.size < 1:
            raise ValueError("a local Dirac needs at least one weight coefficient")
        object.__setattr__(self, "lambdas", _frozen(lam))

    @property
    def order(self) -> int:
        return self.lambdas.size - 1


@dataclass(frozen=True, eq=False)
class LocalDiracMixture:
    components: tuple[DiracComponent, ...]

    def __post_init__(self):
        comps = tuple(
            c if isinstance(c, DiracComponent) else DiracComponent(*c) for c in self.components
        )
        object.__setattr__(self, "components", comps)

    @classmethod
    def from_arrays(cls, xis: Sequence, lambdas: Sequence[Sequence]) -> "LocalDiracMixture":
        if len(xis) != len(lambdas):
            raise ValueError("xis and lambdas must have the same length")
        return cls(tuple(DiracComponent(x, lam) for x, lam in zip(xis, lambdas)))

    @property
    def r(self) -> int:
        return len(self.components)

    @property
    def xis(self) -> np.ndarray:
        return _as_scalar_array([c.xi for c in self.components])

    @property
    def orders(self) -> tuple[int, ...]:
        return tuple(c.order for c in self.components)

    def weight_matrix(self, order: int | None = None) -> np.ndarray:
        """Weights as an (r, l+1) array, zero padded to a common order."""
        l = max(self.orders, default=0) if order is None else order
        dtype = complex if any(np.iscomplexobj(c.lambdas) for c in self.components) else float
        out = np.zeros((self.r, l + 1), dtype=dtype)
        for j, c in enumerate(self.components):
            out[j, : c.lambdas.size] = c.lambdas[: l + 1]
        return out

    def check_normalized(self, atol: float = 1e-12) -> None:
        total = sum(c.lambdas[0] for c in self.components)
        if abs(total - 1) > atol:
            raise ValueError(f"leading weights sum to {total}, expected 1")

    def sorted(self, key=None) -> "LocalDiracMixture":
        key = key or (lambda c: (np.real(c.xi), np.imag(c.xi)))
        return LocalDiracMixture(tuple(sorted(self.components, key=key)))


@dataclass(frozen=True)
class ParetoParams:
    alpha: float
    xi: float

    def check_degree(self, d: int) -> None:
        a = self.alpha
        if np.isreal(a) and float(np.real(a)).is_integer() and 0 <= np.real(a) <= d:
            raise ValueError(f"alpha={a} is a pole of the moment formula for degree {d}")


def local_dirac_moments(mix: LocalDiracMixture, d: int) -> MomentSequence:
    """m_i = Σ_j Σ_k λ_{j,k} · i!/(i-k)! · ξ_j^(i-k) for i = 0..d."""
    if d < 0:
        raise ValueError("degree must be non-negative")
    complex_ = any(np.iscomplexobj(c.lambdas) or np.iscomplexobj(c.xi) for c in mix.components)
    out = np.zeros(d + 1, dtype=complex if complex_ else float)
    for comp in mix.components:
        xi = comp.xi
        for k, lam in enumerate(comp.lambdas):
            if lam == 0:
                continue
            for i in range(k, d + 1):
                out[i] += lam * falling_factorial(i, k) * xi ** (i - k)
    return MomentSequence(out)


def moments_to_cumulants(m: MomentSequence) -> CumulantSequence:
    """Cumulants from moments via K = log M on exponential generating functions.

    Uses M' = K'·M, i.e. m_n = Σ_{j=1}^{n} C(n-1, j-1) k_j m_{n-j}.
    """
    m = as_moments(m)
    if m.values[0] != 1:
        raise ValueError("cumulants require a normalized sequence (m_0 = 1)")
    if m.degree < 1:
        raise ValueError("need at least m_1 to form cumulants")
    mv = m.values
    d = m.degree
    k = np.zeros(d + 1, dtype=mv.dtype)
    for n in range(1, d + 1):
        row = binomial_row(n - 1)
        acc = mv[n]
        for j in range(1, n):
            acc = acc - row[j - 1] * k[j] * mv[n - j]
        k[n] = acc
    return CumulantSequence(k[1:])


def cumulants_to_moments(k: CumulantSequence) -> MomentSequence:
    """Inverse of :func:`moments_to_cumulants` (M = exp K)."""
    k = k if isinstance(k, CumulantSequence) else CumulantSequence(k)
    d = k.degree
    kv = np.concatenate([np.zeros(1, dtype=k.values.dtype), k.values])
    m = np.zeros(d + 1, dtype=kv.dtype)
    m[0] = 1
    for n in range(1, d + 1):
        row = binomial_row(n - 1)
        m[n] = sum(row[j - 1] * kv[j] * m[n - j] for j in range(1, n + 1))
    return MomentSequence(m, normalized=True)


def mgf_convolve(a: MomentSequence, b: MomentSequence) -> MomentSequence:
    """Moments of a sum of independent variables: c_k = Σ C(k,j) a_j b_{k-j}."""
    a, b = as_moments(a), as_moments(b)
    if a.degree != b.degree:
        raise ValueError(f"degree mismatch: {a.degree} vs {b.degree}")
    av, bv = a.values, b.values
    dtype = np.result_type(av, bv)
    out = np.zeros(a.degree + 1, dtype=dtype)
    for n in range(a.degree + 1):
        row = binomial_row(n)
        out[n] = np.sum(row * av[: n + 1] * bv[n::-1])
    return MomentSequence(out, normalized=a.normalized and b.normalized)


def mgf_deconvolve(c: MomentSequence, a: MomentSequence) -> MomentSequence:
    """Solve ``mgf_convolve(a, b) == c`` for b by forward substitution."""
    c, a = as_moments(c), as_moments(a)
    if a.values[0] == 0:
        raise ValueError("cannot deconvolve by a sequence with a_0 = 0")
    if a.degree < c.degree:
        raise ValueError("divisor sequence is shorter than the dividend")
    av, cv = a.values, c.values
    out = np.zeros(c.degree + 1, dtype=np.result_type(av, cv))
    for n in range(c.degree + 1):
        row = binomial_row(n)
        acc = cv[n]
        for j in range(n):
            acc = acc - row[j] * av[n - j] * out[j]
        out[n] = acc / av[0]
    return MomentSequence(out, normalized=bool(out[0] == 1))


def pareto_moments(p: ParetoParams, d: int) -> MomentSequence:
    """m_i = α/(α-i) · ξ^i."""
    p.check_degree(d)
    i = np.arange(d + 1)
    alpha, xi = p.alpha, p.xi
    out = alpha / (alpha - i) * np.asarray(xi) ** i
    out = np.asarray(out)
    out[0] = 1
    return MomentSequence(out, normalized=True)


def pareto_reparametrize(alpha, xi) -> ParetoParams:
    """(α, ξ) ↦ (-ξ/α, 1/ξ).

    Under this map the Pareto moments become 1/(ξ^i + iαξ^(i-1)), the
    reciprocals of first-order local Dirac moments.
    """
    if alpha == 0 or xi == 0:
        raise ValueError("reparametrization needs nonzero alpha and xi")
    return ParetoParams(alpha=-xi / alpha, xi=1 / xi)


def gaussian_moments(sd: float, d: int, mean: float = 0.0) -> MomentSequence:
    """Raw moments of N(mean, sd²) up to degree d."""
    central = np.zeros(d + 1)
    central[0] = 1.0
    for n in range(2, d + 1, 2):
        central[n] = central[n - 2] * (n - 1) * sd**2
    if mean == 0:
        return MomentSequence(central, normalized=True)
    shift = MomentSequence(np.asarray(float(mean)) ** np.arange(d + 1), normalized=True)
    return mgf_convolve(MomentSequence(central, normalized=True), shift)


def as_moments(m) -> MomentSequence:
    if isinstance(m, MomentSequence):
        return m
    return MomentSequence(m)


def mixture_of(xis: Iterable, lambdas: Iterable) -> LocalDiracMixture:
    return LocalDiracMixture.from_arrays(list(xis), [list(np.atleast_1d(l)) for l in lambdas])
