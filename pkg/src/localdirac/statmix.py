"""Local Gaussian mixtures: density, sampling and moment-based estimation.

Component j has density

    ψ_j(x) = φ(x - ξ_j) + Σ_{k=1}^{l} α_{j,k} φ^{(k)}(x - ξ_j),

with φ the N(0, σ²) density and φ^{(k)} its k-th derivative. The mixture is
Σ λ_j ψ_j. Integrating by parts, its moments are the binomial convolution of
the base moments with the moments of the local Dirac mixture whose weights
are λ_{j,k} = λ_j (-1)^k α_{j,k}. Estimation divides the base moments out
again and runs the local Dirac recovery.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import hermite_e as He

from .errors import DegenerateError, DensityError
from .moments import (
    LocalDiracMixture,
    MomentSequence,
    as_moments,
    binomial_row,
    falling_factorial,
    gaussian_moments,
    local_dirac_moments,
    mgf_convolve,
    mgf_deconvolve,
    mixture_of,
)
from .recovery import RecoveryConfig, recover


@dataclass(frozen=True, eq=False)
class LocalGaussianMixture:
    """Locations ``xis``, derivative coefficients ``alphas[j] = (α_{j,1}, ..., α_{j,l})``,
    mixing weights ``weights`` and base standard deviation ``sd``."""

    xis: np.ndarray
    alphas: tuple
    weights: np.ndarray
    sd: float = 1.0

    def __post_init__(self):
        xis = np.asarray(self.xis, dtype=float).reshape(-1)
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        al = tuple(np.asarray(a, dtype=float).reshape(-1) for a in self.alphas)
        if not (xis.size == w.size == len(al)) or xis.size == 0:
            raise ValueError("xis, alphas and weights must have the same nonzero length")
        if np.any(w < 0) or abs(w.sum() - 1) > 1e-9:
            raise ValueError(f"weights must be non-negative and sum to 1, got {w.tolist()}")
        if self.sd <= 0:
            raise ValueError("sd must be positive")
        object.__setattr__(self, "xis", xis)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "alphas", al)

    @classmethod
    def two_component(cls, xi1, a1, xi2, a2, lam, sd=1.0):
        return cls([xi1, xi2], (a1, a2), [lam, 1 - lam], sd)

    @property
    def r(self) -> int:
        return self.xis.size

    @property
    def order(self) -> int:
        return max((a.size for a in self.alphas), default=0)

    def dirac_mixture(self) -> LocalDiracMixture:
        """The signed local Dirac mixture whose convolution with φ gives the moments."""
        lams = []
        for w, a in zip(self.weights, self.alphas):
            signs = (-1.0) ** np.arange(1, a.size + 1)
            lams.append(np.concatenate([[w], w * signs * a]))
        return mixture_of(self.xis, lams)

    def to_dict(self) -> dict:
        return {
            "xis": self.xis.tolist(),
            "alphas": [a.tolist() for a in self.alphas],
            "weights": self.weights.tolist(),
            "sd": self.sd,
        }


def _component_density(u: np.ndarray, alphas: np.ndarray, sd: float) -> np.ndarray:
    """φ(u) + Σ α_k φ^{(k)}(u); φ^{(k)}(u) = (-1)^k σ^{-k} He_k(u/σ) φ(u)."""
    z = u / sd
    coeffs = np.zeros(alphas.size + 1)
    coeffs[0] = 1.0
    for k, a in enumerate(alphas, start=1):
        coeffs[k] = a * (-1.0) ** k / sd**k
    base = np.exp(-0.5 * z * z) / (sd * math.sqrt(2 * math.pi))
    return base * He.hermeval(z, coeffs)


def density(lg: LocalGaussianMixture, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    for xi, a, w in zip(lg.xis, lg.alphas, lg.weights):
        out = out + w * _component_density(x - xi, a, lg.sd)
    return out


def check_nonnegative(lg: LocalGaussianMixture, n_grid: int = 20001, width: float = 12.0) -> float:
    """Minimum of every component density on a grid of ±width·σ around its centre."""
    worst = math.inf
    u = np.linspace(-width * lg.sd, width * lg.sd, n_grid)
    for a in lg.alphas:
        worst = min(worst, float(np.min(_component_density(u, a, lg.sd))))
    return worst


def analytic_moments(lg: LocalGaussianMixture, d: int) -> MomentSequence:
    """m_n = Σ_j λ_j [E(ξ_j+Z)^n + Σ_k (-1)^k α_{j,k} ∂_ξ^k E(ξ_j+Z)^n], Z ~ N(0, σ²)."""
    mu = gaussian_moments(lg.sd, d).values
    out = np.zeros(d + 1)
    for xi, a, w in zip(lg.xis, lg.alphas, lg.weights):
        coef = np.concatenate([[1.0], (-1.0) ** np.arange(1, a.size + 1) * a])
        for n in range(d + 1):
            row = binomial_row(n)
            acc = 0.0
            for k, c in enumerate(coef):
                if c == 0:
                    continue
                # ∂_ξ^k Σ_j C(n,j) ξ^j μ_{n-j}
                for j in range(k, n + 1):
                    acc += c * row[j] * falling_factorial(j, k) * xi ** (j - k) * mu[n - j]
            out[n] += w * acc
    return MomentSequence(out)


def convolved_moments(lg: LocalGaussianMixture, d: int) -> MomentSequence:
    """Same moments via binomial convolution of base and signed Dirac moments."""
    return mgf_convolve(gaussian_moments(lg.sd, d), local_dirac_moments(lg.dirac_mixture(), d))


def sample(lg: LocalGaussianMixture, n: int, seed: int = 0, inflate: float = 1.5,
           n_grid: int = 20001, width: float = 12.0) -> np.ndarray:
    """n draws by rejection sampling, one Gaussian proposal per component.

    A component is picked with probability λ_j; its density ψ_j is sampled
    with proposal N(ξ_j, (inflate·σ)²) and bound sup ψ_j/q_j taken on a grid
    (with 5% headroom). Negative densities or bound violations abort.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    if inflate <= 1:
        raise ValueError("inflate must exceed 1")
    rng = np.random.default_rng(seed)
    sd_q = inflate * lg.sd
    u = np.linspace(-width * lg.sd, width * lg.sd, n_grid)
    q_grid = np.exp(-0.5 * (u / sd_q) ** 2) / (sd_q * math.sqrt(2 * math.pi))
    bounds = []
    for j, a in enumerate(lg.alphas):
        psi = _component_density(u, a, lg.sd)
        if psi.min() < -1e-15:
            raise DensityError(
                f"component {j} density is negative (min {psi.min():.3e})",
                {"component": j, "min_density": float(psi.min())},
            )
        bounds.append(1.05 * float(np.max(psi / q_grid)))

    counts = rng.multinomial(n, lg.weights)
    out = []
    for j, (xi, a, cnt) in enumerate(zip(lg.xis, lg.alphas, counts)):
        got: list[np.ndarray] = []
        need = int(cnt)
        while need > 0:
            batch = max(64, int(need * bounds[j] * 1.2))
            z = rng.normal(scale=sd_q, size=batch)
            q = np.exp(-0.5 * (z / sd_q) ** 2) / (sd_q * math.sqrt(2 * math.pi))
            psi = _component_density(z, a, lg.sd)
            ratio = psi / (bounds[j] * q)
            if np.any(ratio > 1) or np.any(psi < 0):
                raise DensityError(
                    f"rejection envelope violated for component {j}",
                    {"component": j, "max_ratio": float(ratio.max()), "min_density": float(psi.min())},
                )
            acc = z[rng.uniform(size=batch) < ratio][:need]
            got.append(acc + xi)
            need -= acc.size
        out.append(np.concatenate(got) if got else np.zeros(0))
    xs = np.concatenate(out)
    return rng.permutation(xs)


def empirical_moments(xs, d: int) -> MomentSequence:
    xs = np.asarray(xs, dtype=float).reshape(-1)
    if xs.size == 0:
        raise ValueError("empty sample")
    if d < 0:
        raise ValueError("degree must be non-negative")
    out = np.empty(d + 1)
    out[0] = 1.0
    p = np.ones_like(xs)
    for i in range(1, d + 1):
        p = p * xs
        out[i] = p.mean()
    return MomentSequence(out, normalized=True)


@dataclass
class Estimate:
    mixture: LocalGaussianMixture | None
    xis: np.ndarray
    weights: np.ndarray
    alphas: list
    diagnostics: dict


def _alphas_from_lambdas(lam: np.ndarray) -> np.ndarray:
    return (-1.0) ** np.arange(1, lam.size) * lam[1:] / lam[0]


def density_filter(sd: float = 1.0, tol: float = 1e-9):
    """Candidate predicate: every component density φ + Σ α_k φ^{(k)} is non-negative."""
    u = np.linspace(-12 * sd, 12 * sd, 4001)
    peak = 1 / (sd * math.sqrt(2 * math.pi))

    def ok(xis, weights) -> bool:
        for w in weights:
            w = np.asarray(w)
            if np.iscomplexobj(w) or w[0] == 0:
                return False
            if np.min(_component_density(u, _alphas_from_lambdas(w), sd)) < -tol * peak:
                return False
        return True

    return ok


def likelihood_score(xs, sd: float = 1.0, floor: float = 1e-300):
    """Candidate score: negative mean log-likelihood of the sample ``xs``.

    Densities below ``floor`` (including negative ones) are clipped, so
    candidates that are not valid mixtures are heavily penalised rather than
    rejected. Complex candidates score +inf.
    """
    xs = np.asarray(xs, dtype=float).reshape(-1)

    def score(xis, weights) -> float:
        if np.iscomplexobj(xis) or any(np.iscomplexobj(w) for w in weights):
            return math.inf
        total = sum(float(w[0]) for w in weights)
        if total == 0:
            return math.inf
        dens = np.zeros_like(xs)
        for xi, w in zip(xis, weights):
            w = np.asarray(w, dtype=float)
            if w[0] == 0:
                return math.inf
            dens += w[0] / total * _component_density(xs - xi, _alphas_from_lambdas(w), sd)
        return float(-np.mean(np.log(np.maximum(dens, floor))))

    return score


def estimate(lg_moments, r: int, l: int, base_moments=None, cfg: RecoveryConfig | None = None,
             sd: float = 1.0, require_density: bool = False, sample_xs=None) -> Estimate:
    """Local Gaussian mixture parameters from its moments.

    ``base_moments`` are the moments of φ (standard normal scaled by ``sd``
    when omitted). ``require_density`` keeps only candidates whose component
    densities are non-negative, i.e. valid local mixtures. With
    ``sample_xs`` the candidates of the moment system are ranked by the
    sample likelihood instead of the extra-moment residual, which is far
    less sensitive to the noise of high empirical moments. Weights are
    renormalised to sum to one; ``mixture`` is None when the estimate is not
    a valid mixture (negative or complex weights).
    """
    m = as_moments(lg_moments)
    cfg = cfg or RecoveryConfig()
    base = gaussian_moments(sd, m.degree) if base_moments is None else as_moments(base_moments)
    if base.values[0] == 0:
        raise ValueError("base moments must have m_0 != 0")
    if abs(base.values[0] - 1) > 1e-12:
        raise ValueError("base moments must be normalized")
    dirac = mgf_deconvolve(m, base)
    res = recover(
        dirac, r, l, cfg,
        accept=density_filter(sd) if require_density else None,
        score=None if sample_xs is None else likelihood_score(sample_xs, sd),
    )
    xis, weights, alphas = [], [], []
    for comp in res.mixture.components:
        lam = comp.lambdas
        if abs(lam[0]) <= 1e-12:
            raise DegenerateError("a component has vanishing weight; α is undefined", res.diagnostics)
        xis.append(comp.xi)
        weights.append(lam[0])
        alphas.append(_alphas_from_lambdas(lam))
    xis = np.asarray(xis)
    weights = np.asarray(weights)
    total = weights.sum()
    diag = dict(res.diagnostics)
    diag["weight_sum"] = complex(total) if np.iscomplexobj(total) else float(total)
    weights = weights / total
    mix = None
    if not np.iscomplexobj(xis) and not np.iscomplexobj(weights) and np.all(weights >= 0):
        if not any(np.iscomplexobj(a) for a in alphas):
            mix = LocalGaussianMixture(xis, tuple(alphas), weights, sd)
    return Estimate(mix, xis, weights, alphas, diag)


def sample_config(seed: int = 0, **kw) -> RecoveryConfig:
    """Recovery settings suited to noisy empirical moments."""
    opts = dict(seed=seed, statistical=True, on_ambiguity="warn", selector_tol=None)
    opts.update(kw)
    return RecoveryConfig(**opts)


REFERENCE_MIXTURE = LocalGaussianMixture.two_component(-1.0, [0.1, 0.4], 2.0, [-0.2, 0.6], 0.6)
