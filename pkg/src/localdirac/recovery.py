"""Parameter recovery for mixtures of local Dirac measures.

Two routes are provided:

``recover``
    The minimal-moment route. The monic polynomial p = Π(X - ξ_j) solves the
    r equations M_{r-1,(l+1)r} · coeffs(p^{l+1}) = 0, which needs only
    m_0..m_{(l+2)r-1}. The system generically has (l+1)^r isolated solutions;
    the extra row of M_{r,(l+1)r} (one more moment) picks out the true one.

``prony_linear``
    Prony's method with multiplicities: the kernel of a Hankel matrix whose
    rank has stabilised. Needs about twice as many moments but is linear
    and handles components of different orders.

Weights follow from a confluent Vandermonde least-squares solve in both
cases.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.cluster.hierarchy import fcluster, linkage

from .errors import (
    AmbiguityError,
    ConvergenceError,
    DegenerateError,
    InsufficientMomentsError,
)
from .hankel import hankel_entries, kernel_polynomial, rank_profile
from .moments import LocalDiracMixture, MomentSequence, as_moments, falling_factorial
from .solvers import newton_batch, track_total_degree

log = logging.getLogger(__name__)


@dataclass
class RecoveryConfig:
    """Knobs for the numerical recovery.

    ``solver`` is ``"homotopy"`` (all isolated solutions via total-degree
    continuation), ``"newton"`` (multi-start damped Newton) or ``"auto"``,
    which uses homotopy while the Bézout count stays within ``max_paths``.
    """

    starts: int = 200
    max_iter: int = 100
    newton_tol: float = 1e-12
    cluster_tol: float = 1e-6
    rank_tol: float = 1e-8
    accept_ratio: float = 100.0
    seed: int = 0
    solver: str = "auto"
    max_paths: int = 4096
    selector_tol: float | None = 1e-6
    on_ambiguity: str = "raise"
    statistical: bool = False
    workers: int = 1

    def __post_init__(self):
        for name in ("starts", "max_iter", "newton_tol", "cluster_tol", "rank_tol", "max_paths", "workers"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.accept_ratio <= 1:
            raise ValueError("accept_ratio must exceed 1")
        if self.solver not in ("auto", "homotopy", "newton"):
            raise ValueError(f"unknown solver {self.solver!r}")
        if self.on_ambiguity not in ("raise", "warn"):
            raise ValueError("on_ambiguity must be 'raise' or 'warn'")


@dataclass
class CandidateSolution:
    """Monic p = X^r + Σ p_i X^i with its residual diagnostics."""

    p: np.ndarray
    residual_primary: float
    residual_selector: float = math.nan

    @property
    def monic(self) -> np.ndarray:
        return np.concatenate([self.p, [1.0]])

    def roots(self) -> np.ndarray:
        return P.polyroots(self.monic)


@dataclass
class RecoveryResult:
    mixture: LocalDiracMixture
    diagnostics: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# the power system  M_{rows-1,(l+1)r} · coeffs(p^{l+1}) = 0


def _batched_convolve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    S, na = a.shape
    nb = b.shape[1]
    out = np.zeros((S, na + nb - 1), dtype=np.result_type(a, b))
    for i in range(na):
        out[:, i : i + nb] += a[:, i : i + 1] * b
    return out


def _powers(X: np.ndarray, e: int) -> tuple[np.ndarray, np.ndarray]:
    """Coefficients of p^(e-1) and p^e for monic p with low coefficients X."""
    full = np.concatenate([X, np.ones((X.shape[0], 1), dtype=X.dtype)], axis=1)
    lower = np.ones((X.shape[0], 1), dtype=X.dtype)
    for _ in range(e - 1):
        lower = _batched_convolve(lower, full)
    return lower, _batched_convolve(lower, full)


class PowerSystem:
    """Batched residual/Jacobian of H · coeffs(p^e) for monic p of degree r."""

    def __init__(self, H: np.ndarray, r: int, e: int):
        if H.shape[1] != e * r + 1:
            raise ValueError("matrix width must be (l+1)r + 1")
        self.H = np.asarray(H, dtype=complex)
        self.r, self.e = r, e

    def __call__(self, X: np.ndarray):
        X = np.asarray(X, dtype=complex)
        lower, c = _powers(X, self.e)
        F = c @ self.H.T
        w = (self.e - 1) * self.r + 1
        J = np.stack(
            [self.e * (lower @ self.H[:, i : i + w].T) for i in range(self.r)], axis=-1
        )
        return F, J

    def residual(self, X: np.ndarray) -> np.ndarray:
        _, c = _powers(np.asarray(X, dtype=complex), self.e)
        return c @ self.H.T


def _check_rl(r: int, l: int):
    if r < 1:
        raise ValueError("need at least one component")
    if l < 0:
        raise ValueError("order must be non-negative")


def power_system_residual(m, r: int, l: int, p, rows: int | None = None) -> np.ndarray:
    """M_{rows-1,(l+1)r} · coeffs(p^{l+1}) with p = X^r + Σ p_i X^i.

    ``p`` holds p_0..p_{r-1}; ``rows`` defaults to r.
    """
    m = as_moments(m)
    _check_rl(r, l)
    rows = r if rows is None else rows
    width = (l + 1) * r
    if m.degree < rows - 1 + width:
        raise InsufficientMomentsError(f"need moments up to m_{rows - 1 + width}")
    H = hankel_entries(m.values, rows - 1, width)
    out = PowerSystem(H, r, l + 1).residual(np.atleast_2d(np.asarray(p)))[0]
    if not np.iscomplexobj(m.values) and not np.iscomplexobj(p):
        out = out.real
    return out


def power_system_jacobian(m, r: int, l: int, p, rows: int | None = None) -> np.ndarray:
    """Analytic Jacobian using ∂(p^{l+1})/∂p_i = (l+1) p^l X^i."""
    m = as_moments(m)
    rows = r if rows is None else rows
    H = hankel_entries(m.values, rows - 1, (l + 1) * r)
    J = PowerSystem(H, r, l + 1)(np.atleast_2d(np.asarray(p)))[1][0]
    if not np.iscomplexobj(m.values) and not np.iscomplexobj(p):
        J = J.real
    return J


# ---------------------------------------------------------------------------
# solving


def _root_radius(values: np.ndarray) -> float:
    mags = np.abs(values)
    top = mags.max() if mags.size else 0.0
    if top == 0:
        return 1.0
    ok = np.flatnonzero(mags[:-1] >= 1e-8 * top)
    ratios = mags[ok + 1] / mags[ok]
    rho = float(ratios.max()) if ratios.size else 1.0
    return max(rho, 1e-3) if np.isfinite(rho) else 1.0


def _random_starts(rng: np.random.Generator, count: int, r: int, radius: float) -> np.ndarray:
    rad = radius * np.sqrt(rng.uniform(size=(count, r)))
    roots = rad * np.exp(2j * np.pi * rng.uniform(size=(count, r)))
    return np.array([P.polyfromroots(z)[:-1] for z in roots], dtype=complex)


def _dedupe(X: np.ndarray, scores: np.ndarray, tol: float) -> np.ndarray:
    """Indices of cluster representatives, best score first."""
    keep: list[int] = []
    for i in np.argsort(scores, kind="stable"):
        xi = X[i]
        radius = tol * (1 + np.linalg.norm(xi))
        if all(np.linalg.norm(xi - X[k]) > radius for k in keep):
            keep.append(int(i))
    return np.array(keep, dtype=int)


def _accurate(system, X, e, tol=1e-8):
    """Keep points whose residual is small relative to the size of p^e."""
    if len(X) == 0:
        return X, np.zeros(0)
    F = system.residual(X)
    _, c = _powers(X, e)
    rel = np.linalg.norm(F, axis=1) / np.maximum(np.linalg.norm(c, axis=1), 1.0)
    ok = rel <= tol
    return X[ok], rel[ok]


def _cluster_means(X: np.ndarray, tol: float) -> list[np.ndarray]:
    clusters: list[list[np.ndarray]] = []
    for x in X:
        for cl in clusters:
            if np.linalg.norm(np.mean(cl, axis=0) - x) <= tol * (1 + np.linalg.norm(x)):
                cl.append(x)
                break
        else:
            clusters.append([x])
    return [np.mean(cl, axis=0) for cl in clusters]


def _newton_parallel(system, starts, cfg: RecoveryConfig):
    if cfg.workers == 1 or len(starts) < 2 * cfg.workers:
        return newton_batch(system, starts, max_iter=cfg.max_iter, tol=cfg.newton_tol)
    chunks = np.array_split(starts, cfg.workers)
    with ThreadPoolExecutor(cfg.workers) as pool:
        parts = list(
            pool.map(
                lambda c: newton_batch(system, c, max_iter=cfg.max_iter, tol=cfg.newton_tol),
                chunks,
            )
        )
    return tuple(np.concatenate(x) for x in zip(*parts))


def _solve_rows(values, r, l, rows, cfg, rng, seeds=None):
    """Solve with ``rows`` matrix rows; returns (points, positive_dim, info)."""
    width = (l + 1) * r
    H = hankel_entries(values, rows - 1, width)
    pivot = values[np.argmax(np.abs(values))]
    if pivot == 0:
        raise DegenerateError("all moments vanish")
    system = PowerSystem(H / pivot, r, l + 1)
    bezout = (l + 1) ** r
    info: dict = {"rows": rows}

    use_homotopy = rows == r and (
        cfg.solver == "homotopy" or (cfg.solver == "auto" and bezout <= cfg.max_paths)
    )
    if use_homotopy:
        paths = track_total_degree(system, r, l + 1, rng)
        # Paths that stall right at the end are heading for singular solutions.
        landed = (paths.status == "finite") | (
            (paths.status == "failed") & (paths.t_final > 1 - 1e-4)
        )
        regular = landed & ~paths.singular
        singular = landed & paths.singular
        X_reg = paths.endpoints[regular]
        X_sing = paths.endpoints[singular]
        if len(X_sing):
            X_sing, _, _ = newton_batch(system, X_sing, max_iter=cfg.max_iter, tol=cfg.newton_tol)
        X_reg, rel_reg = _accurate(system, X_reg, l + 1)
        X_sing, rel_sing = _accurate(system, X_sing, l + 1, tol=1e-6)
        keep = _dedupe(X_reg, rel_reg, cfg.cluster_tol)
        sing_clusters = _cluster_means(X_sing, math.sqrt(cfg.cluster_tol))
        n_sing = int(np.sum(paths.singular))
        info.update(
            solver="homotopy",
            paths=int(paths.status.size),
            finite=int(np.sum(paths.status == "finite")),
            diverged=int(np.sum(paths.status == "diverged")),
            singular=n_sing,
            singular_clusters=len(sing_clusters),
            steps=paths.steps,
        )
        positive_dim = n_sing > 0.3 * paths.status.size and len(sing_clusters) > 0.5 * n_sing
        X = X_reg[keep]
        if len(sing_clusters):
            extra = [z for z in sing_clusters
                     if all(np.linalg.norm(z - x) > cfg.cluster_tol * (1 + np.linalg.norm(z)) for x in X)]
            if extra:
                X = np.concatenate([X, np.array(extra)])
        return X, positive_dim, info

    starts = _random_starts(rng, cfg.starts, r, 2 * _root_radius(values))
    if seeds is not None and len(seeds):
        starts = np.concatenate([np.asarray(seeds, dtype=complex), starts])
    X, conv, res = _newton_parallel(system, starts, cfg)
    X, res = X[conv], res[conv]
    keep = _dedupe(X, res, cfg.cluster_tol)
    info.update(solver="newton", starts=int(len(starts)), converged=int(conv.sum()))
    positive_dim = bool(len(keep) > bezout and len(keep) > 0.3 * max(int(conv.sum()), 1))
    return X[keep], positive_dim, info


def _candidate(values, r, l, p, rows) -> CandidateSolution:
    width = (l + 1) * r
    _, c = _powers(np.atleast_2d(p), l + 1)
    c = c[0]
    prim = np.linalg.norm(hankel_entries(values, rows - 1, width) @ c)
    sel = math.nan
    if len(values) > rows + width:
        sel = np.linalg.norm(hankel_entries(values, rows, width) @ c)
    return CandidateSolution(np.asarray(p), float(prim), float(sel))


def solve_minimal_system(m, r: int, l: int, cfg: RecoveryConfig | None = None) -> list[CandidateSolution]:
    """All distinct solutions p of the power system found by the numerical solver.

    Adds matrix rows while the solution set looks positive dimensional.
    Candidates come back ordered by selector residual when the selector
    moment is available, otherwise by primary residual.
    """
    cands, _ = _solve_minimal(m, r, l, cfg or RecoveryConfig())
    return cands


def _solve_minimal(m, r, l, cfg):
    m = as_moments(m)
    _check_rl(r, l)
    width = (l + 1) * r
    if m.degree < (l + 2) * r - 1:
        raise InsufficientMomentsError(
            f"r={r}, l={l} needs m_0..m_{(l + 2) * r - 1}, have up to m_{m.degree}"
        )
    values = m.values
    rng = np.random.default_rng(cfg.seed)
    rows = r
    seeds = None
    history = []
    while True:
        X, positive_dim, info = _solve_rows(values, r, l, rows, cfg, rng, seeds)
        history.append(info)
        if not positive_dim:
            break
        log.info("solution set looks positive dimensional with %d rows; adding a row", rows)
        rows += 1
        if rows - 1 + width > m.degree:
            raise InsufficientMomentsError(
                "solution set is positive dimensional and no further moments are available",
            )
        seeds = X
    if len(X) == 0:
        raise ConvergenceError("no convergent solutions", {"solver": history})
    cands = [_candidate(values, r, l, p, rows) for p in X]
    key = (lambda c: c.residual_selector) if not math.isnan(cands[0].residual_selector) else (
        lambda c: c.residual_primary
    )
    cands.sort(key=key)
    return cands, {"rows": rows, "solver": history, "bezout": (l + 1) ** r}


def select_candidate(cands, m, r: int, l: int, cfg: RecoveryConfig | None = None,
                     return_ranking: bool = False):
    """Candidate with the smallest selector residual ‖M_{r,(l+1)r} · coeffs(p^{l+1})‖.

    Raises :class:`AmbiguityError` unless the runner-up is at least
    ``accept_ratio`` times worse (or logs a warning when
    ``cfg.on_ambiguity == "warn"``). A tie on m_{(l+2)r} is retried with
    every available later moment. ``return_ranking`` also returns the
    candidates in the order used for the decision.
    """
    cfg = cfg or RecoveryConfig()
    m = as_moments(m)
    if not cands:
        raise ValueError("no candidates to select from")
    if len(cands) == 1:
        return (cands[0], list(cands)) if return_ranking else cands[0]
    if any(math.isnan(c.residual_selector) for c in cands):
        if m.degree < (l + 2) * r:
            raise InsufficientMomentsError(f"selection needs m_{(l + 2) * r}")
        rows = r
        cands = [_candidate(m.values, r, l, c.p, rows) for c in cands]
    ranked = sorted(cands, key=lambda c: c.residual_selector)
    best, second = ranked[0], ranked[1]
    width = (l + 1) * r
    extra_rows = m.degree - width
    if not best.residual_selector * cfg.accept_ratio <= second.residual_selector and extra_rows > r:
        # a tie on m_{(l+2)r} alone is non-generic; later moments usually break it
        log.info("selector tie; using moments up to m_%d", m.degree)
        ranked = sorted((_candidate(m.values, r, l, c.p, extra_rows) for c in ranked),
                        key=lambda c: c.residual_selector)
        best, second = ranked[0], ranked[1]
    if not best.residual_selector * cfg.accept_ratio <= second.residual_selector:
        msg = (
            f"ambiguous selection: best residual {best.residual_selector:.3e}, "
            f"runner-up {second.residual_selector:.3e}"
        )
        if cfg.on_ambiguity == "raise":
            raise AmbiguityError(
                msg,
                {
                    "best": best.residual_selector,
                    "second": second.residual_selector,
                    "candidates": len(ranked),
                },
            )
        log.warning(msg)
    return (best, ranked) if return_ranking else best


# ---------------------------------------------------------------------------
# weights


def confluent_vandermonde(xis, orders, d: int) -> np.ndarray:
    """Columns (∂^k X^i)(ξ_j) for i = 0..d, blocks j, k = 0..l_j."""
    xis = np.asarray(xis)
    if np.isscalar(orders) or np.ndim(orders) == 0:
        orders = [int(orders)] * len(xis)
    cols = []
    i = np.arange(d + 1)
    for xi, lj in zip(xis, orders):
        for k in range(lj + 1):
            ff = np.array([falling_factorial(n, k) for n in i])
            pw = np.where(i >= k, xi ** np.maximum(i - k, 0), 0)
            cols.append(ff * pw)
    return np.column_stack(cols) if cols else np.zeros((d + 1, 0))


def confluent_vandermonde_weights(xis, l, m, d: int | None = None, cluster_tol: float = 1e-6,
                                  return_cond: bool = False):
    """Least-squares weights λ_{j,k} for known support points.

    Rows of the confluent Vandermonde system are scaled to unit norm before
    the solve; the reported condition number is that of the scaled matrix.
    ``l`` is a common order or a per-component sequence. Returns an (r, l+1)
    array for a common order, a list of arrays otherwise.
    """
    m = as_moments(m)
    xis = np.atleast_1d(np.asarray(xis))
    r = xis.size
    orders = [int(l)] * r if np.ndim(l) == 0 else [int(x) for x in l]
    d = m.degree if d is None else d
    if d < sum(o + 1 for o in orders) - 1:
        raise InsufficientMomentsError("not enough moments for the number of weights")
    if d > m.degree:
        raise InsufficientMomentsError(f"d={d} exceeds available degree {m.degree}")
    for a in range(r):
        for b in range(a + 1, r):
            if abs(xis[a] - xis[b]) <= cluster_tol:
                raise DegenerateError(
                    f"support points {xis[a]} and {xis[b]} coincide; merge them and raise the order"
                )
    V = confluent_vandermonde(xis, orders, d)
    rhs = m.values[: d + 1]
    if np.iscomplexobj(xis) or np.iscomplexobj(rhs):
        V = V.astype(complex)
        rhs = rhs.astype(complex)
    # Equilibrate rows so high moments (largest and, for data, noisiest) do
    # not dominate the fit.
    rn = np.linalg.norm(V, axis=1)
    rn = np.where(rn > 0, rn, 1.0)
    V = V / rn[:, None]
    rhs = rhs / rn
    sol, *_ = np.linalg.lstsq(V, rhs, rcond=None)
    out, pos = [], 0
    for o in orders:
        out.append(sol[pos : pos + o + 1])
        pos += o + 1
    weights = np.array(out) if len(set(orders)) == 1 else out
    if return_cond:
        return weights, float(np.linalg.cond(V))
    return weights


# ---------------------------------------------------------------------------
# end-to-end


def _real_if_close(arr: np.ndarray, tol: float) -> np.ndarray:
    arr = np.asarray(arr)
    if np.iscomplexobj(arr) and np.all(np.abs(arr.imag) <= tol * (1 + np.abs(arr))):
        return arr.real.copy()
    return arr


def _build_mixture(xis, weights) -> LocalDiracMixture:
    return LocalDiracMixture.from_arrays(list(xis), [np.atleast_1d(w) for w in weights]).sorted()


def _statistical_ok(xis, weights, tol=1e-6) -> bool:
    if np.any(np.abs(np.imag(xis)) > tol * (1 + np.abs(xis))):
        return False
    lead = np.asarray([w[0] for w in weights])
    if np.any(np.abs(np.imag(lead)) > tol):
        return False
    lead = np.real(lead)
    return bool(np.all(lead >= -tol) and np.all(lead <= 1 + tol))


def recover(m, r: int, l: int, cfg: RecoveryConfig | None = None, method: str = "auto",
            accept=None, score=None) -> RecoveryResult:
    """Recover (ξ_j, λ_{j,0..l}) of an r-mixture of order-l local Diracs.

    ``method`` is ``"minimal"`` (power system plus selector moment),
    ``"linear"`` (Prony with multiplicities) or ``"auto"``, which prefers the
    minimal route whenever m_{(l+2)r} is available. ``accept(xis, weights)``
    optionally discards candidates of the minimal route before selection,
    on top of the ``cfg.statistical`` filter. ``score(xis, weights)``
    (lower is better) replaces the selector residual as the ranking of the
    surviving candidates, e.g. a negative log-likelihood for sampled data.
    """
    cfg = cfg or RecoveryConfig()
    m = as_moments(m)
    _check_rl(r, l)
    n_min = (l + 2) * r + 1
    n_lin = 2 * (l + 1) * r
    if method == "auto":
        if len(m) >= n_min:
            method = "minimal"
        elif len(m) >= n_lin:
            method = "linear"
        else:
            raise InsufficientMomentsError(
                f"r={r}, l={l} needs {n_min} moments (minimal route) or {n_lin} (linear route); "
                f"got {len(m)}"
            )
    if method == "linear":
        total = (l + 1) * r
        if len(m) < n_lin:
            raise InsufficientMomentsError(f"linear route needs m_0..m_{n_lin - 1}")
        res = prony_linear(m, cfg, rank=total, n_clusters=r)
        if res.mixture.r != r or max(res.mixture.orders) > l:
            raise DegenerateError(
                f"linear route found {res.mixture.r} components of orders {res.mixture.orders}",
                res.diagnostics,
            )
        return res
    if method != "minimal":
        raise ValueError(f"unknown method {method!r}")
    if len(m) < n_min:
        raise InsufficientMomentsError(f"minimal route needs m_0..m_{n_min - 1}")

    cands, info = _solve_minimal(m, r, l, cfg)
    real_input = not m.is_complex
    diagnostics: dict = {
        "method": "minimal",
        "r": r,
        "l": l,
        "n_candidates": len(cands),
        "selector_residuals": [c.residual_selector for c in cands],
        "rank_profile": rank_profile(m, rel_tol=cfg.rank_tol),
        **info,
    }

    def assemble(c: CandidateSolution):
        roots = c.roots()
        if real_input:
            roots = _real_if_close(roots, 1e-8)
        weights, cond = confluent_vandermonde_weights(
            roots, l, m, cluster_tol=cfg.cluster_tol, return_cond=True
        )
        if real_input:
            weights = _real_if_close(weights, 1e-8)
        return roots, weights, cond

    scores = {}
    if cfg.statistical or accept is not None or score is not None:
        kept = []
        for c in cands:
            try:
                roots, weights, _ = assemble(c)
            except DegenerateError:
                continue
            if cfg.statistical and not _statistical_ok(roots, weights):
                continue
            if accept is not None and not accept(roots, weights):
                continue
            if score is not None:
                scores[id(c)] = float(score(roots, weights))
            kept.append(c)
        diagnostics["n_statistical"] = len(kept)
        if not kept:
            raise ConvergenceError("no candidate passes the statistical filter", diagnostics)
        cands = kept

    if score is not None:
        ranked = sorted(cands, key=lambda c: scores[id(c)])
        best = ranked[0]
        diagnostics["scores"] = sorted(scores.values())
    else:
        try:
            best, ranked = select_candidate(cands, m, r, l, cfg, return_ranking=True)
        except AmbiguityError as exc:
            exc.diagnostics.update(diagnostics)
            raise
    diagnostics["residual_primary"] = best.residual_primary
    diagnostics["residual_selector"] = best.residual_selector
    others = [c.residual_selector for c in ranked[1:]]
    diagnostics["selector_gap"] = (
        (min(others) / best.residual_selector if best.residual_selector > 0 else math.inf)
        if others
        else None
    )
    if cfg.selector_tol is not None:
        _, c = _powers(np.atleast_2d(best.p), l + 1)
        rel = best.residual_selector / (m.scale * max(np.linalg.norm(c), 1.0))
        diagnostics["relative_selector"] = rel
        if rel > cfg.selector_tol:
            raise ConvergenceError(
                f"best candidate does not explain m_{(l + 2) * r} (relative residual {rel:.2e})",
                diagnostics,
            )
    roots, weights, cond = assemble(best)
    diagnostics["vandermonde_cond"] = cond
    if cond > 1e12:
        log.warning("confluent Vandermonde matrix is badly conditioned (cond=%.2e)", cond)
    return RecoveryResult(_build_mixture(roots, weights), diagnostics)


def cluster_roots(roots, tol: float) -> list[tuple[complex, int]]:
    """Group numerically multiple roots; returns (cluster mean, multiplicity).

    A k-fold root perturbed by δ scatters on a circle of radius ~δ^(1/k), so
    a cluster of size k accepts a new member within ``tol ** (2 / (k + 1))``;
    pairs therefore merge within ``tol`` itself.
    """
    clusters: list[list] = []
    for z in sorted(np.asarray(roots).tolist(), key=lambda z: (np.real(z), np.imag(z))):
        best, best_d = None, math.inf
        for cl in clusters:
            dist = abs(np.mean(cl) - z)
            if dist <= tol ** (2 / (len(cl) + 1)) and dist < best_d:
                best, best_d = cl, dist
        if best is None:
            clusters.append([z])
        else:
            best.append(z)
    return [(complex(np.mean(cl)), len(cl)) for cl in clusters]


def _group_roots(roots: np.ndarray, n_clusters: int) -> list[tuple[complex, int]]:
    """Split roots into exactly ``n_clusters`` groups by single linkage."""
    if n_clusters >= len(roots):
        return [(complex(z), 1) for z in roots]
    pts = np.column_stack([np.real(roots), np.imag(roots)])
    labels = fcluster(linkage(pts, method="single"), n_clusters, criterion="maxclust")
    out = []
    for lab in np.unique(labels):
        members = roots[labels == lab]
        out.append((complex(np.mean(members)), int(members.size)))
    return sorted(out, key=lambda c: (c[0].real, c[0].imag))


def prony_linear(m, cfg: RecoveryConfig | None = None, s: int | None = None,
                 rank: int | None = None, n_clusters: int | None = None) -> RecoveryResult:
    """Prony's method with multiplicities from m_0..m_{2s}.

    Support points are the roots of the kernel generator of M_{s-1,s}; the
    multiplicity of each root fixes the order of its component. With a known
    total multiplicity ``rank`` the rank check is skipped and m_{2s} is not
    needed. ``n_clusters`` fixes the number of distinct support points;
    otherwise roots are grouped with a multiplicity-aware tolerance.
    """
    cfg = cfg or RecoveryConfig()
    m = as_moments(m)
    if s is None:
        s = m.degree // 2 if rank is None else rank
    if s < 1:
        raise InsufficientMomentsError("Prony's method needs at least m_0, m_1")
    gen = kernel_polynomial(m, s, cfg.rank_tol, rank=rank)
    rank = gen.size - 1
    if rank == 0:
        raise DegenerateError("all moments vanish; there is nothing to recover")
    roots = P.polyroots(gen)
    if n_clusters is not None:
        clusters = _group_roots(roots, n_clusters)
    else:
        clusters = cluster_roots(roots, max(cfg.cluster_tol, 1e-12))
    xis = np.array([c[0] for c in clusters])
    orders = [c[1] - 1 for c in clusters]
    if not m.is_complex:
        xis = _real_if_close(xis, 1e-8)
    weights, cond = confluent_vandermonde_weights(
        xis, orders, m, cluster_tol=0.0, return_cond=True
    )
    if not m.is_complex:
        weights = [_real_if_close(w, 1e-8) for w in weights]
    diagnostics = {
        "method": "linear",
        "s": s,
        "rank": rank,
        "multiplicities": [c[1] for c in clusters],
        "rank_profile": rank_profile(m, rel_tol=cfg.rank_tol),
        "vandermonde_cond": cond,
    }
    return RecoveryResult(_build_mixture(xis, weights), diagnostics)
