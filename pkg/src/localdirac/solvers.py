"""Batched numerical solvers for small square polynomial systems.

Two engines, both vectorised over many starting points at once:

* ``track_total_degree``: a total-degree homotopy x_i^e - 1 -> F with the
  gamma trick, RK4 predictor and Newton corrector. It reaches every isolated
  solution with probability one.
* ``newton_batch``: damped (Gauss-)Newton from arbitrary starts. Handles
  overdetermined systems through a least-squares step.

A *system* is a callable ``X -> (F, J)`` taking an (S, n) complex array and
returning values (S, q) and Jacobians (S, q, n).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable

import numpy as np

System = Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]]


@dataclass
class PathResult:
    endpoints: np.ndarray  # (S, n)
    status: np.ndarray  # "finite" | "diverged" | "failed"
    t_final: np.ndarray
    steps: int
    singular: np.ndarray  # bool, endpoint Jacobian numerically rank deficient

    @property
    def finite(self) -> np.ndarray:
        return self.endpoints[self.status == "finite"]


def _solve(J: np.ndarray, F: np.ndarray) -> np.ndarray:
    """Batched J·dx = F; least squares when J is not square or is singular."""
    if J.shape[-1] == J.shape[-2]:
        try:
            return np.linalg.solve(J, F[..., None])[..., 0]
        except np.linalg.LinAlgError:
            pass
    return np.einsum("sij,sj->si", np.linalg.pinv(J), F)


def jacobian_singular(J: np.ndarray, rel_tol: float = 1e-9) -> np.ndarray:
    sv = np.linalg.svd(J, compute_uv=False)
    top = sv[:, 0]
    return ~(sv[:, -1] > rel_tol * np.where(top > 0, top, 1.0))


def total_degree_starts(n: int, degree: int) -> np.ndarray:
    roots = np.exp(2j * np.pi * np.arange(degree) / degree)
    return np.array(list(itertools.product(roots, repeat=n)), dtype=complex).reshape(-1, n)


def track_total_degree(
    system: System,
    n: int,
    degree: int,
    rng: np.random.Generator,
    *,
    h0: float = 0.02,
    h_min: float = 1e-13,
    max_steps: int = 5000,
    corrector_tol: float = 1e-9,
    diverge_norm: float = 1e9,
    polish_iter: int = 4,
) -> PathResult:
    """Track all degree**n paths of (1-t)·γ·(x^e - 1) + t·F(x) from t=0 to 1."""
    e = degree
    gamma = np.exp(2j * np.pi * rng.uniform())
    X = total_degree_starts(n, e)
    S = X.shape[0]
    diag = np.arange(n)

    def homotopy(x, t):
        F, J = system(x)
        tt = t[:, None]
        G = x**e - 1
        Hv = (1 - tt) * gamma * G + tt * F
        Hx = t[:, None, None] * J
        Hx[:, diag, diag] += (1 - tt) * gamma * e * x ** (e - 1)
        return Hv, Hx, F - gamma * G

    def velocity(x, t):
        _, Hx, Ht = homotopy(x, t)
        return -_solve(Hx, Ht)

    t = np.zeros(S)
    h = np.full(S, h0)
    streak = np.zeros(S, dtype=int)
    done = np.zeros(S, dtype=bool)
    dead = np.zeros(S, dtype=bool)
    diverged = np.zeros(S, dtype=bool)
    steps = 0
    with np.errstate(all="ignore"):
        while steps < max_steps:
            active = np.flatnonzero(~(done | dead | diverged))
            if active.size == 0:
                break
            steps += 1
            x, ta = X[active], t[active]
            ha = np.minimum(h[active], 1.0 - ta)
            hc = ha[:, None]
            k1 = velocity(x, ta)
            k2 = velocity(x + hc / 2 * k1, ta + ha / 2)
            k3 = velocity(x + hc / 2 * k2, ta + ha / 2)
            k4 = velocity(x + hc * k3, ta + ha)
            xp = x + hc / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            tn = np.where(ha >= 1.0 - ta, 1.0, ta + ha)
            ok = np.zeros(active.size, dtype=bool)
            for _ in range(3):
                Hv, Hx, _ = homotopy(xp, tn)
                dx = _solve(Hx, -Hv)
                xp = xp + dx
                ok = np.linalg.norm(dx, axis=1) <= corrector_tol * (1 + np.linalg.norm(xp, axis=1))
            ok &= np.isfinite(xp).all(axis=1)

            good = active[ok]
            X[good] = xp[ok]
            t[good] = tn[ok]
            streak[good] += 1
            grow = good[streak[good] >= 3]
            h[grow] *= 2.0
            streak[grow] = 0

            bad = active[~ok]
            h[bad] *= 0.5
            streak[bad] = 0

            done |= t >= 1.0
            dead |= (h < h_min) & ~done
            diverged |= np.linalg.norm(X, axis=1) > diverge_norm

    status = np.full(S, "failed", dtype=object)
    status[done & ~diverged] = "finite"
    status[diverged] = "diverged"

    finite = np.flatnonzero(status == "finite")
    if finite.size:
        Xf = X[finite]
        with np.errstate(all="ignore"):
            for _ in range(polish_iter):
                F, J = system(Xf)
                step = _solve(J, -F)
                Xf = np.where(np.isfinite(step).all(axis=1)[:, None], Xf + step, Xf)
        X[finite] = Xf

    singular = np.zeros(S, dtype=bool)
    if finite.size:
        _, J = system(X[finite])
        singular[finite] = jacobian_singular(J)
    singular |= status == "failed"
    return PathResult(X, status, t, steps, singular)


def newton_batch(
    system: System,
    X0: np.ndarray,
    *,
    max_iter: int = 100,
    tol: float = 1e-12,
    max_halvings: int = 30,
    residual_floor: float = 1e-11,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Damped Newton from every row of X0.

    Steps are halved while they increase the residual norm. Returns
    (solutions, converged mask, residual norms).
    """
    X = np.array(X0, dtype=complex, copy=True)
    S = X.shape[0]
    converged = np.zeros(S, dtype=bool)
    with np.errstate(all="ignore"):
        F, J = system(X)
        res = np.linalg.norm(F, axis=1)
        active = np.isfinite(res)
        for _ in range(max_iter):
            idx = np.flatnonzero(active & ~converged)
            if idx.size == 0:
                break
            d = _solve(J[idx], -F[idx])
            lam = np.ones(idx.size)
            x_old = X[idx]
            r_old = res[idx]
            x_new = x_old + d
            F_new, J_new = system(x_new)
            r_new = np.linalg.norm(F_new, axis=1)
            for _ in range(max_halvings):
                worse = ~(r_new <= r_old) & (lam > 1e-9)
                if not worse.any():
                    break
                lam[worse] *= 0.5
                wi = np.flatnonzero(worse)
                x_new[wi] = x_old[wi] + lam[wi, None] * d[wi]
                Fw, Jw = system(x_new[wi])
                F_new[wi], J_new[wi] = Fw, Jw
                r_new[wi] = np.linalg.norm(Fw, axis=1)
            failed = ~(r_new <= r_old)
            if failed.any():
                x_new[failed], r_new[failed] = x_old[failed], r_old[failed]
                F_new[failed], J_new[failed] = F[idx[failed]], J[idx[failed]]
            X[idx], F[idx], J[idx], res[idx] = x_new, F_new, J_new, r_new
            small = np.linalg.norm(d, axis=1) <= tol * (1 + np.linalg.norm(x_new, axis=1))
            converged[idx[small]] = True
            # No descent possible: accept a residual at round-off level, else give up.
            converged[idx[failed & (r_old <= residual_floor)]] = True
            active[idx[failed & (r_old > residual_floor)]] = False
            active &= np.isfinite(res)
    converged &= np.isfinite(res)
    return X, converged, res
