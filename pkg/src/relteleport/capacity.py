"""Classical capacities of qubit channels.

Closed-form capacity of the detector channel, a numerical Holevo optimiser,
the hypothesis-testing relative entropy D_H^eps (exact Neyman-Pearson), the
one-shot capacity bounds built from it, and Stein-lemma convergence data.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from . import qmath
from .channel import ChannelModel, bloch_affine
from .field import CorrelatorSet

ZERO_BETA = 1e-13
MAX_STEIN_DIM = 4096
_BISECT_ITERS = 200


@dataclass(frozen=True)
class Ensemble:
    states: tuple[np.ndarray, ...]
    probs: tuple[float, ...]

    def __post_init__(self):
        if len(self.states) != len(self.probs):
            raise ValueError("states and probs must have equal length")
        p = np.asarray(self.probs, dtype=float)
        if np.any(p < -1e-12) or abs(p.sum() - 1.0) > 1e-12:
            raise ValueError(f"probabilities must be nonnegative and sum to 1, got {self.probs}")


@dataclass(frozen=True)
class CqState:
    """pi^{AB} = sum_m p(m) |m><m| (x) rho_m, kept in block form."""

    probs: tuple[float, ...]
    cond_states: tuple[np.ndarray, ...]

    def __post_init__(self):
        Ensemble(self.cond_states, self.probs)

    @property
    def marginal(self) -> np.ndarray:
        return sum(p * r for p, r in zip(self.probs, self.cond_states))

    def joint(self) -> np.ndarray:
        m = len(self.probs)
        return sum(np.kron(qmath.projector(np.eye(m)[k]), p * r) for k, (p, r) in enumerate(zip(self.probs, self.cond_states)))

    def product(self) -> np.ndarray:
        return np.kron(np.diag(self.probs).astype(complex), self.marginal)


def capacity_from(nu_b: float, e_ab: float) -> float:
    """H(1/2 + nu |cos 2E| / 2) - H(1/2 + nu / 2)."""
    val = qmath.binary_entropy(0.5 + 0.5 * nu_b * abs(math.cos(2 * e_ab))) - qmath.binary_entropy(0.5 + 0.5 * nu_b)
    return max(val, 0.0)


def classical_capacity_closed_form(corr: CorrelatorSet) -> float:
    return capacity_from(corr.nu_b, corr.e_ab)


def _h_bloch(r: np.ndarray) -> np.ndarray:
    """Von Neumann entropy of qubit states with Bloch vectors along the last axis."""
    n = np.clip(np.linalg.norm(r, axis=-1), 0.0, 1.0)
    p = np.clip(0.5 * (1.0 + n), 0.0, 1.0)
    q = 1.0 - p
    with np.errstate(divide="ignore", invalid="ignore"):
        out = -np.where(p > 0, p * np.log2(p), 0.0) - np.where(q > 0, q * np.log2(q), 0.0)
    return out


def _directions(angles: np.ndarray) -> np.ndarray:
    th, ph = angles[:, 0], angles[:, 1]
    return np.column_stack([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)])


def _weights(logits: np.ndarray) -> np.ndarray:
    w = np.exp(logits - logits.max())
    return w / w.sum()


def _chi(T: np.ndarray, t: np.ndarray, angles: np.ndarray, logits: np.ndarray) -> float:
    out = _directions(angles) @ T.T + t
    p = _weights(logits)
    return float(_h_bloch(p @ out) - p @ _h_bloch(out))


def holevo_numeric(
    ch: ChannelModel,
    max_states: int = 4,
    *,
    n_starts: int = 32,
    tol: float = 1e-9,
    seed: int = 0,
    max_sweeps: int = 500,
) -> tuple[float, Ensemble]:
    """Maximise the Holevo quantity over ensembles of pure inputs.

    Inputs are points on the Bloch sphere, weights are softmax logits; each
    start is improved by cyclic one-dimensional maximisation until a full sweep
    gains less than ``tol``.
    """
    if max_states < 1:
        raise ValueError("max_states must be positive")
    T, t = bloch_affine(ch)
    rng = np.random.default_rng(seed)
    starts = []
    # antipodal pair along the most stretched input direction
    u, _, vt = np.linalg.svd(T)
    axis = vt[0]
    th, ph = math.acos(max(-1.0, min(1.0, axis[2]))), math.atan2(axis[1], axis[0])
    seeded = np.array([[th, ph], [math.pi - th, ph + math.pi]] + [[0.0, 0.0]] * (max_states - 2))[:max_states]
    lg = np.array([0.0, 0.0] + [-30.0] * (max_states - 2))[:max_states]
    starts.append((seeded, lg))
    while len(starts) < n_starts:
        ang = np.column_stack([np.arccos(rng.uniform(-1, 1, max_states)), rng.uniform(0, 2 * math.pi, max_states)])
        starts.append((ang, rng.normal(size=max_states)))

    best = (-math.inf, None, None)
    for angles, logits in starts:
        angles, logits = angles.copy(), logits.copy()
        cur = _chi(T, t, angles, logits)
        for _ in range(max_sweeps):
            prev = cur
            for k in range(max_states):
                for j, (lo, hi) in enumerate(((0.0, math.pi), (angles[k, 1] - math.pi, angles[k, 1] + math.pi))):
                    def obj(x, k=k, j=j):
                        a = angles.copy()
                        a[k, j] = x
                        return -_chi(T, t, a, logits)

                    res = minimize_scalar(obj, bounds=(lo, hi), method="bounded", options={"xatol": 1e-10})
                    if -res.fun > cur:
                        angles[k, j], cur = res.x, -res.fun
                if max_states > 1:
                    def obj_w(x, k=k):
                        lgt = logits.copy()
                        lgt[k] = x
                        return -_chi(T, t, angles, lgt)

                    c = logits[k]
                    res = minimize_scalar(obj_w, bounds=(c - 10.0, c + 10.0), method="bounded", options={"xatol": 1e-10})
                    if -res.fun > cur:
                        logits[k], cur = res.x, -res.fun
            if cur - prev < tol:
                break
        if cur > best[0]:
            best = (cur, angles, logits)

    chi, angles, logits = best
    p = _weights(logits)
    states = tuple(qmath.bloch_state(d) for d in _directions(angles))
    return max(0.0, min(1.0, chi)), Ensemble(states, tuple(float(x) for x in p / p.sum()))


def holevo_quantity(ch_apply, ensemble: Ensemble) -> float:
    """chi of a given ensemble through a channel given as a callable."""
    outs = [ch_apply(r) for r in ensemble.states]
    avg = sum(p * o for p, o in zip(ensemble.probs, outs))
    return qmath.von_neumann_entropy(avg) - sum(p * qmath.von_neumann_entropy(o) for p, o in zip(ensemble.probs, outs))


# hypothesis testing


def _check_eps(eps: float) -> float:
    eps = float(eps)
    if not 0.0 <= eps < 1.0:
        raise ValueError(f"eps must lie in [0, 1), got {eps!r}")
    return eps


def _is_diagonal(m: np.ndarray) -> bool:
    return np.max(np.abs(m - np.diag(np.diag(m))), initial=0.0) <= 1e-14


def np_beta_classical(p: np.ndarray, q: np.ndarray, eps: float) -> float:
    """Smallest q-mass of a randomised test that keeps p-mass >= 1 - eps."""
    p = np.clip(np.asarray(p, dtype=float), 0.0, None)
    q = np.clip(np.asarray(q, dtype=float), 0.0, None)
    need = 1.0 - eps
    keep = p > 0
    p, q = p[keep], q[keep]
    order = np.lexsort((-p, q / p))  # ratio q/p ascending, larger p first on ties
    p, q = p[order], q[order]
    cum = np.cumsum(p)
    k = int(np.searchsorted(cum, need - 1e-15))
    k = min(k, len(p) - 1)
    before_p = cum[k - 1] if k > 0 else 0.0
    before_q = q[:k].sum()
    frac = min(1.0, max(0.0, (need - before_p) / p[k]))
    return float(before_q + frac * q[k])


def _dual(t: float, rho: np.ndarray, sigma: np.ndarray, eps: float) -> float:
    w = np.linalg.eigvalsh(t * rho - sigma)
    return t * (1.0 - eps) - float(w[w > 0].sum())


def _positive_mass(t: float, rho: np.ndarray, sigma: np.ndarray) -> float:
    w, v = np.linalg.eigh(t * rho - sigma)
    v = v[:, w > 0]
    return float(np.real(np.einsum("ij,ik,kj->", v.conj(), rho, v)))


def np_beta(rho: np.ndarray, sigma: np.ndarray, eps: float) -> float:
    """min tr(Q sigma) over 0 <= Q <= 1 with tr(Q rho) >= 1 - eps.

    The optimal test is the projector onto {t rho > sigma} plus a fraction of
    the boundary eigenspace, at the threshold t where the kept rho-mass crosses
    1 - eps. The value is read off the dual t(1 - eps) - tr(t rho - sigma)_+,
    which is concave in t and exact at that threshold.
    """
    rho = 0.5 * (rho + qmath.dagger(rho))
    sigma = 0.5 * (sigma + qmath.dagger(sigma))
    if _is_diagonal(rho) and _is_diagonal(sigma):
        return np_beta_classical(np.real(np.diag(rho)), np.real(np.diag(sigma)), eps)
    if eps == 0.0:
        w, v = np.linalg.eigh(rho)
        v = v[:, w > qmath.SUPPORT_TOL]
        return float(np.real(np.trace(qmath.dagger(v) @ sigma @ v)))
    lo, hi = 0.0, 1.0 / eps
    need = 1.0 - eps
    for _ in range(_BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if _positive_mass(mid, rho, sigma) >= need:
            hi = mid
        else:
            lo = mid
    return max(0.0, _dual(lo, rho, sigma, eps), _dual(hi, rho, sigma, eps))


def _beta_to_bits(beta: float) -> float:
    return math.inf if beta <= ZERO_BETA else -math.log2(beta)


def hypothesis_testing_re(rho: np.ndarray, sigma: np.ndarray, eps: float) -> float:
    """D_H^eps(rho || sigma) in bits, ``inf`` if a perfect test exists."""
    eps = _check_eps(eps)
    rho, sigma = np.asarray(rho, dtype=complex), np.asarray(sigma, dtype=complex)
    if rho.shape != sigma.shape:
        raise ValueError("rho and sigma must have the same shape")
    return _beta_to_bits(np_beta(rho, sigma, eps))


# one-shot bounds on block-diagonal cq states


def _cq_betas(probs: np.ndarray, cond: np.ndarray, eps: float) -> np.ndarray:
    """beta for pi^{AB} vs pi^A (x) pi^B at many priors at once.

    ``probs`` has shape (G, M), ``cond`` (M, d, d). Both operators are block
    diagonal in the message register, so each bisection step needs only
    G x M small eigendecompositions.
    """
    marg = np.einsum("gm,mij->gij", probs, cond)
    rho_blocks = probs[:, :, None, None] * cond[None]
    sig_blocks = probs[:, :, None, None] * marg[:, None]
    need = 1.0 - eps
    lo = np.zeros(len(probs))
    hi = np.full(len(probs), 1.0 / eps)

    def dual(t):
        w = np.linalg.eigvalsh(t[:, None, None, None] * rho_blocks - sig_blocks)
        return t * need - np.where(w > 0, w, 0.0).sum(axis=(1, 2))

    for _ in range(_BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        if np.all((mid == lo) | (mid == hi)):
            break
        w, v = np.linalg.eigh(mid[:, None, None, None] * rho_blocks - sig_blocks)
        mass = np.real(np.einsum("gmik,gmij,gmjk->gmk", v.conj(), rho_blocks, v))
        kept = np.where(w > 0, mass, 0.0).sum(axis=(1, 2))
        up = kept >= need
        hi = np.where(up, mid, hi)
        lo = np.where(up, lo, mid)
    return np.clip(np.maximum(dual(lo), dual(hi)), 0.0, None)


def simplex_grid(m: int, resolution: int) -> np.ndarray:
    pts = [c for c in itertools.product(range(resolution + 1), repeat=m - 1) if sum(c) <= resolution]
    arr = np.array([list(c) + [resolution - sum(c)] for c in pts], dtype=float)
    return arr / resolution


def _sup_over_priors(cond: np.ndarray, eps: float, resolution: int, refine: int) -> tuple[float, np.ndarray]:
    m = len(cond)
    grid = simplex_grid(m, resolution)
    betas = _cq_betas(grid, cond, eps)
    k = int(np.argmin(betas))
    best_beta, best_p = float(betas[k]), grid[k]
    step = 1.0 / resolution
    for _ in range(refine):
        if best_beta <= ZERO_BETA or m == 1:
            break
        step /= 5.0
        offs = np.array(list(itertools.product(range(-5, 6), repeat=m - 1)), dtype=float) * step
        cand = np.column_stack([best_p[None, : m - 1] + offs, np.zeros(len(offs))])
        cand[:, -1] = 1.0 - cand[:, : m - 1].sum(axis=1)
        cand = cand[np.all(cand >= 0.0, axis=1)]
        betas = _cq_betas(cand, cond, eps)
        k = int(np.argmin(betas))
        if betas[k] < best_beta:
            best_beta, best_p = float(betas[k]), cand[k]
    return _beta_to_bits(best_beta), best_p


class OneShotBounds(NamedTuple):
    c_min: float
    c_max: float
    prior_min: np.ndarray
    prior_max: np.ndarray


def one_shot_bounds(
    cond_states: Sequence[np.ndarray], eps: float, grid: int = 50, refine: int = 8
) -> OneShotBounds:
    """sup_p D_H^{eps/2}(pi^{AB} || pi^A pi^B) - log2(1/eps) - 4 and sup_p D_H^eps(...)."""
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must lie in (0, 1), got {eps!r}")
    if not 1 <= len(cond_states) <= 4:
        raise ValueError("one-shot bounds support 1 to 4 messages")
    cond = np.array([qmath.check_density(r) for r in cond_states])
    d_half, p_min = _sup_over_priors(cond, eps / 2, grid, refine)
    d_full, p_max = _sup_over_priors(cond, eps, grid, refine)
    return OneShotBounds(d_half - math.log2(1.0 / eps) - 4.0, d_full, p_min, p_max)


class SteinPoint(NamedTuple):
    n: int
    value: float
    gap: float


def stein_convergence(rho: np.ndarray, sigma: np.ndarray, eps: float, n_list: Sequence[int]) -> list[SteinPoint]:
    """(1/n) D_H^eps(rho^n || sigma^n) for each n, with its distance to D(rho || sigma)."""
    eps = _check_eps(eps)
    rho, sigma = np.asarray(rho, dtype=complex), np.asarray(sigma, dtype=complex)
    d = rho.shape[0]
    target = qmath.relative_entropy(rho, sigma)
    out = []
    for n in n_list:
        if n < 1 or d**n > MAX_STEIN_DIM:
            raise ValueError(f"tensor power n={n} exceeds the dimension cap {MAX_STEIN_DIM}")
        if _is_diagonal(rho) and _is_diagonal(sigma):
            p = qmath.tensor_power(np.real(np.diag(rho)).reshape(1, -1), n).ravel().real
            q = qmath.tensor_power(np.real(np.diag(sigma)).reshape(1, -1), n).ravel().real
            val = _beta_to_bits(np_beta_classical(p, q, eps)) / n
        else:
            val = hypothesis_testing_re(qmath.tensor_power(rho, n), qmath.tensor_power(sigma, n), eps) / n
        out.append(SteinPoint(n, val, abs(val - target)))
    return out
