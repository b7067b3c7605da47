"""Dense linear algebra and entropy primitives for small quantum systems.

Matrices are plain complex numpy arrays. Density operators are validated on
entry by :func:`check_density`; everything else works on whatever square
array it is handed. Logarithms are base 2 throughout.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-12
POSITIVITY_TOL = 1e-10
SUPPORT_TOL = 1e-12

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
# basis ordering is (|g>, |e>); sigma^+ raises g -> e
SPLUS = np.array([[0, 0], [1, 0]], dtype=complex)
SMINUS = SPLUS.conj().T
PAULIS = (I2, SX, SY, SZ)


class NotHermitianError(ValueError):
    pass


class InvalidStateError(ValueError):
    pass


@dataclass(frozen=True)
class PureQubit:
    """alpha|0> + beta|1>, normalised to 1e-12."""

    alpha: complex
    beta: complex

    def __post_init__(self):
        norm = abs(self.alpha) ** 2 + abs(self.beta) ** 2
        if abs(norm - 1.0) > 1e-12:
            raise InvalidStateError(f"|alpha|^2 + |beta|^2 = {norm!r}, expected 1")

    @classmethod
    def from_amplitudes(cls, alpha: complex, beta: complex) -> "PureQubit":
        n = np.sqrt(abs(alpha) ** 2 + abs(beta) ** 2)
        return cls(complex(alpha) / n, complex(beta) / n)

    @classmethod
    def random(cls, rng: np.random.Generator) -> "PureQubit":
        v = rng.normal(size=2) + 1j * rng.normal(size=2)
        return cls.from_amplitudes(v[0], v[1])

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.alpha, self.beta], dtype=complex)

    def projector(self) -> np.ndarray:
        v = self.vector
        return np.outer(v, v.conj())


def ket(*amplitudes) -> np.ndarray:
    return np.asarray(amplitudes, dtype=complex)


def projector(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    return np.outer(v, v.conj())


def bloch_state(r: Sequence[float]) -> np.ndarray:
    """Qubit density matrix with Bloch vector ``r`` (|r| <= 1)."""
    x, y, z = r
    return 0.5 * (I2 + x * SX + y * SY + z * SZ)


def bloch_vector(rho: np.ndarray) -> np.ndarray:
    return np.real([np.trace(rho @ s) for s in (SX, SY, SZ)])


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conjugate(m).T


def is_hermitian(m: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    m = np.asarray(m)
    return m.ndim == 2 and m.shape[0] == m.shape[1] and np.max(np.abs(m - dagger(m)), initial=0.0) <= tol


def check_hermitian(m: np.ndarray, tol: float = HERMITIAN_TOL) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if not is_hermitian(m, tol):
        dev = np.max(np.abs(m - dagger(m)))
        raise NotHermitianError(f"matrix is not Hermitian (max |M - M^dag| = {dev:.3e})")
    return m


def check_density(rho: np.ndarray, tol: float = POSITIVITY_TOL) -> np.ndarray:
    """Validate and return ``rho`` as a complex density matrix."""
    rho = check_hermitian(rho, max(tol, 1e-12))
    tr = np.trace(rho).real
    if abs(tr - 1.0) > max(TRACE_TOL, tol * 1e-2):
        raise InvalidStateError(f"trace is {tr!r}, expected 1")
    lo = np.linalg.eigvalsh(0.5 * (rho + dagger(rho)))[0]
    if lo < -tol:
        raise InvalidStateError(f"minimum eigenvalue {lo:.3e} is below -{tol:g}")
    return rho


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product; the first factor is the slow index."""
    return np.kron(np.asarray(a), np.asarray(b))


def kron_all(*ms: np.ndarray) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for m in ms:
        out = np.kron(out, m)
    return out


def tensor_power(m: np.ndarray, n: int) -> np.ndarray:
    if n < 1:
        raise ValueError("tensor power needs n >= 1")
    out = np.asarray(m, dtype=complex)
    for _ in range(n - 1):
        out = np.kron(out, m)
    return out


_SUBSYSTEM = {"A": 0, "B": 1, 0: 0, 1: 1}


def partial_trace(rho: np.ndarray, keep: Union[str, int], dims: tuple[int, int]) -> np.ndarray:
    """Trace out one factor of a bipartite operator on A (x) B.

    ``keep`` is ``"A"``/``0`` or ``"B"``/``1``.
    """
    rho = np.asarray(rho)
    d_a, d_b = dims
    if rho.shape != (d_a * d_b, d_a * d_b):
        raise ValueError(f"operator of shape {rho.shape} does not match dims {dims}")
    try:
        which = _SUBSYSTEM[keep]
    except KeyError:
        raise ValueError(f"unknown subsystem {keep!r}") from None
    t = rho.reshape(d_a, d_b, d_a, d_b)
    if which == 0:
        return np.einsum("ijkj->ik", t)
    return np.einsum("ijil->jl", t)


def partial_transpose(rho: np.ndarray, dims: tuple[int, int], system: Union[str, int] = "B") -> np.ndarray:
    d_a, d_b = dims
    t = np.asarray(rho).reshape(d_a, d_b, d_a, d_b)
    if _SUBSYSTEM[system] == 1:
        t = t.transpose(0, 3, 2, 1)
    else:
        t = t.transpose(2, 1, 0, 3)
    return t.reshape(d_a * d_b, d_a * d_b)


def eig_hermitian(h: np.ndarray, tol: float = HERMITIAN_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues in descending order and the matching orthonormal eigenvectors
    (as columns)."""
    h = check_hermitian(h, tol)
    w, v = np.linalg.eigh(0.5 * (h + dagger(h)))
    return w[::-1].copy(), v[:, ::-1].copy()


def eigvals_hermitian(h: np.ndarray) -> np.ndarray:
    h = np.asarray(h)
    return np.linalg.eigvalsh(0.5 * (h + dagger(h)))[::-1]


def trace_norm(m: np.ndarray) -> float:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if is_hermitian(m, 1e-12):
        return float(np.sum(np.abs(eigvals_hermitian(m))))
    return float(np.sum(np.linalg.svd(m, compute_uv=False)))


def trace_distance(rho: np.ndarray, sigma: np.ndarray) -> float:
    return 0.5 * trace_norm(np.asarray(rho) - np.asarray(sigma))


def fidelity(rho: np.ndarray, psi: Union[PureQubit, np.ndarray]) -> float:
    """<psi|rho|psi> for a pure reference state."""
    v = psi.vector if isinstance(psi, PureQubit) else np.asarray(psi, dtype=complex)
    val = np.real(np.vdot(v, np.asarray(rho) @ v))
    return float(min(1.0, max(0.0, val)))


def _xlog2x(p: np.ndarray) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    out = np.zeros_like(p)
    pos = p > 0
    out[pos] = p[pos] * np.log2(p[pos])
    return out


def binary_entropy(p: float) -> float:
    if p < -1e-12 or p > 1 + 1e-12:
        raise ValueError(f"probability {p!r} outside [0, 1]")
    p = min(1.0, max(0.0, float(p)))
    return float(-_xlog2x(np.array([p, 1.0 - p])).sum())


def shannon_entropy(probs: Sequence[float]) -> float:
    return float(-_xlog2x(np.clip(np.asarray(probs, dtype=float), 0.0, None)).sum())


def von_neumann_entropy(rho: np.ndarray) -> float:
    lam = np.clip(eigvals_hermitian(rho), 0.0, None)
    return float(-_xlog2x(lam).sum())


def relative_entropy(rho: np.ndarray, sigma: np.ndarray) -> float:
    """D(rho||sigma) in bits; ``inf`` when supp(rho) is not inside supp(sigma)."""
    rho = np.asarray(rho, dtype=complex)
    sigma = np.asarray(sigma, dtype=complex)
    if rho.shape != sigma.shape:
        raise ValueError("rho and sigma must have the same shape")
    p, u = np.linalg.eigh(0.5 * (rho + dagger(rho)))
    q, v = np.linalg.eigh(0.5 * (sigma + dagger(sigma)))
    # overlaps |<u_i|v_j>|^2
    ov = np.abs(dagger(u) @ v) ** 2
    rho_supp = p > SUPPORT_TOL
    sig_kernel = q <= SUPPORT_TOL
    leak = ov[np.ix_(rho_supp, sig_kernel)]
    if leak.size and np.any(p[rho_supp][:, None] * leak > SUPPORT_TOL):
        return float("inf")
    q_safe = np.where(sig_kernel, 1.0, q)
    term_rho = _xlog2x(np.clip(p, 0.0, None)).sum()
    cross = (np.clip(p, 0.0, None)[:, None] * ov * np.log2(q_safe)[None, :])[:, ~sig_kernel].sum()
    # Klein's inequality; only round-off can push this below zero
    return float(max(term_rho - cross, 0.0))


def random_density(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Random density matrix from a Ginibre ensemble."""
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ dagger(g)
    return rho / np.trace(rho).real


def random_hermitian(dim: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return 0.5 * (g + dagger(g))


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))
