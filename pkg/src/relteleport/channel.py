"""Qubit channels induced by two delta-coupled detectors.

Alice's detector couples first with ``U_A = cos(Y_A) - i mu_A sin(Y_A)``,
Bob's later with ``U_B``. Bob's reduced state after ``U_B U_A`` is expanded
into sixteen detector-operator x field-operator terms; the field part of
each term is an ordered four-factor trig product evaluated exactly by
:mod:`relteleport.weyl`. The result is stored as a Choi matrix with a cached
Kraus decomposition.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Any, Mapping, NamedTuple, Sequence

import numpy as np

from . import qmath
from .field import CorrelatorSet, DetectorConfig, correlators, equal_time_commutator, momentum_variance, smeared_causal_propagator, smeared_wightman_self
from .quadrature import DEFAULT_TOL
from .weyl import TRIG_KINDS, gamma_table

CP_TOL = 1e-10
VARIANT_IDS = ("00", "01", "10", "11")
VARIANT_MONOPOLES = {"00": qmath.I2, "01": qmath.SZ, "10": qmath.SX, "11": qmath.SY}


class ChannelError(RuntimeError):
    pass


class TimeOrderError(ValueError):
    pass


def monopole(phase: float) -> np.ndarray:
    """sigma^+ e^{i phase} + sigma^- e^{-i phase}."""
    return qmath.SPLUS * np.exp(1j * phase) + qmath.SMINUS * np.exp(-1j * phase)


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class ChannelModel:
    """CPTP map on a qubit, as a Choi matrix J = sum_ij |i><j| (x) Phi(|i><j|).

    J has trace 2 and its partial trace over the output is the identity.
    """

    choi: np.ndarray
    kraus: tuple[np.ndarray, ...]
    meta: Mapping[str, Any] = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.kraus[0].shape[1]


def from_choi(choi: np.ndarray, meta: Mapping[str, Any] | None = None, tol: float = CP_TOL) -> ChannelModel:
    choi = qmath.check_hermitian(choi, 1e-10)
    choi = 0.5 * (choi + qmath.dagger(choi))
    d = int(round(math.sqrt(choi.shape[0])))
    w, v = np.linalg.eigh(choi)
    if w[0] < -tol:
        raise ChannelError(f"Choi matrix has eigenvalue {w[0]:.3e}; map is not completely positive")
    tp = qmath.partial_trace(choi, "A", (d, d))
    dev = np.max(np.abs(tp - np.eye(d)))
    if dev > tol:
        raise ChannelError(f"map is not trace preserving (deviation {dev:.3e})")
    w = np.clip(w, 0.0, None)
    kraus = []
    for lam, vec in zip(w[::-1], v[:, ::-1].T):
        if lam <= 1e-15:
            continue
        # J = sum_k |K_k>><<K_k| with |K>> = sum_i |i> (x) K|i>
        kraus.append(_freeze(math.sqrt(lam) * vec.reshape(d, d).T))
    return ChannelModel(_freeze(choi), tuple(kraus), dict(meta or {}))


def from_kraus(kraus: Sequence[np.ndarray], meta: Mapping[str, Any] | None = None) -> ChannelModel:
    kraus = [np.asarray(k, dtype=complex) for k in kraus]
    d = kraus[0].shape[1]
    choi = np.zeros((d * d, d * d), dtype=complex)
    for k in kraus:
        vec = np.concatenate([k[:, i] for i in range(d)])
        choi += np.outer(vec, vec.conj())
    return from_choi(choi, meta)


def from_linear_map(phi, d: int = 2, meta: Mapping[str, Any] | None = None) -> ChannelModel:
    """Choi matrix of the linear map ``phi`` (a callable on d x d matrices)."""
    choi = np.zeros((d * d, d * d), dtype=complex)
    for i, j in itertools.product(range(d), repeat=2):
        e = np.zeros((d, d), dtype=complex)
        e[i, j] = 1.0
        choi += np.kron(e, phi(e))
    return from_choi(choi, meta)


def identity_channel(d: int = 2) -> ChannelModel:
    return from_kraus([np.eye(d)], {"kind": "identity"})


def replacement_channel(sigma: np.ndarray) -> ChannelModel:
    sigma = qmath.check_density(sigma)
    return from_linear_map(lambda x: np.trace(x) * sigma, sigma.shape[0], {"kind": "replacement"})


def apply(ch: ChannelModel, rho: np.ndarray) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    out = sum(k @ rho @ qmath.dagger(k) for k in ch.kraus)
    return 0.5 * (out + qmath.dagger(out))


def apply_choi(ch: ChannelModel, x: np.ndarray) -> np.ndarray:
    """Phi(x) = tr_in[(x^T (x) I) J]; works for any operator x."""
    d = ch.dim
    return qmath.partial_trace(np.kron(np.asarray(x).T, np.eye(d)) @ ch.choi, "B", (d, d))


def bloch_affine(ch: ChannelModel) -> tuple[np.ndarray, np.ndarray]:
    """(T, t) with r_out = T r_in + t for a qubit channel."""
    t = qmath.bloch_vector(apply_choi(ch, qmath.I2 / 2))
    cols = [qmath.bloch_vector(apply_choi(ch, s / 2)) for s in (qmath.SX, qmath.SY, qmath.SZ)]
    return np.column_stack(cols), t


def is_entanglement_breaking(ch: ChannelModel, tol: float = CP_TOL) -> bool:
    """PPT test on the Choi state; exact for qubit-to-qubit maps."""
    return min_ppt_eigenvalue(ch) >= -tol


def min_ppt_eigenvalue(ch: ChannelModel) -> float:
    d = ch.dim
    pt = qmath.partial_transpose(ch.choi, (d, d), "B")
    return float(np.linalg.eigvalsh(0.5 * (pt + qmath.dagger(pt)))[0])


def _detector_ops(mu: np.ndarray) -> dict[str, np.ndarray]:
    # U_j = 1 (x) cos Y_j - i mu_j (x) sin Y_j
    return {"c": qmath.I2, "s": -1j * mu}


def build_channel(
    a: DetectorConfig,
    b: DetectorConfig,
    rho_b0: np.ndarray,
    corr: CorrelatorSet | None = None,
    tol: float = DEFAULT_TOL,
) -> ChannelModel:
    """Alice-to-Bob channel rho_A -> tr_{A, phi}(U_B U_A rho_A (x) rho_B (x) omega U^dag).

    With ``U = sum_{x,y} (o_B^y (x) o_A^x) X_B^y X_A^x`` the receiver's state is

        sum tr(o_A^{x'dag} o_A^x rho_A) omega(X_A^{x'} X_B^{y'} X_B^y X_A^x) o_B^y rho_B o_B^{y'dag}.
    """
    if a.coupling_time > b.coupling_time:
        raise TimeOrderError(
            f"Alice must couple first (t_A = {a.coupling_time} > t_B = {b.coupling_time})"
        )
    rho_b0 = qmath.check_density(rho_b0)
    if corr is None:
        corr = correlators(a, b, tol)
    g = gamma_table(corr)
    o_a = _detector_ops(monopole(a.monopole_phase))
    o_b = _detector_ops(monopole(b.monopole_phase))
    terms = []
    for x, xp, y, yp in itertools.product(TRIG_KINDS, repeat=4):
        coeff = g[xp + yp + y + x]
        if abs(coeff) < 1e-300:
            continue
        a_op = qmath.dagger(o_a[xp]) @ o_a[x]
        b_out = o_b[y] @ rho_b0 @ qmath.dagger(o_b[yp])
        terms.append((coeff, a_op, b_out))

    def phi(rho_a):
        return sum(c * np.trace(a_op @ rho_a) * b_out for c, a_op, b_out in terms)

    meta = {"kind": "detector", "correlators": corr, "alice": a, "bob": b, "rho_b0": rho_b0}
    try:
        return from_linear_map(phi, 2, meta)
    except ChannelError as exc:
        raise ChannelError(f"internal consistency failure in channel construction: {exc}") from exc


class ClosedFormCoefficients(NamedTuple):
    p_plus: float
    p_minus: float
    commutator_coeff: float


def closed_form_coefficients(corr: CorrelatorSet) -> ClosedFormCoefficients:
    nu, e = corr.nu_b, corr.e_ab
    return ClosedFormCoefficients(
        0.5 * (1.0 + nu * math.cos(2 * e)),
        0.5 * (1.0 - nu * math.cos(2 * e)),
        0.5 * nu * math.sin(2 * e),
    )


def receiver_closed_form(
    corr: CorrelatorSet, rho_b0: np.ndarray, alice_phase: float = 0.0, bob_phase: float = 0.0
) -> ChannelModel:
    """The same channel written with the three closed-form coefficients:

        Phi(rho_A) = p+ rho_B + p- mu_B rho_B mu_B + c <mu_A> i[mu_B, rho_B]
    """
    p_plus, p_minus, c = closed_form_coefficients(corr)
    rho_b0 = qmath.check_density(rho_b0)
    mu_a, mu_b = monopole(alice_phase), monopole(bob_phase)
    fixed = p_plus * rho_b0 + p_minus * mu_b @ rho_b0 @ mu_b
    kick = 1j * c * (mu_b @ rho_b0 - rho_b0 @ mu_b)
    return from_linear_map(
        lambda x: np.trace(x) * fixed + np.trace(mu_a @ x) * kick, 2, {"kind": "closed_form", "correlators": corr}
    )


def variant_map(m: str, e_ab: float, nu: float):
    """Phi_m(rho) = p+ rho + p- mu rho mu + (nu sin 2E / 2) i[mu, rho]."""
    if m not in VARIANT_IDS:
        raise ValueError(f"unknown variant {m!r}")
    mu = VARIANT_MONOPOLES[m]
    p_plus = 0.5 * (1.0 + nu * math.cos(2 * e_ab))
    p_minus = 0.5 * (1.0 - nu * math.cos(2 * e_ab))
    c = 0.5 * nu * math.sin(2 * e_ab)
    return lambda x: p_plus * x + p_minus * mu @ x @ mu + 1j * c * (mu @ x - x @ mu)


def build_variant_channel(
    m: str,
    a: DetectorConfig,
    b: DetectorConfig,
    rho_b0: np.ndarray,
    variant_nu: float,
    tol: float = DEFAULT_TOL,
) -> ChannelModel:
    """Four-message variant: the monopole is replaced by 1, Z, X or Y for
    m = 00, 01, 10, 11 and nu_B by ``variant_nu``."""
    if not 0.0 < variant_nu <= 1.0:
        raise ValueError(f"variant_nu must lie in (0, 1], got {variant_nu!r}")
    e_ab = smeared_causal_propagator(a, b, tol)
    meta = {"kind": "variant", "m": m, "nu": variant_nu, "e_ab": e_ab, "rho_b0": qmath.check_density(rho_b0)}
    return from_linear_map(variant_map(m, e_ab, variant_nu), 2, meta)


def variant_nu_momentum(b: DetectorConfig, which: str, tol: float = DEFAULT_TOL) -> float:
    """|omega(exp(i O_m(f)))| for m = 10 (O = pi(f)) or 11 (O = phi(f) + pi(f)).

    phi(f) and pi(f) are jointly Gaussian with vanishing symmetrised cross
    covariance at equal times; their commutator only contributes the constant
    phase returned by :func:`variant_bch_phase`.
    """
    if which == "10":
        var = momentum_variance(b, tol)
    elif which == "11":
        var = momentum_variance(b, tol) + smeared_wightman_self(b, tol)
    else:
        raise ValueError(f"momentum variants are '10' and '11', got {which!r}")
    return math.exp(-0.5 * var)


def variant_bch_phase(b: DetectorConfig, tol: float = DEFAULT_TOL) -> float:
    """theta in exp(i(phi + pi)) = exp(i phi) exp(i pi) exp(-i theta)."""
    return 0.5 * equal_time_commutator(b, tol)


def variant_nus(b: DetectorConfig, tol: float = DEFAULT_TOL) -> dict[str, float]:
    return {
        "00": 1.0,
        "01": math.exp(-0.5 * smeared_wightman_self(b, tol)),
        "10": variant_nu_momentum(b, "10", tol),
        "11": variant_nu_momentum(b, "11", tol),
    }
