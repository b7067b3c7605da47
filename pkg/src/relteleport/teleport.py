"""Teleportation with the two classical bits carried by the detector channel.

Alice's Bell measurement leaves Bob's half of the pair in one of four states
zeta_m; the label m travels through the relativistic channel, Bob decodes a
guess m' and applies the Pauli correction U_{m'}. All probabilities are
propagated exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from . import qmath
from .capacity import Ensemble, classical_capacity_closed_form, holevo_numeric, holevo_quantity
from .channel import (
    VARIANT_IDS,
    ChannelModel,
    apply,
    build_channel,
    build_variant_channel,
    variant_nus,
)
from .field import CorrelatorSet, DetectorConfig, correlators, is_spacelike
from .quadrature import DEFAULT_TOL

LABELS = ("00", "01", "10", "11")
SCHEMES = ("two_binary_uses", "variant_four_message")
CORRECTIONS = {"00": qmath.I2, "01": qmath.SZ, "10": qmath.SX, "11": qmath.SY}

_S = 1.0 / math.sqrt(2.0)
# Bell vectors on (input qubit, Alice's half), basis |00>, |01>, |10>, |11>
BELL_VECTORS = {
    "00": np.array([_S, 0, 0, _S], dtype=complex),   # Phi+
    "01": np.array([_S, 0, 0, -_S], dtype=complex),  # Phi-
    "10": np.array([0, _S, _S, 0], dtype=complex),   # Psi+
    "11": np.array([0, _S, -_S, 0], dtype=complex),  # Psi-
}


def _check_label(m: str) -> str:
    if m not in LABELS:
        raise ValueError(f"message label must be one of {LABELS}, got {m!r}")
    return m


def zeta(m: str, psi: qmath.PureQubit) -> qmath.PureQubit:
    a, b = psi.alpha, psi.beta
    return {
        "00": qmath.PureQubit(a, b),
        "01": qmath.PureQubit(a, -b),
        "10": qmath.PureQubit(b, a),
        "11": qmath.PureQubit(b, -a),
    }[_check_label(m)]


@dataclass(frozen=True)
class BellOutcome:
    label: str
    bell_state: np.ndarray
    conditional_state: qmath.PureQubit
    probability: float


def bell_decompose(psi: qmath.PureQubit) -> list[BellOutcome]:
    """Project psi (x) Phi+ onto the Bell basis of the first two qubits.

    The Born probability of each outcome is computed from the three-qubit
    state; the attached conditional state is zeta_m, which equals Bob's
    post-measurement state up to a global phase.
    """
    full = np.kron(psi.vector, BELL_VECTORS["00"])
    out = []
    for m in LABELS:
        bra = BELL_VECTORS[m].conj()
        bob = np.einsum("i,ij->j", bra, full.reshape(4, 2))
        out.append(BellOutcome(m, qmath.projector(BELL_VECTORS[m]), zeta(m, psi), float(np.vdot(bob, bob).real)))
    return out


def correction_unitary(m: str) -> np.ndarray:
    return CORRECTIONS[_check_label(m)].copy()


def correction_fidelity(m: str, m_guess: str, psi: qmath.PureQubit) -> float:
    """|<zeta_00| U_{m'} |zeta_m>|^2."""
    v = correction_unitary(m_guess) @ zeta(m, psi).vector
    return float(min(1.0, abs(np.vdot(psi.vector, v)) ** 2))


@dataclass(frozen=True)
class EncodingPlan:
    scheme: str
    label: str
    states: tuple[np.ndarray, ...] = ()
    variant: str | None = None


def bit_state(bit: str, monopole_phase: float = 0.0) -> np.ndarray:
    """Bit 0 -> +1 eigenstate of mu_A, bit 1 -> -1 eigenstate."""
    sign = {"0": 1.0, "1": -1.0}[bit]
    return qmath.projector(np.array([1.0, sign * np.exp(1j * monopole_phase)]) * _S)


def encode_message(m: str, scheme: str = "two_binary_uses", monopole_phase: float = 0.0) -> EncodingPlan:
    _check_label(m)
    if scheme == "two_binary_uses":
        return EncodingPlan(scheme, m, tuple(bit_state(b, monopole_phase) for b in m))
    if scheme == "variant_four_message":
        return EncodingPlan(scheme, m, (), m)
    raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")


def helstrom_povm(rho0: np.ndarray, rho1: np.ndarray) -> tuple[tuple[np.ndarray, np.ndarray], float]:
    """Optimal equal-prior discrimination of two known states."""
    diff = np.asarray(rho0) - np.asarray(rho1)
    w, v = np.linalg.eigh(0.5 * (diff + qmath.dagger(diff)))
    pos = v[:, w > 0]
    e0 = pos @ qmath.dagger(pos)
    e1 = np.eye(len(w)) - e0
    return (e0, e1), 0.5 + 0.25 * float(np.abs(w).sum())


def helstrom_decode(ch: ChannelModel, rho0: np.ndarray, rho1: np.ndarray) -> tuple[tuple[np.ndarray, np.ndarray], float]:
    return helstrom_povm(apply(ch, rho0), apply(ch, rho1))


def pretty_good_measurement(states: Sequence[np.ndarray], probs: Sequence[float] | None = None) -> list[np.ndarray]:
    """E_m = S^{-1/2} p_m rho_m S^{-1/2}, with S = sum p_m rho_m (pseudo-inverse off support)."""
    n = len(states)
    probs = [1.0 / n] * n if probs is None else list(probs)
    s = sum(p * r for p, r in zip(probs, states))
    w, v = np.linalg.eigh(0.5 * (s + qmath.dagger(s)))
    inv = np.where(w > 1e-14, 1.0 / np.sqrt(np.where(w > 1e-14, w, 1.0)), 0.0)
    root = (v * inv) @ qmath.dagger(v)
    povm = [root @ (p * r) @ root for p, r in zip(probs, states)]
    # complete on the kernel of S so the POVM sums to the identity
    kernel = v[:, w <= 1e-14]
    if kernel.size:
        povm[0] = povm[0] + kernel @ qmath.dagger(kernel)
    return povm


def confusion_from_povm(povm: Sequence[np.ndarray], outputs: Sequence[np.ndarray]) -> np.ndarray:
    """P[m, m'] = tr(E_{m'} rho_m), rows renormalised against round-off."""
    p = np.array([[np.real(np.trace(e @ r)) for e in povm] for r in outputs])
    p = np.clip(p, 0.0, None)
    return p / p.sum(axis=1, keepdims=True)


def causality_guard(a: DetectorConfig, b: DetectorConfig) -> str:
    """'spacelike' outside the Gaussian tail margin, 'timelike' clearly inside
    the future lightcone, 'marginal' in between."""
    if is_spacelike(a, b):
        return "spacelike"
    r = float(np.linalg.norm(np.subtract(b.position, a.position)))
    dt = abs(b.coupling_time - a.coupling_time)
    width = a.smearing_width + b.smearing_width
    if dt < r or abs(dt - r) <= width:
        return "marginal"
    return "timelike"


@dataclass(frozen=True)
class TeleportConfig:
    input: qmath.PureQubit
    detectors: tuple[DetectorConfig, DetectorConfig]
    rho_b0: np.ndarray = field(default_factory=lambda: np.diag([1.0, 0.0]).astype(complex))
    scheme: str = "two_binary_uses"
    seed: int = 0
    ideal_side_channel: bool = False
    tol: float = DEFAULT_TOL
    compute_holevo: bool = True

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; expected one of {SCHEMES}")
        if len(self.detectors) != 2:
            raise ValueError("exactly two detectors are required")
        qmath.check_density(self.rho_b0)


@dataclass(frozen=True)
class TeleportReport:
    confusion: np.ndarray
    per_outcome_fidelity: np.ndarray
    average_fidelity: float
    haar_average_fidelity: float
    capacity_closed_form: float
    holevo: float
    causal_status: str
    scheme: str
    correlators: CorrelatorSet | None
    bit_success: float | None
    outcome_probabilities: np.ndarray
    uncorrected_average_state: np.ndarray
    corrected_average_state: np.ndarray

    def to_dict(self) -> dict[str, Any]:
        def mat(m):
            m = np.asarray(m)
            if np.iscomplexobj(m):
                return {"re": m.real.tolist(), "im": m.imag.tolist()}
            return m.tolist()

        corr = self.correlators
        return {
            "scheme": self.scheme,
            "causal_status": self.causal_status,
            "average_fidelity": self.average_fidelity,
            "haar_average_fidelity": self.haar_average_fidelity,
            "capacity_closed_form": self.capacity_closed_form,
            "holevo": self.holevo,
            "bit_success": self.bit_success,
            "confusion": mat(self.confusion),
            "per_outcome_fidelity": mat(self.per_outcome_fidelity),
            "outcome_probabilities": mat(self.outcome_probabilities),
            "uncorrected_average_state": mat(self.uncorrected_average_state),
            "corrected_average_state": mat(self.corrected_average_state),
            "correlators": None
            if corr is None
            else {"w_aa": corr.w_aa, "w_bb": corr.w_bb, "re_w_ab": corr.re_w_ab, "e_ab": corr.e_ab, "nu_b": corr.nu_b},
        }


def fidelity_table(psi: qmath.PureQubit) -> np.ndarray:
    return np.array([[correction_fidelity(m, g, psi) for g in LABELS] for m in LABELS])


def average_fidelity(confusion: np.ndarray, fid: np.ndarray) -> float:
    return float(min(1.0, max(0.0, 0.25 * np.sum(confusion * fid))))


def haar_average_fidelity(confusion: np.ndarray) -> float:
    """Right net Pauli keeps a Haar-random input (fidelity 1); any other Pauli
    averages to 1/3."""
    correct = np.diag(confusion)
    return float(0.25 * np.sum(correct + (1.0 - correct) / 3.0))


def _binary_confusion(ch: ChannelModel, phase: float) -> tuple[np.ndarray, float]:
    outs = [apply(ch, bit_state(b, phase)) for b in "01"]
    povm, p_succ = helstrom_povm(*outs)
    return confusion_from_povm(povm, outs), p_succ


def run_teleport(cfg: TeleportConfig) -> TeleportReport:
    a, b = cfg.detectors
    psi = cfg.input
    outcomes = bell_decompose(psi)
    probs = np.array([o.probability for o in outcomes])
    status = causality_guard(a, b)
    corr = None
    capacity = holevo = 0.0
    bit_success = None

    if cfg.ideal_side_channel:
        confusion = np.eye(4)
        capacity = holevo = 1.0
    else:
        corr = correlators(a, b, cfg.tol)
        capacity = classical_capacity_closed_form(corr)
        if cfg.scheme == "two_binary_uses":
            ch = build_channel(a, b, cfg.rho_b0, corr, cfg.tol)
            per_bit, bit_success = _binary_confusion(ch, a.monopole_phase)
            # independent re-prepared uses; first label character is the first use
            confusion = np.kron(per_bit, per_bit)
            if cfg.compute_holevo:
                holevo = holevo_numeric(ch, seed=cfg.seed)[0]
        else:
            nus = variant_nus(b, cfg.tol)
            chans = [build_variant_channel(m, a, b, cfg.rho_b0, nus[m], cfg.tol) for m in VARIANT_IDS]
            outs = [apply(c, cfg.rho_b0) for c in chans]
            confusion = confusion_from_povm(pretty_good_measurement(outs), outs)
            ens = Ensemble(tuple(outs), (0.25,) * 4)
            holevo = holevo_quantity(lambda r: r, ens)

    fid = fidelity_table(psi)
    zetas = [o.conditional_state.projector() for o in outcomes]
    uncorrected = sum(p * z for p, z in zip(probs, zetas))
    corrected = sum(
        probs[i] * confusion[i, j] * CORRECTIONS[g] @ zetas[i] @ CORRECTIONS[g].conj().T
        for i in range(4)
        for j, g in enumerate(LABELS)
    )
    return TeleportReport(
        confusion=confusion,
        per_outcome_fidelity=fid,
        average_fidelity=average_fidelity(confusion, fid),
        haar_average_fidelity=haar_average_fidelity(confusion),
        capacity_closed_form=capacity,
        holevo=holevo,
        causal_status=status,
        scheme=cfg.scheme,
        correlators=corr,
        bit_success=bit_success,
        outcome_probabilities=probs,
        uncorrected_average_state=uncorrected,
        corrected_average_state=corrected,
    )
