"""Quasifree expectation values of products of cos/sin of smeared fields.

Every operator here lives in the span of Weyl generators
``W(E(a f_A + b f_B)) = exp(i phi(a f_A + b f_B))``. A product of two
generators picks up the phase ``exp(-i/2 E(f, g))`` and a quasifree state
assigns ``exp(-W(f, f)/2)`` to each generator, so expectation values of any
finite product of trig operators reduce to finite sums of exponentials.
"""

from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .field import CorrelatorSet

TRIG_KINDS = ("c", "s")


@dataclass(frozen=True)
class WeylWord:
    """weight * phase * W(E(coeff_a f_A + coeff_b f_B))."""

    coeff_a: float
    coeff_b: float
    phase: complex = 1.0 + 0.0j
    weight: complex = 1.0 + 0.0j

    def __post_init__(self):
        if abs(abs(self.phase) - 1.0) > 1e-12:
            raise ValueError(f"phase must have unit modulus, got {self.phase!r}")

    @property
    def amplitude(self) -> complex:
        return self.weight * self.phase

    def scaled(self, factor: complex) -> "WeylWord":
        return WeylWord(self.coeff_a, self.coeff_b, self.phase, self.weight * factor)

    def adjoint(self) -> "WeylWord":
        return WeylWord(-self.coeff_a, -self.coeff_b, self.phase.conjugate(), complex(self.weight).conjugate())


IDENTITY = WeylWord(0.0, 0.0)


@dataclass(frozen=True)
class TrigFactor:
    """cos or sin of phi(coeff_a f_A + coeff_b f_B).

    The usual single-detector factors are built with :meth:`on`; other
    coefficient pairs appear when checking product-to-sum identities.
    """

    kind: str
    coeff_a: float = 0.0
    coeff_b: float = 0.0

    def __post_init__(self):
        if self.kind not in TRIG_KINDS:
            raise ValueError(f"trig kind must be 'c' or 's', got {self.kind!r}")

    @classmethod
    def on(cls, detector: str, kind: str) -> "TrigFactor":
        if detector == "A":
            return cls(kind, 1.0, 0.0)
        if detector == "B":
            return cls(kind, 0.0, 1.0)
        raise ValueError(f"unknown detector {detector!r}")

    @property
    def detector(self) -> str | None:
        if self.coeff_b == 0.0 and self.coeff_a == 1.0:
            return "A"
        if self.coeff_a == 0.0 and self.coeff_b == 1.0:
            return "B"
        return None


def trig_expand(f: TrigFactor) -> list[WeylWord]:
    """cos x = (e^{ix} + e^{-ix})/2 and sin x = (e^{ix} - e^{-ix})/2i."""
    a, b = f.coeff_a, f.coeff_b
    if f.kind == "c":
        return [WeylWord(a, b, weight=0.5), WeylWord(-a, -b, weight=0.5)]
    return [WeylWord(a, b, weight=-0.5j), WeylWord(-a, -b, weight=0.5j)]


def weyl_product(u: WeylWord, v: WeylWord, corr: CorrelatorSet) -> WeylWord:
    """W(Ef) W(Eg) = exp(-i/2 E(f, g)) W(E(f + g))."""
    symplectic = (u.coeff_a * v.coeff_b - u.coeff_b * v.coeff_a) * corr.e_ab
    return WeylWord(
        u.coeff_a + v.coeff_a,
        u.coeff_b + v.coeff_b,
        u.phase * v.phase * cmath.exp(-0.5j * symplectic),
        u.weight * v.weight,
    )


def quasifree_expectation(w: WeylWord, corr: CorrelatorSet) -> complex:
    a, b = w.coeff_a, w.coeff_b
    quad = a * a * corr.w_aa + b * b * corr.w_bb + 2.0 * a * b * corr.re_w_ab
    return w.weight * w.phase * math.exp(-0.5 * quad)


def multiply(left: Sequence[WeylWord], right: Sequence[WeylWord], corr: CorrelatorSet) -> list[WeylWord]:
    """Product of two linear combinations of Weyl words."""
    return [weyl_product(u, v, corr) for u in left for v in right]


def expectation(words: Iterable[WeylWord], corr: CorrelatorSet) -> complex:
    return complex(sum(quasifree_expectation(w, corr) for w in words))


def expand_product(factors: Sequence[TrigFactor], corr: CorrelatorSet) -> list[WeylWord]:
    words = [IDENTITY]
    for f in factors:
        words = multiply(words, trig_expand(f), corr)
    return words


def expectation_of_trig_product(factors: Sequence[TrigFactor], corr: CorrelatorSet) -> complex:
    """omega(X_1 X_2 ... X_n) for trig factors, folded left to right."""
    if len(factors) > 8:
        raise ValueError("at most 8 trig factors are supported")
    return expectation(expand_product(factors, corr), corr)


def gamma(indices: str, corr: CorrelatorSet) -> complex:
    """omega(X_A^(i) X_B^(j) X_B^(k) X_A^(l)) for ``indices = "ijkl"``."""
    if len(indices) != 4 or any(c not in TRIG_KINDS for c in indices):
        raise ValueError(f"gamma needs four indices from 'cs', got {indices!r}")
    i, j, k, l = indices
    factors = [TrigFactor.on("A", i), TrigFactor.on("B", j), TrigFactor.on("B", k), TrigFactor.on("A", l)]
    return expectation_of_trig_product(factors, corr)


def gamma_receiver(indices: str, corr: CorrelatorSet) -> complex:
    """gamma with the receiver's pair written first: ``"ijkl"`` means
    omega(X_A^(j) X_B^(i) X_B^(l) X_A^(k)).

    This is the labelling in which the closed-form coefficient identities are
    usually quoted (keep = cccc + cssc, flip = sccs + ssss, ...).
    """
    if len(indices) != 4:
        raise ValueError(f"gamma needs four indices from 'cs', got {indices!r}")
    i, j, k, l = indices
    return gamma(j + i + l + k, corr)


def gamma_table(corr: CorrelatorSet) -> dict[str, complex]:
    return {"".join(idx): gamma("".join(idx), corr) for idx in itertools.product(TRIG_KINDS, repeat=4)}


def receiver_coefficients(corr: CorrelatorSet) -> dict[str, complex]:
    """The four gamma combinations that survive in the receiver's reduced state.

    Tracing out the sender pairs the outer (A) indices, so the sums run over
    the first and last index with the inner (B) pair held fixed:

    ``keep``    gamma_cccc + gamma_sccs   coefficient of rho_B
    ``flip``    gamma_cssc + gamma_ssss   coefficient of mu_B rho_B mu_B
    ``coh_sc``  gamma_scsc - gamma_ccss   multiplies i<mu_A> on -i mu_B rho_B
    ``coh_cs``  gamma_sscc - gamma_cscs   multiplies i<mu_A> on  i rho_B mu_B
    """
    g = gamma_table(corr)
    return {
        "keep": g["cccc"] + g["sccs"],
        "flip": g["cssc"] + g["ssss"],
        "coh_sc": g["scsc"] - g["ccss"],
        "coh_cs": g["sscc"] - g["cscs"],
    }


def printed_coefficients(corr: CorrelatorSet) -> dict[str, complex]:
    """Closed forms (1 +- nu_B cos 2E)/2 and (i/2) nu_B sin 2E."""
    nu, e = corr.nu_b, corr.e_ab
    return {
        "keep": 0.5 * (1.0 + nu * math.cos(2 * e)),
        "flip": 0.5 * (1.0 - nu * math.cos(2 * e)),
        "coh_sc": 0.5j * nu * math.sin(2 * e),
        "coh_cs": 0.5j * nu * math.sin(2 * e),
    }


@dataclass(frozen=True)
class ProductToSumReport:
    max_deviation: float
    n_probes: int
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.tolerance


def _cos(a: float, b: float) -> list[WeylWord]:
    return trig_expand(TrigFactor("c", a, b))


def _sin(a: float, b: float) -> list[WeylWord]:
    return trig_expand(TrigFactor("s", a, b))


def _scale(words: Sequence[WeylWord], factor: complex) -> list[WeylWord]:
    return [w.scaled(factor) for w in words]


def product_to_sum_sides(
    i: tuple[float, float], j: tuple[float, float], corr: CorrelatorSet, *, e_sign: float = 1.0
) -> list[tuple[list[WeylWord], list[WeylWord]]]:
    """Both sides of the four twisted product-to-sum identities.

    ``i`` and ``j`` are coefficient pairs of two smearing functions in the
    (f_A, f_B) span. ``e_sign`` multiplies E(f_i, f_j) on the right-hand
    sides only and exists so that a deliberately wrong sign can be injected.
    """
    (ai, bi), (aj, bj) = i, j
    e_ij = e_sign * (ai * bj - bi * aj) * corr.e_ab
    minus = cmath.exp(-0.5j * e_ij)
    plus = cmath.exp(0.5j * e_ij)
    s_plus, s_minus = (ai + aj, bi + bj), (ai - aj, bi - bj)
    lhs_cc = _scale(multiply(_cos(ai, bi), _cos(aj, bj), corr), 2.0)
    lhs_ss = _scale(multiply(_sin(ai, bi), _sin(aj, bj), corr), -2.0)
    lhs_cs = _scale(multiply(_cos(ai, bi), _sin(aj, bj), corr), 2.0)
    lhs_sc = _scale(multiply(_sin(ai, bi), _cos(aj, bj), corr), 2.0)
    rhs_cc = _scale(_cos(*s_plus), minus) + _scale(_cos(*s_minus), plus)
    rhs_ss = _scale(_cos(*s_plus), minus) + _scale(_cos(*s_minus), -plus)
    rhs_cs = _scale(_sin(*s_plus), minus) + _scale(_sin(*s_minus), -plus)
    rhs_sc = _scale(_sin(*s_plus), minus) + _scale(_sin(*s_minus), plus)
    return [(lhs_cc, rhs_cc), (lhs_ss, rhs_ss), (lhs_cs, rhs_cs), (lhs_sc, rhs_sc)]


def verify_product_to_sum(
    corr: CorrelatorSet,
    *,
    n_probes: int = 100,
    rng: np.random.Generator | None = None,
    tol: float = 1e-10,
    e_sign: float = 1.0,
) -> ProductToSumReport:
    """Check the twisted product-to-sum identities inside expectation values.

    Each identity is sandwiched between random Weyl words U, V and both sides
    of omega(U X V) are compared, for the pairs (A, B), (B, A), (A, A) and
    (B, B).
    """
    rng = np.random.default_rng(0) if rng is None else rng
    pairs = [((1.0, 0.0), (0.0, 1.0)), ((0.0, 1.0), (1.0, 0.0)), ((1.0, 0.0), (1.0, 0.0)), ((0.0, 1.0), (0.0, 1.0))]
    sides = [s for i, j in pairs for s in product_to_sum_sides(i, j, corr, e_sign=e_sign)]
    worst = 0.0
    for _ in range(n_probes):
        u = [WeylWord(*rng.uniform(-2.0, 2.0, size=2))]
        v = [WeylWord(*rng.uniform(-2.0, 2.0, size=2))]
        for lhs, rhs in sides:
            left = expectation(multiply(multiply(u, lhs, corr), v, corr), corr)
            right = expectation(multiply(multiply(u, rhs, corr), v, corr), corr)
            worst = max(worst, abs(left - right))
    return ProductToSumReport(worst, n_probes, tol)
