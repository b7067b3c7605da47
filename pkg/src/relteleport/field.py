"""Smeared correlators of a massless scalar field in the Minkowski vacuum.

Each detector couples at a single instant ``coupling_time`` through an
isotropic normalised Gaussian of width ``smearing_width``, whose Fourier
transform is ``exp(-sigma^2 k^2 / 2)``. After the angular integrals are done
analytically every correlator is a one-dimensional integral over |k|:

    W(f_A, f_B) = lam_A lam_B / (4 pi^2) * int_0^inf dk k e^{-s k^2} e^{i k T} sinc(k r)

with ``s = (sigma_A^2 + sigma_B^2) / 2``, ``T = t_B - t_A`` and ``r`` the
distance between the centres. The causal propagator is twice the imaginary
part, ``E = W(f_A, f_B) - W(f_B, f_A)`` divided by i. Natural units.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterator, Sequence

import numpy as np

from .quadrature import DEFAULT_TOL, QuadResult, QuadratureError, integrate_1d

__all__ = [
    "DetectorConfig",
    "CorrelatorSet",
    "QuadratureError",
    "smeared_wightman_self",
    "smeared_wightman_cross_re",
    "smeared_causal_propagator",
    "correlators",
    "is_spacelike",
    "momentum_variance",
    "equal_time_commutator",
    "sample_correlators",
    "lightcone_propagator",
    "tune_alice_coupling",
]

SPACELIKE_EPS = 1e-12
# e^{-s k^2} below ~1e-20 past this many "widths"
_KMAX_EXPONENT = 46.0


@dataclass(frozen=True)
class DetectorConfig:
    """A delta-coupled Unruh-DeWitt detector.

    ``coupling_strength`` already absorbs the switching normalisation, so the
    smeared field operator is ``coupling_strength * phi(t, F)``.
    """

    label: str
    position: tuple[float, float, float] = (0.0, 0.0, 0.0)
    coupling_time: float = 0.0
    coupling_strength: float = 1.0
    smearing_width: float = 1.0
    gap: float = 0.0
    monopole_phase: float = 0.0

    def __post_init__(self):
        if self.label not in ("A", "B"):
            raise ValueError(f"detector label must be 'A' or 'B', got {self.label!r}")
        pos = tuple(float(x) for x in self.position)
        if len(pos) != 3:
            raise ValueError("position must be a 3-vector")
        object.__setattr__(self, "position", pos)
        if not self.smearing_width > 0:
            raise ValueError(f"smearing_width must be positive, got {self.smearing_width!r}")
        if not self.coupling_strength >= 0:
            raise ValueError(f"coupling_strength must be non-negative, got {self.coupling_strength!r}")

    def replace(self, **changes) -> "DetectorConfig":
        return replace(self, **changes)


@dataclass(frozen=True)
class CorrelatorSet:
    """The four field numbers a two-detector channel depends on."""

    w_aa: float
    w_bb: float
    re_w_ab: float
    e_ab: float
    abs_error: float = 0.0
    nu_b: float = field(init=False)

    def __post_init__(self):
        if self.w_aa < 0 or self.w_bb < 0:
            raise ValueError("self Wightman terms must be non-negative")
        object.__setattr__(self, "nu_b", math.exp(-2.0 * self.w_bb))

    @property
    def nu_a(self) -> float:
        return math.exp(-2.0 * self.w_aa)

    def cauchy_schwarz_gap(self) -> float:
        """w_aa*w_bb - |W_AB|^2; non-negative for a positive state."""
        return self.w_aa * self.w_bb - self.re_w_ab**2 - (0.5 * self.e_ab) ** 2

    def with_e_ab(self, e_ab: float) -> "CorrelatorSet":
        return CorrelatorSet(self.w_aa, self.w_bb, self.re_w_ab, e_ab, self.abs_error)


def _kmax(s: float) -> float:
    return math.sqrt(_KMAX_EXPONENT / s)


def _separation(a: DetectorConfig, b: DetectorConfig) -> tuple[float, float, float]:
    r = float(np.linalg.norm(np.subtract(b.position, a.position)))
    t = b.coupling_time - a.coupling_time
    s = 0.5 * (a.smearing_width**2 + b.smearing_width**2)
    return r, t, s


def _radial_moment(power: int, s: float, tol: float, label: str) -> QuadResult:
    """int_0^inf k^power e^{-s k^2} dk"""
    return integrate_1d(
        lambda k: k**power * math.exp(-s * k * k), 0.0, _kmax(s), abs_tol=tol, label=label
    )


def _smeared_kernel(r: float, t: float, s: float, kind: str, tol: float) -> QuadResult:
    """Radial integral behind Re W (kind='re') or E (kind='im') for |t|.

    For r beyond the smearing scale the sinc factor is split with
    product-to-sum identities so that every oscillation is carried by a
    Fourier weight; close to coincidence the sinc is kept in the integrand.
    """
    t = abs(t)
    kmax = _kmax(s)
    if r <= math.sqrt(s):
        def g(k):
            kr = k * r
            sinc = 1.0 if kr < 1e-8 else math.sin(kr) / kr
            return k * math.exp(-s * k * k) * sinc

        weight = "cos" if kind == "re" else "sin"
        return integrate_1d(g, 0.0, kmax, abs_tol=tol, weight=weight, omega=t, label=f"W[{kind}]")

    def gauss(k):
        return math.exp(-s * k * k)

    if kind == "re":
        # sin(kr) cos(kt) = [sin(k(r+t)) + sin(k(r-t))] / 2
        parts = [(+1.0, "sin", r + t), (+1.0, "sin", r - t)]
    else:
        # sin(kr) sin(kt) = [cos(k(r-t)) - cos(k(r+t))] / 2
        parts = [(+1.0, "cos", r - t), (-1.0, "cos", r + t)]
    total = 0.0
    err = 0.0
    nev = 0
    for sign, weight, omega in parts:
        res = integrate_1d(
            gauss, 0.0, kmax, abs_tol=tol * r, weight=weight, omega=omega, label=f"W[{kind}]"
        )
        total += sign * res.value
        err += res.error
        nev += res.evaluations
    return QuadResult(total / (2.0 * r), err / (2.0 * r), nev)


def smeared_wightman_self(d: DetectorConfig, tol: float = DEFAULT_TOL) -> float:
    """W(f, f) for one detector; always >= 0."""
    return _wightman_self(d, tol).value


def _wightman_self(d: DetectorConfig, tol: float) -> QuadResult:
    lam2 = d.coupling_strength**2
    if lam2 == 0.0:
        return QuadResult(0.0, 0.0, 0)
    pref = lam2 / (4.0 * math.pi**2)
    res = _radial_moment(1, d.smearing_width**2, tol / pref, "W(f,f)")
    return QuadResult(max(pref * res.value, 0.0), pref * res.error, res.evaluations)


def smeared_wightman_cross_re(a: DetectorConfig, b: DetectorConfig, tol: float = DEFAULT_TOL) -> float:
    """Re W(f_a, f_b); symmetric under exchange."""
    return _wightman_cross_re(a, b, tol).value


def _wightman_cross_re(a: DetectorConfig, b: DetectorConfig, tol: float) -> QuadResult:
    pref = a.coupling_strength * b.coupling_strength / (4.0 * math.pi**2)
    if pref == 0.0:
        return QuadResult(0.0, 0.0, 0)
    r, t, s = _separation(a, b)
    res = _smeared_kernel(r, t, s, "re", tol / pref)
    return QuadResult(pref * res.value, pref * res.error, res.evaluations)


def smeared_causal_propagator(a: DetectorConfig, b: DetectorConfig, tol: float = DEFAULT_TOL) -> float:
    """E(f_a, f_b), the smeared advanced-minus-retarded propagator.

    Positive when ``b`` couples later than ``a`` and sits near its future
    lightcone. Exchanging the detectors flips the sign exactly.
    """
    return _causal_propagator(a, b, tol).value


def _causal_propagator(a: DetectorConfig, b: DetectorConfig, tol: float) -> QuadResult:
    pref = a.coupling_strength * b.coupling_strength / (2.0 * math.pi**2)
    r, t, s = _separation(a, b)
    if pref == 0.0 or t == 0.0:
        return QuadResult(0.0, 0.0, 0)
    res = _smeared_kernel(r, t, s, "im", tol / pref)
    sign = 1.0 if t > 0 else -1.0
    return QuadResult(sign * pref * res.value, pref * res.error, res.evaluations)


def correlators(a: DetectorConfig, b: DetectorConfig, tol: float = DEFAULT_TOL) -> CorrelatorSet:
    """All field numbers needed for the A -> B channel."""
    parts = [_wightman_self(a, tol), _wightman_self(b, tol), _wightman_cross_re(a, b, tol), _causal_propagator(a, b, tol)]
    return CorrelatorSet(
        w_aa=parts[0].value,
        w_bb=parts[1].value,
        re_w_ab=parts[2].value,
        e_ab=parts[3].value,
        abs_error=max(p.error for p in parts),
    )


def is_spacelike(a: DetectorConfig, b: DetectorConfig, support_radius_sigmas: float = 5.0) -> bool:
    """Whether the two coupling regions count as spacelike separated.

    Gaussian profiles have no compact support, so each one is truncated at
    ``support_radius_sigmas`` widths. The residual propagator is then of
    order exp(-n^2 (s_a + s_b)^2 / (2 (s_a^2 + s_b^2))), which is small but not
    zero, and is largest when the two widths are very different.
    """
    r, t, _ = _separation(a, b)
    margin = support_radius_sigmas * (a.smearing_width + b.smearing_width)
    return abs(t) + SPACELIKE_EPS < r - margin


def momentum_variance(d: DetectorConfig, tol: float = DEFAULT_TOL) -> float:
    """<pi(f)^2> in the vacuum for the equal-time smeared conjugate momentum."""
    lam2 = d.coupling_strength**2
    if lam2 == 0.0:
        return 0.0
    pref = lam2 / (4.0 * math.pi**2)
    return pref * _radial_moment(3, d.smearing_width**2, tol / pref, "<pi(f)^2>").value


def equal_time_commutator(d: DetectorConfig, tol: float = DEFAULT_TOL) -> float:
    """c such that [phi(f), pi(f)] = i c at equal times, i.e. lam^2 int F^2."""
    lam2 = d.coupling_strength**2
    if lam2 == 0.0:
        return 0.0
    pref = lam2 / (2.0 * math.pi**2)
    return pref * _radial_moment(2, d.smearing_width**2, tol / pref, "int F^2").value


def sample_correlators(
    rng: np.random.Generator,
    n: int,
    *,
    max_w: float = 2.0,
    spacelike: bool = False,
) -> Iterator[CorrelatorSet]:
    """Random positive correlator sets, i.e. |W_AB|^2 <= W_AA W_BB."""
    for _ in range(n):
        w_aa = rng.uniform(0.0, max_w)
        w_bb = rng.uniform(0.0, max_w)
        radius = math.sqrt(w_aa * w_bb) * math.sqrt(rng.uniform())
        phase = rng.uniform(0.0, 2.0 * math.pi)
        re_w = radius * math.cos(phase)
        e_ab = 0.0 if spacelike else 2.0 * radius * math.sin(phase)
        yield CorrelatorSet(w_aa, w_bb, re_w, e_ab)


def lightcone_propagator(a: DetectorConfig, b: DetectorConfig) -> float:
    """Closed form of E(f_a, f_b) for Gaussian profiles.

    The Green function is supported on the lightcone, so after convolving
    the two Gaussians only the shell |x| = |T| contributes.
    """
    r, t, s = _separation(a, b)
    lam = a.coupling_strength * b.coupling_strength
    if lam == 0.0 or t == 0.0:
        return 0.0
    v = 2.0 * s
    sign = 1.0 if t > 0 else -1.0
    t = abs(t)
    if r < 1e-9 * math.sqrt(v):
        # limit r -> 0 of the shell average
        return sign * lam * t * math.exp(-t * t / (2 * v)) / ((2 * math.pi) ** 1.5 * v**1.5)
    amp = lam / (4.0 * math.sqrt(2.0) * math.pi**1.5 * r * math.sqrt(v))
    return sign * amp * (math.exp(-((r - t) ** 2) / (2 * v)) - math.exp(-((r + t) ** 2) / (2 * v)))


def tune_alice_coupling(a: DetectorConfig, b: DetectorConfig, target_e_ab: float, tol: float = DEFAULT_TOL) -> DetectorConfig:
    """Rescale Alice's coupling so that E(f_A, f_B) hits ``target_e_ab``.

    E is linear in Alice's coupling strength, so one evaluation suffices.
    """
    unit = smeared_causal_propagator(a.replace(coupling_strength=1.0), b, tol)
    if unit == 0.0 or unit * target_e_ab < 0:
        raise ValueError("cannot reach the target propagator from this geometry")
    return a.replace(coupling_strength=target_e_ab / unit)


def position_vector(values: Sequence[float]) -> tuple[float, float, float]:
    vals = tuple(float(v) for v in values)
    if len(vals) != 3:
        raise ValueError(f"expected 3 components, got {len(vals)}")
    return vals
