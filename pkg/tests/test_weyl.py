import cmath
import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import fock_weyl
from relteleport.field import CorrelatorSet, sample_correlators
from relteleport.weyl import (
    IDENTITY,
    TrigFactor,
    WeylWord,
    expectation_of_trig_product,
    gamma,
    gamma_receiver,
    gamma_table,
    printed_coefficients,
    quasifree_expectation,
    receiver_coefficients,
    trig_expand,
    verify_product_to_sum,
    weyl_product,
)

CORR = CorrelatorSet(0.4, 0.3, 0.1, 0.3)
seeds = st.integers(0, 2**32 - 1)


def test_word_phase_must_be_unit():
    with pytest.raises(ValueError):
        WeylWord(1.0, 0.0, phase=1.1)


def test_trig_expand_cos_a():
    words = trig_expand(TrigFactor.on("A", "c"))
    assert [(w.coeff_a, w.weight) for w in words] == [(1.0, 0.5), (-1.0, 0.5)]


def test_trig_expand_sin_b():
    words = trig_expand(TrigFactor.on("B", "s"))
    assert [(w.coeff_b, w.weight) for w in words] == [(1.0, 1 / 2j), (-1.0, -1 / 2j)]


def test_trig_expand_zero_coupling_is_identity_pair():
    words = trig_expand(TrigFactor("c", 0.0, 0.0))
    assert all(w.coeff_a == 0 and w.coeff_b == 0 for w in words)
    assert sum(w.weight for w in words) == 1


def test_trig_factor_validation():
    with pytest.raises(ValueError):
        TrigFactor("t")
    with pytest.raises(ValueError):
        TrigFactor.on("C", "c")
    assert TrigFactor.on("B", "s").detector == "B"


def test_inverse_words_multiply_to_identity():
    u = WeylWord(0.7, -1.3)
    w = weyl_product(u, WeylWord(-0.7, 1.3), CORR)
    assert (w.coeff_a, w.coeff_b) == (0.0, 0.0) and w.phase == pytest.approx(1.0)


def test_same_detector_words_commute():
    w = weyl_product(WeylWord(1.0, 0.0), WeylWord(2.5, 0.0), CORR)
    assert w.phase == 1.0


@pytest.mark.parametrize("order,sign", [("AB", -1), ("BA", 1)])
def test_mixed_word_phase(order, sign):
    a, b = WeylWord(1.0, 0.0), WeylWord(0.0, 1.0)
    w = weyl_product(a, b, CORR) if order == "AB" else weyl_product(b, a, CORR)
    assert w.phase == pytest.approx(cmath.exp(sign * 0.15j), abs=1e-15)


@pytest.mark.parametrize("u,v", [((1.0, 0.0), (0.0, 1.0)), ((0.0, 1.0), (1.0, 0.0)), ((0.4, -0.3), (-0.2, 0.5))])
def test_weyl_product_vs_truncated_fock(u, v):
    """e^{iX} e^{iY} = e^{-i E(X,Y)/2} e^{i(X+Y)} checked on a single truncated mode."""
    dim, e_ab = 80, 0.3
    corr = CORR.with_e_ab(e_ab)
    w = weyl_product(WeylWord(*u), WeylWord(*v), corr)
    lhs = fock_weyl(*u, e_ab, dim) @ fock_weyl(*v, e_ab, dim)
    rhs = w.phase * fock_weyl(w.coeff_a, w.coeff_b, e_ab, dim)
    # compare on low-lying states, where truncation effects are negligible
    for n in range(4):
        ket = np.zeros(dim)
        ket[n] = 1.0
        out_l, out_r = lhs @ ket, rhs @ ket
        assert np.sum(np.abs(out_r[dim - 10:]) ** 2) <= 1e-10
        assert np.max(np.abs(out_l[: dim // 2] - out_r[: dim // 2])) <= 1e-8


def test_quasifree_examples():
    assert quasifree_expectation(IDENTITY, CORR) == 1
    assert quasifree_expectation(WeylWord(1.0, 0.0), CORR) == pytest.approx(math.exp(-CORR.w_aa / 2))
    assert quasifree_expectation(WeylWord(0.0, 2.0), CORR) == pytest.approx(CORR.nu_b)


def test_quasifree_vs_fock_vacuum():
    # with W_AA = |E|/2 = W_BB and Re W_AB = 0 the single-mode vacuum is the quasifree state
    e = 0.3
    corr = CorrelatorSet(e / 2, e / 2, 0.0, e)
    vac = np.zeros(80)
    vac[0] = 1
    for a, b in [(1.0, 0.0), (0.5, -1.2), (0.0, 2.0)]:
        ref = vac @ fock_weyl(a, b, e) @ vac
        assert quasifree_expectation(WeylWord(a, b), corr) == pytest.approx(ref, abs=1e-10)


def test_trig_product_vs_fock():
    e = 0.45
    corr = CorrelatorSet(e / 2, e / 2, 0.0, e)
    vac = np.zeros(80)
    vac[0] = 1

    def op(det, kind):
        u = fock_weyl(1.0, 0.0, e) if det == "A" else fock_weyl(0.0, 1.0, e)
        ui = np.linalg.inv(u)
        return (u + ui) / 2 if kind == "c" else (u - ui) / 2j

    for idx in itertools.product("cs", repeat=4):
        m = op("A", idx[0]) @ op("B", idx[1]) @ op("B", idx[2]) @ op("A", idx[3])
        assert gamma("".join(idx), corr) == pytest.approx(vac @ m @ vac, abs=1e-9)


def test_odd_sine_count_vanishes(rng):
    for corr in sample_correlators(rng, 20):
        for idx, val in gamma_table(corr).items():
            if idx.count("s") % 2:
                assert abs(val) <= 1e-15


def test_receiver_labelled_identities(rng):
    for corr in sample_correlators(rng, 100):
        g = lambda x: gamma_receiver(x, corr)
        nu, e = corr.nu_b, corr.e_ab
        assert abs(g("cccc") + g("cssc") - 0.5 * (1 + nu * math.cos(2 * e))) <= 1e-12
        assert abs(g("sccs") + g("ssss") - 0.5 * (1 - nu * math.cos(2 * e))) <= 1e-12
        assert abs(g("cscs") - g("ccss") - 0.5j * nu * math.sin(2 * e)) <= 1e-12
        assert abs(g("sscc") - g("scsc") - 0.5j * nu * math.sin(2 * e)) <= 1e-12


def test_receiver_coefficients_match_printed(rng):
    for corr in sample_correlators(rng, 50):
        got, want = receiver_coefficients(corr), printed_coefficients(corr)
        assert max(abs(got[k] - want[k]) for k in want) <= 1e-12


def test_literal_order_sums_depend_only_on_sender():
    # in the literal omega(X_A X_B X_B X_A) order these sums trace out Bob, not Alice
    corr = CorrelatorSet(0.3, 0.7, 0.1, 0.4)
    g = gamma_table(corr)
    assert g["cccc"] + g["cssc"] == pytest.approx(0.5 * (1 + corr.nu_a), abs=1e-12)


@given(seeds)
def test_coefficients_invariant_under_sender_perturbation(seed):
    rng = np.random.default_rng(seed)
    corr = next(sample_correlators(rng, 1))
    other = CorrelatorSet(corr.w_aa + rng.uniform(0, 3), corr.w_bb, rng.uniform(-2, 2), corr.e_ab)
    a, b = receiver_coefficients(corr), receiver_coefficients(other)
    assert max(abs(a[k] - b[k]) for k in a) <= 1e-12


@given(seeds)
def test_trig_product_hermiticity(seed):
    rng = np.random.default_rng(seed)
    corr = next(sample_correlators(rng, 1))
    n = int(rng.integers(1, 7))
    factors = [TrigFactor.on(rng.choice(["A", "B"]), rng.choice(["c", "s"])) for _ in range(n)]
    fwd = expectation_of_trig_product(factors, corr)
    back = expectation_of_trig_product(factors[::-1], corr)
    assert abs(fwd - np.conj(back)) <= 1e-12


def test_trig_product_length_cap():
    with pytest.raises(ValueError):
        expectation_of_trig_product([TrigFactor.on("A", "c")] * 9, CORR)


def test_gamma_index_validation():
    with pytest.raises(ValueError):
        gamma("ccc", CORR)
    with pytest.raises(ValueError):
        gamma("ccxc", CORR)


def test_product_to_sum_commuting_limit(rng):
    for corr in sample_correlators(rng, 5, spacelike=True):
        assert verify_product_to_sum(corr, n_probes=20, rng=rng).max_deviation <= 1e-12


def test_product_to_sum_timelike(rng):
    for corr in sample_correlators(rng, 5):
        assert verify_product_to_sum(corr, n_probes=20, rng=rng).passed


def test_product_to_sum_detects_wrong_sign():
    assert not verify_product_to_sum(CORR, n_probes=10, e_sign=-1.0).passed


def test_double_angle_same_detector():
    # 2 C^2 = C_{2f} + 1 inside any expectation
    for corr in (CORR, CORR.with_e_ab(0.0)):
        lhs = 2 * expectation_of_trig_product([TrigFactor.on("A", "c")] * 2, corr)
        rhs = expectation_of_trig_product([TrigFactor("c", 2.0, 0.0)], corr) + 1
        assert lhs == pytest.approx(rhs, abs=1e-14)
