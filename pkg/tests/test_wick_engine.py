import itertools
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qftk.config import FockConfig
from qftk.errors import SingularSymbolError
from qftk.field_kernels import ANNIH, CREAT, dirac_kernel, photon_kernel
from qftk.fock_oracle import build_fock, represent
from qftk.test_spaces import QuadratureHints, gaussian_spacetime
from qftk.wick_engine import (
    PairingSymbol,
    can_contract,
    contraction_metric,
    convolve,
    d0_av,
    integrate_out,
    normal_order_product,
    permutation_parity,
    polarity_expansion,
    s_ret,
    smeared_pairing,
    wick_same_point,
    wick_tensor,
)


def inversion_parity(perm):
    inv = sum(1 for i in range(len(perm)) for j in range(i + 1, len(perm)) if perm[i] > perm[j])
    return -1 if inv % 2 else 1


@given(st.permutations(list(range(7))))
def test_permutation_parity_matches_inversion_count(perm):
    assert permutation_parity(perm) == inversion_parity(perm)


@given(st.permutations(list(range(6))), st.permutations(list(range(6))))
def test_parity_is_multiplicative(a, b):
    composed = [a[i] for i in b]
    assert permutation_parity(composed) == permutation_parity(a) * permutation_parity(b)


def _pool():
    return [
        dirac_kernel("dirac_standard", ANNIH, 0),
        dirac_kernel("dirac_standard", CREAT, 1),
        dirac_kernel("dirac_standard", ANNIH, 2, adjoint=True),
        dirac_kernel("dirac_standard", CREAT, 3, adjoint=True),
        photon_kernel("photon_identityB", ANNIH, 1),
        photon_kernel("photon_identityB", CREAT, 2),
    ]


@given(st.lists(st.integers(0, 5), min_size=1, max_size=6))
def test_wick_tensor_orders_and_signs(idx):
    ops = [_pool()[i] for i in idx]
    kp = wick_tensor(ops)
    flags = [f.is_creator for f in kp.factors]
    assert flags == sorted(flags, reverse=True)
    fermi_order = [g for g, f in zip(kp.groups, kp.factors) if f.fermionic]
    assert kp.sign == inversion_parity(fermi_order)
    assert kp.l == sum(flags) and kp.m == len(flags) - sum(flags)


def test_bosons_never_change_the_sign():
    a = photon_kernel("photon_identityB", ANNIH, 0)
    c = photon_kernel("photon_identityB", CREAT, 0)
    assert wick_tensor([a, a, c, c]).sign == 1


def test_target_order_validation():
    ops = [dirac_kernel("dirac_standard", ANNIH, 0), dirac_kernel("dirac_standard", CREAT, 0)]
    with pytest.raises(ValueError):
        wick_tensor(ops, target=[0, 1])
    with pytest.raises(ValueError):
        wick_tensor(ops, target=[1, 1])
    assert wick_tensor(ops, target=[1, 0]).sign == -1


def test_polarity_expansion_size():
    comps = [dirac_kernel("dirac_standard", ANNIH, 0, adjoint=True), dirac_kernel("dirac_standard", ANNIH, 1),
             photon_kernel("photon_identityB", ANNIH, 2)]
    terms = polarity_expansion(comps, coeff=2.0)
    assert len(terms) == 8
    assert all(t.coeff == 2.0 for t in terms)


def test_contraction_rules():
    psi_a = dirac_kernel("dirac_standard", ANNIH, 0)
    psi_c = dirac_kernel("dirac_standard", CREAT, 0)
    bar_c = dirac_kernel("dirac_standard", CREAT, 0, adjoint=True)
    bar_a = dirac_kernel("dirac_standard", ANNIH, 0, adjoint=True)
    assert can_contract(psi_a, bar_c)  # electron slots
    assert can_contract(bar_a, psi_c)  # positron slots
    assert not can_contract(psi_a, psi_c)
    assert not can_contract(bar_c, psi_a)
    assert not can_contract(psi_a, photon_kernel("photon_identityB", CREAT, 0))
    assert not can_contract(photon_kernel("photon_identityB", ANNIH, 0), photon_kernel("photon_identityB", CREAT, 1))
    assert np.array_equal(contraction_metric(photon_kernel("photon_identityB", ANNIH, 0)), [-1, 1, 1, 1])


def test_pattern_count_for_complete_bipartite_graph():
    # two electron annihilators against three electron creators, all slots overlapping
    a = dirac_kernel("dirac_standard", ANNIH, None)
    c = dirac_kernel("dirac_standard", CREAT, None, adjoint=True)
    x1 = wick_same_point([a, a])
    x2 = wick_same_point([c, c, c])
    terms = normal_order_product(x1, x2)
    expected = sum(len(list(itertools.combinations(range(2), k))) * len(list(itertools.permutations(range(3), k)))
                   for k in range(3))
    assert len(terms) == expected
    assert [t.pattern for t in terms] == sorted(t.pattern for t in terms)


def test_symbols_and_singular_set():
    k = np.array([[2.0, 0.3, 0.0, 0.0]])
    assert np.allclose(d0_av().scalar(k), 1.0 / (0.09 - 4.0))
    with pytest.raises(SingularSymbolError):
        d0_av().scalar(np.array([[1.0, 1.0, 0.0, 0.0]]))
    shifted = PairingSymbol("D0_ret", eps_shift=0.1).scalar(np.array([[1.0, 1.0, 0.0, 0.0]]))
    assert np.isfinite(shifted).all()
    S = s_ret(1.0)(np.array([[3.0, 0.5, 0.0, 0.0]]))
    assert S.shape == (1, 4, 4)
    with pytest.raises(ValueError):
        PairingSymbol("Feynman")


def test_integrate_out_and_convolve_bookkeeping():
    kp = wick_same_point([photon_kernel("photon_identityB", ANNIH, 0)])
    conv = convolve(d0_av(), kp, 0)
    assert len(conv.convolutions) == 1
    done = integrate_out(conv, "spacetime", 0)
    with pytest.raises(ValueError):
        integrate_out(done, "spacetime", 0)
    with pytest.raises(ValueError):
        integrate_out(kp, "time", 0)
    with pytest.raises(ValueError):
        integrate_out(kp, "spacetime", 3)


def test_smeared_pairing_vanishes_without_contraction():
    phi = gaussian_spacetime(1.0)
    a = dirac_kernel("dirac_standard", ANNIH, 0)
    assert smeared_pairing(a, phi, a, phi) == 0


# ----------------------------------------------------------------------------- Wick theorem on a tiny space


@pytest.fixture(scope="module")
def tiny_fock():
    return build_fock(FockConfig(k1=1, k2=1, n_max=2, quadrature=QuadratureHints(n_r=16, n_theta=8, n_phi=16)))


def _expansion_residual(F, m1, m2, x1, x2, drop_contractions=False):
    xs = {0: x1, 1: x2}
    direct = represent(F, m1, {0: x1}) @ represent(F, m2, {0: x2})
    total = 0 * F.identity()
    for term in normal_order_product(m1, m2):
        if drop_contractions and term.pairs:
            continue
        value = 1.0 + 0j
        for fa, ga, fb, gb in term.pairs:
            value *= F.truncated_pairing(fa, xs[ga], fb, xs[gb])
        total = total + value * represent(F, term.remainder, xs)
    photons = sum(f.species == "photon" and f.is_creator for f in m1.factors + m2.factors)
    safe = np.flatnonzero(F.safe_sector(photons))
    diff = (direct - total).tocsc()[:, safe]
    return float(np.max(np.abs(diff.toarray()))) if diff.nnz else 0.0


def _current(pols, a, b):
    comps = [dirac_kernel("dirac_standard", ANNIH, a, adjoint=True), dirac_kernel("dirac_standard", ANNIH, b)]
    return wick_same_point([replace(f, polarity=p) for f, p in zip(comps, pols)])


def test_wick_theorem_on_bilinears(tiny_fock):
    rng = np.random.default_rng(3)
    x1, x2 = rng.normal(scale=0.5, size=(2, 4))
    for p1 in itertools.product((ANNIH, CREAT), repeat=2):
        for p2 in itertools.product((ANNIH, CREAT), repeat=2):
            assert _expansion_residual(tiny_fock, _current(p1, 0, 2), _current(p2, 2, 0), x1, x2) < 1e-10


def test_dropping_contractions_breaks_the_theorem(tiny_fock):
    """Mutation check: the comparison is sensitive to the contraction terms."""
    rng = np.random.default_rng(3)
    x1, x2 = rng.normal(scale=0.5, size=(2, 4))
    m1 = _current((ANNIH, ANNIH), 0, 0)
    m2 = _current((CREAT, CREAT), 0, 0)
    assert _expansion_residual(tiny_fock, m1, m2, x1, x2) < 1e-10
    assert _expansion_residual(tiny_fock, m1, m2, x1, x2, drop_contractions=True) > 1e-3


def test_flipping_a_sign_breaks_the_theorem(tiny_fock, monkeypatch):
    """Mutation check: a wrong fermionic sign in the expansion is detected."""
    import qftk.wick_engine as we

    rng = np.random.default_rng(4)
    x1, x2 = rng.normal(scale=0.5, size=(2, 4))
    m1 = _current((ANNIH, ANNIH), 0, 0)
    m2 = _current((CREAT, CREAT), 0, 0)
    monkeypatch.setattr(we, "fermionic_sign", lambda factors, order: 1)
    assert _expansion_residual(tiny_fock, m1, m2, x1, x2) > 1e-3
