import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qftk.dirac_algebra import gamma, spinor_u, spinor_v
from qftk.errors import ClassViolation
from qftk.field_kernels import (
    ANNIH,
    CREAT,
    PlaneWaveKernel,
    derive_kernel,
    dirac_kernel,
    field_parts,
    identity_sqrt_b,
    photon_kernel,
    raised_derivative,
    smear_momentum,
    smear_spacetime,
)
from qftk.test_spaces import QuadratureHints, gaussian_spacetime, hermite_mode, make_schwartz_zero

coord = st.floats(-5.0, 5.0, allow_nan=False)
momenta = st.lists(st.tuples(coord, coord, coord), min_size=1, max_size=5).map(np.array)
polarities = st.sampled_from((ANNIH, CREAT))
dirac_variants = st.sampled_from(("dirac_standard", "dirac_local"))
reps = st.sampled_from(("standard", "chiral"))

UNIT = [tuple(int(i == mu) for i in range(4)) for mu in range(4)]


@given(momenta, polarities, dirac_variants, reps, st.booleans())
def test_dirac_kernels_solve_the_dirac_equation(p, pol, variant, rep, adjoint):
    m = 1.3
    k = dirac_kernel(variant, pol, adjoint=adjoint, m=m, rep=rep)
    amp = k.amplitude_matrix(p)  # [n, slot, component]
    if adjoint:
        # psi^dagger gamma^0 = psi-bar solves i d_mu psibar gamma^mu + m psibar = 0
        lhs = sum(1j * derive_kernel(k, UNIT[mu]).amplitude_matrix(p) @ gamma(rep, 0) @ gamma(rep, mu)
                  for mu in range(4)) + m * amp @ gamma(rep, 0)
    else:
        lhs = sum(1j * np.einsum("ba,nsa->nsb", gamma(rep, mu), derive_kernel(k, UNIT[mu]).amplitude_matrix(p))
                  for mu in range(4)) - m * amp
    assert np.allclose(lhs, 0.0, atol=1e-10 * (1 + np.max(np.abs(p)) ** 2))


@given(momenta.filter(lambda p: np.min(np.linalg.norm(p, axis=1)) > 1e-3), polarities, st.floats(0.0, 2.0))
def test_photon_kernels_solve_the_wave_equation(p, pol, eps):
    k = photon_kernel("photon_identityB", pol, eps_mass=eps)
    box = sum((1 if mu == 0 else -1) * derive_kernel(k, tuple(2 * u for u in UNIT[mu])).amplitude_matrix(p)
              for mu in range(4))
    assert np.allclose(box, -eps**2 * k.amplitude_matrix(p), atol=1e-9 * (1 + np.max(np.abs(p)) ** 2))


def test_slot_placement():
    p = np.array([[0.3, -0.1, 0.4]])
    assert dirac_kernel("dirac_standard", ANNIH).slot_support == (0, 1)
    assert dirac_kernel("dirac_standard", CREAT).slot_support == (2, 3)
    assert dirac_kernel("dirac_standard", ANNIH, adjoint=True).slot_support == (2, 3)
    amp = dirac_kernel("dirac_standard", ANNIH).amplitude_matrix(p)
    assert np.allclose(amp[0, 1], spinor_u("standard", 2, p[0]))
    assert np.allclose(amp[0, 2:], 0.0)
    amp = dirac_kernel("dirac_standard", CREAT).amplitude_matrix(p)
    assert np.allclose(amp[0, 2], spinor_v("standard", 1, p[0]))
    local = dirac_kernel("dirac_local", ANNIH).amplitude_matrix(p)
    E = np.sqrt(1 + np.sum(p * p))
    assert np.allclose(local * 2 * E, dirac_kernel("dirac_standard", ANNIH).amplitude_matrix(p))


def test_phase_signs():
    p = np.array([[0.0, 0.0, 0.0]])
    x = np.array([0.5, 0.0, 0.0, 0.0])
    k = dirac_kernel("dirac_standard", ANNIH, 0)
    assert np.allclose(k.phase(p, x), np.exp(-0.5j))
    assert np.allclose(field_parts(k)[1].phase(p, x), np.exp(0.5j))


def test_raised_derivative_sign():
    p = np.array([[0.2, 0.0, 0.0]])
    k = photon_kernel("photon_identityB", ANNIH, 0)
    # d^1 = -d_1; on exp(-i p.x) with p.x = E t - p1 x1, d_1 gives +i p1
    ratio = raised_derivative(k, 1).amplitude(p)[0, 0] / k.amplitude(p)[0, 0]
    assert np.allclose(ratio, -1j * 0.2)


def test_sqrt_b_variant_needs_provider():
    with pytest.raises(ValueError):
        photon_kernel("photon_sqrtB", ANNIH, 0)
    p = np.array([[0.1, 0.2, 0.3]])
    a = photon_kernel("photon_sqrtB", ANNIH, 1, sqrt_b=identity_sqrt_b).amplitude_matrix(p)
    b = photon_kernel("photon_identityB", ANNIH, 1).amplitude_matrix(p)
    assert np.allclose(a, b)


@pytest.mark.parametrize("kwargs", [
    dict(species="gluon", polarity=ANNIH, variant="dirac_standard"),
    dict(species="dirac", polarity="both", variant="dirac_standard"),
    dict(species="dirac", polarity=ANNIH, variant="photon_identityB"),
    dict(species="photon", polarity=ANNIH, variant="photon_identityB", adjoint=True),
    dict(species="dirac", polarity=ANNIH, variant="dirac_standard", deriv=(1, 0, 0)),
])
def test_kernel_validation(kwargs):
    with pytest.raises(ValueError):
        PlaneWaveKernel(**kwargs)
    with pytest.raises(IndexError):
        PlaneWaveKernel("dirac", ANNIH, "dirac_standard", component=4)


def test_json_round_trip():
    k = derive_kernel(dirac_kernel("dirac_local", CREAT, 2, adjoint=True), (0, 1, 0, 2)).scaled(0.5 - 2j)
    assert PlaneWaveKernel.from_json(k.to_json()) == k


def test_photon_smearing_requires_zero_class():
    h = hermite_mode(0, 0, 0, 0)
    with pytest.raises(ClassViolation):
        smear_momentum(photon_kernel("photon_identityB", ANNIH, 0), h)
    with pytest.raises(ClassViolation):
        smear_spacetime(photon_kernel("photon_identityB", ANNIH), gaussian_spacetime(1.0))
    smear_momentum(photon_kernel("photon_identityB", ANNIH, 0), make_schwartz_zero(h, 1.0))
    smear_spacetime(photon_kernel("photon_identityB", ANNIH), gaussian_spacetime(1.0, sigma=1.0))


def test_regularized_photon_shell_accepts_s00_without_certificate():
    out = smear_spacetime(photon_kernel("photon_identityB", ANNIH, eps_mass=0.1), gaussian_spacetime(1.0, sigma=1.0))
    assert out(np.array([[0.0, 0.0, 0.0]])).shape == (1, 4)


def test_smeared_derivative_matches_finite_difference():
    hints = QuadratureHints(64, 24, 24, tol=1e-8)
    f = smear_momentum(dirac_kernel("dirac_standard", ANNIH), hermite_mode(1, 0, 0, 0, hints) + hermite_mode(0, 0, 0, 1, hints))
    x = np.array([0.3, -0.2, 0.1, 0.4])
    h = 1e-4
    for mu in range(4):
        dx = np.eye(4)[mu] * h
        fd = (f(2, x + dx) - f(2, x - dx)) / (2 * h)
        assert abs(f.derivative(2, x, UNIT[mu]) - fd) < 1e-6


@given(st.floats(-2, 2), st.floats(-2, 2))
def test_smear_spacetime_is_linear(a, b):
    k = dirac_kernel("dirac_standard", CREAT)
    phi1 = gaussian_spacetime(1.0, amplitudes=(1, 0, 0.5, 0))
    phi2 = gaussian_spacetime(1.0, center=(0.1, 0, 0, 0), amplitudes=(1, 0, 0.5, 0))
    combo = gaussian_spacetime(1.0, amplitudes=(1, 0, 0.5, 0)).scaled(a)
    p = np.array([[0.3, 0.1, -0.2], [1.0, 0.0, 0.0]])
    lhs = smear_spacetime(k, combo)(p)
    assert np.allclose(lhs, a * smear_spacetime(k, phi1)(p))
    assert np.allclose(smear_spacetime(k, phi1 + phi2)(p), smear_spacetime(k, phi1)(p) + smear_spacetime(k, phi2)(p))
    del b


def test_smear_spacetime_picks_shell_value():
    k = dirac_kernel("dirac_standard", ANNIH)
    phi = gaussian_spacetime(0.9, center=(0.2, 0.1, 0.0, 0.0), amplitudes=(1, 2, 0, 0))
    p = np.array([[0.4, -0.3, 0.2]])
    E = np.sqrt(1 + 0.29)
    shell = np.array([[-E, -0.4, 0.3, -0.2]])
    u1 = spinor_u("standard", 1, p[0])
    expected = (u1[0] * 1 + u1[1] * 2) * phi.scalar(shell)[0]
    assert np.allclose(smear_spacetime(k, phi)(p)[0, 0], expected)
