"""First-order interacting fields at constant coupling and the regularized order-2 tree term.

Every first-order quantity is computed twice:

* ``*_closed`` evaluates explicit momentum-space integrands (spinor algebra written
  out block by block);
* ``*_via_rules`` assembles the same object from free-field plane-wave kernels with
  the Wick engine (same-point product, propagator convolution, x-smearing).

Both run on the same pair of spherical grids, so agreement is an integrand-level
check.  The ``form="printed"`` option of the closed forms reproduces the printed
block formulas verbatim, including the inconsistencies that the rule chain exposes;
:func:`printed_discrepancy` reports them.

Block labels give the polarity of the first and second slot ("p" creation, "m"
annihilation).  For the potential the first slot comes from psi-bar and the second
from psi; for the Dirac field the first slot is the photon leg.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from scipy.special import dawsn

from .config import PairQuadrature
from .convergence import convergence_table
from .dirac_algebra import METRIC, energy, gamma_rep, slash, spinors
from .errors import ClassViolation
from .field_kernels import ANNIH, CREAT, dirac_kernel, photon_kernel, identity_sqrt_b
from .test_spaces import (
    SCHWARTZ_ZERO,
    MomentumTestFunction,
    QuadratureHints,
    SpacetimeTestFunction,
    spherical_grid,
)
from .wick_engine import (
    convolve,
    d0_av,
    normal_order_product,
    polarity_expansion,
    s_ret,
    smear_pairs_in_x,
    wick_tensor,
)

BLOCKS = ("pp", "pm", "mp", "mm")


@dataclass(frozen=True)
class FirstOrderKernel:
    field: str
    block: str
    closed_form: Callable = field(compare=False)
    coefficient: float = -1.0

    @property
    def degree(self) -> tuple:
        creators = self.block.count("p")
        return creators, 2 - creators


def pair_grids(pq: PairQuadrature = PairQuadrature(), m: float = 1.0, photon_first: bool = False):
    """Two spherical grids with different orders and a relative azimuthal rotation.

    Keeping the node sets disjoint means the (1,1) potential denominators, which vanish
    at coinciding momenta, are never evaluated on their zero set.
    """
    first = QuadratureHints(pq.n_r, pq.n_theta, pq.n_phi, radial_scale=1.0 if photon_first else m)
    second = QuadratureHints(pq.n_r - 1, pq.n_theta + 1, pq.n_phi - 1, radial_scale=m, rotation=0.1234)
    return first, second


def _pair_sum(values_fn, h1, h2, chunk=128) -> complex:
    n1, w1 = spherical_grid(h1)
    n2, w2 = spherical_grid(h2)
    total = 0.0j
    for start in range(0, n1.shape[0], chunk):
        sl = slice(start, start + chunk)
        total += np.sum(w1[sl, None] * values_fn(n1[sl], n2) * w2[None, :])
    return complex(total)


def _four(p, m):
    return np.concatenate([energy(p, m)[:, None], p], axis=1)


def _light(p):
    return np.concatenate([np.linalg.norm(p, axis=1)[:, None], p], axis=1)


def _local_factor(p, m, variant):
    if variant == "dirac_local":
        return 1.0 / (2.0 * energy(p, m))
    if variant != "dirac_standard":
        raise ValueError(f"unknown Dirac variant {variant!r}")
    return np.ones(p.shape[0])


def _check_phi(phi: SpacetimeTestFunction, klass: str):
    if klass == "S00" and phi.klass != "S00":
        raise ClassViolation(
            "the potential's space-time smearing must lie in the zero-mass test space "
            "(Fourier transform vanishing to all orders at k=0)"
        )


# --------------------------------------------------------------------------- potential, closed form


def _a_parts(block, p1, p2, zeta, chi, m, rep, variant):
    """Spinor legs of a potential block: (left, right, coeff, s1, s2, left_is_row).

    The block value is coeff * row . gamma_mu . column with the (p1, p2) plane-wave
    signs s1, s2; for block mp the row spinor comes from the second slot.
    """
    g = gamma_rep(rep)
    u1, v1 = spinors(rep, p1, m)
    u2, v2 = spinors(rep, p2, m)
    z = zeta(p1) * _local_factor(p1, m, variant)[:, None]
    c = chi(p2) * _local_factor(p2, m, variant)[:, None]
    bar = lambda w: np.conj(w) @ g.gamma[0]  # rows w_s -> w_s^dagger gamma^0
    leg = lambda f, w: np.einsum("ns,nsa->na", f, w)
    if block == "pp":
        return leg(z[:, 0:2], bar(u1)), leg(c[:, 2:4], v2), -1.0, 1, 1, True
    if block == "pm":
        return leg(z[:, 0:2], bar(u1)), leg(c[:, 0:2], u2), -1.0, 1, -1, True
    if block == "mp":
        # d+_{s'}(p1) d_s(p2): +e vbar_s(p2) gamma_mu v_{s'}(p1); roles of the spinors swap
        return leg(z[:, 2:4], v1), leg(c[:, 2:4], bar(v2)), 1.0, 1, -1, False
    return leg(z[:, 2:4], bar(v1)), leg(c[:, 0:2], u2), -1.0, -1, -1, True


def _bilinear(left, right, gl, left_is_row):
    if left_is_row:
        return np.einsum("...ia,ab,...jb->...ij", left, gl, right)
    return np.einsum("...jb,ba,...ia->...ij", right, gl, left)


def a_int1_integrand(block: str, p1, p2, zeta, chi, phi: SpacetimeTestFunction, mu: int = 0, e: float = 1.0,
                     m: float = 1.0, rep: str = "standard", variant: str = "dirac_standard",
                     form: str = "corrected") -> np.ndarray:
    """(N1, N2) integrand of the first-order potential block on momentum pairs (p1, p2).

    Slot one (s', p1) is smeared with ``zeta``, slot two (s, p2) with ``chi``.
    """
    if block not in BLOCKS:
        raise ValueError(f"unknown block {block!r}")
    p1 = np.asarray(p1, dtype=float).reshape(-1, 3)
    p2 = np.asarray(p2, dtype=float).reshape(-1, 3)
    g = gamma_rep(rep)
    P1, P2 = _four(p1, m), _four(p2, m)
    if form == "corrected":
        left, right, coeff, s1, s2, row = _a_parts(block, p1, p2, zeta, chi, m, rep, variant)
        k = s1 * P1[:, None] + s2 * P2[None]
        num = _bilinear(left, right, g.lower()[mu], row)
        return coeff * e * num * d0_av().scalar(k) * phi.scalar(k) * phi.amplitudes[mu]
    u1, v1 = spinors(rep, p1, m)
    u2, v2 = spinors(rep, p2, m)
    z = zeta(p1) * _local_factor(p1, m, variant)[:, None]
    c = chi(p2) * _local_factor(p2, m, variant)[:, None]
    if form != "printed":
        raise ValueError("form must be 'corrected' or 'printed'")
    if mu != 0:
        raise ValueError("the printed block formulas are given for the time component only")
    # verbatim: -e w1^dagger w2, phi_tilde at the printed argument, printed denominator
    E1, E2 = P1[:, 0][:, None], P2[:, 0][None]
    d = p1[:, None, :] + p2[None, :, :]
    dm = p1[:, None, :] - p2[None, :, :]
    if block == "pp":
        left, right = np.einsum("ns,nsa->na", z[:, 0:2], np.conj(u1)), np.einsum("ns,nsa->na", c[:, 2:4], v2)
        k = np.concatenate([(E1 + E2)[..., None], d], axis=-1)
        den = np.sum(d * d, axis=-1) - (E1 + E2) ** 2
    elif block == "pm":
        left, right = np.einsum("ns,nsa->na", z[:, 0:2], np.conj(u1)), np.einsum("ns,nsa->na", c[:, 0:2], u2)
        k = np.concatenate([(E1 - E2)[..., None], dm], axis=-1)
        den = np.sum(dm * dm, axis=-1) - (E1 - E2) ** 2
    elif block == "mp":
        left, right = np.einsum("ns,nsa->na", z[:, 2:4], np.conj(v1)), np.einsum("ns,nsa->na", c[:, 2:4], v2)
        k = np.concatenate([(E2 - E1)[..., None], -dm], axis=-1)
        den = np.sum(dm * dm, axis=-1) - (E2 - E1) ** 2
    else:
        left, right = np.einsum("ns,nsa->na", z[:, 2:4], np.conj(v1)), np.einsum("ns,nsa->na", c[:, 0:2], u2)
        k = np.concatenate([-(E1 + E2)[..., None], -d], axis=-1)
        den = np.sum(d * d, axis=-1) - (E2 - E1) ** 2
    num = left @ right.T
    return -e * num * phi.scalar(k) * phi.amplitudes[mu] / den


def _coarser(pq: PairQuadrature) -> PairQuadrature:
    return PairQuadrature(max(4, (3 * pq.n_r) // 4), max(4, (3 * pq.n_theta) // 4), max(4, (3 * pq.n_phi) // 4))


def a_int1_closed(block: str, zeta: MomentumTestFunction, chi: MomentumTestFunction, phi: SpacetimeTestFunction,
                  mu: int = 0, e: float = 1.0, m: float = 1.0, rep: str = "standard",
                  variant: str = "dirac_standard", pq: PairQuadrature = PairQuadrature(),
                  form: str = "corrected", with_error: bool = False):
    """Smeared potential block; with ``with_error`` also the change against a 3/4-order pair grid."""
    _check_phi(phi, "S00")

    def value(q):
        h1, h2 = pair_grids(q, m)
        return _pair_sum(
            lambda a, b: a_int1_integrand(block, a, b, zeta, chi, phi, mu, e, m, rep, variant, form), h1, h2
        )

    val = value(pq)
    return (val, abs(val - value(_coarser(pq)))) if with_error else val


# --------------------------------------------------------------------------- potential, rule chain


def current_terms(mu: int, variant: str = "dirac_standard", m: float = 1.0, rep: str = "standard") -> list:
    """Polarity monomials of :psibar gamma_mu psi: = sum_ab (gamma^0 gamma_mu)_ab :psi^dag_a psi_b:."""
    g = gamma_rep(rep)
    M = g.gamma[0] @ g.lower()[mu]
    terms = []
    for a in range(4):
        for b in range(4):
            if M[a, b] != 0:
                dag = dirac_kernel(variant, ANNIH, a, adjoint=True, m=m, rep=rep)
                psi = dirac_kernel(variant, ANNIH, b, m=m, rep=rep)
                terms += polarity_expansion([dag, psi], coeff=M[a, b])
    return terms


def _a_block_of(kp) -> str:
    dag = next(f for f in kp.factors if f.adjoint)
    psi = next(f for f in kp.factors if not f.adjoint)
    return ("p" if dag.is_creator else "m") + ("p" if psi.is_creator else "m")


def a_int1_terms(block: str, mu: int = 0, e: float = 1.0, variant: str = "dirac_standard", m: float = 1.0,
                 rep: str = "standard") -> list:
    """-e D0_av * :psibar gamma_mu psi: restricted to one polarity block."""
    return [
        convolve(d0_av(), kp, 0).scaled(-e)
        for kp in current_terms(mu, variant, m, rep)
        if _a_block_of(kp) == block
    ]


def a_int1_via_rules(block: str, zeta: MomentumTestFunction, chi: MomentumTestFunction, phi: SpacetimeTestFunction,
                     mu: int = 0, e: float = 1.0, m: float = 1.0, rep: str = "standard",
                     variant: str = "dirac_standard", pq: PairQuadrature = PairQuadrature()) -> complex:
    _check_phi(phi, "S00")
    h1, h2 = pair_grids(pq, m)
    terms = a_int1_terms(block, mu, e, variant, m, rep)
    return smear_pairs_in_x(terms, lambda kp: ((zeta, h1), (chi, h2)),
                            lambda k: phi.scalar(k) * phi.amplitudes[mu])


# --------------------------------------------------------------------------- potential, position space


def _plane_wave_probe(x, mu: int) -> SpacetimeTestFunction:
    """Stand-in for a point evaluation at x: phi_tilde(k) -> exp(i k.x) on component mu."""
    x = np.asarray(x, dtype=float)
    amps = tuple(float(i == mu) for i in range(4))
    return SpacetimeTestFunction(lambda k: np.exp(1j * (k[..., 0] * x[0] - k[..., 1:] @ x[1:])), "point", amps)


def a_int1_pointwise(block: str, x, zeta: MomentumTestFunction, chi: MomentumTestFunction, mu: int = 0,
                     e: float = 1.0, m: float = 1.0, rep: str = "standard", variant: str = "dirac_standard",
                     pq: PairQuadrature = PairQuadrature(), chunk: int = 16) -> complex:
    """Momentum-space value of the (zeta, chi)-smeared potential block at the space-time point x.

    A plane-wave probe does not vanish at k = 0, so blocks pm and mp keep an integrable
    1/|p1 - p2|^2 singularity.  Those are summed over (p1 - p2, p2) with a spherical grid
    centred on the singular point instead of over the product grid.
    """
    if block not in BLOCKS:
        raise ValueError(f"unknown block {block!r}")
    h1, h2 = pair_grids(pq, m)
    probe = _plane_wave_probe(x, mu)
    if block in ("pp", "mm"):
        return _pair_sum(lambda a, b: a_int1_integrand(block, a, b, zeta, chi, probe, mu, e, m, rep, variant),
                         h1, h2)
    g = gamma_rep(rep)
    rel, wrel = spherical_grid(h1)
    base, wbase = spherical_grid(h2)
    gl = g.lower()[mu]
    total = 0.0j
    for start in range(0, base.shape[0], chunk):
        b = base[start : start + chunk]
        p1 = (b[:, None, :] + rel[None]).reshape(-1, 3)
        p2 = np.repeat(b, rel.shape[0], axis=0)
        left, right, coeff, s1, s2, row = _a_parts(block, p1, p2, zeta, chi, m, rep, variant)
        k = s1 * _four(p1, m) + s2 * _four(p2, m)
        num = np.einsum("na,ab,nb->n", left, gl, right) if row else np.einsum("nb,ba,na->n", right, gl, left)
        w = (wbase[start : start + chunk, None] * wrel[None]).reshape(-1)
        total += coeff * e * np.sum(w * num * d0_av().scalar(k) * probe.scalar(k))
    return complex(total * probe.amplitudes[mu])


def _leg_waves(vec, nodes, weights, sign, m, y, chunk=256):
    """sum_p w(p) vec(p) exp(sign i P.y) for on-shell P, evaluated at the points y."""
    wv = weights[:, None] * vec
    keep = np.max(np.abs(wv), axis=1) > 1e-15 * np.max(np.abs(wv))
    P, wv = _four(nodes[keep], m), wv[keep]
    out = np.empty((y.shape[0], vec.shape[1]), dtype=complex)
    for start in range(0, y.shape[0], chunk):
        yy = y[start : start + chunk]
        phase = np.exp(sign * 1j * (yy[:, :1] * P[None, :, 0] - yy[:, 1:] @ P[:, 1:].T))
        out[start : start + chunk] = phase @ wv
    return out


def _ball_grid(radius: float, n_r: int, n_theta: int, n_phi: int):
    """Product Gauss-Legendre rule on the ball |q| <= radius; weights include r^2."""
    r, wr = _gl(0.0, radius, n_r)
    c, wc = np.polynomial.legendre.leggauss(n_theta)
    f, wf = _gl(0.0, 2.0 * np.pi, n_phi)
    R, C, F = np.meshgrid(r, c, f, indexing="ij")
    S = np.sqrt(1.0 - C * C)
    q = np.stack([R * S * np.cos(F), R * S * np.sin(F), R * C], axis=-1).reshape(-1, 3)
    w = (wr[:, None, None] * r[:, None, None] ** 2 * wc[None, :, None] * wf[None, None, :]).reshape(-1)
    return q, w


def a_int1_spatial(block: str, x, zeta: MomentumTestFunction, chi: MomentumTestFunction, mu: int = 0,
                   e: float = 1.0, m: float = 1.0, rep: str = "standard", variant: str = "dirac_standard",
                   radius: float = 18.0, ball: tuple = (48, 16, 32),
                   momentum_radius: float = 3.5, momentum_ball: tuple = (40, 32, 48)) -> complex:
    """Same quantity as :func:`a_int1_pointwise` from the retarded position-space integral.

    A(x) = int d^3q j(x0 - |q|, x + q) / (4 pi |q|), with j the smeared current block
    (coupling and block sign included), truncated to |q| <= radius.  No (2 pi)
    conventions enter: the convolution of a plane wave with the propagator only sees
    the symbol.

    The legs are summed on a finite momentum ball.  A rational radial map aliases
    exp(i P.y) once |y| exceeds a few units, which shows up as a slowly decaying fake
    tail on the light cone, so ``momentum_radius`` must cover the smearings' support and
    ``momentum_ball`` must resolve phases up to |p| * radius.
    """
    if block not in BLOCKS:
        raise ValueError(f"unknown block {block!r}")
    x = np.asarray(x, dtype=float)
    g = gamma_rep(rep)
    nodes, weights = _ball_grid(momentum_radius, *momentum_ball)
    left, right, coeff, s1, s2, row = _a_parts(block, nodes, nodes, zeta, chi, m, rep, variant)
    q, wq = _ball_grid(radius, *ball)
    r = np.linalg.norm(q, axis=1)
    y = np.concatenate([(x[0] - r)[:, None], x[1:] + q], axis=1)
    L = _leg_waves(left, nodes, weights, s1, m, y)
    R = _leg_waves(right, nodes, weights, s2, m, y)
    gl = g.lower()[mu]
    j = np.einsum("na,ab,nb->n", L, gl, R) if row else np.einsum("nb,ba,na->n", R, gl, L)
    return complex(coeff * e * np.sum(wq * j / (4.0 * np.pi * r)))


# --------------------------------------------------------------------------- Dirac field, closed form

_PSI_BLOCK = {
    # block: (spinor, chi slots, sign of photon momentum, sign of Dirac momentum)
    "pp": ("v", slice(2, 4), 1, 1),
    "pm": ("u", slice(0, 2), 1, -1),
    "mp": ("v", slice(2, 4), -1, 1),
    "mm": ("u", slice(0, 2), -1, -1),
}


def _printed_numerator(block, kvec_sum, kvec_diff, E1, E2, g, m):
    """Spinor numerators exactly as printed (time-component sign in block mp included)."""
    gv = g.gamma[1:]
    eye = np.eye(4)
    if block == "pp":
        vec, e0 = -kvec_sum, E1 + E2
    elif block == "pm":
        vec, e0 = -kvec_diff, E1 - E2
    elif block == "mp":
        vec, e0 = kvec_diff, E1 - E2
    else:
        vec, e0 = kvec_sum, -(E1 + E2)
    return np.einsum("...i,iab->...ab", vec, gv) + e0[..., None, None] * g.gamma[0] + m * eye


def psi_int1_integrand(block: str, p1, p2, zeta, chi, phi: SpacetimeTestFunction, a: int = 0, e: float = 1.0,
                       m: float = 1.0, rep: str = "standard", variant: str = "dirac_standard",
                       sqrt_b: Callable | None = None, form: str = "corrected") -> np.ndarray:
    """(N1, N2) integrand of the first-order Dirac-field block; p1 is the photon momentum."""
    if block not in BLOCKS:
        raise ValueError(f"unknown block {block!r}")
    p1 = np.asarray(p1, dtype=float).reshape(-1, 3)
    p2 = np.asarray(p2, dtype=float).reshape(-1, 3)
    g = gamma_rep(rep)
    kind, chi_slots, s1, s2 = _PSI_BLOCK[block]
    u2, v2 = spinors(rep, p2, m)
    spin = v2 if kind == "v" else u2
    w = np.einsum("ns,nsc->nc", chi(p2)[:, chi_slots] * _local_factor(p2, m, variant)[:, None], spin)
    r1 = np.linalg.norm(p1, axis=1)
    z = zeta(p1)
    if sqrt_b is not None:
        z = np.einsum("nmv,nv->nm", np.asarray(sqrt_b(p1)), z)
    K1, K2 = _light(p1), _four(p2, m)
    k = s1 * K1[:, None] + s2 * K2[None]
    pdot = p1 @ p2.T
    E2 = K2[:, 0][None]
    if block in ("pp", "mm"):
        den = 2.0 * (r1[:, None] * E2 - pdot)
    else:
        den = 2.0 * (pdot - r1[:, None] * E2)
    if form == "corrected":
        # gamma_nu' zeta^nu' with the index lowered by the metric
        gz = np.einsum("nv,vbc->nbc", z * np.diag(METRIC), g.gamma)
        y = np.einsum("ibc,jc->ijb", gz, w)
        num = slash(rep, k) + m * np.eye(4)
        top = np.einsum("ijb,ijb->ij", num[:, :, a, :], y)
        norm = np.sqrt(2.0 * r1)[:, None]
        return e * top * phi.scalar(k) * phi.amplitudes[a] / (norm * den)
    if form != "printed":
        raise ValueError("form must be 'corrected' or 'printed'")
    gz = np.einsum("nv,vbc->nbc", z, g.gamma)  # gamma^{nu'} as printed
    y = np.einsum("ibc,jc->ijb", gz, w)
    ksum = p1[:, None, :] + p2[None, :, :]
    kdiff = p1[:, None, :] - p2[None, :, :]
    num = _printed_numerator(block, ksum, kdiff, r1[:, None], E2, g, m)
    top = np.einsum("ijb,ijb->ij", num[:, :, a, :], y)
    return e * top * phi.scalar(k) * phi.amplitudes[a] / (2.0 * r1[:, None] * den)


def _check_psi_classes(zeta, phi):
    if zeta.klass != SCHWARTZ_ZERO:
        raise ClassViolation(
            "the photon leg must be smeared with a function vanishing to all orders at p=0 "
            "(zero-mass test space)"
        )
    if phi.klass not in ("S", "S00"):
        raise ClassViolation(f"unknown space-time class {phi.klass!r}")


def psi_int1_closed(block: str, zeta: MomentumTestFunction, chi: MomentumTestFunction, phi: SpacetimeTestFunction,
                    a: int = 0, e: float = 1.0, m: float = 1.0, rep: str = "standard",
                    variant: str = "dirac_standard", sqrt_b: Callable | None = None,
                    pq: PairQuadrature = PairQuadrature(), form: str = "corrected", with_error: bool = False):
    _check_psi_classes(zeta, phi)

    def value(q):
        h1, h2 = pair_grids(q, m, photon_first=True)
        return _pair_sum(
            lambda x, y: psi_int1_integrand(block, x, y, zeta, chi, phi, a, e, m, rep, variant, sqrt_b, form),
            h1, h2,
        )

    val = value(pq)
    return (val, abs(val - value(_coarser(pq)))) if with_error else val


# --------------------------------------------------------------------------- Dirac field, rule chain


def psi_int1_terms(block: str, a: int = 0, e: float = 1.0, variant: str = "dirac_standard", m: float = 1.0,
                   rep: str = "standard", photon_variant: str = "photon_identityB",
                   sqrt_b: Callable | None = None) -> list:
    """e S_ret^{ab} * (gamma^nu)_{bc} :psi^c A_nu: for one polarity block (photon sign first)."""
    g = gamma_rep(rep)
    if photon_variant == "photon_sqrtB" and sqrt_b is None:
        sqrt_b = identity_sqrt_b
    terms = []
    for nu in range(4):
        for b in range(4):
            for c in range(4):
                coeff = METRIC[nu, nu] * g.gamma[nu][b, c]
                if coeff == 0:
                    continue
                psi = dirac_kernel(variant, ANNIH, c, m=m, rep=rep)
                A = photon_kernel(photon_variant, ANNIH, nu, sqrt_b=sqrt_b)
                for kp in polarity_expansion([psi, A], coeff=coeff):
                    ph = next(f for f in kp.factors if f.species == "photon")
                    di = next(f for f in kp.factors if f.species == "dirac")
                    label = ("p" if ph.is_creator else "m") + ("p" if di.is_creator else "m")
                    if label == block:
                        terms.append(convolve(s_ret(m, rep), kp, 0, entry=(a, b)).scaled(e))
    return terms


def psi_int1_via_rules(block: str, zeta: MomentumTestFunction, chi: MomentumTestFunction, phi: SpacetimeTestFunction,
                       a: int = 0, e: float = 1.0, m: float = 1.0, rep: str = "standard",
                       variant: str = "dirac_standard", photon_variant: str = "photon_identityB",
                       sqrt_b: Callable | None = None, pq: PairQuadrature = PairQuadrature()) -> complex:
    _check_psi_classes(zeta, phi)
    h1, h2 = pair_grids(pq, m, photon_first=True)
    terms = psi_int1_terms(block, a, e, variant, m, rep, photon_variant, sqrt_b)

    def assign(kp):
        return tuple((zeta, h1) if f.species == "photon" else (chi, h2) for f in kp.factors)

    return smear_pairs_in_x(terms, assign, lambda k: phi.scalar(k) * phi.amplitudes[a])


def printed_discrepancy(field_name: str, block: str, p1, p2, zeta, chi, phi, index: int = 0, m: float = 1.0,
                        rep: str = "standard") -> dict:
    """Pointwise comparison of the literal printed integrand with the rule-chain one.

    Returns the ratio printed/corrected on the given pairs together with its spread;
    a constant ratio of 1 would mean the printed block is consistent.
    """
    fn = a_int1_integrand if field_name == "A_int" else psi_int1_integrand
    good = fn(block, p1, p2, zeta, chi, phi, index, 1.0, m, rep)
    printed = fn(block, p1, p2, zeta, chi, phi, index, 1.0, m, rep, form="printed")
    mask = np.abs(good) > 1e-12 * np.max(np.abs(good))
    ratio = printed[mask] / good[mask]
    return {
        "field": field_name,
        "block": block,
        "ratio_min": complex(ratio[np.argmin(np.abs(ratio))]) if ratio.size else None,
        "ratio_max": complex(ratio[np.argmax(np.abs(ratio))]) if ratio.size else None,
        "consistent": bool(ratio.size and np.allclose(ratio, 1.0, rtol=1e-10)),
    }


def first_order_kernels(field_name: str, **kwargs) -> list:
    fn = a_int1_integrand if field_name == "A_int" else psi_int1_integrand
    coeff = -1.0 if field_name == "A_int" else 1.0
    return [
        FirstOrderKernel(field_name, b, (lambda b: lambda *args, **kw: fn(b, *args, **kw))(b), coeff)
        for b in BLOCKS
    ]


# --------------------------------------------------------------------------- order-2 tree term


@dataclass(frozen=True)
class ChronoSmearing:
    """Separable smearings phi_j(x) = exp(-t^2/(2 tau^2)) g_j(x) of the two vertices.

    ``g1``/``g2`` hold the spatial Fourier transforms g_hat(q) = int g(x) exp(-i q.x) d^3x
    in component 0 and must vanish to all orders at q=0.
    """

    g1: MomentumTestFunction
    g2: MomentumTestFunction
    tau: float = 1.0
    weights: tuple = (1.0, 1.0, 1.0, 1.0)
    hints: QuadratureHints = QuadratureHints(n_r=48, n_theta=16, n_phi=24)

    def __post_init__(self):
        for g in (self.g1, self.g2):
            if g.klass != SCHWARTZ_ZERO:
                raise ClassViolation(
                    "photon-line smearings must vanish to all orders at zero momentum (zero-mass test space)"
                )


def logistic_theta(t, eps):
    return 0.5 * (1.0 + np.tanh(0.5 * np.asarray(t) / eps))


def time_kernel(u, tau):
    """int f(t+u) f(t) dt for the Gaussian time profile f(t) = exp(-t^2/(2 tau^2))."""
    return math.sqrt(math.pi) * tau * np.exp(-np.asarray(u) ** 2 / (4.0 * tau * tau))


def _gl(a, b, n):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (b - a) * x + 0.5 * (b + a), 0.5 * (b - a) * w


def theta_time_factor(omega, eps_theta, tau, n: int = 160) -> np.ndarray:
    """T(omega) = int K(u) theta_eps(u) exp(-i omega u) du by split Gauss-Legendre."""
    U = 14.0 * tau
    cut = min(40.0 * eps_theta, U / 2)
    pieces = [(-U, -cut), (-cut, 0.0), (0.0, cut), (cut, U)]
    us, ws = zip(*(_gl(a, b, n) for a, b in pieces))
    u = np.concatenate(us)
    w = np.concatenate(ws) * time_kernel(u, tau) * logistic_theta(u, eps_theta)
    omega = np.asarray(omega, dtype=float)
    return np.exp(-1j * omega[..., None] * u) @ w


def sharp_time_factor(omega, tau) -> np.ndarray:
    """Closed form of T at eps_theta = 0: half-line Gaussian transform via the Dawson function."""
    omega = np.asarray(omega, dtype=float)
    return math.pi * tau**2 * np.exp(-(tau * omega) ** 2) - 2j * math.sqrt(math.pi) * tau**2 * dawsn(tau * omega)


def photon_line_contractions(eps_mass: float, mu: int, photon_variant: str = "photon_identityB",
                             sqrt_b: Callable | None = None) -> list:
    """Single-contraction terms of A^mu(x1) A^mu(x2) enumerated by the Wick engine."""
    if photon_variant == "photon_sqrtB" and sqrt_b is None:
        sqrt_b = identity_sqrt_b
    A = photon_kernel(photon_variant, ANNIH, mu, sqrt_b=sqrt_b)
    out = []
    for p1 in (ANNIH, CREAT):
        for p2 in (ANNIH, CREAT):
            x1 = wick_tensor([replace(A, polarity=p1)])
            x2 = wick_tensor([replace(A, polarity=p2)])
            for term in normal_order_product(x1, x2, eps_mass):
                if len(term.pairs) == 1 and not term.remainder.factors:
                    out.append(term)
    return out


def _ordered_value(eps_theta, eps_mass, first, second, sm: ChronoSmearing, sharp=False):
    """theta(t_first - t_second) <A(x_first) A(x_second)> smeared; returns the scalar."""
    nodes, weights = spherical_grid(sm.hints)
    r = np.linalg.norm(nodes, axis=1)
    radii, inverse = np.unique(r, return_inverse=True)
    total = 0.0j
    for mu, wmu in enumerate(sm.weights):
        if wmu == 0:
            continue
        for term in photon_line_contractions(eps_mass, mu):
            (ka, ga, kb, gb), = term.pairs
            metric = -np.diag(METRIC)
            amp = np.sum(ka.amplitude(nodes) * kb.amplitude(nodes) * metric, axis=1) * term.remainder.sign
            # annihilator at the earlier-labelled vertex: spatial phases give g_first(-p) g_second(p)
            spatial = first(-nodes)[:, 0] * second(nodes)[:, 0]
            if sharp:
                T = sharp_time_factor(radii, sm.tau)[inverse]
            else:
                om_r = np.sqrt(radii**2 + eps_mass**2)
                T = theta_time_factor(om_r, eps_theta, sm.tau)[inverse]
            total += wmu * np.sum(weights * amp * spatial * T)
    return total


def chrono2_tree_kernel(eps_theta: float, eps_mass: float, smearing: ChronoSmearing) -> complex:
    """Tree (single photon line) part of theta_eps L(phi1) L(phi2) + (1 <-> 2), regularized."""
    if eps_theta <= 0 or eps_mass <= 0:
        raise ValueError("eps_theta and eps_mass must be positive")
    return complex(
        _ordered_value(eps_theta, eps_mass, smearing.g1, smearing.g2, smearing)
        + _ordered_value(eps_theta, eps_mass, smearing.g2, smearing.g1, smearing)
    )


def chrono2_tree_oracle(smearing: ChronoSmearing) -> complex:
    """Feynman-denominator limit: sharp time ordering and massless photon energies."""
    return complex(
        _ordered_value(0.0, 0.0, smearing.g1, smearing.g2, smearing, sharp=True)
        + _ordered_value(0.0, 0.0, smearing.g2, smearing.g1, smearing, sharp=True)
    )


def chrono_convergence(smearing: ChronoSmearing, eps_theta=(0.2, 0.1, 0.05, 0.025),
                       eps_mass=(0.2, 0.1, 0.05, 0.025)) -> dict:
    values = [chrono2_tree_kernel(a, b, smearing) for a, b in zip(eps_theta, eps_mass)]
    return convergence_table(eps_theta, eps_mass, values)
