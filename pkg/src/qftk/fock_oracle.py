"""Finite-mode Fock space used as a brute-force oracle for the kernel calculus.

The space is the tensor product of a fermionic part (Jordan-Wigner on K1 Hermite
modes per Dirac slot) and a bosonic part (K2 modes per photon polarization with the
total photon number capped at n_max).  The fermionic factor comes first in the
tensor product.  Operators are scipy CSR matrices.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .config import FockConfig
from .dirac_algebra import energy
from .errors import SpanError
from .field_kernels import PlaneWaveKernel, dirac_kernel, raised_derivative
from .test_spaces import (
    MomentumTestFunction,
    QuadratureHints,
    bump,
    hermite_3d,
    spherical_grid,
)
from .wick_engine import (
    KernelProduct,
    contraction_metric,
    integrate_out,
    resolve_delta,
    polarity_expansion,
    smear_spatial_delta_pair,
)

MAX_DIM = 100_000


def _multi_indices(count: int):
    out = []
    total = 0
    while len(out) < count:
        for n in itertools.product(range(total + 1), repeat=3):
            if sum(n) == total:
                out.append(n)
        total += 1
    return sorted(out[:count], key=lambda n: (sum(n), tuple(-v for v in n)))


@dataclass(frozen=True)
class Mode:
    """Scalar mode function placed in one slot; ``values`` on the quadrature grid are cached by the space."""

    slot: int
    label: tuple
    function: MomentumTestFunction = field(compare=False)


@dataclass
class TruncatedFock:
    fermion_modes: list
    boson_modes: list
    n_max: int
    hints: QuadratureHints

    def __post_init__(self):
        nf = len(self.fermion_modes)
        nb = len(self.boson_modes)
        dim = 2**nf * math.comb(nb + self.n_max, self.n_max)
        if dim > MAX_DIM:
            raise ValueError(f"truncated Fock dimension {dim} exceeds {MAX_DIM}")
        self.dim_f = 2**nf
        self.boson_basis = list(self._occupations(nb, self.n_max))
        self.boson_index = {occ: i for i, occ in enumerate(self.boson_basis)}
        self.dim_b = len(self.boson_basis)
        self.dim = self.dim_f * self.dim_b

    @staticmethod
    def _compositions(nb, total):
        """Occupation tuples of nb modes summing to total."""
        if nb == 0:
            if total == 0:
                yield ()
            return
        for first in range(total, -1, -1):
            for rest in TruncatedFock._compositions(nb - 1, total - first):
                yield (first,) + rest

    @staticmethod
    def _occupations(nb, n_max):
        # same order as filtering itertools.product by total, kept for reproducible bases
        for total in range(n_max + 1):
            yield from sorted(TruncatedFock._compositions(nb, total))

    # -- basis data -------------------------------------------------------------------

    @cached_property
    def boson_number(self) -> np.ndarray:
        nb = np.array([sum(o) for o in self.boson_basis])
        return np.tile(nb, self.dim_f)

    @cached_property
    def fermion_number(self) -> np.ndarray:
        nf = np.array([bin(s).count("1") for s in range(self.dim_f)])
        return np.repeat(nf, self.dim_b)

    def vacuum(self) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        v[0] = 1.0
        return v

    def safe_sector(self, boson_creators: int) -> np.ndarray:
        """Basis states on which ``boson_creators`` extra photons still fit under the cap."""
        return self.boson_number <= self.n_max - boson_creators

    # -- elementary operators ---------------------------------------------------------

    @cached_property
    def fermion_annihilators(self) -> list:
        nf = len(self.fermion_modes)
        eye_b = sp.identity(self.dim_b, format="csr", dtype=complex)
        ops = []
        states = np.arange(self.dim_f)
        for k in range(nf):
            bit = 1 << (nf - 1 - k)  # mode 0 is the most significant bit
            occupied = states[(states & bit) != 0]
            higher = ~((1 << (nf - k)) - 1) & (self.dim_f - 1)
            signs = np.array([(-1) ** bin(s & higher).count("1") for s in occupied], dtype=complex)
            a = sp.csr_matrix((signs, (occupied ^ bit, occupied)), shape=(self.dim_f, self.dim_f))
            ops.append(sp.kron(a, eye_b, format="csr"))
        return ops

    @cached_property
    def boson_annihilators(self) -> list:
        nb = len(self.boson_modes)
        eye_f = sp.identity(self.dim_f, format="csr", dtype=complex)
        ops = []
        for k in range(nb):
            rows, cols, vals = [], [], []
            for j, occ in enumerate(self.boson_basis):
                if occ[k] > 0:
                    lower = occ[:k] + (occ[k] - 1,) + occ[k + 1 :]
                    rows.append(self.boson_index[lower])
                    cols.append(j)
                    vals.append(np.sqrt(occ[k]))
            b = sp.csr_matrix((np.array(vals, dtype=complex), (rows, cols)), shape=(self.dim_b, self.dim_b))
            ops.append(sp.kron(eye_f, b, format="csr"))
        return ops

    @cached_property
    def eta(self) -> sp.csr_matrix:
        scalar = [m for m, mode in enumerate(self.boson_modes) if mode.slot == 0]
        parity = np.array([(-1) ** sum(o[m] for m in scalar) for o in self.boson_basis], dtype=complex)
        return sp.diags(np.tile(parity, self.dim_f), format="csr")

    def identity(self) -> sp.csr_matrix:
        return sp.identity(self.dim, format="csr", dtype=complex)

    def modes(self, species: str) -> list:
        return self.fermion_modes if species == "dirac" else self.boson_modes

    def annihilators(self, species: str) -> list:
        return self.fermion_annihilators if species == "dirac" else self.boson_annihilators

    def creator_ops(self, species: str) -> list:
        """Creation operators entering kernel representations; photon ones are Krein adjoints."""
        ops = [a.conj().T.tocsr() for a in self.annihilators(species)]
        if species == "photon":
            ops = [(-op if mode.slot == 0 else op) for op, mode in zip(ops, self.boson_modes)]
        return ops

    # -- mode data on the quadrature grid ---------------------------------------------

    @cached_property
    def _grid(self):
        return spherical_grid(self.hints)

    def mode_values(self, species: str) -> np.ndarray:
        cache = self.__dict__.setdefault("_mode_cache", {})
        if species not in cache:
            nodes, _ = self._grid
            cache[species] = np.stack([m.function(nodes)[:, m.slot] for m in self.modes(species)], axis=1)
        return cache[species]

    def coefficients(self, xi: MomentumTestFunction, species: str, tol: float = 1e-8) -> np.ndarray:
        """c_k = <e_k, xi>; raises SpanError when xi has weight outside the span."""
        nodes, weights = self._grid
        vals = xi(nodes)
        modes = self.modes(species)
        E = self.mode_values(species)
        c = np.array([np.sum(weights * np.conj(E[:, k]) * vals[:, m.slot]) for k, m in enumerate(modes)])
        norm2 = float(np.real(np.sum(weights * np.sum(np.abs(vals) ** 2, axis=1))))
        residual = norm2 - float(np.sum(np.abs(c) ** 2))
        if residual > tol * max(1.0, norm2):
            raise SpanError(f"function has squared norm {residual:.3e} outside the mode span")
        return c

    def weighted_gram(self, species: str, weight: str, m: float = 1.0) -> np.ndarray:
        nodes, weights = self._grid
        E = self.mode_values(species)
        slots = np.array([mode.slot for mode in self.modes(species)])
        if weight == "flat":
            w = weights
        elif weight == "inverse_2E_squared":
            w = weights / (2.0 * energy(nodes, m)) ** 2
        else:
            raise ValueError(f"unknown weight {weight!r}")
        G = (np.conj(E).T * w) @ E
        return G * (slots[:, None] == slots[None, :])

    def kernel_coefficients(self, kernel: PlaneWaveKernel, x) -> np.ndarray:
        """t[k] = sum_s int kernel(s,p;x) e_k(s,p) (annihilators) or conj(e_k) (creators)."""
        nodes, weights = self._grid
        amp = kernel.amplitude(nodes) * kernel.phase(nodes, x)[:, None]
        E = self.mode_values(kernel.species)
        if kernel.is_creator:
            E = np.conj(E)
        slots = [mode.slot for mode in self.modes(kernel.species)]
        return np.array([np.sum(weights * amp[:, s] * E[:, k]) for k, s in enumerate(slots)])

    def mode_operator(self, kernel: PlaneWaveKernel, t: np.ndarray) -> sp.csr_matrix:
        ops = self.creator_ops(kernel.species) if kernel.is_creator else self.annihilators(kernel.species)
        out = sp.csr_matrix((self.dim, self.dim), dtype=complex)
        for c, op in zip(t, ops):
            if c != 0:
                out = out + c * op
        return out

    def truncated_pairing(self, a: PlaneWaveKernel, xa, b: PlaneWaveKernel, xb) -> complex:
        """Contraction of two kernels as seen by the truncated space: sum_k t_a[k] t_b[k] w_k."""
        ta, tb = self.kernel_coefficients(a, xa), self.kernel_coefficients(b, xb)
        w = contraction_metric(a)[[mode.slot for mode in self.modes(a.species)]]
        return complex(np.sum(ta * tb * w))


def _fermion_mode_functions(k1: int, hints: QuadratureHints) -> list:
    modes = []
    for slot in range(4):
        for n in _multi_indices(k1):
            f = MomentumTestFunction(
                (lambda n, slot: lambda p: _placed(hermite_3d(n, p), slot))(n, slot),
                "schwartz",
                None,
                hints,
            )
            modes.append(Mode(slot, n, f))
    return modes


def _placed(values, slot):
    out = np.zeros(values.shape + (4,), dtype=complex)
    out[:, slot] = values
    return out


def _photon_mode_functions(k2: int, sigma: float, hints: QuadratureHints) -> list:
    """Bump times Hermite functions, orthonormalized per polarization (Gram-Schmidt via Cholesky)."""
    if k2 == 0:
        return []
    idx = _multi_indices(k2)
    nodes, weights = spherical_grid(hints)
    raw = np.stack([hermite_3d(n, nodes) * bump(nodes, sigma) for n in idx], axis=1)
    G = (raw.T * weights) @ raw
    L = np.linalg.cholesky(G)
    Linv = np.linalg.inv(L)
    modes = []
    for slot in range(4):
        for j, n in enumerate(idx):
            coeffs = Linv[j, : j + 1].copy()

            def ev(p, coeffs=coeffs, slot=slot):
                vals = sum(c * hermite_3d(nn, p) for c, nn in zip(coeffs, idx)) * bump(p, sigma)
                return _placed(np.asarray(vals, dtype=complex), slot)

            modes.append(Mode(slot, n, MomentumTestFunction(ev, "schwartz_zero", None, hints)))
    return modes


def build_fock(config: FockConfig = FockConfig()) -> TruncatedFock:
    if 4 * config.k1 > 12:
        raise ValueError("at most 12 fermion modes are supported")
    hints = config.quadrature
    return TruncatedFock(
        _fermion_mode_functions(config.k1, hints),
        _photon_mode_functions(config.k2, config.photon_sigma, hints),
        config.n_max,
        hints,
    )


def annihilator(F: TruncatedFock, xi: MomentumTestFunction, species: str = "dirac", weight: str = "flat",
                m: float = 1.0) -> sp.csr_matrix:
    """a(xi) = sum_k conj(d_k) a_k with d = G^(1/2) c; G is the weighted mode Gram matrix."""
    c = F.coefficients(xi, species)
    if weight != "flat":
        vals, vecs = np.linalg.eigh(F.weighted_gram(species, weight, m))
        c = (vecs * np.sqrt(np.clip(vals, 0, None))) @ vecs.conj().T @ c
    out = sp.csr_matrix((F.dim, F.dim), dtype=complex)
    for ck, op in zip(c, F.annihilators(species)):
        if ck != 0:
            out = out + np.conj(ck) * op
    return out


def creator(F: TruncatedFock, xi: MomentumTestFunction, species: str = "dirac", weight: str = "flat",
            m: float = 1.0) -> sp.csr_matrix:
    return annihilator(F, xi, species, weight, m).conj().T.tocsr()


def krein_creator(F: TruncatedFock, xi: MomentumTestFunction) -> sp.csr_matrix:
    """eta a(xi)^dagger eta, the adjoint with respect to the indefinite photon form."""
    return (F.eta @ creator(F, xi, "photon") @ F.eta).tocsr()


def gupta_bleuler_eta(F: TruncatedFock) -> sp.csr_matrix:
    if not F.boson_modes:
        raise ValueError("the space has no photon modes")
    return F.eta


def represent(F: TruncatedFock, kp: KernelProduct, xs: dict | None = None) -> sp.csr_matrix:
    """Operator of a kernel product whose variables sit at fixed points (or one spatial delta).

    Point-evaluated products factorize slot by slot, so the operator is the product
    of the single-slot mode operators in the stored normal order.  A two-factor product
    with one spatial delta gives a (1,1), (2,0) or (0,2) matrix from a 3-d quadrature.
    """
    if kp.convolutions:
        raise ValueError("represent needs x-local products; smear convolutions first")
    if kp.deltas:
        return _represent_delta_pair(F, kp)
    xs = xs or {}
    out = F.identity() * (kp.sign * kp.coeff)
    for f, g in zip(kp.factors, kp.groups):
        out = out @ F.mode_operator(f, F.kernel_coefficients(f, xs[g]))
    return out.tocsr()


def _represent_delta_pair(F: TruncatedFock, kp: KernelProduct) -> sp.csr_matrix:
    if len(kp.factors) != 2 or len(kp.deltas) != 1:
        raise ValueError("only two-factor products with a single delta are supported")
    out = sp.csr_matrix((F.dim, F.dim), dtype=complex)
    modes0, modes1 = F.modes(kp.factors[0].species), F.modes(kp.factors[1].species)
    ops0 = F.creator_ops(kp.factors[0].species) if kp.factors[0].is_creator else F.annihilators(kp.factors[0].species)
    ops1 = F.creator_ops(kp.factors[1].species) if kp.factors[1].is_creator else F.annihilators(kp.factors[1].species)
    for i, mi in enumerate(modes0):
        ei = mi.function.conj() if kp.factors[0].is_creator else mi.function
        for j, mj in enumerate(modes1):
            ej = mj.function.conj() if kp.factors[1].is_creator else mj.function
            t = smear_spatial_delta_pair(kp, [ei, ej], F.hints)
            if abs(t) > 1e-15:
                out = out + t * (ops0[i] @ ops1[j])
    return out.tocsr()


# --------------------------------------------------------------------------- translation generator check


def noether_density_terms(variant: str, mu: int, m: float = 1.0, rep: str = "standard") -> list:
    """Polarity monomials of (i/2) :psi^dag d^mu psi - (d^mu psi^dag) psi: at one point."""
    terms = []
    for a in range(4):
        psi = dirac_kernel(variant, "annih", a, m=m, rep=rep)
        psi_dag = dirac_kernel(variant, "annih", a, adjoint=True, m=m, rep=rep)
        terms += polarity_expansion([psi_dag, raised_derivative(psi, mu)], coeff=0.5j)
        terms += polarity_expansion([raised_derivative(psi_dag, mu), psi], coeff=-0.5j)
    return terms


def bsp_check(variant: str, mu: int, zeta: MomentumTestFunction, chi: MomentumTestFunction,
              m: float = 1.0, rep: str = "standard", hints: QuadratureHints | None = None,
              x0: float = 0.0) -> dict:
    """Compare the spatial integral of the Noether current with sum_s int p^mu conj(zeta) chi."""
    hints = hints or zeta.hints
    integrated = [integrate_out(kp, "space", 0, x0) for kp in noether_density_terms(variant, mu, m, rep)]
    zeta_bar = zeta.conj()
    computed = 0.0j
    nodes, weights = spherical_grid(hints)
    kernels: dict = {}
    # the pair-term diagnostic is pointwise, so a fixed subsample of nodes suffices
    probe = nodes[:: max(1, len(nodes) // 512)]
    for kp in integrated:
        mom = resolve_delta(kp, [probe, probe], kp.deltas[0])
        for s0 in kp.factors[0].slot_support:
            for s1 in kp.factors[1].slot_support:
                key = (kp.l, s0, s1)
                kernels[key] = kernels.get(key, 0.0) + kp.evaluate([s0, s1], mom)
        if kp.l == 1:
            computed += smear_spatial_delta_pair(kp, [zeta_bar, chi], hints)
    scale = sum(np.abs(v) for (l, _, _), v in kernels.items() if l == 1)
    pair_terms = sum(np.abs(v) for (l, _, _), v in kernels.items() if l != 1)
    pmu = np.concatenate([energy(nodes, m)[:, None], nodes], axis=1)[:, mu]
    target = complex(np.sum(weights * pmu * np.sum(np.conj(zeta(nodes)) * chi(nodes), axis=1)))
    residual = abs(computed - target)
    return {
        "variant": variant,
        "mu": mu,
        "computed": computed,
        "target": target,
        "residual": residual,
        "relative_deviation": residual / max(abs(target), 1e-300),
        # pair creation/annihilation parts relative to the number-conserving part, node by node
        "pair_terms_relative": float(np.max(pair_terms / scale)),
    }
