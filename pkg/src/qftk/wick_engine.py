"""Kernel-level Wick calculus on products of plane-wave kernels.

A :class:`KernelProduct` is a normally ordered monomial: creation factors first, then
annihilation factors, each carrying its own momentum slot.  Factors are grouped by
the space-time variable they depend on.  Integration over a variable turns its
phases into a stored delta constraint; convolution with a propagator multiplies
the amplitude by the propagator's momentum symbol at the signed momentum sum of
that variable's group.  Both are resolved only when the product is smeared.

All (2 pi) normalizations of Fourier transforms and delta constraints are set to 1.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from typing import Callable, Iterable, Sequence

import numpy as np

from .dirac_algebra import METRIC, slash
from .errors import SingularSymbolError
from .field_kernels import ANNIH, CREAT, PlaneWaveKernel, smear_spacetime
from .test_spaces import (
    DEFAULT_HINTS,
    MomentumTestFunction,
    QuadratureHints,
    SpacetimeTestFunction,
    quadrature_3d,
    spherical_grid,
)

SYMBOL_KINDS = ("D0_av", "D0_ret", "Dm_av", "Dm_ret", "S_ret", "S_av")


def permutation_parity(perm: Sequence[int]) -> int:
    """+1 for even, -1 for odd permutations given as a sequence of distinct integers."""
    perm = list(perm)
    sign = 1
    seen = [False] * len(perm)
    order = sorted(range(len(perm)), key=lambda i: perm[i])
    for start in range(len(perm)):
        if seen[start]:
            continue
        length = 0
        j = start
        while not seen[j]:
            seen[j] = True
            j = order[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def fermionic_sign(factors: Sequence[PlaneWaveKernel], order: Sequence[int]) -> int:
    """Parity of the reordering restricted to the fermionic factors."""
    fermi = [i for i in order if factors[i].fermionic]
    return permutation_parity(fermi)


# --------------------------------------------------------------------------- propagator symbols


@dataclass(frozen=True)
class PairingSymbol:
    """Momentum symbol of a retarded/advanced propagator.

    Scalar kinds return ``1/(|k|^2 + M^2 - k0^2)``; spinor kinds return
    ``(k-slash + m)/(k^2 - m^2)``.  With ``eps_shift > 0`` the energy is moved to
    ``k0 + i eps`` (retarded) or ``k0 - i eps`` (advanced) so that the singular set
    is avoided; with ``eps_shift == 0`` hitting the singular set raises.
    """

    kind: str
    mass: float = 0.0
    rep: str = "standard"
    eps_shift: float = 0.0

    def __post_init__(self):
        if self.kind not in SYMBOL_KINDS:
            raise ValueError(f"unknown propagator kind {self.kind!r}")
        if self.mass < 0:
            raise ValueError("mass must be non-negative")

    @property
    def is_spinor(self) -> bool:
        return self.kind.startswith("S")

    @property
    def effective_mass(self) -> float:
        return 0.0 if self.kind.startswith("D0") else self.mass

    def denominator(self, k) -> np.ndarray:
        k = np.asarray(k, dtype=float)
        shift = self.eps_shift if self.kind.endswith("ret") else -self.eps_shift
        k0 = k[..., 0] + 1j * shift
        den = np.sum(k[..., 1:] ** 2, axis=-1) + self.effective_mass**2 - k0 * k0
        if self.eps_shift == 0.0:
            flat_den = np.atleast_1d(den).reshape(-1)
            flat_k = k.reshape(-1, 4)
            bad = np.abs(flat_den) <= 1e-13 * (1.0 + np.sum(flat_k * flat_k, axis=-1))
            if np.any(bad):
                kk = flat_k[int(np.argmax(bad))]
                raise SingularSymbolError(
                    f"{self.kind} evaluated on its singular set at k={np.array2string(kk, precision=6)}"
                )
        return den

    def scalar(self, k) -> np.ndarray:
        return 1.0 / self.denominator(k)

    def __call__(self, k) -> np.ndarray:
        if not self.is_spinor:
            return self.scalar(k)
        k = np.asarray(k, dtype=float)
        num = slash(self.rep, k) + self.mass * np.eye(4)
        return -num * self.scalar(k)[..., None, None]


def d0_av() -> PairingSymbol:
    return PairingSymbol("D0_av")


def s_ret(m: float = 1.0, rep: str = "standard") -> PairingSymbol:
    return PairingSymbol("S_ret", m, rep)


# --------------------------------------------------------------------------- kernel products


@dataclass(frozen=True)
class Convolution:
    symbol: PairingSymbol
    group: int
    entry: tuple | None = None  # matrix entry (a, b) of a spinor symbol


@dataclass(frozen=True)
class DeltaConstraint:
    group: int
    spatial_only: bool
    x0: float = 0.0


@dataclass(frozen=True)
class KernelProduct:
    factors: tuple
    groups: tuple
    sign: int = 1
    coeff: complex = 1.0
    origin: tuple = ()
    convolutions: tuple = ()
    deltas: tuple = ()
    envelopes: tuple = ()  # groups carrying non-plane-wave x dependence

    def __post_init__(self):
        if len(self.factors) != len(self.groups):
            raise ValueError("every factor needs a variable group")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        seen_annih = False
        for f in self.factors:
            if f.is_creator and seen_annih:
                raise ValueError("factors must be normally ordered (creators first)")
            seen_annih = seen_annih or not f.is_creator

    @property
    def l(self) -> int:
        return sum(f.is_creator for f in self.factors)

    @property
    def m(self) -> int:
        return len(self.factors) - self.l

    @property
    def sym_groups(self) -> tuple:
        """((statistics, polarity, positions), ...): one (anti)symmetrization group per kind."""
        out = []
        for pol in (CREAT, ANNIH):
            for stat, fermi in (("fermi", True), ("bose", False)):
                pos = tuple(i for i, f in enumerate(self.factors) if f.polarity == pol and f.fermionic == fermi)
                if pos:
                    out.append((stat, pol, pos))
        return tuple(out)

    def scaled(self, c: complex) -> "KernelProduct":
        return replace(self, coeff=self.coeff * c)

    def group_momentum(self, group: int, momenta: Sequence[np.ndarray]) -> np.ndarray:
        """Signed 4-momentum sum of the factors depending on ``group`` (creators counted +)."""
        k = 0.0
        for f, g, p in zip(self.factors, self.groups, momenta):
            if g == group:
                k = k + f.sign * f.four_momentum(p)
        return np.asarray(k)

    def amplitude(self, slots: Sequence[int], momenta: Sequence[np.ndarray]) -> np.ndarray:
        """x-independent part: sign * coeff * factor amplitudes * convolution symbols."""
        val = self.sign * self.coeff
        for f, s, p in zip(self.factors, slots, momenta):
            val = val * f.amplitude(p)[:, s]
        for c in self.convolutions:
            sym = c.symbol(self.group_momentum(c.group, momenta))
            val = val * (sym[..., c.entry[0], c.entry[1]] if c.entry is not None else sym)
        return val

    def evaluate(self, slots, momenta, xs: dict | None = None, symmetrize: bool = False) -> np.ndarray:
        """Regular part of the kernel: amplitude times the phases of unintegrated groups.

        Groups removed by a 4-delta contribute no phase; groups removed by a spatial
        delta contribute the residual time phase exp(i k0 x0).
        """
        if symmetrize:
            return self._symmetrized(slots, momenta, xs)
        momenta = [np.asarray(p, dtype=float).reshape(-1, 3) for p in momenta]
        val = self.amplitude(slots, momenta)
        xs = xs or {}
        deltas = {d.group: d for d in self.deltas}
        for g in sorted(set(self.groups)):
            k = self.group_momentum(g, momenta)
            if g in deltas:
                if deltas[g].spatial_only:
                    val = val * np.exp(1j * k[..., 0] * deltas[g].x0)
                continue
            x = np.asarray(xs[g], dtype=float)
            val = val * np.exp(1j * (k[..., 0] * x[0] - k[..., 1:] @ x[1:]))
        return val

    def _symmetrized(self, slots, momenta, xs):
        groups = [pos for _, _, pos in self.sym_groups]
        stats = [st for st, _, _ in self.sym_groups]
        total = 0.0
        count = 0
        for perms in itertools.product(*(itertools.permutations(range(len(g))) for g in groups)):
            s = list(slots)
            p = list(momenta)
            sgn = 1
            for pos, perm, st in zip(groups, perms, stats):
                for dst, src in zip(pos, perm):
                    s[dst] = slots[pos[src]]
                    p[dst] = momenta[pos[src]]
                if st == "fermi":
                    sgn *= permutation_parity(perm)
            total = total + sgn * self.evaluate(s, p, xs)
            count += 1
        return total / count

    def to_json(self) -> dict:
        return {
            "factors": [f.to_json() for f in self.factors],
            "groups": list(self.groups),
            "sign": self.sign,
            "coeff_re": float(np.real(self.coeff)),
            "coeff_im": float(np.imag(self.coeff)),
            "l": self.l,
            "m": self.m,
            "convolutions": [
                {"kind": c.symbol.kind, "mass": c.symbol.mass, "group": c.group,
                 "entry": list(c.entry) if c.entry is not None else None}
                for c in self.convolutions
            ],
            "deltas": [{"group": d.group, "spatial_only": d.spatial_only, "x0": d.x0} for d in self.deltas],
        }


def _normal_order(factors: Sequence[PlaneWaveKernel], target: Sequence[int] | None = None) -> list[int]:
    if target is None:
        creators = [i for i, f in enumerate(factors) if f.is_creator]
        annihilators = [i for i, f in enumerate(factors) if not f.is_creator]
        return creators + annihilators
    target = list(target)
    if sorted(target) != list(range(len(factors))):
        raise ValueError("target order must be a permutation of the factor positions")
    flags = [factors[i].is_creator for i in target]
    if flags != sorted(flags, reverse=True):
        raise ValueError("target order must place every creator before every annihilator")
    return target


def wick_tensor(ops: Sequence[PlaneWaveKernel], target: Sequence[int] | None = None) -> KernelProduct:
    """Normally ordered tensor product of factors, each depending on its own variable.

    Without ``target`` the creators are moved left keeping relative order.  The sign
    is the parity of the permutation restricted to fermionic factors.
    """
    order = _normal_order(ops, target)
    return KernelProduct(
        factors=tuple(ops[i] for i in order),
        groups=tuple(order),
        sign=fermionic_sign(ops, order),
        origin=tuple(order),
    )


def wick_same_point(ops: Sequence[PlaneWaveKernel], target: Sequence[int] | None = None) -> KernelProduct:
    """Like :func:`wick_tensor` but all factors share one space-time variable (group 0)."""
    order = _normal_order(ops, target)
    return KernelProduct(
        factors=tuple(ops[i] for i in order),
        groups=(0,) * len(ops),
        sign=fermionic_sign(ops, order),
        origin=tuple(order),
    )


def polarity_expansion(components: Sequence[PlaneWaveKernel], coeff: complex = 1.0,
                       same_point: bool = True) -> list[KernelProduct]:
    """Expand a Wick monomial of full fields into its 2^n polarity monomials."""
    out = []
    for pols in itertools.product((ANNIH, CREAT), repeat=len(components)):
        ops = [replace(c, polarity=p) for c, p in zip(components, pols)]
        kp = wick_same_point(ops) if same_point else wick_tensor(ops)
        out.append(kp.scaled(coeff))
    return out


def integrate_out(kp: KernelProduct, which: str = "spacetime", group: int = 0, x0: float = 0.0) -> KernelProduct:
    """Integrate one variable: d^4x gives a 4-momentum delta, d^3x at time x0 a 3-momentum delta."""
    if which not in ("spacetime", "space"):
        raise ValueError("which must be 'spacetime' or 'space'")
    if not kp.factors:
        return kp
    if group in kp.envelopes:
        raise ValueError("variable carries non-plane-wave dependence; outside the closed-form class")
    if group not in kp.groups:
        raise ValueError(f"no factor depends on variable {group}")
    if any(d.group == group for d in kp.deltas):
        raise ValueError(f"variable {group} was already integrated")
    return replace(kp, deltas=kp.deltas + (DeltaConstraint(group, which == "space", x0),))


def convolve(symbol: PairingSymbol, kp: KernelProduct, group: int = 0, entry=None) -> KernelProduct:
    """Convolve variable ``group`` with a propagator: multiply by its symbol at the group's momentum."""
    if group in kp.envelopes:
        raise ValueError("convolution needs pure plane-wave dependence on the chosen variable")
    if any(d.group == group for d in kp.deltas):
        raise ValueError("cannot convolve an integrated variable")
    if symbol.is_spinor and entry is None:
        raise ValueError("spinor propagators need a matrix entry (a, b)")
    return replace(kp, convolutions=kp.convolutions + (Convolution(symbol, group, entry),))


def regularize_mass(kp: KernelProduct, eps_mass: float) -> KernelProduct:
    if eps_mass < 0:
        raise ValueError("eps_mass must be non-negative")
    return replace(kp, factors=tuple(f.regularized(eps_mass) for f in kp.factors))


def resolve_delta(kp: KernelProduct, momenta: list, delta: DeltaConstraint) -> list:
    """Eliminate the last momentum of the constrained group: sum_j sign_j p_j = 0."""
    idx = [i for i, g in enumerate(kp.groups) if g == delta.group]
    last = idx[-1]
    rest = 0.0
    for i in idx[:-1]:
        rest = rest + kp.factors[i].sign * np.asarray(momenta[i])
    out = list(momenta)
    out[last] = -kp.factors[last].sign * rest
    return out


# --------------------------------------------------------------------------- contractions


def contraction_metric(kernel: PlaneWaveKernel) -> np.ndarray:
    """Per-slot (anti)commutator weight: 1 for Dirac slots, -g_{nu nu} for photon slots."""
    return np.ones(4) if kernel.species == "dirac" else -np.diag(METRIC)


def can_contract(a: PlaneWaveKernel, b: PlaneWaveKernel) -> bool:
    """An annihilator of one monomial meets a creator of the next with overlapping slots."""
    return (
        not a.is_creator
        and b.is_creator
        and a.species == b.species
        and bool(set(a.slot_support) & set(b.slot_support))
    )


@dataclass(frozen=True)
class ContractionTerm:
    """One term of a Wick expansion: pairings times a normally ordered remainder."""

    pairs: tuple  # ((factor_a, group_a, factor_b, group_b), ...)
    pattern: tuple  # ((i, j), ...) indices into the two monomials
    remainder: KernelProduct


def normal_order_product(x1: KernelProduct, x2: KernelProduct, eps_mass: float = 0.0) -> list[ContractionTerm]:
    """Expand x1 * x2 into normally ordered terms, one per contraction pattern.

    Each pattern pairs annihilators of x1 with creators of x2.  The sign is the parity
    (fermions only) of the reordering that puts every contracted pair adjacent,
    followed by the remaining factors in normal order.  Variable groups of x2 are
    shifted past those of x1.  Patterns are listed in lexicographic order.
    """
    if eps_mass > 0:
        x1, x2 = regularize_mass(x1, eps_mass), regularize_mass(x2, eps_mass)
    n1 = len(x1.factors)
    shift = max(x1.groups, default=-1) + 1
    word = list(x1.factors) + list(x2.factors)
    groups = list(x1.groups) + [g + shift for g in x2.groups]
    annih = [i for i, f in enumerate(x1.factors) if not f.is_creator]
    creat = [n1 + j for j, f in enumerate(x2.factors) if f.is_creator]
    edges = {(i, j) for i in annih for j in creat if can_contract(word[i], word[j])}
    terms = []
    for size in range(0, min(len(annih), len(creat)) + 1):
        for chosen_a in itertools.combinations(annih, size):
            for chosen_c in itertools.permutations(creat, size):
                pattern = tuple(zip(chosen_a, chosen_c))
                if any(p not in edges for p in pattern):
                    continue
                used = set(chosen_a) | set(chosen_c)
                rest = [i for i in range(len(word)) if i not in used]
                rest_creat = [i for i in rest if word[i].is_creator]
                rest_annih = [i for i in rest if not word[i].is_creator]
                order = [k for pair in pattern for k in pair] + rest_creat + rest_annih
                sign = x1.sign * x2.sign * fermionic_sign(word, order)
                remainder = KernelProduct(
                    factors=tuple(word[i] for i in rest_creat + rest_annih),
                    groups=tuple(groups[i] for i in rest_creat + rest_annih),
                    sign=sign,
                    coeff=x1.coeff * x2.coeff,
                    origin=tuple(rest_creat + rest_annih),
                )
                pairs = tuple((word[i], groups[i], word[j], groups[j]) for i, j in pattern)
                terms.append(ContractionTerm(pairs, tuple((i, j - n1) for i, j in pattern), remainder))
    terms.sort(key=lambda t: t.pattern)
    return terms


def pairing_value(a: PlaneWaveKernel, xa, b: PlaneWaveKernel, xb, hints: QuadratureHints | None = None,
                  check: bool = True) -> complex:
    """sum_s int kappa_a(s,p; xa) kappa_b(s,p; xb) w_s d^3p with the contraction metric w_s."""
    w = contraction_metric(a)

    def integrand(p):
        return np.sum(a.amplitude(p) * b.amplitude(p) * w, axis=1) * a.phase(p, xa) * b.phase(p, xb)

    val, _ = quadrature_3d(integrand, hints or DEFAULT_HINTS, check=check)
    return complex(val)


def smeared_pairing(a: PlaneWaveKernel, phi_a: SpacetimeTestFunction, b: PlaneWaveKernel,
                    phi_b: SpacetimeTestFunction, eps_mass: float = 0.0,
                    hints: QuadratureHints | None = None) -> complex:
    """Contraction of kappa_a(phi_a) with kappa_b(phi_b), photon legs regularized by eps_mass."""
    if not can_contract(a, b):
        return 0.0j
    a, b = a.regularized(eps_mass), b.regularized(eps_mass)
    fa, fb = smear_spacetime(a, phi_a), smear_spacetime(b, phi_b)
    w = contraction_metric(a)
    val, _ = quadrature_3d(lambda p: np.sum(fa(p) * fb(p) * w, axis=1), hints or DEFAULT_HINTS)
    return complex(val)


# --------------------------------------------------------------------------- smearing of products


def smear_spatial_delta_pair(kp: KernelProduct, fns: Sequence[MomentumTestFunction],
                             hints: QuadratureHints) -> complex:
    """Pair a two-factor product carrying one spatial delta with per-factor test functions.

    ``fns[j]`` is integrated against slot j as given (callers pass conj(zeta) for
    creator slots when they want a matrix element).
    """
    if len(kp.factors) != 2 or len(kp.deltas) != 1 or kp.convolutions:
        raise ValueError("expected a two-factor product with one spatial delta and no convolution")
    delta = kp.deltas[0]
    nodes, weights = spherical_grid(hints)
    mom = resolve_delta(kp, [nodes, nodes], delta)
    f0, f1 = fns[0](mom[0]), fns[1](mom[1])
    total = 0.0j
    for s0 in kp.factors[0].slot_support:
        for s1 in kp.factors[1].slot_support:
            vals = kp.evaluate([s0, s1], mom)
            total += np.sum(weights * vals * f0[:, s0] * f1[:, s1])
    return complex(total)


def smear_pairs_in_x(terms: Iterable[KernelProduct], assign: Callable, phi_scalar: Callable,
                     group: int = 0, chunk: int = 256) -> complex:
    """sum over terms of int int K(w1, w2; x) f1(w1) f2(w2) phi(x) d^3p1 d^3p2 d^4x.

    Every term is a two-factor product whose factors both depend on ``group``; the
    x-integral of exp(i k.x) phi(x) gives phi_tilde(k).  ``assign(kp)`` returns
    ``((fn0, hints0), (fn1, hints1))`` for the two factors.  Terms sharing factor
    kinematics, symbol and entry are merged so that each pair grid is visited once.
    """
    buckets: dict = {}
    for kp in terms:
        if len(kp.factors) != 2 or any(g != group for g in kp.groups) or kp.deltas:
            raise ValueError("expected two factors on one unintegrated variable")
        (fn0, h0), (fn1, h1) = assign(kp)
        kin = tuple((f.species, f.polarity, f.m, f.eps_mass) for f in kp.factors)
        symbols = tuple(c.symbol for c in kp.convolutions)
        entries = tuple(c.entry for c in kp.convolutions)
        n0, _ = spherical_grid(h0)
        n1, _ = spherical_grid(h1)
        a0 = np.sum(kp.factors[0].amplitude(n0) * fn0(n0), axis=1)
        a1 = np.sum(kp.factors[1].amplitude(n1) * fn1(n1), axis=1)
        outer = buckets.setdefault((kin, symbols, h0, h1), [kp, {}])
        cols = outer[1].setdefault(entries, ([], []))
        cols[0].append(kp.sign * kp.coeff * a0)
        cols[1].append(a1)
    total = 0.0j
    for (kin, symbols, h0, h1), (kp, by_entry) in sorted(buckets.items(), key=lambda kv: repr(kv[0])):
        n0, w0 = spherical_grid(h0)
        n1, w1 = spherical_grid(h1)
        mats = [(e, np.stack(c0, axis=1), np.stack(c1, axis=1)) for e, (c0, c1) in sorted(by_entry.items(), key=repr)]
        k1 = kp.factors[1].sign * kp.factors[1].four_momentum(n1)
        k0_all = kp.factors[0].sign * kp.factors[0].four_momentum(n0)
        for start in range(0, n0.shape[0], chunk):
            sl = slice(start, start + chunk)
            k = k0_all[sl, None, :] + k1[None, :, :]
            syms = [sym(k) for sym in symbols]
            acc = 0.0
            for entries, F0, F1 in mats:
                weight = F0[sl] @ F1.T
                for sym, entry in zip(syms, entries):
                    weight = weight * (sym[..., entry[0], entry[1]] if entry is not None else sym)
                acc = acc + weight
            total += np.sum(w0[sl, None] * (acc * phi_scalar(k)) * w1[None, :])
    return complex(total)
