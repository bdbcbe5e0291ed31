"""Plane-wave kernels of the free Dirac and photon fields.

A kernel is ``amplitude(slot, p) * exp(sign * i p.x)`` with ``sign = -1`` for
annihilation and ``+1`` for creation, where ``p = (E(p), p)`` lies on the mass shell
(Dirac) or the light cone (photon, optionally regularized to a small mass).

Slot indices are array positions 0..3.  For the Dirac field slots 0, 1 carry the
electron spins 1, 2 and slots 2, 3 the positron spins 1, 2.  Photon slots are the
polarization index nu.  The ``component`` of a kernel is the spinor index a (0..3)
or the Lorentz index mu (0..3) of the field value.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .dirac_algebra import METRIC, energy, spinors
from .errors import ClassViolation
from .test_spaces import (
    DEFAULT_HINTS,
    SCHWARTZ,
    SCHWARTZ_ZERO,
    MomentumTestFunction,
    QuadratureHints,
    SpacetimeTestFunction,
    quadrature_3d,
    vanishing_certificate,
)

ANNIH = "annih"
CREAT = "creat"
DIRAC_VARIANTS = ("dirac_local", "dirac_standard")
PHOTON_VARIANTS = ("photon_identityB", "photon_sqrtB")
LOWER_SIGNS = np.array([1.0, -1.0, -1.0, -1.0])


def identity_sqrt_b(p: np.ndarray) -> np.ndarray:
    """Trivial polarization matrix provider: the 4x4 identity at every momentum."""
    return np.broadcast_to(np.eye(4, dtype=complex), p.shape[:-1] + (4, 4))


@dataclass(frozen=True)
class PlaneWaveKernel:
    species: str
    polarity: str
    variant: str
    component: int | None = None
    deriv: tuple = (0, 0, 0, 0)
    coeff: complex = 1.0
    adjoint: bool = False  # Dirac only: kernel of the conjugate field psi^dagger
    m: float = 1.0
    eps_mass: float = 0.0  # photon only: |p| -> sqrt(|p|^2 + eps^2)
    rep: str = "standard"
    sqrt_b: Callable | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.species not in ("dirac", "photon"):
            raise ValueError(f"unknown species {self.species!r}")
        if self.polarity not in (ANNIH, CREAT):
            raise ValueError(f"unknown polarity {self.polarity!r}")
        allowed = DIRAC_VARIANTS if self.species == "dirac" else PHOTON_VARIANTS
        if self.variant not in allowed:
            raise ValueError(f"variant {self.variant!r} does not belong to species {self.species!r}")
        if self.component is not None and not 0 <= self.component <= 3:
            raise IndexError(f"component {self.component} outside 0..3")
        if len(self.deriv) != 4 or min(self.deriv) < 0:
            raise ValueError("derivative multi-index must have four non-negative entries")
        if self.variant == "photon_sqrtB" and self.sqrt_b is None:
            raise ValueError("photon_sqrtB needs a sqrt_b matrix provider (identity_sqrt_b is the trivial one)")
        if self.adjoint and self.species != "dirac":
            raise ValueError("adjoint kernels exist only for the Dirac field")

    # -- bookkeeping ------------------------------------------------------------------

    @property
    def sign(self) -> int:
        """Phase sign: the kernel carries exp(sign * i p.x)."""
        return 1 if self.polarity == CREAT else -1

    @property
    def is_creator(self) -> bool:
        return self.polarity == CREAT

    @property
    def fermionic(self) -> bool:
        return self.species == "dirac"

    @property
    def slot_support(self) -> tuple[int, ...]:
        """Slots on which the amplitude can be nonzero."""
        if self.species == "photon":
            if self.variant == "photon_identityB" and self.component is not None:
                return (self.component,)
            return (0, 1, 2, 3)
        electron = (self.polarity == ANNIH) != self.adjoint
        return (0, 1) if electron else (2, 3)

    def energy(self, p: np.ndarray) -> np.ndarray:
        if self.species == "dirac":
            return energy(p, self.m)
        return np.sqrt(np.sum(p * p, axis=-1) + self.eps_mass**2)

    def four_momentum(self, p: np.ndarray) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        return np.concatenate([self.energy(p)[..., None], p], axis=-1)

    def with_component(self, component: int | None) -> "PlaneWaveKernel":
        return replace(self, component=component)

    def scaled(self, c: complex) -> "PlaneWaveKernel":
        return replace(self, coeff=self.coeff * c)

    def regularized(self, eps_mass: float) -> "PlaneWaveKernel":
        return replace(self, eps_mass=eps_mass) if self.species == "photon" else self

    # -- evaluation -------------------------------------------------------------------

    def deriv_factor(self, p: np.ndarray) -> np.ndarray:
        """Product over mu of (sign * i * p_mu)^alpha_mu with lowered p_mu = (E, -p)."""
        if not any(self.deriv):
            return np.ones(np.asarray(p).shape[:-1], dtype=complex)
        low = self.four_momentum(p) * LOWER_SIGNS
        out = np.ones(low.shape[:-1], dtype=complex)
        for mu, a in enumerate(self.deriv):
            if a:
                out = out * (self.sign * 1j * low[..., mu]) ** a
        return out

    def amplitude_matrix(self, p) -> np.ndarray:
        """(N, 4 slots, 4 components) amplitude, including derivative factor and coefficient."""
        p = np.asarray(p, dtype=float).reshape(-1, 3)
        n = p.shape[0]
        if self.species == "photon":
            if self.variant == "photon_identityB":
                mat = np.broadcast_to(np.eye(4, dtype=complex), (n, 4, 4)).copy()
            else:
                mat = np.asarray(self.sqrt_b(p), dtype=complex).reshape(n, 4, 4)
                mat = np.swapaxes(mat, -1, -2)  # [slot nu, component mu] = sqrtB[mu, nu]
            mat = mat / np.sqrt(2.0 * self.energy(p))[:, None, None]
        else:
            u, v = spinors(self.rep, p, self.m)
            mat = np.zeros((n, 4, 4), dtype=complex)
            if not self.adjoint:
                if self.polarity == ANNIH:
                    mat[:, 0:2, :] = u
                else:
                    mat[:, 2:4, :] = v
            else:
                if self.polarity == CREAT:
                    mat[:, 0:2, :] = np.conj(u)
                else:
                    mat[:, 2:4, :] = np.conj(v)
            if self.variant == "dirac_local":
                mat = mat / (2.0 * energy(p, self.m))[:, None, None]
        return self.coeff * self.deriv_factor(p)[:, None, None] * mat

    def amplitude(self, p) -> np.ndarray:
        """(N, 4 slots) amplitude for the fixed component."""
        if self.component is None:
            raise ValueError("kernel has no fixed component; use amplitude_matrix")
        return self.amplitude_matrix(p)[:, :, self.component]

    def phase(self, p, x) -> np.ndarray:
        k = self.four_momentum(np.asarray(p, dtype=float).reshape(-1, 3))
        x = np.asarray(x, dtype=float)
        kx = k[:, 0] * x[0] - k[:, 1:] @ x[1:]
        return np.exp(self.sign * 1j * kx)

    def __call__(self, slot: int, p, x) -> np.ndarray:
        """kappa(slot, p; component, x) for the fixed component."""
        return self.amplitude(p)[:, slot] * self.phase(p, x)

    def to_json(self) -> dict:
        return {
            "species": self.species,
            "polarity": self.polarity,
            "variant": self.variant,
            "component": self.component,
            "deriv": list(self.deriv),
            "coeff_re": float(np.real(self.coeff)),
            "coeff_im": float(np.imag(self.coeff)),
            "adjoint": self.adjoint,
        }

    @classmethod
    def from_json(cls, d, sqrt_b: Callable | None = None) -> "PlaneWaveKernel":
        if isinstance(d, str):
            d = json.loads(d)
        return cls(
            species=d["species"],
            polarity=d["polarity"],
            variant=d["variant"],
            component=d.get("component"),
            deriv=tuple(d.get("deriv", (0, 0, 0, 0))),
            coeff=complex(d.get("coeff_re", 1.0), d.get("coeff_im", 0.0)),
            adjoint=bool(d.get("adjoint", False)),
            sqrt_b=sqrt_b,
        )


def dirac_kernel(variant: str, polarity: str, component: int | None = None, adjoint: bool = False,
                 m: float = 1.0, rep: str = "standard") -> PlaneWaveKernel:
    if variant not in DIRAC_VARIANTS:
        raise ValueError(f"unknown Dirac variant {variant!r}")
    return PlaneWaveKernel("dirac", polarity, variant, component, adjoint=adjoint, m=m, rep=rep)


def photon_kernel(variant: str, polarity: str, component: int | None = None,
                  sqrt_b: Callable | None = None, eps_mass: float = 0.0) -> PlaneWaveKernel:
    if variant not in PHOTON_VARIANTS:
        raise ValueError(f"unknown photon variant {variant!r}")
    return PlaneWaveKernel("photon", polarity, variant, component, eps_mass=eps_mass, sqrt_b=sqrt_b)


def derive_kernel(kernel: PlaneWaveKernel, alpha) -> PlaneWaveKernel:
    alpha = tuple(int(a) for a in alpha)
    if len(alpha) != 4 or min(alpha) < 0:
        raise ValueError("derivative multi-index must have four non-negative entries")
    return replace(kernel, deriv=tuple(a + b for a, b in zip(kernel.deriv, alpha)))


def raised_derivative(kernel: PlaneWaveKernel, mu: int) -> PlaneWaveKernel:
    """Kernel of d^mu = g^{mu mu} d_mu applied to the field."""
    return derive_kernel(kernel, tuple(int(i == mu) for i in range(4))).scaled(METRIC[mu, mu])


def field_parts(kernel: PlaneWaveKernel) -> tuple[PlaneWaveKernel, PlaneWaveKernel]:
    """(annihilation, creation) kernels of the same field component."""
    return replace(kernel, polarity=ANNIH), replace(kernel, polarity=CREAT)


# --------------------------------------------------------------------------- smearing


def _require_class(kernel: PlaneWaveKernel, xi: MomentumTestFunction):
    if kernel.species == "photon" and xi.klass != SCHWARTZ_ZERO:
        raise ClassViolation(
            "photon kernels accept only momentum functions vanishing to all orders at p=0 "
            "(zero-mass test space); got an ordinary Schwartz function"
        )
    if xi.klass not in (SCHWARTZ, SCHWARTZ_ZERO):
        raise ClassViolation(f"unknown test-function class {xi.klass!r}")


@dataclass(frozen=True)
class SmearedKernelFunction:
    """x -> sum_s int kappa(s, p; component, x) xi(s, p) d^3p for a fixed kernel and xi."""

    kernel: PlaneWaveKernel
    xi: MomentumTestFunction
    hints: QuadratureHints = DEFAULT_HINTS
    smeared_slot: str = "momentum"

    def __call__(self, component: int, x, with_error: bool = False, check: bool = True):
        k = self.kernel.with_component(component)
        x = np.asarray(x, dtype=float)

        def integrand(p):
            return np.sum(k.amplitude(p) * self.xi(p), axis=1) * k.phase(p, x)

        val, err = quadrature_3d(integrand, self.hints, check=check)
        return (complex(val), err) if with_error else complex(val)

    def derivative(self, component: int, x, alpha, check: bool = True) -> complex:
        return SmearedKernelFunction(derive_kernel(self.kernel, alpha), self.xi, self.hints)(component, x,
                                                                                             check=check)

    def oc_bound(self, xs, max_order: int = 1, component: int = 0) -> float:
        """Largest sampled |d^alpha kappa(xi)(x)| over |alpha| <= max_order (polynomial-boundedness check)."""
        alphas = [(0, 0, 0, 0)]
        if max_order >= 1:
            alphas += [tuple(int(i == j) for i in range(4)) for j in range(4)]
        best = 0.0
        for a in alphas:
            for x in xs:
                best = max(best, abs(self.derivative(component, x, a, check=False)))
        return best


def smear_momentum(kernel: PlaneWaveKernel, xi: MomentumTestFunction,
                   hints: QuadratureHints | None = None) -> SmearedKernelFunction:
    """Integrate the kernel's momentum slot against xi.  Photon kernels demand class schwartz_zero."""
    _require_class(kernel, xi)
    if hints is None:
        hints = replace(xi.hints, radial_scale=kernel.m if kernel.species == "dirac" else xi.hints.radial_scale)
    return SmearedKernelFunction(kernel, xi, hints)


def smear_spacetime(kernel: PlaneWaveKernel, phi: SpacetimeTestFunction) -> MomentumTestFunction:
    """kappa(phi)(s, p) = sum_a amplitude^a(s, p) * phi_tilde^a(sign * (E(p), p)).

    With phi_tilde(k) = int phi(x) exp(i k.x) d^4x the x-integral of the plane wave
    exp(sign i p.x) picks the shell value at sign * p.
    """
    if kernel.species == "photon" and phi.klass != "S00":
        raise ClassViolation(
            "photon kernels accept only space-time functions whose Fourier transform vanishes "
            "to all orders at k=0 (zero-mass test space); ordinary Schwartz functions are refused"
        )
    if phi.klass not in ("S", "S00"):
        raise ClassViolation(f"unknown space-time class {phi.klass!r}")
    full = kernel.with_component(None)
    comps = range(4) if kernel.component is None else (kernel.component,)

    def ev(p):
        amp = full.amplitude_matrix(p)
        shell = kernel.sign * full.four_momentum(p)
        vals = phi(shell)
        return sum(amp[:, :, a] * vals[:, a][:, None] for a in comps)

    # a mass-regularized shell stays away from k=0, so only the exact cone is certified
    on_cone = kernel.species == "photon" and kernel.eps_mass == 0.0
    klass = SCHWARTZ_ZERO if on_cone else SCHWARTZ
    out = MomentumTestFunction(ev, klass, None, DEFAULT_HINTS)
    if on_cone:
        vanishing_certificate(out)
    return out
