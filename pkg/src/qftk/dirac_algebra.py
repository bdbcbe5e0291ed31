"""Gamma matrices, free Dirac spinors and the momentum-space projectors built from them.

Conventions: metric signature (+,-,-,-), natural units, the electron mass ``m`` is
passed explicitly (default 1).  Spin labels ``s`` are 1 or 2.  Every function that
takes a spatial momentum accepts either a single 3-vector or an ``(N, 3)`` array and
broadcasts over the leading axis.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

METRIC = np.diag([1.0, -1.0, -1.0, -1.0])

SIGMA = np.array(
    [
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)
I2 = np.eye(2, dtype=complex)
Z2 = np.zeros((2, 2), dtype=complex)
CHI = np.eye(2, dtype=complex)  # CHI[s-1] is the two-spinor basis vector


def _blocks(a, b, c, d):
    return np.block([[a, b], [c, d]])


@dataclass(frozen=True)
class FourMomentum:
    p0: float
    p1: float
    p2: float
    p3: float

    @property
    def vec(self) -> np.ndarray:
        return np.array([self.p1, self.p2, self.p3])

    def as_array(self) -> np.ndarray:
        return np.array([self.p0, self.p1, self.p2, self.p3])

    def dot(self, other: "FourMomentum") -> float:
        return float(self.as_array() @ METRIC @ other.as_array())

    def square(self) -> float:
        return self.dot(self)

    def on_mass_shell(self, m: float) -> bool:
        return abs(self.square() - m * m) <= 1e-12 * max(1.0, self.p0**2)


def energy(pvec, m: float = 1.0):
    """E(p) = sqrt(|p|^2 + m^2), broadcasting over leading axes."""
    pvec = np.asarray(pvec, dtype=float)
    return np.sqrt(np.sum(pvec * pvec, axis=-1) + m * m)


def mass_shell(m: float, pvec, sign: int = 1) -> FourMomentum:
    pvec = np.asarray(pvec, dtype=float)
    return FourMomentum(sign * float(energy(pvec, m)), *map(float, pvec))


def light_cone(pvec) -> FourMomentum:
    pvec = np.asarray(pvec, dtype=float)
    return FourMomentum(float(np.linalg.norm(pvec)), *map(float, pvec))


@dataclass(frozen=True)
class GammaRep:
    tag: str
    gamma: np.ndarray  # (4, 4, 4): gamma[mu] is the 4x4 matrix gamma^mu
    C: np.ndarray

    @property
    def beta(self) -> np.ndarray:
        return self.gamma[0]

    @property
    def alpha(self) -> np.ndarray:
        """alpha^i = gamma^0 gamma^i, shape (3, 4, 4)."""
        return np.einsum("ab,ibc->iac", self.gamma[0], self.gamma[1:])

    def lower(self) -> np.ndarray:
        """gamma_mu = g_{mu nu} gamma^nu."""
        return np.einsum("mn,nab->mab", METRIC, self.gamma)


CONVERSION = _blocks(I2, I2, I2, -I2) / np.sqrt(2.0)


@lru_cache(maxsize=None)
def gamma_rep(tag: str = "standard") -> GammaRep:
    if tag == "chiral":
        g = [_blocks(Z2, I2, I2, Z2)] + [_blocks(Z2, -SIGMA[k], SIGMA[k], Z2) for k in range(3)]
    elif tag == "standard":
        g = [_blocks(I2, Z2, Z2, -I2)] + [_blocks(Z2, SIGMA[k], -SIGMA[k], Z2) for k in range(3)]
    else:
        raise ValueError(f"unknown gamma representation {tag!r}")
    arr = np.array(g)
    arr.setflags(write=False)
    conv = CONVERSION.copy()
    conv.setflags(write=False)
    return GammaRep(tag, arr, conv)


def gamma(rep: str, mu: int) -> np.ndarray:
    if not 0 <= mu <= 3:
        raise IndexError(f"Lorentz index {mu} outside 0..3")
    return gamma_rep(rep).gamma[mu].copy()


def slash(rep: str, p) -> np.ndarray:
    """p-slash = g_{mu nu} p^mu gamma^nu for a FourMomentum or an (..., 4) array."""
    if isinstance(p, FourMomentum):
        p = p.as_array()
    p = np.asarray(p)
    lowered = p * np.array([1.0, -1.0, -1.0, -1.0])
    return np.einsum("...m,mab->...ab", lowered, gamma_rep(rep).gamma)


def projector_mass_shell(rep: str, p: FourMomentum, sign: int = 1, m: float = 1.0) -> np.ndarray:
    """(p-slash + m)/(2m) on the upper (sign=+1) or lower (sign=-1) mass hyperboloid."""
    if not p.on_mass_shell(m) or np.sign(p.p0) != sign:
        raise ValueError(f"momentum {p} is not on the {'+' if sign > 0 else '-'} mass shell m={m}")
    return (slash(rep, p) + m * np.eye(4)) / (2 * m)


def energy_projector(rep: str, pvec, sign: int = 1, m: float = 1.0) -> np.ndarray:
    """(E + p.alpha +/- beta m)/(2E); the +/- pair satisfies E+(p) + E-(-p) = 1."""
    if m <= 0:
        raise ValueError("energy projectors need m > 0")
    g = gamma_rep(rep)
    pvec = np.asarray(pvec, dtype=float)
    E = energy(pvec, m)[..., None, None]
    palpha = np.einsum("...i,iab->...ab", pvec, g.alpha)
    return (E * np.eye(4) + palpha + sign * m * g.beta) / (2 * E)


def _sigma_dot(pvec):
    return np.einsum("...i,iab->...ab", pvec, SIGMA)


def _spin_blocks(pvec, s, m):
    pvec = np.asarray(pvec, dtype=float)
    E = energy(pvec, m)
    norm = np.sqrt((E + m) / (2 * E))
    chi = CHI[s - 1]
    rotated = np.einsum("...ab,b->...a", _sigma_dot(pvec), chi) / (E + m)[..., None]
    chi = np.broadcast_to(chi, rotated.shape)
    return norm[..., None], chi, rotated


def spinor_u(rep: str, s: int, pvec, m: float = 1.0) -> np.ndarray:
    if s not in (1, 2):
        raise ValueError("spin label must be 1 or 2")
    norm, chi, rot = _spin_blocks(pvec, s, m)
    if rep == "standard":
        return norm * np.concatenate([chi, rot], axis=-1)
    if rep == "chiral":
        return norm / np.sqrt(2.0) * np.concatenate([chi + rot, chi - rot], axis=-1)
    raise ValueError(f"unknown gamma representation {rep!r}")


def spinor_v(rep: str, s: int, pvec, m: float = 1.0) -> np.ndarray:
    if s not in (1, 2):
        raise ValueError("spin label must be 1 or 2")
    norm, chi, rot = _spin_blocks(pvec, s, m)
    if rep == "standard":
        return norm * np.concatenate([rot, chi], axis=-1)
    if rep == "chiral":
        return norm / np.sqrt(2.0) * np.concatenate([chi + rot, -(chi - rot)], axis=-1)
    raise ValueError(f"unknown gamma representation {rep!r}")


def spinors(rep: str, pvec, m: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Stacked (u, v), each of shape (..., 2, 4) indexed [spin-1, component]."""
    u = np.stack([spinor_u(rep, s, pvec, m) for s in (1, 2)], axis=-2)
    v = np.stack([spinor_v(rep, s, pvec, m) for s in (1, 2)], axis=-2)
    return u, v


def dirac_adjoint(rep: str, spinor) -> np.ndarray:
    return np.conj(spinor) @ gamma_rep(rep).gamma[0]


def iso_U(pvec, rep: str = "standard", variant: str = "dirac_standard", m: float = 1.0) -> np.ndarray:
    """The 4x8 matrix sending a pair (positive, negative frequency) of C^4 values to C^4.

    Rows 1,2 are conj(u_s) acting on the first block, rows 3,4 are v_s acting on the
    second block.  The local realization carries an extra 1/(2E).
    """
    u, v = spinors(rep, pvec, m)
    shape = u.shape[:-2]
    out = np.zeros(shape + (4, 8), dtype=complex)
    out[..., 0:2, 0:4] = np.conj(u)
    out[..., 2:4, 4:8] = v
    if variant == "dirac_local":
        out = out / (2 * energy(pvec, m))[..., None, None]
    elif variant != "dirac_standard":
        raise ValueError(f"unknown Dirac realization {variant!r}")
    return out


def iso_U_inv(pvec, rep: str = "standard", variant: str = "dirac_standard", m: float = 1.0) -> np.ndarray:
    """Right inverse (8x4) of :func:`iso_U`; ``iso_U_inv @ iso_U`` is blockdiag(E+, E-^T)."""
    u, v = spinors(rep, pvec, m)
    shape = u.shape[:-2]
    out = np.zeros(shape + (8, 4), dtype=complex)
    out[..., 0:4, 0:2] = np.swapaxes(u, -1, -2)
    out[..., 4:8, 2:4] = np.swapaxes(np.conj(v), -1, -2)
    if variant == "dirac_local":
        out = out * (2 * energy(pvec, m))[..., None, None]
    elif variant != "dirac_standard":
        raise ValueError(f"unknown Dirac realization {variant!r}")
    return out
