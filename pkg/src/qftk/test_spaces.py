"""Momentum and space-time test functions plus the quadrature used to integrate them.

Momentum test functions live on R^3 with four components (Dirac slots or photon
polarizations).  Space-time test functions are stored only through their Fourier
transform ``phi_tilde(k) = \\int phi(x) exp(i k.x) d^4x`` (Minkowski product, no 2*pi
factors), which is all the kernel formulas ever consume.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .dirac_algebra import energy
from .errors import ClassViolation, QuadratureError

SCHWARTZ = "schwartz"
SCHWARTZ_ZERO = "schwartz_zero"
K_CHECK = 8
CERT_RADII = (1e-1, 1e-2, 1e-3, 1e-4)


# --------------------------------------------------------------------------- quadrature


@dataclass(frozen=True)
class QuadratureHints:
    """Spherical Gauss-Legendre product rule with radial map r = scale * t / (1 - t)."""

    n_r: int = 64
    n_theta: int = 32
    n_phi: int = 64
    radial_scale: float = 1.0
    rotation: float = 0.0  # azimuthal offset, used to keep two grids from sharing nodes
    tol: float = 1e-9

    def refined(self) -> "QuadratureHints":
        return replace(
            self,
            n_r=(3 * self.n_r) // 2,
            n_theta=(3 * self.n_theta) // 2,
            n_phi=(3 * self.n_phi) // 2,
        )

    def scaled(self, factor: float) -> "QuadratureHints":
        return replace(
            self,
            n_r=max(4, int(round(self.n_r * factor))),
            n_theta=max(4, int(round(self.n_theta * factor))),
            n_phi=max(4, int(round(self.n_phi * factor))),
        )


DEFAULT_HINTS = QuadratureHints()


@lru_cache(maxsize=32)
def _grid(n_r, n_theta, n_phi, radial_scale, rotation):
    t, wt = np.polynomial.legendre.leggauss(n_r)
    t = 0.5 * (t + 1.0)
    wt = 0.5 * wt
    r = radial_scale * t / (1.0 - t)
    wr = wt * radial_scale / (1.0 - t) ** 2 * r * r
    c, wc = np.polynomial.legendre.leggauss(n_theta)
    f, wf = np.polynomial.legendre.leggauss(n_phi)
    phi = np.pi * (f + 1.0) + rotation
    wf = np.pi * wf
    R, CT, PH = np.meshgrid(r, c, phi, indexing="ij")
    ST = np.sqrt(1.0 - CT * CT)
    nodes = np.stack([R * ST * np.cos(PH), R * ST * np.sin(PH), R * CT], axis=-1).reshape(-1, 3)
    weights = (wr[:, None, None] * wc[None, :, None] * wf[None, None, :]).reshape(-1)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def spherical_grid(hints: QuadratureHints = DEFAULT_HINTS) -> tuple[np.ndarray, np.ndarray]:
    return _grid(hints.n_r, hints.n_theta, hints.n_phi, float(hints.radial_scale), float(hints.rotation))


def _integrate(f, hints):
    nodes, weights = spherical_grid(hints)
    vals = np.asarray(f(nodes))
    return np.tensordot(weights, vals, axes=(0, 0))


def quadrature_3d(f: Callable[[np.ndarray], np.ndarray], hints: QuadratureHints = DEFAULT_HINTS,
                  check: bool = True):
    """Integrate ``f`` over R^3; returns (value, error estimate).

    ``f`` maps an (N, 3) node array to an (N, ...) array.  The error estimate is the
    difference to a grid refined by 3/2 in every direction.  With ``check`` the call
    raises when that estimate exceeds ``hints.tol`` relative to max(1, |value|).
    """
    value = _integrate(f, hints)
    finer = _integrate(f, hints.refined())
    err = float(np.max(np.abs(np.asarray(finer - value))))
    scale = max(1.0, float(np.max(np.abs(finer))))
    if check and err > hints.tol * scale:
        raise QuadratureError(f"quadrature did not converge: estimated error {err:.3e} > {hints.tol:.1e}")
    return finer, err


# --------------------------------------------------------------------------- Hermite functions


def hermite_1d(n: int, x: np.ndarray) -> np.ndarray:
    """L^2-normalized Hermite function h_n via the stable three-term recurrence."""
    x = np.asarray(x, dtype=float)
    h_prev = np.zeros_like(x)
    h = np.pi ** -0.25 * np.exp(-0.5 * x * x)
    for k in range(n):
        h_prev, h = h, np.sqrt(2.0 / (k + 1)) * x * h - np.sqrt(k / (k + 1)) * h_prev
    return h


def hermite_3d(n: Sequence[int], p: np.ndarray) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    return hermite_1d(n[0], p[..., 0]) * hermite_1d(n[1], p[..., 1]) * hermite_1d(n[2], p[..., 2])


def oscillator_eigenvalue(n: Sequence[int]) -> float:
    """Eigenvalue of -Laplacian + |p|^2 + 1 on the 3-d Hermite function with index n."""
    return 2.0 * sum(n) + 4.0


def bump(p: np.ndarray, sigma: float) -> np.ndarray:
    """exp(-1/(sigma^2 |p|^2)), extended by 0 at the origin."""
    r2 = np.sum(np.asarray(p, dtype=float) ** 2, axis=-1)
    with np.errstate(divide="ignore", over="ignore"):
        out = np.exp(-1.0 / (sigma * sigma * r2))
    return np.where(r2 > 0, out, 0.0)


# --------------------------------------------------------------------------- momentum test functions


@dataclass(frozen=True)
class MomentumTestFunction:
    """Four-component function on momentum space with a class tag.

    ``evaluator`` maps (N, 3) momenta to (N, 4) complex values.  ``description`` holds
    the JSON form when the function came from a Hermite expansion.
    """

    evaluator: Callable[[np.ndarray], np.ndarray] = field(compare=False)
    klass: str = SCHWARTZ
    description: object = field(default=None, compare=False)
    hints: QuadratureHints = DEFAULT_HINTS

    def __call__(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        flat = p.reshape(-1, 3)
        return np.asarray(self.evaluator(flat), dtype=complex).reshape(p.shape[:-1] + (4,))

    def component(self, idx: int) -> Callable[[np.ndarray], np.ndarray]:
        return lambda p: self(p)[..., idx]

    def __add__(self, other: "MomentumTestFunction") -> "MomentumTestFunction":
        klass = SCHWARTZ_ZERO if (self.klass == other.klass == SCHWARTZ_ZERO) else SCHWARTZ
        desc = None
        if self.description is not None and other.description is not None:
            desc = _as_list(self.description) + _as_list(other.description)
        return MomentumTestFunction(lambda p: self(p) + other(p), klass, desc, self.hints)

    def scaled(self, c: complex) -> "MomentumTestFunction":
        desc = None
        if self.description is not None:
            desc = [_scale_desc(d, c) for d in _as_list(self.description)]
        return MomentumTestFunction(lambda p: c * self(p), self.klass, desc, self.hints)

    def conj(self) -> "MomentumTestFunction":
        return MomentumTestFunction(lambda p: np.conj(self(p)), self.klass, None, self.hints)

    def with_hints(self, hints: QuadratureHints) -> "MomentumTestFunction":
        return replace(self, hints=hints)

    def divided_by_norm(self) -> "MomentumTestFunction":
        """xi(p)/|p|; stays in the vanishing-at-zero class when xi does."""

        def ev(p):
            r = np.linalg.norm(p, axis=-1)
            with np.errstate(divide="ignore", invalid="ignore"):
                out = self(p) / r[:, None]
            return np.where(r[:, None] > 0, out, 0.0)

        return MomentumTestFunction(ev, self.klass, None, self.hints)

    def to_json(self):
        if self.description is None:
            raise ValueError("only Hermite-expanded test functions are serializable")
        return self.description


def _as_list(desc):
    return list(desc) if isinstance(desc, list) else [desc]


def _scale_desc(d, c):
    d = dict(d)
    d["hermite"] = [
        list(t[:3]) + [float((complex(t[3], t[4]) * c).real), float((complex(t[3], t[4]) * c).imag)]
        for t in d["hermite"]
    ]
    return d


def _single_from_desc(d: dict) -> Callable[[np.ndarray], np.ndarray]:
    comp = int(d.get("component", 0))
    if not 0 <= comp <= 3:
        raise ValueError(f"component {comp} outside 0..3")
    terms = [(tuple(int(v) for v in t[:3]), complex(t[3], t[4] if len(t) > 4 else 0.0)) for t in d["hermite"]]
    for n, _ in terms:
        if min(n) < 0:
            raise ValueError("Hermite indices must be non-negative")
    center = np.asarray(d.get("center", [0.0, 0.0, 0.0]), dtype=float)
    scale = float(d.get("scale", 1.0))
    sigma = d.get("sigma")
    if scale <= 0:
        raise ValueError("scale must be positive")
    if sigma is not None and sigma <= 0:
        raise ValueError("sigma must be positive")

    def ev(p):
        q = (p - center) / scale
        val = np.zeros(p.shape[0], dtype=complex)
        for n, c in terms:
            val = val + c * hermite_3d(n, q)
        val = val / scale**1.5
        if sigma is not None:
            val = val * bump(p, sigma)
        out = np.zeros((p.shape[0], 4), dtype=complex)
        out[:, comp] = val
        return out

    return ev


def from_json(desc, hints: QuadratureHints = DEFAULT_HINTS, certify: bool = True) -> MomentumTestFunction:
    """Build a test function from ``{class, hermite, sigma, component[, center, scale]}`` (or a list).

    Hermite entries are ``[n1, n2, n3, coeff_re, coeff_im]``.  The function is
    ``sum coeff * h_n((p - center)/scale) / scale^1.5`` times the optional bump.
    """
    items = _as_list(desc)
    if not items:
        raise ValueError("empty test-function description")
    evs = []
    klasses = set()
    for d in items:
        if not isinstance(d, dict) or "hermite" not in d:
            raise ValueError("test-function description needs a 'hermite' list")
        klass = d.get("class", SCHWARTZ)
        if klass not in (SCHWARTZ, SCHWARTZ_ZERO):
            raise ValueError(f"unknown test-function class {klass!r}")
        if klass == SCHWARTZ_ZERO and d.get("sigma") is None:
            raise ClassViolation("class schwartz_zero requires a bump width 'sigma'")
        klasses.add(klass)
        evs.append(_single_from_desc(d))
    klass = SCHWARTZ_ZERO if klasses == {SCHWARTZ_ZERO} else SCHWARTZ

    def ev(p):
        return sum(e(p) for e in evs)

    f = MomentumTestFunction(ev, klass, items if len(items) > 1 else items[0], hints)
    if certify and klass == SCHWARTZ_ZERO:
        vanishing_certificate(f)
    return f


def hermite_mode(n1: int, n2: int, n3: int, component: int, hints: QuadratureHints = DEFAULT_HINTS,
                 scale: float = 1.0) -> MomentumTestFunction:
    return from_json({"class": SCHWARTZ, "hermite": [[n1, n2, n3, 1.0, 0.0]], "component": component,
                      "scale": scale}, hints)


def vanishing_certificate(f: MomentumTestFunction, k_check: int = K_CHECK, radii=CERT_RADII):
    """Check that |f| drops faster than |p|^k_check between consecutive sample radii.

    Raises ClassViolation naming the first failing sample point; returns the sampled
    maxima on success.
    """
    dirs = np.array(
        [[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]]
        + [[a, b, c] for a in (1, -1) for b in (1, -1) for c in (1, -1)],
        dtype=float,
    )
    dirs /= np.linalg.norm(dirs, axis=1)[:, None]
    maxima = []
    for r in radii:
        vals = np.abs(f(r * dirs))
        if not np.all(np.isfinite(vals)):
            raise ClassViolation(f"non-finite value near the origin at |p|={r:g}")
        idx = np.unravel_index(np.argmax(vals), vals.shape)
        maxima.append((r, float(vals[idx]), r * dirs[idx[0]]))
    for (r0, m0, _), (r1, m1, p1) in zip(maxima, maxima[1:]):
        if m1 == 0.0:
            continue
        if m0 == 0.0 or m1 > m0 * (r1 / r0) ** k_check:
            raise ClassViolation(
                f"vanishing certificate failed at p={np.array2string(p1, precision=6)}: "
                f"|f|={m1:.3e} does not decay like |p|^{k_check} from |p|={r0:g}"
            )
    return [(r, m) for r, m, _ in maxima]


def passes_certificate(f: MomentumTestFunction) -> bool:
    try:
        vanishing_certificate(f)
    except ClassViolation:
        return False
    return True


def make_schwartz_zero(hermite_part: MomentumTestFunction, sigma: float) -> MomentumTestFunction:
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    desc = None
    if hermite_part.description is not None:
        desc = [dict(d, sigma=sigma, **{"class": SCHWARTZ_ZERO}) for d in _as_list(hermite_part.description)]
        desc = desc if len(desc) > 1 else desc[0]
    f = MomentumTestFunction(lambda p: hermite_part(p) * bump(p, sigma)[:, None], SCHWARTZ_ZERO, desc,
                             hermite_part.hints)
    vanishing_certificate(f)
    return f


def inner_product(xi: MomentumTestFunction, zeta: MomentumTestFunction, weight: str = "flat",
                  m: float = 1.0, hints: QuadratureHints | None = None, with_error: bool = False):
    """Sum over components of conj(xi) zeta, integrated with the flat or (2E)^-2 weight."""
    hints = hints or xi.hints
    if weight == "flat":
        w = lambda p: np.ones(p.shape[0])
    elif weight == "inverse_2E_squared":
        w = lambda p: 1.0 / (2.0 * energy(p, m)) ** 2
    else:
        raise ValueError(f"unknown weight {weight!r}")
    val, err = quadrature_3d(lambda p: np.sum(np.conj(xi(p)) * zeta(p), axis=1) * w(p), hints)
    val = complex(val)
    return (val, err) if with_error else val


# --------------------------------------------------------------------------- space-time test functions


@dataclass(frozen=True)
class SpacetimeTestFunction:
    """phi_tilde^a(k) = amplitudes[a] * profile(k) for a scalar momentum-space profile.

    The built-in profile is exp(-|k - center|_E^2 / (2 width^2)) times an optional
    polynomial in the Euclidean norm and an optional bump exp(-1/(sigma^2 |k|_E^2)).
    """

    profile: Callable[[np.ndarray], np.ndarray] = field(compare=False)
    klass: str = "S"
    amplitudes: tuple = (1.0, 1.0, 1.0, 1.0)
    description: object = field(default=None, compare=False)

    def scalar(self, k) -> np.ndarray:
        k = np.asarray(k, dtype=float)
        return np.asarray(self.profile(k), dtype=complex)

    def __call__(self, k) -> np.ndarray:
        return self.scalar(k)[..., None] * np.asarray(self.amplitudes, dtype=complex)

    def scaled(self, c: complex) -> "SpacetimeTestFunction":
        return replace(self, amplitudes=tuple(c * np.asarray(self.amplitudes, dtype=complex)), description=None)

    def __add__(self, other: "SpacetimeTestFunction") -> "SpacetimeTestFunction":
        if tuple(self.amplitudes) != tuple(other.amplitudes):
            raise ValueError("sums are supported only for equal amplitude vectors")
        klass = "S00" if self.klass == other.klass == "S00" else "S"
        return SpacetimeTestFunction(lambda k: self.profile(k) + other.profile(k), klass, self.amplitudes)

    def position_space(self, x) -> np.ndarray:
        """Closed-form inverse transform, available for pure shifted Gaussians only."""
        d = self.description
        if not d or d.get("sigma") is not None or d.get("poly"):
            raise ValueError("position-space form is only available for plain Gaussians")
        w = d["width"]
        c = np.asarray(d.get("center", [0.0] * 4), dtype=float)
        x = np.asarray(x, dtype=float)
        xe2 = np.sum(x * x, axis=-1)
        cx = c[0] * x[..., 0] - np.sum(c[1:] * x[..., 1:], axis=-1)
        val = (2 * np.pi) ** -4 * (2 * np.pi * w * w) ** 2 * np.exp(-0.5 * w * w * xe2) * np.exp(-1j * cx)
        return val[..., None] * np.asarray(self.amplitudes, dtype=complex)


def gaussian_spacetime(width: float = 1.0, center=(0.0, 0.0, 0.0, 0.0), sigma: float | None = None,
                       poly: Sequence[float] = (), amplitudes=(1.0, 1.0, 1.0, 1.0)) -> SpacetimeTestFunction:
    """Gaussian (times polynomial in |k|_E^2, times optional bump) in the 4-momentum."""
    center = np.asarray(center, dtype=float)
    poly = tuple(float(c) for c in poly)
    if sigma is not None and sigma <= 0:
        raise ValueError("sigma must be positive")

    def profile(k):
        k = np.asarray(k, dtype=float)
        q2 = np.sum((k - center) ** 2, axis=-1)
        val = np.exp(-0.5 * q2 / (width * width))
        if poly:
            k2 = np.sum(k * k, axis=-1)
            val = val * sum(c * k2**j for j, c in enumerate(poly))
        if sigma is not None:
            val = val * bump(k, sigma)
        return val

    desc = {"width": width, "center": center.tolist(), "sigma": sigma, "poly": list(poly)}
    return SpacetimeTestFunction(profile, "S00" if sigma is not None else "S", tuple(amplitudes), desc)


def spacetime_from_json(desc: dict) -> SpacetimeTestFunction:
    """Build a Gaussian space-time smearing from ``{width, center, sigma, poly, amplitudes[, class]}``.

    A bump width ``sigma`` puts the function in class S00; asking for S00 without one
    is a class violation.
    """
    if not isinstance(desc, dict):
        raise ValueError("space-time smearing description must be an object")
    known = {"class", "width", "center", "sigma", "poly", "amplitudes"}
    unknown = set(desc) - known
    if unknown:
        raise ValueError(f"unknown space-time smearing keys: {sorted(unknown)}")
    klass = desc.get("class")
    sigma = desc.get("sigma")
    if klass not in (None, "S", "S00"):
        raise ValueError(f"unknown space-time class {klass!r}")
    if klass == "S00" and sigma is None:
        raise ClassViolation("class S00 requires a bump width 'sigma' (zero-mass test space)")
    if klass == "S" and sigma is not None:
        raise ValueError("class S smearings take no bump width")
    width = float(desc.get("width", 1.0))
    if width <= 0:
        raise ValueError("width must be positive")
    center = desc.get("center", [0.0, 0.0, 0.0, 0.0])
    amplitudes = desc.get("amplitudes", [1.0, 1.0, 1.0, 1.0])
    if len(center) != 4 or len(amplitudes) != 4:
        raise ValueError("center and amplitudes need four entries")
    amps = tuple(complex(a[0], a[1]) if isinstance(a, (list, tuple)) else complex(a) for a in amplitudes)
    return gaussian_spacetime(width, center, sigma, desc.get("poly", ()), amps)


def fourier_restrict(phi: SpacetimeTestFunction, shell, hints: QuadratureHints = DEFAULT_HINTS
                     ) -> MomentumTestFunction:
    """p -> phi_tilde(sign * E(p), p) on a mass shell, or phi_tilde(|p|, p) on the light cone.

    ``shell`` is ``("mass", m, sign)`` or ``"light_cone"``.  Restricting a class-S
    function to the light cone is refused: the result would not be a valid test
    function for a massless field.
    """
    if shell == "light_cone" or (isinstance(shell, tuple) and shell[0] == "light_cone"):
        if phi.klass != "S00":
            raise ClassViolation(
                "light-cone restriction needs a space-time test function whose Fourier transform "
                "vanishes to all orders at k=0; massless fields cannot be smeared with ordinary "
                "Schwartz functions"
            )

        def ev(p):
            k = np.concatenate([np.linalg.norm(p, axis=-1)[:, None], p], axis=1)
            return phi(k)

        f = MomentumTestFunction(ev, SCHWARTZ_ZERO, None, hints)
        vanishing_certificate(f)
        return f
    kind, m, sign = shell
    if kind != "mass" or m <= 0:
        raise ValueError(f"unsupported shell {shell!r}")

    def ev(p):
        k = np.concatenate([(sign * energy(p, m))[:, None], p], axis=1)
        return phi(k)

    return MomentumTestFunction(ev, SCHWARTZ, None, replace(hints, radial_scale=m))
