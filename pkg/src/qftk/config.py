"""Run configuration shared by the library entry points and the command line."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields, is_dataclass, replace

from .test_spaces import QuadratureHints


@dataclass(frozen=True)
class FockConfig:
    k1: int = 2  # Hermite modes per Dirac slot
    k2: int = 2  # modes per photon polarization
    n_max: int = 2
    photon_sigma: float = 1.0
    quadrature: QuadratureHints = QuadratureHints()

    def __post_init__(self):
        if self.k1 < 0 or self.k2 < 0 or self.n_max < 0:
            raise ValueError("mode counts and n_max must be non-negative")


@dataclass(frozen=True)
class ChronoConfig:
    eps_theta: tuple = (0.2, 0.1, 0.05, 0.025)
    eps_mass: tuple = (0.2, 0.1, 0.05, 0.025)
    tau: float = 1.0

    def __post_init__(self):
        for name in ("eps_theta", "eps_mass"):
            sched = tuple(getattr(self, name))
            if not sched or any(v <= 0 for v in sched) or any(b >= a for a, b in zip(sched, sched[1:])):
                raise ValueError(f"{name} schedule must be strictly decreasing and positive")
        if len(self.eps_theta) != len(self.eps_mass):
            raise ValueError("eps_theta and eps_mass schedules must have equal length")


@dataclass(frozen=True)
class PairQuadrature:
    """Orders of the two spherical grids used for six-dimensional pair integrals."""

    n_r: int = 16
    n_theta: int = 8
    n_phi: int = 12


@dataclass(frozen=True)
class RunConfig:
    m: float = 1.0
    e: float = 0.302822  # sqrt(4 pi / 137)
    dirac: str = "dirac_standard"
    photon: str = "photon_identityB"
    rep: str = "standard"
    quadrature: QuadratureHints = QuadratureHints()
    pair_quadrature: PairQuadrature = PairQuadrature()
    fock: FockConfig = FockConfig()
    chrono: ChronoConfig = ChronoConfig()
    seed: int = 0

    def __post_init__(self):
        if self.m <= 0:
            raise ValueError("m must be positive")
        if self.dirac not in ("dirac_standard", "dirac_local"):
            raise ValueError(f"unknown Dirac variant {self.dirac!r}")
        if self.photon not in ("photon_identityB", "photon_sqrtB"):
            raise ValueError(f"unknown photon variant {self.photon!r}")

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


def _build(cls, data):
    if not isinstance(data, dict):
        raise ValueError(f"expected an object for {cls.__name__}")
    known = {f.name: f for f in fields(cls)}
    unknown = set(data) - set(known)
    if unknown:
        raise ValueError(f"unknown {cls.__name__} keys: {sorted(unknown)}")
    kwargs = {}
    for name, value in data.items():
        default = getattr(cls(), name) if name in known else None
        if is_dataclass(default):
            kwargs[name] = _build(type(default), value)
        elif isinstance(default, tuple):
            kwargs[name] = tuple(value)
        else:
            kwargs[name] = value
    return cls(**kwargs)


def load_config(data: dict | str | None) -> RunConfig:
    if data is None:
        return RunConfig()
    if isinstance(data, str):
        data = json.loads(data)
    return _build(RunConfig, data)


def override(cfg: RunConfig, **kwargs) -> RunConfig:
    return replace(cfg, **{k: v for k, v in kwargs.items() if v is not None})
