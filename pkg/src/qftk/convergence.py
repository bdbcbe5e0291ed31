"""Observed-order estimates and Richardson extrapolation for epsilon schedules."""

from __future__ import annotations

import math
import warnings

import numpy as np


class ConvergenceError(RuntimeError):
    pass


def observed_order(eps, values) -> float:
    """Order p from the last three points, assuming error ~ C eps^p and a constant ratio."""
    if len(values) < 3:
        return float("nan")
    e1, e2, e3 = eps[-3:]
    v1, v2, v3 = values[-3:]
    d1, d2 = abs(v1 - v2), abs(v2 - v3)
    if d2 == 0.0:
        return float("inf")
    ratio = e1 / e2
    if not math.isclose(ratio, e2 / e3, rel_tol=1e-9):
        raise ValueError("observed order needs a geometric schedule")
    return math.log(d1 / d2) / math.log(ratio)


def neville_even(eps, values) -> complex:
    """Polynomial extrapolation in eps^2 through all points (exact for even expansions)."""
    x = np.asarray(eps, dtype=float) ** 2
    y = [complex(v) for v in values]
    n = len(y)
    if n == 1:
        warnings.warn("single-point schedule: no extrapolation performed", RuntimeWarning, stacklevel=2)
        return y[0]
    p = list(y)
    for level in range(1, n):
        for i in range(n - level):
            p[i] = (x[i + level] * p[i] - x[i] * p[i + 1]) / (x[i + level] - x[i])
    return p[0]


def convergence_table(eps_theta, eps_mass, values) -> dict:
    """Assemble the study: rows, observed order, extrapolated limit, monotonicity flag."""
    eps_theta = list(eps_theta)
    values = [complex(v) for v in values]
    rows = [{"eps_theta": a, "eps_mass": b, "value": v} for a, b, v in zip(eps_theta, eps_mass, values)]
    out = {"rows": rows, "observed_order": float("nan"), "extrapolated": values[-1], "warning": None}
    if len(values) == 1:
        out["warning"] = "single-point schedule: no extrapolation"
        return out
    diffs = [abs(b - a) for a, b in zip(values, values[1:])]
    out["monotone"] = all(d2 <= d1 for d1, d2 in zip(diffs, diffs[1:]))
    if len(values) >= 3:
        out["observed_order"] = observed_order(eps_theta, values)
        if not out["monotone"] or out["observed_order"] < 0.5:
            raise ConvergenceError(
                f"schedule does not converge: successive differences {['%.3e' % d for d in diffs]}"
            )
    out["extrapolated"] = neville_even(eps_theta, values)
    return out
