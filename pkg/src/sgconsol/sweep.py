"""Prestress sweep: track the least-damped rate and locate the stability
threshold.

The first rate lambda_1 (the eigenvalue of smallest magnitude, of either
sign) crosses zero exactly where B4 = 1 - p0/(lambda+2mu) does, i.e. at
the critical prestress lambda + 2 mu.  The sweep records lambda_1 against
prestress; the threshold is refined by bisection on its sign and can be
cross-checked against the closed-form crossing.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import pencil
from .errors import NoSignChange, SolverError
from .material import (
    MaterialParams,
    classify_regime,
    compute_coefficients,
    derive_dimensionless,
)

#: Scan controls tuned for the first rate only: a short window on both
#: sides of zero resolves near-threshold rates cheaply.
_LAMBDA1_WINDOW = pencil.SearchWindow(lambda_min=-200.0, grid=700, floor=1e-9)


@dataclass(frozen=True)
class SweepPoint:
    p0: float
    B4: float
    lambda1: float  # NaN when the point failed
    regime: str


@dataclass(frozen=True)
class SweepResult:
    points: tuple[SweepPoint, ...]
    threshold_estimate: float  # NaN when no crossing was bracketed

    def to_csv(self) -> str:
        lines = ["p0,B4,lambda1,regime"]
        for pt in self.points:
            lines.append(f"{pt.p0:.17g},{pt.B4:.17g},{pt.lambda1:.17g},{pt.regime}")
        return "\n".join(lines) + "\n"


def _with_p0(params: MaterialParams, p0: float) -> MaterialParams:
    return replace(params, p0_ext=p0)


def first_rate(
    params: MaterialParams, window: pencil.SearchWindow | None = None
) -> float:
    """The eigenvalue of smallest magnitude (either sign) for ``params``."""
    groups = derive_dimensionless(params)
    coeffs = compute_coefficients(groups, params.p0_ratio, params.dp_over_bM)
    window = window or _LAMBDA1_WINDOW
    lams = pencil.find_eigenvalues(coeffs, 1, window)
    return float(lams[0])


def sweep(
    params_base: MaterialParams,
    p0_values,
    window: pencil.SearchWindow | None = None,
) -> SweepResult:
    """Evaluate lambda_1 over ascending prestress values.

    Points are pure and independent (safe to parallelize); they are
    evaluated in deterministic order so identical inputs always produce
    identical result bytes.  A failed point (bracketing failure) is
    recorded with ``lambda1 = NaN`` and does not abort the sweep.  The
    threshold estimate is the bisection refinement of the first sign
    change of lambda_1, NaN when the sweep does not straddle one.
    """
    p0_values = list(p0_values)
    if any(b < a for a, b in zip(p0_values, p0_values[1:])):
        raise ValueError("p0 values must be sorted ascending")
    points = []
    for p0 in p0_values:
        trial = _with_p0(params_base, p0)
        groups = derive_dimensionless(trial)
        coeffs = compute_coefficients(groups, trial.p0_ratio, trial.dp_over_bM)
        regime = classify_regime(coeffs, p_modulus=trial.p_modulus)
        try:
            lam1 = first_rate(trial, window)
        except SolverError:
            lam1 = float("nan")
        points.append(SweepPoint(p0=p0, B4=coeffs.B4, lambda1=lam1, regime=regime.tag))

    estimate = float("nan")
    for a, b in zip(points, points[1:]):
        if np.isfinite(a.lambda1) and np.isfinite(b.lambda1):
            if a.lambda1 == 0.0 or a.lambda1 * b.lambda1 < 0.0:
                try:
                    estimate = threshold(
                        params_base,
                        (a.p0, b.p0),
                        tol=1e-4 * max(abs(b.p0 - a.p0), 1e-12),
                        window=window,
                    )
                except SolverError:
                    estimate = 0.5 * (a.p0 + b.p0)
                break
    return SweepResult(points=tuple(points), threshold_estimate=estimate)


def threshold(
    params_base: MaterialParams,
    bracket: tuple[float, float],
    tol: float,
    window: pencil.SearchWindow | None = None,
) -> float:
    """Bisection refinement of the lambda_1 = 0 crossing in prestress.

    Raises
    ------
    NoSignChange
        If lambda_1 has the same sign at both bracket endpoints.
    """
    lo, hi = float(bracket[0]), float(bracket[1])
    f_lo = first_rate(_with_p0(params_base, lo), window)
    f_hi = first_rate(_with_p0(params_base, hi), window)
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if f_lo * f_hi > 0.0:
        raise NoSignChange(
            f"lambda_1 has the same sign at both ends of [{lo}, {hi}] "
            f"({f_lo:+.3e}, {f_hi:+.3e})"
        )
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        f_mid = first_rate(_with_p0(params_base, mid), window)
        if f_mid == 0.0:
            return mid
        if f_lo * f_mid < 0.0:
            hi = mid
        else:
            lo, f_lo = mid, f_mid
    return 0.5 * (lo + hi)
