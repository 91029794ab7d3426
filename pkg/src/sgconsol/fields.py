"""Assembly of the full consolidation solution.

The solved variable is the scalar potential V(x, t) = Vbar + W(x, t): a
constant stationary part carrying the load and a Fourier series of pencil
eigenfunctions relaxing the constant initial deviation.  Strain and the
apparent fluid density are linear reconstructions

    eps = k2 k3 k5 V'' + b k5 V
    m_f = C6 V - d5 V'' + B6

so every profile, residual, and comparison reduces to series evaluation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import expansion, pencil
from .errors import (
    CriticalPrestress,
    SpectrumExhausted,
    StabilityError,
    UndeterminedConstant,
)
from .material import (
    CRITICAL_TOL,
    DimensionlessGroups,
    MaterialParams,
    PencilCoefficients,
    Regime,
    classify_regime,
    compute_coefficients,
    derive_dimensionless,
)

#: Default truncation target: relative reconstruction error of the initial
#: deviation in the resolved norm.
DEFAULT_TRUNC_TARGET = 1e-2
#: Hard cap on the number of modes.
MODE_CAP = 60
#: Initial-datum recovery demanded of the default truncation, as a
#: fraction of |B6|.
DATUM_RECOVERY_FRACTION = 1e-2


@dataclass(frozen=True)
class ProfileTable:
    """Sampled (x, t) -> (V, eps, mf) rows, t-major ordering.

    Rows must be finite with depths in [0, 1] and nonnegative times.
    """

    x: np.ndarray
    t: np.ndarray
    V: np.ndarray
    eps: np.ndarray
    mf: np.ndarray

    def __post_init__(self) -> None:
        n = len(self.x)
        for name in ("t", "V", "eps", "mf"):
            if len(getattr(self, name)) != n:
                raise ValueError(f"column {name} has mismatched length")
        if n and (self.x.min() < 0.0 or self.x.max() > 1.0):
            raise ValueError("depths must lie in [0, 1]")
        if n and self.t.min() < 0.0:
            raise ValueError("times must be nonnegative")
        for name in ("V", "eps", "mf"):
            if not np.isfinite(getattr(self, name)).all():
                raise ValueError(f"column {name} contains nonfinite values")

    def __len__(self) -> int:
        return len(self.x)

    def to_csv(self) -> str:
        lines = ["x,t,V,eps,mf"]
        for i in range(len(self.x)):
            lines.append(
                f"{self.x[i]:.17g},{self.t[i]:.17g},{self.V[i]:.17g},"
                f"{self.eps[i]:.17g},{self.mf[i]:.17g}"
            )
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class SolutionField:
    """Assembled solution with point evaluators.

    Immutable after construction; evaluations are pure and accept scalar
    or array positions.
    """

    groups: DimensionlessGroups
    coeffs: PencilCoefficients
    regime: Regime
    weights: expansion.BilinearWeights
    spectrum: tuple[pencil.Eigenpair, ...]
    fourier: np.ndarray
    V_bar: float
    V_in: float
    W_in: float
    modes_used: int
    datum_sup: float

    def deviation(self, x, t: float, order: int = 0, time_derivative: bool = False):
        """W(x, t) or a space/time derivative of it."""
        xarr = np.asarray(x, dtype=float)
        acc = np.zeros(xarr.shape)
        for k in range(self.modes_used):
            pair = self.spectrum[k]
            rate = pair.lambda_k * t
            if rate > 700.0:  # exp overflow: only reachable past threshold
                raise StabilityError(
                    f"series has blown up at t={t!r} (rate {pair.lambda_k!r})"
                )
            amp = self.fourier[k] * math.exp(rate)
            if time_derivative:
                amp *= pair.lambda_k
            if amp != 0.0:
                acc = acc + amp * pencil.eval_eigenfunction(pair, xarr, order)
        return float(acc) if np.isscalar(x) else acc

    def V(self, x, t: float, order: int = 0, time_derivative: bool = False):
        base = self.V_bar if (order == 0 and not time_derivative) else 0.0
        return base + self.deviation(x, t, order, time_derivative)

    def strain(self, x, t: float, time_derivative: bool = False):
        k = self.groups
        b = math.sqrt(k.k6 / k.k5)
        return k.k2 * k.k3 * k.k5 * self.V(x, t, 2, time_derivative) + b * k.k5 * self.V(
            x, t, 0, time_derivative
        )

    def mf(self, x, t: float, time_derivative: bool = False):
        c = self.coeffs
        base = 0.0 if time_derivative else c.B6
        return (
            c.C6 * self.V(x, t, 0, time_derivative)
            - c.d5 * self.V(x, t, 2, time_derivative)
            + base
        )

    def profile(self, xs: Sequence[float], ts: Sequence[float]) -> ProfileTable:
        """Sample the three fields on the tensor grid, t-major."""
        xs = np.asarray(xs, dtype=float)
        cols_x, cols_t, cols_v, cols_e, cols_m = [], [], [], [], []
        for t in ts:
            cols_x.append(xs)
            cols_t.append(np.full(xs.shape, float(t)))
            cols_v.append(np.atleast_1d(self.V(xs, float(t))))
            cols_e.append(np.atleast_1d(self.strain(xs, float(t))))
            cols_m.append(np.atleast_1d(self.mf(xs, float(t))))
        return ProfileTable(
            x=np.concatenate(cols_x),
            t=np.concatenate(cols_t),
            V=np.concatenate(cols_v),
            eps=np.concatenate(cols_e),
            mf=np.concatenate(cols_m),
        )


def stationary_solution(coeffs: PencilCoefficients) -> float:
    """The constant stationary value Vbar = -B6/B4.

    Raises
    ------
    CriticalPrestress
        B4 = 0 with a nonzero load: no stationary solution exists.
    UndeterminedConstant
        B4 = B6 = 0: any constant solves the stationary problem.
    """
    if abs(coeffs.B4) <= CRITICAL_TOL:
        if coeffs.B6 != 0.0:
            raise CriticalPrestress(
                "prestress at the stability threshold admits no stationary "
                "solution under a nonzero load increment"
            )
        raise UndeterminedConstant(
            "threshold prestress with zero load: the stationary solution "
            "is an undetermined constant"
        )
    return -coeffs.B6 / coeffs.B4


def initial_value(coeffs: PencilCoefficients) -> float:
    """The constant initial potential V_in = -B6/C6 (zero initial density)."""
    if coeffs.C6 == 0.0:
        raise CriticalPrestress("C6 = 0: the initial datum is not defined")
    return -coeffs.B6 / coeffs.C6


def _build_spectrum(
    coeffs: PencilCoefficients,
    count: int,
    search: pencil.SearchWindow | None,
    weights_mode: str,
) -> tuple[tuple[pencil.Eigenpair, ...], expansion.BilinearWeights]:
    lams = pencil.find_eigenvalues(coeffs, count, search)
    pairs = [pencil.eigenfunction(lam, coeffs) for lam in lams]
    if weights_mode == "resolved":
        w = expansion.resolve_weights(coeffs, pairs[: max(4, min(8, len(pairs)))])
    elif weights_mode == "paper-literal":
        w = expansion.BilinearWeights.paper_literal(coeffs)
    else:
        raise ValueError(f"unknown weights mode {weights_mode!r}")
    return expansion.attach_norms(pairs, w), w


def solve(
    params: MaterialParams,
    modes: int | None = None,
    trunc_target: float | None = None,
    weights_mode: str = "resolved",
    allow_unstable: bool = False,
    search: pencil.SearchWindow | None = None,
) -> SolutionField:
    """Solve the consolidation problem for the given material and load.

    Either ``modes`` fixes the series length directly or ``trunc_target``
    sets the relative reconstruction error of the initial deviation.
    Under the default target (1e-2) modes are further added until the
    reconstructed initial density is below ``DATUM_RECOVERY_FRACTION`` of
    |B6| in sup norm, capped at ``MODE_CAP``; an explicit ``trunc_target``
    is honored literally.

    Raises
    ------
    CriticalPrestress / UndeterminedConstant
        At threshold prestress (see :func:`solve_critical`).
    StabilityError
        For supercritical prestress unless ``allow_unstable`` is set, in
        which case the finite-time series is evaluated as is.
    """
    groups = derive_dimensionless(params)
    coeffs = compute_coefficients(groups, params.p0_ratio, params.dp_over_bM)
    regime = classify_regime(coeffs, p_modulus=params.p_modulus)
    if regime.tag == "critical":
        # force the dedicated diagnosis path
        stationary_solution(coeffs)
    if regime.tag == "unstable" and not allow_unstable:
        raise StabilityError(
            "prestress exceeds the stability threshold; the series blows up "
            "(pass allow_unstable=True to evaluate the finite-time solution)"
        )

    v_bar = -coeffs.B6 / coeffs.B4
    v_in = initial_value(coeffs)
    w_in = v_in - v_bar

    if modes is not None:
        spectrum, w = _build_spectrum(coeffs, max(modes, 4), search, weights_mode)
        p = expansion.fourier_coefficients(spectrum, w_in, w)
        n_used = min(modes, len(spectrum))
    else:
        refine_datum = trunc_target is None
        target = trunc_target if trunc_target is not None else DEFAULT_TRUNC_TARGET
        datum_gate = DATUM_RECOVERY_FRACTION * abs(coeffs.B6)
        count = 16
        while True:
            spectrum, w = _build_spectrum(coeffs, count, search, weights_mode)
            p = expansion.fourier_coefficients(spectrum, w_in, w)
            if w_in == 0.0:
                n_used = 0
                break
            try:
                n_used = expansion.truncation_order(spectrum, p, w_in, target, w)
            except SpectrumExhausted:
                if count >= MODE_CAP:
                    n_used = len(spectrum)
                    break
                count = min(MODE_CAP, count + 16)
                continue
            if not refine_datum:
                break
            n_used = _refine_for_datum(
                coeffs, spectrum, p, v_bar, n_used, len(spectrum)
            )
            datum_ok = (
                coeffs.B6 == 0.0
                or _datum_sup(coeffs, spectrum, p, v_bar, n_used) <= datum_gate
            )
            if datum_ok or count >= MODE_CAP:
                break
            count = min(MODE_CAP, count + 16)

    return SolutionField(
        groups=groups,
        coeffs=coeffs,
        regime=regime,
        weights=w,
        spectrum=spectrum,
        fourier=p,
        V_bar=v_bar,
        V_in=v_in,
        W_in=w_in,
        modes_used=n_used,
        datum_sup=_datum_sup(coeffs, spectrum, p, v_bar, n_used),
    )


_DATUM_GRID = np.linspace(0.0, 1.0, 201)


def _datum_sup(coeffs, spectrum, p, v_bar, n) -> float:
    """Sup of |m_f(x, 0)| for the n-mode series."""
    v = np.full(_DATUM_GRID.shape, v_bar)
    v2 = np.zeros(_DATUM_GRID.shape)
    for k in range(n):
        v = v + p[k] * pencil.eval_eigenfunction(spectrum[k], _DATUM_GRID, 0)
        v2 = v2 + p[k] * pencil.eval_eigenfunction(spectrum[k], _DATUM_GRID, 2)
    mf0 = coeffs.C6 * v - coeffs.d5 * v2 + coeffs.B6
    return float(np.abs(mf0).max())


def _refine_for_datum(coeffs, spectrum, p, v_bar, n_start, n_max) -> int:
    """Grow the mode count until the initial density is recovered."""
    if coeffs.B6 == 0.0:
        return n_start
    gate = DATUM_RECOVERY_FRACTION * abs(coeffs.B6)
    n = n_start
    while n < n_max and _datum_sup(coeffs, spectrum, p, v_bar, n) > gate:
        n += 1
    return n


def reconstruct_strain(field: SolutionField, x, t: float):
    """eps(x, t) = k2 k3 k5 V'' + b k5 V."""
    return field.strain(x, t)


def reconstruct_mf(field: SolutionField, x, t: float):
    """m_f(x, t) = C6 V - d5 V'' + B6 (dimensionless incremental density)."""
    return field.mf(x, t)


def boundary_residuals(field: SolutionField, t: float) -> dict[str, float]:
    """Normalized residuals of the four physical boundary-condition
    families evaluated on the reconstructed fields at time ``t``.

    The double-force conditions are evaluated in the cleared form
    ``k2 k3 k5 m_f' + d5 eps'`` so a vanishing cocapillarity coefficient
    needs no special casing.  Each residual is normalized by the sum of
    its term magnitudes (floored at |B6| to keep the zero-load case
    exact).
    """
    k = field.groups
    c = field.coeffs
    b = math.sqrt(k.k6 / k.k5)
    floor = abs(c.B6)

    def norm(parts: list[float]) -> float:
        scale = max(sum(abs(q) for q in parts), floor, 1e-300)
        return abs(sum(parts)) / scale

    def eps(x, order=0, td=False):
        return k.k2 * k.k3 * k.k5 * field.V(x, t, order + 2, td) + b * k.k5 * field.V(
            x, t, order, td
        )

    def mf(x, order=0, td=False):
        base = c.B6 if (order == 0 and not td) else 0.0
        return c.C6 * field.V(x, t, order, td) - c.d5 * field.V(x, t, order + 2, td) + base

    out = {
        "fluid_traction_x0": norm(
            [
                mf(0.0),
                -b * eps(0.0),
                -k.k2 * k.k3 * eps(0.0, 2),
                -k.k3 * mf(0.0, 2),
                k.k4 * mf(0.0, td=True),
            ]
        ),
        "impermeability_x1": norm(
            [
                -mf(1.0, 1),
                b * eps(1.0, 1),
                k.k2 * k.k3 * eps(1.0, 3),
                k.k3 * mf(1.0, 3),
                -k.k4 * mf(1.0, 1, td=True),
            ]
        ),
    }
    for label, x0 in (("double_force_x0", 0.0), ("double_force_x1", 1.0)):
        out[label] = norm([k.k2 * k.k3 * k.k5 * mf(x0, 1), c.d5 * eps(x0, 1)])
    for label, x0 in (("fluid_double_force_x0", 0.0), ("fluid_double_force_x1", 1.0)):
        out[label] = norm([mf(x0, 1), k.k2 * eps(x0, 1)])
    return out


@dataclass(frozen=True)
class CriticalReport:
    """Outcome of the threshold-prestress analysis."""

    case: str  # "no_solution_under_load" | "constant_family"
    message: str
    fourier_max: float = 0.0
    fourier: np.ndarray | None = None


def solve_critical(
    params: MaterialParams,
    datum: Callable[[np.ndarray, int], np.ndarray] | None = None,
    modes: int = 8,
    search: pencil.SearchWindow | None = None,
) -> CriticalReport:
    """Handle the threshold case B4 = 0.

    Under a nonzero load there is no solution; under zero load the inner
    product drops its zeroth weight (alpha0 = C4 C6 vanishes identically)
    and every nonzero-mode projection of the constant datum is zero, so
    the solution is an undetermined constant.  A nonconstant synthetic
    ``datum(x, order)`` (must supply derivatives up to order 3) yields
    generally nonzero coefficients and a solution known up to a constant.
    """
    groups = derive_dimensionless(params)
    coeffs = compute_coefficients(groups, params.p0_ratio, params.dp_over_bM)
    if abs(coeffs.B4) > CRITICAL_TOL:
        raise ValueError("solve_critical requires threshold prestress (B4 = 0)")
    if coeffs.B6 != 0.0:
        return CriticalReport(
            case="no_solution_under_load",
            message=(
                "critical prestress: no solution exists under a nonzero load "
                "increment; only the unloaded configuration is solvable"
            ),
        )

    lams = pencil.find_eigenvalues(coeffs, modes, search)
    pairs = [pencil.eigenfunction(lam, coeffs) for lam in lams if lam != 0.0]
    # quotient-space form: the zeroth weight is identically zero at B4 = 0
    w = expansion.BilinearWeights.from_coefficients(coeffs)
    w = expansion.BilinearWeights(0.0, w.alpha1, w.alpha2, w.alpha3)

    if datum is None:
        # constant datum: only the masked alpha0 slot could see it
        p = np.zeros(len(pairs))
    else:
        x, wts = np.polynomial.legendre.leggauss(64)
        x = 0.5 * (x + 1.0)
        wts = 0.5 * wts
        p = np.empty(len(pairs))
        for i, pair in enumerate(pairs):
            num = 0.0
            den = 0.0
            for m, alpha in enumerate(w.as_array()):
                if alpha == 0.0:
                    continue
                xm = pencil.eval_eigenfunction(pair, x, m)
                num += alpha * float(np.sum(wts * np.asarray(datum(x, m)) * xm))
                den += alpha * float(np.sum(wts * xm * xm))
            p[i] = num / den
    fmax = float(np.abs(p).max()) if len(p) else 0.0
    return CriticalReport(
        case="constant_family",
        message=(
            "critical prestress, zero load: solution is an undetermined "
            "constant; nonzero-mode coefficients "
            + ("all vanish" if datum is None else "determined up to a constant")
        ),
        fourier_max=fmax,
        fourier=p,
    )
