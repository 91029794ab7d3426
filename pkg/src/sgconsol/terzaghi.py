"""Classical Terzaghi consolidation baseline and comparison metrics.

Dropping the second-gradient moduli and the prestress reduces the system
to the heat equation ``mdot = a m''`` for the dimensionless density, with
``a = (lambda+2mu)/(lambda+2mu+b^2 M) = 1/(1+k6)``, a fixed density
``m = c`` at the drained surface and an impermeable wall ``m'(1) = 0``.
The incompatible corner (zero initial datum against a nonzero surface
value) makes this the classical discontinuous benchmark that the
second-gradient model regularizes.

The series solution here is the standard mixed Dirichlet/Neumann sine
expansion, cross-validated by an explicit finite-difference oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import MismatchedParams
from .fields import ProfileTable, SolutionField
from .material import MaterialParams


@dataclass(frozen=True)
class TerzaghiParams:
    """Diffusivity and drained-surface density of the classical limit.

    The surface value follows from the drained boundary condition
    ``m = b eps`` after eliminating the strain through the integrated
    momentum balance: ``c = -b dp_ext/(lambda+2mu)``, i.e. compression
    drives the fluid density down.  This is also the equilibrium value of
    the second-gradient density at zero prestress, which is what makes the
    vanishing-moduli limit exist.

    ``eps_gain``/``eps_shift`` reconstruct the strain column
    (``eps = eps_gain * m_f - eps_shift``); they default to zero when the
    parameters are built without material context.
    """

    a: float
    c: float
    eps_gain: float = 0.0
    eps_shift: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 < self.a <= 1.0:
            raise ValueError(f"diffusivity ratio must lie in (0, 1], got {self.a}")

    @classmethod
    def from_material(cls, params: MaterialParams) -> "TerzaghiParams":
        k5 = params.biot_M / params.p_modulus
        k6 = params.biot_b**2 * k5
        b = params.biot_b
        a = 1.0 / (1.0 + k6)
        c = -b * params.dp_ext / params.p_modulus
        gain = b * k5 / (1.0 + k6)
        shift = (params.dp_ext / params.p_modulus) / (1.0 + k6)
        return cls(a=a, c=c, eps_gain=gain, eps_shift=shift)


def terzaghi_series(p: TerzaghiParams, x, t: float, modes: int = 200):
    """Series solution m(x, t) = c + sum b_k sin(kap_k x) exp(-a kap_k^2 t).

    The sine coefficients b_k = -2c/kap_k, kap_k = pi/2 + k pi, expand the
    zero initial datum against the surface value c.
    """
    xarr = np.asarray(x, dtype=float)
    acc = np.full(xarr.shape, p.c)
    for k in range(modes):
        kap = math.pi / 2.0 + k * math.pi
        decay = math.exp(-p.a * kap * kap * t)
        if decay == 0.0:
            break
        acc = acc + (-2.0 * p.c / kap) * np.sin(kap * xarr) * decay
    return float(acc) if np.isscalar(x) else acc


def terzaghi_rates(p: TerzaghiParams, count: int) -> np.ndarray:
    """Decay rates -a (pi/2 + k pi)^2 of the classical modes."""
    kap = math.pi / 2.0 + np.arange(count) * math.pi
    return -p.a * kap * kap


def terzaghi_fd_oracle(
    p: TerzaghiParams,
    nx: int = 201,
    t_end: float = 0.5,
    sample_times: tuple[float, ...] | None = None,
) -> ProfileTable:
    """Explicit finite-difference solution of the classical problem.

    Forward Euler on ``mdot = a m''`` with the surface value pinned and a
    ghost-node Neumann wall; the step obeys dt <= 0.4 dx^2 / a.  Profiles
    are recorded at ``sample_times`` (default: ``t_end`` only), hitting
    each sample exactly by shortening the final step.
    """
    if nx < 101:
        raise ValueError("nx must be at least 101")
    times = tuple(sorted(sample_times)) if sample_times else (t_end,)
    if times[-1] > t_end:
        t_end = times[-1]
    xs = np.linspace(0.0, 1.0, nx)
    dx = xs[1] - xs[0]
    dt_max = 0.4 * dx * dx / p.a if p.a > 0 else t_end
    m = np.zeros(nx)
    m[0] = p.c

    rows_x, rows_t, rows_m = [], [], []
    t_now = 0.0
    for target in times:
        while t_now < target - 1e-15:
            dt = min(dt_max, target - t_now)
            lap = np.empty(nx)
            lap[1:-1] = m[2:] - 2.0 * m[1:-1] + m[:-2]
            lap[-1] = 2.0 * (m[-2] - m[-1])  # ghost node: m[n+1] = m[n-1]
            lap[0] = 0.0
            m = m + (p.a * dt / (dx * dx)) * lap
            m[0] = p.c
            t_now += dt
        rows_x.append(xs.copy())
        rows_t.append(np.full(nx, target))
        rows_m.append(m.copy())
    mf = np.concatenate(rows_m)
    eps = p.eps_gain * mf - p.eps_shift
    return ProfileTable(
        x=np.concatenate(rows_x),
        t=np.concatenate(rows_t),
        V=np.zeros(mf.shape),
        eps=eps,
        mf=mf,
    )


@dataclass(frozen=True)
class CompareRecord:
    """Distance metrics between the second-gradient and classical fields."""

    t: float
    sup_full: float
    sup_interior: float
    layer_width_0: float
    layer_width_1: float

    def to_csv_row(self) -> str:
        return (
            f"{self.t:.17g},{self.sup_full:.17g},{self.sup_interior:.17g},"
            f"{self.layer_width_0:.17g},{self.layer_width_1:.17g}"
        )


def compare(
    second_gradient: SolutionField,
    p: TerzaghiParams,
    t: float,
    nx: int = 401,
    series_modes: int = 400,
) -> CompareRecord:
    """Sup-norm distances and boundary-layer widths at time ``t``.

    The layer width at each wall is the distance at which the
    second-gradient density first comes within 5% of the classical value
    (measured against max(|m_T|, 0.05 |c|) to tolerate near-zero
    classical values).

    Raises
    ------
    MismatchedParams
        If the two solutions were not built from the same unloaded,
        prestress-free material.
    """
    c = second_gradient.coeffs
    k6 = c.k6
    a_field = 1.0 / (1.0 + k6)
    c_field = -k6 * c.B6  # the shared equilibrium -b dp/(lambda+2mu)
    if abs(c.C4 - 1.0) > 1e-12:
        raise MismatchedParams("comparison requires zero prestress (B4 = 1)")
    if abs(a_field - p.a) > 1e-9 * p.a or abs(c_field - p.c) > 1e-9 * max(
        abs(p.c), 1e-300
    ):
        raise MismatchedParams(
            f"moduli differ: field implies (a, c) = ({a_field!r}, {c_field!r}), "
            f"baseline carries ({p.a!r}, {p.c!r})"
        )

    xs = np.linspace(0.0, 1.0, nx)
    m_sg = np.atleast_1d(second_gradient.mf(xs, t))
    m_tz = terzaghi_series(p, xs, t, modes=series_modes)
    diff = np.abs(m_sg - m_tz)
    interior = (xs >= 0.1) & (xs <= 0.9)
    tol = 0.05 * np.maximum(np.abs(m_tz), 0.05 * abs(p.c))

    def width_from(idx_order) -> float:
        for i in idx_order:
            if diff[i] <= tol[i]:
                return abs(xs[i] - xs[idx_order[0]])
        return 1.0

    return CompareRecord(
        t=t,
        sup_full=float(diff.max()),
        sup_interior=float(diff[interior].max()) if interior.any() else 0.0,
        layer_width_0=width_from(range(nx)),
        layer_width_1=width_from(range(nx - 1, -1, -1)),
    )
