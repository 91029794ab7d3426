"""Bilinear form of the pencil, orthogonality, and Fourier projection.

Eigenfunctions of the pencil with distinct rates are orthogonal under a
weighted Sobolev-type form

    <X, Y> = a0 int X Y + a1 int X' Y' + a2 int X'' Y'' + a3 int X''' Y'''

for exactly one weight direction.  Pairing the separated equation with the
reduced fourth-order operator and integrating by parts twice under the six
boundary conditions yields the closed-form weights

    a = C6 * (C4, C2, C1, 0) + d5 * (0, C4, C2, C1),   d5 = C5 - B5,

which this module validates numerically against a Gram-matrix gate before
use.  All integrals of eigenfunction products are evaluated in closed form
from the complex-exponential terms; a Gauss-Legendre path exists purely as
a test oracle.

At critical prestress (B4 = 0) the a0 weight vanishes identically and the
form lives on the quotient space of functions modulo constants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .errors import SpectrumExhausted, WeightsUnresolvable
from .material import PencilCoefficients, bilinear_weights_from
from .pencil import Eigenpair

#: Gate on max |<Xk,Xh>| / (|Xk| |Xh|), k != h, for resolved weights.
ORTHOGONALITY_TOL = 1e-6
#: |s| below which the interval integral of exp(s x) switches to a series.
SERIES_SWITCH = 1e-6


@dataclass(frozen=True)
class BilinearWeights:
    """Weights on the four derivative-product integrals."""

    alpha0: float
    alpha1: float
    alpha2: float
    alpha3: float

    def as_array(self) -> np.ndarray:
        return np.array([self.alpha0, self.alpha1, self.alpha2, self.alpha3])

    @classmethod
    def from_coefficients(cls, coeffs: PencilCoefficients) -> "BilinearWeights":
        """The derived (integration-by-parts) weights."""
        a0, a1, a2, a3 = bilinear_weights_from(
            coeffs.C1, coeffs.C2, coeffs.C4, coeffs.C6, coeffs.d5
        )
        return cls(a0, a1, a2, a3)

    @classmethod
    def paper_literal(cls, coeffs: PencilCoefficients) -> "BilinearWeights":
        """The published closed-form variant taken at face value.

        Reading every product with boundary coefficients makes the paired
        terms cancel identically, leaving B6 * (C4, C2, C1, 0).  Kept
        behind the ``--weights paper-literal`` switch for comparison; it
        fails the orthogonality gate.
        """
        return cls(coeffs.C4 * coeffs.B6, coeffs.C2 * coeffs.B6, coeffs.C1 * coeffs.B6, 0.0)


@dataclass(frozen=True)
class GramReport:
    """Orthogonality diagnostics for a set of eigenfunctions."""

    size: int
    max_offdiag_ratio: float
    diag: np.ndarray

    def to_csv(self) -> str:
        lines = ["k,norm_sq"]
        for k, d in enumerate(self.diag):
            lines.append(f"{k},{d:.17g}")
        lines.append(f"# max_offdiag_ratio,{self.max_offdiag_ratio:.17g}")
        return "\n".join(lines) + "\n"


def _interval_integral(b1: complex, c1: float, b2: complex, c2: float) -> complex:
    """int_0^1 exp(b1 (x-c1)) exp(b2 (x-c2)) dx, overflow-safe.

    With centers in {0, 1} chosen so each factor is bounded by 1, both
    endpoint exponents have nonpositive real part.  Near-cancellation at
    b1 + b2 ~ 0 is handled by a six-term series.
    """
    s = b1 + b2
    a0 = -b1 * c1 - b2 * c2
    if abs(s) < SERIES_SWITCH:
        acc = 0j
        term = 1.0 + 0j
        for k in range(6):
            acc += term / math.factorial(k + 1)
            term *= s
        return np.exp(a0) * acc
    a1 = b1 * (1.0 - c1) + b2 * (1.0 - c2)
    return (np.exp(a1) - np.exp(a0)) / s


def pair_integral(pair_a: Eigenpair, pair_b: Eigenpair, order: int) -> float:
    """int_0^1 X_a^(m) X_b^(m) dx in closed form (m = ``order``)."""
    acc = 0j
    for wa, ba, ca in pair_a.terms:
        fa = wa * (ba**order if order else 1.0)
        for wb, bb, cb in pair_b.terms:
            fb = wb * (bb**order if order else 1.0)
            acc += fa * fb * _interval_integral(ba, ca, bb, cb)
    return float(acc.real)


def _self_l2(terms) -> float:
    acc = 0j
    for wa, ba, ca in terms:
        for wb, bb, cb in terms:
            acc += wa * wb * _interval_integral(ba, ca, bb, cb)
    return float(acc.real)


def _mean_integral(terms) -> float:
    acc = 0j
    for w, b, c in terms:
        acc += w * _interval_integral(b, c, 0j, 0.0)
    return float(acc.real)


def mean_integral(pair: Eigenpair) -> float:
    """int_0^1 X dx (closed form)."""
    return _mean_integral(pair.terms)


def inner(pair_a: Eigenpair, pair_b: Eigenpair, w: BilinearWeights) -> float:
    """The weighted bilinear form; symmetric in its arguments.

    Arguments are ordered canonically before accumulation so the two call
    orders produce bitwise-identical sums.
    """
    if pair_b.lambda_k < pair_a.lambda_k:
        pair_a, pair_b = pair_b, pair_a
    total = 0.0
    for m, alpha in enumerate(w.as_array()):
        if alpha != 0.0:
            total += alpha * pair_integral(pair_a, pair_b, m)
    return total


def gram_report(pairs: Sequence[Eigenpair], w: BilinearWeights) -> GramReport:
    """Gram matrix diagnostics: norms and the worst off-diagonal ratio."""
    n = len(pairs)
    g = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            g[i, j] = g[j, i] = inner(pairs[i], pairs[j], w)
    d = np.sqrt(np.abs(np.diag(g)))
    worst = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            den = d[i] * d[j]
            if den > 0.0:
                worst = max(worst, abs(g[i, j]) / den)
    return GramReport(size=n, max_offdiag_ratio=worst, diag=np.diag(g).copy())


def resolve_weights(
    coeffs: PencilCoefficients, probe_pairs: Sequence[Eigenpair]
) -> BilinearWeights:
    """Return weights under which the probe eigenfunctions are orthogonal.

    The derived closed-form weights are tried first.  If they fail the
    gate (they should not), the two-parameter family spanned by the
    C6-weighted and d5-weighted halves is fit by least squares over the
    probe pairs and re-gated.

    Raises
    ------
    WeightsUnresolvable
        If no family member passes; carries the Gram report.
    """
    if len(probe_pairs) < 4:
        raise ValueError("need at least 4 probe eigenpairs")
    derived = BilinearWeights.from_coefficients(coeffs)
    rep = gram_report(probe_pairs, derived)
    if rep.max_offdiag_ratio <= ORTHOGONALITY_TOL:
        return derived

    # family: a * C6 * (C4,C2,C1,0) + t * d5 * (0,C4,C2,C1), fit t/a
    d5 = coeffs.d5
    base0 = np.array([coeffs.C4, coeffs.C2, coeffs.C1, 0.0]) * coeffs.C6
    base1 = np.array([0.0, coeffs.C4, coeffs.C2, coeffs.C1]) * d5
    rows0, rows1 = [], []
    for i in range(len(probe_pairs)):
        for j in range(i + 1, len(probe_pairs)):
            ints = np.array(
                [pair_integral(probe_pairs[i], probe_pairs[j], m) for m in range(4)]
            )
            rows0.append(float(base0 @ ints))
            rows1.append(float(base1 @ ints))
    rows0 = np.array(rows0)
    rows1 = np.array(rows1)
    denom = float(rows1 @ rows1)
    if denom > 0.0:
        t = -float(rows0 @ rows1) / denom
        cand = BilinearWeights(*(base0 + t * base1))
        rep2 = gram_report(probe_pairs, cand)
        if rep2.max_offdiag_ratio <= ORTHOGONALITY_TOL:
            return cand
        rep = rep2
    raise WeightsUnresolvable(
        f"no weight family member reaches off-diagonal ratio "
        f"{ORTHOGONALITY_TOL:g} (best {rep.max_offdiag_ratio:.3e})",
        report=rep,
    )


def attach_norms(
    pairs: Sequence[Eigenpair], w: BilinearWeights
) -> tuple[Eigenpair, ...]:
    """Return eigenpairs completed with squared norms and ordinal indices."""
    return tuple(
        replace(p, norm_sq=inner(p, p, w), index=k) for k, p in enumerate(pairs)
    )


def fourier_coefficients(
    spectrum: Sequence[Eigenpair], W_in: float, w: BilinearWeights
) -> np.ndarray:
    """Projection of the constant initial deviation on each mode.

    For a constant datum only the zeroth integral survives:
    ``p_k = alpha0 * W_in * int X_k / |X_k|^2``.
    """
    out = np.empty(len(spectrum))
    for k, pair in enumerate(spectrum):
        nq = pair.norm_sq if pair.norm_sq is not None else inner(pair, pair, w)
        out[k] = w.alpha0 * W_in * mean_integral(pair) / nq
    return out


def reconstruction_error(
    spectrum: Sequence[Eigenpair],
    p: np.ndarray,
    W_in: float,
    w: BilinearWeights,
    n: int,
) -> float:
    """Relative error |W_in - sum_{k<=n} p_k X_k| / |W_in| in the resolved
    norm, computed through the exact Gram matrix (no orthogonality
    assumption)."""
    norm_win_sq = w.alpha0 * W_in * W_in
    if norm_win_sq <= 0.0:
        raise ValueError("constant datum has zero norm under these weights")
    if n == 0:
        return 1.0
    sub = spectrum[:n]
    pv = np.asarray(p[:n])
    g = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            g[i, j] = g[j, i] = inner(sub[i], sub[j], w)
    cross = np.array([w.alpha0 * W_in * mean_integral(q) for q in sub])
    err_sq = norm_win_sq - 2.0 * float(pv @ cross) + float(pv @ g @ pv)
    return math.sqrt(max(err_sq, 0.0) / norm_win_sq)


def truncation_order(
    spectrum: Sequence[Eigenpair],
    p: np.ndarray,
    W_in: float,
    target_rel_err: float,
    w: BilinearWeights,
) -> int:
    """Smallest mode count meeting the reconstruction target.

    Raises
    ------
    SpectrumExhausted
        If even the full available spectrum misses the target; the caller
        should enlarge the search window.
    """
    if not 0.0 < target_rel_err < 1.0:
        raise ValueError("target_rel_err must lie in (0, 1)")
    if W_in == 0.0:
        return 0
    for n in range(1, len(spectrum) + 1):
        if reconstruction_error(spectrum, p, W_in, w, n) <= target_rel_err:
            return n
    raise SpectrumExhausted(
        f"{len(spectrum)} modes cannot reach relative error {target_rel_err:g}"
    )


def quadrature_pair_integral(
    pair_a: Eigenpair, pair_b: Eigenpair, order: int, points: int = 64
) -> float:
    """Gauss-Legendre evaluation of the same product integral.

    Test oracle only; production always uses the closed form.
    """
    from .pencil import eval_eigenfunction

    x, wts = np.polynomial.legendre.leggauss(points)
    x = 0.5 * (x + 1.0)
    wts = 0.5 * wts
    fa = eval_eigenfunction(pair_a, x, order)
    fb = eval_eigenfunction(pair_b, x, order)
    return float(np.sum(wts * fa * fb))
