"""Spectral pencil solver: characteristic roots, boundary matrix,
determinant bracketing, and eigenfunction extraction.

The separated problem is a sixth-order ODE in which the rate parameter
``lam`` multiplies both interior terms and one boundary term.  Trial
solutions ``exp(beta x)`` reduce the ODE to a cubic in ``gamma = beta^2``;
the six boundary conditions give a 6x6 matrix ``A(lam)`` whose rank
deficiency marks the eigenvalues.

Numerical safeguards, all of which preserve the zero set of
``det A(lam)``:

* every exponential is centered at the endpoint where it is largest, so
  entries never overflow (pure positive column rescaling);
* conjugate root pairs are combined into real cosine/sine columns, making
  ``A`` real for real ``lam`` so determinant sign changes are meaningful;
* each column is divided by its largest absolute entry (recorded in
  ``column_scales``).

Column blocks are emitted per cubic root and sorted by the root's real
part.  Block moves are even permutations (2- and 4-column blocks), so the
sorted determinant stays continuous in ``lam`` away from root collisions;
collisions themselves are flagged degenerate and skipped by the scan.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateBasis, InsufficientBracket, NotAnEigenvalue
from .material import CRITICAL_TOL, PencilCoefficients

#: Relative gap under which two cubic roots are treated as a collision.
DEGENERACY_RTOL = 1e-8
#: Absolute size under which a cubic root counts as the beta = 0 double root.
DEGENERACY_ATOL = 1e-12
#: Rank-deficiency acceptance: smallest/largest singular value of A(lam).
RANK_DEFICIENCY_RTOL = 1e-6
#: Relative bisection tolerance on refined eigenvalues.
REFINE_RTOL = 1e-10
#: Eigenvalues closer than this relative gap are merged.
MERGE_RTOL = 1e-8


@dataclass(frozen=True)
class BasisColumn:
    """One real solution-basis function.

    The function is ``part`` of ``exp(beta (x - center))`` where ``part``
    selects the real part, imaginary part, or the (already real) value.
    ``center`` is 0 or 1, chosen so the modulus never exceeds 1 on [0, 1].
    """

    beta: complex
    center: float
    part: str  # "plain" | "re" | "im"

    def eval(self, x, order: int = 0):
        z = np.exp(self.beta * (np.asarray(x, dtype=float) - self.center))
        if order:
            z = self.beta**order * z
        if self.part == "im":
            return z.imag
        return z.real


@dataclass(frozen=True)
class CharRoots:
    """Roots of the characteristic cubic and the derived basis."""

    gamma: tuple[complex, complex, complex]
    beta: tuple[complex, ...]
    degenerate_flag: bool
    columns: tuple[BasisColumn, ...] = field(repr=False)


@dataclass(frozen=True)
class BoundaryMatrix:
    """Scaled real boundary matrix A(lam) with its column scaling."""

    entries: np.ndarray
    column_scales: np.ndarray
    columns: tuple[BasisColumn, ...] = field(repr=False)


@dataclass(frozen=True)
class Eigenpair:
    """An eigenvalue with its eigenfunction in stabilized basis form.

    ``weights`` are the coefficients on ``roots.columns``; ``terms`` is the
    equivalent complex-exponential sum ``X(x) = sum w exp(beta (x - c))``
    used by the closed-form integrals.  The function is normalized to
    ``int X^2 = 1`` with ``int X >= 0``.  ``norm_sq`` (squared norm under
    the resolved bilinear form) and ``index`` are attached when a spectrum
    is assembled.
    """

    lambda_k: float
    roots: CharRoots
    weights: np.ndarray
    terms: tuple[tuple[complex, complex, float], ...]
    norm_sq: float | None = None
    index: int | None = None


def characteristic_roots(
    lam: float, coeffs: PencilCoefficients, strict: bool = False
) -> CharRoots:
    """Solve the characteristic cubic in gamma = beta^2 and build the basis.

    The cubic is solved by the companion-matrix method and polished with
    Newton steps.  Degeneracy (two gammas within ``DEGENERACY_RTOL``
    relative, or any ``|gamma| < DEGENERACY_ATOL``) flags the basis; in
    strict mode that raises :class:`DegenerateBasis`.
    """
    if coeffs.C1 == 0.0:
        raise DegenerateBasis("C1 = 0: the problem is not sixth order")
    c2 = coeffs.C2 + lam * coeffs.C3
    c1 = coeffs.C4 + lam * coeffs.C5
    c0 = -lam * coeffs.C6
    gammas = np.roots([coeffs.C1, -c2, c1, c0])
    for _ in range(3):
        f = coeffs.C1 * gammas**3 - c2 * gammas**2 + c1 * gammas + c0
        fp = 3.0 * coeffs.C1 * gammas**2 - 2.0 * c2 * gammas + c1
        step = np.where(fp != 0.0, f / np.where(fp != 0.0, fp, 1.0), 0.0)
        gammas = gammas - step

    scale = max(abs(g) for g in gammas)
    degenerate = any(abs(g) < DEGENERACY_ATOL for g in gammas)
    for i in range(3):
        for j in range(i + 1, 3):
            gap = abs(gammas[i] - gammas[j])
            if gap < DEGENERACY_RTOL * max(scale, 1e-300):
                degenerate = True
    if degenerate and strict:
        raise DegenerateBasis(
            f"clustered characteristic roots at lam={lam!r}: gammas={gammas!r}"
        )

    columns, gs_sorted = _basis_columns(gammas)
    betas = []
    for g in gs_sorted:
        r = np.sqrt(complex(g))
        betas.extend((r, -r))
    return CharRoots(
        gamma=tuple(gs_sorted),
        beta=tuple(betas),
        degenerate_flag=degenerate,
        columns=columns,
    )


def _basis_columns(gammas) -> tuple[tuple[BasisColumn, ...], list[complex]]:
    """Real basis columns per root, block-sorted by the root's real part.

    Real gamma > 0 gives a decaying/growing pair centered at opposite
    endpoints; real gamma < 0 gives cosine/sine; a conjugate pair gives a
    4-column block of exponentially weighted cosines/sines.
    """
    used = [False, False, False]
    blocks: list[tuple[float, float, list[BasisColumn]]] = []
    for i, g in enumerate(gammas):
        if used[i]:
            continue
        used[i] = True
        if abs(g.imag) <= 1e-12 * max(1.0, abs(g)):
            gr = float(g.real)
            if gr >= 0.0:
                b = math.sqrt(gr)
                cols = [
                    BasisColumn(complex(-b), 0.0, "plain"),
                    BasisColumn(complex(b), 1.0, "plain"),
                ]
            else:
                om = math.sqrt(-gr)
                cols = [
                    BasisColumn(complex(0.0, om), 0.0, "re"),
                    BasisColumn(complex(0.0, om), 0.0, "im"),
                ]
            blocks.append((gr, 0.0, cols))
        else:
            # consume the conjugate partner
            for j in range(i + 1, 3):
                if not used[j] and abs(gammas[j] - g.conjugate()) <= 1e-6 * abs(g):
                    used[j] = True
                    break
            rep = g if g.imag > 0 else g.conjugate()
            root = np.sqrt(rep)
            a, b = abs(root.real), abs(root.imag)
            cols = [
                BasisColumn(complex(-a, b), 0.0, "re"),
                BasisColumn(complex(-a, b), 0.0, "im"),
                BasisColumn(complex(a, b), 1.0, "re"),
                BasisColumn(complex(a, b), 1.0, "im"),
            ]
            blocks.append((float(rep.real), float(rep.imag), cols))
    blocks.sort(key=lambda t: (t[0], t[1]))
    columns: list[BasisColumn] = []
    reps: list[complex] = []
    for re_, im_, cols in blocks:
        columns.extend(cols)
        reps.append(complex(re_, im_))
        if im_ != 0.0:
            reps.append(complex(re_, -im_))
    if len(columns) != 6:
        raise DegenerateBasis(
            f"basis construction produced {len(columns)} columns "
            f"(unpaired complex root?) for gammas={list(gammas)!r}"
        )
    return tuple(columns), reps


def boundary_matrix(
    lam: float, roots: CharRoots, coeffs: PencilCoefficients
) -> BoundaryMatrix:
    """Apply the six boundary functionals to the basis columns.

    Row order: the lam-dependent surface row, then X'(0), X'(1), X'''(0),
    X'''(1), X^(5)(1).  Columns are rescaled by their largest entry.
    """
    cols = roots.columns
    A = np.empty((6, 6))
    c2 = coeffs.B2 + lam * coeffs.B3
    c0 = coeffs.B4 + lam * coeffs.B5
    for j, col in enumerate(cols):
        A[0, j] = (
            coeffs.B1 * col.eval(0.0, 4) - c2 * col.eval(0.0, 2) + c0 * col.eval(0.0, 0)
        )
        A[1, j] = col.eval(0.0, 1)
        A[2, j] = col.eval(1.0, 1)
        A[3, j] = col.eval(0.0, 3)
        A[4, j] = col.eval(1.0, 3)
        A[5, j] = col.eval(1.0, 5)
    scales = np.abs(A).max(axis=0)
    if not np.all(scales > 0.0) or not np.all(np.isfinite(scales)):
        raise DegenerateBasis(f"vanishing or nonfinite basis column at lam={lam!r}")
    return BoundaryMatrix(entries=A / scales, column_scales=scales, columns=cols)


def determinant(lam: float, coeffs: PencilCoefficients) -> float:
    """Scaled real determinant of A(lam); zeros mark the eigenvalues.

    Raises :class:`DegenerateBasis` at root collisions; callers treat the
    point as unevaluable and perturb lam by one part in 1e9.
    """
    roots = characteristic_roots(lam, coeffs, strict=True)
    return float(np.linalg.det(boundary_matrix(lam, roots, coeffs).entries))


def _det_safe(lam: float, coeffs: PencilCoefficients) -> float:
    try:
        return determinant(lam, coeffs)
    except DegenerateBasis:
        bumped = lam * (1.0 + 1e-9) if lam != 0.0 else 1e-9
        return determinant(bumped, coeffs)


@dataclass(frozen=True)
class SearchWindow:
    """Bracketing-scan controls for :func:`find_eigenvalues`.

    ``lambda_min`` is the most negative rate scanned (default
    ``-1e4 * max(1, 1/k1)``, stretched by the stiffest dimensionless
    group); ``grid`` log-spaced points per sign cover each side down to
    magnitude ``floor``.
    """

    lambda_min: float | None = None
    grid: int = 2000
    floor: float = 1e-8

    def resolved_min(self, coeffs: PencilCoefficients) -> float:
        if self.lambda_min is not None:
            return self.lambda_min
        # d5 = k1 + k3 k5 k2^2 bounds k1 from above at the same order, so
        # it serves as the stiffness proxy without carrying the groups.
        k1_est = coeffs.d5 if coeffs.d5 > 0.0 else 1.0
        return -1e4 * max(1.0, 1.0 / k1_est)


def _scan_side(
    coeffs: PencilCoefficients, sign: float, lo_mag: float, hi_mag: float, n: int
) -> list[tuple[float, float, float, float]]:
    """One-signed log scan; returns brackets (a, b, fa, fb) with a < b."""
    if hi_mag <= lo_mag:
        return []
    mags = np.logspace(math.log10(lo_mag), math.log10(hi_mag), n)
    lams = np.sort(sign * mags)
    vals = np.array([_det_safe(l, coeffs) for l in lams])
    # a grid point landing exactly on a zero is re-evaluated a hair away
    # so that the sign pattern stays usable
    for i in np.nonzero(vals == 0.0)[0]:
        vals[i] = _det_safe(lams[i] * (1.0 + 1e-12), coeffs)
    ok = np.isfinite(vals)
    brackets = []
    for i in range(len(lams) - 1):
        if not (ok[i] and ok[i + 1]):
            continue
        if vals[i] * vals[i + 1] < 0.0:
            brackets.append((lams[i], lams[i + 1], vals[i], vals[i + 1]))
    return brackets


def _bisect(
    coeffs: PencilCoefficients, a: float, b: float, fa: float, fb: float
) -> float:
    for _ in range(200):
        mid = 0.5 * (a + b)
        if abs(b - a) <= REFINE_RTOL * max(abs(mid), 1e-300):
            return mid
        fm = _det_safe(mid, coeffs)
        if fm == 0.0:
            return mid
        if fa * fm < 0.0:
            b, fb = mid, fm
        else:
            a, fa = mid, fm
    return 0.5 * (a + b)


def _rank_ratio(lam: float, coeffs: PencilCoefficients) -> float:
    roots = characteristic_roots(lam, coeffs, strict=False)
    if roots.degenerate_flag:
        return np.inf
    s = np.linalg.svd(boundary_matrix(lam, roots, coeffs).entries, compute_uv=False)
    return float(s[-1] / s[0])


def find_eigenvalues(
    coeffs: PencilCoefficients,
    count: int,
    search: SearchWindow | None = None,
) -> np.ndarray:
    """Locate the ``count`` eigenvalues of smallest magnitude.

    The scan brackets sign changes of the scaled determinant on a
    log-spaced grid, refines each bracket by bisection to relative
    accuracy ``REFINE_RTOL``, and keeps only candidates at which A(lam)
    is genuinely rank deficient (this rejects spurious sign changes at
    basis-degeneracy points).  Negative rates are always scanned; the
    positive axis is scanned when B4 < 0.  At critical prestress
    (|B4| <= CRITICAL_TOL) the zero eigenvalue, whose eigenfunction is the
    constant, is a member of the spectrum and is included analytically.

    Returns the eigenvalues sorted by decreasing value (least-negative
    first in the stable regime, positives first in the unstable one).

    Raises
    ------
    InsufficientBracket
        If fewer than ``count`` verified eigenvalues are found in-window.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    search = search or SearchWindow()
    hi_mag = abs(search.resolved_min(coeffs))
    critical = abs(coeffs.B4) <= CRITICAL_TOL

    brackets = _scan_side(coeffs, -1.0, search.floor, hi_mag, search.grid)
    if coeffs.B4 < 0.0 and not critical:
        brackets += _scan_side(coeffs, +1.0, search.floor, hi_mag, search.grid)

    brackets.sort(key=lambda br: abs(0.5 * (br[0] + br[1])))
    found: list[float] = [0.0] if critical else []
    needed = count
    for a, b, fa, fb in brackets:
        if len(found) >= needed:
            break
        lam = _bisect(coeffs, a, b, fa, fb)
        if _rank_ratio(lam, coeffs) > RANK_DEFICIENCY_RTOL:
            continue
        if any(
            abs(lam - prev) <= MERGE_RTOL * max(abs(lam), abs(prev), 1e-300)
            for prev in found
        ):
            continue
        found.append(lam)

    if len(found) < count:
        raise InsufficientBracket(
            f"found {len(found)} eigenvalues, requested {count}; widen the "
            f"window (lambda_min={-hi_mag:g}) or refine the grid"
        )
    found.sort(key=abs)
    chosen = found[:count]
    chosen.sort(reverse=True)
    return np.array(chosen)


def _null_vector(mat: BoundaryMatrix) -> tuple[np.ndarray, float]:
    u, s, vt = np.linalg.svd(mat.entries)
    return vt[-1], float(s[-1] / s[0])


def _terms_from(columns, coefs) -> tuple[tuple[complex, complex, float], ...]:
    """Fold real column coefficients into complex-exponential terms."""
    terms: list[tuple[complex, complex, float]] = []
    for c, col in zip(coefs, columns):
        w = complex(c)
        if col.part == "plain":
            terms.append((w, col.beta, col.center))
        elif col.part == "re":
            terms.append((w / 2.0, col.beta, col.center))
            terms.append((w / 2.0, col.beta.conjugate(), col.center))
        else:  # im: c * Im e = c (e - conj e) / 2i
            terms.append((w / 2j, col.beta, col.center))
            terms.append((-w / 2j, col.beta.conjugate(), col.center))
    # merge duplicate exponents (cos/sin share them)
    merged: dict[tuple[complex, float], complex] = {}
    for w, b, c in terms:
        key = (b, c)
        merged[key] = merged.get(key, 0j) + w
    return tuple((w, b, c) for (b, c), w in merged.items() if w != 0j)


def constant_eigenpair(coeffs: PencilCoefficients) -> Eigenpair:
    """The constant eigenfunction carried by the zero eigenvalue.

    Only meaningful at critical prestress (B4 = 0), where lambda = 0
    enters the spectrum; the generic exponential basis degenerates there,
    so the pair is built analytically.
    """
    roots = characteristic_roots(0.0, coeffs, strict=False)
    weights = np.zeros(6)
    weights[0] = 1.0
    return Eigenpair(
        lambda_k=0.0,
        roots=roots,
        weights=weights,
        terms=((1.0 + 0j, 0j, 0.0),),
    )


def eigenfunction(lambda_k: float, coeffs: PencilCoefficients) -> Eigenpair:
    """Extract the eigenfunction at a verified determinant zero.

    The weight vector is the right singular direction of smallest singular
    value, unfolded through the column scaling.  The function is real by
    construction; it is normalized to unit L2 norm with nonnegative mean.

    Raises
    ------
    NotAnEigenvalue
        If the smallest singular value exceeds ``RANK_DEFICIENCY_RTOL``
        times the largest.
    """
    if lambda_k == 0.0 and abs(coeffs.B4) <= CRITICAL_TOL:
        return constant_eigenpair(coeffs)
    roots = characteristic_roots(lambda_k, coeffs, strict=True)
    mat = boundary_matrix(lambda_k, roots, coeffs)
    v, ratio = _null_vector(mat)
    if ratio > RANK_DEFICIENCY_RTOL:
        raise NotAnEigenvalue(
            f"A(lam) is not rank deficient at lam={lambda_k!r} "
            f"(smin/smax = {ratio:.3e})"
        )
    coefs = v / mat.column_scales
    terms = _terms_from(mat.columns, coefs)

    # normalize: int X^2 = 1, int X >= 0
    from .expansion import _self_l2, _mean_integral  # local import, no cycle at module load

    q = _self_l2(terms)
    if not (q > 0.0) or not np.isfinite(q):
        raise NotAnEigenvalue(f"degenerate null vector at lam={lambda_k!r}")
    r = 1.0 / math.sqrt(q)
    terms = tuple((w * r, b, c) for w, b, c in terms)
    coefs = coefs * r
    mean = _mean_integral(terms)
    if mean < 0.0 or (abs(mean) < 1e-12 and _eval_terms(terms, 1.0, 0) < 0.0):
        terms = tuple((-w, b, c) for w, b, c in terms)
        coefs = -coefs
    return Eigenpair(
        lambda_k=float(lambda_k),
        roots=roots,
        weights=coefs.astype(complex),
        terms=terms,
    )


def _eval_terms(terms, x, order: int):
    xarr = np.asarray(x, dtype=float)
    acc = np.zeros(xarr.shape, dtype=complex)
    for w, b, c in terms:
        fac = w * (b**order if order else 1.0)
        acc = acc + fac * np.exp(b * (xarr - c))
    out = acc.real
    return float(out) if np.isscalar(x) or xarr.ndim == 0 else out


def eval_eigenfunction(pair: Eigenpair, x, order: int = 0):
    """Evaluate the eigenfunction (or a derivative) on [0, 1].

    Accepts a scalar or an array of positions; the imaginary residue of
    the conjugate-pair sum is discarded.
    """
    return _eval_terms(pair.terms, x, order)


def ode_residual(pair: Eigenpair, coeffs: PencilCoefficients, x) -> float:
    """Max pointwise residual of the separated ODE, normalized per point
    by the sum of term magnitudes."""
    lam = pair.lambda_k
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    worst = 0.0
    for xi in xs:
        t6 = coeffs.C1 * _eval_terms(pair.terms, xi, 6)
        t4 = -(coeffs.C2 + lam * coeffs.C3) * _eval_terms(pair.terms, xi, 4)
        t2 = (coeffs.C4 + lam * coeffs.C5) * _eval_terms(pair.terms, xi, 2)
        t0 = -lam * coeffs.C6 * _eval_terms(pair.terms, xi, 0)
        scale = abs(t6) + abs(t4) + abs(t2) + abs(t0)
        if scale == 0.0:
            continue
        worst = max(worst, abs(t6 + t4 + t2 + t0) / scale)
    return worst


def bc_residuals(pair: Eigenpair, coeffs: PencilCoefficients) -> np.ndarray:
    """Normalized magnitudes of the six boundary rows on the eigenfunction.

    Each row is normalized by the sum of absolute per-term contributions
    (the row scale), so a true null vector reads near machine precision.
    """
    lam = pair.lambda_k
    terms = pair.terms

    def row(parts) -> float:
        total = sum(parts)
        scale = sum(abs(p) for p in parts)
        return abs(total) / scale if scale > 0.0 else 0.0

    r1 = row(
        [
            coeffs.B1 * _eval_terms(terms, 0.0, 4),
            -(coeffs.B2 + lam * coeffs.B3) * _eval_terms(terms, 0.0, 2),
            (coeffs.B4 + lam * coeffs.B5) * _eval_terms(terms, 0.0, 0),
        ]
    )

    def deriv_row(x0: float, order: int) -> float:
        parts = [
            (w * (b**order if order else 1.0) * np.exp(b * (x0 - c)))
            for w, b, c in terms
        ]
        total = abs(sum(parts).real)
        scale = sum(abs(p) for p in parts)
        return total / scale if scale > 0.0 else 0.0

    return np.array(
        [
            r1,
            deriv_row(0.0, 1),
            deriv_row(1.0, 1),
            deriv_row(0.0, 3),
            deriv_row(1.0, 3),
            deriv_row(1.0, 5),
        ]
    )
