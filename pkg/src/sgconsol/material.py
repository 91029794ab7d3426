"""Material data and the dimensionless coefficient ledger.

The solver works entirely on the unit interval in the dimensionless groups
``k1..k6``; physical moduli enter only through those groups and through the
two loading ratios ``p0_ext/(lambda+2*mu)`` and ``dp_ext/(b*M)``.  This
module holds the physical parameter record, derives the groups, assembles
the bulk coefficients ``C1..C6`` and boundary coefficients ``B1..B6`` of
the operator pencil, and classifies the prestress regime.

Two entry styles are supported: the full physical style (second-gradient
moduli ``K_ss``, ``M_sg``, ``K_sf``, dissipation ``darcy_D``,
``darcy_alpha`` and layer depth ``depth_L``) and the direct style where
``k1..k4`` are given and the physical second-gradient inputs are bypassed.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import PositivityViolation

#: |B4| at or below this value is classified as critical prestress.
#: B4 is one subtraction and one division away from the inputs, so the
#: sensible tolerance is near machine precision.
CRITICAL_TOL = 1e-10

_PHYSICAL_FIELDS = ("K_ss", "M_sg", "K_sf", "darcy_D", "darcy_alpha", "depth_L")
_DIRECT_FIELDS = ("k1", "k2", "k3", "k4")


@dataclass(frozen=True)
class MaterialParams:
    """Physical constants and loading for the consolidation problem.

    Pressures are in consistent units (GPa in the examples); the
    second-gradient moduli ``K_ss`` and ``M_sg`` carry pressure*length^2,
    ``depth_L`` carries length.  Exactly one of the two entry styles must
    be complete: either all of (``K_ss``, ``M_sg``, ``K_sf``, ``darcy_D``,
    ``darcy_alpha``, ``depth_L``) or all of (``k1``..``k4``).

    Attributes
    ----------
    lambda_lame, mu_lame : float
        Lame coefficients of the drained skeleton.
    biot_M, biot_b : float
        Biot storage modulus and coupling coefficient.  ``biot_b``
        defaults to 1 (fully saturated soft clay limit).
    p0_ext : float
        Initial prestress on the solid skeleton.
    dp_ext : float
        Increment of the external load applied at the drained surface.
    mf0 : float
        Reference apparent fluid density.  Kept for completeness; it is
        scaled out of the dimensionless problem.
    """

    lambda_lame: float
    mu_lame: float
    biot_M: float
    biot_b: float = 1.0
    K_ss: float | None = None
    M_sg: float | None = None
    K_sf: float | None = None
    darcy_D: float | None = None
    darcy_alpha: float | None = None
    depth_L: float | None = None
    k1: float | None = None
    k2: float | None = None
    k3: float | None = None
    k4: float | None = None
    mf0: float = 1.0
    p0_ext: float = 0.0
    dp_ext: float = 0.0

    def __post_init__(self) -> None:
        if self.p_modulus <= 0.0:
            raise PositivityViolation(
                f"lambda + 2*mu must be positive, got {self.p_modulus}"
            )
        if self.biot_M <= 0.0:
            raise PositivityViolation(f"M must be positive, got {self.biot_M}")
        if self.mf0 <= 0.0:
            raise PositivityViolation(f"mf0 must be positive, got {self.mf0}")

        physical = [getattr(self, f) is not None for f in _PHYSICAL_FIELDS]
        direct = [getattr(self, f) is not None for f in _DIRECT_FIELDS]
        if all(direct) and not any(physical):
            style = "direct"
        elif all(physical) and not any(direct):
            style = "physical"
        else:
            raise PositivityViolation(
                "exactly one entry style required: either all of "
                f"{_PHYSICAL_FIELDS} or all of {_DIRECT_FIELDS}"
            )
        object.__setattr__(self, "_entry_style", style)

        if style == "physical":
            if self.K_ss <= 0.0:
                raise PositivityViolation(f"K_ss must be positive, got {self.K_ss}")
            if self.M_sg <= 0.0:
                raise PositivityViolation(f"M_sg must be positive, got {self.M_sg}")
            if self.depth_L <= 0.0:
                raise PositivityViolation(f"depth_L must be positive, got {self.depth_L}")
            if self.darcy_D <= 0.0:
                raise PositivityViolation(f"darcy_D must be positive, got {self.darcy_D}")
            if self.darcy_alpha < 0.0:
                raise PositivityViolation(
                    f"darcy_alpha must be nonnegative, got {self.darcy_alpha}"
                )
        else:
            if self.k1 <= 0.0:
                raise PositivityViolation(f"k1 must be positive, got {self.k1}")
            if self.k3 <= 0.0:
                raise PositivityViolation(f"k3 must be positive, got {self.k3}")
            if self.k4 < 0.0:
                raise PositivityViolation(f"k4 must be nonnegative, got {self.k4}")

    @property
    def entry_style(self) -> str:
        """``"physical"`` or ``"direct"``."""
        return self._entry_style  # type: ignore[attr-defined]

    @property
    def p_modulus(self) -> float:
        """Oedometric modulus lambda + 2*mu, the stability threshold."""
        return self.lambda_lame + 2.0 * self.mu_lame

    @property
    def p0_ratio(self) -> float:
        """Prestress normalized by the oedometric modulus."""
        return self.p0_ext / self.p_modulus

    @property
    def dp_over_bM(self) -> float:
        """Load increment normalized by b*M (zero load maps to zero)."""
        if self.dp_ext == 0.0:
            return 0.0
        if self.biot_b == 0.0:
            raise PositivityViolation(
                "a nonzero load increment cannot be carried with biot_b = 0"
            )
        return self.dp_ext / (self.biot_b * self.biot_M)


@dataclass(frozen=True)
class DimensionlessGroups:
    """The six dimensionless groups governing the unit-interval problem.

    ``k1 = K_ss/((lambda+2mu) L^2)``, ``k2 = K_sf``, ``k3 = M_sg/(M L^2)``,
    ``k4 = alpha/(D L^2)``, ``k5 = M/(lambda+2mu)``, ``k6 = b^2 k5``.
    """

    k1: float
    k2: float
    k3: float
    k4: float
    k5: float
    k6: float

    def __post_init__(self) -> None:
        if self.k1 <= 0.0:
            raise PositivityViolation(f"k1 must be positive, got {self.k1}")
        if self.k3 <= 0.0:
            raise PositivityViolation(f"k3 must be positive, got {self.k3}")
        if self.k4 < 0.0:
            raise PositivityViolation(f"k4 must be nonnegative, got {self.k4}")
        if self.k5 <= 0.0:
            raise PositivityViolation(f"k5 must be positive, got {self.k5}")
        if self.k6 < 0.0:
            raise PositivityViolation(f"k6 must be nonnegative, got {self.k6}")


@dataclass(frozen=True)
class PencilCoefficients:
    """Coefficient ledger of the sixth-order pencil.

    ``C1..C6`` weight the bulk equation, ``B1..B6`` the surface boundary
    equation; ``B1..B4`` coincide with ``C1..C4`` identically.  ``B6``
    carries the load increment and is the only loading-dependent entry.
    ``alpha0..alpha3`` are the default bilinear-form weights under which
    the eigenfunctions are mutually orthogonal (see
    :mod:`sgconsol.expansion` for their resolution and validation).
    """

    C1: float
    C2: float
    C3: float
    C4: float
    C5: float
    C6: float
    B1: float
    B2: float
    B3: float
    B4: float
    B5: float
    B6: float
    alpha0: float
    alpha1: float
    alpha2: float
    alpha3: float

    @property
    def d5(self) -> float:
        """The gap C5 - B5 = k1 + k3*k5*k2^2 (also C6 - C4 companion)."""
        return self.C5 - self.B5

    @property
    def k6(self) -> float:
        """Recoverable group k6 = C6 - C4."""
        return self.C6 - self.C4


@dataclass(frozen=True)
class Regime:
    """Prestress regime classification.

    ``tag`` is one of ``"stable"``, ``"critical"``, ``"unstable"`` from the
    sign of B4; ``threshold`` is the critical prestress lambda + 2*mu in
    physical units when the caller supplies the modulus, else ``None``.
    """

    tag: str
    threshold: float | None = None

    @property
    def is_stable(self) -> bool:
        return self.tag == "stable"


def derive_dimensionless(params: MaterialParams) -> DimensionlessGroups:
    """Build the dimensionless groups from either entry style.

    Raises
    ------
    PositivityViolation
        If the strain-energy positivity conditions fail (already enforced
        on construction of ``params``; re-raised here for derived groups).
    """
    k5 = params.biot_M / params.p_modulus
    k6 = params.biot_b * params.biot_b * k5
    if params.entry_style == "direct":
        return DimensionlessGroups(params.k1, params.k2, params.k3, params.k4, k5, k6)
    L2 = params.depth_L * params.depth_L
    return DimensionlessGroups(
        k1=params.K_ss / (params.p_modulus * L2),
        k2=params.K_sf,
        k3=params.M_sg / (params.biot_M * L2),
        k4=params.darcy_alpha / (params.darcy_D * L2),
        k5=k5,
        k6=k6,
    )


def bilinear_weights_from(
    C1: float, C2: float, C4: float, C6: float, d5: float
) -> tuple[float, float, float, float]:
    """Default orthogonality weights of the pencil bilinear form.

    Obtained by pairing the pencil with the reduced fourth-order operator
    and integrating by parts twice under the six boundary conditions; the
    surviving combination is

        alpha_m = C6 * (C4, C2, C1, 0)_m + d5 * (0, C4, C2, C1)_m

    which is positive in all four slots exactly when B4 > 0.
    """
    return (C4 * C6, C4 * d5 + C2 * C6, C2 * d5 + C1 * C6, C1 * d5)


def compute_coefficients(
    k: DimensionlessGroups, p0_ratio: float, dp_over_bM: float
) -> PencilCoefficients:
    """Assemble the full coefficient ledger (pure algebra, no failure modes).

    Parameters
    ----------
    k : DimensionlessGroups
    p0_ratio : float
        ``p0_ext / (lambda + 2 mu)``.
    dp_over_bM : float
        ``dp_ext / (b M)``.
    """
    d5 = k.k1 + k.k3 * k.k5 * k.k2 * k.k2
    C1 = k.k1 * k.k3
    C4 = 1.0 - p0_ratio
    C2 = k.k1 + k.k3 * k.k5 * (k.k2 + _b_from(k)) ** 2 + k.k3 * C4
    C3 = k.k4 * d5
    C6 = C4 + k.k6
    C5 = k.k4 * C6 + d5
    B5 = k.k4 * C6
    a0, a1, a2, a3 = bilinear_weights_from(C1, C2, C4, C6, d5)
    return PencilCoefficients(
        C1=C1, C2=C2, C3=C3, C4=C4, C5=C5, C6=C6,
        B1=C1, B2=C2, B3=C3, B4=C4, B5=B5, B6=dp_over_bM,
        alpha0=a0, alpha1=a1, alpha2=a2, alpha3=a3,
    )


def _b_from(k: DimensionlessGroups) -> float:
    # k6 = b^2 k5 recovers |b|; the coupling enters C2 through (k2 + b)^2
    # with b >= 0 by convention.
    return (k.k6 / k.k5) ** 0.5


def classify_regime(
    coeffs: PencilCoefficients,
    tol: float = CRITICAL_TOL,
    p_modulus: float | None = None,
) -> Regime:
    """Classify stability from the sign of B4 = 1 - p0/(lambda+2mu).

    ``|B4| <= tol`` maps to critical.  ``p_modulus``, when supplied, is
    recorded as the physical threshold pressure.
    """
    if abs(coeffs.B4) <= tol:
        tag = "critical"
    elif coeffs.B4 > 0.0:
        tag = "stable"
    else:
        tag = "unstable"
    return Regime(tag=tag, threshold=p_modulus)


def coefficients_for(params: MaterialParams) -> PencilCoefficients:
    """Convenience path: params -> groups -> ledger in one call."""
    return compute_coefficients(
        derive_dimensionless(params), params.p0_ratio, params.dp_over_bM
    )
