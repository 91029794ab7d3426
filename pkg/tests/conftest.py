"""Shared fixtures: the reference clay data set and its solved spectrum.

The heavy eigen-solves are session-scoped so the whole suite pays for them
once.
"""

from __future__ import annotations

import numpy as np
import pytest

import sgconsol as sg
from sgconsol import expansion, pencil


def reference_params(**overrides) -> sg.MaterialParams:
    """Water-saturated clay moduli with trial second-gradient groups and
    the loaded, prestressed configuration used throughout the suite."""
    kwargs = dict(
        lambda_lame=2.3,
        mu_lame=1.5,
        biot_M=5.0,
        biot_b=1.0,
        k1=1e-2,
        k2=1e-2,
        k3=1e-2,
        k4=1e-2,
        p0_ext=4.9,
        dp_ext=1e-3,
    )
    kwargs.update(overrides)
    return sg.MaterialParams(**kwargs)


@pytest.fixture(scope="session")
def ref_params() -> sg.MaterialParams:
    return reference_params()


@pytest.fixture(scope="session")
def ref_coeffs(ref_params) -> sg.PencilCoefficients:
    return sg.coefficients_for(ref_params)


@pytest.fixture(scope="session")
def ref_eigenvalues(ref_coeffs) -> np.ndarray:
    return sg.find_eigenvalues(ref_coeffs, 15)


@pytest.fixture(scope="session")
def ref_pairs(ref_coeffs, ref_eigenvalues) -> tuple[pencil.Eigenpair, ...]:
    """First 15 eigenpairs, norms attached under the resolved weights."""
    pairs = [sg.eigenfunction(lam, ref_coeffs) for lam in ref_eigenvalues]
    w = expansion.resolve_weights(ref_coeffs, pairs[:6])
    return expansion.attach_norms(pairs, w)


@pytest.fixture(scope="session")
def ref_weights(ref_coeffs, ref_pairs) -> expansion.BilinearWeights:
    return expansion.resolve_weights(ref_coeffs, ref_pairs[:6])


@pytest.fixture(scope="session")
def ref_field(ref_params) -> sg.SolutionField:
    return sg.solve(ref_params)


@pytest.fixture(scope="session")
def ref_field_fine(ref_params) -> sg.SolutionField:
    """40-mode series for very-small-time profiles (t ~ 1e-3)."""
    return sg.solve(ref_params, modes=40)
