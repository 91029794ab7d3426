"""Prestress sweep and threshold location.

Oracle: the closed-form crossing B4 = 0 at p0 = lambda + 2 mu.
"""

from __future__ import annotations

import numpy as np
import pytest

import sgconsol as sg
from sgconsol.sweep import first_rate, sweep, threshold

from conftest import reference_params

P_MODULUS = 5.3


@pytest.fixture(scope="module")
def base():
    return reference_params(dp_ext=0.0)


@pytest.fixture(scope="module")
def coarse_sweep(base):
    return sweep(base, np.linspace(4.0, 6.0, 11))


class TestSweep:
    def test_crossing_near_closed_form(self, coarse_sweep):
        est = coarse_sweep.threshold_estimate
        assert est == pytest.approx(P_MODULUS, rel=1e-2)

    def test_sign_coherence(self, coarse_sweep):
        for pt in coarse_sweep.points:
            if abs(pt.B4) > 1e-6 and np.isfinite(pt.lambda1):
                assert np.sign(pt.lambda1) == np.sign(-pt.B4)

    def test_regimes_recorded(self, coarse_sweep):
        tags = [pt.regime for pt in coarse_sweep.points]
        assert tags[0] == "stable" and tags[-1] == "unstable"

    def test_zero_prestress_negative(self):
        assert first_rate(reference_params(p0_ext=0.0, dp_ext=0.0)) < 0

    def test_continuity_smoke(self, coarse_sweep):
        # no jumps beyond 10x the local secant slope times spacing
        pts = [p for p in coarse_sweep.points if np.isfinite(p.lambda1)]
        slopes = [
            abs(b.lambda1 - a.lambda1) / (b.p0 - a.p0)
            for a, b in zip(pts, pts[1:])
        ]
        typical = np.median(slopes)
        assert max(slopes) <= 10.0 * max(typical, 1e-12)

    def test_unsorted_rejected(self, base):
        with pytest.raises(ValueError):
            sweep(base, [5.0, 4.0])

    def test_determinism(self, base):
        r1 = sweep(base, np.linspace(4.8, 5.8, 5))
        r2 = sweep(base, np.linspace(4.8, 5.8, 5))
        assert r1.to_csv() == r2.to_csv()
        assert r1.threshold_estimate == r2.threshold_estimate


class TestThreshold:
    def test_bracketed_refinement(self, base):
        est = threshold(base, (5.0, 5.6), tol=1e-3)
        assert abs(est - P_MODULUS) <= 1e-2

    def test_no_sign_change(self, base):
        with pytest.raises(sg.NoSignChange):
            threshold(base, (4.0, 4.5), tol=1e-3)

    def test_loaded_configuration_equivalent(self):
        # the pencil does not see the load increment: the same threshold
        p = reference_params(dp_ext=1e-3)
        est = threshold(p, (5.0, 5.6), tol=1e-3)
        assert abs(est - P_MODULUS) <= 1e-2
