"""Coefficient ledger: independent arithmetic oracle, positivity guards,
regime classification, and the scaling invariances."""

from __future__ import annotations

import numpy as np
import pytest

import sgconsol as sg
from sgconsol.material import bilinear_weights_from

from conftest import reference_params

# Hand-coded arithmetic oracle for the reference clay set, computed
# independently of the library (frozen values).
LEDGER = {
    "k5": 0.9433962264150944,
    "k6": 0.9433962264150944,
    "C1": 0.0001,
    "C2": 0.020378301886792453,
    "C3": 0.00010000943396226415,
    "C4": 0.07547169811320742,
    "C5": 0.020189622641509433,
    "C6": 1.0188679245283017,
    "B5": 0.010188679245283017,
    "B6": 0.0002,
    "alpha0": 0.07689569241723018,
    "alpha1": 0.021517586329654673,
    "alpha2": 0.00030568903613385545,
    "alpha3": 1.0000943396226415e-06,
}


def rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


class TestLedgerOracle:
    def test_groups_match_oracle(self, ref_params):
        k = sg.derive_dimensionless(ref_params)
        assert k.k1 == 1e-2 and k.k2 == 1e-2 and k.k3 == 1e-2 and k.k4 == 1e-2
        assert rel(k.k5, LEDGER["k5"]) <= 1e-12
        assert rel(k.k6, LEDGER["k6"]) <= 1e-12

    def test_full_ledger_matches_oracle(self, ref_coeffs):
        for name in ("C1", "C2", "C3", "C4", "C5", "C6", "B5", "B6",
                     "alpha0", "alpha1", "alpha2", "alpha3"):
            assert rel(getattr(ref_coeffs, name), LEDGER[name]) <= 1e-12, name

    def test_boundary_bulk_identities_bitwise(self, ref_coeffs):
        c = ref_coeffs
        assert c.B1 == c.C1 and c.B2 == c.C2 and c.B3 == c.C3 and c.B4 == c.C4

    def test_unloaded_unstressed(self):
        p = reference_params(p0_ext=0.0, dp_ext=0.0)
        c = sg.coefficients_for(p)
        assert c.C4 == 1.0
        assert c.B6 == 0.0
        assert rel(c.C6, 1.0 + LEDGER["k6"]) <= 1e-15

    def test_k4_zero_kills_rate_coefficients(self):
        p = reference_params(k4=0.0)
        c = sg.coefficients_for(p)
        assert c.C3 == 0.0
        assert rel(c.C5, c.d5) <= 1e-15
        assert c.B5 == 0.0

    def test_b_zero_gives_k6_zero(self):
        p = reference_params(biot_b=0.0, dp_ext=0.0)
        k = sg.derive_dimensionless(p)
        assert k.k6 == 0.0

    def test_b_zero_rejects_load(self):
        p = reference_params(biot_b=0.0, dp_ext=1e-3)
        with pytest.raises(sg.PositivityViolation):
            _ = p.dp_over_bM


class TestEntryPaths:
    def test_physical_path_round_trip(self):
        # invert the group formulas by hand for one parameter set
        L = 2.0
        p2mu = 5.3
        M = 5.0
        K_ss = 1e-2 * p2mu * L**2
        M_sg = 1e-2 * M * L**2
        D = 3.0
        alpha = 1e-2 * D * L**2
        phys = sg.MaterialParams(
            lambda_lame=2.3, mu_lame=1.5, biot_M=5.0, biot_b=1.0,
            K_ss=K_ss, M_sg=M_sg, K_sf=1e-2, darcy_D=D, darcy_alpha=alpha,
            depth_L=L, p0_ext=4.9, dp_ext=1e-3,
        )
        direct = reference_params()
        kp = sg.derive_dimensionless(phys)
        kd = sg.derive_dimensionless(direct)
        for name in ("k1", "k2", "k3", "k4", "k5", "k6"):
            assert rel(getattr(kp, name), getattr(kd, name)) <= 1e-14, name

    def test_mixed_entry_rejected(self):
        with pytest.raises(sg.PositivityViolation):
            sg.MaterialParams(
                lambda_lame=2.3, mu_lame=1.5, biot_M=5.0,
                k1=1e-2, k2=1e-2, k3=1e-2, k4=1e-2, K_ss=1.0,
            )

    def test_missing_entry_rejected(self):
        with pytest.raises(sg.PositivityViolation):
            sg.MaterialParams(lambda_lame=2.3, mu_lame=1.5, biot_M=5.0)


class TestPositivity:
    @pytest.mark.parametrize(
        "overrides, needle",
        [
            (dict(lambda_lame=-4.0, mu_lame=1.0), "lambda"),
            (dict(biot_M=-1.0), "M must"),
            (dict(k1=-1e-3), "k1"),
            (dict(k3=0.0), "k3"),
            (dict(k4=-1e-3), "k4"),
            (dict(mf0=0.0), "mf0"),
        ],
    )
    def test_violations_name_the_condition(self, overrides, needle):
        with pytest.raises(sg.PositivityViolation, match=needle):
            reference_params(**overrides)

    def test_physical_negative_moduli(self):
        with pytest.raises(sg.PositivityViolation, match="K_ss"):
            sg.MaterialParams(
                lambda_lame=2.3, mu_lame=1.5, biot_M=5.0,
                K_ss=-1.0, M_sg=1.0, K_sf=0.0, darcy_D=1.0,
                darcy_alpha=0.0, depth_L=1.0,
            )


class TestRegime:
    def test_reference_is_stable(self, ref_coeffs, ref_params):
        r = sg.classify_regime(ref_coeffs, p_modulus=ref_params.p_modulus)
        assert r.tag == "stable"
        assert r.threshold == pytest.approx(5.3)

    def test_threshold_prestress_is_critical(self):
        p = reference_params(p0_ext=5.3, dp_ext=0.0)
        assert sg.classify_regime(sg.coefficients_for(p)).tag == "critical"

    def test_supercritical_is_unstable(self):
        p = reference_params(p0_ext=6.0)
        assert sg.classify_regime(sg.coefficients_for(p)).tag == "unstable"

    def test_rescaling_invariance(self):
        # common positive rescaling of all pressures leaves everything
        s = 7.25
        base = reference_params()
        scaled = reference_params(
            lambda_lame=2.3 * s, mu_lame=1.5 * s, biot_M=5.0 * s,
            p0_ext=4.9 * s, dp_ext=1e-3 * s,
        )
        cb = sg.coefficients_for(base)
        cs = sg.coefficients_for(scaled)
        for name in ("C1", "C2", "C3", "C4", "C5", "C6", "B5", "B6"):
            assert rel(getattr(cs, name), getattr(cb, name)) <= 1e-12, name
        assert sg.classify_regime(cs).tag == sg.classify_regime(cb).tag


class TestWeightPositivity:
    def test_alpha_positive_iff_stable(self):
        rng = np.random.default_rng(20240811)
        for _ in range(400):
            lam_ = rng.uniform(0.2, 6.0)
            mu_ = rng.uniform(0.2, 4.0)
            M = rng.uniform(0.5, 9.0)
            b = rng.uniform(0.0, 1.2)
            ks = 10.0 ** rng.uniform(-4, -0.5, size=4)
            ratio = rng.uniform(-0.5, 1.8)
            p2mu = lam_ + 2 * mu_
            p = sg.MaterialParams(
                lambda_lame=lam_, mu_lame=mu_, biot_M=M, biot_b=b,
                k1=ks[0], k2=ks[1], k3=ks[2], k4=ks[3],
                p0_ext=ratio * p2mu, dp_ext=0.0,
            )
            c = sg.coefficients_for(p)
            # the boundary/bulk identities hold bit-for-bit on every draw
            assert c.B1 == c.C1 and c.B2 == c.C2 and c.B3 == c.C3 and c.B4 == c.C4
            alphas = (c.alpha0, c.alpha1, c.alpha2, c.alpha3)
            if c.B4 > 0:
                assert all(a > 0 for a in alphas)
            elif c.B4 < 0:
                assert any(a <= 0 for a in alphas)

    def test_weight_formula_consistency(self, ref_coeffs):
        # c.d5 is recovered by the C5 - B5 subtraction, so match to rounding
        c = ref_coeffs
        a = bilinear_weights_from(c.C1, c.C2, c.C4, c.C6, c.d5)
        for got, want in zip(a, (c.alpha0, c.alpha1, c.alpha2, c.alpha3)):
            assert rel(got, want) <= 1e-12
