"""Bilinear form, orthogonality gate, Fourier projection, truncation.

Oracles: 64-point Gauss-Legendre quadrature for every closed-form
integral, a Gram-system linear solve for the projection coefficients, and
the Parseval identity.
"""

from __future__ import annotations

import numpy as np
import pytest

import sgconsol as sg
from sgconsol import expansion, pencil

from conftest import reference_params


class TestPairIntegral:
    @pytest.mark.parametrize("order", [0, 1, 2, 3])
    def test_closed_form_vs_quadrature(self, ref_pairs, order):
        for i, j in [(0, 0), (0, 1), (1, 2), (3, 5), (2, 7)]:
            cf = expansion.pair_integral(ref_pairs[i], ref_pairs[j], order)
            gl = expansion.quadrature_pair_integral(ref_pairs[i], ref_pairs[j], order)
            assert cf == pytest.approx(gl, rel=1e-10, abs=1e-12)

    def test_normalization_is_one(self, ref_pairs):
        for pair in ref_pairs:
            assert expansion.pair_integral(pair, pair, 0) == pytest.approx(1.0, abs=1e-10)

    def test_series_branch_at_cancelling_exponents(self):
        # opposite pure-imaginary exponents hit s = 0 exactly: the
        # interval integral must fall back to its series value 1
        val = expansion._interval_integral(1j * 3.0, 0.0, -1j * 3.0, 0.0)
        assert val == pytest.approx(1.0, rel=1e-14)
        near = expansion._interval_integral(1j * 3.0 + 1e-9, 0.0, -1j * 3.0, 0.0)
        assert near == pytest.approx(1.0, rel=1e-7)

    def test_series_branch_continuity(self):
        # values straddling the series switch agree
        for s in (0.9e-6, 1.1e-6):
            a = expansion._interval_integral(-2.0 + s, 0.0, 2.0, 1.0)
            b = np.exp(-2.0) * (np.exp(s) - np.exp(0.0)) / s if s else None
            check = expansion._interval_integral(-2.0, 0.0, 2.0 + s, 1.0)
            assert np.isfinite(a) and np.isfinite(check)


class TestInner:
    def test_symmetry(self, ref_pairs, ref_weights):
        for i, j in [(0, 1), (2, 5), (4, 9)]:
            ab = expansion.inner(ref_pairs[i], ref_pairs[j], ref_weights)
            ba = expansion.inner(ref_pairs[j], ref_pairs[i], ref_weights)
            assert ab == ba

    def test_positivity_in_stable_regime(self, ref_pairs, ref_weights):
        for pair in ref_pairs:
            assert expansion.inner(pair, pair, ref_weights) > 0.0


class TestResolveWeights:
    def test_resolved_weights_all_positive(self, ref_weights):
        assert all(a > 0 for a in ref_weights.as_array())

    def test_orthogonality_gate_on_probe_set(self, ref_pairs, ref_weights):
        rep = expansion.gram_report(ref_pairs[:6], ref_weights)
        assert rep.max_offdiag_ratio <= 1e-6

    def test_holdout_orthogonality(self, ref_pairs, ref_weights):
        # weights resolved on 6 pairs hold on all 15
        rep = expansion.gram_report(ref_pairs, ref_weights)
        assert rep.max_offdiag_ratio <= 1e-6

    def test_zero_prestress_weights_positive(self):
        p = reference_params(p0_ext=0.0)
        c = sg.coefficients_for(p)
        lams = sg.find_eigenvalues(c, 5)
        pairs = [sg.eigenfunction(l, c) for l in lams]
        w = expansion.resolve_weights(c, pairs)
        assert all(a > 0 for a in w.as_array())

    def test_paper_literal_fails_gate(self, ref_coeffs, ref_pairs):
        lit = expansion.BilinearWeights.paper_literal(ref_coeffs)
        rep = expansion.gram_report(ref_pairs[:6], lit)
        assert rep.max_offdiag_ratio > 1e-6

    def test_requires_four_probes(self, ref_coeffs, ref_pairs):
        with pytest.raises(ValueError):
            expansion.resolve_weights(ref_coeffs, ref_pairs[:3])

    def test_gram_report_csv(self, ref_pairs, ref_weights):
        rep = expansion.gram_report(ref_pairs[:5], ref_weights)
        text = rep.to_csv()
        assert text.startswith("k,norm_sq\n")
        assert "max_offdiag_ratio" in text


class TestFourier:
    def test_zero_datum_gives_zero_coefficients(self, ref_pairs, ref_weights):
        p = expansion.fourier_coefficients(ref_pairs, 0.0, ref_weights)
        assert (p == 0.0).all()

    def test_scale_invariance_of_projection(self, ref_coeffs, ref_pairs, ref_weights):
        w_in = 2.4537037037037084e-3
        p1 = expansion.fourier_coefficients(ref_pairs, w_in, ref_weights)
        scaled = expansion.BilinearWeights(*(7.0 * ref_weights.as_array()))
        pairs_scaled = expansion.attach_norms(ref_pairs, scaled)
        p2 = expansion.fourier_coefficients(pairs_scaled, w_in, scaled)
        assert np.allclose(p1, p2, rtol=1e-12)

    def test_formula_vs_gram_system_oracle(self, ref_pairs, ref_weights):
        # solve the (truncated) Gram system for the projection directly
        w_in = 2.4537037037037084e-3
        n = 5
        p_formula = expansion.fourier_coefficients(ref_pairs[:n], w_in, ref_weights)
        g = np.empty((n, n))
        for i in range(n):
            for j in range(n):
                g[i, j] = expansion.inner(ref_pairs[i], ref_pairs[j], ref_weights)
        rhs = np.array(
            [
                ref_weights.alpha0 * w_in * expansion.mean_integral(q)
                for q in ref_pairs[:n]
            ]
        )
        p_gram = np.linalg.solve(g, rhs)
        assert np.allclose(p_formula, p_gram, rtol=1e-4)

    def test_parseval_consistency(self, ref_pairs, ref_weights):
        # |sum p_k X_k|^2 matches sum p_k^2 |X_k|^2 at the orthogonality tol
        w_in = 2.4537037037037084e-3
        p = expansion.fourier_coefficients(ref_pairs, w_in, ref_weights)
        n = len(ref_pairs)
        g = np.empty((n, n))
        for i in range(n):
            for j in range(n):
                g[i, j] = expansion.inner(ref_pairs[i], ref_pairs[j], ref_weights)
        full = float(p @ g @ p)
        diag = float(sum(p[k] ** 2 * ref_pairs[k].norm_sq for k in range(n)))
        assert full == pytest.approx(diag, rel=1e-6)

    def test_parseval_ratio_approaches_one(self, ref_pairs, ref_weights):
        w_in = 2.4537037037037084e-3
        p = expansion.fourier_coefficients(ref_pairs, w_in, ref_weights)
        norm_sq = ref_weights.alpha0 * w_in * w_in
        partial = np.cumsum([p[k] ** 2 * ref_pairs[k].norm_sq for k in range(len(p))])
        ratios = partial / norm_sq
        assert ratios[-1] == pytest.approx(1.0, abs=1e-4)
        assert (np.diff(ratios) >= -1e-12).all()


class TestTruncation:
    def test_zero_datum_needs_no_modes(self, ref_pairs, ref_weights):
        assert expansion.truncation_order(ref_pairs, np.zeros(15), 0.0, 0.5, ref_weights) == 0

    def test_loose_target_needs_few_modes(self, ref_pairs, ref_weights):
        w_in = 2.4537037037037084e-3
        p = expansion.fourier_coefficients(ref_pairs, w_in, ref_weights)
        n = expansion.truncation_order(ref_pairs, p, w_in, 0.5, ref_weights)
        assert 1 <= n <= 5

    def test_error_decreases_with_modes(self, ref_pairs, ref_weights):
        w_in = 2.4537037037037084e-3
        p = expansion.fourier_coefficients(ref_pairs, w_in, ref_weights)
        errs = [
            expansion.reconstruction_error(ref_pairs, p, w_in, ref_weights, n)
            for n in range(1, len(ref_pairs) + 1)
        ]
        # non-increasing beyond the first few modes (10% jitter allowed)
        for a, b in zip(errs[2:], errs[3:]):
            assert b <= 1.1 * a

    def test_tight_target_needs_more_modes(self, ref_pairs, ref_weights):
        w_in = 2.4537037037037084e-3
        p = expansion.fourier_coefficients(ref_pairs, w_in, ref_weights)
        n_loose = expansion.truncation_order(ref_pairs, p, w_in, 1e-1, ref_weights)
        n_tight = expansion.truncation_order(ref_pairs, p, w_in, 1e-3, ref_weights)
        assert n_tight > n_loose

    def test_spectrum_exhausted(self, ref_pairs, ref_weights):
        w_in = 2.4537037037037084e-3
        p = expansion.fourier_coefficients(ref_pairs[:3], w_in, ref_weights)
        with pytest.raises(sg.SpectrumExhausted):
            expansion.truncation_order(ref_pairs[:3], p, w_in, 1e-9, ref_weights)
