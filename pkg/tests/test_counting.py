import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lossybs import (
    FrequencyGrid,
    GaussianSeparable,
    OutcomeDistribution,
    ScatteringMatrix,
    SpdcSincGaussian,
    alpha_window,
    hom_scan,
    map_at,
    max_coincidence,
    number_moments,
    oracle_distribution,
    outcome_probabilities,
    parameter_map,
    programmability,
    symmetric_probabilities,
)
from conftest import LOSSLESS_BALANCED, passive_matrices, symmetric_passive

QUARTER = ScatteringMatrix(0.5, 0.5, 0.5, 0.5)


def brute_p11_range(t, r, n=20001):
    """min and max of p11 (I = 1) over a fine alpha grid restricted to the passive window."""
    window = alpha_window(ScatteringMatrix.symmetric(t, r))
    alphas = math.pi + np.linspace(-1.0, 1.0, n) * window.half_width
    p11 = t**4 + r**4 + 2 * t * t * r * r * np.cos(alphas)
    return p11.min(), p11.max()


class TestMoments:
    def test_hom_moments(self):
        m = number_moments(LOSSLESS_BALANCED, 1.0)
        assert (m.n1, m.n2) == pytest.approx((1.0, 1.0), abs=1e-15)
        assert (m.n1n1m1, m.n2n2m1) == pytest.approx((1.0, 1.0), abs=1e-15)
        assert m.n1n2 == pytest.approx(0.0, abs=1e-15)

    @given(passive_matrices())
    def test_distinguishable_has_no_cross_term(self, S):
        m = number_moments(S, 0.0)
        assert m.n1n2 == pytest.approx(S.t**2 * S.tau**2 + S.r**2 * S.rho**2, abs=1e-15)

    def test_quarter_alpha_zero(self):
        assert number_moments(QUARTER, 1.0).n1n2 == pytest.approx(0.25, abs=1e-15)

    def test_second_port_pairs_tau_with_r(self):
        # asymmetric device: port 2 collects r from input 1 and tau from input 2
        S = ScatteringMatrix(0.3, 0.6, 0.5, 0.2, 0.4, 2.9)
        m = number_moments(S, 1.0)
        assert m.n2n2m1 == pytest.approx(2 * 0.25 * 0.36 * 2, abs=1e-15)
        assert m.n1n1m1 == pytest.approx(2 * 0.09 * 0.04 * 2, abs=1e-15)
        assert 0.5 * m.n2n2m1 == pytest.approx(oracle_distribution(S, 1.0).p02, abs=1e-12)

    def test_rejects_non_passive(self):
        with pytest.raises(ValueError, match="passive"):
            number_moments(ScatteringMatrix(1, 1, 1, 1), 1.0)

    def test_rejects_large_overlap(self):
        with pytest.raises(ValueError):
            number_moments(QUARTER, 1.01)
        number_moments(QUARTER, 1.0 + 1e-9)

    def test_dict_round_trip(self):
        from lossybs import NumberMoments

        m = number_moments(QUARTER, 0.4)
        assert NumberMoments.from_dict(m.to_dict()) == m


class TestOutcomeProbabilities:
    def test_quarter_dip(self):
        p = outcome_probabilities(QUARTER.with_alpha(math.pi), 1.0)
        assert p.as_tuple() == pytest.approx((0.125, 0.125, 0.0, 0.25, 0.25, 0.25), abs=1e-15)

    @pytest.mark.parametrize("I", [0.0, 0.3, 1.0, 0.5j])
    def test_identity(self, I):
        p = outcome_probabilities(ScatteringMatrix(1, 0, 1, 0), I)
        assert p.as_tuple() == pytest.approx((0, 0, 1, 0, 0, 0), abs=1e-15)

    def test_all_zero(self):
        p = outcome_probabilities(ScatteringMatrix(0, 0, 0, 0), 0.7)
        assert p.as_tuple() == pytest.approx((0, 0, 0, 0, 0, 1), abs=1e-15)

    def test_hom_zero(self):
        assert outcome_probabilities(LOSSLESS_BALANCED, 1.0).p11 <= 1e-12

    def test_complex_overlap_policy(self):
        S = ScatteringMatrix(0.5, 0.5, 0.5, 0.5, 0.3, 1.1)
        I = 0.4 + 0.3j
        p = outcome_probabilities(S, I)
        assert p.p20 == pytest.approx(0.5 * 2 * 0.0625 * 1.4, abs=1e-15)
        cross = (I * np.exp(1j * S.alpha)).real
        assert p.p11 == pytest.approx(0.125 + 0.125 * cross, abs=1e-15)
        assert p.total() == pytest.approx(1.0, abs=1e-12)

    def test_clamping_keeps_raw(self):
        d = OutcomeDistribution.from_raw([-1e-13, 0.5, 0.5, 0, 0, 1e-13])
        assert d.p20 == 0.0 and d.raw[0] == -1e-13
        with pytest.raises(ValueError, match="p20"):
            OutcomeDistribution.from_raw([-1e-9, 0.5, 0.5, 0, 0, 0])

    def test_dict_round_trip(self):
        p = outcome_probabilities(QUARTER, 0.4)
        assert OutcomeDistribution.from_dict(p.to_dict()) == p

    @given(passive_matrices(), st.floats(0.0, 1.0))
    @settings(max_examples=300)
    def test_normalized_and_nonnegative(self, S, I):
        p = outcome_probabilities(S, I)
        assert abs(p.total() - 1.0) <= 1e-12
        assert min(p.raw) >= -1e-12

    @given(passive_matrices(), st.floats(0.0, 2 * math.pi), st.floats(0.0, 1.0))
    @settings(max_examples=300)
    def test_normalized_for_complex_overlap(self, S, arg, mag):
        # no amplitude produces a complex overlap, so an arbitrary phase may
        # drive a probability negative; that must be rejected, never clamped
        I = mag * complex(math.cos(arg), math.sin(arg))
        try:
            p = outcome_probabilities(S, I)
        except ValueError as exc:
            assert "outside [0, 1]" in str(exc) and I.imag != 0.0
        else:
            assert abs(math.fsum(p.raw) - 1.0) <= 1e-12

    def test_unphysical_complex_overlap_rejected(self):
        S = ScatteringMatrix(0.5160425119921929, 0.5160425119921929, 0.5160425119921929,
                             0.5160425119921929, 0.0, 1.0)
        outcome_probabilities(S, 1.0)
        with pytest.raises(ValueError, match="p00"):
            outcome_probabilities(S, complex(math.cos(3.0), math.sin(3.0)))

    @given(passive_matrices(), st.floats(0.0, 1.0))
    @settings(max_examples=300)
    def test_affine_in_overlap(self, S, lam):
        p0 = outcome_probabilities(S, 0.0).as_array()
        p1 = outcome_probabilities(S, 1.0).as_array()
        p = outcome_probabilities(S, lam).as_array()
        assert np.max(np.abs(p - (lam * p1 + (1 - lam) * p0))) <= 1e-14

    @given(passive_matrices(), st.floats(0.0, 1.0), st.floats(-1.0, 1.0))
    @settings(max_examples=300)
    def test_bunching_independent_of_alpha(self, S, I, u):
        w = alpha_window(S)
        other = S.with_alpha(math.pi + u * w.half_width)
        a, b = outcome_probabilities(S, I), outcome_probabilities(other, I)
        assert (a.p20, a.p02) == (b.p20, b.p02)


class TestSymmetric:
    def test_peak_at_alpha_zero(self):
        assert symmetric_probabilities(0.5, 0.5, 0.0, 1.0).p11 == pytest.approx(0.25, abs=1e-15)

    def test_baseline(self):
        assert symmetric_probabilities(0.5, 0.5, 1.234, 0.0).p11 == pytest.approx(0.125, abs=1e-15)

    def test_lossless_curve(self):
        t, r = math.sqrt(0.3), math.sqrt(0.7)
        assert symmetric_probabilities(t, r, math.pi, 1.0).p11 == pytest.approx(0.16, abs=1e-12)

    def test_rejects_outside_window(self):
        with pytest.raises(ValueError):
            symmetric_probabilities(0.7, 0.7, 0.0, 1.0)

    @given(symmetric_passive(), st.floats(0.0, 1.0))
    @settings(max_examples=400)
    def test_agrees_with_general_formula(self, tra, I):
        t, r, alpha = tra
        a = symmetric_probabilities(t, r, alpha, I).as_array()
        b = outcome_probabilities(ScatteringMatrix.symmetric(t, r, alpha), I).as_array()
        assert np.max(np.abs(a - b)) <= 1e-14

    @given(st.floats(0.0, 0.5), st.floats(0.0, 1.0))
    def test_range_over_full_window(self, t, frac):
        r = frac * (1.0 - t)
        lo, hi = brute_p11_range(t, r, n=2001)
        assert lo == pytest.approx((t * t - r * r) ** 2, abs=1e-12)
        assert hi == pytest.approx((t * t + r * r) ** 2, abs=1e-12)


class TestExtremes:
    def test_lossless_max(self):
        t, r = math.sqrt(0.3), math.sqrt(0.7)
        assert max_coincidence(t, r, t, r) == pytest.approx(0.16, abs=1e-12)

    def test_full_window_max(self):
        assert max_coincidence(0.5, 0.5, 0.5, 0.5) == pytest.approx(0.25, abs=1e-15)

    def test_empty_window_raises(self):
        with pytest.raises(ValueError):
            max_coincidence(0.9, 0.1, 0.1, 0.9)

    @pytest.mark.parametrize("t2,r2", [(0.7, 0.2), (0.4, 0.45), (0.3, 0.3), (0.1, 0.5), (0.6, 0.38)])
    def test_max_against_alpha_grid(self, t2, r2):
        t, r = math.sqrt(t2), math.sqrt(r2)
        _, hi = brute_p11_range(t, r, n=200001)
        assert max_coincidence(t, r, t, r) == pytest.approx(hi, abs=1e-9)

    @pytest.mark.parametrize("seed", range(4))
    def test_asymmetric_max_against_oracle_scan(self, seed):
        rng = np.random.default_rng(seed)
        while True:
            t, r, tau, rho = rng.uniform(0.1, 0.8, 4)
            S = ScatteringMatrix(t, r, tau, rho, 0.0, math.pi)
            w = alpha_window(S)
            if not w.empty and not w.full:
                break
        alphas = math.pi + np.linspace(-1, 1, 401) * w.half_width
        best = max(oracle_distribution(S.with_alpha(a), 1.0).p11 for a in alphas)
        assert max_coincidence(t, r, tau, rho) == pytest.approx(best, abs=1e-5)
        assert max_coincidence(t, r, tau, rho) >= best - 1e-12

    def test_programmability_spot_value(self):
        t, r = 0.5, 0.25
        assert programmability(t, r) == pytest.approx(4 * 0.25 * 0.0625 / (0.0625 + 0.00390625), abs=1e-15)
        assert programmability(t, r) == pytest.approx(0.941, abs=1e-3)

    def test_programmability_against_oracle_scan(self):
        # range of oracle p11 over alpha, divided by the distinguishable baseline
        for t2, r2 in ((0.25, 0.0625), (0.5, 0.3), (0.2, 0.2)):
            t, r = math.sqrt(t2), math.sqrt(r2)
            w = alpha_window(ScatteringMatrix.symmetric(t, r))
            alphas = math.pi + np.linspace(-1, 1, 721) * w.half_width
            p11 = [oracle_distribution(ScatteringMatrix.symmetric(t, r, a), 1.0).p11 for a in alphas]
            base = oracle_distribution(ScatteringMatrix.symmetric(t, r, math.pi), 0.0).p11
            assert programmability(t, r) == pytest.approx((max(p11) - min(p11)) / base, abs=1e-4)

    @given(st.floats(0.01, 0.5))
    def test_balanced_lossy_is_maximal(self, t):
        assert programmability(t, t) == pytest.approx(2.0, abs=1e-12)

    @given(st.floats(0.05, 0.95))
    def test_lossless_has_none(self, t2):
        assert programmability(math.sqrt(t2), math.sqrt(1 - t2)) == pytest.approx(0.0, abs=1e-12)

    def test_programmability_undefined_at_origin(self):
        with pytest.raises(ValueError):
            programmability(0.0, 0.0)


class TestMaps:
    def test_shapes_and_centres(self):
        m = parameter_map("tunability", 4)
        np.testing.assert_allclose(m.t2, [0.125, 0.375, 0.625, 0.875])
        assert m.values.shape == (4, 4)
        assert m.forbidden[3, 3] and not m.forbidden[0, 0]
        assert np.isnan(m.values[3, 3])

    def test_tunability_cells(self):
        m = parameter_map("tunability", 200)
        assert m.forbidden[m.cell_of(0.9, 0.9)]
        assert m.values[m.cell_of(0.2, 0.2)] == pytest.approx(2 * math.pi, abs=1e-12)
        assert map_at("tunability", 0.25, 0.25) == pytest.approx(2 * math.pi, abs=1e-12)
        assert map_at("tunability", 0.5, 0.5) == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("kind", ["tunability", "max_coincidence", "programmability"])
    def test_cells_match_scalar_functions(self, kind):
        m = parameter_map(kind, 20)
        for i in range(0, 20, 3):
            for j in range(0, 20, 4):
                if m.forbidden[i, j]:
                    continue
                t, r = math.sqrt(m.t2[i]), math.sqrt(m.r2[j])
                if kind == "tunability":
                    expected = alpha_window(ScatteringMatrix.symmetric(t, r)).delta_alpha
                elif kind == "max_coincidence":
                    expected = max_coincidence(t, r, t, r)
                else:
                    expected = programmability(t, r)
                assert m.values[i, j] == pytest.approx(expected, abs=1e-12)

    def test_rows_mark_forbidden(self):
        rows = list(parameter_map("programmability", 3).rows())
        assert len(rows) == 9
        bad = [row for row in rows if row[3]]
        assert bad and all(row[2] is None for row in bad)

    def test_bad_arguments(self):
        with pytest.raises(ValueError):
            parameter_map("visibility", 10)
        with pytest.raises(ValueError):
            parameter_map("tunability", 1)
        with pytest.raises(ValueError):
            map_at("tunability", 0.8, 0.8)

    @pytest.mark.parametrize("kind", ["tunability", "max_coincidence", "programmability"])
    def test_worker_count_irrelevant(self, kind):
        a = parameter_map(kind, 64, workers=1)
        b = parameter_map(kind, 64, workers=3)
        np.testing.assert_array_equal(a.values, b.values)
        np.testing.assert_array_equal(a.forbidden, b.forbidden)


class TestHomScan:
    def test_lossless_gaussian(self):
        grid = FrequencyGrid(3.0, 17.0, 257)
        curve = hom_scan(LOSSLESS_BALANCED, GaussianSeparable(10.0, 10.0), grid, [0.0, 12.0, -12.0])
        assert curve.p11[0] <= 1e-12
        np.testing.assert_allclose(curve.p11[1:], 0.5, atol=1e-6)
        assert curve.converged.all()

    def test_quarter_alpha_half_pi(self):
        grid = FrequencyGrid(4.0, 16.0, 257)
        psi = SpdcSincGaussian(20.0, 2.0, 1.0, 2 * math.pi, -2 * math.pi)
        S = QUARTER.with_alpha(math.pi / 2)
        curve = hom_scan(S, psi, grid, [0.0])
        assert curve.p11[0] == pytest.approx(0.125, abs=1e-12)
        assert curve.amplitude["kind"] == "spdc"
        assert curve.tau_c > 0

    def test_normalizes_input(self):
        grid = FrequencyGrid(3.0, 17.0, 257)
        curve = hom_scan(QUARTER.with_alpha(math.pi), GaussianSeparable(10.0, 10.0, scale=5.0), grid, [0.0])
        assert curve.p11[0] == pytest.approx(0.0, abs=1e-9)

    def test_rejects_non_passive(self):
        grid = FrequencyGrid(3.0, 17.0, 257)
        with pytest.raises(ValueError):
            hom_scan(ScatteringMatrix(1, 1, 1, 1), GaussianSeparable(10.0, 10.0), grid, [0.0])
