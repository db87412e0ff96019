import math

import numpy as np
import pytest
from scipy import integrate

from edsense.errors import ConditioningError, DomainError, ScaleGapWarning
from edsense.gamma_mixture import (
    GammaComponent,
    GammaMixture,
    merge_equal_scales,
    min_relative_scale_gap,
    mixture_cdf,
    mixture_mgf,
    mixture_pdf,
    xi_coefficients,
)

from oracles import dkw_band, mixture_pdf_direct, xi_by_linear_solve


def random_mixture(rng, max_components=6, max_shape=5, min_gap=0.15):
    """Well-separated random mixture (scale ratios within [0.1, 10])."""
    while True:
        L = int(rng.integers(1, max_components + 1))
        scales = 10.0 ** rng.uniform(-1, 1, size=L)
        if min_relative_scale_gap(scales) > min_gap:
            break
    shapes = rng.integers(1, max_shape + 1, size=L)
    offset = float(rng.uniform(0.0, 2.0))
    return GammaMixture.from_components(
        [GammaComponent(int(a), float(b)) for a, b in zip(shapes, scales)], offset
    )


class TestMergeEqualScales:
    def test_identical_scales_add_shapes(self):
        out = merge_equal_scales([GammaComponent(1, 0.5), GammaComponent(2, 0.5)])
        assert out == [GammaComponent(3, 0.5)]

    def test_distinct_scales_untouched(self):
        comps = [GammaComponent(1, 0.5), GammaComponent(1, 0.7)]
        assert merge_equal_scales(comps) == comps

    def test_within_tolerance_merged(self):
        out = merge_equal_scales(
            [GammaComponent(1, 0.5), GammaComponent(1, 0.5 * (1 + 1e-12))]
        )
        assert out == [GammaComponent(2, 0.5)]


class TestXiCoefficients:
    def test_single_component_is_pure_gamma(self):
        mix = GammaMixture((GammaComponent(3, 0.5),))
        xi = xi_coefficients(mix)
        assert xi.value(0, 3) == 1.0
        assert xi.value(0, 1) == 0.0 and xi.value(0, 2) == 0.0

    def test_hypoexponential_pair(self):
        # two exponentials, scales 2 and 1: density exp(-y/2) - exp(-y)
        mix = GammaMixture((GammaComponent(1, 2.0), GammaComponent(1, 1.0)))
        xi = xi_coefficients(mix)
        assert xi.value(0, 1) == pytest.approx(2.0, abs=1e-14)
        assert xi.value(1, 1) == pytest.approx(-1.0, abs=1e-14)
        for y in np.linspace(0.0, 12.0, 50):
            ref = math.exp(-y / 2.0) - math.exp(-y)
            assert mixture_pdf(mix, xi, y) == pytest.approx(ref, abs=1e-12)

    def test_two_component_table_exact(self):
        # shapes (2,3), scales (1, 0.4): coefficients are exact rationals
        mix = GammaMixture((GammaComponent(2, 1.0), GammaComponent(3, 0.4)))
        xi = xi_coefficients(mix)
        expected = {
            (0, 1): -250.0 / 27.0,
            (0, 2): 125.0 / 27.0,
            (1, 1): 100.0 / 27.0,
            (1, 2): 40.0 / 27.0,
            (1, 3): 4.0 / 9.0,
        }
        for key, ref in expected.items():
            assert xi.value(key[0], key[1]) == pytest.approx(ref, rel=1e-12)

    def test_against_linear_solve_oracle(self):
        # well-separated scales keep the lstsq oracle itself accurate
        rng = np.random.default_rng(42)
        for _ in range(10):
            mix = random_mixture(rng, max_components=3, max_shape=3, min_gap=0.3)
            xi = xi_coefficients(mix)
            oracle_rows = xi_by_linear_solve(mix.shapes, mix.scales)
            for row, ref in zip(xi.coeffs, oracle_rows):
                scale = max(1.0, np.abs(ref).max())
                assert np.allclose(row, ref, atol=1e-8 * scale)

    def test_total_weight_is_one(self):
        # the identity holds to rounding in the (possibly huge, cancelling)
        # coefficients, so the tolerance scales with their total magnitude
        rng = np.random.default_rng(3)
        for _ in range(30):
            mix = random_mixture(rng)
            xi = xi_coefficients(mix)
            mass = sum(abs(v) for row in xi.coeffs for v in row)
            total = sum(v for row in xi.coeffs for v in row)
            assert total == pytest.approx(1.0, abs=max(1e-12, 5e-15 * mass))

    def test_close_scales_warn(self):
        mix = GammaMixture((GammaComponent(1, 1.0), GammaComponent(1, 1.0001)))
        with pytest.warns(ScaleGapWarning) as rec:
            xi_coefficients(mix)
        assert rec[0].message.min_relative_gap < 1e-3

    def test_overflowing_expansion_raises(self):
        # gap just above the merge tolerance with large shapes: the leading
        # residues overflow and the failure must be reported, not returned
        mix = GammaMixture((GammaComponent(40, 1.0), GammaComponent(40, 1.0 + 3e-9)))
        with pytest.warns(ScaleGapWarning):
            with pytest.raises(ConditioningError):
                xi_coefficients(mix)


class TestMixturePdf:
    def test_zero_below_offset(self):
        mix = GammaMixture((GammaComponent(2, 1.0), GammaComponent(3, 0.4)), 0.5)
        xi = xi_coefficients(mix)
        assert mixture_pdf(mix, xi, 0.49) == 0.0
        assert mixture_pdf(mix, xi, -3.0) == 0.0

    def test_single_exponential(self):
        beta = 0.7
        mix = GammaMixture((GammaComponent(1, beta),))
        xi = xi_coefficients(mix)
        for y in (0.0, 0.3, 2.0):
            assert mixture_pdf(mix, xi, y) == pytest.approx(
                math.exp(-y / beta) / beta, rel=1e-14
            )

    def test_normalizes(self):
        mix = GammaMixture((GammaComponent(2, 1.0), GammaComponent(3, 0.4)), 0.5)
        xi = xi_coefficients(mix)
        val, _ = integrate.quad(lambda y: mixture_pdf(mix, xi, y), 0.5, np.inf,
                                epsabs=1e-12, epsrel=1e-10, limit=300)
        assert val == pytest.approx(1.0, abs=1e-8)

    def test_matches_direct_assembly(self):
        rng = np.random.default_rng(8)
        mix = random_mixture(rng)
        xi = xi_coefficients(mix)
        mass = sum(abs(v) for row in xi.coeffs for v in row)
        for y in np.linspace(mix.offset, mix.offset + 8.0, 30):
            ref = mixture_pdf_direct(mix.shapes, mix.scales, mix.offset, xi.coeffs, y)
            assert mixture_pdf(mix, xi, y) == pytest.approx(
                ref, rel=1e-10, abs=1e-13 * (1.0 + mass)
            )

    def test_rejects_non_finite(self):
        mix = GammaMixture((GammaComponent(1, 1.0),))
        xi = xi_coefficients(mix)
        with pytest.raises(DomainError):
            mixture_pdf(mix, xi, math.nan)


class TestMixtureMoments:
    @pytest.mark.parametrize("seed", [0, 1, 2, 3, 4])
    def test_normalization_randomized(self, seed):
        rng = np.random.default_rng(seed)
        mix = random_mixture(rng)
        xi = xi_coefficients(mix)
        hi = mix.offset + 60.0 * (mix.mean - mix.offset)
        val, _ = integrate.quad(lambda y: mixture_pdf(mix, xi, y), mix.offset, hi,
                                epsabs=1e-12, epsrel=1e-10, limit=400)
        assert val == pytest.approx(1.0, abs=1e-8)

    @pytest.mark.parametrize("seed", [5, 6, 7])
    def test_mean_identity(self, seed):
        rng = np.random.default_rng(seed)
        mix = random_mixture(rng)
        xi = xi_coefficients(mix)
        hi = mix.offset + 80.0 * (mix.mean - mix.offset)
        val, _ = integrate.quad(lambda y: y * mixture_pdf(mix, xi, y), mix.offset, hi,
                                epsabs=1e-12, epsrel=1e-10, limit=400)
        assert val == pytest.approx(mix.mean, rel=1e-6)


class TestMixtureMgf:
    def test_at_zero(self):
        mix = GammaMixture((GammaComponent(2, 1.0), GammaComponent(3, 0.4)), 0.5)
        assert mixture_mgf(mix, 0.0) == 1.0

    def test_single_exponential_factor(self):
        mix = GammaMixture((GammaComponent(1, 2.0),))
        assert mixture_mgf(mix, 0.25) == pytest.approx(2.0, rel=1e-14)

    def test_frozen_product_value(self):
        mix = GammaMixture((GammaComponent(2, 1.0), GammaComponent(3, 0.4)), 0.5)
        assert mixture_mgf(mix, -1.0) == pytest.approx(0.055259717539416324, rel=1e-13)

    def test_pole_rejected(self):
        mix = GammaMixture((GammaComponent(1, 2.0), GammaComponent(2, 0.3)))
        with pytest.raises(DomainError):
            mixture_mgf(mix, 0.5)
        mixture_mgf(mix, 0.49)  # just below the pole is fine

    @pytest.mark.parametrize("s", [-2.0, -1.0, -0.1])
    def test_round_trip_with_density(self, s):
        rng = np.random.default_rng(17)
        for _ in range(4):
            mix = random_mixture(rng, max_components=4, max_shape=4)
            xi = xi_coefficients(mix)
            val, _ = integrate.quad(
                lambda y: math.exp(s * y) * mixture_pdf(mix, xi, y),
                mix.offset, np.inf, epsabs=1e-12, epsrel=1e-10, limit=400,
            )
            assert val == pytest.approx(mixture_mgf(mix, s), rel=1e-7)


class TestMixtureCdf:
    def test_cdf_is_integral_of_pdf(self):
        rng = np.random.default_rng(29)
        mix = random_mixture(rng)
        xi = xi_coefficients(mix)
        for y in np.linspace(mix.offset, mix.offset + 6.0, 8):
            ref, _ = integrate.quad(lambda t: mixture_pdf(mix, xi, t), mix.offset, y,
                                    epsabs=1e-12, epsrel=1e-10, limit=300)
            assert mixture_cdf(mix, xi, y) == pytest.approx(ref, abs=1e-9)

    def test_sampling_law_within_dkw_band(self):
        # empirical CDF of offset + sum of gammas vs the expansion CDF
        rng = np.random.default_rng(99)
        mix = GammaMixture(
            (GammaComponent(2, 1.0), GammaComponent(3, 0.4), GammaComponent(1, 2.3)),
            0.5,
        )
        xi = xi_coefficients(mix)
        n = 100_000
        draws = mix.offset + sum(
            rng.gamma(c.shape, c.scale, size=n) for c in mix.components
        )
        draws.sort()
        grid = np.linspace(draws[0], draws[-1], 400)
        empirical = np.searchsorted(draws, grid, side="right") / n
        band = dkw_band(n, confidence=0.99)
        assert np.max(np.abs(empirical - mixture_cdf(mix, xi, grid))) <= band


class TestConstruction:
    def test_component_validation(self):
        with pytest.raises(DomainError):
            GammaComponent(0, 1.0)
        with pytest.raises(DomainError):
            GammaComponent(2, -1.0)

    def test_mixture_requires_distinct_scales(self):
        with pytest.raises(DomainError):
            GammaMixture((GammaComponent(1, 1.0), GammaComponent(2, 1.0)))

    def test_from_components_merges_first(self):
        mix = GammaMixture.from_components(
            [GammaComponent(1, 1.0), GammaComponent(2, 1.0)], offset=0.25
        )
        assert mix.components == (GammaComponent(3, 1.0),)
        assert mix.mean == pytest.approx(0.25 + 3.0)

    def test_xi_table_entries_view(self):
        mix = GammaMixture((GammaComponent(2, 1.0), GammaComponent(1, 0.4)))
        xi = xi_coefficients(mix)
        entries = xi.entries()
        assert set(entries) == {(0, 1), (0, 2), (1, 1)}
        mat = xi.as_matrix()
        assert mat.shape == (2, 2)
        assert mat[1, 1] == 0.0
