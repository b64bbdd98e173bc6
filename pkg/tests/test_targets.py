"""Tests for lattice targets: densities, normalization, sampling, conditionals.

Brute-force checks recompute densities with scipy.stats.norm directly so the
mixture implementation is validated against an independent route.
"""

import numpy as np
import pytest
from scipy import stats

from colorelicit.colors import GRID_SHAPE, HslColor, bin_index
from colorelicit.errors import DegenerateTarget
from colorelicit.targets import LatticeTarget, MixtureComponent, TargetSpec


def brute_density(components, h, s, l):
    """Independent pointwise mixture density (circular hue distance)."""
    total = 0.0
    for weight, mean, sd in components:
        dh = abs(h - (mean[0] % 360))
        dh = min(dh, 360 - dh)
        total += (
            weight
            * stats.norm.pdf(dh, 0, sd[0])
            * stats.norm.pdf(s, mean[1], sd[1])
            * stats.norm.pdf(l, mean[2], sd[2])
        )
    return total


SINGLE = [(1.0, (180.0, 50.0, 50.0), (15.0, 10.0, 10.0))]
MIXTURE = [
    (0.3, (20.0, 80.0, 40.0), (12.0, 8.0, 9.0)),
    (0.7, (300.0, 30.0, 70.0), (25.0, 15.0, 6.0)),
]


class TestDensity:
    @pytest.mark.parametrize("components", [SINGLE, MIXTURE])
    def test_pointwise_matches_brute_force(self, components):
        target = TargetSpec(components)
        rng = np.random.default_rng(23)
        for _ in range(200):
            h = int(rng.integers(0, 360))
            s = int(rng.integers(0, 101))
            l = int(rng.integers(0, 101))
            want = brute_density(components, h, s, l)
            got = target.density(HslColor(h, s, l))
            assert got == pytest.approx(want, rel=1e-10, abs=1e-300)

    def test_hue_wraps_circularly(self):
        target = TargetSpec([(1.0, (0.0, 50.0, 50.0), (10.0, 10.0, 10.0))])
        near_low = target.density(HslColor(5, 50, 50))
        near_high = target.density(HslColor(355, 50, 50))
        assert near_low == pytest.approx(near_high, rel=1e-12)

    def test_cube_matches_pointwise(self):
        target = TargetSpec(MIXTURE)
        cube = target.density_cube()
        assert cube.shape == (360, 101, 101)
        rng = np.random.default_rng(29)
        for _ in range(100):
            h, s, l = rng.integers(0, 360), rng.integers(0, 101), rng.integers(0, 101)
            assert cube[h, s, l] == pytest.approx(
                target.density(HslColor(int(h), int(s), int(l))), rel=1e-10
            )

    def test_max_density_is_lattice_max(self):
        target = TargetSpec(MIXTURE)
        assert target.max_density() == pytest.approx(target.density_cube().max(), rel=1e-12)

    def test_lattice_total_matches_cube_sum(self):
        target = TargetSpec(MIXTURE)
        assert target.lattice_total() == pytest.approx(
            float(target.density_cube().sum()), rel=1e-10
        )


class TestValidation:
    def test_weights_must_sum_to_one(self):
        with pytest.raises(DegenerateTarget):
            TargetSpec([(0.5, (0, 0, 0), (1, 1, 1))])

    def test_stddev_must_be_positive(self):
        with pytest.raises(DegenerateTarget):
            TargetSpec([(1.0, (0, 0, 0), (0.0, 1, 1))])

    def test_empty_mixture_rejected(self):
        with pytest.raises(DegenerateTarget):
            TargetSpec([])

    def test_round_trip_dict(self):
        target = TargetSpec(MIXTURE)
        again = TargetSpec.from_dict(target.to_dict())
        assert again.to_dict() == target.to_dict()


class TestSampling:
    def test_sample_distribution_matches_marginals(self):
        target = TargetSpec(SINGLE)
        rng = np.random.default_rng(31)
        draws = [target.sample(rng) for _ in range(20000)]
        cube = target.density_cube()
        cube = cube / cube.sum()
        # Compare empirical marginal means against enumerated lattice means.
        for axis, getter in ((0, lambda c: c.h), (1, lambda c: c.s), (2, lambda c: c.l)):
            marg = cube.sum(axis=tuple(a for a in range(3) if a != axis))
            values = np.arange(marg.size)
            want_mean = float((values * marg).sum())
            got_mean = float(np.mean([getter(c) for c in draws]))
            want_sd = float(np.sqrt(((values - want_mean) ** 2 * marg).sum()))
            assert abs(got_mean - want_mean) < 4 * want_sd / np.sqrt(len(draws))

    def test_sampling_is_deterministic_per_seed(self):
        target = TargetSpec(MIXTURE)
        a = [target.sample(np.random.default_rng(5)).as_tuple() for _ in range(1)]
        b = [target.sample(np.random.default_rng(5)).as_tuple() for _ in range(1)]
        assert a == b


class TestConditional:
    def test_matches_cube_slice(self):
        target = TargetSpec(MIXTURE)
        cube = target.density_cube()
        line = cube[:, 40, 60]
        want = line / line.sum()
        got = target.conditional("h", {"s": 40, "l": 60})
        np.testing.assert_allclose(got, want, rtol=1e-9)
        line = cube[100, :, 60]
        np.testing.assert_allclose(
            target.conditional("s", {"h": 100, "l": 60}), line / line.sum(), rtol=1e-9
        )
        line = cube[100, 40, :]
        np.testing.assert_allclose(
            target.conditional("l", {"h": 100, "s": 40}), line / line.sum(), rtol=1e-9
        )

    def test_unknown_dimension_rejected(self):
        with pytest.raises(ValueError):
            TargetSpec(SINGLE).conditional("x", {})

    def test_zero_mass_slice_falls_back_to_marginal(self):
        class PointMass(LatticeTarget):
            def density_cube(self):
                cube = np.zeros((360, 101, 101))
                cube[200, 40, 60] = 1.0
                return cube

        target = PointMass()
        cond = target.conditional("h", {"s": 0, "l": 0})
        assert cond[200] == 1.0
        np.testing.assert_allclose(cond, target.axis_marginal("h"))

    def test_mixture_marginal_matches_cube(self):
        target = TargetSpec(MIXTURE)
        cube = target.density_cube()
        for dim, axes in (("h", (1, 2)), ("s", (0, 2)), ("l", (0, 1))):
            want = cube.sum(axis=axes)
            want = want / want.sum()
            np.testing.assert_allclose(target.axis_marginal(dim), want, rtol=1e-9)


class TestGridHistogram:
    def test_matches_cube_aggregation(self):
        target = TargetSpec(MIXTURE)
        hist = target.grid_histogram()
        cube = target.density_cube()
        want = np.zeros(GRID_SHAPE)
        # Independent aggregation route: group lattice mass by bin indices.
        hi = np.minimum(np.arange(360) // 20, 17)
        si = np.minimum(np.arange(101) // 10, 9)
        li = np.minimum(np.arange(101) // 10, 9)
        for i in range(18):
            sub = cube[hi == i]
            for j in range(10):
                sub2 = sub[:, si == j]
                for k in range(10):
                    want[i, j, k] = sub2[:, :, li == k].sum()
        want /= want.sum()
        np.testing.assert_allclose(hist.bins, want, atol=1e-12)

    def test_histogram_mode_near_component_mean(self):
        target = TargetSpec(SINGLE)
        hist = target.grid_histogram()
        idx = np.unravel_index(np.argmax(hist.bins), GRID_SHAPE)
        assert idx == bin_index(HslColor(180, 50, 50))


class TestCustomLatticeTarget:
    def test_generic_base_from_cube(self):
        class HalfSpace(LatticeTarget):
            def density_cube(self):
                cube = np.zeros((360, 101, 101))
                cube[:180] = 1.0
                return cube

        target = HalfSpace()
        assert target.density(HslColor(10, 0, 0)) == 1.0
        assert target.density(HslColor(200, 0, 0)) == 0.0
        assert target.max_density() == 1.0
        rng = np.random.default_rng(37)
        draws = [target.sample(rng) for _ in range(2000)]
        assert all(c.h < 180 for c in draws)
        cond = target.conditional("h", {"s": 10, "l": 10})
        assert cond[:180] == pytest.approx(1 / 180)
        assert cond[180:].sum() == 0.0

    def test_zero_cube_is_degenerate(self):
        class Zero(LatticeTarget):
            def density_cube(self):
                return np.zeros((360, 101, 101))

        with pytest.raises(DegenerateTarget):
            Zero().max_density()

    def test_component_validation(self):
        with pytest.raises(DegenerateTarget):
            MixtureComponent(1.0, (0, 0), (1, 1, 1))
