from __future__ import annotations

import numpy as np
import pytest

from evoclust.heuristics import HeuristicDomainError, HeuristicSet, apply

IDENTITY = HeuristicSet.from_mode("identity")
DEFAULT = HeuristicSet.from_mode("default")


class TestIdentity:
    def test_h1_passthrough(self):
        assert apply(IDENTITY, "h1", 2.5, 0.7) == 2.5

    def test_h2_ignores_density(self):
        for density in (0.1, 1.0, 1e6):
            assert apply(IDENTITY, "h2", 0.5, density) == 0.5

    def test_h3_passthrough(self):
        assert apply(IDENTITY, "h3", 0.25) == 0.25

    def test_h4_uncapped(self):
        assert apply(IDENTITY, "h4", 2.0, 4) == np.inf


class TestDefault:
    def test_h1_blur_one_never_beats_h2(self):
        # the maximal-blur guarantee: the filter threshold wins for every grid point
        zs = np.linspace(-5, 5, 21)
        es = np.linspace(0.0, 1.0, 11)
        densities = (0.01, 1.0, 100.0)
        for z in zs:
            for e in es:
                for density in densities:
                    assert DEFAULT.h1(z, 1.0) <= DEFAULT.h2(e, density)

    def test_h1_nonincreasing_in_blur(self):
        z = 3.0
        values = [DEFAULT.h1(z, b) for b in np.linspace(0, 1, 11)]
        assert all(a >= b for a, b in zip(values, values[1:]))

    def test_h2_nondecreasing_in_expansion(self):
        values = [DEFAULT.h2(e, 1.0) for e in np.linspace(0, 1, 21)]
        assert all(a <= b for a, b in zip(values, values[1:]))

    def test_h2_extremes(self):
        assert DEFAULT.h2(0.0, 1.0) == 0.0
        assert DEFAULT.h2(1.0, 1.0) > 1e5

    def test_h4_scales_with_sqrt_extent(self):
        base = DEFAULT.h4(2.0, 4)
        assert DEFAULT.h4(8.0, 4) == pytest.approx(2 * base)

    def test_h4_shrinks_with_dimension(self):
        assert DEFAULT.h4(2.0, 16) < DEFAULT.h4(2.0, 2)

    def test_h1_vectorized(self):
        z = np.array([-1.0, 0.0, 2.0])
        np.testing.assert_allclose(DEFAULT.h1(z, 0.5), z * 0.5)


class TestDomains:
    @pytest.mark.parametrize("blur", (-0.1, 1.5))
    def test_h1_blur_domain(self, blur):
        with pytest.raises(HeuristicDomainError):
            DEFAULT.h1(1.0, blur)

    @pytest.mark.parametrize("e", (-0.5, 2.0))
    def test_h2_expansion_domain(self, e):
        with pytest.raises(HeuristicDomainError):
            DEFAULT.h2(e, 1.0)

    def test_h3_gap_domain(self):
        with pytest.raises(HeuristicDomainError):
            DEFAULT.h3(-0.2)

    def test_h4_domains(self):
        with pytest.raises(HeuristicDomainError):
            DEFAULT.h4(0.0, 3)
        with pytest.raises(HeuristicDomainError):
            DEFAULT.h4(1.0, 0)

    def test_unknown_mode(self):
        with pytest.raises(HeuristicDomainError):
            HeuristicSet.from_mode("aggressive")

    def test_unknown_modulator(self):
        with pytest.raises(HeuristicDomainError):
            apply(DEFAULT, "h5", 1.0)
