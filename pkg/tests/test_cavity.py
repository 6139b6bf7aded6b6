"""Reflection coefficients and detuning solving."""
import cmath
import math

import pytest

from fockdistill import (CavityParams, cooperativity, reflection_coeffs,
                         reflection_from_cooperativity, solve_detuning,
                         solve_detuning_bisect)
from fockdistill.errors import InvalidSpecError

REFERENCE_DETUNINGS = {
    math.pi / 2: -1.0,
    math.pi / 4: -2.41421,
    math.pi / 8: -5.02734,
    math.pi / 16: -10.15317,
    math.pi / 32: -20.35547,
}


class TestDetuning:
    def test_reference_values(self):
        for phi, delta in REFERENCE_DETUNINGS.items():
            assert solve_detuning(phi) == pytest.approx(delta, abs=1e-4)

    def test_resonance(self):
        assert solve_detuning(math.pi) == 0.0

    def test_closed_form_vs_bisection(self):
        for phi in (0.1, math.pi / 32, math.pi / 2, 1.0, math.pi,
                    4.0, 2 * math.pi - 0.1):
            assert solve_detuning(phi) == pytest.approx(
                solve_detuning_bisect(phi), rel=1e-9, abs=1e-9)

    def test_solution_actually_solves(self):
        for phi in (0.3, 1.2, math.pi / 8, 5.0):
            delta = solve_detuning(phi)
            r0 = reflection_from_cooperativity(0.0, delta).r0
            assert cmath.phase(r0) % (2 * math.pi) == pytest.approx(
                phi, abs=1e-12)

    def test_out_of_range(self):
        for phi in (0.0, 2 * math.pi, -1.0, 7.0):
            with pytest.raises(InvalidSpecError):
                solve_detuning(phi)
            with pytest.raises(InvalidSpecError):
                solve_detuning_bisect(phi)


class TestReflection:
    def test_r0_is_pure_phase(self):
        for delta in (-20.0, -1.0, 0.0, 3.5):
            r0 = reflection_from_cooperativity(100.0, delta).r0
            assert abs(abs(r0) - 1.0) < 1e-12

    def test_r1_high_cooperativity(self):
        pair = reflection_from_cooperativity(250.0, -1.0)
        assert pair.r1.real == pytest.approx(0.998, abs=5e-4)
        assert abs(pair.r1 - 1.0) < 0.01

    def test_r1_limit(self):
        pair = reflection_from_cooperativity(1e9, 0.0)
        assert pair.r1 == pytest.approx(1.0, abs=1e-8)
        assert pair.r0 == pytest.approx(-1.0, abs=1e-12)

    def test_params_pipeline(self):
        params = CavityParams(g=2 * math.pi * 16, kappa=2 * math.pi * 5,
                              gamma=2 * math.pi * 0.05, delta=0.0)
        assert cooperativity(params) == pytest.approx(1024.0)
        pair = reflection_coeffs(params)
        expect = reflection_from_cooperativity(1024.0, 0.0)
        assert pair.r1 == expect.r1 and pair.r0 == expect.r0

    def test_invalid_params(self):
        with pytest.raises(InvalidSpecError):
            CavityParams(g=1.0, kappa=0.0, gamma=1.0, delta=0.0)
