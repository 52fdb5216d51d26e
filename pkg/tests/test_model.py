"""Force law, potential, linearization coefficients, symmetries, limits."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from curved_sitnikov.kepler import ModelParams
from curved_sitnikov import model
from curved_sitnikov.model import (CollisionError, ExtendedState,
                                   comparison_force_circle, cubic_coefficient,
                                   dforce_dq, hill_coefficient,
                                   limit_force_circle, limit_force_classical,
                                   potential, symmetry_defect,
                                   tangential_force, vector_field)

TWO_PI = 2.0 * math.pi
P10 = ModelParams(r=1.0, epsilon=0.0)

# Sign-criterion threshold for the antipode: largest r with a
# non-negative linearization coefficient for all t.
R_SIGN = math.sqrt(math.sqrt(17.0) - 3.0)


class TestTangentialForce:
    def test_equilibria(self):
        for params in (P10, ModelParams(r=0.7, epsilon=0.4)):
            for t in (0.0, 1.0, 4.0):
                assert tangential_force(0.0, t, params) == 0.0
                assert abs(tangential_force(math.pi, t, params)) < 1e-15

    def test_quarter_circle_value(self):
        # d1^2 = 5, d2^2 = 1 at (q=pi/2, t=0, r=1, eps=0)
        expected = -2.0 * 5.0**-1.5
        assert tangential_force(math.pi / 2.0, 0.0, P10) == pytest.approx(
            expected, abs=1e-15)

    def test_matches_potential_gradient(self):
        h = 1e-6
        cases = [ModelParams(1.0, 0.0), ModelParams(1.5, 0.2),
                 ModelParams(0.5, 0.6)]
        for params in cases:
            for q in np.linspace(0.15, TWO_PI - 0.15, 20):
                for t in np.linspace(0.0, TWO_PI, 20):
                    f = tangential_force(float(q), float(t), params)
                    grad = -(potential(float(q) + h, float(t), params)
                             - potential(float(q) - h, float(t), params)) / (2 * h)
                    assert f == pytest.approx(grad, rel=1e-6, abs=1e-9)

    def test_oddness_exact(self):
        params = ModelParams(r=1.5, epsilon=0.2)
        for q in (0.3, 1.1, 2.9, 4.0):
            for t in (0.0, 0.7, 3.2):
                assert tangential_force(-q, t, params) == -tangential_force(
                    q, t, params)

    def test_periodicity(self):
        params = ModelParams(r=1.5, epsilon=0.2)
        for q in (0.3, 2.0):
            for t in (0.1, 2.2, 5.0):
                assert tangential_force(q, t + TWO_PI, params) == pytest.approx(
                    tangential_force(q, t, params), abs=1e-12)
        # circular primaries: half-period symmetry
        for q in (0.3, 2.0):
            for t in (0.1, 2.2):
                assert tangential_force(q, t + math.pi, P10) == pytest.approx(
                    tangential_force(q, t, P10), abs=1e-14)

    def test_collision_guard_names_primary(self):
        with pytest.raises(CollisionError) as err:
            tangential_force(math.pi, math.pi, ModelParams(r=1.95),
                             d_min=0.1)
        assert err.value.primary == 1
        assert "primary 1" in str(err.value)


class TestPotential:
    def test_antipode_value(self):
        # d1 = 2+r, d2 = 2-r at (q=pi, t=0, eps=0) ... here 3 and 1
        assert potential(math.pi, 0.0, P10) == pytest.approx(-4.0 / 3.0,
                                                             abs=1e-14)

    def test_origin_value(self):
        assert potential(0.0, 0.0, P10) == pytest.approx(-2.0, abs=1e-14)

    def test_quarter_value(self):
        expected = -(5.0**-0.5 + 1.0)
        assert potential(math.pi / 2.0, 0.0, P10) == pytest.approx(expected,
                                                                   abs=1e-14)


class TestLinearization:
    def test_origin_closed_form(self):
        assert dforce_dq(0.0, 0.123, P10) == pytest.approx(-2.0, abs=1e-14)
        params = ModelParams(r=1.0, epsilon=0.3)
        assert dforce_dq(0.0, 0.0, params) == pytest.approx(-2.0 / 0.7**3,
                                                            abs=1e-12)

    def test_antipode_quarter_phase(self):
        for r in (0.5, 1.0, 1.5):
            params = ModelParams(r=r)
            expected = 2.0 / (r * r + 4.0) ** 1.5
            assert dforce_dq(math.pi, math.pi / 2.0, params) == pytest.approx(
                expected, abs=1e-14)

    def test_antipode_epoch_zero(self):
        assert dforce_dq(math.pi, 0.0, P10) == pytest.approx(2.0 / 27.0,
                                                             abs=1e-14)
        # closed form -2(r^4 + 6r^2 - 8)/(4 - r^2)^3
        for r in (0.4, 0.9, 1.3, 1.8):
            params = ModelParams(r=r)
            expected = -2.0 * (r**4 + 6.0 * r**2 - 8.0) / (4.0 - r**2) ** 3
            assert dforce_dq(math.pi, 0.0, params) == pytest.approx(
                expected, rel=1e-13)

    def test_matches_force_derivative(self):
        h = 1e-6
        for q_star in (0.0, math.pi):
            for params in (P10, ModelParams(r=1.4, epsilon=0.35)):
                for t in (0.0, 0.9, 2.5):
                    fd = (tangential_force(q_star + h, t, params)
                          - tangential_force(q_star - h, t, params)) / (2 * h)
                    assert dforce_dq(q_star, t, params) == pytest.approx(
                        fd, rel=1e-8, abs=1e-9)

    def test_rejects_non_equilibrium(self):
        with pytest.raises(ValueError):
            dforce_dq(1.0, 0.0, P10)

    def test_monotone_decreasing_in_r(self):
        # circular primaries: the antipodal coefficient decreases with r
        rs = np.linspace(0.2, 1.8, 9)
        for t in np.linspace(0.0, 3.0, 7):
            vals = [dforce_dq(math.pi, float(t), ModelParams(r=float(r)))
                    for r in rs]
            assert all(a > b for a, b in zip(vals, vals[1:]))

    def test_sign_criterion_threshold(self):
        ts = np.linspace(0.0, math.pi, 2001)

        def min_f(r):
            params = ModelParams(r=r)
            return min(dforce_dq(math.pi, float(t), params) for t in ts)

        assert min_f(R_SIGN - 0.01) > 0.0
        assert min_f(R_SIGN + 0.01) < 0.0


class TestHillCoefficient:
    def test_origin_circular_is_constant(self):
        a = hill_coefficient(0.0, P10)
        assert a.period == math.pi
        for t in (0.0, 1.0, 2.0):
            assert a(t) == pytest.approx(2.0, abs=1e-14)

    def test_antipode_circular_nonpositive(self):
        a = hill_coefficient(math.pi, P10)
        assert max(a(float(t)) for t in np.linspace(0, TWO_PI, 100)) <= 0.0

    def test_origin_eccentric(self):
        a = hill_coefficient(0.0, ModelParams(r=1.0, epsilon=0.3))
        assert a.period == TWO_PI
        assert a(0.0) == pytest.approx(2.0 / 0.343, abs=1e-12)


class TestCubicCoefficient:
    def test_epoch_zero(self):
        assert cubic_coefficient(0.0, P10) == pytest.approx(19.0 / 3.0,
                                                            rel=1e-14)

    def test_quarter_phase(self):
        assert cubic_coefficient(math.pi / 2.0, P10) == pytest.approx(
            10.0 / 3.0, rel=1e-14)

    def test_positive_everywhere(self):
        for r in np.linspace(0.05, 1.95, 30):
            params = ModelParams(r=float(r))
            assert min(cubic_coefficient(float(t), params)
                       for t in np.linspace(0, TWO_PI, 32)) > 0.0

    def test_rejects_eccentric(self):
        with pytest.raises(ValueError):
            cubic_coefficient(0.0, ModelParams(r=1.0, epsilon=0.1))


class TestVectorField:
    def test_equilibria(self):
        for q_star in (0.0, math.pi):
            out = vector_field(ExtendedState(q=q_star, p=0.0, s=1.3), P10)
            np.testing.assert_allclose(out, [0.0, 0.0, 1.0], atol=1e-15)

    def test_generic_point(self):
        out = vector_field(ExtendedState(q=math.pi / 2.0, p=0.2, s=0.0), P10)
        np.testing.assert_allclose(out, [0.2, -2.0 * 5.0**-1.5, 1.0],
                                   atol=1e-14)


class TestSymmetryDefect:
    @settings(max_examples=40, deadline=None, derandomize=True)
    @given(q=st.floats(-9.0, 9.0), p=st.floats(-2.0, 2.0),
           s=st.floats(-12.0, 12.0))
    def test_exact_field(self, q, p, s):
        state = ExtendedState(q=q, p=p, s=s)
        for params in (P10, ModelParams(r=1.5, epsilon=0.2)):
            assert max(symmetry_defect(state, params)) <= 1e-12

    def test_any_eccentricity(self):
        state = ExtendedState(q=1.3, p=0.7, s=2.1)
        params = ModelParams(r=1.5, epsilon=0.2)
        assert max(symmetry_defect(state, params)) <= 1e-12

    def test_perturbed_fixture_breaks_reflection(self):
        state = ExtendedState(q=0.8, p=0.1, s=0.5)

        def bad_force(q, t):
            return tangential_force(q, t, P10) + 1e-3

        r1, r2, r3, r4 = symmetry_defect(state, P10, force=bad_force)
        assert r1 == pytest.approx(2e-3, rel=1e-6)
        assert max(r2, r3, r4) <= 1e-12


class TestLimits:
    def test_classical_limit_at_origin(self):
        assert limit_force_classical(0.0, 0.3, R=50.0, r=1.0) == 0.0

    def test_classical_limit_value(self):
        got = limit_force_classical(1.0, 0.0, R=1e3, r=1.0)
        assert got == pytest.approx(-2.0 / 2.0**1.5, abs=1e-4)

    def test_classical_restoring_sign(self):
        R = 30.0
        for w in np.linspace(-0.9 * math.pi * R, 0.9 * math.pi * R, 21):
            if w == 0.0:
                continue
            f = limit_force_classical(float(w), 0.0, R=R, r=1.0)
            assert math.copysign(1.0, f) == -math.copysign(1.0, w)

    def test_fused_mass_equilibrium(self):
        assert limit_force_circle(math.pi, 1.0) == pytest.approx(0.0,
                                                                 abs=1e-15)
        assert comparison_force_circle(math.pi, 1.0) == pytest.approx(
            0.0, abs=1e-15)

    def test_fused_mass_value(self):
        assert limit_force_circle(math.pi / 2.0, 1.0) == pytest.approx(
            -1.0 / math.sqrt(2.0), abs=1e-14)

    def test_small_binary_approaches_fused_mass(self):
        tiny = ModelParams(r=1e-6)
        for q in (math.pi / 2.0, 2.0, math.pi):
            assert tangential_force(q, 0.7, tiny) == pytest.approx(
                limit_force_circle(q, 1.0), abs=1e-5)

    def test_fused_mass_singularity(self):
        with pytest.raises(CollisionError):
            limit_force_circle(0.0, 1.0)
        with pytest.raises(CollisionError):
            comparison_force_circle(TWO_PI, 1.0)


def test_reduce_angle():
    assert model.reduce_angle(0.0) == 0.0
    assert model.reduce_angle(TWO_PI + 0.5) == pytest.approx(0.5, abs=1e-14)
    assert model.reduce_angle(-0.5) == pytest.approx(TWO_PI - 0.5, abs=1e-14)
    assert ExtendedState(q=-0.5, p=0.0).q_wrapped == pytest.approx(
        TWO_PI - 0.5, abs=1e-14)
