"""Potential and coefficient-law tests.

Expected values marked "frozen oracle" were computed with mpmath at 60
significant digits, independently of the package code (see oracle helpers at
the bottom; they are re-run as part of the suite so the freeze stays honest).
"""

from __future__ import annotations

import math

import mpmath as mp
import numpy as np
import pytest

from aggflow.materials import (
    Params,
    build_regularized_potential,
    extend_density,
    extend_viscosity,
    flory_huggins,
)

mp.mp.dps = 60


def make_params(**kw):
    base = dict(rho1=3.0, rho2=1.0, nu1=0.01, nu2=0.02, g=9.81,
                theta=1.0, theta0=2.0, delta=0.1)
    base.update(kw)
    return Params(**base)


# --- frozen oracle values (mpmath, 60 digits) -------------------------------
# Psi(0.5; theta=1, theta0=2)
PSI_HALF = -0.11918796405886304087
# Psi^(k)(0.37; theta=1, theta0=2) for k = 0..6
PSI_037 = [
    -0.06679581298249300436,
    -0.35157690028170388629,
    -0.84138570269957131271,
    0.99336644653263495377,
    4.38814845958655672130,
    18.19243223204491442923,
    123.40097430412655238800,
]


def oracle_psi(r, k, theta, theta0):
    """Independent extended-precision evaluation of the closed form."""
    theta, theta0 = mp.mpf(theta), mp.mpf(theta0)

    def f(x):
        return (theta / 2) * ((1 + x) * mp.log(1 + x) + (1 - x) * mp.log(1 - x)) \
            - (theta0 / 2) * x ** 2

    return float(mp.diff(f, mp.mpf(r), k)) if k else float(f(mp.mpf(r)))


class TestFloryHuggins:
    def test_zero_point_values(self):
        assert flory_huggins(0.0, 0, 1.0, 2.0) == 0.0
        assert flory_huggins(0.0, 1, 1.0, 2.0) == 0.0

    def test_frozen_value_at_half(self):
        got = flory_huggins(0.5, 0, 1.0, 2.0)
        assert got == pytest.approx(PSI_HALF, rel=1e-14, abs=0.0)
        # keep the freeze honest against the live oracle
        assert oracle_psi("0.5", 0, 1, 2) == pytest.approx(PSI_HALF, rel=1e-15)

    @pytest.mark.parametrize("k", range(7))
    def test_frozen_derivatives(self, k):
        got = flory_huggins(0.37, k, 1.0, 2.0)
        assert got == pytest.approx(PSI_037[k], rel=1e-12)

    @pytest.mark.parametrize("k", range(7))
    def test_against_live_oracle_random_points(self, k):
        rng = np.random.default_rng(20 + k)
        for r in rng.uniform(-0.9, 0.9, size=8):
            got = flory_huggins(float(r), k, 1.3, 2.7)
            want = oracle_psi(repr(float(r)), k, 1.3, 2.7)
            assert got == pytest.approx(want, rel=1e-10, abs=1e-12)

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            flory_huggins(1.0, 0, 1.0, 2.0)
        with pytest.raises(ValueError):
            flory_huggins(-1.2, 1, 1.0, 2.0)
        with pytest.raises(ValueError):
            flory_huggins(0.2, 7, 1.0, 2.0)

    def test_array_input_matches_scalar(self):
        r = np.linspace(-0.8, 0.8, 11)
        arr = flory_huggins(r, 2, 1.0, 2.0)
        for i, ri in enumerate(r):
            assert arr[i] == flory_huggins(float(ri), 2, 1.0, 2.0)


class TestRegularizedPotential:
    def test_interior_branch_bitwise(self):
        p = make_params(delta=0.1)
        pot = build_regularized_potential(p)
        rng = np.random.default_rng(7)
        r = rng.uniform(-0.9, 0.9, size=10_000)  # inside (-1+delta, 1-delta)
        exact = flory_huggins(r, 0, p.theta, p.theta0)
        assert np.array_equal(pot.evaluate(r, 0), exact)

    def test_defined_everywhere(self):
        pot = build_regularized_potential(make_params())
        for r in (-5.0, -1.0, 2.0, 40.0):
            assert math.isfinite(pot.evaluate(r, 0))
            assert math.isfinite(pot.evaluate(r, 6))

    def test_evenness_random(self):
        pot = build_regularized_potential(make_params())
        rng = np.random.default_rng(11)
        r = rng.uniform(-3.0, 3.0, size=1000)
        diff = pot.evaluate(r, 0) - pot.evaluate(-r, 0)
        assert np.max(np.abs(diff)) <= 1e-13 * (1.0 + np.max(np.abs(pot.evaluate(r, 0))))

    @pytest.mark.parametrize("k,rtol", [(0, 1e-6), (1, 1e-6), (2, 1e-6), (3, 1e-6),
                                        (4, 1e-3), (5, 1e-3), (6, 1e-3)])
    def test_gluing_smoothness_finite_difference(self, k, rtol):
        """One-sided FD estimates of order k agree across each gluing point.

        Each estimate samples strictly from one side of the gluing point, so
        it probes only that branch; agreement of the left and right estimates
        is the smoothness statement. A straddling central stencil would be
        polluted by the interior branch's seventh derivative (around 5e6 near
        the gluing point), which is why the estimates are one sided and the
        steps are tuned per order.
        """
        p = make_params(delta=0.15)
        pot = build_regularized_potential(p)
        h = {0: 1e-6, 1: 1e-6, 2: 1e-6, 3: 1e-5, 4: 1e-5, 5: 1e-4, 6: 1e-4}[k]
        for edge in (1.0 - p.delta, -(1.0 - p.delta)):
            if k == 0:
                # linear extrapolation of the function value onto the edge
                left = 2.0 * pot.evaluate(edge - h, 0) - pot.evaluate(edge - 2 * h, 0)
                right = 2.0 * pot.evaluate(edge + h, 0) - pot.evaluate(edge + 2 * h, 0)
            else:
                # second-order one-sided stencil on the (k-1)-th analytic
                # derivative; truncation error is h^2/3 times the (k+2)-th
                # derivative, far below tolerance at these steps
                f = lambda x: pot.evaluate(x, k - 1)
                left = (3 * f(edge) - 4 * f(edge - h) + f(edge - 2 * h)) / (2 * h)
                right = (-3 * f(edge) + 4 * f(edge + h) - f(edge + 2 * h)) / (2 * h)
            want = pot.evaluate(edge, k)
            scale = max(1e-300, abs(want))
            assert abs(left - right) / scale <= rtol
            assert abs(left - want) / scale <= rtol
            assert abs(right - want) / scale <= rtol

    def test_derivative_consistency_away_from_gluing(self):
        pot = build_regularized_potential(make_params())
        rng = np.random.default_rng(3)
        pts = np.concatenate([rng.uniform(-0.7, 0.7, 40), rng.uniform(1.1, 2.5, 20),
                              rng.uniform(-2.5, -1.1, 20)])
        h = 1e-6
        for k in range(6):
            fd = (pot.evaluate(pts + h, k) - pot.evaluate(pts - h, k)) / (2 * h)
            an = pot.evaluate(pts, k + 1)
            scale = np.maximum(1.0, np.abs(an))
            assert np.max(np.abs(fd - an) / scale) <= 1e-5

    def test_second_derivative_lower_bound(self):
        # the exterior Taylor branches keep PsiHat'' >= theta - theta0
        p = make_params()
        pot = build_regularized_potential(p)
        r = np.linspace(-6, 6, 4001)
        assert pot.evaluate(r, 2).min() >= (p.theta - p.theta0) - 1e-12


class TestCoefficientExtensions:
    def test_anchor_values(self):
        p = make_params()
        assert extend_density(0.0, 0, p) == pytest.approx(p.varrho2)
        assert extend_density(1.0, 0, p) == pytest.approx(p.rho1)
        assert extend_density(-1.0, 0, p) == pytest.approx(p.rho2)
        assert extend_viscosity(0.0, 0, p) == pytest.approx((p.nu1 + p.nu2) / 2)

    def test_exact_affine_on_core_interval(self):
        p = make_params()
        r = np.linspace(-1.0, 1.0, 100)
        assert np.array_equal(extend_density(r, 0, p), p.varrho1 * r + p.varrho2)
        assert np.array_equal(extend_viscosity(r, 0, p), p.nu_slope * r + p.nu_mean)

    def test_saturation_reached(self):
        p = make_params()
        w = p.extension_width
        assert extend_density(1.0 + w, 0, p) == pytest.approx(p.rho_hi, rel=1e-13)
        assert extend_density(-1.0 - w, 0, p) == pytest.approx(p.rho_lo, rel=1e-13)
        assert extend_density(10.0, 0, p) == pytest.approx(p.rho_hi)
        assert extend_density(10.0, 1, p) == 0.0
        assert extend_density(10.0, 2, p) == 0.0

    def test_bounds_hold_everywhere(self):
        p = make_params()
        rng = np.random.default_rng(5)
        r = rng.uniform(-10, 10, size=1000)
        rho = extend_density(r, 0, p)
        nu = extend_viscosity(r, 0, p)
        assert np.all(rho >= p.rho_lo - 1e-12) and np.all(rho <= p.rho_hi + 1e-12)
        assert np.all(nu >= p.nu_lo - 1e-12) and np.all(nu <= p.nu_hi + 1e-12)
        assert np.all(nu > 0)

    def test_c2_gluing_by_finite_difference(self):
        p = make_params()
        h = 1e-6
        for point in (1.0, -1.0, 1.0 + p.extension_width, -1.0 - p.extension_width):
            for k in (0, 1):
                fd = (extend_density(point + h, k, p)
                      - extend_density(point - h, k, p)) / (2 * h)
                an = extend_density(point, k + 1, p)
                assert fd == pytest.approx(an, abs=2e-4 * (1 + abs(an)))

    def test_second_derivative_bounded(self):
        p = make_params()
        r = np.linspace(-2.0, 2.0, 2001)
        d2 = extend_density(r, 2, p)
        # |rho-hat''| is bounded by slope * gap/w^2 * max|p''| with p quintic
        assert np.all(np.isfinite(d2))
        assert np.max(np.abs(d2)) < 50.0 * p.varrho1 / p.extension_width

    def test_matched_viscosities_constant(self):
        p = make_params(nu1=0.02, nu2=0.02)
        r = np.linspace(-4, 4, 33)
        assert np.array_equal(extend_viscosity(r, 0, p), np.full(33, 0.02))
        assert np.array_equal(extend_viscosity(r, 1, p), np.zeros(33))


class TestParamsInvariants:
    def test_varrho_identities(self):
        p = make_params(rho1=2.7, rho2=0.4)
        assert p.varrho1 == (2.7 - 0.4) / 2
        assert p.varrho2 == (2.7 + 0.4) / 2

    def test_rejections(self):
        with pytest.raises(ValueError):
            make_params(rho1=1.0, rho2=2.0)
        with pytest.raises(ValueError):
            make_params(theta=3.0)   # theta >= theta0
        with pytest.raises(ValueError):
            make_params(delta=0.0)
        with pytest.raises(ValueError):
            make_params(rho_lo=5.0)  # above min density
