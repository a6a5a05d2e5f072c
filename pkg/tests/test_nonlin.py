import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from schrospec.grids import CGrid
from schrospec.nonlin import (
    NLEigenpair,
    Sign,
    branching_slope_check,
    explicit_pair_minus,
    explicit_pair_plus,
    growth_exponents,
    nlep_residual,
    nonlinear_flux,
    plus_amplitude,
)
from schrospec.polyalg import SpectralParams


def test_plus_pair_examples():
    p = explicit_pair_plus(1.0, 1)
    assert p.alpha == pytest.approx(1 / 3)
    assert plus_amplitude(1.0, 1) == pytest.approx(2 / 3)
    assert explicit_pair_plus(2.0, 2).alpha == pytest.approx(1 / 3)
    assert p.sign is Sign.PLUS and p.sign.value_sign == 1


def test_plus_pair_rejects_higher_order():
    with pytest.raises(NotImplementedError):
        explicit_pair_plus(1.0, 1, m=2)
    with pytest.raises(ValueError):
        explicit_pair_plus(0.0, 1)


@pytest.mark.parametrize("N", [1, 2, 3])
def test_plus_amplitude_small_n_limit(N):
    # (1 + N n/2)^{-1/n} -> e^{-N/2} with an O(n) correction
    for n in (1e-3, 1e-5, 1e-8):
        assert abs(plus_amplitude(n, N) - math.exp(-N / 2)) <= N * N * n


def test_plus_profile_shape_independent_of_n():
    g = CGrid.centered(64, 4.0)
    y = g.axes()[0]
    for n in (1.0, 1e-3, 1e-7):
        p = explicit_pair_plus(n, 1)
        shape = p.sample(g) / plus_amplitude(n, 1)
        assert np.abs(shape - np.exp(0.25j * y**2)).max() < 1e-6


def test_beta_exponent_identity():
    for n, N in ((1.0, 1), (0.5, 2), (2.0, 3)):
        p = explicit_pair_plus(n, N)
        assert p.beta_exp == pytest.approx((1 - p.alpha * n) / 2)
        # for the explicit family beta = 1/(2 + N n) = A^n / 2
        assert p.beta_exp == pytest.approx(plus_amplitude(n, N) ** n / 2)


def test_plus_pair_residual_one_dimensional():
    g = CGrid.centered(2048, 20.0)
    _, sup = nlep_residual(explicit_pair_plus(1.0, 1), g, taper=(10.0, 18.0))
    assert sup < 1e-9


def test_plus_pair_residual_two_dimensional():
    g = CGrid.centered((256, 256), 20.0)
    _, sup = nlep_residual(explicit_pair_plus(1.0, 2), g, taper=(10.0, 18.0))
    assert sup < 1e-4


@pytest.mark.parametrize("m", [1, 2, 3])
def test_minus_pair_is_exact(m):
    g = CGrid.centered(128, 8.0)
    p = explicit_pair_minus(m=m)
    assert p.alpha == 0 and p.sign is Sign.MINUS
    _, sup = nlep_residual(p, g)
    assert sup == 0


def test_wrong_alpha_gives_large_residual():
    g = CGrid.centered(2048, 20.0)
    p = explicit_pair_plus(1.0, 1)
    bad = NLEigenpair(p.alpha + 0.1, p.n, p.sp, p.sign, p.profile, p.tag)
    _, sup = nlep_residual(bad, g, taper=(10.0, 18.0))
    assert sup > 1e-2


def test_nonlinear_flux_values():
    f = np.array([0.0, 2.0, 1j])
    np.testing.assert_allclose(nonlinear_flux(f, 2.0), [0.0, 8.0, 1j])


def test_growth_exponents_examples():
    sp = SpectralParams(1, 1)
    g = growth_exponents(1.0, sp, 1 / 3)
    assert g.delta_wkbj == 0.0
    assert g.blowup_growth == pytest.approx(2.0)
    assert g.minimal_growth == pytest.approx(0.5)
    assert g.ordering_ok
    assert growth_exponents(0.5, sp, 0.2, alpha_exp=1.5).delta_wkbj == pytest.approx(1.0)
    with pytest.raises(ZeroDivisionError):
        growth_exponents(0.0, sp, 0.2)


@settings(max_examples=200, deadline=None)
@given(st.floats(1e-3, 10.0), st.integers(1, 3), st.floats(-10.0, 10.0))
def test_growth_ordering_always_holds(n, m, alpha):
    g = growth_exponents(n, SpectralParams(m, 1), alpha)
    assert g.ordering_ok and g.minimal_growth < g.blowup_growth


@pytest.mark.parametrize("N", [1, 2])
def test_branching_slope(N):
    c = branching_slope_check(N)
    assert c.analytic_slope == -N * N / 4
    assert c.slope_rel_error < 1e-6
    assert c.anchor_rel_error < 1e-6
