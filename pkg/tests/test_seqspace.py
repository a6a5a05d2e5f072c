import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from schrospec.kernel import kernel_derivative
from schrospec.polyalg import SpectralParams
from schrospec.seqspace import (
    EigenvalueHitError,
    SeqVec,
    admissible_growth,
    apply_diag_b,
    h2m_norm,
    in_sector,
    inner,
    l2_norm,
    mode_norm_estimate,
    resolvent_apply,
    resolvent_tail,
    sector_constant,
    tail_bound,
)

SP1 = SpectralParams(1, 1)
SP2 = SpectralParams(2, 1)


def _random(rng, sp, lo, hi):
    ks = rng.integers(lo, hi, size=rng.integers(1, 20))
    return SeqVec({(int(k),): complex(*rng.normal(size=2)) for k in ks}, sp)


def test_norm_examples():
    assert l2_norm(SeqVec({(3,): 1.0}, SP1)) == 1
    assert l2_norm(SeqVec({(0,): 1.0, (1,): 1.0}, SP1)) == pytest.approx(math.sqrt(2))
    assert l2_norm(SeqVec({}, SP1)) == 0
    assert h2m_norm(SeqVec({(0,): 1.0}, SP1)) == 1
    assert h2m_norm(SeqVec({(2,): 1.0}, SP1)) == pytest.approx(math.sqrt(2))
    assert h2m_norm(SeqVec({(4,): 1.0}, SP2)) == pytest.approx(math.sqrt(2))


def test_multiindex_length_checked():
    with pytest.raises(ValueError):
        SeqVec({(1, 2): 1.0}, SP1)


def test_diag_b_examples():
    assert apply_diag_b(SeqVec({(0,): 1.0}, SP1))[(0,)] == 0
    assert apply_diag_b(SeqVec({(3,): 2.0}, SP1))[(3,)] == pytest.approx(-3.0)
    assert SeqVec({(3,): 1.0}, SP2).eigenvalues() == {(3,): -0.75}


def test_diag_b_two_dimensional():
    sp = SpectralParams(1, 2)
    w = apply_diag_b(SeqVec({(1, 2): 1.0, (0, 0): 5.0}, sp))
    assert w[(1, 2)] == pytest.approx(-1.5) and w[(0, 0)] == 0


@pytest.mark.parametrize("m", [1, 2, 3])
def test_diag_b_symmetric(m):
    rng = np.random.default_rng(m)
    sp = SpectralParams(m, 1)
    for _ in range(20):
        v, w = _random(rng, sp, 0, 30), _random(rng, sp, 0, 30)
        a, b = inner(apply_diag_b(v), w), inner(v, apply_diag_b(w))
        assert abs(a - b) <= 1e-12 * max(abs(a), 1e-300)


def test_inner_is_conjugate_linear_in_second_slot():
    v = SeqVec({(0,): 1.0}, SP1)
    w = SeqVec({(0,): 1j}, SP1)
    assert inner(v, w) == -1j
    assert inner(v, v) == l2_norm(v) ** 2


def test_resolvent_examples():
    assert resolvent_apply(SeqVec({(0,): 1.0}, SP1), 1.0).vec[(0,)] == pytest.approx(-1.0)
    assert resolvent_apply(SeqVec({(2,): 1.0}, SP1), 1.0).vec[(2,)] == pytest.approx(-0.5)


def test_resolvent_rejects_eigenvalue():
    with pytest.raises(EigenvalueHitError):
        resolvent_apply(SeqVec({(2,): 1.0}, SP1), -1.0)
    # the hit only matters on the support
    assert resolvent_apply(SeqVec({(0,): 1.0}, SP1), -1.0).norm == pytest.approx(1.0)


@pytest.mark.parametrize("m", [1, 2])
@pytest.mark.parametrize("K", [10, 100, 1000])
def test_resolvent_tail_bound(m, K):
    sp = SpectralParams(m, 1)
    rng = np.random.default_rng(K + m)
    v = _random(rng, sp, K, K + 50)
    v = SeqVec({b: a / l2_norm(v) for b, a in v.entries.items()}, sp)
    assert resolvent_tail(v, 1.0, K) <= tail_bound(K, sp)
    # the bound is attained in the limit by a single mode at |beta| = K and lam -> 0
    assert resolvent_tail(SeqVec({(K,): 1.0}, sp), 1e-12, K) == pytest.approx(tail_bound(K, sp), rel=1e-9)


def test_tail_bound_value():
    assert tail_bound(100, SP1) == 0.02


def test_sector_membership():
    assert in_sector(1.0, 0.1)
    assert in_sector(complex(-1, 10), math.pi / 4)
    assert not in_sector(-1.0, math.pi / 4)
    assert not in_sector(0, math.pi / 4)


def test_sector_bound_random_lambdas():
    theta = math.pi / 4
    rng = np.random.default_rng(10)
    for _ in range(50):
        r = rng.uniform(0.05, 20.0)
        ang = rng.uniform(-1, 1) * (math.pi / 2 + theta) * (1 - 1e-9)
        lam = r * complex(math.cos(ang), math.sin(ang))
        v = _random(rng, SP1, 0, 40)
        res = resolvent_apply(v, lam, theta)
        assert res.bound_ok
        assert res.bound == pytest.approx(sector_constant(theta) * l2_norm(v) / r)
    assert sector_constant(theta) == pytest.approx(1 / math.sin(theta))


@pytest.mark.parametrize("theta", [0.1, 0.5, 1.0, 1.4])
def test_sector_constant_is_sharp(theta):
    # a mode at lambda_beta = -1/2 near the sector edge nearly attains 1/cos(theta)
    v = SeqVec({(1,): 1.0}, SP1)
    best = 0.0
    for ang in np.linspace(0.0, 1 - 1e-6, 200) * (math.pi / 2 + theta):
        for r in np.geomspace(1e-2, 1e2, 200):
            lam = r * complex(math.cos(ang), math.sin(ang))
            best = max(best, resolvent_apply(v, lam).norm * abs(lam))
    assert best <= sector_constant(theta)
    assert best >= 0.99 * sector_constant(theta)


def test_admissible_growth_thresholds():
    assert not admissible_growth(0.0, SP1)
    assert admissible_growth(-1.0, SP1)
    assert admissible_growth(0.99, SP2) and not admissible_growth(1.0, SP2)
    assert admissible_growth(-1.0, SpectralParams(3, 1))


@settings(max_examples=100, deadline=None)
@given(st.dictionaries(st.integers(0, 60), st.complex_numbers(max_magnitude=1e6, allow_nan=False), max_size=15), st.integers(1, 3))
def test_h2m_dominates_l2(entries, m):
    v = SeqVec({(k,): a for k, a in entries.items()}, SpectralParams(m, 1))
    assert h2m_norm(v) >= l2_norm(v)


def test_json_round_trip():
    v = SeqVec({(0,): 1.5, (3,): -2j}, SP2)
    w = SeqVec.from_json(v.to_json(), SP2)
    assert w.entries == v.entries and w.sp == SP2


# -- mode norm estimate --------------------------------------------------------------


@pytest.mark.parametrize("m", [1, 2, 3])
def test_mode_norm_positive(m):
    assert all(mode_norm_estimate(l, SpectralParams(m, 1)) > 0 for l in range(2, 60))


def test_mode_norm_m1_closed_form():
    for l in range(2, 30):
        assert mode_norm_estimate(l, SP1) == pytest.approx(2.0**-l, rel=1e-12)
    with pytest.raises(ValueError):
        mode_norm_estimate(1, SP1)


@pytest.mark.parametrize("m", [1, 2, 3])
def test_mode_norm_decays_beyond_eight(m):
    vals = [mode_norm_estimate(l, SpectralParams(m, 1)) for l in range(8, 40)]
    assert np.all(np.diff(vals) < 0)


def _quadrature_mode_norm(l):
    g = kernel_derivative((l,), SP1, 512, 8.0)
    y = g.axes()[0]
    return g.integrate(np.abs(g.data) ** 2 * np.exp(-(y**2))).real


@pytest.mark.xfail(strict=True, reason="leading-order estimate omits l-dependent prefactors; off by 6x to 17x for l <= 8")
def test_mode_norm_within_factor_three_of_quadrature():
    for l in range(2, 5):
        ratio = _quadrature_mode_norm(l) / mode_norm_estimate(l, SP1)
        assert 1 / 3 <= ratio <= 3


def test_mode_norm_ratio_to_quadrature_is_bounded():
    ratios = [_quadrature_mode_norm(l) / mode_norm_estimate(l, SP1) for l in range(2, 9)]
    assert all(0.05 < r < 1 for r in ratios)
