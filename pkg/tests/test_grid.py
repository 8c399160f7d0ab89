import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate as spi
from scipy import optimize as spo

from radial_euler.grid import (
    EVEN,
    ODD,
    RadialField,
    UsageError,
    ddr,
    ddr_values,
    div_radial,
    ko_dissipation_values,
    make_grid,
    radial_integral,
    restrict_to_coarse,
    weighted_Lp_norm,
)
from radial_euler.scenarios import bump


def test_make_grid_examples():
    np.testing.assert_array_equal(make_grid(1.0, 4).r, [0.125, 0.375, 0.625, 0.875])
    assert make_grid(10.0, 10).h == 1.0
    assert make_grid(0.5, 16).r.min() == 0.015625


def test_make_grid_errors():
    with pytest.raises(ValueError):
        make_grid(0.0, 16)
    with pytest.raises(ValueError):
        make_grid(-1.0, 16)


@settings(max_examples=100, deadline=None)
@given(r_max=st.floats(1e-3, 1e4), n=st.integers(1, 5000))
def test_grid_staggering(r_max, n):
    g = make_grid(r_max, n)
    assert g.r[0] == pytest.approx(g.h / 2)
    assert g.r[0] > 0
    assert g.r_max == pytest.approx(r_max)
    if n > 1:
        np.testing.assert_allclose(np.diff(g.r), g.h, rtol=1e-9)


def test_field_shape_and_parity_checked():
    g = make_grid(1.0, 16)
    with pytest.raises(ValueError):
        RadialField(g, np.zeros(15))
    with pytest.raises(ValueError):
        RadialField(g, np.zeros(16), "neither")


def test_ddr_zero_and_short():
    g = make_grid(1.0, 32)
    assert np.all(ddr(RadialField(g, g.zeros(), EVEN)).samples == 0.0)
    with pytest.raises(UsageError):
        ddr_values(np.ones(4), 0.1, EVEN)


def test_ddr_flips_parity():
    g = make_grid(1.0, 32)
    assert ddr(RadialField(g, g.zeros(), EVEN)).parity == ODD
    assert ddr(RadialField(g, g.zeros(), ODD)).parity == EVEN


def _smooth_cos(r):
    # cos(r) faded to zero well inside the domain
    return np.cos(r) * np.exp(-((r / 3.0) ** 8))


def _smooth_cos_prime(r):
    w = np.exp(-((r / 3.0) ** 8))
    return -np.sin(r) * w + np.cos(r) * w * (-8.0 * r**7 / 3.0**8)


def _observed_order(fn, exact, parity, ns, r_max=8.0):
    errs = []
    for n in ns:
        g = make_grid(r_max, n)
        errs.append(np.max(np.abs(ddr_values(fn(g.r), g.h, parity) - exact(g.r))))
    return math.log2(errs[0] / errs[1]), errs


def test_ddr_order_on_even_cos():
    order, errs = _observed_order(_smooth_cos, _smooth_cos_prime, EVEN, (400, 800))
    assert order >= 3.5
    # the constant C in C h^4 is stable between the two grids
    c0, c1 = errs[0] / (8.0 / 400) ** 4, errs[1] / (8.0 / 800) ** 4
    assert c1 == pytest.approx(c0, rel=0.2)


def test_ddr_odd_linear_is_one_in_interior():
    g = make_grid(1.0, 64)
    d = ddr_values(g.r.copy(), g.h, ODD)
    # the axis ghosts are exact for r; only the two cells next to r_max see the zero extension
    np.testing.assert_allclose(d[:-2], 1.0, atol=1e-12)


@pytest.mark.parametrize("deg", [0, 1, 2, 3, 4])
def test_ddr_polynomial_exactness_away_from_boundaries(deg):
    g = make_grid(10.0, 200)
    r = g.r
    x = r - 5.0
    u = x**deg
    exact = deg * x ** (deg - 1) if deg else np.zeros_like(r)
    d = ddr_values(u, g.h, EVEN)
    interior = slice(3, -3)
    np.testing.assert_allclose(d[interior], exact[interior], atol=1e-9 * max(1.0, 5.0**deg))


def test_second_derivative_order():
    errs = []
    for n in (400, 800):
        g = make_grid(8.0, n)
        r = g.r
        u = np.exp(-r * r)
        d2 = ddr_values(ddr_values(u, g.h, EVEN), g.h, ODD)
        exact = (4 * r * r - 2) * np.exp(-r * r)
        errs.append(np.max(np.abs(d2 - exact)))
    assert math.log2(errs[0] / errs[1]) >= 3.5


def test_div_radial_examples():
    g = make_grid(1.0, 64)
    d = div_radial(RadialField(g, g.r.copy(), ODD)).samples
    np.testing.assert_allclose(d[:-2], 2.0, atol=1e-12)
    assert np.all(div_radial(RadialField(g, g.zeros(), ODD)).samples == 0.0)
    with pytest.raises(UsageError):
        div_radial(RadialField(g, g.zeros(), EVEN))


def test_div_radial_cubic_order():
    errs = []
    for n in (200, 400):
        g = make_grid(2.0, n)
        r = g.r
        phi = r**3 * np.exp(-((r / 1.2) ** 8))
        exact = 4 * r * r * np.exp(-((r / 1.2) ** 8)) + r**3 * np.exp(-((r / 1.2) ** 8)) * (-8 * r**7 / 1.2**8)
        d = div_radial(RadialField(g, phi, ODD)).samples
        errs.append(np.max(np.abs(d - exact)))
    assert math.log2(errs[0] / errs[1]) >= 3.5


def test_div_radial_integrates_to_zero_for_compact_support():
    g = make_grid(1.0, 2048)
    phi = (g.r / 0.3) * bump(g.r, 0.3)
    total = 2 * math.pi * radial_integral(div_radial(RadialField(g, phi, ODD)).samples, g)
    assert abs(total) <= 1e-8


def test_norm_zero_field():
    g = make_grid(1.0, 64)
    z = RadialField(g, g.zeros())
    w = RadialField(g, np.ones(64))
    for p in (2, 3, np.inf):
        assert weighted_Lp_norm(z, w, p) == 0.0


def _smoothed_disk(r, width=0.02):
    return 0.5 * (1.0 - np.tanh((r - 1.0) / width))


def test_norm_of_smoothed_disk_against_quadrature():
    g = make_grid(2.0, 4096)
    phi = RadialField(g, _smoothed_disk(g.r))
    ref = math.sqrt(2 * math.pi * spi.quad(lambda r: _smoothed_disk(r) ** 2 * r, 0, 2, points=[1.0], limit=200)[0])
    val = weighted_Lp_norm(phi, RadialField(g, np.ones(g.n)), 2)
    assert abs(val - ref) <= 1e-3
    assert val == pytest.approx(ref, abs=1e-10)
    # smoothing moves the value off sqrt(pi) by about 0.9 times the width
    assert abs(ref - math.sqrt(math.pi)) < 0.02


def test_norm_inf_of_ramp():
    g = make_grid(2.0, 4096)
    phi = g.r * _smoothed_disk(g.r, 1e-3)
    best = spo.minimize_scalar(lambda r: -r * _smoothed_disk(r, 1e-3), bounds=(0.9, 1.1), method="bounded",
                               options={"xatol": 1e-12})
    # sampling can miss the peak by at most half a cell times the slope
    assert weighted_Lp_norm(RadialField(g, phi), None, np.inf) == pytest.approx(-best.fun, abs=g.h)


def test_norm_rejects_negative_weight_and_shape_mismatch():
    g = make_grid(1.0, 16)
    f = RadialField(g, np.ones(16))
    with pytest.raises(ValueError):
        weighted_Lp_norm(f, -np.ones(16), 2)
    with pytest.raises(ValueError):
        weighted_Lp_norm(f, np.ones(15), 2)


@settings(max_examples=100, deadline=None)
@given(c=st.floats(-1e6, 1e6).filter(lambda c: c == 0 or abs(c) > 1e-100), p=st.sampled_from([2, 3, np.inf]), seed=st.integers(0, 1000))
def test_norm_homogeneous(c, p, seed):
    g = make_grid(1.0, 64)
    rng = np.random.default_rng(seed)
    u = rng.normal(size=64)
    base = weighted_Lp_norm(RadialField(g, u), None, p)
    scaled = weighted_Lp_norm(RadialField(g, c * u), None, p)
    assert scaled == pytest.approx(abs(c) * base, rel=1e-12, abs=1e-300)


def test_radial_integral_is_fourth_order():
    errs = []
    # the integrand is negligible at r_max, so only the axis end limits the order
    for n in (128, 256):
        g = make_grid(8.0, n)
        errs.append(abs(radial_integral(np.exp(-g.r**2), g) - 0.5))
    assert math.log2(errs[0] / errs[1]) >= 3.5


@pytest.mark.parametrize("parity", [EVEN, ODD])
def test_restriction_order(parity):
    errs = []
    for n in (128, 256):
        fine = make_grid(8.0, 2 * n)
        coarse = make_grid(8.0, n)
        fn = (lambda r: np.exp(-r * r)) if parity == EVEN else (lambda r: r * np.exp(-r * r))
        errs.append(np.max(np.abs(restrict_to_coarse(fn(fine.r), parity) - fn(coarse.r))))
    assert math.log2(errs[0] / errs[1]) >= 5.5


def test_restriction_rejects_odd_length():
    with pytest.raises(ValueError):
        restrict_to_coarse(np.ones(7), EVEN)


@pytest.mark.parametrize("parity", [EVEN, ODD])
def test_ko_dissipation_is_negative_semidefinite(parity):
    n, h = 48, 0.1
    for sigma in (0.3, np.linspace(0.3, 0.01, n)):
        m = np.array([ko_dissipation_values(e, h, parity, sigma) for e in np.eye(n)]).T
        np.testing.assert_allclose(m, m.T, atol=1e-12)
        assert np.linalg.eigvalsh(0.5 * (m + m.T)).max() <= 1e-9


def test_ko_dissipation_uniform_array_matches_scalar():
    rng = np.random.default_rng(3)
    u = rng.normal(size=40)
    a = ko_dissipation_values(u, 0.05, ODD, 0.2)
    b = ko_dissipation_values(u, 0.05, ODD, np.full(40, 0.2))
    np.testing.assert_allclose(a, b, atol=1e-12)


def test_ko_dissipation_is_high_order():
    # on smooth data the term is O(h^5)
    vals = []
    for n in (200, 400):
        g = make_grid(8.0, n)
        vals.append(np.max(np.abs(ko_dissipation_values(np.exp(-g.r**2), g.h, EVEN, 0.3))))
    assert math.log2(vals[0] / vals[1]) >= 4.5
