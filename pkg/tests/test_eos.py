import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from radial_euler.eos import (
    DomainError,
    EosSpec,
    density_from_dot_c,
    dot_c,
    pressure,
    sound_speed,
)

CHAP = EosSpec.chaplygin()
POLY2 = EosSpec.polytropic(2.0)


def test_defaults():
    assert (CHAP.P0, CHAP.B) == (2.0, 1.0)
    assert POLY2.A == 0.5
    assert EosSpec.polytropic(3.0).A == pytest.approx(1.0 / 3.0)


@pytest.mark.parametrize(
    "eos, rho, expected",
    [
        (CHAP, 1.0, 1.0),  # P0 = 2, B = 1 at rest
        (POLY2, 1.0, 0.5),
        (CHAP, 0.5, 0.0),
    ],
)
def test_pressure_examples(eos, rho, expected):
    assert pressure(eos, rho) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize(
    "eos, rho, expected",
    [(CHAP, 1.0, 1.0), (POLY2, 1.0, 1.0), (CHAP, 2.0, 0.5)],
)
def test_sound_speed_examples(eos, rho, expected):
    assert sound_speed(eos, rho) == pytest.approx(expected, abs=1e-15)


def test_dot_c_examples():
    assert dot_c(EosSpec.polytropic(1.0), math.e) == pytest.approx(1.0, abs=1e-15)
    assert dot_c(EosSpec.polytropic(3.0), 1.0) == 0.0
    assert dot_c(POLY2, 4.0) == pytest.approx(2.0, abs=1e-15)


def test_domain_errors():
    for fn in (pressure, sound_speed):
        with pytest.raises(DomainError):
            fn(CHAP, 0.0)
        with pytest.raises(DomainError):
            fn(POLY2, -1.0)
    with pytest.raises(DomainError):
        dot_c(POLY2, 0.0)
    with pytest.raises(TypeError):
        dot_c(CHAP, 1.0)
    with pytest.raises(DomainError):
        density_from_dot_c(POLY2, -5.0)


def test_invalid_parameters():
    with pytest.raises(ValueError):
        EosSpec.chaplygin(P0=-1.0)
    with pytest.raises(ValueError):
        EosSpec.polytropic(0.5)
    with pytest.raises(ValueError):
        EosSpec(kind="stiffened")


@pytest.mark.parametrize("eos", [CHAP, POLY2, EosSpec.polytropic(1.4), EosSpec.chaplygin(3.0, 0.7)])
def test_sound_speed_squared_is_pressure_slope(eos):
    rho = np.linspace(0.5, 2.0, 61)
    d = 1e-4
    slope = (pressure(eos, rho + d) - pressure(eos, rho - d)) / (2 * d)
    np.testing.assert_allclose(sound_speed(eos, rho) ** 2, slope, rtol=1e-6)


@pytest.mark.parametrize("gamma", [1.0, 1.4, 2.0, 3.0, 5.0])
def test_dot_c_rest_and_monotone(gamma):
    eos = EosSpec.polytropic(gamma)
    assert dot_c(eos, 1.0) == 0.0
    vals = dot_c(eos, np.linspace(0.1, 5.0, 400))
    assert np.all(np.diff(vals) > 0)


def test_dot_c_isothermal_limit():
    eos = EosSpec.polytropic(1.0 + 1e-6)
    rho = np.linspace(0.5, 2.0, 31)
    np.testing.assert_allclose(dot_c(eos, rho), np.log(rho), atol=1e-4)


def test_sound_speed_linear_in_dot_c():
    eos = EosSpec.polytropic(2.5)
    rho = np.linspace(0.3, 3.0, 50)
    np.testing.assert_allclose(sound_speed(eos, rho), 1.0 + eos.kappa * dot_c(eos, rho), rtol=1e-13)


@settings(max_examples=200, deadline=None)
@given(
    gamma=st.floats(1.0, 5.0),
    rho=st.floats(1e-3, 1e3),
)
def test_dot_c_round_trip(gamma, rho):
    eos = EosSpec.polytropic(gamma)
    assert density_from_dot_c(eos, dot_c(eos, rho)) == pytest.approx(rho, rel=1e-10)


def test_scalar_in_scalar_out():
    assert isinstance(pressure(CHAP, 1.5), float)
    assert isinstance(dot_c(POLY2, 1.5), float)
    assert pressure(CHAP, np.array([1.0, 2.0])).shape == (2,)


def test_dot_c_round_trip_next_to_isothermal():
    # gamma one ulp above 1 used to lose every digit in 1 + k c_dot
    eos = EosSpec.polytropic(1.0 + 2.0**-52)
    assert density_from_dot_c(eos, dot_c(eos, 2.0)) == pytest.approx(2.0, rel=1e-14)
