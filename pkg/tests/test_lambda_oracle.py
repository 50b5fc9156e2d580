"""The classical level-two oracle, checked against known values before the pipeline uses it."""

from fractions import Fraction

import pytest

from artifact.lambda_oracle import (hauptmodul_expansion, lambda_coefficients, lambda_value, level2_accessory,
                                    level2_h_values)


def test_lambda_q_series_integers():
    # lambda = 16 q - 128 q^2 + 704 q^3 - 3072 q^4 + 11488 q^5 - 38400 q^6
    assert lambda_coefficients(7)[:7] == (0, 16, -128, 704, -3072, 11488, -38400)


def test_lambda_at_i_is_one_half():
    assert abs(lambda_value(1j) - 0.5) < 1e-13


def test_lambda_translation_law():
    tau = 0.2 + 1.1j
    lam = lambda_value(tau)
    assert abs(lambda_value(tau + 1) - lam / (lam - 1)) < 1e-12


def test_lambda_inversion_law():
    tau = 0.1 + 1.3j
    assert abs(lambda_value(-1 / tau) - (1 - lambda_value(tau))) < 1e-12


def test_hauptmodul_leading_coefficients():
    e0 = hauptmodul_expansion("0", 3)
    assert e0[0] == 0 and e0[1] == -16
    einf = hauptmodul_expansion("inf", 2)
    assert abs(einf[-1]) == Fraction(1, 16)


def test_level2_h_values():
    h = level2_h_values()
    assert h["0"] == pytest.approx(256.0, rel=1e-15)
    assert h["1"] == pytest.approx(256.0, rel=1e-15)
    assert h["inf"] == pytest.approx(1 / 256, rel=1e-15)


def test_level2_accessory_values():
    # -a(2)/a(1)^2 = 128/256 at 0, and the opposite at 1
    assert level2_accessory() == {"0": 0.5, "1": -0.5}
