"""Modular lambda function and the level-2 Hauptmodul, by exact q-series.

The series is built from the product

    lambda(tau) = 16 q prod_{m>=1} ((1 + q^{2m}) / (1 + q^{2m-1}))^8,
    q = exp(i pi tau),

with integer arithmetic, so every coefficient is exact.  The thrice-punctured
sphere C minus {0, 1} is uniformized by J(z) = lambda(1 - 1/z), whose cusps
0, 1, infinity sit over w = 0, 1, infinity.  Each cusp has width 2; with the
width-one scaling maps the expansions in q = exp(2 pi i z) are

    J(sigma_0 z)   = lambda(2z) / (lambda(2z) - 1)
    J(sigma_1 z)   = 1 - lambda(2z) / (lambda(2z) - 1)
    J(sigma_inf z) = 1 - 1 / lambda(2z)

and lambda(2z) has the same integer coefficients in the new q.
"""

from __future__ import annotations

import cmath
from fractions import Fraction
from functools import lru_cache


def _mul(a, b, n):
    out = [0] * n
    for i, x in enumerate(a[:n]):
        if x == 0:
            continue
        for j, y in enumerate(b[: n - i]):
            out[i + j] += x * y
    return out


def _inv(a, n):
    """Inverse of a power series with a[0] = +-1 (stays integral)."""
    if a[0] not in (1, -1):
        raise ValueError("leading coefficient must be a unit")
    out = [0] * n
    out[0] = a[0]
    for k in range(1, n):
        s = sum(a[j] * out[k - j] for j in range(1, min(k, len(a) - 1) + 1))
        out[k] = -a[0] * s
    return out


@lru_cache(maxsize=None)
def lambda_coefficients(n_terms: int = 40) -> tuple:
    """Integer coefficients c_k with lambda = sum_{k>=1} c_k q^k, k < n_terms."""
    n = n_terms
    num = [1] + [0] * (n - 1)
    den = [1] + [0] * (n - 1)
    for m in range(1, n):
        if 2 * m < n:
            f = [0] * n
            f[0], f[2 * m] = 1, 1
            for _ in range(8):
                num = _mul(num, f, n)
        if 2 * m - 1 < n:
            g = [0] * n
            g[0], g[2 * m - 1] = 1, 1
            for _ in range(8):
                den = _mul(den, g, n)
    ratio = _mul(num, _inv(den, n), n)
    return tuple([0] + [16 * c for c in ratio[: n - 1]])


def lambda_value(tau: complex, n_terms: int = 60) -> complex:
    """lambda(tau) by direct summation of the q-series (needs Im tau large enough)."""
    q = cmath.exp(1j * cmath.pi * tau)
    coeffs = lambda_coefficients(n_terms)
    total = 0j
    qk = 1 + 0j
    for c in coeffs:
        total += c * qk
        qk *= q
    return total


def _frac_mul(a, b, n):
    out = [Fraction(0)] * n
    for i, x in enumerate(a[:n]):
        if x == 0:
            continue
        for j, y in enumerate(b[: n - i]):
            out[i + j] += x * y
    return out


def _frac_inv(a, n):
    out = [Fraction(0)] * n
    out[0] = 1 / Fraction(a[0])
    for k in range(1, n):
        s = sum(a[j] * out[k - j] for j in range(1, min(k, len(a) - 1) + 1))
        out[k] = -s * out[0]
    return out


def hauptmodul_expansion(cusp: str, n_terms: int = 12) -> dict:
    """Exact q-expansion of the level-2 Hauptmodul at cusp '0', '1' or 'inf'.

    Returns a dict {k: Fraction} of the coefficients a(k).
    """
    n = n_terms + 2
    lam = [Fraction(c) for c in lambda_coefficients(n + 1)]
    if cusp in ("0", "1"):
        # lambda / (lambda - 1) = -lambda * 1/(1 - lambda)
        one_minus = [Fraction(1)] + [-c for c in lam[1:n]]
        series = _frac_mul([-c for c in lam[:n]], _frac_inv(one_minus, n), n)
        if cusp == "1":
            series = [Fraction(1) - series[0]] + [-c for c in series[1:]]
        return {k: series[k] for k in range(0, n_terms + 1)}
    if cusp == "inf":
        # lambda = 16 q (1 + u(q));  1/lambda = q^{-1}/16 * 1/(1+u)
        shifted = [lam[k + 1] / 16 for k in range(n)]
        inv = _frac_inv(shifted, n)
        out = {-1: Fraction(-1, 16) * inv[0]}
        for k in range(0, n_terms + 1):
            out[k] = Fraction(-1, 16) * inv[k + 1]
        out[0] += 1
        return out
    raise ValueError(f"unknown cusp {cusp!r}")


def level2_h_values() -> dict:
    """Oracle h-values |a(1)|^2 at 0, 1 and |a(-1)|^2 at infinity."""
    e0 = hauptmodul_expansion("0", 2)
    e1 = hauptmodul_expansion("1", 2)
    einf = hauptmodul_expansion("inf", 2)
    return {
        "0": float(e0[1]) ** 2,
        "1": float(e1[1]) ** 2,
        "inf": float(einf[-1]) ** 2,
    }


def level2_accessory() -> dict:
    """c_i = -a_i(2)/a_i(1)^2 at the two finite cusps."""
    out = {}
    for cusp in ("0", "1"):
        e = hauptmodul_expansion(cusp, 3)
        out[cusp] = float(-e[2] / e[1] ** 2)
    return out
