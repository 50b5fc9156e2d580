"""Truncated power-series arithmetic and the analytic q-expansion at a cusp.

In a cusp chart xi = log t + B(t)/A(t) and the normalized coordinate obeys
xi = 2 pi i z + s_star.  With u = e^{s_star} q this reads

    t exp(B(t) / A(t)) = u,

so t(u) is the compositional inverse of a power series with leading
coefficient one, and J = p + t (finite cusp) or J = 1/t (cusp at infinity).
"""

from __future__ import annotations

import math

import numpy as np


def mul(a: np.ndarray, b: np.ndarray, n: int) -> np.ndarray:
    return np.convolve(a[:n], b[:n])[:n]


def inverse(a: np.ndarray, n: int) -> np.ndarray:
    out = np.zeros(n, dtype=complex)
    out[0] = 1 / a[0]
    for k in range(1, n):
        m = min(k, len(a) - 1)
        out[k] = -np.dot(a[1:m + 1], out[k - 1:k - m - 1 if k - m - 1 >= 0 else None:-1]) / a[0]
    return out


def exp_series(a: np.ndarray, n: int) -> np.ndarray:
    """exp of a series with a[0] = 0, via e' = a' e."""
    if abs(a[0]) > 0:
        raise ValueError("exp_series needs zero constant term")
    out = np.zeros(n, dtype=complex)
    out[0] = 1
    da = np.arange(1, n) * a[1:n]
    for k in range(1, n):
        # k e_k = sum_{j=1}^{k} j a_j e_{k-j}
        out[k] = np.dot(da[:k], out[k - 1::-1][:k]) / k
    return out


def compose(a: np.ndarray, b: np.ndarray, n: int) -> np.ndarray:
    """a(b(x)) for b with zero constant term."""
    out = np.zeros(n, dtype=complex)
    power = np.zeros(n, dtype=complex)
    power[0] = 1
    for k in range(min(n, len(a))):
        out += a[k] * power
        power = mul(power, b, n)
    return out


def revert(f: np.ndarray, n: int) -> np.ndarray:
    """Compositional inverse g of f (f[0] = 0, f[1] != 0): f(g(x)) = x."""
    if abs(f[0]) > 0 or f[1] == 0:
        raise ValueError("series not invertible")
    g = np.zeros(n, dtype=complex)
    g[1] = 1 / f[1]
    for k in range(2, n):
        # coefficient k of f(g) with g_k unknown enters linearly as f1 g_k
        fg = compose(f, g, k + 1)
        g[k] = -fg[k] / f[1]
    return g


def revert_cusp_series(a: np.ndarray, b: np.ndarray, s_star: float, center: complex,
                       at_infinity: bool, k_max: int) -> dict:
    """a(k) for k <= k_max (from k = -1 at infinity) in q = e^{2 pi i z}."""
    n = k_max + 3
    ratio = mul(b, inverse(a, n), n)
    e = exp_series(ratio, n)
    fser = np.zeros(n, dtype=complex)
    fser[1:] = e[: n - 1]  # t exp(B/A)
    t_of_u = revert(fser, n)
    scale = math.exp(s_star)
    out = {}
    if not at_infinity:
        out[0] = complex(center)
        for k in range(1, k_max + 1):
            out[k] = complex(t_of_u[k] * scale**k)
        return out
    # J = 1/t = 1/(u (g1 + g2 u + ...))
    tail = inverse(t_of_u[1:], n - 1)
    for k in range(-1, k_max + 1):
        idx = k + 1
        out[k] = complex(tail[idx] * scale**k) if idx < len(tail) else 0j
    return out
