"""Central finite differences in the complex coordinates of M_{0,n}.

Functions take a tuple of finite punctures and return a real (or complex)
scalar or array.  Wirtinger derivatives are assembled from real partials,
d/dw = (d/dx - i d/dy) / 2, and Hessians d^2/dw_j dconj(w_k) from the
9-point mixed stencils, Richardson-extrapolated over two step sizes.
"""

from __future__ import annotations

import numpy as np

from .errors import StencilOutOfDomain
from .fuchsian_ode import PunctureConfig

MIN_CLEARANCE = 1e-3


def _check(points, step: float) -> None:
    cfg = PunctureConfig(tuple(points))
    if cfg.min_separation() <= 2 * step + MIN_CLEARANCE:
        raise StencilOutOfDomain(f"stencil of step {step} leaves the moduli space at {points}")


def _shift(w, moves):
    w = list(w)
    for j, dz in moves:
        w[j] = w[j] + dz
    return tuple(w)


class Memo:
    """Caches function values on stencil points (several derivatives share nodes)."""

    def __init__(self, func):
        self.func = func
        self.cache = {}

    def __call__(self, w):
        key = tuple(complex(round(z.real, 14), round(z.imag, 14)) for z in w)
        if key not in self.cache:
            self.cache[key] = self.func(key)
        return self.cache[key]


def wirtinger(func, w, step: float = 1e-4, points: int = 4):
    """d func / d w_j for every j; ``points`` is 2 (second order) or 4 (fourth order)."""
    w = tuple(complex(z) for z in w)
    _check(w, 2 * step if points == 4 else step)
    func = func if isinstance(func, Memo) else Memo(func)
    out = []
    for j in range(len(w)):
        parts = []
        for direction in (1.0, 1j):
            h = step * direction
            if points == 2:
                d = (func(_shift(w, [(j, h)])) - func(_shift(w, [(j, -h)]))) / (2 * step)
            elif points == 4:
                d = (-func(_shift(w, [(j, 2 * h)])) + 8 * func(_shift(w, [(j, h)]))
                     - 8 * func(_shift(w, [(j, -h)])) + func(_shift(w, [(j, -2 * h)]))) / (12 * step)
            else:
                raise ValueError("points must be 2 or 4")
            parts.append(d)
        out.append(0.5 * (parts[0] - 1j * parts[1]))
    return np.array(out)


def _real_hessian(func, w, step):
    """Matrix of second partials in (x_1, y_1, x_2, y_2, ...)."""
    m = 2 * len(w)
    dirs = []
    for j in range(len(w)):
        dirs += [(j, 1.0), (j, 1j)]
    f0 = func(w)
    hess = [[None] * m for _ in range(m)]
    for a in range(m):
        ja, da = dirs[a]
        fp = func(_shift(w, [(ja, step * da)]))
        fm = func(_shift(w, [(ja, -step * da)]))
        hess[a][a] = (fp - 2 * f0 + fm) / step**2
        for b in range(a):
            jb, db = dirs[b]
            pp = func(_shift(w, [(ja, step * da), (jb, step * db)]))
            pm = func(_shift(w, [(ja, step * da), (jb, -step * db)]))
            mp = func(_shift(w, [(ja, -step * da), (jb, step * db)]))
            mm = func(_shift(w, [(ja, -step * da), (jb, -step * db)]))
            hess[a][b] = hess[b][a] = (pp - pm - mp + mm) / (4 * step**2)
    return hess


def mixed_hessian(func, w, step: float = 0.02, richardson: bool = True):
    """d^2 func / d w_j d conj(w_k) as an (n-3) x (n-3) complex matrix.

    Array-valued fields give shape (n-3, n-3) + value shape.

    With ``richardson`` the stencil is evaluated at ``step`` and ``step / 2``
    and combined to cancel the O(step^2) error.
    """
    w = tuple(complex(z) for z in w)
    _check(w, step)
    func = func if isinstance(func, Memo) else Memo(func)

    def once(h):
        r = _real_hessian(func, w, h)
        d = len(w)
        out = np.zeros((d, d) + np.shape(r[0][0]), dtype=complex)
        for j in range(d):
            for k in range(d):
                xx, xy = r[2 * j][2 * k], r[2 * j][2 * k + 1]
                yx, yy = r[2 * j + 1][2 * k], r[2 * j + 1][2 * k + 1]
                # d_j dbar_k = (d_xj - i d_yj)(d_xk + i d_yk) / 4
                out[j, k] = 0.25 * ((xx + yy) + 1j * (xy - yx))
        return out

    coarse = once(step)
    if not richardson:
        return coarse
    fine = once(step / 2)
    return (4 * fine - coarse) / 3


def richardson_error(func, w, step: float = 0.02) -> float:
    """Scale of the O(step^4) remainder: change of the extrapolated Hessian when the step doubles."""
    a = mixed_hessian(func, w, step)
    b = mixed_hessian(func, w, 2 * step)
    return float(np.max(np.abs(a - b)))
