"""Projective 2x2 matrices acting on the Riemann sphere.

Maps are stored normalized to determinant one with a deterministic sign, so
two matrices that differ by an overall sign compare equal.  The point at
infinity is represented by ``math.inf`` (a real float) throughout.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import NearDegenerate, NotRealizable

INF = math.inf

CLASSIFY_TOL = 1e-10
FIXED_POINT_TOL = 1e-10


def is_inf(z) -> bool:
    return isinstance(z, float) and math.isinf(z)


def _sign_key(entries):
    for e in entries:
        if e != 0:
            return -1.0 if (e.real < 0 or (e.real == 0 and e.imag < 0)) else 1.0
    return 1.0


@dataclass(frozen=True)
class MoebiusMap:
    a: complex
    b: complex
    c: complex
    d: complex

    @classmethod
    def from_entries(cls, a, b, c, d) -> "MoebiusMap":
        a, b, c, d = complex(a), complex(b), complex(c), complex(d)
        det = a * d - b * c
        if det == 0:
            raise ValueError("singular matrix")
        s = cmath.sqrt(det)
        a, b, c, d = a / s, b / s, c / s, d / s
        # first entry with nonnegative real part decides the sign
        sign = _sign_key((a, b, c, d))
        return cls(sign * a, sign * b, sign * c, sign * d)

    @classmethod
    def from_matrix(cls, m) -> "MoebiusMap":
        m = np.asarray(m, dtype=complex)
        return cls.from_entries(m[0, 0], m[0, 1], m[1, 0], m[1, 1])

    @classmethod
    def identity(cls) -> "MoebiusMap":
        return cls(1 + 0j, 0j, 0j, 1 + 0j)

    @classmethod
    def translation(cls, t) -> "MoebiusMap":
        return cls.from_entries(1, t, 0, 1)

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=complex)

    @property
    def det(self) -> complex:
        return self.a * self.d - self.b * self.c

    @property
    def trace(self) -> complex:
        return self.a + self.d

    def __matmul__(self, other: "MoebiusMap") -> "MoebiusMap":
        return compose(self, other)

    def inverse(self) -> "MoebiusMap":
        return MoebiusMap.from_entries(self.d, -self.b, -self.c, self.a)

    def __call__(self, z):
        if is_inf(z):
            return INF if self.c == 0 else self.a / self.c
        den = self.c * z + self.d
        if den == 0:
            return INF
        return (self.a * z + self.b) / den

    def derivative(self, z):
        return 1.0 / (self.c * z + self.d) ** 2

    def close_to(self, other: "MoebiusMap", tol: float = 1e-9) -> bool:
        m1, m2 = self.matrix, other.matrix
        return bool(min(np.max(np.abs(m1 - m2)), np.max(np.abs(m1 + m2))) <= tol)

    def __eq__(self, other) -> bool:
        if not isinstance(other, MoebiusMap):
            return NotImplemented
        return self.close_to(other, 1e-12)

    def __hash__(self):
        return hash(tuple(round(x.real, 9) + 1j * round(x.imag, 9)
                          for x in (self.a, self.b, self.c, self.d)))

    def is_real(self, tol: float = 1e-9) -> bool:
        return max(abs(x.imag) for x in (self.a, self.b, self.c, self.d)) <= tol


def compose(f: MoebiusMap, g: MoebiusMap) -> MoebiusMap:
    """Return f o g."""
    return MoebiusMap.from_entries(
        f.a * g.a + f.b * g.c,
        f.a * g.b + f.b * g.d,
        f.c * g.a + f.d * g.c,
        f.c * g.b + f.d * g.d,
    )


def conjugate(m: MoebiusMap, g: MoebiusMap) -> MoebiusMap:
    """Return g^{-1} o m o g."""
    return compose(g.inverse(), compose(m, g))


def map_sending(p, q, r) -> MoebiusMap:
    """Unique map sending p, q, r to 0, 1, infinity."""
    pts = [p, q, r]
    if is_inf(p):
        m = MoebiusMap.from_entries(0, q - r, 1, -r)
    elif is_inf(q):
        m = MoebiusMap.from_entries(1, -p, 1, -r)
    elif is_inf(r):
        m = MoebiusMap.from_entries(1, -p, 0, q - p)
    else:
        m = MoebiusMap.from_entries(q - r, -p * (q - r), q - p, -r * (q - p))
    for z, target in zip(pts, (0.0, 1.0, INF)):
        w = m(z)
        if is_inf(target) != is_inf(w):
            raise ValueError("points not distinct")
    return m


def chordal(z, w) -> float:
    """Chordal distance on the Riemann sphere."""
    if is_inf(z) and is_inf(w):
        return 0.0
    # hypot keeps points near infinity from overflowing the squares
    if is_inf(z):
        return 2.0 / math.hypot(1.0, abs(w))
    if is_inf(w):
        return 2.0 / math.hypot(1.0, abs(z))
    return 2 * abs(z - w) / (math.hypot(1.0, abs(z)) * math.hypot(1.0, abs(w)))


@dataclass(frozen=True)
class MapClass:
    tag: str
    multiplier: complex | None
    fixed_points: tuple


def fixed_points(m: MoebiusMap) -> tuple:
    """Fixed points ordered attracting first when that makes sense."""
    a, b, c, d = m.a, m.b, m.c, m.d
    tr = a + d
    disc = cmath.sqrt(tr * tr - 4)
    if c == 0:
        if a == d or abs(a - d) == 0:
            return (INF,)
        p = b / (d - a)
        # z -> (a z + b)/d, derivative a/d at finite p, d/a at infinity
        if abs(a / d) < 1:
            return (p, INF)
        return (INF, p)
    lam1 = (tr + disc) / 2
    lam2 = (tr - disc) / 2
    pts = []
    for lam in (lam1, lam2):
        # eigenvector (p, 1): c p + d = lam
        pts.append((lam - d) / c)
    if disc == 0:
        return (pts[0],)
    # attracting fixed point has |m'(p)| = 1/|lam|^2 < 1
    if abs(lam1) >= abs(lam2):
        return (pts[0], pts[1])
    return (pts[1], pts[0])


def classify(m: MoebiusMap, tol: float = CLASSIFY_TOL) -> MapClass:
    tr = m.trace
    t2 = tr * tr
    dev = abs(t2 - 4)
    if dev <= tol:
        s = 1 if tr.real >= 0 else -1
        if max(abs(m.a - s), abs(m.d - s), abs(m.b), abs(m.c)) <= math.sqrt(tol):
            return MapClass("identity", 1 + 0j, ())
        p = _parabolic_fixed_point(m)
        _check_fixed(m, (p,))
        return MapClass("parabolic", None, (p,))
    pts = fixed_points(m)
    if len(pts) < 2:
        raise NearDegenerate("coincident fixed points away from parabolic trace")
    _check_fixed(m, pts)
    p = pts[0]
    if is_inf(p):
        k = m.a / m.d if m.c == 0 else None
        if k is None:
            raise NearDegenerate("inconsistent fixed point at infinity")
        mult = 1 / k
    else:
        mult = m.derivative(p)
    real_trace = abs(t2.imag) <= tol * max(1.0, abs(t2))
    if real_trace and 0 <= t2.real < 4:
        tag = "elliptic"
    elif real_trace and t2.real > 4:
        tag = "hyperbolic"
    else:
        tag = "loxodromic"
    return MapClass(tag, complex(mult), tuple(pts))


def _parabolic_fixed_point(m: MoebiusMap):
    # (a - d)^2 = -4bc, so the double root is (a - d)/(2c) = 2b/(d - a);
    # dividing by the larger denominator avoids snapping far points to infinity
    a, b, c, d = m.a, m.b, m.c, m.d
    if abs(d - a) > abs(2 * c):
        return 2 * b / (d - a)
    if abs(c) <= 1e-15 * max(abs(a), abs(b), abs(d)):
        return INF
    return (a - d) / (2 * c)


def _check_fixed(m: MoebiusMap, pts) -> None:
    for p in pts:
        if chordal(m(p), p) > FIXED_POINT_TOL:
            raise NearDegenerate(
                f"fixed point residual {chordal(m(p), p):.2e} exceeds tolerance; "
                "raise working precision"
            )


def _entry_imag(m: MoebiusMap) -> float:
    return max(abs(x.imag) for x in (m.a, m.b, m.c, m.d))


def conjugate_into_real(gens: Sequence[MoebiusMap], tol: float = 1e-7):
    """Find g with g^{-1} m g real for every generator m.

    Returns ``(conjugator, real_gens, residual)`` where residual is the
    largest imaginary part of an entry of a conjugated generator.
    """
    gens = list(gens)
    for m in gens:
        if abs(m.trace.imag) > tol:
            raise NotRealizable(f"trace {m.trace} is not real")
    if all(m.is_real(1e-14) for m in gens):
        return MoebiusMap.identity(), gens, max((_entry_imag(m) for m in gens), default=0.0)

    first = None
    for m in gens:
        cls = classify(m, tol=max(CLASSIFY_TOL, tol))
        if cls.tag in ("parabolic", "hyperbolic"):
            first = (m, cls)
            break
    if first is None:
        raise NotRealizable("no hyperbolic or parabolic generator to anchor the frame")
    m1, cls1 = first

    others = [m for m in gens if m is not m1]
    if cls1.tag == "parabolic":
        p1 = cls1.fixed_points[0]
        c0 = _sending_to_infinity(p1)
        g1 = conjugate(m1, c0)
        t = g1.b / g1.a
        scale = _scaling(t)
        c0 = compose(c0, scale)
        # remaining freedom: translations z -> z + beta
        second = _first_noncommuting(others, c0, fixed=INF)
        if second is not None:
            g2 = conjugate(second, c0)
            if abs(g2.c) > 0:
                if abs(g2.c.real) <= 1e-14 * abs(g2.c):
                    raise NotRealizable("conjugated generator has a purely imaginary lower-left entry")
                beta = 1j * g2.a.imag / g2.c.real
                c0 = compose(c0, MoebiusMap.translation(beta))
    else:
        a_pt, b_pt = cls1.fixed_points
        c0 = _sending_pair(a_pt, b_pt)
        second = _first_noncommuting(others, c0, fixed=None)
        if second is not None:
            g2 = conjugate(second, c0)
            ref = g2.b if abs(g2.b) > abs(g2.c) else 1 / g2.c
            s = ref / abs(ref)
            c0 = compose(c0, _scaling(s))
    real_gens = [conjugate(m, c0) for m in gens]
    residual = max(_entry_imag(m) for m in real_gens)
    return c0, real_gens, residual


def _sending_to_infinity(p) -> MoebiusMap:
    """Map g with g(inf) = p."""
    if is_inf(p):
        return MoebiusMap.identity()
    if abs(p) > 1:
        # z / (z/p + 1) keeps the entries O(1) for far-away p
        return MoebiusMap.from_entries(1, 0, 1 / p, 1)
    return MoebiusMap.from_entries(p, -1, 1, 0)


def _sending_pair(a_pt, b_pt) -> MoebiusMap:
    """Map g with g(0) = a_pt and g(inf) = b_pt."""
    if is_inf(b_pt):
        return MoebiusMap.from_entries(1, a_pt, 0, 1)
    if is_inf(a_pt):
        return MoebiusMap.from_entries(b_pt, -1, 1, 0)
    if abs(b_pt) > 1:
        return MoebiusMap.from_entries(1, a_pt, 1 / b_pt, 1)
    return MoebiusMap.from_entries(b_pt, a_pt, 1, 1)


def _scaling(t) -> MoebiusMap:
    """z -> t z."""
    s = cmath.sqrt(t)
    return MoebiusMap(s, 0j, 0j, 1 / s)


def _first_noncommuting(others, c0, fixed):
    best = None
    best_size = 0.0
    for m in others:
        g = conjugate(m, c0)
        size = abs(g.c) if fixed is not None else min(abs(g.b), abs(g.c))
        if size > best_size + 1e-12:
            best, best_size = m, size
            if size > 1e-6:
                break
    return best
