"""The Fuchsian equation u'' + Q(w) u / 2 = 0 on a punctured sphere.

Q is kept in residue form

    Q(w) = sum_p [ 1/(2 (w - p)^2) + rho_p / (w - p) ]

over the finite punctures p in (w_1, ..., w_{n-3}, 0, 1).  The accessory
parameters are the residues at w_1, ..., w_{n-3}; the residues at 0 and 1
follow from the requirement Q(w) = 1/(2 w^2) + O(w^-3) at infinity.

Solutions are continued along polylines by a Taylor-series integrator: at
each step the local expansion of the fundamental matrix is generated by the
coefficient recurrence of the equation and summed on a disk at most half the
distance to the nearest pole.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InvalidConfiguration, PoleTooClose, StepUnderflow
from .moebius import MoebiusMap


@dataclass(frozen=True)
class PunctureConfig:
    """Labeled punctures w_1..w_{n-3}, 0, 1, infinity."""

    finite_punctures: tuple

    def __post_init__(self):
        pts = tuple(complex(w) for w in self.finite_punctures)
        object.__setattr__(self, "finite_punctures", pts)
        allpts = list(pts) + [0j, 1 + 0j]
        for i, p in enumerate(allpts):
            for q in allpts[i + 1:]:
                if abs(p - q) < 1e-12:
                    raise InvalidConfiguration(f"coincident punctures {p} and {q}")

    @classmethod
    def of(cls, *w) -> "PunctureConfig":
        return cls(tuple(w))

    @property
    def n(self) -> int:
        return len(self.finite_punctures) + 3

    @property
    def points(self) -> tuple:
        """Finite singular points in label order: w_1..w_{n-3}, 0, 1."""
        return self.finite_punctures + (0j, 1 + 0j)

    def min_separation(self) -> float:
        pts = self.points
        return min(abs(p - q) for i, p in enumerate(pts) for q in pts[i + 1:])

    def nearest_other(self, i: int) -> float:
        """Distance from finite point i to the nearest other finite point."""
        pts = self.points
        return min(abs(pts[i] - q) for j, q in enumerate(pts) if j != i)

    def moved(self, w) -> "PunctureConfig":
        return PunctureConfig(tuple(w))


@dataclass(frozen=True)
class AccessoryParams:
    c: tuple

    def __post_init__(self):
        object.__setattr__(self, "c", tuple(complex(x) for x in self.c))

    @classmethod
    def zeros(cls, n: int) -> "AccessoryParams":
        return cls(tuple([0j] * (n - 3)))

    def as_array(self) -> np.ndarray:
        return np.array(self.c, dtype=complex)


# -- the building blocks of Q ------------------------------------------------


def kernel(zeta, z):
    """R(zeta, z) = z (z - 1) / ((zeta - z) zeta (zeta - 1))."""
    return z * (z - 1) / ((zeta - z) * zeta * (zeta - 1))


def cusp_form_basis(config: PunctureConfig, l: int, w):
    """R_l(w) = -(1/pi) R(w, w_l) for l = 0..n-4 (zero-based)."""
    return -kernel(w, config.finite_punctures[l]) / math.pi


def eisenstein_term(config: PunctureConfig, i: int, w):
    """The weight-four pieces E_i(w), zero-based i = 0..n-1 in label order."""
    n = config.n
    if i == n - 1:
        return 1.0 / (2 * w * (w - 1))
    p = config.points[i]
    return 1.0 / (2 * (w - p) ** 2) - 1.0 / (2 * w * (w - 1))


@dataclass(frozen=True)
class RationalQ:
    """Q(w) = sum_p 1/(2 (w-p)^2) + rho_p/(w-p)."""

    poles: tuple
    residues: tuple
    config: PunctureConfig | None = None
    accessory: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "poles", tuple(complex(p) for p in self.poles))
        object.__setattr__(self, "residues", tuple(complex(r) for r in self.residues))

    @property
    def pole_array(self) -> np.ndarray:
        return np.array(self.poles, dtype=complex)

    @property
    def residue_array(self) -> np.ndarray:
        return np.array(self.residues, dtype=complex)

    def __call__(self, w):
        w = np.asarray(w, dtype=complex)
        p = self.pole_array
        r = self.residue_array
        d = w[..., None] - p
        return np.sum(0.5 / d**2 + r / d, axis=-1)

    def derivative(self, w):
        w = np.asarray(w, dtype=complex)
        d = w[..., None] - self.pole_array
        return np.sum(-1.0 / d**3 - self.residue_array / d**2, axis=-1)

    def laurent_at_infinity(self, order: int = 4) -> np.ndarray:
        """Coefficients b_k of Q = sum_k b_k w^{-k}, k = 0..order."""
        p = self.pole_array
        r = self.residue_array
        out = np.zeros(order + 1, dtype=complex)
        # 1/(w-p) = sum_{k>=1} p^{k-1} w^{-k};  1/(w-p)^2 = sum_{k>=2} (k-1) p^{k-2} w^{-k}
        for k in range(1, order + 1):
            out[k] += np.sum(r * p ** (k - 1))
            if k >= 2:
                out[k] += np.sum(0.5 * (k - 1) * p ** (k - 2))
        return out

    def min_distance(self, w) -> float:
        if not self.poles:
            return math.inf
        return float(np.min(np.abs(self.pole_array - w)))

    def taylor(self, center: complex, n_terms: int) -> np.ndarray:
        """Taylor coefficients of Q about a regular point."""
        d = self.pole_array - center
        k = np.arange(n_terms)[:, None]
        inv = 1.0 / d
        with np.errstate(over="ignore", invalid="ignore"):
            # cells hugging a pole overflow at high order; cusp charts cover them
            powk1 = inv[None, :] ** (k + 1)
            return np.sum(0.5 * (k + 1) * powk1 * inv - self.residue_array * powk1, axis=1)

    def frobenius_coefficients(self, index: int, n_terms: int) -> np.ndarray:
        """Coefficients of (w-p)^2 Q(w) about the pole with given index."""
        p = self.poles[index]
        out = np.zeros(n_terms, dtype=complex)
        out[0] = 0.5
        if n_terms > 1:
            out[1] = self.residues[index]
        others = [j for j in range(len(self.poles)) if j != index]
        if others and n_terms > 2:
            d = self.pole_array[others] - p
            r = self.residue_array[others]
            k = np.arange(2, n_terms)[:, None]
            out[2:] = np.sum(0.5 * (k - 1) / d**k - r / d ** (k - 1), axis=1)
        return out

    def frobenius_coefficients_infinity(self, n_terms: int) -> np.ndarray:
        """Coefficients of s^2 Qt(s) with Qt(s) = Q(1/s)/s^4, about s = 0."""
        p = self.pole_array
        r = self.residue_array
        k = np.arange(n_terms)[:, None]
        out = np.sum(0.5 * (k + 1) * p[None, :] ** k + r * p[None, :] ** (k + 1), axis=1)
        return out

    def residue_form_check(self) -> float:
        """Deviation of the expansion at infinity from 1/(2 w^2)."""
        b = self.laurent_at_infinity(2)
        return float(abs(b[1]) + abs(b[2] - 0.5))


def build_q(config: PunctureConfig, acc: AccessoryParams | Sequence | None = None) -> RationalQ:
    """Assemble Q = sum_i E_i - pi sum_l c_l R_l in residue form."""
    n = config.n
    if acc is None:
        acc = AccessoryParams.zeros(n)
    if not isinstance(acc, AccessoryParams):
        acc = AccessoryParams(tuple(acc))
    c = acc.c
    if len(c) != n - 3:
        raise InvalidConfiguration(f"expected {n - 3} accessory parameters, got {len(c)}")
    w = config.finite_punctures
    half = (n - 2) / 2
    rho0 = half + sum(cl * (wl - 1) for cl, wl in zip(c, w))
    rho1 = -half - sum(cl * wl for cl, wl in zip(c, w))
    return RationalQ(config.points, tuple(c) + (rho0, rho1), config, tuple(c))


def q_from_pieces(config: PunctureConfig, acc: AccessoryParams, w):
    """Direct evaluation of sum E_i - pi sum c_l R_l (independent of residue form)."""
    total = sum(eisenstein_term(config, i, w) for i in range(config.n))
    for l, cl in enumerate(acc.c):
        total = total - math.pi * cl * cusp_form_basis(config, l, w)
    return total


# -- Taylor-series integrator ------------------------------------------------

STEP_FRACTION = 0.5
MAX_TERMS = 90
TAIL_TOL = 1e-17


def local_basis(q_coeffs: np.ndarray, n_terms: int) -> np.ndarray:
    """Taylor coefficients of the two solutions normalized at the center.

    Row 0: u(0)=1, u'(0)=0.  Row 1: u(0)=0, u'(0)=1.
    """
    u = np.zeros((2, n_terms), dtype=q_coeffs.dtype)
    u[0, 0] = 1
    u[1, 1] = 1
    qc = q_coeffs
    for k in range(n_terms - 2):
        # (k+2)(k+1) u_{k+2} = -1/2 sum_{j<=k} Q_j u_{k-j}
        s = u[:, k::-1] @ qc[: k + 1]
        u[:, k + 2] = -0.5 * s / ((k + 2) * (k + 1))
    return u


def eval_series(coeffs: np.ndarray, t):
    """Evaluate rows of coefficients and their derivatives at t (scalar or array)."""
    t = np.asarray(t, dtype=complex)
    n = coeffs.shape[-1]
    val = np.zeros(coeffs.shape[:-1] + t.shape, dtype=complex)
    der = np.zeros_like(val)
    for k in range(n - 1, -1, -1):
        der = der * t + val
        val = val * t + coeffs[..., k, None] if t.ndim else val * t + coeffs[..., k]
    return val, der


def _horner(coeffs, t):
    val = np.zeros(coeffs.shape[0], dtype=complex)
    der = np.zeros(coeffs.shape[0], dtype=complex)
    for k in range(coeffs.shape[1] - 1, -1, -1):
        der = der * t + val
        val = val * t + coeffs[:, k]
    return val, der


@dataclass
class TransportStats:
    steps: int = 0
    max_terms: int = 0


def step_matrix(q: RationalQ, center: complex, h: complex, tail_tol: float = TAIL_TOL):
    """Propagator over one Taylor step: Y(center + h) = E Y(center).

    Y has rows (u, u') and one column per solution.
    """
    dist = q.min_distance(center)
    ratio = abs(h) / dist
    # terms needed for ratio^N below tolerance, with a safety margin
    n_terms = int(min(MAX_TERMS, max(12, math.ceil(math.log(tail_tol) / math.log(max(ratio, 1e-3))) + 8)))
    qc = q.taylor(center, n_terms)
    u = local_basis(qc, n_terms)
    tail = np.max(np.abs(u[:, -4:]) * np.abs(h) ** np.arange(n_terms - 4, n_terms))
    scale = max(1.0, float(np.max(np.abs(u[:, :2]))))
    if tail > 1e-13 * scale:
        raise StepUnderflow(f"series tail {tail:.2e} too large at step {h}")
    val, der = _horner(u, h)
    # row 0 of E: values of the basis; row 1: derivatives
    return np.array([[val[0], val[1]], [der[0], der[1]]], dtype=complex), n_terms


def transport(q: RationalQ, path: Sequence[complex], init=None, clearance: float = 1e-3,
              stats: TransportStats | None = None) -> np.ndarray:
    """Continue the fundamental matrix (rows u, u') along a polyline."""
    path = [complex(z) for z in path]
    y = np.eye(2, dtype=complex) if init is None else np.array(init, dtype=complex)
    for a, b in zip(path[:-1], path[1:]):
        _check_segment(q, a, b, clearance)
        z = a
        while True:
            rem = b - z
            if abs(rem) <= 1e-15 * max(1.0, abs(b)):
                break
            dist = q.min_distance(z)
            hmax = STEP_FRACTION * dist
            if hmax < 1e-12:
                raise StepUnderflow(f"step size underflow near {z}")
            if abs(rem) <= hmax:
                h = rem
            else:
                h = rem / abs(rem) * hmax
            e, nt = step_matrix(q, z, h)
            y = e @ y
            if stats is not None:
                stats.steps += 1
                stats.max_terms = max(stats.max_terms, nt)
            z = b if abs(rem) <= hmax else z + h
    return y


def _check_segment(q: RationalQ, a: complex, b: complex, clearance: float) -> None:
    for p in q.poles:
        d = _point_segment_distance(p, a, b)
        if d < clearance:
            raise PoleTooClose(f"segment {a}->{b} passes within {d:.2e} of pole {p}")


def _point_segment_distance(p, a, b) -> float:
    ab = b - a
    if ab == 0:
        return abs(p - a)
    t = ((p - a) * ab.conjugate()).real / abs(ab) ** 2
    t = min(1.0, max(0.0, t))
    return abs(p - (a + t * ab))


# -- monodromy ----------------------------------------------------------------


def choose_base_point(config: PunctureConfig, min_distance: float = 2.0) -> complex:
    """Base point on the imaginary axis, above every puncture, at distance >= 2."""
    pts = config.points
    y0 = max(p.imag for p in pts)
    best, best_score = None, -1.0
    for k in range(0, 60):
        y = max(y0, 0.0) + min_distance + 0.25 * k
        b = complex(0, y)
        if min(abs(b - p) for p in pts) < min_distance:
            continue
        score = _star_clearance(b, pts)
        if score > best_score + 1e-12:
            best, best_score = b, score
        if score >= 0.25 * config.min_separation():
            return b
    if best is None or best_score < 1e-3:
        raise PoleTooClose("no admissible base point on the imaginary axis")
    return best


def _star_clearance(b, pts) -> float:
    """Smallest distance from a puncture to a segment joining b and another puncture."""
    worst = math.inf
    for p in pts:
        for q in pts:
            if q is p:
                continue
            worst = min(worst, _point_segment_distance(q, b, p))
    return worst


def keyhole(base: complex, p: complex, radius: float, sides: int = 16) -> list:
    """Polyline from base to a small polygon around p (counterclockwise) and back."""
    direction = (base - p) / abs(base - p)
    start = p + radius * direction
    ring = [p + radius * direction * cmath.exp(2j * math.pi * k / sides) for k in range(sides + 1)]
    return [base, start] + ring[1:] + [base]


@dataclass
class MonodromyRep:
    """Per-puncture loop monodromies in label order (w_1..w_{n-3}, 0, 1, inf).

    ``matrices[i]`` continues the solution column (u1, u2) around loop i:
    (u1, u2)^T -> M (u1, u2)^T.  The solutions are the columns of Y F, where
    Y is the fundamental matrix equal to I at the base and F is ``frame``.  Loops are based at ``base``; their product
    in ``order`` equals the identity.
    """

    base: complex
    matrices: list
    order: list
    loop_radii: list
    relation_residual: float
    trace_defects: list
    raw: dict = field(default_factory=dict)
    frame: np.ndarray = field(default_factory=lambda: np.eye(2, dtype=complex))

    def moebius(self) -> list:
        return [MoebiusMap.from_matrix(m) for m in self.matrices]


def loop_matrix(q: RationalQ, path) -> np.ndarray:
    y = transport(q, path)
    return y.T


def _loop_radius(config: PunctureConfig, i: int) -> float:
    return 0.3 * config.nearest_other(i)


def monodromy(q: RationalQ, config: PunctureConfig, base: complex | None = None,
              hurwitz: bool = True, balance: bool = True) -> MonodromyRep:
    """Loop monodromies around all punctures, normalized to label order.

    Straight keyhole loops from the base point give a standard generating
    system in the angular order seen from the base; Hurwitz moves then
    reorder it so that M_1 M_2 ... M_n = I in label order, each M_i remaining
    the monodromy of a simple loop around puncture i.
    """
    if base is None:
        base = choose_base_point(config)
    pts = config.points
    geo = {}
    radii = []
    for i, p in enumerate(pts):
        r = _loop_radius(config, i)
        radii.append(r)
        geo[i] = loop_matrix(q, keyhole(base, p, r))
    # big loop around all finite punctures, as a loop around infinity
    rad = max(abs(p - base) for p in pts)
    big = max(abs(base) + 2.0, 2 * rad)
    n_sides = 24
    center = 0j
    start_dir = (base - center) / abs(base - center)
    circle = [center + big * start_dir * cmath.exp(-2j * math.pi * k / n_sides) for k in range(n_sides + 1)]
    geo[len(pts)] = loop_matrix(q, [base, circle[0]] + circle[1:] + [base])

    # angular order: seen from a base above all points, loops with angle
    # closest to the west direction come first in a counterclockwise sweep
    angles = {i: cmath.phase(p - base) for i, p in enumerate(pts)}
    finite_order = sorted(range(len(pts)), key=lambda i: -angles[i])
    order = finite_order + [len(pts)]
    prod = np.eye(2, dtype=complex)
    for i in order:
        prod = prod @ geo[i]
    rel = _projective_defect(prod)
    if rel > 1e-6:
        rev = list(reversed(finite_order)) + [len(pts)]
        prod2 = np.eye(2, dtype=complex)
        for i in rev:
            prod2 = prod2 @ geo[i]
        if _projective_defect(prod2) < rel:
            order, rel = rev, _projective_defect(prod2)

    frame = np.eye(2, dtype=complex)
    if balance:
        bal = balancing_conjugator(list(geo.values()))
        binv = np.linalg.inv(bal)
        geo = {k: binv @ m @ bal for k, m in geo.items()}
        # solutions Y F with F^T = bal^{-1} have monodromy bal^{-1} M bal
        frame = binv.T
    mats = [geo[i] for i in order]
    labels = list(order)
    if hurwitz:
        mats, labels = _hurwitz_sort(mats, labels)
        order = list(range(len(pts) + 1))
        prod = np.eye(2, dtype=complex)
        for m in mats:
            prod = prod @ m
        rel = _projective_defect(prod)
        matrices = mats
    else:
        matrices = [geo[i] for i in range(len(pts) + 1)]
    defects = [abs(abs(np.trace(m)) - 2) for m in matrices]
    return MonodromyRep(base, matrices, order, radii, rel, defects, raw=geo, frame=frame)


def balancing_conjugator(mats) -> np.ndarray:
    """Upper triangular B minimizing sum ||B^{-1} M B||_F^2.

    Unitary conjugation preserves the Frobenius norm, so an upper
    triangular B = [[e^s, x + iy], [0, e^{-s}]] covers every frame.  A good
    frame keeps the entries of conjugated words small and so limits
    cancellation in the traces.
    """
    from scipy.optimize import minimize

    def build(x):
        return np.array([[math.exp(x[0]), x[1] + 1j * x[2]], [0, math.exp(-x[0])]])

    def cost(x):
        b = build(x)
        bi = np.array([[b[1, 1], -b[0, 1]], [0, b[0, 0]]])
        return sum(float(np.sum(np.abs(bi @ m @ b) ** 2)) for m in mats)

    res = minimize(cost, np.zeros(3), method="BFGS", options={"gtol": 1e-8})
    return build(res.x)


def _hurwitz_sort(mats, labels):
    mats = list(mats)
    labels = list(labels)
    n = len(mats)
    for i in range(n):
        for j in range(n - 1 - i):
            if labels[j] > labels[j + 1]:
                a, b = mats[j], mats[j + 1]
                # a b = b (b^{-1} a b)
                binv = np.linalg.inv(b)
                mats[j], mats[j + 1] = b, binv @ a @ b
                labels[j], labels[j + 1] = labels[j + 1], labels[j]
    return mats, labels


def _projective_defect(m: np.ndarray) -> float:
    eye = np.eye(2)
    return float(min(np.max(np.abs(m - eye)), np.max(np.abs(m + eye))))


def wronskian(y: np.ndarray) -> complex:
    return complex(np.linalg.det(y))
