"""Quadrature over the punctured plane.

The plane is split by a smooth partition of unity

    1 = sum_p chi_p + chi_inf + (1 - sum_p chi_p - chi_inf),

with chi_p(w) = erfc(kappa log(|w - p| / r_mid)) / 2 and chi_inf the mirror
image in log |w|.  The cusp pieces are integrated in polar coordinates,
Gauss-Legendre in u = log r and the trapezoid rule in the angle, so that
integrands with logarithmic singularities become smooth and decaying in u.
The remainder is smooth and compactly supported, and is integrated by
tensor Gauss-Legendre rules on the leaves of a quadtree graded towards the
punctures.  Every piece is analytic, so all rules converge exponentially.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import erfc

from .errors import ErrorTargetMissed, NonIntegrableDeclared
from .fuchsian_ode import PunctureConfig

FINITE_CLASSES = {"smooth", "log2", "log2_r2", "model_subtracted"}
INFINITY_CLASSES = {"r-4", "r-4log2", "r-2", "model_subtracted"}
NON_INTEGRABLE = {"log2_r2", "r-2"}


@dataclass(frozen=True)
class QuadControl:
    n_radial: int = 48
    n_theta: int = 64
    cell_order: int = 12
    cell_ratio: float = 0.15
    kappa: float = 6.0
    # polar rules run down to r_out * exp(-depth) (and out to R_in * exp(depth))
    depth: float = 20.0
    target: float = 1e-8

    def refined(self) -> "QuadControl":
        return replace(self, n_radial=int(self.n_radial * 1.5), n_theta=int(self.n_theta * 1.5),
                       cell_order=self.cell_order + 4, cell_ratio=self.cell_ratio * 0.75)


@dataclass
class PlaneRule:
    """Nodes and weights with a region tag: -1 middle, i >= 0 cusp i (last = infinity)."""

    nodes: np.ndarray
    weights: np.ndarray
    region: np.ndarray
    centers: list
    r_out: list
    r_in: list
    outer_in: float
    outer_out: float
    control: QuadControl
    polar_r: np.ndarray = field(default=None)

    def integrate(self, values: np.ndarray) -> complex:
        return complex(np.sum(self.weights * values))

    def dump(self, path) -> None:
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["w_re", "w_im", "weight", "region"])
            for z, wt, rg in zip(self.nodes, self.weights, self.region):
                wr.writerow([repr(z.real), repr(z.imag), repr(wt), int(rg)])


def chi_finite(r, r_mid, kappa):
    return 0.5 * erfc(kappa * np.log(r / r_mid))


def chi_infinity(r, r_mid, kappa):
    return 0.5 * erfc(-kappa * np.log(r / r_mid))


def gauss_legendre(a: float, b: float, n: int) -> tuple:
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (b - a) * x + 0.5 * (b + a), 0.5 * (b - a) * w


def annulus_rule(center: complex, r_lo: float, r_hi: float, n_u: int = 48, n_theta: int = 64) -> tuple:
    """Polar rule for r_lo <= |w - center| <= r_hi, Gauss-Legendre in log r."""
    u, wu = gauss_legendre(math.log(r_lo), math.log(r_hi), n_u)
    theta = 2 * np.pi * np.arange(n_theta) / n_theta
    r = np.exp(u)
    nodes = center + r[:, None] * np.exp(1j * theta)[None, :]
    weights = (wu * r * r)[:, None] * np.full(n_theta, 2 * np.pi / n_theta)[None, :]
    return nodes.ravel(), weights.ravel(), np.repeat(r, n_theta)


def cusp_radii(config: PunctureConfig, scales=None) -> list:
    """Outer radius of the polar piece at each finite puncture.

    Kept below 0.45 of the distance to the nearest other puncture and, when
    model scales A are given, below A / 2 so that log(r / A) stays away from 0.
    """
    pts = config.points
    out = []
    for i, p in enumerate(pts):
        d = config.nearest_other(i)
        r = 0.45 * d
        if scales is not None:
            r = min(r, 0.5 * scales[i])
        out.append(r)
    return out


def build_plane_rule(config: PunctureConfig, control: QuadControl = QuadControl(),
                     scales=None) -> PlaneRule:
    pts = np.array(config.points)
    kappa = control.kappa
    spread = 5.9 / kappa  # erfc(5.9) ~ 1e-17: half-width of the transition in log r
    r_out = cusp_radii(config, scales)
    r_mid = [r * math.exp(-spread) for r in r_out]
    r_in = [r * math.exp(-2 * spread) for r in r_out]
    pmax = float(np.max(np.abs(pts)))
    outer_in = 2.0 * max(pmax, 1.0)
    outer_mid = outer_in * math.exp(spread)
    outer_out = outer_in * math.exp(2 * spread)

    nodes, weights, region, radii = [], [], [], []
    for i, p in enumerate(pts):
        for lo, hi in ((r_out[i] * math.exp(-control.depth), r_in[i]), (r_in[i], r_out[i])):
            z, wt, r = annulus_rule(p, lo, hi, control.n_radial, control.n_theta)
            wt = wt * chi_finite(r, r_mid[i], kappa)
            nodes.append(z)
            weights.append(wt)
            region.append(np.full(z.shape, i))
            radii.append(r)
    for lo, hi in ((outer_in, outer_out), (outer_out, outer_out * math.exp(control.depth))):
        z, wt, r = annulus_rule(0j, lo, hi, control.n_radial, control.n_theta)
        wt = wt * chi_infinity(r, outer_mid, kappa)
        nodes.append(z)
        weights.append(wt)
        region.append(np.full(z.shape, len(pts)))
        radii.append(r)

    cz, cw = _middle_rule(pts, r_in, outer_out, control)
    frac = np.ones(cz.shape)
    for i, p in enumerate(pts):
        frac -= chi_finite(np.abs(cz - p), r_mid[i], kappa)
    frac -= chi_infinity(np.abs(cz), outer_mid, kappa)
    frac = np.maximum(frac, 0.0)  # rounding deep inside a cusp piece
    nodes.append(cz)
    weights.append(cw * frac)
    region.append(np.full(cz.shape, -1))
    radii.append(np.full(cz.shape, np.nan))
    return PlaneRule(np.concatenate(nodes), np.concatenate(weights), np.concatenate(region),
                     list(pts) + [math.inf], r_out, r_in, outer_in, outer_out, control,
                     np.concatenate(radii))


def _middle_rule(pts, r_in, outer, control):
    x, wx = np.polynomial.legendre.leggauss(control.cell_order)
    gx, gy = np.meshgrid(x, x, indexing="ij")
    gw = np.outer(wx, wx)
    gx, gy, gw = gx.ravel(), gy.ravel(), gw.ravel()
    zs, ws = [], []
    stack = [(complex(0, 0), outer)]
    while stack:
        c, hw = stack.pop()
        corners = c + hw * np.array([1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j])
        if any(np.all(np.abs(corners - p) < r) for p, r in zip(pts, r_in)):
            continue
        if max(abs(c.real) - hw, 0.0) ** 2 + max(abs(c.imag) - hw, 0.0) ** 2 >= outer**2:
            continue
        dist = float(np.min(np.abs(pts - c)))
        if hw <= control.cell_ratio * max(dist, 1e-300) and hw <= 0.1 * outer:
            zs.append(c + hw * (gx + 1j * gy))
            ws.append(gw * hw * hw)
            continue
        h2 = hw / 2
        for dx in (-1, 1):
            for dy in (-1, 1):
                stack.append((c + h2 * complex(dx, dy), h2))
    return np.concatenate(zs), np.concatenate(ws)


def check_declared(singular: dict | None, n_points: int) -> None:
    singular = singular or {}
    for key, cls in singular.items():
        allowed = INFINITY_CLASSES if key == "inf" else FINITE_CLASSES
        if cls not in allowed:
            raise NonIntegrableDeclared(f"unknown singularity class {cls!r} at {key}")
        if cls in NON_INTEGRABLE:
            raise NonIntegrableDeclared(f"class {cls!r} at {key} is not integrable")


def quad_plane(integrand, config: PunctureConfig, control: QuadControl = QuadControl(),
               singular: dict | None = None, scales=None, support=None, max_refine: int = 1) -> tuple:
    """Integrate integrand(w_array) d^2 w over the plane.

    ``singular`` maps puncture labels (0-based, or "inf") to a declared class.
    ``support`` may be an (center, r_lo, r_hi) annulus, integrated exactly in
    polar coordinates.  Returns (value, error) with the error taken from a
    refined rule.
    """
    check_declared(singular, config.n)
    if support is not None:
        center, lo, hi = support
        z1, w1, _ = annulus_rule(center, lo, hi, control.n_radial, control.n_theta)
        z2, w2, _ = annulus_rule(center, lo, hi, int(control.n_radial * 1.5), int(control.n_theta * 1.5))
        v1 = complex(np.sum(w1 * integrand(z1)))
        v2 = complex(np.sum(w2 * integrand(z2)))
        return v2, abs(v2 - v1)
    ctrl = control
    rule = build_plane_rule(config, ctrl, scales)
    value = rule.integrate(integrand(rule.nodes))
    err = math.inf
    for _ in range(max_refine):
        ctrl = ctrl.refined()
        rule = build_plane_rule(config, ctrl, scales)
        new = rule.integrate(integrand(rule.nodes))
        err = abs(new - value)
        value = new
        if err <= control.target * max(1.0, abs(value)):
            break
    else:
        if err > control.target * max(1.0, abs(value)) and max_refine > 1:
            raise ErrorTargetMissed(f"quadrature error {err:.2e} above target")
    return value, err
