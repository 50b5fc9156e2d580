"""The regularized Liouville action, the metric H and the Symm(n) cocycle.

The action is

    S = lim_{delta -> 0} ( integral over X_delta of (|phi_w|^2 + e^phi) d^2 w
                           + 2 pi n log delta + 4 pi (n - 2) log|log delta| ).

Near a finite cusp the density is 1 / (r^2 L^2) up to O(r) with
L = log r - s_star, so the integrand is (1 + 2/L + 2/L^2) / r^2 up to O(1/r);
at infinity the same holds with L = log R + s_star.  Subtracting this model
inside each cusp piece of the partition of unity leaves an integrable
remainder for the plane rule, while the model itself is integrated in closed
form, with the counterterms cancelled by hand.  The literal delta-truncated
values are also reported and extrapolated in 1 / log delta as a cross-check.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateAction, ExtrapolationDiverged
from .fuchsian_ode import PunctureConfig
from .quadrature import QuadControl, annulus_rule, build_plane_rule, chi_finite, chi_infinity, gauss_legendre

DELTA_SCHEDULE = tuple(0.1 * 2.0**-k for k in range(11))


def _model(lg):
    """r^2 times the model integrand, as a function of L."""
    return 1 + 2 / lg + 2 / lg**2


def _g_finite(u, s_star):
    lg = u - s_star
    return u + 2 * np.log(np.abs(lg)) - 2 / lg


def _g_infinity(u, s_star):
    lg = u + s_star
    return u + 2 * np.log(lg) - 2 / lg


@dataclass
class ActionResult:
    S: float
    err: float
    imag: float
    deltas: list
    partial: list
    extrapolated: float
    extrapolation_error: float
    H: float = float("nan")
    curly_s: float = float("nan")
    pieces: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps({
            "S": self.S, "err": self.err, "H": self.H, "curlyS": self.curly_s,
            "deltas": [{"delta": d, "S_delta": v} for d, v in zip(self.deltas, self.partial)],
            "extrapolated": self.extrapolated, "extrapolation_error": self.extrapolation_error,
        }, indent=2)


def _lagrangian(s, nodes):
    ev = s.atlas.evaluate(nodes)
    return np.abs(ev["phi_w"]) ** 2 + ev["density"]


def _assemble(s, control: QuadControl):
    """One evaluation of S on the rule of ``control``; returns (S, imag, rule, pieces)."""
    config = s.config
    charts = s.cusp_charts
    finite_stars = [c.s_star for c in charts[:-1]]
    s_inf = charts[-1].s_star
    rule = build_plane_rule(config, control, scales=[math.exp(x) for x in finite_stars])
    r_inf_lo = rule.outer_in
    if math.log(r_inf_lo) + s_inf < 1.0:
        raise ExtrapolationDiverged("model at infinity is not valid on the outer piece")
    f = _lagrangian(s, rule.nodes)
    pts = np.array(config.points)
    kappa = control.kappa
    spread = 5.9 / kappa
    vals = f.copy()
    pieces = {}
    for i, p in enumerate(pts):
        sel = rule.region == i
        r = np.abs(rule.nodes[sel] - p)
        vals[sel] = f[sel] - _model(np.log(r) - finite_stars[i]) / r**2
        # closed-form model piece: chi = 1 below r_in; the counterterm kills G(delta)
        r_out = rule.r_out[i]
        r_mid = r_out * math.exp(-spread)
        r_in = rule.r_in[i]
        u, wu = gauss_legendre(math.log(r_in), math.log(r_out), control.n_radial)
        band = np.sum(wu * chi_finite(np.exp(u), r_mid, kappa) * _model(u - finite_stars[i]))
        pieces[i] = 2 * math.pi * (_g_finite(math.log(r_in), finite_stars[i]) + band)
    inf_tag = len(pts)
    sel = rule.region == inf_tag
    rr = np.abs(rule.nodes[sel])
    vals[sel] = f[sel] - _model(np.log(rr) + s_inf) / rr**2
    outer_mid = rule.outer_in * math.exp(spread)
    u, wu = gauss_legendre(math.log(rule.outer_in), math.log(rule.outer_out), control.n_radial)
    band = np.sum(wu * chi_infinity(np.exp(u), outer_mid, kappa) * _model(u + s_inf))
    pieces[inf_tag] = 2 * math.pi * (band - _g_infinity(math.log(rule.outer_out), s_inf))
    total = rule.integrate(vals) + sum(pieces.values())
    return total.real, total.imag, rule, pieces


def _inner_remainder(s, p, s_star, r_lo, delta, control, at_infinity=False):
    """Integral of (integrand - model) over r_lo < |w - p| < delta (or R > 1/delta)."""
    if at_infinity:
        z, wt, r = annulus_rule(0j, 1 / delta, 1 / r_lo, control.n_radial, control.n_theta)
        lg = np.log(r) + s_star
    else:
        z, wt, r = annulus_rule(p, r_lo, delta, control.n_radial, control.n_theta)
        lg = np.log(r) - s_star
    return float(np.sum(wt * (_lagrangian(s, z) - _model(lg) / r**2)).real)


def truncated_values(s, result_s: float, rule, control: QuadControl, deltas=DELTA_SCHEDULE) -> list:
    """Counterterm-corrected integrals over X_delta, reconstructed from the exact pieces."""
    charts = s.cusp_charts
    pts = s.config.points
    depth = control.depth
    out = []
    for d in deltas:
        if any(d >= rule.r_in[i] for i in range(len(pts))) or 1 / d <= rule.outer_out:
            out.append(float("nan"))
            continue
        ld = math.log(d)
        val = result_s
        for i, p in enumerate(pts):
            st = charts[i].s_star
            val -= _inner_remainder(s, p, st, rule.r_out[i] * math.exp(-depth), d, control)
            val += 2 * math.pi * (-2 * math.log(abs(ld - st)) + 2 / (ld - st) + 2 * math.log(abs(ld)))
        st = charts[-1].s_star
        val -= _inner_remainder(s, None, st, 1 / (rule.outer_in * math.exp(depth)), d, control,
                                at_infinity=True)
        val += 2 * math.pi * (2 * math.log(-ld + st) - 2 / (-ld + st) - 2 * math.log(abs(ld)))
        out.append(val)
    return out


def extrapolate(deltas, values, degree: int = 5) -> tuple:
    """Fit S_delta by a polynomial in x = 1 / log delta; returns (S, error).

    The error is the change when the coarsest radius is dropped.
    """
    d = np.array([x for x, v in zip(deltas, values) if math.isfinite(v)])
    v = np.array([v for v in values if math.isfinite(v)])
    if len(v) < 5:
        raise ExtrapolationDiverged("too few admissible truncation radii")
    degree = min(degree, len(v) - 3)
    x = 1 / np.log(d)
    full = np.polyfit(x, v, degree)[-1]
    part = np.polyfit(x[1:], v[1:], degree)[-1]
    err = abs(full - part)
    if not math.isfinite(full) or err > 1e-1 * max(1.0, abs(full)):
        raise ExtrapolationDiverged(f"extrapolated values disagree by {err:.2e}")
    return float(full), float(err)


def action(s, control: QuadControl = QuadControl(), deltas=DELTA_SCHEDULE, with_deltas: bool = True) -> ActionResult:
    value, imag, rule, pieces = _assemble(s, control)
    fine, _, _, _ = _assemble(s, control.refined())
    err = max(abs(fine - value), 1e-13 * abs(fine))
    partial, ext, ext_err = [], float("nan"), float("nan")
    if with_deltas:
        partial = truncated_values(s, fine, rule, control, deltas)
        ext, ext_err = extrapolate(deltas, partial)
    res = ActionResult(fine, err, imag, list(deltas) if with_deltas else [], partial, ext, ext_err,
                       pieces={str(k): float(v) for k, v in pieces.items()})
    h_val = hermitian_h(s)
    res.H = h_val
    res.curly_s = fine - math.pi * math.log(h_val)
    return res


def hermitian_h(s) -> float:
    """H = h_1 ... h_{n-1} / h_n from the Frobenius values of h."""
    hs = [s.exact_h(i).h for i in range(s.n)]
    return float(np.prod(hs[:-1]) / hs[-1])


def log_h_values(s) -> np.ndarray:
    return np.array([2 * c.s_star * (-1 if c.at_infinity else 1) for c in s.cusp_charts])


# -- the symmetric group --------------------------------------------------------

Perm = tuple


def compose(a: Perm, b: Perm) -> Perm:
    """(a b)(j) = a(b(j))."""
    return tuple(a[j] for j in b)


def transposition(n: int, a: int, b: int) -> Perm:
    p = list(range(n))
    p[a], p[b] = p[b], p[a]
    return tuple(p)


def decompose(perm: Perm) -> list:
    """Labels k with perm = t_{k_1} t_{k_2} ... where t_k swaps k with the last label."""
    n = len(perm)
    last = n - 1
    word = []
    seen = set()
    for start in range(n):
        if start in seen or perm[start] == start:
            seen.add(start)
            continue
        cycle = [start]
        seen.add(start)
        j = perm[start]
        while j != start:
            cycle.append(j)
            seen.add(j)
            j = perm[j]
        # (c1 c2 ... cm) = (c1 cm)(c1 c_{m-1}) ... (c1 c2)
        for c in reversed(cycle[1:]):
            word += _as_last_swaps(cycle[0], c, last)
    return word


def _as_last_swaps(a, b, last):
    if a == last:
        return [b]
    if b == last:
        return [a]
    return [a, b, a]


def _mobius_to_standard(z0, z1, zinf):
    """The map sending (z0, z1, zinf) to (0, 1, infinity), as a callable."""
    def g(z):
        if math.isinf(abs(z)):
            if math.isinf(abs(zinf)):
                return math.inf
            if math.isinf(abs(z0)) or math.isinf(abs(z1)):
                raise DegenerateAction("point at infinity twice")
            return (z1 - zinf) / (z1 - z0)
        if z == zinf:
            return math.inf
        if math.isinf(abs(zinf)):
            if math.isinf(abs(z0)) or math.isinf(abs(z1)):
                raise DegenerateAction("point at infinity twice")
            return (z - z0) / (z1 - z0)
        if math.isinf(abs(z0)):
            return (z1 - zinf) / (z - zinf)
        if math.isinf(abs(z1)):
            return (z - z0) / (z - zinf)
        return (z - z0) * (z1 - zinf) / ((z - zinf) * (z1 - z0))
    return g


def act(perm: Perm, config: PunctureConfig) -> PunctureConfig:
    """Relabel the point with label j as perm(j), then renormalize the last three to 0, 1, infinity."""
    pts = list(config.points) + [complex(math.inf)]
    n = len(pts)
    new = [None] * n
    for j, p in enumerate(pts):
        new[perm[j]] = p
    g = _mobius_to_standard(new[n - 3], new[n - 2], new[n - 1])
    moved = [complex(g(p)) for p in new[: n - 3]]
    for i, a in enumerate(moved):
        if not math.isfinite(abs(a)) or abs(a) < 1e-12 or abs(a - 1) < 1e-12:
            raise DegenerateAction(f"renormalized point {a} collides with 0, 1 or infinity")
        for b in moved[:i]:
            if abs(a - b) < 1e-12:
                raise DegenerateAction("renormalized points collide")
    return PunctureConfig(tuple(moved))


EMPTY_PRODUCT_CONVENTIONS = ("empty-is-one", "denominator-survives")


def elementary_cocycle(k: int, config: PunctureConfig, convention: str = "empty-is-one") -> complex:
    """f for the transposition of label k with the last label."""
    w = list(config.finite_punctures)
    n = config.n
    # swapping 0 or 1 with infinity renormalizes by z -> 1/z or z/(z-1), whose
    # derivative at the fixed finite cusp is -1; the resulting (-1)^n keeps the
    # extension a cocycle for odd n and leaves |f| unchanged
    sign = (-1) ** n
    if k == n - 3:
        return sign * complex(np.prod([x * x for x in w]))
    if k == n - 2:
        return sign * complex(np.prod([(x - 1) ** 2 for x in w]))
    if k == n - 1:
        return 1.0 + 0j
    wk = w[k]
    others = [x for i, x in enumerate(w) if i != k]
    if not others:
        return 1.0 + 0j if convention == "empty-is-one" else 1 / (wk * (wk - 1))
    return complex(np.prod([(x - wk) ** 2 / (wk * (wk - 1)) for x in others]))


@dataclass
class CocycleValue:
    perm: Perm
    value: complex
    word: list
    acted: PunctureConfig


def symm_cocycle(perm: Perm, config: PunctureConfig, convention: str = "empty-is-one") -> CocycleValue:
    """f_perm(w) through f_{t sigma} = (f_t o sigma) f_sigma along the transposition word."""
    perm = tuple(perm)
    n = config.n
    if len(perm) != n or sorted(perm) != list(range(n)):
        raise ValueError("not a permutation of the puncture labels")
    word = decompose(perm)
    value = 1.0 + 0j
    current = config
    built = tuple(range(n))
    # perm = t_{k_1} ... t_{k_m}: apply the rightmost letter first
    for k in reversed(word):
        t = transposition(n, k, n - 1)
        value *= elementary_cocycle(k, current, convention)
        current = act(t, current)
        built = compose(t, built)
    if built != perm:
        raise AssertionError("transposition word does not reproduce the permutation")
    return CocycleValue(perm, value, word, current)


def all_permutations(n: int):
    return itertools.permutations(range(n))
