"""Developing map, hyperbolic density and cusp data of a solved configuration.

The developing map is tau = N / D for the pair of solutions

    (N, D)^T = T (u_1, u_2)^T,

where (u_1, u_2) is the frame of the monodromy computation and T conjugates
the monodromy into PSL(2, R).  T is further normalized so that the loop
around infinity becomes z -> z +- 1, the cusp over w = 0 sits at z = 0 and
the image lies in the upper half-plane.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .accessory import (RESIDUAL_TARGET, fuchsian_residual, on_fuchsian_branch, solve_accessory,
                        solve_by_continuation)
from .atlas import Atlas, CuspChart, build_atlas
from .errors import ExtrapolationDiverged, InversionFailed, NoConvergence, PoleTooClose
from .fuchsian_ode import (AccessoryParams, MonodromyRep, PunctureConfig, RationalQ,
                           build_q, transport)
from .moebius import MoebiusMap, classify, conjugate_into_real

MIN_CLEARANCE = 1e-3


@dataclass(frozen=True)
class DevelopingEval:
    w: complex
    tau: complex
    tau_prime: complex
    tau_second: complex


@dataclass(frozen=True)
class MetricSample:
    w: complex
    density: float
    phi_w: complex
    residual: float


@dataclass
class CuspData:
    index: int
    h: float
    error: float
    method: str
    fourier: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "index": self.index,
            "h": self.h,
            "error": self.error,
            "method": self.method,
            "fourier": {str(k): [v.real, v.imag] for k, v in self.fourier.items()},
            "details": {k: (v if not isinstance(v, complex) else [v.real, v.imag])
                        for k, v in self.details.items()},
        }


def normalizing_frame(rep: MonodromyRep, n: int, tol: float = 1e-7) -> tuple:
    """Conjugator T (2x2) and the real generators T M_i T^{-1}.

    The orientation of the upper half-plane is fixed later by the caller.
    """
    gens = rep.moebius()
    c0, real, residual = conjugate_into_real(gens, tol=tol)
    t = c0.inverse()
    inf_gen = real[n - 1]
    cls = classify(inf_gen, tol=1e-8)
    x_inf = cls.fixed_points[0] if cls.fixed_points else math.inf
    if isinstance(x_inf, float) and math.isinf(x_inf):
        a1 = MoebiusMap.identity()
    else:
        a1 = MoebiusMap.from_entries(0, -1, 1, -complex(x_inf).real)
    t = a1 @ t
    g = t @ gens[n - 1] @ t.inverse()
    shift = (g.b / g.a).real if abs(g.a) > 0 else 0.0
    if shift == 0:
        raise ExtrapolationDiverged("loop around infinity is not parabolic")
    s = math.sqrt(abs(shift))
    t = MoebiusMap.from_entries(1 / s, 0, 0, s) @ t
    return t, residual


def _real_part_fixed(t: MoebiusMap, gen: MoebiusMap) -> float:
    g = t @ gen @ t.inverse()
    cls = classify(g, tol=1e-8)
    p = cls.fixed_points[0]
    return complex(p).real


class SolvedUniformization:
    """Immutable bundle of a converged accessory solution and its developing map."""

    def __init__(self, config: PunctureConfig, acc: AccessoryParams, residual: float | None = None):
        self.config = config
        self.acc = acc
        self.q: RationalQ = build_q(config, acc)
        f, _, rep = fuchsian_residual(config, acc.c)
        self.monodromy: MonodromyRep = rep
        self.residual = float(np.linalg.norm(f)) if residual is None else residual
        n = config.n
        t, self.realization_residual = normalizing_frame(rep, n)
        base = rep.base
        y_base = rep.frame  # rows (u, u'), columns the solutions
        # orientation: Im tau at the base
        nd = y_base @ t.matrix.T
        tau_b = nd[0, 0] / nd[0, 1]
        if tau_b.imag < 0:
            t = MoebiusMap.from_entries(1j, 0, 0, -1j) @ t
        # cusp over w = 0 at the origin
        x0 = _real_part_fixed(t, rep.moebius()[n - 3])
        t = MoebiusMap.translation(-x0) @ t
        self.frame = t
        self.generators = [t @ m @ t.inverse() for m in rep.moebius()]
        self.base_matrix = y_base @ t.matrix.T
        self.atlas: Atlas = build_atlas(self.q, base, self.base_matrix)

    # -- construction helpers ----------------------------------------------
    @classmethod
    def solve(cls, config: PunctureConfig, **kw) -> "SolvedUniformization":
        rec = solve_by_continuation(config, **kw)
        return cls(config, rec.accessory, rec.residual)

    @classmethod
    def solve_near(cls, config: PunctureConfig, seed: "SolvedUniformization", **kw) -> "SolvedUniformization":
        """Newton from a nearby solved configuration; continuation if that leaves the branch."""
        try:
            rec = solve_accessory(config, seed.acc, max_iter=12, **kw)
            _, tv, _ = fuchsian_residual(config, rec.c)
            if on_fuchsian_branch(tv, config.n):
                return cls(config, rec.accessory, rec.residual)
        except NoConvergence:
            pass
        return cls.solve(config, **kw)

    @property
    def n(self) -> int:
        return self.config.n

    @property
    def cusp_charts(self) -> list:
        """Cusp charts in label order w_1..w_{n-3}, 0, 1, infinity."""
        return list(self.atlas.cusps) + [self.atlas.infinity]

    def is_fuchsian(self) -> bool:
        return self.residual < RESIDUAL_TARGET

    # -- pointwise evaluation ------------------------------------------------
    def _clearance(self, w) -> float:
        return float(np.min(np.abs(self.q.pole_array - w)))

    def develop(self, w: complex) -> DevelopingEval:
        if self._clearance(w) < MIN_CLEARANCE:
            raise PoleTooClose(f"{w} is within {MIN_CLEARANCE} of a puncture")
        ev = self.atlas.evaluate(np.array([w]))
        return DevelopingEval(complex(w), complex(ev["tau"][0]), complex(ev["dtau"][0]),
                              complex(ev["d2tau"][0]))

    def develop_along(self, path, clearance: float = MIN_CLEARANCE) -> DevelopingEval:
        """tau at the end of a polyline from the base point, by direct transport."""
        path = [complex(z) for z in path]
        if abs(path[0] - self.monodromy.base) > 1e-14:
            path = [self.monodromy.base] + path
        y = transport(self.q, path, init=self.base_matrix, clearance=clearance)
        n, d = y[0]
        n1, d1 = y[1]
        wr = n1 * d - n * d1
        tau = n / d
        dtau = wr / d**2
        d2tau = -2 * wr * d1 / d**3
        return DevelopingEval(path[-1], tau, dtau, d2tau)

    def evaluate(self, w) -> dict:
        """Vectorized tau, derivatives, density and phi_w."""
        return self.atlas.evaluate(w)

    def density(self, w):
        return self.atlas.evaluate(w)["density"]

    def metric_density(self, w: complex, step: float | None = None) -> MetricSample:
        clearance = self._clearance(w)
        if clearance < MIN_CLEARANCE:
            raise PoleTooClose(f"{w} is within {MIN_CLEARANCE} of a puncture")
        h = step if step is not None else 2e-3 * min(1.0, clearance)
        # 5-point Laplacians at steps h and h/2, combined by Richardson
        lap = []
        for hh in (h, 0.5 * h):
            pts = np.array([w, w + hh, w - hh, w + 1j * hh, w - 1j * hh])
            ev = self.atlas.evaluate(pts)
            logd = np.log(ev["density"])
            lap.append((logd[1] + logd[2] + logd[3] + logd[4] - 4 * logd[0]) / hh**2)
        lap_w = (4 * lap[1] - lap[0]) / 3
        dens = float(ev["density"][0])
        residual = abs(0.25 * lap_w - 0.5 * dens)
        return MetricSample(complex(w), dens, complex(ev["phi_w"][0]), float(residual))

    def metric_samples(self, points, step_fraction: float = 2e-3) -> list:
        return [self.metric_density(w, step=step_fraction * min(1.0, self._clearance(w)))
                for w in points]

    def schwarzian(self, w: complex, h: float | None = None) -> complex:
        """Schwarzian of tau by a fourth-order difference of tau''/tau'."""
        h = h if h is not None else 1e-3 * min(1.0, self._clearance(w))
        offs = np.array([-2, -1, 1, 2]) * h
        r = self.atlas.log_derivative_in_chart(w, np.concatenate([[w], w + offs]))
        dr = (r[1] - 8 * r[2] + 8 * r[3] - r[4]) / (12 * h)
        return complex(dr - 0.5 * r[0] ** 2)

    # -- cusps ---------------------------------------------------------------
    def exact_h(self, i: int) -> CuspData:
        """h_i from the position of the real line in the Frobenius chart."""
        ch = self.cusp_charts[i]
        if ch.at_infinity:
            h = math.exp(-2 * ch.s_star)
        else:
            h = math.exp(2 * ch.s_star)
        return CuspData(i, h, h * 2 * ch.s_star_spread, "frobenius",
                        details={"s_star": ch.s_star, "spread": ch.s_star_spread,
                                 "accessory_from_series": complex(ch.b[1])})

    def bracket(self, i: int, r: float, angles: int = 8, route: str = "transport") -> float:
        """Circle average of log r^2 +- 2 e^{-phi/2} / r used in the h limit."""
        ch = self.cusp_charts[i]
        theta = 2 * np.pi * (np.arange(angles) + 0.5) / angles
        if ch.at_infinity:
            pts = (1.0 / r) * np.exp(1j * theta)
        else:
            pts = ch.center + r * np.exp(1j * theta)
        dens = self._density_route(pts, route)
        if ch.at_infinity:
            # |w| = 1/r
            vals = np.log((1 / r) ** 2) - 2 * dens ** -0.5 * r
        else:
            vals = np.log(r * r) + 2 * dens ** -0.5 / r
        return float(np.mean(vals))

    def _density_route(self, pts, route: str) -> np.ndarray:
        if route == "atlas":
            return self.atlas.evaluate(pts)["density"]
        out = []
        outer = 2.0 * max(float(np.max(np.abs(self.q.pole_array))), abs(self.monodromy.base))
        for w in pts:
            if abs(w) > outer:
                path = _outer_path(self.monodromy.base, w)
            else:
                path = _radial_path(self.monodromy.base, w, self.q)
            ev = self.develop_along(path, clearance=min(MIN_CLEARANCE, 0.5 * self._clearance(w)))
            out.append(abs(ev.tau_prime) ** 2 / ev.tau.imag**2)
        return np.array(out)

    def extract_h(self, i: int, r0: float | None = None, levels: int = 12,
                  route: str = "transport", method: str = "fit") -> CuspData:
        """h_i from the limit of the bracket along r_k = r0 2^{-k}.

        ``method="fit"`` fits B(r) = log h + r^2 (a + b log r + c log^2 r)
        to the circle averages; ``method="richardson"`` extrapolates linearly
        in 1/log r.  Both estimates and the observed decay of successive
        differences are recorded.
        """
        ch = self.cusp_charts[i]
        if r0 is None:
            if ch.at_infinity:
                r0 = 0.1 / (2.0 * float(np.max(np.abs(self.q.pole_array))))
            else:
                r0 = 0.1 * self.config.nearest_other(i)
        radii = r0 * 2.0 ** -np.arange(levels + 1)
        vals = np.array([self.bracket(i, r, route=route) for r in radii])
        lr = np.log(radii)
        basis = np.stack([np.ones_like(radii), radii**2, radii**2 * lr, radii**2 * lr**2], axis=1)
        coef, *_ = np.linalg.lstsq(basis, vals, rcond=None)
        fit = coef[0]
        x = 1.0 / lr
        rich = vals[-1] - (vals[-1] - vals[-2]) / (x[-1] - x[-2]) * x[-1]
        diffs = np.abs(np.diff(vals))
        order = float(np.median(np.log2(diffs[:-1] / diffs[1:]))) if np.all(diffs[1:] > 0) else float("inf")
        # error estimate: drop the two largest radii and refit
        coef2, *_ = np.linalg.lstsq(basis[2:], vals[2:], rcond=None)
        err_log = abs(coef2[0] - fit) + abs(vals[-1] - fit) * 1e-3
        log_h = fit if method == "fit" else rich
        if not np.isfinite(log_h) or abs(rich - fit) > 1.0:
            raise ExtrapolationDiverged(f"bracket limits disagree: fit {fit}, richardson {rich}")
        h = math.exp(log_h)
        return CuspData(i, h, h * err_log, f"bracket-{method}",
                        details={"log_h_fit": float(fit), "log_h_richardson": float(rich),
                                 "observed_order": order, "last_bracket": float(vals[-1]),
                                 "r0": float(r0), "levels": levels})

    def cusp_normalizer(self, i: int) -> MoebiusMap:
        """Real map sigma with J(sigma z) having a q-expansion at cusp i.

        sigma(z) = M(2 pi i z - i s_star) (finite cusp) so that xi runs over
        the horocycle strip; the stabilizer of sigma(infinity) conjugates to a
        unit translation.
        """
        ch = self.cusp_charts[i]
        m = MoebiusMap.from_matrix(ch.moebius)
        a = MoebiusMap.from_entries(2j * math.pi, ch.s_star, 0, 1)
        sig = m @ a
        mat = sig.matrix
        k = np.argmax(np.abs(mat))
        phase = mat.flat[k] / abs(mat.flat[k])
        mat = mat / phase
        return MoebiusMap.from_matrix(mat.real + 0j)

    def invert_cusp(self, i: int, z: np.ndarray, tol: float = 1e-13, max_iter: int = 50) -> np.ndarray:
        """Solve xi(w) = 2 pi i z - ... for w in the cusp chart by Newton."""
        ch = self.cusp_charts[i]
        target = 2j * np.pi * np.asarray(z, dtype=complex) + ch.s_star
        t = np.exp(target)  # leading order xi ~ log t
        for _ in range(max_iter):
            w = 1.0 / t if ch.at_infinity else ch.center + t
            xi, xw, _, _, _ = ch.xi_data(w)
            # unwrap the branch of log t to the target's imaginary part
            k = np.round((target.imag - xi.imag) / (2 * np.pi))
            xi = xi + 2j * np.pi * k
            dw = (target - xi) / xw
            if ch.at_infinity:
                w_new = w + dw
                t = 1.0 / w_new
            else:
                t = t + dw
            if np.max(np.abs(dw)) < tol * max(1.0, float(np.max(np.abs(w)))):
                break
        else:
            raise InversionFailed(f"cusp inversion at index {i} did not converge")
        return 1.0 / t if ch.at_infinity else ch.center + t

    def local_fourier(self, i: int, k_max: int = 4, samples: int = 64, q_abs: float | None = None) -> CuspData:
        """Fourier coefficients of J(sigma_i z) on a horocycle, by DFT."""
        ch = self.cusp_charts[i]
        if q_abs is None:
            # keep |t| well inside the chart: |t| ~ |q| h^(+-1/2)
            h_est = math.exp(2 * ch.s_star) if not ch.at_infinity else math.exp(-2 * ch.s_star)
            scale = math.sqrt(h_est) if not ch.at_infinity else 1 / math.sqrt(h_est)
            limit = (ch.radius if not ch.at_infinity else 1.0 / ch.radius) * 0.5
            q_abs = min(1e-3, limit / scale)
        y = -math.log(q_abs) / (2 * math.pi)
        xs = np.arange(samples) / samples
        z = xs + 1j * y
        w = self.invert_cusp(i, z)
        qv = np.exp(2j * np.pi * z)
        coeffs = {}
        lo = -1 if ch.at_infinity else 0
        for k in range(lo, k_max + 1):
            coeffs[k] = complex(np.mean(w * qv ** (-k)))
        if ch.at_infinity:
            h = abs(coeffs[-1]) ** 2
            lead = coeffs[-1]
            c_est = None
        else:
            h = abs(coeffs[1]) ** 2
            lead = coeffs[1]
            c_est = -coeffs[2] / coeffs[1] ** 2
        # aliasing bound from the first neglected mode
        alias = abs(coeffs[k_max]) * q_abs ** 1 + 1e-14 * abs(lead)
        return CuspData(i, h, 2 * abs(lead) * alias, "fourier", fourier=coeffs,
                        details={"q_abs": q_abs, "accessory_estimate": c_est,
                                 "constant_term": coeffs[0]})

    def fourier_series_coefficients(self, i: int, k_max: int = 4) -> dict:
        """a_i(k) by exact reversion of the Frobenius series (cross-check route)."""
        ch = self.cusp_charts[i]
        from .cusp_series import revert_cusp_series

        return revert_cusp_series(ch.a, ch.b, ch.s_star, ch.center, ch.at_infinity, k_max)

    # -- probes and output ---------------------------------------------------
    def probe_points(self, count: int = 200, clearance: float = 0.05) -> np.ndarray:
        return probe_set(self.config, count, clearance)

    def write_metric_csv(self, samples, path=None) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf)
        wr.writerow(["w_re", "w_im", "density", "residual"])
        for s in samples:
            wr.writerow([repr(s.w.real), repr(s.w.imag), repr(s.density), repr(s.residual)])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text

    def cusp_json(self, data) -> str:
        return json.dumps([d.to_json() for d in data], indent=2, default=_jsonable)


def _jsonable(x):
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, np.generic):
        return x.item()
    raise TypeError(type(x))


def _outer_path(base: complex, w: complex, sides: int = 32) -> list:
    """Path from base straight up to radius |w| and then along that circle."""
    rad = abs(w)
    top = complex(0, rad)
    theta_end = math.atan2(w.imag, w.real)
    # go the short way round from pi/2
    delta = (theta_end - math.pi / 2 + math.pi) % (2 * math.pi) - math.pi
    k = max(1, int(abs(delta) / (2 * math.pi) * sides) + 1)
    arc = [rad * complex(math.cos(math.pi / 2 + delta * j / k), math.sin(math.pi / 2 + delta * j / k))
           for j in range(1, k + 1)]
    return [base, top] + arc


def _radial_path(base: complex, w: complex, q: RationalQ) -> list:
    """Path from base to w that approaches a nearby puncture radially.

    Straight lines are used when they keep away from the poles; otherwise
    the path goes to the point above w first.
    """
    poles = q.pole_array
    target = complex(w)
    dists = np.abs(poles - target)
    p = poles[int(np.argmin(dists))]
    r = float(np.min(dists))
    # approach the pole along the ray through w from the outside
    direction = (target - p) / abs(target - p)
    others = [x for x in poles if x != p]
    sep = float(np.min(np.abs(np.array(others) - p))) if others else 1.0
    outer = p + direction * max(r, 0.3 * sep)
    path = [base]
    for candidate in ([outer], [complex(outer.real, base.imag), outer]):
        trial = [base] + candidate
        if _clear(trial, poles, 0.05 * sep):
            path = trial
            break
    else:
        path = [base, complex(outer.real, base.imag), outer]
    if abs(outer - target) > 0:
        path.append(target)
    return path


def _clear(path, poles, clearance) -> bool:
    from .fuchsian_ode import _point_segment_distance

    for a, b in zip(path[:-1], path[1:]):
        for p in poles:
            if _point_segment_distance(p, a, b) < clearance:
                return False
    return True


def probe_set(config: PunctureConfig, count: int = 200, clearance: float = 0.05) -> np.ndarray:
    """Deterministic scattered points in a disk around the punctures away from them."""
    pts = np.array(config.points)
    radius = 1.5 * max(1.0, float(np.max(np.abs(pts))))
    center = 0.5 + 0j
    golden = math.pi * (3 - math.sqrt(5))
    out = []
    k = 0
    while len(out) < count:
        k += 1
        rr = radius * math.sqrt((k - 0.5) / (4 * count))
        w = center + rr * complex(math.cos(k * golden), math.sin(k * golden))
        if np.min(np.abs(pts - w)) >= clearance:
            out.append(w)
        if k > 100 * count:
            break
    return np.array(out)
