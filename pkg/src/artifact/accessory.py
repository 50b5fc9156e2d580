"""Newton solve for the accessory parameters that make the monodromy Fuchsian.

The unknowns are the complex residues c_1..c_{n-3}.  The residual collects
imaginary parts of traces of the loop monodromies M_i, of the adjacent
products M_i M_{i+1} and of M_1 M_3.  Traces are holomorphic in c, so the
Jacobian comes from one complex difference quotient per parameter.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import NoConvergence, NotRealizable
from .fuchsian_ode import AccessoryParams, MonodromyRep, PunctureConfig, build_q, monodromy

log = logging.getLogger(__name__)

RESIDUAL_TARGET = 1e-9


def trace_vector(rep: MonodromyRep) -> np.ndarray:
    m = rep.matrices
    n = len(m)
    traces = [np.trace(x) for x in m]
    traces += [np.trace(m[i] @ m[i + 1]) for i in range(n - 1)]
    if n >= 3:
        traces.append(np.trace(m[0] @ m[2]))
    return np.array(traces, dtype=complex)


def fuchsian_residual(config: PunctureConfig, c, base=None) -> tuple:
    q = build_q(config, AccessoryParams(tuple(c)))
    rep = monodromy(q, config, base)
    tv = trace_vector(rep)
    return tv.imag, tv, rep


@dataclass
class SolveRecord:
    config: PunctureConfig
    c: np.ndarray
    residual: float
    iterations: int
    history: list = field(default_factory=list)
    method: str = "newton"

    @property
    def accessory(self) -> AccessoryParams:
        return AccessoryParams(tuple(self.c))

    def to_json(self) -> dict:
        return accessory_to_json(self.config, self.c, self.residual)


def _newton(config, c0, tol, max_iter, step, jacobian, base):
    c = np.array(c0, dtype=complex)
    m = len(c)
    history = []
    best = (np.inf, c.copy())
    for it in range(max_iter + 1):
        f, tv, _ = fuchsian_residual(config, c, base)
        r = float(np.linalg.norm(f))
        history.append(r)
        if r < best[0]:
            best = (r, c.copy())
        if r < tol:
            return c, r, it, history
        if it == max_iter:
            break
        jac = np.zeros((len(f), 2 * m))
        for l in range(m):
            e = np.zeros(m, dtype=complex)
            if jacobian == "complex-step":
                e[l] = 1j * step
                _, tp, _ = fuchsian_residual(config, c + e, base)
                _, tm, _ = fuchsian_residual(config, c - e, base)
                deriv = (tp - tm) / (2j * step)
            else:
                e[l] = step
                _, tp, _ = fuchsian_residual(config, c + e, base)
                _, tm, _ = fuchsian_residual(config, c - e, base)
                deriv = (tp - tm) / (2 * step)
            # d Im T = Im(T') dx + Re(T') dy
            jac[:, 2 * l] = deriv.imag
            jac[:, 2 * l + 1] = deriv.real
        delta, *_ = np.linalg.lstsq(jac, -f, rcond=None)
        dc = delta[0::2] + 1j * delta[1::2]
        # damp wild steps
        size = np.max(np.abs(dc))
        if size > 0.5:
            dc *= 0.5 / size
        c = c + dc
        if np.max(np.abs(dc)) < 1e-15 and r < 1e3 * tol:
            break
    raise NoConvergence(len(history), best[0])


def solve_accessory(config: PunctureConfig, init: AccessoryParams | None = None,
                    tol: float = RESIDUAL_TARGET, max_iter: int = 40,
                    step: float = 1e-6, jacobian: str = "central",
                    base=None) -> SolveRecord:
    """Solve for c with Fuchsian monodromy starting from ``init``."""
    n = config.n
    if init is None:
        init = AccessoryParams.zeros(n)
    c0 = np.array(init.c if isinstance(init, AccessoryParams) else init, dtype=complex)
    if n == 3:
        f, _, _ = fuchsian_residual(config, [], base)
        return SolveRecord(config, np.zeros(0, dtype=complex), float(np.linalg.norm(f)), 0)
    c, r, it, hist = _newton(config, c0, tol, max_iter, step, jacobian, base)
    log.info("accessory solve: %d iterations, residual history %s", it,
             ", ".join(f"{x:.1e}" for x in hist))
    return SolveRecord(config, c, r, it, hist)


def _mobius_normalizing(points):
    """Coefficients of the map sending points[-3], points[-2], points[-1] to 0, 1, inf."""
    p, q, r = points[-3], points[-2], points[-1]
    return (q - r, -p * (q - r), q - p, -r * (q - p))


def regular_polygon_start(n: int) -> tuple:
    """Configuration and exact accessory parameters of the regular n-gon.

    With punctures at the n-th roots of unity the rotation symmetry forces
    Q(z) = sum_k 1/(2 (z - z_k)^2) - z_k^{-1} / (2 (z - z_k)).  After the
    normalizing Moebius map the residues are read off by the trapezoid rule
    on small circles, which is exact up to aliasing.
    """
    roots = [np.exp(2j * np.pi * k / n) for k in range(n)]
    a, b, cc, d = _mobius_normalizing(roots)
    det = a * d - b * cc

    def forward(z):
        return (a * z + b) / (cc * z + d)

    def backward(w):
        return (d * w - b) / (-cc * w + a)

    def q_z(z):
        return sum(0.5 / (z - zk) ** 2 - 0.5 / zk / (z - zk) for zk in roots)

    def q_w(w):
        z = backward(w)
        dz = det / (-cc * w + a) ** 2
        return q_z(z) * dz * dz

    w_pts = [complex(forward(z)) for z in roots[: n - 3]]
    sep = min([abs(x - y) for i, x in enumerate(w_pts + [0, 1]) for y in (w_pts + [0, 1])[i + 1:]])
    rad = 0.25 * sep
    m = 128
    theta = 2 * np.pi * np.arange(m) / m
    cs = []
    for w in w_pts:
        pts = w + rad * np.exp(1j * theta)
        cs.append(complex(np.mean([q_w(x) * (x - w) for x in pts])))
    return PunctureConfig(tuple(w_pts)), np.array(cs)


def continuation_start(n: int) -> tuple:
    """Reference configuration with exactly known accessory parameters."""
    if n == 4:
        return PunctureConfig((0.5,)), np.zeros(1, dtype=complex)
    return regular_polygon_start(n)


def _path_separation(start, target, samples=64):
    worst = np.inf
    for t in np.linspace(0, 1, samples + 1):
        pts = list(start + t * (target - start)) + [0.0, 1.0]
        for i in range(len(pts)):
            for j in range(i + 1, len(pts)):
                worst = min(worst, abs(pts[i] - pts[j]))
    return worst


def continuation_waypoints(start, target, clearance: float = 0.2) -> list:
    """Piecewise-linear path from start to target keeping punctures apart."""
    start = np.asarray(start, dtype=complex)
    target = np.asarray(target, dtype=complex)
    floor = min(clearance, 0.5 * _path_separation(target, target, 0),
                0.5 * _path_separation(start, start, 0))
    if _path_separation(start, target) >= floor:
        return [start, target]
    mid = 0.5 * (start + target)
    for lift in (0.5, -0.5, 1.0, -1.0, 2.0, -2.0):
        way = mid + 1j * lift * np.arange(1, len(mid) + 1)
        if (_path_separation(start, way) >= floor
                and _path_separation(way, target) >= floor):
            return [start, way, target]
    raise NoConvergence(0, float("nan"), "no collision-free continuation path found")


def on_fuchsian_branch(tv: np.ndarray, n: int, tol: float = 1e-6) -> bool:
    """Loops around two punctures have trace <= -2 when every parabolic has trace -2."""
    products = tv[n:].real
    return bool(np.all(products <= -2 + tol))


def solve_by_continuation(config: PunctureConfig, max_step: float = 0.05,
                          tol: float = RESIDUAL_TARGET, **kw) -> SolveRecord:
    """Path-continue c from the reference configuration to ``config``.

    Each step uses a secant predictor; a step is accepted only when Newton
    converges and the adjacent-product traces stay on the Fuchsian side.
    """
    if config.n == 3:
        return solve_accessory(config, None, tol=tol, **kw)
    ref, c = continuation_start(config.n)
    nodes = continuation_waypoints(np.array(ref.finite_punctures), np.array(config.finite_punctures))
    c = np.array(c, dtype=complex)
    prev = None
    rec = None
    for a, b in zip(nodes[:-1], nodes[1:]):
        h_max = min(1.0, max_step / max(float(np.max(np.abs(b - a))), 1e-300))
        t, h = 0.0, h_max
        while t < 1.0:
            t_new = min(1.0, t + h)
            cfg = PunctureConfig(tuple(a + t_new * (b - a)))
            guess = c if prev is None else c + (c - prev[1]) * (t_new - t) / prev[0]
            try:
                cand = solve_accessory(cfg, AccessoryParams(tuple(guess)), tol=tol, max_iter=8, **kw)
                _, tv, _ = fuchsian_residual(cfg, cand.c, kw.get("base"))
                if not on_fuchsian_branch(tv, config.n):
                    raise NoConvergence(cand.iterations, cand.residual, "left the Fuchsian branch")
            except NoConvergence:
                h *= 0.5
                if h < 1e-4 * h_max:
                    raise
                continue
            prev = (t_new - t, c)
            rec, c, t = cand, cand.c, t_new
            h = min(h_max, 1.5 * h)
        prev = None
    if rec is None:
        rec = solve_accessory(config, AccessoryParams(tuple(c)), tol=tol, **kw)
    return rec


def accessory_to_json(config: PunctureConfig, c, residual: float) -> dict:
    return {
        "n": config.n,
        "w": [[float(w.real), float(w.imag)] for w in config.finite_punctures],
        "c": [[float(complex(x).real), float(complex(x).imag)] for x in c],
        "residual": float(residual),
    }


def accessory_from_json(record: dict | str) -> tuple:
    if isinstance(record, str):
        record = json.loads(record)
    w = tuple(complex(a, b) for a, b in record["w"])
    config = PunctureConfig(w)
    if config.n != record["n"]:
        raise ValueError("record n does not match the number of punctures")
    c = AccessoryParams(tuple(complex(a, b) for a, b in record["c"]))
    return config, c, float(record.get("residual", float("nan")))


def check_realizable(rep: MonodromyRep, tol: float = 1e-7) -> None:
    tv = trace_vector(rep)
    if np.max(np.abs(tv.imag)) > tol:
        raise NotRealizable(f"traces not real: max imaginary part {np.max(np.abs(tv.imag)):.2e}")
