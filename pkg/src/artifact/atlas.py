"""Piecewise series representation of the normalized developing map.

The plane is covered by three kinds of charts:

* regular cells of a quadtree over |w| <= R, each holding Taylor series of
  the numerator and denominator solutions N, D with tau = N / D;
* a Frobenius disk at every finite puncture p, where the solutions are
  f = t^(1/2) A(t) and g = f log t + t^(1/2) B(t) with t = w - p;
* the same construction at infinity in the coordinate s = 1/w.

Frames are glued by matching value and derivative at one point shared by
neighbouring charts, following a breadth-first spanning tree from the chart
containing the base point.  Across non-tree edges the developing map jumps
by a deck transformation, which is real and leaves the density unchanged.

On a cusp chart tau = M(xi) with xi = g / f and a Moebius map M.  The real line
pulls back to the vertical line Re xi = s_star, and the density has the closed
form |xi_w|^2 / (s_star - Re xi)^2, which stays accurate arbitrarily close to
the puncture.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import PoleTooClose
from .fuchsian_ode import RationalQ, local_basis

CELL_TERMS = 40
CUSP_TERMS = 64
CELL_RATIO = 0.25
DISK_FRACTION = 0.4
MAX_LEVEL = 11
CHUNK = 4096


def frobenius_series(q_coeffs: np.ndarray, n_terms: int) -> tuple:
    """Coefficients of A and B in f = t^(1/2) A, g = f log t + t^(1/2) B.

    q_coeffs are the Taylor coefficients of t^2 Q with leading term 1/2.
    """
    a = np.zeros(n_terms, dtype=complex)
    b = np.zeros(n_terms, dtype=complex)
    a[0] = 1.0
    qc = q_coeffs
    for k in range(1, n_terms):
        j = np.arange(1, k + 1)
        sa = np.dot(qc[j], a[k - j])
        sb = np.dot(qc[j], b[k - j])
        a[k] = -0.5 * sa / k**2
        b[k] = (-0.5 * sb - 2 * k * a[k]) / k**2
    return a, b


def _poly(coeffs: np.ndarray, t: np.ndarray) -> tuple:
    """Value and derivative of rows of coefficients at points t (vectorized)."""
    val = np.zeros(t.shape, dtype=complex)
    der = np.zeros(t.shape, dtype=complex)
    for c in coeffs[::-1]:
        der = der * t + val
        val = val * t + c
    return val, der


def _poly_rows(coeffs: np.ndarray, t: np.ndarray) -> tuple:
    """coeffs has shape (m, K) matched to t of shape (m,)."""
    val = np.zeros(t.shape, dtype=complex)
    der = np.zeros(t.shape, dtype=complex)
    for k in range(coeffs.shape[1] - 1, -1, -1):
        der = der * t + val
        val = val * t + coeffs[:, k]
    return val, der


@dataclass
class CuspChart:
    """Frobenius chart at a finite puncture (``at_infinity`` False) or at infinity."""

    index: int
    center: complex
    radius: float
    at_infinity: bool
    a: np.ndarray
    b: np.ndarray
    frame: np.ndarray = field(default_factory=lambda: np.eye(2, dtype=complex))
    s_star: float = float("nan")
    s_star_spread: float = float("nan")

    def local_t(self, w):
        return 1.0 / w if self.at_infinity else w - self.center

    def xi_data(self, w):
        """xi, dxi/dw, d2xi/dw2 and the series values at w."""
        w = np.asarray(w, dtype=complex)
        t = self.local_t(w)
        av, ad = _poly(self.a, t)
        bv, _ = _poly(self.b, t)
        xi = np.log(t) + bv / av
        xi_t = 1.0 / (t * av * av)
        xi_tt = -xi_t / t - 2 * xi_t * ad / av
        if self.at_infinity:
            tw = -t * t
            tww = 2 * t**3
            return xi, xi_t * tw, xi_tt * tw * tw + xi_t * tww, t, av
        return xi, xi_t, xi_tt, t, av

    def basis(self, w):
        """Matrix [[f, g], [f', g']] of the local solutions at a single point."""
        t = complex(self.local_t(w))
        av, ad = _poly(self.a, np.array(t))
        bv, bd = _poly(self.b, np.array(t))
        av, ad, bv, bd = complex(av), complex(ad), complex(bv), complex(bd)
        rt = np.sqrt(t)
        lt = np.log(t)
        f = rt * av
        ft = (0.5 * av + t * ad) / rt
        g = f * lt + rt * bv
        gt = ft * lt + f / t + (0.5 * bv + t * bd) / rt
        if not self.at_infinity:
            return np.array([[f, g], [ft, gt]], dtype=complex)
        # u(w) = w u~(1/w):  u = u~/s,  u' = u~ - s u~'
        s = t
        return np.array([[f / s, g / s], [f - s * ft, g - s * gt]], dtype=complex)

    @property
    def moebius(self) -> np.ndarray:
        """Matrix of tau as a Moebius function of xi."""
        p = self.frame
        return np.array([[p[1, 0], p[0, 0]], [p[1, 1], p[0, 1]]], dtype=complex)

    def locate_real_line(self) -> None:
        """Set s_star so that Re xi = s_star develops onto the real line."""
        m = self.moebius
        inv = np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]])
        if abs(m[1, 0]) > 1e-8 * abs(m[1, 1]):
            cusp = m[0, 0] / m[1, 0]
            offsets = cusp.real + (1.0 + abs(cusp)) * np.array([-1.0, 1.0, 2.5])
        else:
            # the cusp develops to infinity and tau is affine in xi
            offsets = np.array([-1.0, 0.0, 1.0])
        vals = []
        for x in offsets:
            vals.append(((inv[0, 0] * x + inv[0, 1]) / (inv[1, 0] * x + inv[1, 1])).real)
        self.s_star = float(np.mean(vals))
        self.s_star_spread = float(np.max(vals) - np.min(vals))


@dataclass
class Atlas:
    q: RationalQ
    radius: float
    levels: int
    index: np.ndarray
    centers: np.ndarray
    half_widths: np.ndarray
    n_coeffs: np.ndarray
    d_coeffs: np.ndarray
    cusps: list
    infinity: CuspChart
    tree: dict

    # -- chart lookup -----------------------------------------------------
    def chart_ids(self, w: np.ndarray) -> np.ndarray:
        """Chart id per point: leaf index >= 0, -1 - i for cusp i, -1000 for infinity."""
        w = np.asarray(w, dtype=complex).ravel()
        ids = np.full(w.shape, -2000, dtype=np.int64)
        outside = np.abs(w) >= self.radius
        ids[outside] = -1000
        for i, ch in enumerate(self.cusps):
            inside = np.abs(w - ch.center) < ch.radius
            ids[inside] = -1 - i
        rest = ids == -2000
        if np.any(rest):
            ids[rest] = self.leaf_of(w[rest])
        return ids

    def leaf_of(self, w: np.ndarray) -> np.ndarray:
        size = 2 ** self.levels
        scale = size / (2 * self.radius)
        ix = np.clip(np.floor((w.real + self.radius) * scale).astype(np.int64), 0, size - 1)
        iy = np.clip(np.floor((w.imag + self.radius) * scale).astype(np.int64), 0, size - 1)
        return self.index[ix, iy]

    # -- evaluation -------------------------------------------------------
    def evaluate(self, w, want_tau: bool = True) -> dict:
        """tau, tau', tau'', density and phi_w at every point of w."""
        w = np.asarray(w, dtype=complex)
        shape = w.shape
        flat = w.ravel()
        out = {k: np.full(flat.shape, np.nan + 0j) for k in ("tau", "dtau", "d2tau", "phi_w")}
        out["density"] = np.full(flat.shape, np.nan)
        dmin = np.min(np.abs(flat[:, None] - self.q.pole_array[None, :]), axis=1) if flat.size else flat.real
        if flat.size and np.min(dmin) == 0:
            raise PoleTooClose("evaluation at a puncture")
        for start in range(0, flat.size, CHUNK):
            sl = slice(start, start + CHUNK)
            self._evaluate_chunk(flat[sl], out, sl)
        return {k: v.reshape(shape) for k, v in out.items()}

    def _evaluate_chunk(self, w, out, sl):
        ids = self.chart_ids(w)
        if np.any(ids == -2000):
            raise PoleTooClose(f"point {w[ids == -2000][0]} not covered by the atlas")
        cell = ids >= 0
        if np.any(cell):
            self._eval_cells(w[cell], ids[cell], out, np.arange(sl.start, sl.start + w.size)[cell])
        for i, ch in enumerate(self.cusps):
            mask = ids == -1 - i
            if np.any(mask):
                self._eval_cusp(ch, w[mask], out, np.arange(sl.start, sl.start + w.size)[mask])
        mask = ids == -1000
        if np.any(mask):
            self._eval_cusp(self.infinity, w[mask], out, np.arange(sl.start, sl.start + w.size)[mask])

    def _eval_cells(self, w, leaf, out, pos):
        t = w - self.centers[leaf]
        nv, nd = _poly_rows(self.n_coeffs[leaf], t)
        dv, dd = _poly_rows(self.d_coeffs[leaf], t)
        wr = nd * dv - nv * dd
        tau = nv / dv
        dtau = wr / dv**2
        d2tau = -2 * wr * dd / dv**3
        out["tau"][pos] = tau
        out["dtau"][pos] = dtau
        out["d2tau"][pos] = d2tau
        im = tau.imag
        out["density"][pos] = np.abs(dtau) ** 2 / im**2
        out["phi_w"][pos] = d2tau / dtau + 1j * dtau / im

    def _eval_cusp(self, ch: CuspChart, w, out, pos):
        xi, xw, xww, _, _ = ch.xi_data(w)
        gap = ch.s_star - xi.real
        out["density"][pos] = np.abs(xw) ** 2 / gap**2
        out["phi_w"][pos] = xww / xw + xw / gap
        m = ch.moebius
        den = m[1, 0] * xi + m[1, 1]
        det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
        mp = det / den**2
        mpp = -2 * m[1, 0] * det / den**3
        out["tau"][pos] = (m[0, 0] * xi + m[0, 1]) / den
        out["dtau"][pos] = mp * xw
        out["d2tau"][pos] = mpp * xw * xw + mp * xww

    def log_derivative_in_chart(self, anchor: complex, pts) -> np.ndarray:
        """F''/F' at pts for one branch-free local developing function F.

        F is tau on the regular cell containing ``anchor`` and xi on a cusp
        chart, continued analytically to the nearby points.  Both have the
        Schwarzian of tau.
        """
        pts = np.asarray(pts, dtype=complex)
        cid = int(self.chart_ids(np.array([anchor]))[0])
        if cid >= 0:
            leaf = np.full(pts.shape, cid)
            t = pts - self.centers[cid]
            nv, nd = _poly_rows(self.n_coeffs[leaf], t)
            dv, dd = _poly_rows(self.d_coeffs[leaf], t)
            wr = nd * dv - nv * dd
            return (-2 * wr * dd / dv**3) / (wr / dv**2)
        ch = self.infinity if cid == -1000 else self.cusps[-1 - cid]
        _, xw, xww, _, _ = ch.xi_data(pts)
        return xww / xw

    def local_matrix(self, chart, w) -> np.ndarray:
        """[[N, D], [N', D']] at a point from the given chart."""
        if isinstance(chart, CuspChart):
            return chart.basis(w) @ chart.frame
        leaf = chart
        t = np.array([w - self.centers[leaf]])
        nv, nd = _poly_rows(self.n_coeffs[leaf][None, :], t)
        dv, dd = _poly_rows(self.d_coeffs[leaf][None, :], t)
        return np.array([[nv[0], dv[0]], [nd[0], dd[0]]], dtype=complex)

    @property
    def leaf_count(self) -> int:
        return len(self.centers)


# -- construction -------------------------------------------------------------


def _build_quadtree(poles: np.ndarray, radius: float, disks: list) -> list:
    leaves = []
    stack = [(0, 0, 0)]
    while stack:
        level, ix, iy = stack.pop()
        hw = radius / 2**level
        cx = -radius + (2 * ix + 1) * hw
        cy = -radius + (2 * iy + 1) * hw
        c = complex(cx, cy)
        corners = c + hw * np.array([1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j])
        # drop cells entirely inside a cusp disk
        if any(np.all(np.abs(corners - p) < r) for p, r in disks):
            continue
        # drop cells entirely outside the outer circle
        if _box_min_abs(cx, cy, hw) >= radius:
            continue
        dist = float(np.min(np.abs(poles - c)))
        if hw <= CELL_RATIO * dist:
            leaves.append((level, ix, iy, c, hw))
            continue
        if level >= MAX_LEVEL:
            raise PoleTooClose("punctures too close for the atlas resolution")
        for dx in (0, 1):
            for dy in (0, 1):
                stack.append((level + 1, 2 * ix + dx, 2 * iy + dy))
    return leaves


def _box_min_abs(cx, cy, hw) -> float:
    dx = max(abs(cx) - hw, 0.0)
    dy = max(abs(cy) - hw, 0.0)
    return math.hypot(dx, dy)


def _fill_index(leaves, levels):
    size = 2**levels
    index = np.full((size, size), -1, dtype=np.int64)
    for k, (level, ix, iy, _, _) in enumerate(leaves):
        step = 2 ** (levels - level)
        index[ix * step:(ix + 1) * step, iy * step:(iy + 1) * step] = k
    return index


def _leaf_adjacency(index, leaves, radius, levels):
    size = 2**levels
    edges = {}
    fine = 2 * radius / size
    for axis in (0, 1):
        a = index[:-1, :] if axis == 0 else index[:, :-1]
        b = index[1:, :] if axis == 0 else index[:, 1:]
        mask = (a != b) & (a >= 0) & (b >= 0)
        ii, jj = np.nonzero(mask)
        for i, j in zip(ii, jj):
            x, y = int(a[i, j]), int(b[i, j])
            key = (min(x, y), max(x, y))
            if key in edges:
                continue
            # midpoint of the fine edge shared by the two cells
            if axis == 0:
                pt = complex(-radius + (i + 1) * fine, -radius + (j + 0.5) * fine)
            else:
                pt = complex(-radius + (i + 0.5) * fine, -radius + (j + 1) * fine)
            edges[key] = pt
    adj = {}
    for (x, y), pt in edges.items():
        adj.setdefault(x, []).append((y, pt))
        adj.setdefault(y, []).append((x, pt))
    return adj


def build_atlas(q: RationalQ, base: complex, base_matrix: np.ndarray) -> Atlas:
    """Build the atlas with [[N, D], [N', D']](base) = base_matrix."""
    poles = q.pole_array
    pmax = float(np.max(np.abs(poles)))
    radius = 2.0 * max(pmax, 1.0)
    cusps = []
    disks = []
    for i, p in enumerate(poles):
        others = np.delete(poles, i)
        rconv = float(np.min(np.abs(others - p)))
        r = DISK_FRACTION * rconv
        a, b = frobenius_series(q.frobenius_coefficients(i, CUSP_TERMS), CUSP_TERMS)
        cusps.append(CuspChart(i, complex(p), r, False, a, b))
        disks.append((complex(p), r))
    a, b = frobenius_series(q.frobenius_coefficients_infinity(CUSP_TERMS), CUSP_TERMS)
    infinity = CuspChart(len(poles), 0j, radius, True, a, b)

    leaves = _build_quadtree(poles, radius, disks)
    levels = max(l[0] for l in leaves)
    index = _fill_index(leaves, levels)
    centers = np.array([l[3] for l in leaves])
    hws = np.array([l[4] for l in leaves])
    basis = np.zeros((len(leaves), 2, CELL_TERMS), dtype=complex)
    for k, c in enumerate(centers):
        basis[k] = local_basis(q.taylor(c, CELL_TERMS), CELL_TERMS)

    atlas = Atlas(q, radius, levels, index, centers, hws,
                  np.zeros((len(leaves), CELL_TERMS), dtype=complex),
                  np.zeros((len(leaves), CELL_TERMS), dtype=complex),
                  cusps, infinity, {})
    adj = _leaf_adjacency(index, leaves, radius, levels)

    def leaf_value_matrix(k, w):
        t = w - centers[k]
        v, d = _basis_at(basis[k], t)
        return np.array([[v[0], v[1]], [d[0], d[1]]], dtype=complex)

    def set_leaf(k, target, w):
        frame = np.linalg.solve(leaf_value_matrix(k, w), target)
        atlas.n_coeffs[k] = basis[k][0] * frame[0, 0] + basis[k][1] * frame[1, 0]
        atlas.d_coeffs[k] = basis[k][0] * frame[0, 1] + basis[k][1] * frame[1, 1]

    def set_cusp(ch, target, w):
        ch.frame = np.linalg.solve(ch.basis(w), target)

    # match points for cusp charts: just outside each disk, and inside the
    # outer circle for the chart at infinity
    cusp_links = []
    for ch in cusps:
        for theta in np.linspace(0, 2 * np.pi, 8, endpoint=False):
            m = ch.center + 1.02 * ch.radius * np.exp(1j * theta)
            k = int(atlas.leaf_of(np.array([m]))[0])
            if k >= 0 and abs(m) < radius and all(abs(m - c2.center) >= c2.radius for c2 in cusps):
                cusp_links.append((ch, k, m))
                break
        else:
            raise PoleTooClose(f"no matching point for the disk at {ch.center}")
    m_inf = 0.98j * radius
    k_inf = int(atlas.leaf_of(np.array([m_inf]))[0])

    # root chart
    if abs(base) >= radius:
        set_cusp(infinity, base_matrix, base)
        set_leaf(k_inf, atlas.local_matrix(infinity, m_inf), m_inf)
        root = k_inf
        root_chart = infinity
    else:
        root_candidates = [ch for ch in cusps if abs(base - ch.center) < ch.radius]
        if root_candidates:
            ch = root_candidates[0]
            set_cusp(ch, base_matrix, base)
            link = [lk for lk in cusp_links if lk[0] is ch][0]
            set_leaf(link[1], atlas.local_matrix(ch, link[2]), link[2])
            root = link[1]
            root_chart = ch
        else:
            root = int(atlas.leaf_of(np.array([base]))[0])
            set_leaf(root, base_matrix, base)
            root_chart = None

    seen = {root}
    parent = {root: None}
    queue = deque([root])
    while queue:
        k = queue.popleft()
        for j, pt in adj.get(k, []):
            if j in seen:
                continue
            set_leaf(j, atlas.local_matrix(k, pt), pt)
            seen.add(j)
            parent[j] = k
            queue.append(j)
    if len(seen) != len(leaves):
        raise PoleTooClose("atlas cells are not connected")
    for ch, k, m in cusp_links:
        if ch is not root_chart:
            set_cusp(ch, atlas.local_matrix(k, m), m)
        ch.locate_real_line()
    if root_chart is not infinity:
        set_cusp(infinity, atlas.local_matrix(k_inf, m_inf), m_inf)
    infinity.locate_real_line()
    atlas.tree = parent
    return atlas


def _basis_at(coeffs: np.ndarray, t: complex) -> tuple:
    vals = np.zeros(2, dtype=complex)
    ders = np.zeros(2, dtype=complex)
    for k in range(coeffs.shape[1] - 1, -1, -1):
        ders = ders * t + vals
        vals = vals * t + coeffs[:, k]
    return vals, ders
