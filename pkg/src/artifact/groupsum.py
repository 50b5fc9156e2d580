"""The Fuchsian group behind a uniformization and its Eisenstein series.

The group frame is the developing-map frame scaled so that the cusps over
0, 1 and infinity sit at 0, 1 and infinity.  Eisenstein series

    E_i(z) = sum over Gamma_i \\ Gamma of Im(sigma_i^{-1} gamma z)^2

are evaluated either as a plain partial sum over a coset table or, by
default, regrouped over double cosets Gamma_i \\ Gamma / Gamma_j: the right
translations of the frame at cusp j act on the bottom row (c, d) by
d -> d + k c, and that whole family is summed in closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NotRealizable, TailTooLarge
from .moebius import MoebiusMap

TAIL_BOUND = 1e-4
# Rows built from long products of floating generators drift by ~1e-6;
# genuine classes are separated by O(1), so coarse keys are safe.
KEY_RESOLUTION = 1e5
MERGE_TOL = 5e-5


def _real(m) -> np.ndarray:
    mat = m.matrix if isinstance(m, MoebiusMap) else np.asarray(m)
    k = int(np.argmax(np.abs(mat)))
    mat = mat / (mat.flat[k] / abs(mat.flat[k]))
    if np.max(np.abs(mat.imag)) > 1e-7 * np.max(np.abs(mat)):
        raise NotRealizable("generator is not real")
    mat = mat.real
    return mat / math.sqrt(abs(np.linalg.det(mat)))


def _fixed_point(m: np.ndarray) -> float:
    a, b, c, d = m.ravel()
    if abs(c) < 1e-12 * max(1.0, abs(b)):
        return math.inf
    return (a - d) / (2 * c)


def _unipotent(m: np.ndarray) -> np.ndarray:
    return m if np.trace(m) > 0 else -m


@dataclass
class FuchsianGroupRep:
    """Real parabolic generators S_1..S_n in label order with cusp maps sigma_i."""

    generators: list
    fixed_points: list
    sigmas: list
    scale: float  # group frame z = scale * tau
    relation_residual: float

    @property
    def n(self) -> int:
        return len(self.generators)

    @property
    def free_basis(self) -> list:
        return self.generators[:-1]

    def to_group_frame(self, tau):
        return self.scale * np.asarray(tau)

    def conjugation_defect(self) -> float:
        worst = 0.0
        for s, sig in zip(self.generators, self.sigmas):
            m = np.linalg.inv(sig) @ s @ sig
            m = m / np.sign(m[0, 0])
            worst = max(worst, abs(m[0, 0] - 1), abs(m[1, 1] - 1), abs(m[1, 0]), abs(abs(m[0, 1]) - 1))
        return worst

    def trace_spectrum(self, length: int = 3) -> np.ndarray:
        mats = [g for _, g in reduced_words(self.free_basis, length)]
        return np.sort(np.abs([np.trace(m) for m in mats]))


def cusp_map(fixed: float, parabolic: np.ndarray) -> np.ndarray:
    """sigma with sigma(inf) = fixed and sigma^{-1} S sigma = (1 +-1; 0 1)."""
    if math.isinf(fixed):
        a = np.eye(2)
    else:
        a = np.array([[fixed, -1.0], [1.0, 0.0]])
    t = np.linalg.inv(a) @ _unipotent(parabolic) @ a
    width = abs(t[0, 1] / t[0, 0])
    r = math.sqrt(width)
    return a @ np.diag([r, 1 / r])


def realize_fuchsian(s, tol: float = 1e-9) -> FuchsianGroupRep:
    """Group of a SolvedUniformization, normalized with cusps 0, 1, inf."""
    n = s.n
    gens = [_real(g) for g in s.generators]
    for g in gens:
        if abs(abs(np.trace(g)) - 2) > 1e-7:
            raise NotRealizable(f"generator with trace {np.trace(g):.6g} is not parabolic")
    one = _fixed_point(gens[n - 2])
    if not math.isfinite(one) or one <= 0:
        raise NotRealizable(f"cusp over 1 develops to {one}, expected a positive real point")
    scale = 1.0 / one
    d = np.diag([math.sqrt(scale), 1 / math.sqrt(scale)])
    di = np.linalg.inv(d)
    gens = [d @ g @ di for g in gens]
    fixed = [_fixed_point(g) for g in gens]
    fixed[n - 3] = 0.0 if abs(fixed[n - 3]) < 1e-9 else fixed[n - 3]
    fixed[n - 2] = 1.0 if abs(fixed[n - 2] - 1) < 1e-9 else fixed[n - 2]
    if not math.isinf(fixed[-1]):
        raise NotRealizable("last generator does not fix infinity")
    sigmas = [cusp_map(p, g) for p, g in zip(fixed, gens)]
    prod = np.eye(2)
    for g in gens:
        prod = prod @ g
    prod = prod / np.sign(prod[0, 0])
    rep = FuchsianGroupRep(gens, fixed, sigmas, scale, float(np.max(np.abs(prod - np.eye(2)))))
    if rep.conjugation_defect() > tol:
        raise NotRealizable(f"cusp maps defective by {rep.conjugation_defect():.2e}")
    return rep


def level2_oracle() -> list:
    """Integer generators of the principal congruence group of level 2 (a free basis)."""
    return [np.array([[1.0, 0.0], [-2.0, 1.0]]), np.array([[-1.0, 2.0], [-2.0, 3.0]])]


# -- words ---------------------------------------------------------------------
def reduced_words(basis, length: int):
    """(word, matrix) for all nonempty reduced words up to ``length``.

    Letters are (k, +-1) for the k-th free generator.
    """
    letters = []
    for k, g in enumerate(basis):
        letters.append(((k, 1), g))
        letters.append(((k, -1), np.linalg.inv(g)))
    frontier = [((), np.eye(2))]
    for _ in range(length):
        new = []
        for word, mat in frontier:
            for lt, g in letters:
                if word and word[-1] == (lt[0], -lt[1]):
                    continue
                w2 = word + (lt,)
                m2 = mat @ g
                new.append((w2, m2))
                yield w2, m2
        frontier = new


def _row_key(c: float, d: float, digits: int = 9) -> tuple:
    scale = max(1.0, abs(c), abs(d))
    if abs(c) < 1e-12 * scale:
        c = 0.0
    if c < 0 or (c == 0 and d < 0):
        c, d = -c, -d
    return (round(c / scale, digits), round(d / scale, digits), round(math.log(scale), digits))


@dataclass
class CosetTable:
    """Representatives of Gamma_i \\ Gamma from reduced words of length <= L."""

    cusp: int
    bound: int
    words: list
    matrices: list  # sigma_i^{-1} gamma
    lengths: np.ndarray

    def __len__(self) -> int:
        return len(self.words)

    @classmethod
    def build(cls, g: FuchsianGroupRep, i: int, bound: int) -> "CosetTable":
        sig_inv = np.linalg.inv(g.sigmas[i])
        seen = {}
        words, mats, lens = [()], [sig_inv], [0]
        seen[_row_key(*sig_inv[1])] = 0
        for word, mat in reduced_words(g.free_basis, bound):
            m = sig_inv @ mat
            key = _row_key(*m[1])
            if key in seen:
                continue
            seen[key] = len(words)
            words.append(word)
            mats.append(m)
            lens.append(len(word))
        return cls(i, bound, words, mats, np.array(lens))

    def has_duplicates(self) -> bool:
        keys = {_row_key(*m[1]) for m in self.matrices}
        return len(keys) != len(self.matrices)

    def stack(self) -> np.ndarray:
        return np.array(self.matrices)


def coset_sum(table: CosetTable, z) -> tuple:
    """Partial sum over the table with a geometric tail from per-length sums."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    mats = table.stack()
    c = mats[:, 1, 0][:, None]
    d = mats[:, 1, 1][:, None]
    terms = (z.imag[None, :] / np.abs(c * z[None, :] + d) ** 2) ** 2
    value = terms.sum(axis=0)
    per_len = np.array([terms[table.lengths == ell].sum(axis=0) for ell in range(table.bound + 1)])
    last, prev = per_len[-1], per_len[-2]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(prev > 0, last / prev, 1.0)
        tail = np.where(ratio < 1, last * ratio / (1 - ratio), np.inf)
    return value, tail


# -- double cosets -------------------------------------------------------------
def lattice_sum(x, y):
    """sum_k 1 / ((x + k)^2 + y^2)^2 in closed form."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    a = 2 * np.pi * y
    cs = np.cos(2 * np.pi * x)
    # divide numerator and denominator by cosh to stay finite for large y
    ea = np.exp(-np.minimum(a, 700.0))
    ch_part = 1 - 2 * cs * ea / (1 + ea * ea)  # (cosh a - cos) / cosh a
    th = (1 - ea * ea) / (1 + ea * ea)
    g = np.pi / y * th / ch_part
    sech = 2 * ea / (1 + ea * ea)
    second = (sech * sech - cs * sech) / (ch_part * ch_part)  # (1 - cosh cos)/(cosh - cos)^2
    return g / (2 * y * y) - np.pi**2 / (y * y) * second


@dataclass
class DoubleCosetTable:
    """Bottom rows (c, d mod c) of sigma_i^{-1} gamma tau for c <= c_max."""

    cusp: int
    frame: np.ndarray  # tau: cusp map of the right-hand cusp
    identity_term: bool
    c: np.ndarray
    d: np.ndarray
    c_max: float
    density: float  # fitted count N(c <= X) ~ density * X^2

    def tail(self, y):
        # remaining terms: dN = 2 density c dc, average of y^2 c^-4 lattice_sum = pi/(2 c^4 y)
        return self.density * np.pi / (2 * np.asarray(y) * self.c_max**2)

    def evaluate(self, zeta) -> tuple:
        zeta = np.atleast_1d(np.asarray(zeta, dtype=complex))
        x, y = zeta.real, zeta.imag
        out = np.zeros(zeta.shape)
        if self.identity_term:
            out += y * y
        for start in range(0, len(self.c), 256):
            cc = self.c[start:start + 256, None]
            dd = self.d[start:start + 256, None]
            out += np.sum(y[None, :] ** 2 / cc**4 * lattice_sum(x[None, :] + dd / cc, y[None, :]), axis=0)
        return out, self.tail(y)


def double_cosets(g: FuchsianGroupRep, i: int, frame: np.ndarray, c_max: float,
                  margin: float | None = None, max_rows: int = 2_000_000) -> DoubleCosetTable:
    """Enumerate Gamma_i gamma Gamma_frame with 0 < c <= c_max.

    Bottom rows r of sigma_i^{-1} gamma frame form one orbit under right
    multiplication by the conjugated generators.  The orbit is explored by
    breadth-first search inside the disc |r|^2 <= margin * 2 c_max^2, which
    contains every double coset representative with d in [0, c).  The margin
    is the largest squared operator norm of a generator, so a single step
    never jumps across the boundary.
    """
    sig_inv = np.linalg.inv(g.sigmas[i])
    frame_inv = np.linalg.inv(frame)
    moves = []
    for s in g.free_basis:
        b = frame_inv @ s @ frame
        moves += [b, np.linalg.inv(b)]
    if margin is None:
        margin = max(np.linalg.norm(b, 2) ** 2 for b in moves)
    radius2 = margin * 2 * c_max**2
    row0 = (sig_inv @ frame)[1]
    scale = max(1.0, float(np.max(np.abs(row0))))

    def canon(rows):
        flip = (rows[:, 0] < -1e-12 * scale) | ((np.abs(rows[:, 0]) <= 1e-12 * scale) & (rows[:, 1] < 0))
        rows = np.where(flip[:, None], -rows, rows)
        keys = np.round(rows * KEY_RESOLUTION).astype(np.int64)
        return rows, keys

    rows, keys = canon(row0[None, :])
    seen = {tuple(keys[0])}
    every = [rows]
    frontier = rows
    mats = np.array(moves)
    while len(frontier):
        cand = np.einsum("ri,mij->mrj", frontier, mats).reshape(-1, 2)
        cand = cand[np.einsum("ri,ri->r", cand, cand) <= radius2]
        cand, ck = canon(cand)
        _, first = np.unique(ck, axis=0, return_index=True)
        fresh = [k for k in first if tuple(ck[k]) not in seen]
        for k in fresh:
            seen.add(tuple(ck[k]))
        frontier = cand[fresh]
        every.append(frontier)
        if len(seen) > max_rows:
            raise TailTooLarge("double coset enumeration exceeded its row budget")
    allrows = np.concatenate(every)
    cvals = allrows[:, 0]
    identity = bool(np.any(cvals <= 1e-9 * scale))
    sel = (cvals > 1e-9 * scale) & (cvals <= c_max)
    cc, dd = cvals[sel], allrows[sel, 1]
    frac = (dd / cc) % 1.0
    vals = _merge_classes(cc, frac)
    cs = vals[:, 0]
    # fit the quadratic growth of the count on the upper half of the range
    if len(cs) > 8:
        upper = cs[len(cs) // 2:]
        counts = np.arange(len(cs) // 2, len(cs)) + 1
        dens = float(np.sum(counts * upper**2) / np.sum(upper**4))
    else:
        dens = max(float(len(cs)), 1.0) / c_max**2
    return DoubleCosetTable(i, frame, identity, cs, vals[:, 1], c_max, dens)


def _merge_classes(c, frac, tol: float = MERGE_TOL) -> np.ndarray:
    """Distinct (c, d) classes with d = frac * c, merging rounding-level duplicates."""
    if len(c) == 0:
        return np.zeros((0, 2))
    order = np.lexsort((frac, c))
    c, frac = c[order], frac[order]
    breaks = np.nonzero(np.diff(c) > tol * c[1:])[0] + 1
    out = []
    for grp in np.split(np.arange(len(c)), breaks):
        fr = np.sort(frac[grp])
        keep = [fr[0]]
        for f in fr[1:]:
            if f - keep[-1] > tol:
                keep.append(f)
        if len(keep) > 1 and keep[0] + 1 - keep[-1] <= tol:
            keep.pop()
        cc = float(np.mean(c[grp]))
        out += [(cc, f * cc) for f in keep]
    return np.array(out)


@dataclass
class EisensteinEvaluator:
    """E_i(z, 2) on the group frame, choosing per point the highest cusp frame."""

    group: FuchsianGroupRep
    cusp: int
    c_max: float = 40.0
    frames: list = field(default_factory=list)
    tables: list = field(default_factory=list)
    tail_bound: float = TAIL_BOUND

    def __post_init__(self):
        if not self.frames:
            self.frames = list(self.group.sigmas)
        self.tables = [double_cosets(self.group, self.cusp, f, self.c_max) for f in self.frames]
        self._inv = [np.linalg.inv(f) for f in self.frames]

    def heights(self, z) -> np.ndarray:
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        out = []
        for inv in self._inv:
            a, b, c, d = inv.ravel()
            out.append(z.imag / np.abs(c * z + d) ** 2)
        return np.array(out)

    def reduce(self, z, floor: float = 0.3, max_moves: int = 30) -> np.ndarray:
        """Move points by generators until some cusp frame sees them high enough."""
        z = np.atleast_1d(np.asarray(z, dtype=complex)).copy()
        letters = []
        for s in self.group.generators:
            letters += [s, np.linalg.inv(s)]
        gens = letters + [a @ b for a in letters for b in letters
                          if np.max(np.abs(a @ b - np.eye(2))) > 1e-9]
        for _ in range(max_moves):
            h = self.heights(z).max(axis=0)
            low = h < floor
            if not np.any(low):
                break
            zl = z[low]
            best, best_h = zl, h[low]
            for gm in gens:
                a, b, c, d = gm.ravel()
                cand = (a * zl + b) / (c * zl + d)
                hc = self.heights(cand).max(axis=0)
                better = hc > best_h * (1 + 1e-12)
                best = np.where(better, cand, best)
                best_h = np.where(better, hc, best_h)
            if np.all(best == zl):
                break
            z[low] = best
        return z

    def __call__(self, z) -> tuple:
        z = self.reduce(z)
        h = self.heights(z)
        pick = np.argmax(h, axis=0)
        val = np.zeros(z.shape)
        tail = np.zeros(z.shape)
        for j, (tab, inv) in enumerate(zip(self.tables, self._inv)):
            sel = pick == j
            if not np.any(sel):
                continue
            a, b, c, d = inv.ravel()
            zeta = (a * z[sel] + b) / (c * z[sel] + d)
            v, t = tab.evaluate(zeta)
            val[sel] = v
            tail[sel] = t
        return val, tail


def eisenstein(g: FuchsianGroupRep, i: int, z, L: int = 6, method: str = "double-coset",
               bound: float = TAIL_BOUND, evaluator: EisensteinEvaluator | None = None) -> tuple:
    """E_i(z, 2) with a tail estimate; raises TailTooLarge above ``bound``."""
    if L < 6:
        raise ValueError("word-length bound must be at least 6")
    if method == "cosets":
        value, tail = coset_sum(CosetTable.build(g, i, L), z)
    else:
        ev = evaluator or EisensteinEvaluator(g, i)
        value, tail = ev(z)
    rel = np.max(tail / value)
    if not rel <= bound:
        raise TailTooLarge(f"Eisenstein tail {rel:.2e} relative exceeds {bound:.0e}")
    return value, tail
