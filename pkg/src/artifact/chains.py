"""Exact chains in the double complex S_p (x)_{Z Gamma} B_q.

A term  cell (x) h [g_1 | ... | g_q]  carries a basic cell of the
fundamental-domain complex, a group-ring coefficient h and a bar tuple.
Translated cells g(cell) are absorbed into the coefficient through the
right module structure of the chain complex, and the total differential is
d = d' + (-1)^p d''.  Everything is integer arithmetic on words in free
groups (or, for compact surfaces, in the surface group via Dehn's
algorithm), so the identities are checked exactly.  The bar resolution is
the normalized one, in which cells with an identity entry vanish.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

from .errors import ConventionMismatch, UnregisteredCell

Word = tuple  # tuple of (generator name, +1 or -1)


def free_reduce(word) -> Word:
    out = []
    for letter in word:
        if out and out[-1][0] == letter[0] and out[-1][1] == -letter[1]:
            out.pop()
        else:
            out.append(letter)
    return tuple(out)


def inverse(word) -> Word:
    return tuple((g, -e) for g, e in reversed(word))


def gen(name: str, power: int = 1) -> Word:
    letter = (name, 1 if power > 0 else -1)
    return (letter,) * abs(power)


def word_str(word) -> str:
    if not word:
        return "1"
    return "".join(g if e > 0 else g + "^-1" for g, e in word)


class Group:
    """Finitely presented group with an exact equality test.

    ``eliminate`` rewrites one generator eagerly as a word in the others
    (punctured surfaces: a free group); ``relator`` enables Dehn's algorithm
    (compact surfaces of genus >= 2, whose relator is C'(1/6)).
    """

    def __init__(self, generators, eliminate: dict | None = None, relator: Word | None = None):
        self.generators = list(generators)
        self.eliminate = eliminate or {}
        self.relator = relator
        if relator is not None:
            cyc = []
            for r in (relator, inverse(relator)):
                for k in range(len(r)):
                    cyc.append(r[k:] + r[:k])
            self._cyclic = cyc

    def reduce(self, word) -> Word:
        out = []
        for letter in word:
            name, e = letter
            if name in self.eliminate:
                sub = self.eliminate[name]
                out.extend(sub if e > 0 else inverse(sub))
            else:
                out.append(letter)
        w = free_reduce(out)
        if self.relator is not None:
            w = self._dehn(w)
        return w

    def _dehn(self, w: Word) -> Word:
        """Replace any piece longer than half a relator by the shorter complement."""
        n = len(self.relator)
        changed = True
        while changed:
            changed = False
            for r in self._cyclic:
                for size in range(n, n // 2, -1):
                    piece = r[:size]
                    rest = inverse(r[size:])
                    for start in range(0, len(w) - size + 1):
                        if w[start:start + size] == piece:
                            w = free_reduce(w[:start] + rest + w[start + size:])
                            changed = True
                            break
                    if changed:
                        break
                if changed:
                    break
        return w

    def mul(self, *words) -> Word:
        return self.reduce(tuple(itertools.chain.from_iterable(words)))

    def inv(self, word) -> Word:
        return self.reduce(inverse(word))

    def is_identity(self, word) -> bool:
        return len(self.reduce(word)) == 0

    def equal(self, a, b) -> bool:
        return self.is_identity(tuple(a) + inverse(b))


# -- conventions --------------------------------------------------------------


@dataclass(frozen=True)
class Convention:
    """How translated cells enter the tensor product and the sign of the bar differential.

    module "inverse": g(c) (x) x = c (x) g^{-1} x, the right action c.g = g^{-1}(c);
    module "direct":  g(c) (x) x = c (x) g x.
    bar "standard": d''[g1|...|gq] = g1[g2|...] + sum (-1)^i [..|g_i g_{i+1}|..] + (-1)^q [..|g_{q-1}];
    bar "negated":  the negative of that.
    """

    module: str = "inverse"
    bar: str = "standard"

    @property
    def label(self) -> str:
        return f"{self.module}-action/{self.bar}-bar"


CONVENTIONS = tuple(Convention(m, b) for m in ("inverse", "direct") for b in ("standard", "negated"))


# -- chains ---------------------------------------------------------------------


@dataclass(frozen=True)
class Term:
    cell: str
    coeff: Word
    bar: tuple  # tuple of Words


class Chain:
    """Integer combination of terms, merged through the group's equality test."""

    def __init__(self, complex_, terms=None):
        self.cx = complex_
        self.terms: dict = {}
        for t, c in (terms or {}).items():
            self.add(t, c)

    def _canon(self, t: Term) -> Term:
        g = self.cx.group
        coeff = g.reduce(t.coeff)
        stab = self.cx.stabilizers.get(t.cell)
        if stab is not None:
            coeff = self.cx.coset_rep(stab, coeff)
        return Term(t.cell, coeff, tuple(g.reduce(b) for b in t.bar))

    def add(self, term: Term, coef: int = 1) -> "Chain":
        if coef == 0:
            return self
        term = self._canon(term)
        if any(len(b) == 0 for b in term.bar):
            return self  # normalized bar resolution: [..|1|..] = 0
        if self.cx.group.relator is not None:
            for other in self.terms:
                if other.cell == term.cell and len(other.bar) == len(term.bar) and \
                        self.cx.same(other, term):
                    term = other
                    break
        v = self.terms.get(term, 0) + coef
        if v:
            self.terms[term] = v
        else:
            self.terms.pop(term, None)
        return self

    def __add__(self, other: "Chain") -> "Chain":
        out = self.copy()
        for t, c in other.terms.items():
            out.add(t, c)
        return out

    def __neg__(self) -> "Chain":
        return self.scaled(-1)

    def __sub__(self, other: "Chain") -> "Chain":
        return self + (-other)

    def scaled(self, k: int) -> "Chain":
        out = Chain(self.cx)
        for t, c in self.terms.items():
            out.add(t, k * c)
        return out

    def copy(self) -> "Chain":
        out = Chain(self.cx)
        out.terms = dict(self.terms)
        return out

    def is_zero(self) -> bool:
        return not self.terms

    def bidegrees(self) -> set:
        return {(self.cx.dim[t.cell], len(t.bar)) for t in self.terms}

    def part(self, p: int, q: int) -> "Chain":
        out = Chain(self.cx)
        for t, c in self.terms.items():
            if self.cx.dim[t.cell] == p and len(t.bar) == q:
                out.terms[t] = c
        return out

    def describe(self) -> list:
        rows = []
        for t, c in sorted(self.terms.items(), key=lambda kv: (kv[0].cell, str(kv[0].coeff), str(kv[0].bar))):
            bar = "|".join(word_str(b) for b in t.bar)
            rows.append(f"{c:+d} {t.cell} (x) {word_str(t.coeff)}[{bar}]")
        return rows

    def __eq__(self, other) -> bool:
        return (self - other).is_zero()

    def __repr__(self) -> str:
        return " ".join(self.describe()) or "0"


class CellComplex:
    """Registered basic cells with their boundaries and the group acting on them."""

    def __init__(self, group: Group, convention: Convention = Convention()):
        self.group = group
        self.convention = convention
        self.dim: dict = {}
        self.boundary: dict = {}  # cell -> list of (coef, translating word, cell)
        self.aliases: dict = {}  # name -> (translating word, cell)
        self.stabilizers: dict = {}  # cell -> stabilizer generator word

    def register(self, name: str, dim: int, boundary=(), stabilizer: Word | None = None) -> None:
        self.dim[name] = dim
        self.boundary[name] = list(boundary)
        if stabilizer is not None:
            self.stabilizers[name] = self.group.reduce(stabilizer)

    def alias(self, name: str, word: Word, cell: str) -> None:
        self.aliases[name] = (self.group.reduce(word), cell)

    def resolve(self, name: str) -> tuple:
        if name in self.aliases:
            return self.aliases[name]
        if name in self.dim:
            return (), name
        raise UnregisteredCell(name)

    def coset_rep(self, stab: Word, coeff: Word) -> Word:
        """Shortest representative of the class of coeff under the stabilizer."""
        g = self.group
        left = self.convention.module == "inverse"
        best = coeff
        for k in range(-3, 4):
            p = tuple(itertools.chain.from_iterable([stab if k > 0 else inverse(stab)] * abs(k)))
            cand = g.mul(p, coeff) if left else g.mul(coeff, p)
            if (len(cand), str(cand)) < (len(best), str(best)):
                best = cand
        return best

    def same(self, a: Term, b: Term) -> bool:
        g = self.group
        if any(not g.equal(x, y) for x, y in zip(a.bar, b.bar)):
            return False
        stab = self.stabilizers.get(a.cell)
        if stab is None:
            return g.equal(a.coeff, b.coeff)
        for k in range(-3, 4):
            p = tuple(itertools.chain.from_iterable([stab if k > 0 else inverse(stab)] * abs(k)))
            if g.equal(g.mul(p, a.coeff), b.coeff) or g.equal(g.mul(a.coeff, p), b.coeff):
                return True
        return False

    # -- building chains ----------------------------------------------------
    def absorb(self, word: Word) -> Word:
        """The coefficient produced by the translate word(cell) in the tensor product."""
        return self.group.inv(word) if self.convention.module == "inverse" else self.group.reduce(word)

    def elem(self, name: str, bar=(), coeff: Word = (), coef: int = 1, translate: Word = ()) -> Chain:
        """coef * translate(name) (x) coeff[bar]."""
        word, cell = self.resolve(name)
        g = self.group
        h = g.mul(self.absorb(g.mul(translate, word)), coeff)
        return Chain(self, {Term(cell, h, tuple(g.reduce(b) for b in bar)): coef})

    def d_prime(self, ch: Chain) -> Chain:
        out = Chain(self)
        for t, c in ch.terms.items():
            if t.cell not in self.boundary:
                raise UnregisteredCell(t.cell)
            for k, word, sub in self.boundary[t.cell]:
                w2, base = self.resolve(sub)
                h = self.group.mul(self.absorb(self.group.mul(word, w2)), t.coeff)
                out.add(Term(base, h, t.bar), c * k)
        return out

    def d_bar(self, ch: Chain) -> Chain:
        g = self.group
        sign = 1 if self.convention.bar == "standard" else -1
        out = Chain(self)
        for t, c in ch.terms.items():
            bar = t.bar
            q = len(bar)
            if q == 0:
                continue
            out.add(Term(t.cell, g.mul(t.coeff, bar[0]), bar[1:]), sign * c)
            for i in range(1, q):
                merged = bar[:i - 1] + (g.mul(bar[i - 1], bar[i]),) + bar[i + 1:]
                out.add(Term(t.cell, t.coeff, merged), sign * c * (-1) ** i)
            out.add(Term(t.cell, t.coeff, bar[:-1]), sign * c * (-1) ** q)
        return out

    def total_boundary(self, ch: Chain) -> Chain:
        out = self.d_prime(ch)
        for p in {self.dim[t.cell] for t in ch.terms}:
            piece = Chain(self, {t: c for t, c in ch.terms.items() if self.dim[t.cell] == p})
            out = out + self.d_bar(piece).scaled((-1) ** p)
        return out


# -- type (g, n) fundamental domains --------------------------------------------------


def surface_group(g: int, n: int) -> Group:
    gens = [f"a{k}" for k in range(1, g + 1)] + [f"b{k}" for k in range(1, g + 1)] + \
        [f"l{i}" for i in range(1, n + 1)]
    rel = []
    for k in range(1, g + 1):
        rel += [(f"a{k}", 1), (f"b{k}", 1), (f"a{k}", -1), (f"b{k}", -1)]
    rel += [(f"l{i}", 1) for i in range(1, n + 1)]
    rel = tuple(rel)
    if n > 0:
        # gamma_1 ... gamma_g lambda_1 ... lambda_n = 1  =>  lambda_n = (gamma ... lambda_{n-1})^{-1}
        return Group(gens, eliminate={f"l{n}": inverse(rel[:-1])})
    if g < 2:
        raise ValueError("compact surfaces need genus at least 2")
    return Group(gens, relator=rel)


def commutator(k: int) -> Word:
    return gen(f"a{k}") + gen(f"b{k}") + gen(f"a{k}", -1) + gen(f"b{k}", -1)


@dataclass
class SurfaceCells:
    g: int
    n: int
    cx: CellComplex
    vertex_word: dict = field(default_factory=dict)

    def lam(self, i: int) -> Word:
        return self.cx.group.reduce(gen(f"l{i}"))


def surface_cells(g: int, n: int, convention: Convention = Convention()) -> SurfaceCells:
    """Fundamental polygon with edges a_k, a_k', b_k', b_k, c_i, c_i' and its vertices."""
    grp = surface_group(g, n)
    cx = CellComplex(grp, convention)
    mul = grp.mul
    cx.register("v", 0)
    for i in range(1, n + 1):
        cx.register(f"z{i}", 0, stabilizer=gen(f"l{i}"))
    # a_k(0) = (gamma_1 ... gamma_{k-1})^{-1} v, c_i(0) = (gamma_1 ... gamma_g lambda_1 ... lambda_{i-1})^{-1} v
    prefix = ()
    start = {}
    for k in range(1, g + 1):
        start[f"a{k}"] = grp.inv(prefix)
        prefix = mul(prefix, commutator(k))
    for i in range(1, n + 1):
        start[f"c{i}"] = grp.inv(prefix)
        prefix = mul(prefix, gen(f"l{i}"))
    words = {}
    for k in range(1, g + 1):
        a0 = start[f"a{k}"]
        a, b = gen(f"a{k}"), gen(f"b{k}")
        words[f"a{k}(0)"] = a0
        words[f"a{k}(1)"] = mul(a, grp.inv(b), grp.inv(a), a0)
        words[f"b{k}(0)"] = mul(grp.inv(commutator(k)), a0)
        words[f"b{k}(1)"] = mul(grp.inv(a), a0)
    for i in range(1, n + 1):
        words[f"c{i}(0)"] = start[f"c{i}"]
    for name, w in words.items():
        cx.alias(name, w, "v")
    for k in range(1, g + 1):
        cx.register(f"a{k}", 1, [(1, (), f"a{k}(1)"), (-1, (), f"a{k}(0)")])
        cx.register(f"b{k}", 1, [(1, (), f"b{k}(1)"), (-1, (), f"b{k}(0)")])
        cx.alias(f"a{k}'", gen(f"a{k}", -1), f"a{k}")
        cx.alias(f"b{k}'", gen(f"b{k}", -1), f"b{k}")
    for i in range(1, n + 1):
        cx.register(f"c{i}", 1, [(1, (), f"z{i}"), (-1, (), f"c{i}(0)")])
        cx.alias(f"c{i}'", grp.inv(gen(f"l{i}")), f"c{i}")
    edges = []
    for k in range(1, g + 1):
        edges += [(1, (), f"a{k}"), (1, (), f"b{k}'"), (-1, (), f"a{k}'"), (-1, (), f"b{k}")]
    for i in range(1, n + 1):
        edges += [(1, (), f"c{i}"), (-1, (), f"c{i}'")]
    cx.register("F", 2, edges)
    # Gamma-contracting paths, structural only: P_k from the point 0 to b_k(0), P_0 ending at a_1(0)
    if g >= 1:
        cx.register("o", 0, stabilizer=gen("a1"))
        for k in range(0, g + 1):
            end = f"b{k}(0)" if k >= 1 else "a1(0)"
            cx.register(f"P{k}", 1, [(1, (), end), (-1, (), "o")])
    return SurfaceCells(g, n, cx, words)


def sigma_chains(sc: SurfaceCells) -> dict:
    """F, L, V and W of the type (g, n) construction."""
    cx, g, n, grp = sc.cx, sc.g, sc.n, sc.cx.group
    F = cx.elem("F")
    L = Chain(cx)
    for k in range(1, g + 1):
        L = L + cx.elem(f"b{k}", (gen(f"b{k}"),)) - cx.elem(f"a{k}", (gen(f"a{k}"),))
    for i in range(1, n + 1):
        L = L - cx.elem(f"c{i}", (gen(f"l{i}"),))
    V = Chain(cx)
    W = Chain(cx)
    gam_inv = lambda k: grp.inv(commutator(k))  # noqa: E731
    for k in range(1, g + 1):
        a, b = gen(f"a{k}"), gen(f"b{k}")
        V = V + cx.elem(f"a{k}(0)", (a, b)) - cx.elem(f"b{k}(0)", (b, a)) + \
            cx.elem(f"b{k}(0)", (gam_inv(k), grp.mul(a, b)))
        W = W + cx.elem(f"P{k - 1}", (a, b)) - cx.elem(f"P{k}", (b, a)) + \
            cx.elem(f"P{k}", (gam_inv(k), grp.mul(a, b)))
    for k in range(1, g):
        head = grp.mul(*[gam_inv(j) for j in range(g, k, -1)])
        V = V - cx.elem(f"b{g}(0)", (head, gam_inv(k)))
        W = W - cx.elem(f"P{g}", (head, gam_inv(k)))
    for i in range(1, n):
        head = grp.mul(*[gen(f"l{j}") for j in range(1, i + 1)])
        base = f"b{g}(0)" if g >= 1 else "c1(0)"
        V = V + cx.elem("c1(0)" if n else base, (head, gen(f"l{i + 1}")))
        if g >= 1:
            W = W + cx.elem(f"P{g}", (head, gen(f"l{i + 1}")))
    return {"F": F, "L": L, "V": V, "W": W}


@dataclass
class ChainCheck:
    identity: str
    g: int
    n: int
    passed: bool
    convention: str
    defect: list
    details: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps({"identity": self.identity, "g": self.g, "n": self.n, "pass": self.passed,
                           "convention": self.convention, "defect": self.defect,
                           "details": self.details}, indent=2)


def _cycle_defect(g: int, n: int, convention: Convention) -> tuple:
    sc = surface_cells(g, n, convention)
    cx = sc.cx
    parts = sigma_chains(sc)
    sigma = parts["F"] + parts["L"] - parts["V"]
    boundary = cx.total_boundary(sigma)
    target = Chain(cx)
    for i in range(1, n + 1):
        target = target - cx.elem(f"z{i}", (gen(f"l{i}"),))
    defect = boundary - target
    sanity = {
        "dd_sigma_zero": cx.total_boundary(boundary).is_zero(),
        "dprime_dprime_F_zero": cx.d_prime(cx.d_prime(parts["F"])).is_zero(),
        "dd_W_zero": cx.total_boundary(cx.total_boundary(parts["W"])).is_zero() if g >= 1 else True,
        "W_bidegree": sorted(parts["W"].bidegrees()),
    }
    return defect, sanity


def find_convention(g: int = 1, n: int = 1) -> Convention:
    """The unique registered convention under which the cycle identity holds at (g, n)."""
    good = [c for c in CONVENTIONS if _cycle_defect(g, n, c)[0].is_zero()]
    if len(good) != 1:
        raise ConventionMismatch(f"{len(good)} conventions verify the cycle identity at ({g}, {n})",
                                 defect=[c.label for c in good])
    return good[0]


def check_cycle(g: int, n: int, convention: Convention | None = None) -> ChainCheck:
    """d Sigma = - sum z_i (x) [lambda_i] for Sigma = F + L - V of type (g, n)."""
    if 3 * g - 3 + n <= 0:
        raise ValueError("type (g, n) needs 3g - 3 + n > 0")
    conventions = [convention] if convention else list(CONVENTIONS)
    last = None
    for conv in conventions:
        defect, sanity = _cycle_defect(g, n, conv)
        if defect.is_zero():
            return ChainCheck("cycle", g, n, True, conv.label, [], sanity)
        last = (conv, defect, sanity)
    conv, defect, sanity = last
    raise ConventionMismatch(f"cycle identity fails at ({g}, {n}) for every registered convention",
                             defect=defect.describe())


def schottky_cells(g: int, convention: Convention = Convention()) -> CellComplex:
    """Fundamental region R in hyperbolic 3-space with D, hemispheres H_i and circles C_i."""
    grp = Group([f"L{i}" for i in range(1, g + 1)])
    cx = CellComplex(grp, convention)
    for i in range(1, g + 1):
        cx.register(f"C{i}", 1)
        cx.register(f"H{i}", 2, [(1, (), f"C{i}")])
    cx.register("D", 2, [(1, (), f"C{i}") for i in range(1, g + 1)] +
                [(-1, gen(f"L{i}"), f"C{i}") for i in range(1, g + 1)])
    cx.register("R", 3, [(-1, (), "D")] + [(1, (), f"H{i}") for i in range(1, g + 1)] +
                [(-1, gen(f"L{i}"), f"H{i}") for i in range(1, g + 1)])
    return cx


def check_schottky(g: int, convention: Convention | None = None) -> ChainCheck:
    """d(R - S) = -D + L with S = -sum H_i (x) [L_i^{-1}] and L = sum C_i (x) [L_i^{-1}]."""
    if g < 2:
        raise ValueError("Schottky rank must be at least 2")
    conv = convention or find_convention()
    cx = schottky_cells(g, conv)
    R = cx.elem("R")
    S = Chain(cx)
    L = Chain(cx)
    for i in range(1, g + 1):
        S = S - cx.elem(f"H{i}", (gen(f"L{i}", -1),))
        L = L + cx.elem(f"C{i}", (gen(f"L{i}", -1),))
    d_r = cx.d_prime(R)
    lhs = cx.total_boundary(R - S)
    defect = lhs - (L - cx.elem("D"))
    details = {
        "dprime_S_is_minus_L": (cx.d_prime(S) + L).is_zero(),
        "dprime_R_is_minus_D_plus_dbar_S": (d_r - (cx.d_bar(S) - cx.elem("D"))).is_zero(),
        "dbar_R_zero": cx.d_bar(R).is_zero(),
        "dprime_dprime_R_zero": cx.d_prime(d_r).is_zero(),
    }
    if not defect.is_zero() or not all(details.values()):
        raise ConventionMismatch(f"Schottky identity fails at rank {g} under {conv.label}",
                                 defect=defect.describe())
    return ChainCheck("schottky", g, 0, True, conv.label, [], details)


def admissible_types(max_genus: int = 3, max_punctures: int = 5) -> list:
    return [(g, n) for g in range(max_genus + 1) for n in range(max_punctures + 1)
            if 3 * g - 3 + n > 0 and not (n == 0 and g < 2)]
