"""Petersson, Weil-Petersson and Takhtajan-Zograf Gram matrices in the w-plane.

Everything is a weighted sum over one PlaneRule: the hyperbolic density and
the developing map are evaluated once at all nodes and reused for every
integrand.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import IllConditioned
from .fuchsian_ode import cusp_form_basis, eisenstein_term
from .groupsum import EisensteinEvaluator, FuchsianGroupRep, realize_fuchsian
from .quadrature import QuadControl, build_plane_rule

COND_LIMIT = 1e8
TZ_CONTROL = QuadControl(n_radial=32, n_theta=48, cell_order=8, depth=14.0)


@dataclass
class NodeData:
    """Rule nodes with the density and tau evaluated on them."""

    rule: object
    density: np.ndarray
    tau: np.ndarray
    basis: np.ndarray  # R_l at the nodes, shape (n-3, nodes)

    @property
    def weights(self):
        return self.rule.weights

    @property
    def nodes(self):
        return self.rule.nodes


def node_data(s, control: QuadControl = QuadControl()) -> NodeData:
    rule = build_plane_rule(s.config, control)
    ev = s.atlas.evaluate(rule.nodes)
    basis = np.array([cusp_form_basis(s.config, l, rule.nodes) for l in range(s.n - 3)])
    return NodeData(rule, ev["density"], ev["tau"], basis)


@dataclass
class DualBasis:
    """P and the coefficients A with Q_i = sum_k A_ik R_k, biorthogonal to R."""

    P: np.ndarray
    A: np.ndarray
    condition: float
    error: float
    data: NodeData

    def q_values(self) -> np.ndarray:
        return self.A @ self.data.basis

    def m_values(self) -> np.ndarray:
        """M_i = e^{-phi} conj(Q_i) at the nodes."""
        return np.conj(self.q_values()) / self.data.density

    def biorthogonality(self, other: "NodeData | None" = None) -> np.ndarray:
        """(R_j, M_i) recomputed on ``other`` (a different rule) when given."""
        d = other or self.data
        q = self.A @ d.basis
        m = np.conj(q) / d.density
        return np.einsum("jn,in,n->ji", d.basis, m, d.rule.weights)


def petersson_matrix(data: NodeData) -> np.ndarray:
    w = data.weights / data.density
    return np.einsum("jn,kn,n->jk", data.basis, np.conj(data.basis), w)


def petersson_dual(s, g: FuchsianGroupRep | None = None, control: QuadControl = QuadControl(),
                   data: NodeData | None = None) -> DualBasis:
    data = data or node_data(s, control)
    p = petersson_matrix(data)
    refined = node_data(s, control.refined())
    err = float(np.max(np.abs(petersson_matrix(refined) - p)))
    cond = float(np.linalg.cond(p))
    if cond > COND_LIMIT:
        raise IllConditioned(f"Petersson matrix condition number {cond:.2e}")
    a = np.conj(np.linalg.inv(p)).T
    return DualBasis(p, a, cond, err, data)


def wp_gram(dual: DualBasis) -> np.ndarray:
    """<d/dw_j, d/dw_k>_WP = integral of conj(Q_j) Q_k e^{-phi}."""
    q = dual.q_values()
    w = dual.data.weights / dual.data.density
    return np.einsum("jn,kn,n->jk", np.conj(q), q, w)


def wp_from_petersson(dual: DualBasis) -> np.ndarray:
    return np.conj(np.linalg.inv(dual.P))


def chart_frames(s, g: FuchsianGroupRep) -> list:
    """Cusp maps of the atlas charts, in the group frame."""
    d = np.diag([math.sqrt(g.scale), 1 / math.sqrt(g.scale)])
    out = []
    for i in range(s.n):
        m = d @ s.cusp_normalizer(i).matrix.real
        out.append(m / math.sqrt(np.linalg.det(m)))
    return out


@dataclass
class TZResult:
    gram: np.ndarray
    tail: float
    quad_error: float


def tz_gram(s, g: FuchsianGroupRep, dual: DualBasis, i: int, data: NodeData | None = None,
            c_max: float = 60.0, evaluator: EisensteinEvaluator | None = None) -> TZResult:
    """<d/dw_j, d/dw_k>_{TZ,i} = integral of conj(Q_j) Q_k e^{-phi} E_i(tau(w), 2)."""
    data = data or node_data(s, TZ_CONTROL)
    ev = evaluator or EisensteinEvaluator(g, i, c_max=c_max,
                                          frames=list(g.sigmas) + chart_frames(s, g))
    z = g.to_group_frame(data.tau)
    e_val, e_tail = ev(z)
    q = dual.A @ data.basis
    w = data.weights / data.density
    gram = np.einsum("jn,kn,n->jk", np.conj(q), q, w * e_val)
    tail = float(np.max(np.abs(np.einsum("jn,n->j", np.abs(q) ** 2, np.abs(w) * e_tail))))
    return TZResult(gram, tail, float("nan"))


def epair(s, dual: DualBasis, j: int, i: int, data: NodeData | None = None) -> complex:
    """(E_j, M_i): the weight-four piece of cusp j against the dual Beltrami differential."""
    d = data or dual.data
    e = eisenstein_term(s.config, j, d.nodes)
    q = (dual.A @ d.basis)[i]
    return complex(np.sum(d.weights * e * np.conj(q) / d.density))


def epair_matrix(s, dual: DualBasis) -> np.ndarray:
    return np.array([[epair(s, dual, j, i) for i in range(s.n - 3)] for j in range(s.n)])


def project_schwarzian(s, dual: DualBasis) -> np.ndarray:
    """alpha_i = (S(J^{-1}), M_i) with S(J^{-1}) = Q."""
    d = dual.data
    qv = s.q(d.nodes)
    m = dual.m_values()
    return np.einsum("n,in,n->i", qv, m, d.weights)


def projection_from_parts(s, dual: DualBasis) -> np.ndarray:
    """alpha from the decomposition of Q into weight-four pieces and cusp forms."""
    pairs = epair_matrix(s, dual)
    return pairs.sum(axis=0) - np.pi * np.asarray(s.acc.c)


@dataclass
class GramReport:
    point: list
    P: np.ndarray
    wp: np.ndarray
    tz: dict
    errors: dict = field(default_factory=dict)

    def to_json(self) -> str:
        def mat(m):
            return [[[float(x.real), float(x.imag)] for x in row] for row in np.atleast_2d(m)]

        return json.dumps({
            "point": self.point,
            "wp": mat(self.wp),
            "tz": {str(i): mat(m) for i, m in self.tz.items()},
            "errors": {k: float(v) for k, v in self.errors.items()},
        }, indent=2)

    def hermitian_defect(self) -> float:
        mats = [self.P, self.wp] + list(self.tz.values())
        return max(float(np.max(np.abs(m - m.conj().T))) for m in mats)

    def positive_definite(self) -> bool:
        for m in [self.wp] + list(self.tz.values()):
            try:
                np.linalg.cholesky(0.5 * (m + m.conj().T))
            except np.linalg.LinAlgError:
                return False
        return True


def gram_report(s, control: QuadControl = QuadControl(), tz: bool = True, dump_nodes=None) -> GramReport:
    g = realize_fuchsian(s)
    dual = petersson_dual(s, g, control)
    wp = wp_gram(dual)
    errors = {"petersson": dual.error, "wp_vs_inverse": float(np.max(np.abs(wp - wp_from_petersson(dual))))}
    tzs = {}
    if tz:
        data = node_data(s, TZ_CONTROL)
        for i in range(s.n):
            res = tz_gram(s, g, dual, i, data)
            tzs[i] = res.gram
            errors[f"tz{i}_tail"] = res.tail
    if dump_nodes is not None:
        dual.data.rule.dump(dump_nodes)
    point = [[float(w.real), float(w.imag)] for w in s.config.finite_punctures]
    return GramReport(point, dual.P, wp, tzs, errors)
