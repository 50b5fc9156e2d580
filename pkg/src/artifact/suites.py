"""Named verification suites binding the moduli-space identities to computed values.

Each suite produces a CheckReport of rows (identity, anchor, left, right,
relative deviation, tolerance, pass).  A failing or crashing check becomes a
failed row; the suite always runs to the end.

Kaehler forms are written in two normalizations, omega = i sum g dw ^ dconj(w)
and omega = (i/2) sum g dw ^ dconj(w).  The potential identities are reported
under both: rows tagged "literal" use the first, untagged rows the second,
which is the one the numerics confirm.  The log-derivative of h at infinity is
likewise reported with and without the sign flip.
"""

from __future__ import annotations

import csv
import itertools
import json
import math
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import chains
from .finite_diff import Memo, mixed_hessian, wirtinger
from .fuchsian_ode import PunctureConfig
from .grams import (TZ_CONTROL, epair_matrix, node_data, petersson_dual, project_schwarzian,
                    projection_from_parts, tz_gram, wp_gram)
from .groupsum import realize_fuchsian
from .lambda_oracle import level2_h_values
from .liouville import (EMPTY_PRODUCT_CONVENTIONS, action, all_permutations, compose, hermitian_h,
                        log_h_values, symm_cocycle)
from .quadrature import QuadControl
from .uniformizer import SolvedUniformization, probe_set

ACCEPTANCE_POINTS = ((0.3,), (0.5,), (0.7,), (0.5 + 0.3j,), (-0.4,))
SUPPORTED_PRECISION = 53

# descriptive anchors, one per identity family
ANCHORS = {
    "gamma2": "level-two baseline: real monodromy and lambda-function cusp coefficients",
    "generating-function": "action as generating function of the accessory parameters",
    "tz-del": "log-derivative of h_j as pairing of weight-four pieces with Beltrami differentials",
    "tz-potential": "-log h_i as Kaehler potential of the cusp-i Takhtajan-Zograf metric",
    "hermite-potential": "-log H as Kaehler potential of the total Takhtajan-Zograf metric",
    "wp-potential": "-S as Kaehler potential of the Weil-Petersson metric",
    "curly-s": "S - pi log H: Hessian and first derivative",
    "cocycle": "Symm(n) cocycle law and metric transformation rules",
    "liouville": "hyperbolic density solves the Liouville equation",
    "fourier": "cusp Fourier coefficients versus Frobenius data and accessory parameters",
    "cycle": "total boundary of the fundamental-domain 2-chain",
    "schottky": "boundary of the handlebody 3-chain",
}


class ManifestError(ValueError):
    pass


@dataclass
class ExperimentManifest:
    """Everything that determines a run."""

    name: str = "default"
    points: list = field(default_factory=lambda: [list(p) for p in ACCEPTANCE_POINTS])
    fd_step: float = 1e-4
    fd_points: int = 4
    hessian_step: float = 0.02
    quad: dict = field(default_factory=dict)
    c_max: float = 60.0
    precision: int = SUPPORTED_PRECISION
    threads: int = 1
    out: str = "out"
    max_genus: int = 3
    max_punctures: int = 5
    schottky_ranks: list = field(default_factory=lambda: [2, 3])
    cocycle_pairs: int = 20
    seed: int = 0
    liouville_probes: int = 200
    liouville_clearance: float = 0.01

    def __post_init__(self):
        pts = []
        for p in self.points:
            p = p if isinstance(p, (list, tuple)) else [p]
            pts.append([_as_complex(z) for z in p])
        self.points = pts
        for p in self.points:
            try:
                PunctureConfig(tuple(p))
            except Exception as exc:  # noqa: BLE001
                raise ManifestError(f"invalid moduli point {p}: {exc}") from exc
        if self.precision != SUPPORTED_PRECISION:
            raise ManifestError(f"only {SUPPORTED_PRECISION}-bit floating point is implemented")

    @property
    def configs(self) -> list:
        return [PunctureConfig(tuple(p)) for p in self.points]

    @property
    def quad_control(self) -> QuadControl:
        return QuadControl(**self.quad)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentManifest":
        known = {f for f in cls.__dataclass_fields__}
        extra = set(d) - known
        if extra:
            raise ManifestError(f"unknown manifest keys {sorted(extra)}")
        return cls(**d)

    @classmethod
    def load(cls, path) -> "ExperimentManifest":
        path = Path(path)
        text = path.read_text()
        if path.suffix == ".toml":
            return cls.from_dict(tomllib.loads(text))
        return cls.from_dict(json.loads(text))

    def to_json(self) -> dict:
        d = asdict(self)
        d["points"] = [[[z.real, z.imag] for z in p] for p in self.points]
        return d


def _as_complex(z) -> complex:
    if isinstance(z, (list, tuple)):
        return complex(z[0], z[1])
    if isinstance(z, str):
        return complex(z.replace(" ", ""))
    return complex(z)


# -- reports ----------------------------------------------------------------


def _num(x):
    if x is None:
        return None
    x = complex(x)
    if abs(x.imag) <= 1e-14 * max(1.0, abs(x.real)):
        return float(f"{x.real:.12g}")
    return [float(f"{x.real:.12g}"), float(f"{x.imag:.12g}")]


@dataclass
class CheckRow:
    identity: str
    anchor: str
    left: object
    right: object
    deviation: float
    tol: float
    passed: bool
    point: list | None = None
    note: str = ""

    def to_json(self) -> dict:
        return {"identity": self.identity, "anchor": self.anchor, "point": self.point,
                "left": _num(self.left), "right": _num(self.right),
                "deviation": float(f"{self.deviation:.6g}") if math.isfinite(self.deviation) else None,
                "tol": self.tol, "pass": self.passed, "note": self.note}


@dataclass
class CheckReport:
    suite: str
    rows: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    def add(self, identity: str, anchor: str, left, right, tol: float, point=None, floor: float = 0.0,
            note: str = "", absolute: bool = False) -> CheckRow:
        left_c, right_c = complex(left), complex(right)
        scale = 1.0 if absolute else max(abs(right_c), floor)
        dev = abs(left_c - right_c) / scale if scale > 0 else math.inf
        row = CheckRow(identity, anchor, left_c, right_c, dev, tol, bool(dev <= tol),
                       _point(point), note)
        self.rows.append(row)
        return row

    def add_bool(self, identity: str, anchor: str, ok: bool, point=None, note: str = "") -> CheckRow:
        row = CheckRow(identity, anchor, int(ok), 1, 0.0 if ok else 1.0, 0.0, bool(ok), _point(point), note)
        self.rows.append(row)
        return row

    def fail(self, identity: str, anchor: str, exc: BaseException, point=None) -> CheckRow:
        row = CheckRow(identity, anchor, None, None, math.inf, 0.0, False, _point(point),
                       f"{type(exc).__name__}: {exc}")
        self.rows.append(row)
        return row

    def to_json(self) -> dict:
        return {"suite": self.suite, "pass": self.passed, "meta": self.meta,
                "checks": [r.to_json() for r in self.rows]}

    def write(self, out_dir) -> Path:
        out = Path(out_dir)
        (out / "tables").mkdir(parents=True, exist_ok=True)
        path = out / "report.json"
        path.write_text(json.dumps(self.to_json(), indent=2))
        write_table(out / "tables" / f"{self.suite}.csv", self.rows)
        return path


def write_table(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["identity", "point", "left", "right", "deviation", "tol", "pass", "anchor", "note"])
        for r in rows:
            j = r.to_json()
            w.writerow([j["identity"], json.dumps(j["point"]), json.dumps(j["left"]), json.dumps(j["right"]),
                        j["deviation"], j["tol"], j["pass"], j["anchor"], j["note"]])


def _point(p):
    if p is None:
        return None
    if isinstance(p, PunctureConfig):
        p = p.finite_punctures
    return [[float(complex(z).real), float(complex(z).imag)] for z in p]


# -- per-point study ------------------------------------------------------------


class PointStudy:
    """Solved configuration with memoized field values, derivatives and Gram matrices."""

    def __init__(self, config: PunctureConfig, manifest: ExperimentManifest):
        self.config = config
        self.manifest = manifest
        self.center = SolvedUniformization.solve(config)
        self.n = config.n
        self.field = Memo(self._field)
        self._cache = {}

    def _field(self, w) -> np.ndarray:
        """[S, log h_1 .. log h_n, S - pi log H] at the configuration w."""
        cfg = PunctureConfig(tuple(w))
        if cfg == self.config:
            s = self.center
        else:
            s = SolvedUniformization.solve_near(cfg, self.center)
        res = action(s, self.manifest.quad_control, with_deltas=False)
        lh = log_h_values(s)
        log_big_h = float(np.sum(lh[:-1]) - lh[-1])
        return np.concatenate([[res.S], lh, [res.S - math.pi * log_big_h]])

    def _memo(self, key, fn):
        if key not in self._cache:
            self._cache[key] = fn()
        return self._cache[key]

    @property
    def w(self) -> tuple:
        return tuple(self.config.finite_punctures)

    def gradient(self) -> np.ndarray:
        """d/dw_i of the field, shape (n-3, n+2)."""
        m = self.manifest
        return self._memo("grad", lambda: wirtinger(self.field, self.w, m.fd_step, m.fd_points))

    def hessian(self) -> np.ndarray:
        """d^2/dw_j dconj(w_k) of the field, shape (n-3, n-3, n+2)."""
        return self._memo("hess", lambda: mixed_hessian(self.field, self.w, self.manifest.hessian_step))

    def action(self):
        return self._memo("action", lambda: action(self.center, self.manifest.quad_control))

    def dual(self):
        return self._memo("dual", lambda: petersson_dual(self.center, control=self.manifest.quad_control))

    def group(self):
        return self._memo("group", lambda: realize_fuchsian(self.center))

    def wp(self) -> np.ndarray:
        return self._memo("wp", lambda: wp_gram(self.dual()))

    def tz(self) -> list:
        def build():
            data = node_data(self.center, TZ_CONTROL)
            return [tz_gram(self.center, self.group(), self.dual(), i, data, c_max=self.manifest.c_max).gram
                    for i in range(self.n)]
        return self._memo("tz", build)

    def epairs(self) -> np.ndarray:
        return self._memo("epairs", lambda: epair_matrix(self.center, self.dual()))

    def alpha(self) -> np.ndarray:
        return self._memo("alpha", lambda: project_schwarzian(self.center, self.dual()))


class Workspace:
    """Caches PointStudy objects across suites run with the same manifest."""

    def __init__(self, manifest: ExperimentManifest):
        self.manifest = manifest
        self.studies = {}

    def study(self, config: PunctureConfig) -> PointStudy:
        key = tuple(config.finite_punctures)
        if key not in self.studies:
            self.studies[key] = PointStudy(config, self.manifest)
        return self.studies[key]


def _each_point(report: CheckReport, ws: Workspace, fn, family: str) -> None:
    """Run fn(report, study) for each manifest point; a crash becomes a failed row."""
    def run(cfg):
        local = CheckReport(report.suite)
        try:
            fn(local, ws.study(cfg))
        except Exception as exc:  # noqa: BLE001
            local.fail(family, ANCHORS[family], exc, cfg)
        return local.rows

    configs = ws.manifest.configs
    if ws.manifest.threads > 1:
        with ThreadPoolExecutor(ws.manifest.threads) as pool:
            results = list(pool.map(run, configs))
    else:
        results = [run(c) for c in configs]
    for rows in results:
        report.rows.extend(rows)


# -- suites ---------------------------------------------------------------------


def suite_gamma2(report: CheckReport, ws: Workspace) -> None:
    a = ANCHORS["gamma2"]
    try:
        s = SolvedUniformization.solve(PunctureConfig(()))
    except Exception as exc:  # noqa: BLE001
        report.fail("gamma2.solve", a, exc)
        return
    im_tr = max(abs(np.trace(m).imag) for m in s.monodromy.matrices)
    report.add("gamma2.monodromy-real-trace", a, im_tr, 0.0, 1e-8, absolute=True)
    report.add("gamma2.real-conjugation-residual", a, s.realization_residual, 0.0, 1e-9, absolute=True)
    oracle = level2_h_values()
    for i, key in enumerate(("0", "1")):
        report.add(f"gamma2.h[{key}]-frobenius", a, s.exact_h(i).h, oracle[key], 1e-6)
        report.add(f"gamma2.h[{key}]-fourier", a, s.local_fourier(i).h, oracle[key], 1e-6)
    inf = s.local_fourier(2)
    report.add("gamma2.|a_inf(-1)|", a, abs(inf.fourier[-1]), math.sqrt(oracle["inf"]), 1e-6)
    report.add("gamma2.h[inf]-frobenius", a, s.exact_h(2).h, oracle["inf"], 1e-6)


def suite_generating_function(report: CheckReport, ws: Workspace) -> None:
    a = ANCHORS["generating-function"]

    def one(rep, st):
        g = st.gradient()
        for i in range(st.n - 3):
            rep.add(f"dS/dw[{i}] = -2 pi c[{i}]", a, g[i, 0], -2 * math.pi * st.center.acc.c[i], 1e-3,
                    st.config, floor=1.0, note="relative to max(|right|, 1)")
    _each_point(report, ws, one, "generating-function")


def suite_tz_del(report: CheckReport, ws: Workspace) -> None:
    a = ANCHORS["tz-del"]

    def one(rep, st):
        g = st.gradient()
        e = st.epairs()
        for i in range(st.n - 3):
            for j in range(st.n):
                left = g[i, 1 + j]
                lit = -(2 / math.pi) * e[j, i]
                # both sides vanish at symmetric points, so the scale is floored
                # at a fraction of the size of the pairings themselves
                floor = 1e-2 * (2 / math.pi) * float(np.max(np.abs(e)))
                rep.add(f"dlog h[{j}]/dw[{i}] literal", a, left, lit, 1e-2, st.config, floor=floor)
                if j == st.n - 1:
                    rep.add(f"dlog h[{j}]/dw[{i}] sign-flipped at infinity", a, left, -lit, 1e-2,
                            st.config, floor=floor)
    _each_point(report, ws, one, "tz-del")


def _matrix_rows(rep, name, anchor, left, right, tol, cfg, note=""):
    left = np.atleast_2d(left)
    right = np.atleast_2d(right)
    floor = 1e-3 * float(np.max(np.abs(right)))
    for j, k in itertools.product(range(left.shape[0]), repeat=2):
        rep.add(f"{name}[{j},{k}]", anchor, left[j, k], right[j, k], tol, cfg, floor=floor, note=note)


def suite_tz_potential(report: CheckReport, ws: Workspace) -> None:
    a, ah = ANCHORS["tz-potential"], ANCHORS["hermite-potential"]

    def one(rep, st):
        hess = st.hessian()
        tz = st.tz()
        for i in range(st.n):
            sign = -1 if i == st.n - 1 else 1
            left = -hess[:, :, 1 + i]
            _matrix_rows(rep, f"Hess(-log h[{i}]) = {'-' if sign < 0 else ''}(8pi/3) TZ[{i}] literal", a,
                         left, sign * (8 * math.pi / 3) * tz[i], 0.05, st.config)
            _matrix_rows(rep, f"Hess(-log h[{i}]) = {'-' if sign < 0 else ''}(4pi/3) TZ[{i}]", a,
                         left, sign * (4 * math.pi / 3) * tz[i], 0.05, st.config)
        log_big_h = hess[:, :, 1:st.n].sum(axis=2) - hess[:, :, st.n]
        _matrix_rows(rep, "Hess(-log H) = (4pi/3) sum TZ", ah, -log_big_h,
                     (4 * math.pi / 3) * sum(tz), 0.05, st.config)
    _each_point(report, ws, one, "tz-potential")


def suite_wp_potential(report: CheckReport, ws: Workspace) -> None:
    a = ANCHORS["wp-potential"]

    def one(rep, st):
        hess = st.hessian()
        wp = st.wp()
        _matrix_rows(rep, "Hess(-S)/2 = WP literal", a, -hess[:, :, 0] / 2, wp, 0.05, st.config)
        _matrix_rows(rep, "Hess(-S) = WP", a, -hess[:, :, 0], wp, 0.05, st.config)
    _each_point(report, ws, one, "wp-potential")


def suite_curly_s(report: CheckReport, ws: Workspace) -> None:
    a = ANCHORS["curly-s"]

    def one(rep, st):
        hess = st.hessian()
        wp = st.wp()
        tz = sum(st.tz())
        target = -wp + (4 * math.pi**2 / 3) * tz
        _matrix_rows(rep, "Hess(S - pi log H) = 2(-WP + (4pi^2/3) TZ) literal", a,
                     hess[:, :, -1], 2 * target, 0.05, st.config)
        _matrix_rows(rep, "Hess(S - pi log H) = -WP + (4pi^2/3) TZ", a, hess[:, :, -1], target, 0.05, st.config)
        g = st.gradient()
        alpha = st.alpha()
        alt = projection_from_parts(st.center, st.dual())
        # alpha is a difference of O(1) terms that cancel at symmetric points;
        # floor the scale at a fraction of the largest term
        term_floor = 1e-2 * max(float(np.max(np.abs(g[:, 0]))), math.pi * float(np.max(np.abs(g[:, 1:-1]))))
        pair_floor = 1e-2 * float(np.max(np.abs(st.epairs())))
        for i in range(st.n - 3):
            rep.add(f"d(S - pi log H)/dw[{i}] = 2 alpha[{i}]", a, g[i, -1], 2 * alpha[i], 1e-2, st.config,
                    floor=term_floor)
            rep.add(f"alpha[{i}] cusp-form projection = decomposition", a, alpha[i], alt[i], 1e-6, st.config,
                    floor=pair_floor)
    _each_point(report, ws, one, "curly-s")


def select_empty_product_convention(config: PunctureConfig, values, tol: float = 1e-4) -> tuple:
    """First convention in the registered order under which H(sigma.w)|f|^2 = H(w) holds.

    ``values(config)`` returns the pair (H, S) at a configuration.
    Returns (convention, worst deviation per convention).
    """
    h0, _ = values(config)
    worst = {}
    for conv in EMPTY_PRODUCT_CONVENTIONS_ORDER:
        dev = 0.0
        for perm in all_permutations(config.n):
            cv = symm_cocycle(perm, config, conv)
            h1, _ = values(cv.acted)
            dev = max(dev, abs(h1 * abs(cv.value) ** 2 / h0 - 1))
        worst[conv] = dev
        if dev <= tol:
            return conv, worst
    return None, worst


# tried in order: the customary default first, then the alternative
EMPTY_PRODUCT_CONVENTIONS_ORDER = ("denominator-survives", "empty-is-one")
assert set(EMPTY_PRODUCT_CONVENTIONS_ORDER) == set(EMPTY_PRODUCT_CONVENTIONS)


def suite_cocycle(report: CheckReport, ws: Workspace) -> None:
    a = ANCHORS["cocycle"]
    rng = random.Random(ws.manifest.seed)
    for cfg in ws.manifest.configs:
        n = cfg.n
        perms = list(all_permutations(n))
        law = {}
        try:
            pairs = [(rng.choice(perms), rng.choice(perms)) for _ in range(ws.manifest.cocycle_pairs)]
            for conv in EMPTY_PRODUCT_CONVENTIONS:
                worst = 0.0
                for p1, p2 in pairs:
                    left = symm_cocycle(compose(p1, p2), cfg, conv).value
                    inner = symm_cocycle(p2, cfg, conv)
                    right = symm_cocycle(p1, inner.acted, conv).value * inner.value
                    worst = max(worst, abs(left - right) / abs(right))
                law[conv] = worst
        except Exception as exc:  # noqa: BLE001
            report.fail("f cocycle law", a, exc, cfg)

        cache = {}

        def values(c):
            key = tuple(complex(round(z.real, 10), round(z.imag, 10)) for z in c.finite_punctures)
            if key not in cache:
                s = SolvedUniformization.solve(c)
                cache[key] = (hermitian_h(s), action(s, ws.manifest.quad_control, with_deltas=False).S)
            return cache[key]

        try:
            conv, worst_by = select_empty_product_convention(cfg, values)
            report.meta.setdefault("empty_product_convention", {})[str(_point(cfg))] = {
                "selected": conv, "worst_H_deviation": worst_by}
            for c, dev in law.items():
                report.add(f"f cocycle law [{c}]", a, dev, 0.0, 1e-12, cfg, absolute=True,
                           note="selected" if c == conv else "rejected")
            for c, dev in worst_by.items():
                report.add(f"H(sigma.w)|f|^2 = H(w) [{c}]", a, dev, 0.0, 1e-4, cfg, absolute=True,
                           note="selected" if c == conv else "rejected")
            conv = conv or EMPTY_PRODUCT_CONVENTIONS[0]
            h0, s0 = values(cfg)
            dev_s, dev_cs = 0.0, 0.0
            for perm in perms:
                cv = symm_cocycle(perm, cfg, conv)
                h1, s1 = values(cv.acted)
                f2 = abs(cv.value) ** 2
                dev_s = max(dev_s, abs(s1 + math.pi * math.log(f2) - s0))
                dev_cs = max(dev_cs, abs((s1 - math.pi * math.log(h1)) - (s0 - math.pi * math.log(h0))))
            report.add(f"S(sigma.w) + pi log|f|^2 = S(w) [{conv}]", a, dev_s, 0.0, 1e-3, cfg, absolute=True)
            report.add("S - pi log H invariant", a, dev_cs, 0.0, 1e-3, cfg, absolute=True)
        except Exception as exc:  # noqa: BLE001
            report.fail("metric cocycle laws", a, exc, cfg)


def suite_liouville(report: CheckReport, ws: Workspace) -> None:
    a = ANCHORS["liouville"]
    m = ws.manifest

    def one(rep, st):
        pts = probe_set(st.config, m.liouville_probes, m.liouville_clearance)
        samples = st.center.metric_samples(pts)
        worst = max(smp.residual / smp.density for smp in samples)
        rep.add("max |phi_wwbar - e^phi/2| / e^phi", a, worst, 0.0, 1e-6, st.config, absolute=True,
                note=f"{len(samples)} probes, clearance {m.liouville_clearance}")
    _each_point(report, ws, one, "liouville")


def suite_fourier(report: CheckReport, ws: Workspace) -> None:
    a = ANCHORS["fourier"]

    def one(rep, st):
        s = st.center
        residues = s.q.residue_array
        for i in range(st.n):
            f = s.local_fourier(i)
            e = s.extract_h(i)
            comb = (f.error + e.error) / e.h
            rep.add(f"|a[{i}](+-1)|^2 = extract_h[{i}]", a, f.h, e.h, max(comb, 1e-12), st.config,
                    note="tolerance is the combined error estimate")
            if i < st.n - 1:
                c_est = f.details["accessory_estimate"]
                rep.add(f"-a[{i}](2)/a[{i}](1)^2 = c[{i}]", a, c_est, residues[i], 1e-4, st.config, floor=1e-2,
                        note="relative to max(|right|, 1e-2)")
    _each_point(report, ws, one, "fourier")


def suite_chains(report: CheckReport, ws: Workspace) -> None:
    m = ws.manifest
    try:
        conv = chains.find_convention()
        report.meta["chain_convention"] = conv.label
    except Exception as exc:  # noqa: BLE001
        report.fail("chain convention search", ANCHORS["cycle"], exc)
        conv = None
    for g, n in chains.admissible_types(m.max_genus, m.max_punctures):
        try:
            r = chains.check_cycle(g, n, conv)
            report.add_bool(f"cycle ({g},{n})", ANCHORS["cycle"], r.passed, note=r.convention)
        except Exception as exc:  # noqa: BLE001
            report.fail(f"cycle ({g},{n})", ANCHORS["cycle"], exc)
    for g in m.schottky_ranks:
        try:
            r = chains.check_schottky(g, conv)
            report.add_bool(f"schottky rank {g}", ANCHORS["schottky"], r.passed, note=r.convention)
        except Exception as exc:  # noqa: BLE001
            report.fail(f"schottky rank {g}", ANCHORS["schottky"], exc)


SUITES = {
    "gamma2-baseline": suite_gamma2,
    "generating-function": suite_generating_function,
    "tz-del": suite_tz_del,
    "tz-potential": suite_tz_potential,
    "wp-potential": suite_wp_potential,
    "curly-s": suite_curly_s,
    "cocycle": suite_cocycle,
    "liouville-residual": suite_liouville,
    "fourier": suite_fourier,
    "chain-identities": suite_chains,
}

# suites whose default manifest is a single moduli point
DEFAULT_POINTS = {"wp-potential": [[0.5]], "cocycle": [[0.3]]}


def run_suite(name: str, manifest: ExperimentManifest | None = None, workspace: Workspace | None = None) -> CheckReport:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    if manifest is None:
        manifest = ExperimentManifest(name=name, points=DEFAULT_POINTS.get(name, [list(p) for p in ACCEPTANCE_POINTS]))
    ws = workspace if workspace is not None and workspace.manifest is manifest else Workspace(manifest)
    report = CheckReport(name, meta={"manifest": manifest.to_json()})
    try:
        SUITES[name](report, ws)
    except Exception as exc:  # noqa: BLE001
        report.fail(name, "suite driver", exc)
    return report
