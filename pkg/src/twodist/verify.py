"""Numerical (1,d)-realization of coloured graphs.

Green classes are eliminated exactly before any optimization: every vertex
position becomes an integer combination of per-component anchors and a
reduced set of free class vectors, so class equalities hold by construction.
The remaining red/blue length constraints are solved by damped least squares
from random starts; coincident vertices are pushed apart by a hinge on the
pairs that collapsed in earlier attempts.
"""

from __future__ import annotations

import hashlib
import json
import math
from collections import deque
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np
from scipy import sparse
from scipy.optimize import least_squares
from scipy.sparse.linalg import lsmr
from scipy.spatial import cKDTree

from .graph import Graph, Pvebg, as_pvebg, dumps

FEASIBLE = "Feasible"
INFEASIBLE = "LikelyInfeasible"
DEGENERATE = "Degenerate"


class InconsistentGreenCycle(ValueError):
    """Green-class equalities force some class vector to vanish."""


@dataclass(frozen=True)
class SolveConfig:
    restarts: int = 64
    max_iters: int = 400
    tol_residual: float = 1e-9
    tol_distinct: float = 1e-6
    rng_seed: int = 0
    box_radius: Optional[float] = None

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if not 0 < self.tol_distinct < 1:
            raise ValueError("tol_distinct must lie in (0, 1)")

    def to_doc(self) -> dict:
        return asdict(self)


@dataclass
class Representation:
    points: np.ndarray  # shape (V, 2)

    def to_doc(self) -> dict:
        return {str(i): [float(x), float(y)] for i, (x, y) in enumerate(self.points)}

    @classmethod
    def from_doc(cls, doc: dict) -> "Representation":
        n = len(doc)
        pts = np.zeros((n, 2))
        for k, v in doc.items():
            pts[int(k)] = v
        return cls(pts)


@dataclass
class FeasibilityReport:
    status: str
    residual: float
    restarts_used: int
    representation: Optional[Representation] = None
    reason: str = ""
    min_separation: float = math.inf

    @property
    def feasible(self) -> bool:
        return self.status == FEASIBLE

    def summary(self) -> dict:
        return {
            "status": self.status,
            "residual": self.residual,
            "restarts_used": self.restarts_used,
            "min_separation": self.min_separation,
            "reason": self.reason,
        }


# ---------------------------------------------------------------------------
# checking


def _min_separation(points: np.ndarray, tol: float) -> tuple[float, Optional[tuple[int, int]]]:
    if len(points) < 2:
        return math.inf, None
    tree = cKDTree(points)
    close = tree.query_pairs(tol, output_type="ndarray")
    if len(close):
        dists = np.linalg.norm(points[close[:, 0]] - points[close[:, 1]], axis=1)
        k = int(np.argmin(dists))
        return float(dists[k]), (int(close[k, 0]), int(close[k, 1]))
    dd, _ = tree.query(points, k=2)
    return float(dd[:, 1].min()), None


def constraint_residual(g: Graph, d: float, points: np.ndarray) -> float:
    """Largest violation over squared lengths and green vector equalities."""
    p = as_pvebg(g)
    worst = 0.0
    for edges, target in ((p.red_edges, 1.0), (p.blue_edges, d * d)):
        if edges:
            e = np.asarray(edges)
            sq = np.sum((points[e[:, 0]] - points[e[:, 1]]) ** 2, axis=1)
            worst = max(worst, float(np.max(np.abs(sq - target))))
    for members in p.class_members().values():
        if len(members) > 1:
            vecs = np.array([points[m.head] - points[m.tail] for m in members])
            worst = max(worst, float(np.max(np.abs(vecs - vecs[0]))))
    return worst


def check_representation(g: Graph, d: float, rep: Representation, cfg: SolveConfig = SolveConfig()) -> FeasibilityReport:
    pts = np.asarray(rep.points, dtype=float)
    p = as_pvebg(g)
    if pts.shape != (p.num_vertices, 2):
        return FeasibilityReport(INFEASIBLE, math.inf, 0, rep, "representation does not cover every vertex")
    if d == 0 and p.blue_edges:
        return FeasibilityReport(DEGENERATE, math.inf, 0, rep, "d=0 makes blue endpoints coincide")
    res = constraint_residual(p, d, pts)
    sep, pair = _min_separation(pts, cfg.tol_distinct)
    if res > cfg.tol_residual:
        return FeasibilityReport(INFEASIBLE, res, 0, rep, "constraint violation", sep)
    if sep < cfg.tol_distinct:
        return FeasibilityReport(DEGENERATE, res, 0, rep, f"coincident vertices {pair}", sep)
    return FeasibilityReport(FEASIBLE, res, 0, rep, "", sep)


# ---------------------------------------------------------------------------
# green elimination


def _rational_nullspace(rows: list[dict], ncols: int) -> list[list[Fraction]]:
    """Basis of {x : row.x = 0}; free columns get unit entries."""
    mat = [{c: Fraction(v) for c, v in r.items() if v} for r in rows]
    mat = [r for r in mat if r]
    pivots: dict[int, dict] = {}
    for row in mat:
        row = dict(row)
        for pc, prow in pivots.items():
            if pc in row:
                f = row[pc]
                for c, v in prow.items():
                    nv = row.get(c, 0) - f * v
                    if nv:
                        row[c] = nv
                    else:
                        row.pop(c, None)
        if not row:
            continue
        pc = min(row)
        inv = 1 / row[pc]
        row = {c: v * inv for c, v in row.items()}
        for oc, orow in pivots.items():
            if pc in orow:
                f = orow[pc]
                for c, v in row.items():
                    nv = orow.get(c, 0) - f * v
                    if nv:
                        orow[c] = nv
                    else:
                        orow.pop(c, None)
        pivots[pc] = row
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free:
        vec = [Fraction(0)] * ncols
        vec[fc] = Fraction(1)
        for pc, prow in pivots.items():
            vec[pc] = -prow.get(fc, Fraction(0))
        basis.append(vec)
    return basis


@dataclass
class _Linear:
    """positions = M @ Z, with Z the (m, 2) unknowns."""

    M: np.ndarray
    n_anchor: int
    comp: np.ndarray
    class_ids: list

    @property
    def m(self) -> int:
        return self.M.shape[1]


def eliminate_green(g: Graph) -> _Linear:
    p = as_pvebg(g)
    n = p.num_vertices
    cls_index = {c.id: i for i, c in enumerate(p.classes)}
    for e in p.green_edges:
        cls_index.setdefault(e.cls, len(cls_index))
    k = len(cls_index)
    adj: list[list[tuple[int, int, int]]] = [[] for _ in range(n)]
    for e in p.green_edges:
        c = cls_index[e.cls]
        adj[e.tail].append((e.head, c, 1))
        adj[e.head].append((e.tail, c, -1))
    comp = np.full(n, -1)
    coef: list[dict] = [dict() for _ in range(n)]
    constraints: list[dict] = []
    ncomp = 0
    for s in range(n):
        if comp[s] >= 0:
            continue
        comp[s] = ncomp
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for v, c, sgn in adj[u]:
                expect = dict(coef[u])
                expect[c] = expect.get(c, 0) + sgn
                if comp[v] < 0:
                    comp[v] = ncomp
                    coef[v] = {a: b for a, b in expect.items() if b}
                    queue.append(v)
                else:
                    diff = dict(expect)
                    for a, b in coef[v].items():
                        diff[a] = diff.get(a, 0) - b
                    diff = {a: b for a, b in diff.items() if b}
                    if diff:
                        constraints.append(diff)
        ncomp += 1
    basis = _rational_nullspace(constraints, k)
    B = np.array([[float(v) for v in vec] for vec in basis]).T if basis else np.zeros((k, 0))
    if k:
        used = {c for e in p.green_edges for c in [cls_index[e.cls]]}
        names = {i: cid for cid, i in cls_index.items()}
        for c in sorted(used):
            if not basis or all(vec[c] == 0 for vec in basis):
                raise InconsistentGreenCycle(f"green class {names[c]} is forced to the zero vector")
    M = np.zeros((n, ncomp + B.shape[1]))
    M[np.arange(n), comp] = 1.0
    for v in range(n):
        for c, a in coef[v].items():
            M[v, ncomp:] += a * B[c]
    return _Linear(M, ncomp, comp, list(cls_index))


# ---------------------------------------------------------------------------
# solving


class _Problem:
    def __init__(self, g: Pvebg, d: float, lin: _Linear):
        self.g, self.d, self.lin = g, d, lin
        edges = list(g.red_edges) + list(g.blue_edges)
        self.targets = np.array([1.0] * len(g.red_edges) + [d * d] * len(g.blue_edges))
        M = lin.M
        if edges:
            e = np.asarray(edges)
            self.D = M[e[:, 0]] - M[e[:, 1]]
        else:
            self.D = np.zeros((0, M.shape[1]))
        self.sparse = M.shape[1] > 150
        if self.sparse:
            self.Ds = sparse.csr_matrix(self.D)
        self.pairs = np.zeros((0, 2), dtype=int)
        self.margin = 0.0
        self.weight = 1.0

    def set_hinge(self, pairs: np.ndarray, margin: float, weight: float = 1.0) -> None:
        self.pairs = pairs
        self.margin = margin
        self.weight = weight
        M = self.lin.M
        self.P = M[pairs[:, 0]] - M[pairs[:, 1]] if len(pairs) else np.zeros((0, M.shape[1]))

    def unpack(self, z: np.ndarray) -> np.ndarray:
        return z.reshape(2, -1).T

    def positions(self, z: np.ndarray) -> np.ndarray:
        return self.lin.M @ self.unpack(z)

    def fit(self, pts: np.ndarray) -> np.ndarray:
        """Unknowns whose positions are closest to ``pts``."""
        Z = np.linalg.lstsq(self.lin.M, pts, rcond=None)[0]
        return Z.T.reshape(-1)

    def fun(self, z: np.ndarray) -> np.ndarray:
        Z = self.unpack(z)
        diff = self.D @ Z
        r = np.sum(diff * diff, axis=1) - self.targets
        if len(self.pairs):
            pd = self.P @ Z
            dist = np.sqrt(np.sum(pd * pd, axis=1))
            h = self.weight * np.maximum(0.0, self.margin - dist)
            r = np.concatenate([r, h])
        return r

    def jac(self, z: np.ndarray):
        Z = self.unpack(z)
        diff = self.D @ Z
        if self.sparse:
            Jx = sparse.diags(2 * diff[:, 0]) @ self.Ds
            Jy = sparse.diags(2 * diff[:, 1]) @ self.Ds
            J = sparse.hstack([Jx, Jy])
        else:
            J = np.hstack([2 * diff[:, :1] * self.D, 2 * diff[:, 1:] * self.D])
        if len(self.pairs):
            pd = self.P @ Z
            dist = np.maximum(np.sqrt(np.sum(pd * pd, axis=1)), 1e-12)
            active = (dist < self.margin).astype(float) * self.weight
            gx = -(active * pd[:, 0] / dist)[:, None] * self.P
            gy = -(active * pd[:, 1] / dist)[:, None] * self.P
            H = np.hstack([gx, gy])
            J = sparse.vstack([J, sparse.csr_matrix(H)]) if self.sparse else np.vstack([J, H])
        return J


_UNFOLD_ROUNDS = 20
_POLISH_STEPS = 24


def default_box_radius(g: Graph, hint: Optional[float] = None) -> float:
    return 2.0 + (hint if hint is not None else math.sqrt(as_pvebg(g).num_vertices))


def _initial(prob: _Problem, rng: np.random.Generator, radius: float) -> np.ndarray:
    lin = prob.lin
    m = lin.m
    Z = np.zeros((m, 2))
    Z[: lin.n_anchor] = rng.uniform(-radius, radius, size=(lin.n_anchor, 2))
    nfree = m - lin.n_anchor
    if nfree:
        ang = rng.uniform(0, 2 * math.pi, size=nfree)
        scale = max(1.0, prob.d) * rng.uniform(0.5, 1.5, size=nfree)
        Z[lin.n_anchor:, 0] = scale * np.cos(ang)
        Z[lin.n_anchor:, 1] = scale * np.sin(ang)
    return Z.T.reshape(-1)


def _run_lsq(prob: _Problem, z0: np.ndarray, cfg: SolveConfig) -> np.ndarray:
    if prob.D.shape[0] == 0 and not len(prob.pairs):
        return z0
    kw = dict(jac=prob.jac, method="trf", xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=cfg.max_iters)
    if prob.sparse:
        kw["tr_solver"] = "lsmr"
    out = least_squares(prob.fun, z0, **kw)
    return out.x


def _polish(prob: _Problem, z: np.ndarray, steps: int = _POLISH_STEPS) -> np.ndarray:
    """Minimum-norm Gauss-Newton steps; converge past the trust-region stop near singular solutions."""
    for _ in range(steps):
        r = prob.fun(z)
        J = prob.jac(z)
        step = lsmr(J, r, atol=1e-16, btol=1e-16)[0] if prob.sparse else np.linalg.lstsq(J, r, rcond=None)[0]
        z = z - step
    return z


def _edge_residual(prob: _Problem, z: np.ndarray) -> float:
    Z = prob.unpack(z)
    diff = prob.D @ Z
    if not len(diff):
        return 0.0
    return float(np.max(np.abs(np.sum(diff * diff, axis=1) - prob.targets)))


def solve(g: Graph, d: float, cfg: SolveConfig = SolveConfig(), diameter_hint: Optional[float] = None) -> FeasibilityReport:
    p = as_pvebg(g)
    if d < 0:
        raise ValueError("d must be non-negative")
    if d == 0 and p.blue_edges:
        return FeasibilityReport(DEGENERATE, math.inf, 0, None, "d=0 makes blue endpoints coincide")
    lin = eliminate_green(p)
    prob = _Problem(p, float(d), lin)
    radius = cfg.box_radius if cfg.box_radius is not None else default_box_radius(p, diameter_hint)
    scale = min(1.0, float(d)) if d > 0 else 1.0
    detect = max(10 * cfg.tol_distinct, 1e-4 * scale)
    margins = [0.2 * scale, 0.02 * scale, 0.002 * scale]
    near = 1e3 * cfg.tol_residual
    best: Optional[FeasibilityReport] = None
    nb = _neighbours(p)
    for attempt in range(cfg.restarts):
        rng = np.random.default_rng([cfg.rng_seed, attempt])
        prob.set_hinge(np.zeros((0, 2), dtype=int), 0.0)
        z = _run_lsq(prob, _initial(prob, rng, radius), cfg)
        for _ in range(_UNFOLD_ROUNDS):
            if _edge_residual(prob, z) > near:
                break
            pts = prob.positions(z)
            pairs = _close_pairs(pts, detect)
            if not pairs:
                break
            pts, moved = _unfold(pts, nb, pairs)
            if not moved:
                break
            z = _run_lsq(prob, prob.fit(pts), cfg)
        learned: set[tuple[int, int]] = set()
        for margin in [None] + margins:
            if margin is not None:
                pairs = np.array(sorted(learned), dtype=int).reshape(-1, 2)
                prob.set_hinge(pairs, margin)
                # exactly coincident pairs give the hinge no direction, so kick first
                z = _run_lsq(prob, z + rng.normal(scale=margin, size=z.shape), cfg)
                # a separation that only the hinge sustains is not a solution
                prob.set_hinge(pairs[:0], 0.0)
                z = _run_lsq(prob, z, cfg)
            pts = prob.positions(z)
            rep = check_representation(p, d, Representation(pts), cfg)
            rep.restarts_used = attempt + 1
            if rep.feasible:
                polished = check_representation(p, d, Representation(prob.positions(_polish(prob, z))), cfg)
                if polished.feasible:
                    polished.restarts_used = rep.restarts_used
                    rep = polished
                return rep
            if best is None or _rank(rep) < _rank(best):
                best = rep
            # coincidences only matter once the lengths are (nearly) right
            if margin is None and rep.residual > near:
                break
            learned |= _close_pairs(pts, detect)
            if not learned:
                break
    assert best is not None
    best.restarts_used = cfg.restarts
    return best


def _neighbours(p: Pvebg) -> list[set[int]]:
    nb: list[set[int]] = [set() for _ in range(p.num_vertices)]
    for u, v in list(p.red_edges) + list(p.blue_edges):
        nb[u].add(v)
        nb[v].add(u)
    return nb


def _unfold(pts: np.ndarray, nb: list[set[int]], pairs: set[tuple[int, int]]) -> tuple[np.ndarray, int]:
    """Swap folded 4-cycles to their parallelogram completion.

    If u and w coincide and share neighbours a, b, then w was placed on the
    circle intersection that equals u; the other one is a + b - u.
    """
    pts = pts.copy()
    moved = 0
    for u, w in sorted(pairs):
        common = sorted(nb[u] & nb[w])
        if len(common) < 2:
            continue
        a, b = common[0], common[1]
        target = pts[a] + pts[b] - pts[u]
        if np.linalg.norm(target - pts[u]) > 1e-9:
            pts[w] = target
            moved += 1
    return pts, moved


def _rank(rep: FeasibilityReport) -> tuple:
    # prefer genuine solutions with coincidences over large residuals
    return (rep.status != DEGENERATE, rep.residual)


def _close_pairs(pts: np.ndarray, tol: float) -> set[tuple[int, int]]:
    if len(pts) < 2:
        return set()
    return {(int(a), int(b)) for a, b in cKDTree(pts).query_pairs(tol)}


# ---------------------------------------------------------------------------
# range sweeps


@dataclass
class RangeProfile:
    samples: list  # (d, status, residual), sorted by d
    inferred_intervals: list = field(default_factory=list)  # (lo, hi, note)

    def table(self) -> str:
        lines = ["d\tstatus\tresidual"]
        lines += [f"{d:.6f}\t{s}\t{r:.3e}" for d, s, r in self.samples]
        lines.append("")
        lines.append("lo\thi\tnote")
        lines += [f"{lo:.6f}\t{hi:.6f}\t{note}" for lo, hi, note in self.inferred_intervals]
        return "\n".join(lines) + "\n"


def sweep_range(g: Graph, d_lo: float, d_hi: float, steps: int, cfg: SolveConfig = SolveConfig(),
                refine_levels: int = 8, diameter_hint: Optional[float] = None) -> RangeProfile:
    if not 0 < d_lo < d_hi:
        raise ValueError("need 0 < d_lo < d_hi")
    if steps < 2:
        raise ValueError("steps must be >= 2")
    results: dict[float, FeasibilityReport] = {}

    def run(d: float) -> bool:
        if d not in results:
            results[d] = solve(g, d, cfg, diameter_hint)
        return results[d].feasible

    grid = [float(v) for v in np.linspace(d_lo, d_hi, steps)]
    for d in grid:
        run(d)
    for a, b in zip(grid, grid[1:]):
        lo, hi = a, b
        if run(lo) == run(hi):
            continue
        for _ in range(refine_levels):
            mid = (lo + hi) / 2
            if run(mid) == run(lo):
                lo = mid
            else:
                hi = mid
    samples = sorted((d, r.status, r.residual) for d, r in results.items())
    return RangeProfile(samples, infer_intervals(samples))


def infer_intervals(samples: Sequence[tuple]) -> list:
    out = []
    run_start = None
    for i, (d, status, _) in enumerate(samples):
        ok = status == FEASIBLE
        if ok and run_start is None:
            run_start = i
        if run_start is not None and (not ok or i == len(samples) - 1):
            end = i if ok else i - 1
            lo, hi = samples[run_start][0], samples[end][0]
            left = f"edge in ({samples[run_start - 1][0]:.6f}, {lo:.6f}]" if run_start > 0 else "open at sweep start"
            right = f"edge in [{hi:.6f}, {samples[end + 1][0]:.6f})" if end + 1 < len(samples) else "open at sweep end"
            out.append((lo, hi, f"{left}; {right}"))
            run_start = None
    return out


# ---------------------------------------------------------------------------
# isometries and files


def align_isometry(rep_a: Representation, rep_b: Representation, anchor: Sequence[int]) -> tuple[Representation, bool, float]:
    """Best rigid motion (reflection allowed) taking ``rep_b`` onto ``rep_a`` on ``anchor``.

    Returns the moved representation, whether a reflection was used, and the
    RMS anchor error.
    """
    A = np.asarray(rep_a.points)[list(anchor)]
    B = np.asarray(rep_b.points)[list(anchor)]
    ca, cb = A.mean(axis=0), B.mean(axis=0)
    H = (B - cb).T @ (A - ca)
    U, _, Vt = np.linalg.svd(H)
    R = (U @ Vt).T
    reflected = bool(np.linalg.det(R) < 0)
    moved = (np.asarray(rep_b.points) - cb) @ R.T + ca
    err = float(np.sqrt(np.mean(np.sum((moved[list(anchor)] - A) ** 2, axis=1))))
    return Representation(moved), reflected, err


def graph_hash(g: Graph) -> str:
    return hashlib.sha256(dumps(g).encode("utf-8")).hexdigest()


def representation_document(g: Graph, d: float, report: FeasibilityReport, cfg: SolveConfig) -> str:
    doc = {
        "graph_sha256": graph_hash(g),
        "d": d,
        "config": cfg.to_doc(),
        "report": report.summary(),
        "points": report.representation.to_doc() if report.representation is not None else {},
    }
    return json.dumps(doc, indent=1, sort_keys=False) + "\n"


def load_representation(text: str) -> tuple[Representation, dict]:
    doc = json.loads(text)
    return Representation.from_doc(doc["points"]), doc
