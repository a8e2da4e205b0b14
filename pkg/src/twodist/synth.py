"""Gadget graphs and the pipeline from a set of reals to a graph with that range."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

import mpmath

from .algebra import (
    DecompTerm,
    IntPolynomial,
    SemialgebraicSet,
    decompose,
    max_root,
)
from .graph import BLUE, RED, Builder, Graph, Pvebg, as_pvebg, complete_graph, disjoint_union, invert_colours


class NoPositiveRoot(ValueError):
    pass


class OutOfRange(ValueError):
    pass


class CaseMismatch(ValueError):
    pass


class GadgetTooLarge(ValueError):
    """The path multiplicities would need more vertices than the caller allows."""


class NotCoprime(ValueError):
    pass


# ---------------------------------------------------------------------------
# the complex encoding


def split_pos_neg(p: IntPolynomial) -> tuple[IntPolynomial, IntPolynomial]:
    pos = IntPolynomial(c if c > 0 else 0 for c in p.coeffs)
    neg = IntPolynomial(-c if c < 0 else 0 for c in p.coeffs)
    return pos, neg


def _admissible(p: IntPolynomial) -> None:
    if not p.is_even() or p.lead >= 0 or p.degree() < 2:
        raise ValueError(f"need an even polynomial of degree >= 2 with negative leading coefficient, got {p}")


def choose_N(p: IntPolynomial) -> int:
    """Smallest even integer strictly above M / (2 sin(pi / (2 deg p)))."""
    _admissible(p)
    m = max_root(p)
    if m is None or m.compare_rational(0) <= 0:
        raise NoPositiveRoot(f"{p} has no positive real root")
    with mpmath.workdps(80):
        a = m.refine(Fraction(1, 2**240))
        mid = mpmath.mpf(a.iso_lo.numerator) / a.iso_lo.denominator
        bound = mid / (2 * mpmath.sin(mpmath.pi / (2 * p.degree())))
        k = int(mpmath.floor(bound))
        # an integral bound (up to 1e-60) must be exceeded strictly
        if abs(bound - mpmath.nint(bound)) < mpmath.mpf(10) ** -60:
            k = int(mpmath.nint(bound))
    n = k + 1
    return n if n % 2 == 0 else n + 1


def epsilon_of_d(N: int, d: float) -> complex:
    if not 0 < d < 2 * N:
        raise OutOfRange(f"d={d} must lie in (0, {2 * N})")
    c = d * d / (2.0 * N * N) - 1.0
    return cmath.exp(1j * math.acos(max(-1.0, min(1.0, c))))


def _binomial_row(k: int) -> list[int]:
    return [math.comb(k, i) for i in range(k + 1)]


def _eps_expansion(P: IntPolynomial, N: int) -> list[int]:
    """Coefficients in eps of sum a_{2i} N^{2i} (1+eps)^{2i} eps^{D/2-i}."""
    if P.is_zero():
        return [0]
    D = P.degree()
    out = [0] * (D + 1)
    for k, a in enumerate(P.coeffs):
        if a == 0:
            continue
        i = k // 2
        shift = D // 2 - i
        scale = a * N ** (2 * i)
        for t, b in enumerate(_binomial_row(2 * i)):
            out[shift + t] += scale * b
    return out


def qp_qn_coefficients(p: IntPolynomial, N: int) -> tuple[list[int], list[int]]:
    pp, pn = split_pos_neg(p)
    return _eps_expansion(pp, N), _eps_expansion(pn, N)


def eval_eps_poly(coeffs: list[int], eps: complex) -> complex:
    acc = 0j
    for c in reversed(coeffs):
        acc = acc * eps + c
    return acc


@dataclass
class EpsilonSystem:
    p: IntPolynomial
    N: int
    deg: int
    beta: list
    gamma: list
    pp: IntPolynomial
    pn: IntPolynomial

    @classmethod
    def of(cls, p: IntPolynomial, N: Optional[int] = None) -> "EpsilonSystem":
        N = choose_N(p) if N is None else N
        pp, pn = split_pos_neg(p)
        beta, gamma = qp_qn_coefficients(p, N)
        assert pp.degree() != 0 or pn.degree() >= 2
        return cls(p, N, p.degree(), beta, gamma, pp, pn)


# ---------------------------------------------------------------------------
# gadget A: powers of eps along green classes


@dataclass
class GadgetHandles:
    named: dict = field(default_factory=dict)

    def __getitem__(self, key):
        return self.named[key]

    def __setitem__(self, key, value):
        self.named[key] = value

    def shifted(self, off: int) -> "GadgetHandles":
        def mv(v):
            if isinstance(v, int):
                return v + off
            if isinstance(v, tuple):
                return tuple(mv(x) for x in v)
            return v
        return GadgetHandles({k: mv(v) for k, v in self.named.items()})


def _add_A(b: Builder, deg: int, N: int, tag: str) -> tuple[list[str], GadgetHandles]:
    """Append gadget A; returns the class carrying eps^g for g = 0..deg."""
    groups = [b.new_class(RED, f"{tag}g{g}") for g in range(deg + 1)]
    h = GadgetHandles()
    copies = []
    for j in range(1, deg + 1):
        a = _verts(b, 2 * N + 1, lambda i: f"{tag}a_{{{j},{i}}}")
        if j > 1:
            a.append(b.vertex(f"{tag}a_{{{j},{2 * N + 1}}}"))
        b.red_edge(a[0], a[1])
        b.red_edge(a[1], a[2])
        b.blue_edge(a[0], a[2 * N])
        for i in range(2 * N):
            b.green(a[i], a[i + 1], groups[j - 1] if i % 2 == 0 else groups[j])
        if j > 1:
            b.green(a[1], a[2 * N + 1], groups[j - 2])
        copies.append(a)
        h[f"a{j}"] = tuple(a)
    h["carrier0"] = (copies[0][0], copies[0][1])
    for j in range(1, deg + 1):
        h[f"carrier{j}"] = (copies[j - 1][1], copies[j - 1][2])
    return groups, h


def build_A(p: IntPolynomial, N: int) -> tuple[Pvebg, GadgetHandles]:
    _admissible(p)
    b = Builder()
    groups, h = _add_A(b, p.degree(), N, "")
    h["classes"] = tuple(groups)
    return b.build(), h


# ---------------------------------------------------------------------------
# gadget B: sums of eps powers and the comparison triangle


def _verts(b: Builder, k: int, label) -> list[int]:
    return [b.vertex(label(i)) for i in range(k)]


def _path(b: Builder, steps: list[tuple[str, int]], name: str) -> list[int]:
    total = sum(k for _, k in steps)
    verts = _verts(b, total + 1, lambda i: f"b_{{{name},{i}}}")
    i = 0
    for cid, k in steps:
        for _ in range(k):
            b.green(verts[i], verts[i + 1], cid)
            i += 1
    return verts


def _triangle3(b: Builder, name: str) -> list[int]:
    return _verts(b, 3, lambda i: f"b_{{{name},{i}}}")


def _case_of(beta: list, gamma: list) -> int:
    dp, dn = len(beta) - 1, len(gamma) - 1
    if dp == 0 and dn >= 2:
        return 1
    if dp >= 2 and dn >= 2:
        return 2
    raise CaseMismatch(f"no case for deg q_p = {dp}, deg q_n = {dn}")


def _add_B(b: Builder, beta: list, gamma: list, case: int, step1: list[str], step2: list[str],
           step3: list[str]) -> GadgetHandles:
    if _case_of(beta, gamma) != case:
        raise CaseMismatch(f"coefficients belong to case {_case_of(beta, gamma)}, not {case}")
    if any(v <= 0 for v in beta) or any(v <= 0 for v in gamma):
        raise ValueError("eps-expansion coefficients must be positive")
    h = GadgetHandles()
    cls = {k: b.new_class(RED, f"B{k}") for k in (1, 2, 3, 4, 5, 6, 7, 8, 9) if case == 2 or k in (1, 4, 7, 8, 9)}
    even = lambda coeffs, st, mult=1: [(st[k], mult * c) for k, c in enumerate(coeffs) if k % 2 == 0]
    odd = lambda coeffs, st, mult=1: [(st[k], mult * c) for k, c in enumerate(coeffs) if k % 2 == 1]
    if case == 1:
        b1 = _path(b, [(step1[0], beta[0])], "1")
        b4 = _path(b, [(step2[0], beta[0])], "4")
    else:
        b1 = _path(b, even(beta, step1), "1")
        b2 = _path(b, odd(beta, step1), "2")
        b3 = _triangle3(b, "3")
        b4 = _path(b, even(beta, step2), "4")
        b5 = _path(b, odd(beta, step2), "5")
        b6 = _triangle3(b, "6")
    b7 = _path(b, even(gamma, step3, 2), "7")
    b8 = _path(b, odd(gamma, step3, 2), "8")
    b9 = _triangle3(b, "9")
    b10 = _triangle3(b, "10")
    if case == 1:
        b.tie((b1[0], b1[-1]), (b10[0], b10[1]), cls[1])
        b.tie((b4[0], b4[-1]), (b10[1], b10[2]), cls[4])
    else:
        b.tie((b1[0], b1[-1]), (b3[0], b3[1]), cls[1])
        b.tie((b2[0], b2[-1]), (b3[1], b3[2]), cls[2])
        b.tie((b3[0], b3[2]), (b10[0], b10[1]), cls[3])
        b.tie((b4[0], b4[-1]), (b6[0], b6[1]), cls[4])
        b.tie((b5[0], b5[-1]), (b6[1], b6[2]), cls[5])
        b.tie((b6[0], b6[2]), (b10[1], b10[2]), cls[6])
    b.tie((b7[0], b7[-1]), (b9[0], b9[1]), cls[7])
    b.tie((b8[0], b8[-1]), (b9[1], b9[2]), cls[8])
    b.tie((b10[0], b10[2]), (b9[0], b9[2]), cls[9])
    for k, v in (("b10_0", b10[0]), ("b10_1", b10[1]), ("b10_2", b10[2])):
        h[k] = v
    h["top_class"] = cls[1] if case == 1 else cls[3]
    parts = {"B1": b1, "B4": b4, "B7": b7, "B8": b8, "B9": b9, "B10": b10}
    if case == 2:
        parts.update({"B2": b2, "B3": b3, "B5": b5, "B6": b6})
    for k, v in parts.items():
        h[k] = tuple(v)
    return h


def build_B(beta: list, gamma: list, case: int) -> tuple[Pvebg, GadgetHandles]:
    """Stand-alone B; the eps-power step classes are left as free red classes."""
    b = Builder()
    deg = max(len(beta), len(gamma)) - 1
    steps = [[b.new_class(RED, f"A{k}g{g}") for g in range(deg + 1)] for k in (1, 2, 3)]
    h = _add_B(b, beta, gamma, case, *steps)
    return b.build(), h


# ---------------------------------------------------------------------------
# G(p) and G'(p)


@dataclass
class Provenance:
    p: list
    N: Optional[int]
    beta: list
    gamma: list
    W: Optional[int]
    diameter_bound: Optional[float]
    note: str = ""

    def to_doc(self) -> dict:
        return {"p": self.p, "N": self.N, "beta": self.beta, "gamma": self.gamma, "W": self.W,
                "diameter_bound": self.diameter_bound, "note": self.note}


def empty_range_gadget() -> Pvebg:
    """Red K4: no (1,d)-representation for any d."""
    return as_pvebg(complete_graph(4, RED))


MAX_PATH_VERTICES = 2_000_000


def planned_path_vertices(beta: list, gamma: list) -> int:
    """Vertex count of the B paths, known before anything is built."""
    return 2 * sum(beta) + 4 * sum(gamma)


def _build_G(p: IntPolynomial, strict: bool) -> tuple[Pvebg, GadgetHandles, Provenance]:
    pp, _ = split_pos_neg(p)
    if pp.is_zero() or p.degree() < 2:
        return empty_range_gadget(), GadgetHandles(), Provenance(list(p.coeffs), None, [], [], None, None, "empty range")
    _admissible(p)
    try:
        N = choose_N(p)
    except NoPositiveRoot:
        return empty_range_gadget(), GadgetHandles(), Provenance(list(p.coeffs), None, [], [], None, None, "no positive root")
    sys = EpsilonSystem.of(p, N)
    case = _case_of(sys.beta, sys.gamma)
    need = planned_path_vertices(sys.beta, sys.gamma)
    if need > MAX_PATH_VERTICES:
        raise GadgetTooLarge(f"{p}: B paths need {need} vertices (limit {MAX_PATH_VERTICES})")
    b = Builder()
    steps = []
    handles = GadgetHandles()
    for k in (1, 2, 3):
        groups, ha = _add_A(b, sys.deg, N, f"A{k}")
        steps.append(groups)
        for key, v in ha.named.items():
            handles[f"A{k}.{key}"] = v
    hb = _add_B(b, sys.beta, sys.gamma, case, *steps)
    handles.named.update(hb.named)
    if strict:
        v = b.vertex("b_{10,3}")
        b.green(v, hb["b10_2"], hb["top_class"])
        handles["b10_3"] = v
    g = b.build()
    m = max_root(p).to_float()
    diam = (max(1.0, m) * (max(sum(sys.beta), 2 * sum(sys.gamma)) + 2 * N + 2))
    W = math.ceil(2 * (1 + m) + 2) * max(2, math.ceil(diam))
    prov = Provenance(list(p.coeffs), N, sys.beta, sys.gamma, W, diam, f"case {case}")
    return g, handles, prov


def build_G(p: IntPolynomial) -> Pvebg:
    return _build_G(p, False)[0]


def build_G_strict(p: IntPolynomial) -> Pvebg:
    return _build_G(p, True)[0]


def build_G_full(p: IntPolynomial, strict: bool = False) -> tuple[Pvebg, GadgetHandles, Provenance]:
    return _build_G(p, strict)


def exact_triangle_verdict(p: IntPolynomial, d: Union[Fraction, float]) -> bool:
    """Whether p_p(d) >= p_n(d), i.e. the comparison triangle can close."""
    pp, pn = split_pos_neg(p)
    x = Fraction(d)
    return pp.eval_exact(x) >= pn.eval_exact(x)


# ---------------------------------------------------------------------------
# gadget C: the switch


@dataclass
class SwitchGadget:
    graph: Pvebg
    r: int
    theta1: tuple[int, int]
    theta2: tuple[int, int]
    handles: GadgetHandles


def switch_radius(L: Fraction, U: Fraction) -> int:
    return math.ceil(Fraction(U) / (2 * Fraction(L))) + 1


def _add_C(b: Builder, r: int, tag: str) -> tuple[tuple[int, int], tuple[int, int], GadgetHandles]:
    k = {i: b.new_class(RED, f"{tag}{i}", fresh=True) for i in range(1, 9)}
    lab = lambda s: f"{tag}c_{{{s}}}"
    # reference frame: rigid rhombus plus lattice rays
    c1 = {0: b.vertex(lab("1,0"))}
    for i in range(1, 2 * r + 1):
        c1[i] = b.vertex(lab(f"1,{i}"))
    star1 = {i: b.vertex(lab(f"1,{i}^*")) for i in range(1, 2 * r + 3)}
    for i in range(1, 2 * r + 1):
        c1[-i] = b.vertex(lab(f"1,-{i}"))
    m1, m2 = b.vertex(lab("1,-1^*")), b.vertex(lab("1,-2^*"))
    b.red_edge(c1[0], c1[1])
    b.red_edge(c1[0], star1[1])
    b.red_edge(star1[1], c1[1])
    b.red_edge(star1[1], c1[-1])
    b.red_edge(c1[-1], c1[0])
    for i in range(2 * r):
        b.green(c1[i], c1[i + 1], k[1])
    b.green(m1, m2, k[1])
    b.green(c1[0], star1[1], k[2])
    for i in range(1, 2 * r + 1):
        b.green(star1[i], star1[i + 1], k[2])
    b.green(m1, c1[0], k[2])
    for i in range(2 * r):
        b.green(c1[-i - 1], c1[-i], k[3])
    b.green(star1[2 * r + 1], star1[2 * r + 2], k[3])
    b.green(m2, c1[2 * r], k[4])
    b.green(c1[2 * r], star1[2 * r + 2], k[5])
    b.green(c1[-2 * r], star1[2 * r + 1], k[6])
    # the two-state part
    c2 = {i: b.vertex(lab(f"2,{i}")) for i in range(-2 * r, 2 * r + 1)}
    star = {i: b.vertex(lab(f"2,{i}^*")) for i in range(1, 2 * r + 2)}
    prime = {i: b.vertex(lab(f"2,{i}'")) for i in range(1, 2 * r + 1)}
    nstar = {i: b.vertex(lab(f"2,-{i}^*")) for i in range(1, 2 * r + 2)}
    nprime = {i: b.vertex(lab(f"2,-{i}'")) for i in range(1, 2 * r + 1)}
    b.red_edge(c2[0], c2[1])
    b.red_edge(c2[-1], c2[0])
    for i in range(2 * r):
        b.green(c2[i], c2[i + 1], k[8])
        b.green(c2[-i - 1], c2[-i], k[7])
    chain = [c2[0]] + [star[i] for i in range(1, 2 * r + 2)]
    chain_p = [c2[1]] + [prime[i] for i in range(1, 2 * r + 1)]
    chain_n = [c2[0]] + [nstar[i] for i in range(1, 2 * r + 2)]
    chain_np = [c2[1]] + [nprime[i] for i in range(1, 2 * r + 1)]
    for ch in (chain, chain_p, chain_n, chain_np):
        for u, v in zip(ch, ch[1:]):
            b.red_edge(u, v)
    b.green(nstar[2 * r + 1], nprime[2 * r], k[1])
    b.green(nprime[2 * r], c2[2 * r], k[4])
    b.green(c2[2 * r], prime[2 * r], k[5])
    b.green(star[2 * r + 1], prime[2 * r], k[3])
    b.green(c2[-2 * r], star[2 * r + 1], k[6])
    theta1 = (star[r], prime[r])
    theta2 = (nstar[r], nprime[r])
    h = GadgetHandles({"c1_0": c1[0], "c2_0": c2[0], "c2_1": c2[1], "theta1": theta1, "theta2": theta2,
                       "O1_pair": (nstar[2 * r + 1], nprime[2 * r])})
    return theta1, theta2, h


def build_C(L: Union[Fraction, int], U: Union[Fraction, int]) -> SwitchGadget:
    L, U = Fraction(L), Fraction(U)
    if not 0 < L <= U:
        raise ValueError("need 0 < L <= U")
    r = switch_radius(L, U)
    b = Builder()
    t1, t2, h = _add_C(b, r, "")
    return SwitchGadget(b.build(), r, t1, t2, h)


# ---------------------------------------------------------------------------
# gadget D: range (0, L1/L2]


@dataclass
class RatioGadget:
    graph: Pvebg
    L1: int
    L2: int
    ends: tuple[int, int]
    red_path: tuple[int, ...]


def _add_D(b: Builder, L1: int, L2: int, tag: str) -> tuple[list[int], list[int]]:
    # a single red edge would pin the span to exactly 1, so scale 1/L2 up to 2/(2 L2)
    if L1 == 1:
        L1, L2 = 2, 2 * L2
    s = b.vertex(f"{tag}s")
    reds = [s] + _verts(b, L1 - 1, lambda i: f"{tag}r_{i + 1}") + [b.vertex(f"{tag}t")]
    t = reds[-1]
    greens = [s] + _verts(b, L2 - 1, lambda i: f"{tag}g_{i + 1}") + [t]
    for u, v in zip(reds, reds[1:]):
        b.red_edge(u, v)
    cid = b.new_class(BLUE, f"{tag}1", fresh=True)
    for u, v in zip(greens, greens[1:]):
        b.green(u, v, cid)
    b.blue_edge(greens[-2], greens[-1])
    return reds, greens


def build_D(L1: int, L2: int) -> RatioGadget:
    if L1 < 1 or L2 < 1:
        raise ValueError("L1, L2 must be positive")
    if math.gcd(L1, L2) != 1:
        raise NotCoprime(f"gcd({L1}, {L2}) = {math.gcd(L1, L2)}")
    b = Builder()
    reds, _ = _add_D(b, L1, L2, "")
    return RatioGadget(b.build(), L1, L2, (reds[0], reds[-1]), tuple(reds))


# ---------------------------------------------------------------------------
# clamping and windowing


def clamp_range(g: Graph, L: Union[Fraction, int], U: Union[Fraction, int, float]) -> Pvebg:
    """Graph whose range is ((0, L] | ran g) below U, following the switch argument."""
    L = Fraction(L)
    if not L > 0 or not float(L) <= float(U):
        raise ValueError("need 0 < L <= U")
    g = as_pvebg(g)
    U_q = Fraction(U) if not isinstance(U, float) else Fraction(U).limit_denominator(10**6)
    r = switch_radius(L, max(U_q, L))
    b = Builder()
    old = b.embed(g)
    # red edges of g and of D come back as green ties to the switches
    reds_g = [(old[u], old[v]) for u, v in g.red_edges]
    d_reds, _ = _add_D(b, L.numerator, L.denominator, "D.")
    d_edges = list(zip(d_reds, d_reds[1:]))
    b.drop_red(reds_g + d_edges)
    tie_g = [b.new_class(RED, f"tieG{i}", fresh=True) for i in range(len(reds_g))]
    tie_d = [b.new_class(RED, f"tieD{j}", fresh=True) for j in range(len(d_edges))]
    for i, e in enumerate(reds_g):
        b.green(e[0], e[1], tie_g[i])
    for j, e in enumerate(d_edges):
        b.green(e[0], e[1], tie_d[j])
    for i in range(len(reds_g)):
        for j in range(len(d_edges)):
            t1, t2, _ = _add_C(b, r, f"C{i}.{j}.")
            b.green(t1[0], t1[1], tie_g[i])
            b.green(t2[0], t2[1], tie_d[j])
    return b.build()


def window_range(g: Graph, La: Fraction, Ua: Fraction, Lb: Union[Fraction, float], Ub: Union[Fraction, float]) -> Pvebg:
    """Range equal to ((0, La] | ran g | [Ua, inf)) inside (Lb, Ub)."""
    La, Ua = Fraction(La), Fraction(Ua)
    if not float(Lb) < La < Ua < float(Ub):
        raise ValueError("need Lb < La < Ua < Ub")
    lower = clamp_range(g, La, Ub)
    return invert_colours(clamp_range(invert_colours(lower), 1 / Ua, 1 / Fraction(Lb)))


# ---------------------------------------------------------------------------
# full pipeline


@dataclass
class SynthesisResult:
    graph: Pvebg
    terms: list
    provenance: list
    source: str
    window: tuple

    def sidecar(self) -> dict:
        return {
            "source_set": self.source,
            "window": [str(v) for v in self.window],
            "terms": [
                dict(t.to_doc(), **{"gadget": pv.to_doc()}) for t, pv in zip(self.terms, self.provenance)
            ],
            "W": max((pv.W or 0) for pv in self.provenance) if self.provenance else None,
        }


def synthesize_full(sigma: SemialgebraicSet, lam: Fraction, upsilon: Fraction) -> SynthesisResult:
    lam, upsilon = Fraction(lam), Fraction(upsilon)
    if sigma.is_empty():
        g = as_pvebg(disjoint_union(complete_graph(4, RED), _blue_edge()))
        return SynthesisResult(g, [], [], sigma.to_text(), (lam, upsilon))
    terms = decompose(sigma, lam, upsilon)
    local, final = terms[:-1], terms[-1]
    Lb = min(t.L for t in local) / 2
    Ub = max(t.U for t in local) * 2
    b = Builder()
    provs = []
    for t in local:
        g, _, prov = _build_G(t.p, bool(t.zeta))
        b.embed(window_range(g, t.L, t.U, Lb, Ub))
        provs.append(prov)
    g, _, prov = _build_G(final.p, True)
    b.embed(g)
    provs.append(prov)
    return SynthesisResult(b.build(), terms, provs, sigma.to_text(), (lam, upsilon))


def synthesize(sigma: SemialgebraicSet, lam: Fraction, upsilon: Fraction) -> Pvebg:
    return synthesize_full(sigma, lam, upsilon).graph


def _blue_edge() -> Pvebg:
    b = Builder()
    u, v = b.vertices(2)
    b.blue_edge(u, v)
    return b.build()
