"""Acceptance criteria; each test prints one PASS/FAIL line."""

import math
import random
import subprocess
import sys
import time
from fractions import Fraction

import numpy as np
import pytest

from laws import LAX, grid_transport_error, inversion_holds, restriction_holds, union_holds
from setgen import random_set_text
from twodist.algebra import IntPolynomial, decompose, decomposition_contains, max_root, parse_set
from twodist.graph import BLUE, RED, Builder, GridSpec, pvebg_to_ebg, red_or_blue_grid, triangle, validate
from twodist.synth import (
    build_C,
    build_D,
    build_G,
    build_G_strict,
    choose_N,
    epsilon_of_d,
    eval_eps_poly,
    exact_triangle_verdict,
    qp_qn_coefficients,
    split_pos_neg,
)
from twodist.verify import FEASIBLE, INFEASIBLE, SolveConfig, check_representation, solve, sweep_range

CFG = SolveConfig(restarts=64)
SQRT2 = math.sqrt(2)


@pytest.fixture
def report(capsys):
    def emit(tag: str, ok: bool, detail: str) -> None:
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} {tag}: {detail}")
        assert ok, detail

    return emit


def last_feasible_edge(profile):
    """Largest feasible sample, and whether statuses switch only once."""
    statuses = [s == FEASIBLE for _, s, _ in profile.samples]
    switches = sum(a != b for a, b in zip(statuses, statuses[1:]))
    feas = [d for d, s, _ in profile.samples if s == FEASIBLE]
    return (max(feas) if feas else None), switches


def test_1_algebra_round_trip(report):
    rng = random.Random(0)
    grid = [Fraction(1, 2) + Fraction(3 * k, 2 * 199) for k in range(200)]
    lam, ups = Fraction(1, 2), Fraction(2)
    t0 = time.perf_counter()
    bad = 0
    for _ in range(50):
        sigma = parse_set(random_set_text(rng))
        terms = decompose(sigma, lam, ups)
        bad += sum(decomposition_contains(terms, x) != sigma.contains(x) for x in grid)
    dt = time.perf_counter() - t0
    report("1 algebra round-trip", bad == 0 and dt < 10, f"{bad} mismatches over 50 sets x 200 points, {dt:.1f}s")


def test_2_length_identity(report):
    rng = random.Random(1)
    t0 = time.perf_counter()
    worst, positive, done = 0.0, True, 0
    while done < 20:
        deg = rng.choice([2, 4, 6])
        coeffs = [rng.randint(-9, 9) if k % 2 == 0 else 0 for k in range(deg)] + [-rng.randint(1, 9)]
        p = IntPolynomial(coeffs)
        root = max_root(p)
        pp, pn = split_pos_neg(p)
        if root is None or root.compare_rational(0) <= 0 or pp.is_zero():
            continue
        done += 1
        N = choose_N(p)
        beta, gamma = qp_qn_coefficients(p, N)
        positive &= min(beta) > 0 and min(gamma) > 0
        M = root.to_float()
        for i in range(1, 21):
            d = M * i / 20
            eps = epsilon_of_d(N, d)
            worst = max(worst, abs(abs(eval_eps_poly(beta, eps)) - pp(d)), abs(abs(eval_eps_poly(gamma, eps)) - pn(d)))
    dt = time.perf_counter() - t0
    ok = positive and worst < 1e-9 and dt < 5
    report("2 length identity", ok, f"coefficients positive={positive}, worst gap {worst:.1e}, {dt:.1f}s")


def test_3_ratio_gadget(report):
    t0 = time.perf_counter()
    prof = sweep_range(build_D(3, 2).graph, 0.1, 2.5, 25, CFG)
    dt = time.perf_counter() - t0
    edge, switches = last_feasible_edge(prof)
    below = all(s == FEASIBLE for d, s, _ in prof.samples if d <= 1.49)
    above = all(s == INFEASIBLE for d, s, _ in prof.samples if d >= 1.51)
    ok = edge is not None and abs(edge - 1.5) <= 0.01 and below and above and dt < 60
    report("3 ratio gadget D(3,2)", ok, f"last feasible {edge:.4f}, clean split={below and above}, {dt:.1f}s")


def test_4_switch_dichotomy(report):
    gadget = build_C(1, 4)
    (s1, t1), (s2, t2) = gadget.theta1, gadget.theta2
    t0 = time.perf_counter()
    worst, seen = 0.0, 0
    for d in (1.0, 1.6, 2.3, 3.1, 4.0):
        rep = solve(gadget.graph, d, CFG)
        if not rep.feasible:
            continue
        seen += 1
        pts = rep.representation.points
        l1 = np.linalg.norm(pts[t1] - pts[s1])
        l2 = np.linalg.norm(pts[t2] - pts[s2])
        worst = max(worst, min(abs(l1 - 1), abs(l2 - 1)))
    dt = time.perf_counter() - t0
    ok = seen > 0 and worst < 1e-6 and dt < 120
    report("4 switch dichotomy C(1,4)", ok, f"{seen}/5 feasible, worst min-deviation {worst:.1e}, {dt:.1f}s")


def test_5_sqrt2_gadget(report):
    p = IntPolynomial([2, 0, -1])
    t0 = time.perf_counter()
    prof = sweep_range(build_G(p), 0.3, 1.9, 17, CFG)
    edge, switches = last_feasible_edge(prof)
    agree = all((s == FEASIBLE) == (d <= SQRT2) for d, s, _ in prof.samples)
    confirmed = all(not exact_triangle_verdict(p, d) for d, s, _ in prof.samples if s == INFEASIBLE)
    strict = solve(build_G_strict(p), SQRT2, CFG)
    dt = time.perf_counter() - t0
    ok = agree and abs(edge - SQRT2) <= 0.02 and confirmed and not strict.feasible and dt < 600
    report("5 G(-x^2+2) sweep", ok,
           f"agree={agree}, last feasible {edge:.4f}, exact check on infeasible={confirmed}, "
           f"strict at sqrt2: {strict.status}, {dt:.1f}s")


def test_6_structural_laws(report):
    failures = []
    cases = [(triangle(), 1.3), (build_D(3, 2).graph, 1.2), (build_G(IntPolynomial([2, 0, -1])), 1.0)]
    for g, d in cases:
        rep = solve(g, d, CFG)
        if not rep.feasible:
            failures.append(f"no representation at {d}")
            continue
        pts = rep.representation
        keep = list(range(0, g.num_vertices, 2))
        if not restriction_holds(g, d, pts, keep):
            failures.append(f"restriction at {d}")
        if not inversion_holds(g, d, pts):
            failures.append(f"inversion at {d}")
        seg = triangle()
        other = solve(seg, d, CFG).representation
        if not union_holds(g, seg, d, pts, other):
            failures.append(f"union at {d}")
    for colour, d in ((RED, 0.7), (BLUE, 1.3)):
        g = red_or_blue_grid(GridSpec(3, 2, colour))
        rep = solve(g, d, CFG)
        lab = {name: v for v, name in g.labels.items()}
        err = grid_transport_error(rep.representation, lab["u00"], lab["un0"], lab["u0k"], lab["unk"])
        if not rep.feasible or err > LAX.tol_residual:
            failures.append(f"grid transport {colour} error {err:.1e}")
    report("6 structural laws", not failures, "; ".join(failures) or "restriction, inversion, union, grid transport")


PIPELINE = """
import sys
from twodist.cli import run
out = sys.argv[1]
run(["synth", "--poly", "2,0,-1", "--out", out + "/g.json"])
run(["check", out + "/g.json", "--d", "1.1", "--restarts", "16", "--rep-out", out + "/rep.json"])
run(["range", out + "/g.json", "--lo", "1.0", "--hi", "1.6", "--steps", "4", "--restarts", "16",
     "--refine", "3", "--out", out + "/prof.tsv"])
"""


def test_7_determinism(report, tmp_path):
    runs = []
    for k in range(2):
        out = tmp_path / f"run{k}"
        out.mkdir()
        subprocess.run([sys.executable, "-c", PIPELINE, str(out)], check=True, capture_output=True)
        runs.append({name: (out / name).read_bytes() for name in ("g.json", "g.json.prov.json", "rep.json", "prof.tsv")})
    same = [name for name in runs[0] if runs[0][name] == runs[1][name]]
    report("7 determinism", len(same) == 4, f"identical across two processes: {', '.join(same)}")


def toy_class_graph():
    """Two red 2-paths whose end-to-end vectors are one blue class, plus a blue chord."""
    b = Builder()
    a, m, c, x, y, z = b.vertices(6)
    for u, v in ((a, m), (m, c), (x, y), (y, z)):
        b.red_edge(u, v)
    b.blue_edge(x, z)
    k = b.new_class(BLUE)
    b.green(a, c, k)
    b.green(x, z, k)
    return b.build()


def test_8_materialization(report):
    count_errors = []
    for sizes in ([2], [3], [2, 4]):
        b = Builder()
        for m in sizes:
            v = b.vertices(2 * m)
            k = b.new_class(RED)
            for i in range(m):
                b.green(v[2 * i], v[2 * i + 1], k)
        g = b.build()
        for W in range(2, 7):
            e = pvebg_to_ebg(g, W)
            fresh = sum((m - 1) * ((W + 1) ** 2 - 4) for m in sizes)
            edges = sum((m - 1) * 2 * W * (W + 1) for m in sizes)
            if e.num_vertices != g.num_vertices + fresh or len(e.red_edges) + len(e.blue_edges) != edges or validate(e):
                count_errors.append(f"{sizes} W={W}")
    toy = toy_class_graph()
    flat = pvebg_to_ebg(toy, 5)
    t0 = time.perf_counter()
    grid = np.linspace(0.3, 2.5, 10)
    left = [solve(toy, d, CFG).feasible for d in grid]
    right = [solve(flat, d, CFG).feasible for d in grid]
    dt = time.perf_counter() - t0
    mismatch = [f"{d:.3f}" for d, a, b in zip(grid, left, right) if a != b]
    ok = not count_errors and not mismatch and dt < 300
    report("8 materialization", ok,
           f"count errors {count_errors or 'none'}, sweep mismatches {mismatch or 'none'} "
           f"(feasible up to {max(d for d, f in zip(grid, left) if f):.3f}), {dt:.1f}s")
