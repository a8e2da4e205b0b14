import cmath
import math
from fractions import Fraction

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from twodist.algebra import IntPolynomial, SemialgebraicSet, max_root, parse_set
from twodist.graph import BLUE, dumps, triangle, validate
from twodist.synth import (
    CaseMismatch,
    GadgetTooLarge,
    NoPositiveRoot,
    NotCoprime,
    OutOfRange,
    build_A,
    build_B,
    build_C,
    build_D,
    build_G,
    build_G_full,
    build_G_strict,
    choose_N,
    clamp_range,
    epsilon_of_d,
    eval_eps_poly,
    exact_triangle_verdict,
    qp_qn_coefficients,
    split_pos_neg,
    switch_radius,
    synthesize,
    synthesize_full,
    window_range,
)
from twodist.verify import FEASIBLE, SolveConfig, solve

SQRT2_POLY = IntPolynomial([2, 0, -1])


@st.composite
def admissible_polys(draw):
    deg = draw(st.sampled_from([2, 4, 6]))
    coeffs = [draw(st.integers(-9, 9)) if k % 2 == 0 else 0 for k in range(deg)]
    coeffs.append(-draw(st.integers(1, 9)))
    p = IntPolynomial(coeffs)
    m = max_root(p)
    assume(m is not None and m.compare_rational(0) > 0)
    assume(not split_pos_neg(p)[0].is_zero())
    return p


class TestEncoding:
    def test_split(self):
        pp, pn = split_pos_neg(IntPolynomial([3, 0, -5, 0, 2]))
        assert pp.coeffs == (3, 0, 0, 0, 2) and pn.coeffs == (0, 0, 5)

    def test_sqrt2_system(self):
        assert choose_N(SQRT2_POLY) == 2
        assert qp_qn_coefficients(SQRT2_POLY, 2) == ([2], [4, 8, 4])

    def test_quartic_coefficients_frozen(self):
        p = IntPolynomial([-4, 0, 5, 0, -1])
        assert choose_N(p) == 4
        assert qp_qn_coefficients(p, 4) == ([80, 160, 80], [256, 1024, 1540, 1024, 256])

    def test_no_positive_root(self):
        with pytest.raises(NoPositiveRoot):
            choose_N(IntPolynomial([-1, 0, -1]))

    def test_not_admissible(self):
        with pytest.raises(ValueError):
            choose_N(IntPolynomial([2, 0, 1]))

    @pytest.mark.parametrize("d", [0.0, 4.0, 5.0])
    def test_epsilon_out_of_range(self, d):
        with pytest.raises(OutOfRange):
            epsilon_of_d(2, d)

    def test_epsilon_recovers_d(self):
        eps = epsilon_of_d(3, 1.7)
        assert abs(eps) == pytest.approx(1.0)
        assert abs(3 * (1 + eps)) ** 2 / abs(eps) == pytest.approx(1.7**2)

    @given(admissible_polys(), st.floats(0.01, 1.0))
    @settings(max_examples=40, deadline=None)
    def test_lengths_match_halves(self, p, frac):
        N = choose_N(p)
        beta, gamma = qp_qn_coefficients(p, N)
        assert min(beta) > 0 and min(gamma) > 0
        d = frac * max_root(p).to_float()
        eps = epsilon_of_d(N, d)
        pp, pn = split_pos_neg(p)
        assert abs(abs(eval_eps_poly(beta, eps)) - pp(d)) < 1e-9
        assert abs(abs(eval_eps_poly(gamma, eps)) - pn(d)) < 1e-9

    @given(admissible_polys(), st.floats(0.01, 1.0))
    @settings(max_examples=30, deadline=None)
    def test_arguments_decrease(self, p, frac):
        N = choose_N(p)
        eps = epsilon_of_d(N, frac * max_root(p).to_float())
        args = [cmath.phase(eps**k) for k in range(0, p.degree() + 1, 2)]
        assert all(a > b for a, b in zip(args, args[1:])) and args[-1] > -math.pi


class TestGadgetShapes:
    def test_A(self):
        g, h = build_A(SQRT2_POLY, 2)
        assert g.num_vertices == 11 and not validate(g)
        assert "carrier0" in h.named

    def test_B_case_check(self):
        with pytest.raises(CaseMismatch):
            build_B([2], [4, 8, 4], 2)
        g, h = build_B([2], [4, 8, 4], 1)
        assert not validate(g) and {"b10_0", "b10_1", "b10_2"} <= set(h.named)

    def test_G_sizes(self):
        assert build_G(SQRT2_POLY).num_vertices == 79
        assert build_G_strict(SQRT2_POLY).num_vertices == 80

    def test_G_empty_range_cases(self):
        assert build_G(IntPolynomial([-1, 0, -1])).num_vertices == 4
        _, _, prov = build_G_full(IntPolynomial([-3, 0, -1]))
        assert prov.note == "empty range"

    def test_provenance(self):
        _, _, prov = build_G_full(SQRT2_POLY)
        doc = prov.to_doc()
        assert doc["N"] == 2 and doc["gamma"] == [4, 8, 4] and doc["W"] >= 2

    def test_too_large(self):
        with pytest.raises(GadgetTooLarge):
            build_G(IntPolynomial([-4, 0, 25, 0, -42, 0, 25, 0, -4]))

    def test_exact_verdict(self):
        assert exact_triangle_verdict(SQRT2_POLY, Fraction(141, 100))
        assert not exact_triangle_verdict(SQRT2_POLY, Fraction(142, 100))

    @pytest.mark.parametrize("L,U", [(1, 4), (Fraction(1, 2), 3), (2, 2)])
    def test_C_size(self, L, U):
        c = build_C(L, U)
        assert c.r == switch_radius(Fraction(L), Fraction(U))
        assert c.graph.num_vertices == 18 * c.r + 8
        assert not validate(c.graph)

    def test_C_rejects_bad_bounds(self):
        with pytest.raises(ValueError):
            build_C(2, 1)

    def test_D(self):
        d = build_D(3, 2)
        assert len(d.graph.red_edges) == 3 and d.graph.classes[0].colour == BLUE
        # one red edge would pin the span to 1, so 1/L2 is built as 2/(2 L2)
        assert len(build_D(1, 2).graph.red_edges) == 2
        with pytest.raises(NotCoprime):
            build_D(2, 4)


class TestClampAndWindow:
    def test_clamp_copy_count(self):
        g = clamp_range(triangle(), Fraction(1, 2), 3)
        switches = {tuple(c.id.split(".")[:2]) for c in g.classes if c.id.startswith("C")}
        # two red edges of g times the two red edges of the doubled D
        assert len(switches) == 2 * 2
        assert not set(triangle().red_edges) & set(g.red_edges)
        assert not validate(g)

    def test_clamp_bounds(self):
        with pytest.raises(ValueError):
            clamp_range(triangle(), 2, 1)

    def test_window_precondition(self):
        with pytest.raises(ValueError):
            window_range(triangle(), Fraction(3), Fraction(1, 2), Fraction(1, 4), 4)

    def test_window_nests_without_id_clash(self):
        g = window_range(triangle(), Fraction(1, 2), Fraction(3), Fraction(1, 4), 4)
        assert not validate(g)
        assert len({c.id for c in g.classes}) == len(g.classes)


class TestSynthesize:
    def test_empty_set(self):
        g = synthesize(SemialgebraicSet(), Fraction(1, 2), Fraction(2))
        assert g.num_vertices == 6 and len(g.red_edges) == 6 and len(g.blue_edges) == 1

    def test_interval_structure(self):
        res = synthesize_full(parse_set("[1,alg(-2,0,1;1,2)]"), Fraction(1, 2), Fraction(2))
        assert not validate(res.graph)
        side = res.sidecar()
        assert side["source_set"] == "[1,alg(-2,0,1;1,2)]"
        assert len(side["terms"]) == len(res.terms) == 3
        assert all("gadget" in t for t in side["terms"]) and side["W"] >= 2

    def test_deterministic(self):
        s = parse_set("[1,1]")
        a = dumps(synthesize(s, Fraction(1, 2), Fraction(2)))
        b = dumps(synthesize(s, Fraction(1, 2), Fraction(2)))
        assert a == b


class TestSolverOnGadgets:
    CFG = SolveConfig(restarts=32)

    @pytest.mark.parametrize("d,ok", [(1.0, True), (1.6, False)])
    def test_G_sqrt2(self, d, ok):
        assert (solve(build_G(SQRT2_POLY), d, self.CFG).status == FEASIBLE) == ok

    @pytest.mark.parametrize("d,ok", [(1.2, True), (1.7, False)])
    def test_D_ratio(self, d, ok):
        assert (solve(build_D(3, 2).graph, d, self.CFG).status == FEASIBLE) == ok
