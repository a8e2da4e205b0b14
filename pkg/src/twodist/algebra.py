"""Exact univariate polynomials, real algebraic numbers and interval sets.

Everything here works over the integers and rationals.  Floats only appear
when a caller explicitly asks for an approximation.
"""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Union

Rational = Union[int, Fraction]


class NonNormalizedSet(ValueError):
    """An endpoint pattern that a normalized set cannot produce."""


class EmptySet(ValueError):
    """Decomposition was asked for the empty set."""


class SetSyntaxError(ValueError):
    pass


# ---------------------------------------------------------------------------
# polynomials


def _trim(coeffs: Sequence) -> tuple:
    c = list(coeffs)
    while len(c) > 1 and c[-1] == 0:
        c.pop()
    return tuple(c) if c else (0,)


@dataclass(frozen=True)
class IntPolynomial:
    """Integer polynomial; ``coeffs[k]`` multiplies ``x**k``."""

    coeffs: tuple

    def __init__(self, coeffs: Iterable[int]):
        c = _trim([int(v) for v in coeffs])
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def monomial(cls, k: int, c: int = 1) -> "IntPolynomial":
        return cls([0] * k + [c])

    @classmethod
    def constant(cls, c: int) -> "IntPolynomial":
        return cls([c])

    def degree(self) -> int:
        return -1 if self.is_zero() else len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return self.coeffs == (0,)

    @property
    def lead(self) -> int:
        return self.coeffs[-1]

    def is_even(self) -> bool:
        return all(c == 0 for c in self.coeffs[1::2])

    def __add__(self, other: "IntPolynomial") -> "IntPolynomial":
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (0,) * (n - len(self.coeffs))
        b = other.coeffs + (0,) * (n - len(other.coeffs))
        return IntPolynomial(x + y for x, y in zip(a, b))

    def __neg__(self) -> "IntPolynomial":
        return IntPolynomial(-c for c in self.coeffs)

    def __sub__(self, other: "IntPolynomial") -> "IntPolynomial":
        return self + (-other)

    def __mul__(self, other) -> "IntPolynomial":
        if isinstance(other, int):
            return IntPolynomial(c * other for c in self.coeffs)
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        return IntPolynomial(out)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "IntPolynomial":
        out = IntPolynomial([1])
        for _ in range(k):
            out = out * self
        return out

    def reflect(self) -> "IntPolynomial":
        """p(-x)."""
        return IntPolynomial(-c if k % 2 else c for k, c in enumerate(self.coeffs))

    def derivative(self) -> "IntPolynomial":
        return IntPolynomial([k * c for k, c in enumerate(self.coeffs)][1:] or [0])

    def content(self) -> int:
        return math.gcd(*self.coeffs) if not self.is_zero() else 1

    def primitive(self) -> "IntPolynomial":
        g = self.content()
        q = IntPolynomial(c // g for c in self.coeffs)
        return -q if q.lead < 0 else q

    def __call__(self, x):
        acc = 0 * x
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def eval_exact(self, x: Rational) -> Fraction:
        return Fraction(self(Fraction(x)))

    def __str__(self) -> str:
        terms = []
        for k in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[k]
            if c == 0 and not self.is_zero():
                continue
            mono = "" if k == 0 else ("x" if k == 1 else f"x^{k}")
            if mono and abs(c) == 1:
                s = ("-" if c < 0 else "+") + mono
            else:
                s = f"{c:+d}" + ("*" + mono if mono else "")
            terms.append(s)
        out = "".join(terms)
        return out[1:] if out.startswith("+") else out


def poly_arith(a: IntPolynomial, b: Optional[IntPolynomial], op: str) -> IntPolynomial:
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "negate":
        return -a
    if op == "reflect":
        return a.reflect()
    if op == "derivative":
        return a.derivative()
    raise ValueError(f"unknown polynomial op {op!r}")


# rational-coefficient helpers used for gcds and Sturm chains


def _qdivmod(a: list, b: list) -> tuple[list, list]:
    a = [Fraction(c) for c in a]
    q = [Fraction(0)] * max(1, len(a) - len(b) + 1)
    while len(a) >= len(b) and any(a):
        shift = len(a) - len(b)
        f = a[-1] / b[-1]
        q[shift] = f
        for i, c in enumerate(b):
            a[i + shift] -= f * c
        a.pop()
        while a and a[-1] == 0:
            a.pop()
    return q, a or [Fraction(0)]


def _to_int_poly(c: Sequence[Fraction]) -> IntPolynomial:
    den = 1
    for v in c:
        den = den * Fraction(v).denominator // math.gcd(den, Fraction(v).denominator)
    return IntPolynomial(int(Fraction(v) * den) for v in c)


def poly_gcd(a: IntPolynomial, b: IntPolynomial) -> IntPolynomial:
    x, y = list(a.coeffs), list(b.coeffs)
    while _trim(y) != (0,):
        _, r = _qdivmod(x, y)
        x, y = y, list(_trim(r))
    return _to_int_poly(x).primitive()


def poly_exact_div(a: IntPolynomial, b: IntPolynomial) -> IntPolynomial:
    q, r = _qdivmod(list(a.coeffs), list(b.coeffs))
    if any(r):
        raise ArithmeticError("division leaves a remainder")
    return _to_int_poly(q)


def square_free_part(p: IntPolynomial) -> IntPolynomial:
    if p.degree() <= 0:
        return p.primitive()
    g = poly_gcd(p, p.derivative())
    return poly_exact_div(p, g).primitive()


def sturm_chain(p: IntPolynomial) -> list[IntPolynomial]:
    chain = [p, p.derivative()]
    while chain[-1].degree() > 0:
        _, r = _qdivmod(list(chain[-2].coeffs), list(chain[-1].coeffs))
        r = _to_int_poly(r)
        if r.is_zero():
            break
        # positive rescaling keeps the sign pattern
        g = r.content()
        chain.append(IntPolynomial(-c // g for c in r.coeffs))
    return chain


def _variations(chain: Sequence[IntPolynomial], x: Fraction) -> int:
    signs = [s for s in (_sign(q.eval_exact(x)) for q in chain) if s]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def _sign(v) -> int:
    return (v > 0) - (v < 0)


def count_roots(chain: Sequence[IntPolynomial], lo: Fraction, hi: Fraction) -> int:
    """Distinct roots of a square-free chain head in the half-open ``(lo, hi]``."""
    return _variations(chain, lo) - _variations(chain, hi)


def cauchy_bound(p: IntPolynomial) -> Fraction:
    lead = abs(p.lead)
    return 1 + Fraction(max(abs(c) for c in p.coeffs[:-1]), lead) if p.degree() > 0 else Fraction(1)


# ---------------------------------------------------------------------------
# algebraic numbers


@dataclass(frozen=True)
class AlgebraicNumber:
    """A real root of ``minpoly``, the only one inside ``[iso_lo, iso_hi]``."""

    minpoly: IntPolynomial
    iso_lo: Fraction
    iso_hi: Fraction

    @classmethod
    def rational(cls, q: Rational) -> "AlgebraicNumber":
        q = Fraction(q)
        return cls(IntPolynomial([-q.numerator, q.denominator]), q, q)

    @classmethod
    def from_poly(cls, p: IntPolynomial, lo: Rational, hi: Rational) -> "AlgebraicNumber":
        q = square_free_part(p)
        lo, hi = Fraction(lo), Fraction(hi)
        if lo > hi or q.degree() < 1:
            raise ValueError("bad isolating interval")
        chain = sturm_chain(q)
        n = count_roots(chain, lo, hi) + (q.eval_exact(lo) == 0)
        if n != 1:
            raise ValueError(f"{n} roots of {q} in [{lo}, {hi}], need exactly one")
        a = cls(q, lo, hi)
        r = a.exact_rational()
        return cls.rational(r) if r is not None else a

    def is_rational(self) -> bool:
        return self.minpoly.degree() == 1

    def exact_rational(self) -> Optional[Fraction]:
        if self.is_rational():
            return Fraction(-self.minpoly.coeffs[0], self.minpoly.coeffs[1])
        for v in (self.iso_lo, self.iso_hi):
            if self.minpoly.eval_exact(v) == 0:
                return v
        return None

    def _chain(self) -> list[IntPolynomial]:
        return sturm_chain(self.minpoly)

    def bisect(self) -> "AlgebraicNumber":
        lo, hi, p = self.iso_lo, self.iso_hi, self.minpoly
        if lo == hi:
            return self
        mid = (lo + hi) / 2
        at_lo, at_mid = _sign(p.eval_exact(lo)), _sign(p.eval_exact(mid))
        if at_mid == 0:
            return AlgebraicNumber(p, mid, mid)
        if at_lo == 0:
            return AlgebraicNumber(p, lo, lo)
        # single simple root: a sign change on [lo, mid] places it there
        if at_lo != at_mid:
            return AlgebraicNumber(p, lo, mid)
        return AlgebraicNumber(p, mid, hi)

    def refine(self, width: Fraction) -> "AlgebraicNumber":
        a = self
        while a.iso_hi - a.iso_lo > width:
            a = a.bisect()
        return a

    def refine_count(self, k: int) -> "AlgebraicNumber":
        a = self
        for _ in range(k):
            a = a.bisect()
        return a

    def to_float(self) -> float:
        a = self.refine(Fraction(1, 2**60))
        return float((a.iso_lo + a.iso_hi) / 2)

    def sign_of(self, q: IntPolynomial) -> int:
        """Exact sign of ``q`` at this number."""
        if q.is_zero():
            return 0
        if q.degree() == 0:
            return _sign(q.lead)
        g = poly_gcd(self.minpoly, q)
        if g.degree() > 0:
            gc = sturm_chain(square_free_part(g))
            lo, hi = self.iso_lo, self.iso_hi
            if count_roots(gc, lo, hi) + (g.eval_exact(lo) == 0) > 0:
                return 0
        qc = sturm_chain(square_free_part(q))
        a = self
        while True:
            lo, hi = a.iso_lo, a.iso_hi
            if count_roots(qc, lo, hi) + (q.eval_exact(lo) == 0) == 0:
                return _sign(q.eval_exact(lo))
            a = a.bisect()

    def compare(self, other: "AlgebraicNumber") -> int:
        a, b = self, other
        g = poly_gcd(a.minpoly, b.minpoly)
        lo, hi = max(a.iso_lo, b.iso_lo), min(a.iso_hi, b.iso_hi)
        if g.degree() > 0 and lo <= hi:
            gc = sturm_chain(square_free_part(g))
            if count_roots(gc, lo, hi) + (g.eval_exact(lo) == 0) > 0:
                return 0
        while True:
            if a.iso_hi < b.iso_lo:
                return -1
            if b.iso_hi < a.iso_lo:
                return 1
            a, b = a.bisect(), b.bisect()

    def compare_rational(self, q: Rational) -> int:
        q = Fraction(q)
        if q < self.iso_lo:
            return 1
        if q > self.iso_hi:
            return -1
        return self.compare(AlgebraicNumber.rational(q))

    def floor(self) -> int:
        a = self
        while True:
            lo, hi = a.iso_lo, a.iso_hi
            for k in range(math.ceil(lo), math.floor(hi) + 1):
                if a.minpoly.eval_exact(Fraction(k)) == 0:
                    return k
            if math.floor(lo) == math.floor(hi):
                return math.floor(lo)
            if hi == math.floor(hi) and math.floor(lo) == hi - 1:
                return math.floor(lo)
            a = a.bisect()

    def to_text(self) -> str:
        r = self.exact_rational()
        if r is not None:
            return _rat_text(r)
        cs = ",".join(str(c) for c in self.minpoly.coeffs)
        return f"alg({cs};{_rat_text(self.iso_lo)},{_rat_text(self.iso_hi)})"

    def __lt__(self, other: "AlgebraicNumber") -> bool:
        return self.compare(other) < 0


def _rat_text(q: Fraction) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def isolate_real_roots(p: IntPolynomial) -> list[AlgebraicNumber]:
    if p.is_zero():
        raise ValueError("zero polynomial has every number as a root")
    q = square_free_part(p)
    if q.degree() < 1:
        return []
    chain = sturm_chain(q)
    b = cauchy_bound(q)
    out: list[AlgebraicNumber] = []
    stack = [(-b, b)]
    # (lo, hi] intervals; -b is never a root
    while stack:
        lo, hi = stack.pop()
        n = count_roots(chain, lo, hi)
        if n == 0:
            continue
        if n == 1 and q.eval_exact(lo) != 0:
            if q.eval_exact(hi) == 0:
                out.append(AlgebraicNumber.rational(hi))
            else:
                out.append(AlgebraicNumber(q, lo, hi))
            continue
        mid = (lo + hi) / 2
        stack.append((mid, hi))
        stack.append((lo, mid))
    out.sort(key=lambda a: (a.iso_lo, a.iso_hi))
    return out


def max_root(p: IntPolynomial) -> Optional[AlgebraicNumber]:
    roots = isolate_real_roots(p)
    return roots[-1] if roots else None


def even_minimal_polynomial(alpha: AlgebraicNumber) -> IntPolynomial:
    """Even integer polynomial with ``alpha`` as a simple root.

    Built as the square-free part of ``mu(x) * mu(-x)``, which is even and has
    every root simple.  No factorization is attempted.
    """
    mu = alpha.minpoly
    omega = square_free_part(mu * mu.reflect()).primitive()
    assert omega.is_even() and omega.lead > 0
    assert alpha.sign_of(omega) == 0 and alpha.sign_of(omega.derivative()) != 0
    return omega


# ---------------------------------------------------------------------------
# sets of positive reals


class EndKind(enum.Enum):
    ZERO = "zero"
    FINITE = "finite"
    INF = "inf"


@dataclass(frozen=True)
class Endpoint:
    kind: EndKind
    value: Optional[AlgebraicNumber] = None
    closed: bool = False

    @classmethod
    def zero(cls) -> "Endpoint":
        return cls(EndKind.ZERO)

    @classmethod
    def inf(cls) -> "Endpoint":
        return cls(EndKind.INF)

    @classmethod
    def at(cls, v: Union[AlgebraicNumber, Rational], closed: bool) -> "Endpoint":
        if not isinstance(v, AlgebraicNumber):
            v = AlgebraicNumber.rational(v)
        if v.compare_rational(0) <= 0:
            if v.compare_rational(0) == 0 and not closed:
                return cls.zero()
            raise ValueError("sets live in the positive reals")
        return cls(EndKind.FINITE, v, closed)


def _cmp_points(a: Endpoint, b: Endpoint) -> int:
    """Compare endpoint positions, ignoring closedness."""
    order = {EndKind.ZERO: 0, EndKind.FINITE: 1, EndKind.INF: 2}
    if a.kind != b.kind or a.kind != EndKind.FINITE:
        return _sign(order[a.kind] - order[b.kind])
    return a.value.compare(b.value)


@dataclass(frozen=True)
class Interval:
    lo: Endpoint
    hi: Endpoint

    def is_point(self) -> bool:
        return self.lo.kind == EndKind.FINITE and _cmp_points(self.lo, self.hi) == 0

    def contains(self, x: Rational) -> bool:
        x = Fraction(x)
        if x <= 0:
            return False
        if self.lo.kind == EndKind.FINITE:
            c = self.lo.value.compare_rational(x)
            if c > 0 or (c == 0 and not self.lo.closed):
                return False
        if self.hi.kind == EndKind.FINITE:
            c = self.hi.value.compare_rational(x)
            if c < 0 or (c == 0 and not self.hi.closed):
                return False
        return self.hi.kind != EndKind.ZERO

    def to_text(self) -> str:
        def end(e: Endpoint) -> str:
            return {EndKind.ZERO: "0", EndKind.INF: "inf"}.get(e.kind) or e.value.to_text()
        return ("[" if self.lo.closed else "(") + end(self.lo) + "," + end(self.hi) + ("]" if self.hi.closed else ")")


class SemialgebraicSet:
    """Finite union of disjoint intervals in the positive reals, kept normalized."""

    def __init__(self, intervals: Iterable[Interval] = ()):
        self.intervals: tuple[Interval, ...] = tuple(_normalize(list(intervals)))

    def is_empty(self) -> bool:
        return not self.intervals

    def contains(self, x: Rational) -> bool:
        return any(iv.contains(x) for iv in self.intervals)

    def endpoints(self) -> list[AlgebraicNumber]:
        """Distinct finite positive endpoints, ascending."""
        pts: list[AlgebraicNumber] = []
        for iv in self.intervals:
            for e in (iv.lo, iv.hi):
                if e.kind == EndKind.FINITE and (not pts or pts[-1].compare(e.value) != 0):
                    pts.append(e.value)
        return pts

    def contains_point(self, a: AlgebraicNumber) -> bool:
        e = Endpoint(EndKind.FINITE, a, True)
        for iv in self.intervals:
            lo, hi = _cmp_points(iv.lo, e), _cmp_points(e, iv.hi)
            if (lo < 0 or (lo == 0 and iv.lo.closed)) and (hi < 0 or (hi == 0 and iv.hi.closed)):
                return True
        return False

    def contains_open_piece(self, a: Optional[AlgebraicNumber], b: Optional[AlgebraicNumber]) -> bool:
        """Whether the open gap ``(a, b)`` lies in the set (None = 0 or inf)."""
        ea = Endpoint.zero() if a is None else Endpoint(EndKind.FINITE, a)
        eb = Endpoint.inf() if b is None else Endpoint(EndKind.FINITE, b)
        return any(_cmp_points(iv.lo, ea) <= 0 and _cmp_points(eb, iv.hi) <= 0 for iv in self.intervals)

    def to_text(self) -> str:
        return " U ".join(iv.to_text() for iv in self.intervals)

    def __eq__(self, other) -> bool:
        return isinstance(other, SemialgebraicSet) and self.to_text() == other.to_text()

    def __repr__(self) -> str:
        return f"SemialgebraicSet({self.to_text()!r})"


def _normalize(ivs: list[Interval]) -> list[Interval]:
    keep = []
    for iv in ivs:
        c = _cmp_points(iv.lo, iv.hi)
        if c < 0 or (c == 0 and iv.lo.closed and iv.hi.closed and iv.lo.kind == EndKind.FINITE):
            keep.append(iv)
        elif c > 0:
            raise ValueError(f"reversed interval {iv.to_text()}")
    keep.sort(key=_IntervalKey)
    out: list[Interval] = []
    for iv in keep:
        if out:
            last = out[-1]
            c = _cmp_points(iv.lo, last.hi)
            if c < 0 or (c == 0 and (iv.lo.closed or last.hi.closed)):
                ch = _cmp_points(iv.hi, last.hi)
                if ch > 0 or (ch == 0 and iv.hi.closed):
                    hi = iv.hi
                else:
                    hi = last.hi
                out[-1] = Interval(last.lo, hi)
                continue
        out.append(iv)
    return out


class _IntervalKey:
    def __init__(self, iv: Interval):
        self.iv = iv

    def __lt__(self, other: "_IntervalKey") -> bool:
        c = _cmp_points(self.iv.lo, other.iv.lo)
        return c < 0 or (c == 0 and self.iv.lo.closed and not other.iv.lo.closed)


_TOKEN = re.compile(r"\s*(alg\([^)]*\)|inf|-?\d+(?:/\d+)?|[\[\](),U])")


def _parse_rational(s: str) -> Fraction:
    try:
        return Fraction(s.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise SetSyntaxError(f"bad rational {s!r}") from exc


def _parse_endpoint(tok: str, closed: bool, lower: bool) -> Endpoint:
    if tok == "inf":
        if lower:
            raise SetSyntaxError("inf cannot be a lower endpoint")
        if closed:
            raise SetSyntaxError("inf endpoint must be open")
        return Endpoint.inf()
    if tok.startswith("alg("):
        body = tok[4:-1]
        if ";" not in body:
            raise SetSyntaxError(f"missing ';' in {tok!r}")
        cs, iso = body.split(";", 1)
        try:
            coeffs = [int(c) for c in cs.split(",")]
        except ValueError as exc:
            raise SetSyntaxError(f"bad coefficients in {tok!r}") from exc
        parts = iso.split(",")
        if len(parts) != 2:
            raise SetSyntaxError(f"isolating interval needs two bounds in {tok!r}")
        try:
            a = AlgebraicNumber.from_poly(IntPolynomial(coeffs), _parse_rational(parts[0]), _parse_rational(parts[1]))
        except ValueError as exc:
            raise SetSyntaxError(str(exc)) from exc
        return Endpoint.at(a, closed)
    q = _parse_rational(tok)
    if q == 0:
        if closed:
            raise SetSyntaxError("0 cannot be a closed endpoint")
        return Endpoint.zero()
    if q < 0:
        raise SetSyntaxError("negative endpoint")
    return Endpoint.at(q, closed)


def parse_set(text: str) -> SemialgebraicSet:
    """Parse ``(1/2,1] U [alg(-2,0,1;1,2), 2)`` style text."""
    toks = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise SetSyntaxError(f"unexpected input at {text[pos:pos + 12]!r}")
        toks.append(m.group(1))
        pos = m.end()
        while pos < len(text) and text[pos].isspace():
            pos += 1
    if not toks:
        return SemialgebraicSet()
    ivs = []
    i = 0
    while True:
        if i + 5 > len(toks):
            raise SetSyntaxError("truncated interval")
        o, a, comma, b, c = toks[i:i + 5]
        if o not in "([" or comma != "," or c not in ")]":
            raise SetSyntaxError(f"malformed interval near {' '.join(toks[i:i + 5])!r}")
        lo = _parse_endpoint(a, o == "[", True)
        hi = _parse_endpoint(b, c == "]", False)
        ivs.append(Interval(lo, hi))
        i += 5
        if i == len(toks):
            break
        if toks[i] != "U":
            raise SetSyntaxError(f"expected 'U', got {toks[i]!r}")
        i += 1
    try:
        return SemialgebraicSet(ivs)
    except ValueError as exc:
        raise SetSyntaxError(str(exc)) from exc


# ---------------------------------------------------------------------------
# decomposition into S-sets


class EndpointType(enum.Enum):
    T1 = 1
    T2 = 2
    T3 = 3
    T4 = 4
    T5 = 5
    T6 = 6


# (left gap in, point in, right gap in) -> type
_PATTERNS = {
    (False, False, True): EndpointType.T1,
    (False, True, False): EndpointType.T2,
    (False, True, True): EndpointType.T3,
    (True, False, False): EndpointType.T4,
    (True, False, True): EndpointType.T5,
    (True, True, False): EndpointType.T6,
}


@dataclass(frozen=True)
class DecompTerm:
    p: IntPolynomial
    L: Fraction
    U: Optional[Fraction]  # None is +inf
    zeta: int

    def to_doc(self) -> dict:
        return {
            "p": list(self.p.coeffs),
            "L": _rat_text(self.L),
            "U": "inf" if self.U is None else _rat_text(self.U),
            "zeta": self.zeta,
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "DecompTerm":
        U = None if doc["U"] == "inf" else Fraction(doc["U"])
        return cls(IntPolynomial(doc["p"]), Fraction(doc["L"]), U, int(doc["zeta"]))


def classify_endpoint(sigma: SemialgebraicSet, rho: AlgebraicNumber,
                      prev: Optional[AlgebraicNumber], nxt: Optional[AlgebraicNumber]) -> EndpointType:
    """``prev``/``nxt`` are the neighbouring endpoints; None stands for 0 / +inf."""
    key = (sigma.contains_open_piece(prev, rho), sigma.contains_point(rho), sigma.contains_open_piece(rho, nxt))
    if key not in _PATTERNS:
        raise NonNormalizedSet(f"endpoint {rho.to_text()} has pattern {key}")
    return _PATTERNS[key]


def build_local_term(t: EndpointType, omega: IntPolynomial, rho: AlgebraicNumber,
                     floor_rho: int) -> tuple[IntPolynomial, int]:
    rising = rho.sign_of(omega.derivative()) > 0
    bump = IntPolynomial([-(floor_rho + 1) ** 2, 0, 1])
    w = omega
    if t == EndpointType.T1:
        return (-(w * bump) if rising else -w), 1
    if t == EndpointType.T2:
        return -(w * w), 0
    if t == EndpointType.T3:
        return (-(w * bump) if rising else -w), 0
    if t == EndpointType.T4:
        return (-w if rising else -(w * bump)), 1
    if t == EndpointType.T5:
        return -(w * w * bump), 1
    return (-w if rising else -(w * bump)), 0


def simplest_rational_between(lo: Fraction, hi: Fraction) -> Fraction:
    """Rational of least denominator strictly inside ``(lo, hi)``."""
    if not lo < hi:
        raise ValueError("empty interval")
    fl = math.floor(lo)
    if fl + 1 < hi:
        return Fraction(fl + 1)
    # both in [fl, fl+1]; recurse on reciprocals of the fractional parts
    a, b = lo - fl, hi - fl
    if a == 0:
        # need (0, b): 1/n with n > 1/b
        return fl + Fraction(1, math.floor(1 / b) + 1)
    inner = simplest_rational_between(1 / b, 1 / a)
    return fl + 1 / inner


def _upper_bound(a: AlgebraicNumber, width: Fraction) -> Fraction:
    return a.refine(width).iso_hi


def _lower_bound(a: AlgebraicNumber, width: Fraction) -> Fraction:
    return a.refine(width).iso_lo


def _pick_inside(lo_bound, hi_bound) -> Fraction:
    """Simplest rational in the middle 80% of ``(lo_bound, hi_bound)``.

    Bounds are AlgebraicNumbers (or rationals); they are refined until they
    separate, then shrunk by a tenth on each side.
    """
    def as_alg(v):
        return v if isinstance(v, AlgebraicNumber) else AlgebraicNumber.rational(v)
    lo_a, hi_a = as_alg(lo_bound), as_alg(hi_bound)
    width = Fraction(1, 4)
    while True:
        lo = _upper_bound(lo_a, width)
        hi = _lower_bound(hi_a, width)
        if lo < hi:
            gap = hi - lo
            return simplest_rational_between(lo + gap / 10, hi - gap / 10)
        width /= 16


def eval_S(term: DecompTerm, x: Rational) -> bool:
    x = Fraction(x)
    if x <= 0:
        raise ValueError("S-sets live in the positive reals")
    if x <= term.L or (term.U is not None and x >= term.U):
        return True
    v = term.p.eval_exact(x)
    return v > 0 if term.zeta else v >= 0


def decompose(sigma: SemialgebraicSet, lam: Rational, upsilon: Rational) -> list[DecompTerm]:
    if sigma.is_empty():
        raise EmptySet("cannot decompose the empty set")
    lam, upsilon = Fraction(lam), Fraction(upsilon)
    if not 0 < lam <= upsilon:
        raise ValueError("need 0 < lambda <= upsilon")
    rhos = sigma.endpoints()
    if not rhos or any(r.compare_rational(lam) < 0 or r.compare_rational(upsilon) > 0 for r in rhos):
        raise ValueError(f"set {sigma.to_text()} is not inside [{lam}, {upsilon}]")
    n = len(rhos)
    terms: list[DecompTerm] = []
    gaps_in: list[bool] = [sigma.contains_open_piece(rhos[i], rhos[i + 1]) for i in range(n - 1)]
    for i, rho in enumerate(rhos):
        prev = rhos[i - 1] if i > 0 else None
        nxt = rhos[i + 1] if i + 1 < n else None
        t = classify_endpoint(sigma, rho, prev, nxt)
        omega = even_minimal_polynomial(rho)
        p, zeta = build_local_term(t, omega, rho, rho.floor())
        lo_nb, hi_nb = _neighbourhood(p, rho, prev, nxt)
        L = _pick_inside(lo_nb, rho)
        U = _pick_inside(rho, hi_nb)
        terms.append(DecompTerm(p, L, U, zeta))
    Ls = [t.L for t in terms]
    Us = [t.U for t in terms]
    gap_poly = [Fraction(1)]

    def times_sq_minus(poly: list, c: Fraction) -> list:
        out = [Fraction(0)] * (len(poly) + 2)
        for k, v in enumerate(poly):
            out[k + 2] += v
            out[k] -= v * c * c
        return out

    gap_poly = times_sq_minus(times_sq_minus(gap_poly, Ls[0]), Us[-1])
    for i in range(n - 1):
        if not gaps_in[i]:
            gap_poly = times_sq_minus(times_sq_minus(gap_poly, Us[i]), Ls[i + 1])
    final = _to_int_poly(gap_poly).primitive()
    terms.append(DecompTerm(-final, Fraction(0), None, 1))
    return terms


def _neighbourhood(p: IntPolynomial, rho: AlgebraicNumber, prev: Optional[AlgebraicNumber],
                   nxt: Optional[AlgebraicNumber]) -> tuple[AlgebraicNumber, AlgebraicNumber]:
    lo = prev if prev is not None else AlgebraicNumber.rational(0)
    hi = nxt
    for r in isolate_real_roots(p):
        c = r.compare(rho)
        if c < 0 and r.compare(lo) > 0:
            lo = r
        elif c > 0 and (hi is None or r.compare(hi) < 0):
            hi = r
    if hi is None:
        hi = AlgebraicNumber.rational(rho.refine(Fraction(1, 4)).iso_hi + 1)
    return lo, hi


def decomposition_contains(terms: Sequence[DecompTerm], x: Rational) -> bool:
    return all(eval_S(t, x) for t in terms)
