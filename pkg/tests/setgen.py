"""Random normalized subsets of [1/2, 2] for round-trip checks."""

from __future__ import annotations

import math
import random
from fractions import Fraction


def _quadratic(rng: random.Random) -> tuple[str, float]:
    # sqrt(a/b) with a/b not a rational square
    while True:
        b = rng.randint(1, 9)
        a = rng.randint(b // 4 + 1, 4 * b - 1)
        if math.isqrt(a * b) ** 2 != a * b:
            v = math.sqrt(a / b)
            lo, hi = Fraction(v).limit_denominator(10**4) - Fraction(1, 10**3), Fraction(v).limit_denominator(10**4) + Fraction(1, 10**3)
            return f"alg({-a},0,{b};{lo},{hi})", v


def _rational(rng: random.Random) -> tuple[str, float]:
    q = Fraction(rng.randint(51, 199), 100)
    return str(q), float(q)


def random_set_text(rng: random.Random, max_pieces: int = 3) -> str:
    pts: list[tuple[str, float]] = []
    want = 2 * rng.randint(1, max_pieces)
    while len(pts) < want:
        tok, v = (_quadratic if rng.random() < 0.5 else _rational)(rng)
        if 0.5 <= v <= 2 and all(abs(v - w) > 1e-2 for _, w in pts):
            pts.append((tok, v))
    pts.sort(key=lambda t: t[1])
    pieces = []
    for i in range(0, want, 2):
        (a, _), (b, _) = pts[i], pts[i + 1]
        if rng.random() < 0.15:
            pieces.append(f"[{a},{a}]")
            continue
        pieces.append(f"{rng.choice('([')}{a},{b}{rng.choice(')]')}")
    return " U ".join(pieces)
