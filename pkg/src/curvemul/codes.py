"""Generalized Goppa evaluation codes C(G, D), the degree/vanishing
criterion that makes them intersecting, and brute-force verification of
the intersecting property.

A linear code is *intersecting* when the supports of any two nonzero
codewords meet.  C(G, D) is the image of the twisted evaluation map of
L(D) at the points of G; it is intersecting as soon as deg D < deg G and
l(2D - G) = 0, which the pipeline checks exactly and the test-suite
re-verifies by exhaustive pair scanning.
"""

from __future__ import annotations

from .curves import Curve, Divisor, dim_l, evaluate_generalized, riemann_roch_space
from .ff import element_from_json, element_to_json, rref, solve_linear

__all__ = [
    "LinearCode",
    "goppa_code",
    "xing_criterion",
    "is_intersecting_bruteforce",
    "IntersectingReport",
    "code_to_json",
    "code_from_json",
]


class LinearCode:
    """[n, k] linear code given by a full-row-rank generator matrix."""

    def __init__(self, field, generator):
        rows, pivots = rref(generator) if generator else ([], [])
        rows = [r for r in rows if any(r)]
        self.field = field
        self.generator = rows
        self.k = len(rows)
        self.n = len(generator[0]) if generator else 0

    def codeword(self, message):
        F = self.field
        out = [F.zero()] * self.n
        for m, row in zip(message, self.generator):
            if m:
                out = [o + m * r for o, r in zip(out, row)]
        return out

    def contains(self, word) -> bool:
        if self.k == 0:
            return all(not c for c in word)
        cols = [[self.generator[r][c] for r in range(self.k)] for c in range(self.n)]
        res = solve_linear(cols, list(word))
        return res.consistent

    def __repr__(self):
        return f"LinearCode[{self.n},{self.k}]({self.field.name})"


def goppa_code(curve: Curve, G_points, D: Divisor) -> LinearCode:
    """Image of the twisted evaluation of L(D) at pairwise distinct
    rational points, z_i^(v_i) f evaluated with v_i = v_{P_i}(D)."""
    if len(set(G_points)) != len(G_points):
        raise ValueError("evaluation points must be pairwise distinct")
    if any(P.degree != 1 for P in G_points):
        raise ValueError("evaluation points must be rational")
    rr = riemann_roch_space(curve, D)
    rows = []
    for f in rr.basis:
        rows.append([evaluate_generalized(f, P, D.multiplicity(P)) for P in G_points])
    if not rows:
        return LinearCode(curve.field, [[curve.field.zero()] * len(G_points)])
    return LinearCode(curve.field, rows)


def xing_criterion(curve: Curve, G_points, D: Divisor) -> bool:
    """deg D < n and l(2D - G) = 0: then C(G, D) is intersecting with
    dimension l(D)."""
    n = len(G_points)
    if D.degree >= n:
        return False
    G = Divisor(curve, [(P, 1) for P in G_points])
    return dim_l(curve, 2 * D - G) == 0


class IntersectingReport:
    __slots__ = ("intersecting", "counterexample", "pairs_checked", "exhaustive")

    def __init__(self, intersecting, counterexample, pairs_checked, exhaustive):
        self.intersecting = intersecting
        self.counterexample = counterexample
        self.pairs_checked = pairs_checked
        self.exhaustive = exhaustive

    def __bool__(self):
        return self.intersecting


def _projective_codewords(code: LinearCode):
    # one codeword per projective message class (support is scale invariant)
    F = code.field
    q = F.order
    k = code.k
    for lead in range(k):
        tail = k - lead - 1
        for idx in range(q ** tail):
            msg = [F.zero()] * lead + [F.one()]
            t = idx
            for _ in range(tail):
                msg.append(F(t % q))
                t //= q
            yield code.codeword(msg)


def is_intersecting_bruteforce(code: LinearCode, pair_limit: int = 2_000_000,
                               sample_pairs: int = 0, seed: int = 0) -> IntersectingReport:
    """Check every pair of projective codewords for disjoint supports.

    Beyond pair_limit pairs the check raises unless a sampled fallback is
    requested with sample_pairs > 0; the report then says it was not
    exhaustive.
    """
    q = code.field.order
    n_proj = (q ** code.k - 1) // (q - 1) if code.k else 0
    total_pairs = n_proj * (n_proj + 1) // 2
    if total_pairs > pair_limit:
        if not sample_pairs:
            raise ValueError(
                f"{total_pairs} projective pairs exceed the limit {pair_limit}; "
                "pass sample_pairs for a non-exhaustive check")
        import random
        rng = random.Random(seed)
        Fq = code.field
        checked = 0
        for _ in range(sample_pairs):
            m1 = [Fq(rng.randrange(q)) for _ in range(code.k)]
            m2 = [Fq(rng.randrange(q)) for _ in range(code.k)]
            c1, c2 = code.codeword(m1), code.codeword(m2)
            if any(c1) and any(c2):
                checked += 1
                if not _supports_meet(c1, c2):
                    return IntersectingReport(False, (c1, c2), checked, False)
        return IntersectingReport(True, None, checked, False)
    masks = []
    words = []
    for cw in _projective_codewords(code):
        mask = 0
        for i, c in enumerate(cw):
            if c:
                mask |= 1 << i
        masks.append(mask)
        words.append(cw)
    checked = 0
    for i in range(len(masks)):
        for j in range(i, len(masks)):
            checked += 1
            if not masks[i] & masks[j]:
                return IntersectingReport(False, (words[i], words[j]), checked, True)
    return IntersectingReport(True, None, checked, True)


def _supports_meet(c1, c2) -> bool:
    return any(a and b for a, b in zip(c1, c2))


def code_to_json(code: LinearCode) -> dict:
    from .ff import field_to_json
    return {
        "format": "linear-code-v1",
        "n": code.n,
        "k": code.k,
        "field": field_to_json(code.field),
        "generator": [[element_to_json(c) for c in row] for row in code.generator],
    }


def code_from_json(obj: dict) -> LinearCode:
    from .ff import field_from_json
    F = field_from_json(obj["field"])
    gen = [[element_from_json(F, c) for c in row] for row in obj["generator"]]
    if not gen:
        raise ValueError("empty generator")
    return LinearCode(F, gen)
