"""Step-counting bound functions on low-genus curves, the ordinary /
exceptional divisor classification, and the greedy construction of a
divisor D of prescribed degree keeping every s_i*D - T_i ordinary.

A divisor A on a genus-g curve is *ordinary* when
l(A) = max(0, deg A + 1 - g), *exceptional* otherwise.  The greedy
construction grows D one rational point at a time; at each step the number
of points that would break constraint i is at most f_{s_i}(deg(s_i D - T_i)),
so a pool larger than the sum of those bounds always leaves a good point.

All bound values are exact (ints / fractions), never floats.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .curves import Curve, Divisor, canonical_divisor, dim_l, riemann_roch_space

__all__ = [
    "Constraint",
    "SignedConstraint",
    "gq",
    "gq_sum",
    "gq_closed",
    "f1",
    "f2",
    "f2_tilde",
    "phi",
    "is_ordinary",
    "exceptional_step_set",
    "construct_ordinary_divisor",
    "reduce_signed_constraints",
    "PoolTooSmallError",
    "ConstructionContradictionError",
    "InfeasibleWindowError",
]


@dataclass(frozen=True)
class Constraint:
    """Keep s*D - T ordinary while growing D (s is 1 or 2)."""
    s: int
    T: Divisor

    def __post_init__(self):
        if self.s not in (1, 2):
            raise ValueError("step multiplier must be 1 or 2")

    @property
    def t(self) -> int:
        return self.T.degree


@dataclass(frozen=True)
class SignedConstraint:
    """Demand l(k*D - G) = 0, with k in {-2, -1, 1, 2}."""
    k: int
    G: Divisor

    def __post_init__(self):
        if self.k == 0 or abs(self.k) > 2:
            raise ValueError("signed multiplier must be in {-2, -1, 1, 2}")

    @property
    def n(self) -> int:
        return self.G.degree


class PoolTooSmallError(ValueError):
    """The point pool fails the cardinality bound of the construction."""


class ConstructionContradictionError(RuntimeError):
    """No admissible point although the cardinality bound held: a bug."""


class InfeasibleWindowError(ValueError):
    """The admissible degree window for D is empty."""


# -- the q-series bound -------------------------------------------------------


def gq_sum(q: int, n: int) -> Fraction:
    """Summation form: sum over k of (q^(n-k)-1)(q^(n-k-1)-1) /
    ((q^n-1)(q^(n-1)-1)), k = 1 .. n-2."""
    if q < 2 or n < 2:
        raise ValueError("needs q >= 2 and n >= 2")
    den = (q ** n - 1) * (q ** (n - 1) - 1)
    total = Fraction(0)
    for k in range(1, n - 1):
        total += Fraction((q ** (n - k) - 1) * (q ** (n - k - 1) - 1), den)
    return total


def gq_closed(q: int, n: int) -> Fraction:
    """Closed form: 1/(q^2-1) - (1 - (q-1)n/(q^n-1)) / ((q-1)(q^(n-1)-1))."""
    if q < 2 or n < 2:
        raise ValueError("needs q >= 2 and n >= 2")
    head = Fraction(1, q * q - 1)
    tail = (1 - Fraction((q - 1) * n, q ** n - 1)) / ((q - 1) * (q ** (n - 1) - 1))
    return head - tail


gq = gq_closed


# -- step-counting bounds f_1, f_2 -------------------------------------------


def f1(g: int, a: int) -> int:
    """Bound on points P with A + P exceptional, A ordinary of degree a."""
    if g < 1:
        raise ValueError("needs genus >= 1")
    if a == -1:
        return 1
    if 0 <= a <= g - 2:
        return g
    return 0


def f2_tilde(g: int, a: int, w: int, q: int, n1: int) -> Fraction:
    """The pre-floor minimand of f2's finite-field branch at window w."""
    factor = 1 / (1 + Fraction(q ** (w - 2) - 1, q ** w - 1))
    return (g - 1 - a - w) + factor * (2 * g - 2 + 2 * a + 4 * w - 2 * gq(q, w) * n1)


def f2(g: int, a: int, q=None, n1=None) -> int:
    """Bound on points P with A + 2P exceptional, A ordinary of degree a.

    q is the field size for the finite-field branch (then n1, the number of
    rational points of the curve, is required); q=None selects the
    infinite-field branch 3g + 3 + a.
    """
    if g < 1:
        raise ValueError("needs genus >= 1")
    if a < -2 or a > g - 2:
        return 0
    if a == g - 2:
        return g
    if q is None:
        return 3 * g + 3 + a
    if n1 is None:
        raise ValueError("the finite-field branch needs the rational point count n1")
    best = None
    for w in range(2, g - a):
        val = f2_tilde(g, a, w, q, n1)
        fl = val.numerator // val.denominator
        if best is None or fl < best:
            best = fl
    return best


def phi(s: int, nu: Fraction, alpha: Fraction, q=None) -> Fraction:
    """Asymptotic step-density bound: the limit of f_{s}(a)/g along curve
    families with a/g -> alpha and at least nu*g rational points."""
    alpha = Fraction(alpha)
    nu = Fraction(nu)
    if s == 1:
        return Fraction(1) if 0 <= alpha <= 1 else Fraction(0)
    if s != 2:
        raise ValueError("s must be 1 or 2")
    if alpha < 0 or alpha > 1:
        return Fraction(0)
    if alpha == 1:
        return Fraction(4)
    if q is None:
        return 3 + alpha
    q2 = q * q
    return (Fraction(3 * q2 + 1, q2 + 1) + Fraction(q2 - 1, q2 + 1) * alpha
            - Fraction(2 * q2, q2 * q2 - 1) * nu)


# -- classification -----------------------------------------------------------


def expected_l(curve: Curve, D: Divisor) -> int:
    return max(0, D.degree + 1 - curve.genus)


def is_ordinary(curve: Curve, A: Divisor) -> bool:
    """l(A) == max(0, deg A + 1 - g).  Genus 0 is always ordinary (and the
    equality genuinely holds there, so no special casing is needed beyond
    skipping the computation)."""
    if curve.genus == 0:
        return True
    return dim_l(curve, A) == expected_l(curve, A)


def exceptional_step_set(curve: Curve, A: Divisor, s: int, pool) -> set:
    """The points P of the pool for which A + sP is exceptional.

    For ordinary A its size is bounded by f_{s}(deg A); that bound is what
    the greedy construction consumes.
    """
    if s not in (1, 2):
        raise ValueError("s must be 1 or 2")
    if curve.genus == 0:
        return set()
    bad = set()
    for P in pool:
        step = A + Divisor.of_point(P, s)
        if dim_l(curve, step) != expected_l(curve, step):
            bad.add(P)
    return bad


def _f_bound(curve: Curve, s: int, a: int) -> int:
    if curve.genus == 0:
        return 0
    if s == 1:
        return f1(curve.genus, a)
    return f2(curve.genus, a, curve.field.order, curve.n_rational())


def construct_ordinary_divisor(curve: Curve, constraints, d: int, D0: Divisor,
                               pool) -> Divisor:
    """Grow D0 to degree d, one pool point at a time, keeping every
    s_i*D - T_i ordinary.

    Preconditions: deg D0 <= d, every s_i*D0 - T_i ordinary, and the pool
    beats the worst per-step bound sum.  The pool is scanned in canonical
    order and the first admissible point is taken (repeats allowed), so the
    result is deterministic.
    """
    constraints = list(constraints)
    pool = sorted(set(pool), key=lambda P: P._skey)
    if any(P.degree != 1 for P in pool):
        raise ValueError("the pool must consist of rational points")
    d0 = D0.degree
    if d0 > d:
        raise ValueError(f"deg D0 = {d0} exceeds the target degree {d}")
    for c in constraints:
        A = c.s * D0 - c.T
        if not is_ordinary(curve, A):
            raise ValueError(f"s*D0 - T is not ordinary for {c}")
    if d > d0:
        worst = max(sum(_f_bound(curve, c.s, c.s * dp - c.t) for c in constraints)
                    for dp in range(d0, d))
        if len(pool) <= worst:
            raise PoolTooSmallError(
                f"pool of {len(pool)} points does not beat the step bound {worst}")
    D = D0
    for _step in range(d - d0):
        chosen = None
        for P in pool:
            cand = D + Divisor.of_point(P, 1)
            if all(is_ordinary(curve, c.s * cand - c.T) for c in constraints):
                chosen = P
                break
        if chosen is None:
            raise ConstructionContradictionError(
                "no admissible point despite the cardinality bound")
        D = D + Divisor.of_point(chosen, 1)
    return D


# -- reduction of signed constraints ------------------------------------------


def _ceil_div(a: int, b: int) -> int:
    return -((-a) // b)


def reduce_signed_constraints(curve: Curve, signed):
    """Turn l(k_i D - G_i) = 0 demands into ordinarity constraints plus the
    admissible degree window [d_minus, d_plus].

    k > 0 keeps T = G; k < 0 flips to s = -k with T = -K - G for a
    canonical divisor K.  A degree-d solution of the ordinarity problem
    with d in the window satisfies all the original vanishing demands.
    The window ends are None when unbounded.
    """
    signed = list(signed)
    if not signed:
        raise ValueError("no constraints")
    g = curve.genus
    K = canonical_divisor(curve)
    constraints = []
    d_minus = None
    d_plus = None
    for sc in signed:
        k, G, n = sc.k, sc.G, sc.n
        if k > 0:
            constraints.append(Constraint(k, G))
            cap = (g - 1 + n) // k
            d_plus = cap if d_plus is None else min(d_plus, cap)
        else:
            constraints.append(Constraint(-k, -1 * K - G))
            floor_ = _ceil_div(g - 1 + n, k)
            d_minus = floor_ if d_minus is None else max(d_minus, floor_)
    if d_minus is not None and d_plus is not None and d_minus > d_plus:
        raise InfeasibleWindowError(
            f"empty degree window: d- = {d_minus} > d+ = {d_plus}")
    return constraints, d_minus, d_plus
