"""Function fields of the projective line and of elliptic curves in
Weierstrass form: closed points, divisors, valuations, principal divisors,
Riemann-Roch bases, canonical divisors, and generalized (uniformizer
twisted) evaluation maps.

Everything is exact and deterministic.  Local behaviour at a point is
computed through truncated Laurent expansions in the canonical uniformizer:

* P^1: z = x - a at a finite rational point, z = pi(x) at a higher-degree
  point with minimal polynomial pi, z = 1/x at infinity.
* elliptic: z = x - x_P when P is not 2-torsion, z = y - y_P at affine
  2-torsion points, z = x/y at the origin O.

On an elliptic curve the other coordinate is recovered as a series in z by
Hensel lifting against the Weierstrass equation; the relevant partial
derivative is a unit at the expansion point in every characteristic, so
the lift always applies.
"""

from __future__ import annotations

from .ff import (
    DEG_NEG_INF, FFElement, FiniteField, Poly,
    element_from_json, element_to_json, extend, factor_poly, field_from_json,
    field_to_json, is_ancestor, kernel_basis, lift, poly_from_json, poly_to_json,
)

__all__ = [
    "Curve",
    "ClosedPoint",
    "Divisor",
    "FunctionRep",
    "RiemannRochBasis",
    "enumerate_points",
    "riemann_roch_space",
    "dim_l",
    "valuation",
    "evaluate_generalized",
    "principal_divisor",
    "canonical_divisor",
    "equivalent_disjoint",
    "PoleDeeperThanTwistError",
    "curve_to_json",
    "curve_from_json",
    "point_to_json",
    "point_from_json",
    "divisor_to_json",
    "divisor_from_json",
    "function_to_json",
    "function_from_json",
]

PROJECTIVE_LINE = "projective-line"
ELLIPTIC = "elliptic"

_BIG = 10 ** 9  # valuation of the zero polynomial part


class PoleDeeperThanTwistError(ValueError):
    """f has a deeper pole at P than the requested uniformizer twist."""


class Curve:
    """Genus-0 projective line or genus-1 elliptic curve over F_q."""

    __slots__ = ("field", "kind", "genus", "a1", "a2", "a3", "a4", "a6",
                 "_key", "_rational", "_by_degree", "_as_table")

    def __init__(self, field, kind, coeffs=None):
        self.field = field
        self.kind = kind
        self._rational = None
        self._by_degree = {}
        self._as_table = None
        if kind == PROJECTIVE_LINE:
            self.genus = 0
            self.a1 = self.a2 = self.a3 = self.a4 = self.a6 = None
            self._key = (field._key, kind)
        elif kind == ELLIPTIC:
            self.genus = 1
            self.a1, self.a2, self.a3, self.a4, self.a6 = [field(c) for c in coeffs]
            if not self.discriminant():
                raise ValueError("singular Weierstrass equation (discriminant 0)")
            self._key = (field._key, kind, tuple(c.idx for c in
                                                 (self.a1, self.a2, self.a3, self.a4, self.a6)))
        else:
            raise ValueError(f"unknown curve kind {kind!r}")

    @classmethod
    def projective_line(cls, field):
        return cls(field, PROJECTIVE_LINE)

    @classmethod
    def elliptic(cls, field, a1, a2, a3, a4, a6):
        return cls(field, ELLIPTIC, (a1, a2, a3, a4, a6))

    def discriminant(self) -> FFElement:
        a1, a2, a3, a4, a6 = self.a1, self.a2, self.a3, self.a4, self.a6
        b2 = a1 * a1 + 4 * a2
        b4 = 2 * a4 + a1 * a3
        b6 = a3 * a3 + 4 * a6
        b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
        return -b2 * b2 * b8 - 8 * b4 ** 3 - 27 * b6 * b6 + 9 * b2 * b4 * b6

    def __eq__(self, other):
        return isinstance(other, Curve) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        if self.kind == PROJECTIVE_LINE:
            return f"P1({self.field.name})"
        co = ",".join(str(c.idx) for c in (self.a1, self.a2, self.a3, self.a4, self.a6))
        return f"E[{co}]({self.field.name})"

    # -- points -----------------------------------------------------------

    def infinity(self) -> "ClosedPoint":
        """The point at infinity on P^1, or the origin O on an elliptic curve."""
        return ClosedPoint(self, "inf", 1, None)

    def rational_points(self):
        if self._rational is None:
            self._rational = enumerate_points(self, 1)
        return list(self._rational)

    def n_rational(self) -> int:
        if self._rational is None:
            self.rational_points()
        return len(self._rational)

    def residue_field(self, k: int) -> FiniteField:
        return self.field if k == 1 else extend(self.field, k)

    def rhs_at(self, x: FFElement) -> FFElement:
        """x^3 + a2 x^2 + a4 x + a6, coefficients lifted into x's field."""
        E = x.field
        a2, a4, a6 = lift(E, self.a2), lift(E, self.a4), lift(E, self.a6)
        return ((x + a2) * x + a4) * x + a6

    def _artin_schreier(self, E: FiniteField):
        # smallest u with u^2 + u = t; used for char-2 point solving
        if self._as_table is None:
            self._as_table = {}
        tab = self._as_table.get(E._key)
        if tab is None:
            tab = {}
            for i in range(E.order):
                u = FFElement(E, i)
                t = (u * u + u).idx
                if t not in tab:
                    tab[t] = i
            self._as_table[E._key] = tab
        return tab

    def y_solutions(self, x: FFElement):
        """All y in x's field with (x, y) on the curve, sorted by index."""
        E = x.field
        B = lift(E, self.a1) * x + lift(E, self.a3)
        C = self.rhs_at(x)
        if self.field.p == 2:
            if not B:
                return [C ** (E.order // 2)]  # y^2 = C, single root
            u2 = C / (B * B)
            hit = self._artin_schreier(E).get(u2.idx)
            if hit is None:
                return []
            u = FFElement(E, hit)
            ys = [B * u, B * (u + E.one())]
        else:
            disc = B * B + 4 * C
            s = E.sqrt_idx(disc.idx)
            if s is None:
                return []
            root = FFElement(E, s)
            inv2 = (E.one() + E.one()).inv()
            ys = [(-B + root) * inv2]
            if root:
                ys.append((-B - root) * inv2)
        return sorted(set(ys), key=lambda e: e.idx)

    # -- group law --------------------------------------------------------
    # raw points are "O" or coordinate pairs over a common field

    def raw_neg(self, pt):
        if pt == "O":
            return "O"
        x, y = pt
        E = x.field
        return (x, -y - lift(E, self.a1) * x - lift(E, self.a3))

    def raw_add(self, p1, p2):
        if p1 == "O":
            return p2
        if p2 == "O":
            return p1
        x1, y1 = p1
        x2, y2 = p2
        E = x1.field
        a1, a2, a3, a4 = (lift(E, self.a1), lift(E, self.a2),
                          lift(E, self.a3), lift(E, self.a4))
        if x1 == x2:
            if y2 == -y1 - a1 * x1 - a3:
                return "O"
            lam = (3 * x1 * x1 + 2 * a2 * x1 + a4 - a1 * y1) / (2 * y1 + a1 * x1 + a3)
        else:
            lam = (y2 - y1) / (x2 - x1)
        nu = y1 - lam * x1
        x3 = lam * lam + a1 * lam - a2 - x1 - x2
        y3 = -(lam + a1) * x3 - nu - a3
        return (x3, y3)

    def raw_mul(self, n: int, pt):
        if n < 0:
            return self.raw_mul(-n, self.raw_neg(pt))
        acc = "O"
        add = pt
        while n:
            if n & 1:
                acc = self.raw_add(acc, add)
            add = self.raw_add(add, add)
            n >>= 1
        return acc

    def add_points(self, P: "ClosedPoint", Q: "ClosedPoint") -> "ClosedPoint":
        return self._from_raw(self.raw_add(self._as_raw(P), self._as_raw(Q)))

    def neg_point(self, P: "ClosedPoint") -> "ClosedPoint":
        return self._from_raw(self.raw_neg(self._as_raw(P)))

    def mul_point(self, n: int, P: "ClosedPoint") -> "ClosedPoint":
        return self._from_raw(self.raw_mul(n, self._as_raw(P)))

    def _as_raw(self, P: "ClosedPoint"):
        if P.kind == "inf":
            return "O"
        if P.degree != 1:
            raise ValueError("group law wants a rational point")
        return P.data

    def _from_raw(self, raw) -> "ClosedPoint":
        if raw == "O":
            return self.infinity()
        return ClosedPoint.elliptic_affine(self, raw[0], raw[1])

    def trace_to_rational(self, P: "ClosedPoint") -> "ClosedPoint":
        """Group-law sum of the Galois orbit of P; always a rational point."""
        if P.kind == "inf":
            return self.infinity()
        x, y = P.data
        q = self.field.order
        acc = "O"
        for _ in range(P.degree):
            acc = self.raw_add(acc, (x, y))
            x, y = x ** q, y ** q
        if acc == "O":
            return self.infinity()
        xa, ya = acc
        F = self.field
        if xa.idx >= F.order or ya.idx >= F.order:  # pragma: no cover
            raise RuntimeError("orbit trace did not land in the base field")
        return ClosedPoint.elliptic_affine(self, FFElement(F, xa.idx), FFElement(F, ya.idx))


class ClosedPoint:
    """A Galois orbit of geometric points, canonicalized and orderable.

    `data` is None for the infinite point, a rational x-coordinate (P^1,
    degree 1), a monic irreducible minimal polynomial (P^1, degree >= 2),
    or the orbit's smallest representative coordinate pair in the canonical
    residue field (elliptic affine).
    """

    __slots__ = ("curve", "kind", "degree", "data", "_skey")

    def __init__(self, curve, kind, degree, data):
        self.curve = curve
        self.kind = kind
        self.degree = degree
        self.data = data
        if kind == "inf":
            self._skey = (0,)
        elif kind == "p1_rational":
            self._skey = (1, 1, data.idx)
        elif kind == "p1_poly":
            q = curve.field.order
            tag = 0
            for c in reversed(data.co[:-1]):
                tag = tag * q + c.idx
            self._skey = (1, degree, tag)
        elif kind == "ell_affine":
            self._skey = (1, degree, data[0].idx, data[1].idx)
        else:
            raise ValueError(f"bad point kind {kind!r}")

    @classmethod
    def p1_rational(cls, curve, a):
        return cls(curve, "p1_rational", 1, curve.field(a))

    @classmethod
    def p1_from_minpoly(cls, curve, pi: Poly):
        if pi.degree == 1:
            pi = pi.monic()
            return cls.p1_rational(curve, -pi.co[0])
        return cls(curve, "p1_poly", pi.degree, pi.monic())

    @classmethod
    def elliptic_affine(cls, curve, x: FFElement, y: FFElement):
        q = curve.field.order
        orbit = []
        cx, cy = x, y
        while True:
            orbit.append((cx, cy))
            cx, cy = cx ** q, cy ** q
            if (cx, cy) == (x, y):
                break
        rep = min(orbit, key=lambda t: (t[0].idx, t[1].idx))
        deg = len(orbit)
        expected = curve.residue_field(deg)
        if rep[0].field != expected:
            rep = _recoordinate(curve, rep, deg)
        return cls(curve, "ell_affine", deg, rep)

    def is_infinite(self) -> bool:
        return self.kind == "inf"

    def is_two_torsion(self) -> bool:
        """Affine elliptic point equal to its own negative."""
        if self.kind != "ell_affine":
            return False
        x, y = self.data
        E = x.field
        c = self.curve
        return not (2 * y + lift(E, c.a1) * x + lift(E, c.a3))

    def min_poly(self) -> Poly:
        """Minimal polynomial over F_q of the x-coordinate (finite points)."""
        F = self.curve.field
        if self.kind == "p1_rational":
            return Poly(F, [-self.data, F.one()])
        if self.kind == "p1_poly":
            return self.data
        if self.kind == "ell_affine":
            return _minpoly_over_base(F, self.data[0])
        raise ValueError("the infinite point has no x-minimal polynomial")

    def uniformizer_label(self) -> str:
        c = self.curve
        if c.kind == PROJECTIVE_LINE:
            if self.kind == "inf":
                return "1/x"
            if self.kind == "p1_rational":
                return f"x - {self.data.idx}"
            return "minpoly(x)"
        if self.kind == "inf":
            return "x/y"
        if self.is_two_torsion():
            return "y - y(P)"
        return "x - x(P)"

    def __eq__(self, other):
        return (isinstance(other, ClosedPoint) and self.curve == other.curve
                and self._skey == other._skey)

    def __hash__(self):
        return hash((self.curve._key, self._skey))

    def __lt__(self, other):
        return self._skey < other._skey

    def __repr__(self):
        if self.kind == "inf":
            return "Pt(inf)" if self.curve.kind == PROJECTIVE_LINE else "Pt(O)"
        if self.kind == "p1_rational":
            return f"Pt(x={self.data.idx})"
        if self.kind == "p1_poly":
            return f"Pt(deg{self.degree}:{[c.idx for c in self.data.co]})"
        return f"Pt({self.data[0].idx},{self.data[1].idx};deg{self.degree})"


def _minpoly_over_base(F: FiniteField, x: FFElement) -> Poly:
    conj = []
    cx = x
    while True:
        if cx not in conj:
            conj.append(cx)
        cx = cx ** F.order
        if cx == x:
            break
    E = x.field
    prod = Poly.constant(E, 1)
    xE = Poly.x(E)
    for r in conj:
        prod = prod * (xE - Poly.constant(E, r))
    coeffs = []
    for c in prod.co:
        if c.idx >= F.order:  # pragma: no cover
            raise RuntimeError("minimal polynomial escaped the base field")
        coeffs.append(FFElement(F, c.idx))
    return Poly(F, coeffs)


def _recoordinate(curve, rep, deg):
    # re-express an orbit representative in the canonical field of its degree
    E = curve.residue_field(deg)
    pi = _minpoly_over_base(curve.field, rep[0])
    best = None
    for cand in E.elements():
        if pi(cand):
            continue
        for y in curve.y_solutions(cand):
            if _exact_degree(curve, cand, y) != deg:
                continue
            key = (cand.idx, y.idx)
            if best is None or key < best:
                best = key
    if best is None:  # pragma: no cover
        raise RuntimeError("could not recoordinate orbit representative")
    return (FFElement(E, best[0]), FFElement(E, best[1]))


def _exact_degree(curve, x, y):
    q = curve.field.order
    d = 1
    cx, cy = x ** q, y ** q
    while (cx, cy) != (x, y):
        cx, cy = cx ** q, cy ** q
        d += 1
    return d


class Divisor:
    """Finite formal sum of closed points with nonzero integer weights."""

    __slots__ = ("curve", "_d")

    def __init__(self, curve, data=None):
        self.curve = curve
        d = {}
        if data:
            for P, m in (data.items() if isinstance(data, dict) else data):
                if m:
                    d[P] = d.get(P, 0) + m
                    if not d[P]:
                        del d[P]
        self._d = d

    @classmethod
    def of_point(cls, P: ClosedPoint, m: int = 1):
        return cls(P.curve, [(P, m)])

    def items(self):
        return sorted(self._d.items(), key=lambda t: t[0]._skey)

    def support(self):
        return [P for P, _ in self.items()]

    def multiplicity(self, P: ClosedPoint) -> int:
        return self._d.get(P, 0)

    @property
    def degree(self) -> int:
        return sum(m * P.degree for P, m in self._d.items())

    def is_effective(self) -> bool:
        return all(m > 0 for m in self._d.values())

    def __add__(self, other):
        out = dict(self._d)
        for P, m in other._d.items():
            out[P] = out.get(P, 0) + m
        return Divisor(self.curve, out)

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return Divisor(self.curve, {P: -m for P, m in self._d.items()})

    def __rmul__(self, n: int):
        return Divisor(self.curve, {P: n * m for P, m in self._d.items()})

    __mul__ = __rmul__

    def __bool__(self):
        return bool(self._d)

    def __eq__(self, other):
        return (isinstance(other, Divisor) and self.curve == other.curve
                and self._d == other._d)

    def __hash__(self):
        return hash((self.curve._key, tuple((P._skey, m) for P, m in self.items())))

    def __ge__(self, other):
        return (self - other).is_effective()

    def __repr__(self):
        if not self._d:
            return "Div(0)"
        return "Div(" + " ".join(f"{m}*{P!r}" for P, m in self.items()) + ")"


class FunctionRep:
    """u(x)/den(x) on P^1, or (u(x) + v(x)*y)/den(x) on an elliptic curve.

    Representations are reduced (common polynomial factor removed) and the
    denominator is monic.
    """

    __slots__ = ("curve", "u", "v", "den")

    def __init__(self, curve, u: Poly, v=None, den=None):
        F = curve.field
        if den is None:
            den = Poly.constant(F, 1)
        if v is None:
            v = Poly(F, [])
        if not den:
            raise ZeroDivisionError("zero denominator")
        if curve.kind == PROJECTIVE_LINE and v:
            raise ValueError("P^1 functions have no y part")
        g = u.gcd(v).gcd(den)
        if g.degree not in (DEG_NEG_INF, 0):
            u, v, den = u // g, v // g, den // g
        lc = den.co[-1]
        if lc != F.one():
            inv = lc.inv()
            u, v, den = u * inv, v * inv, den.monic()
        self.curve = curve
        self.u = u
        self.v = v
        self.den = den

    @classmethod
    def constant(cls, curve, c):
        return cls(curve, Poly.constant(curve.field, c))

    @classmethod
    def x(cls, curve):
        return cls(curve, Poly.x(curve.field))

    @classmethod
    def y(cls, curve):
        F = curve.field
        return cls(curve, Poly(F, []), Poly.constant(F, 1))

    def is_zero(self) -> bool:
        return not self.u and not self.v

    def __mul__(self, other):
        c = self.curve
        if c.kind == PROJECTIVE_LINE:
            return FunctionRep(c, self.u * other.u, None, self.den * other.den)
        F = c.field
        # y^2 = -(a1 x + a3) y + rhs(x)
        rhs = Poly(F, [c.a6, c.a4, c.a2, F.one()])
        ylin = Poly(F, [c.a3, c.a1])
        u = self.u * other.u + self.v * other.v * rhs
        v = self.u * other.v + self.v * other.u - self.v * other.v * ylin
        return FunctionRep(c, u, v, self.den * other.den)

    def __add__(self, other):
        c = self.curve
        v = None
        if c.kind == ELLIPTIC:
            v = self.v * other.den + other.v * self.den
        return FunctionRep(c, self.u * other.den + other.u * self.den, v,
                           self.den * other.den)

    def __eq__(self, other):
        return (isinstance(other, FunctionRep) and self.curve == other.curve
                and self.u == other.u and self.v == other.v and self.den == other.den)

    def __hash__(self):
        return hash((self.curve._key, self.u, self.v, self.den))

    def __repr__(self):
        def fmt(p):
            return "+".join(f"{c.idx}x^{i}" for i, c in enumerate(p.co) if c) or "0"
        if self.curve.kind == PROJECTIVE_LINE:
            return f"Fn(({fmt(self.u)})/({fmt(self.den)}))"
        return f"Fn(({fmt(self.u)} + ({fmt(self.v)})y)/({fmt(self.den)}))"


class RiemannRochBasis:
    """A divisor, an explicit basis of L(D), and dim L(D)."""

    __slots__ = ("divisor", "basis", "dimension")

    def __init__(self, divisor, basis):
        self.divisor = divisor
        self.basis = basis
        self.dimension = len(basis)

    def __repr__(self):
        return f"RR(dim={self.dimension}, D={self.divisor!r})"


# -- truncated Laurent series -------------------------------------------
# A series is a pair (val, [c0, c1, ...]): sum of c_i z^(val+i) with the
# tail O(z^(val+len)) unknown.  Windows shrink under addition of terms with
# different valuations; callers retry at higher precision when a needed
# coefficient falls outside the window.


class _PrecisionLoss(Exception):
    pass


def _s_normalize(s):
    val, co = s
    i = 0
    while i < len(co) and not co[i]:
        i += 1
    if i == len(co):
        raise _PrecisionLoss()
    return (val + i, co[i:])


def _s_add(F, a, b):
    va, ca = a
    vb, cb = b
    v = min(va, vb)
    end = min(va + len(ca), vb + len(cb))
    n = max(0, end - v)
    out = [F.zero()] * n
    for i, c in enumerate(ca):
        j = va + i - v
        if 0 <= j < n:
            out[j] = out[j] + c
    for i, c in enumerate(cb):
        j = vb + i - v
        if 0 <= j < n:
            out[j] = out[j] + c
    return (v, out)


def _s_mul(F, a, b):
    va, ca = a
    vb, cb = b
    n = min(len(ca), len(cb))
    if n == 0:
        return (va + vb, [])
    out = [F.zero()] * n
    for i in range(n):
        x = ca[i]
        if not x:
            continue
        for j in range(n - i):
            y = cb[j]
            if y:
                out[i + j] = out[i + j] + x * y
    return (va + vb, out)


def _s_scalar(c, a):
    return (a[0], [c * t for t in a[1]])


def _s_inv(F, a):
    val, co = _s_normalize(a)
    n = len(co)
    lead = co[0].inv()
    out = [F.zero()] * n
    out[0] = lead
    for i in range(1, n):
        acc = F.zero()
        for j in range(1, i + 1):
            acc = acc + co[j] * out[i - j]
        out[i] = -lead * acc
    return (-val, out)


def _s_const(F, c, prec, val=0):
    co = [F.zero()] * prec
    if prec:
        co[0] = c if isinstance(c, FFElement) else F(c)
    return (val, co)


def _poly_at_series(poly: Poly, xs, E: FiniteField, prec: int):
    """Evaluate a base-field polynomial on a series over E (Horner)."""
    if not poly.co:
        return _s_const(E, E.zero(), prec)
    acc = _s_const(E, lift(E, poly.co[-1]), prec)
    for c in reversed(poly.co[:-1]):
        acc = _s_mul(E, acc, xs)
        acc = _s_add(E, acc, _s_const(E, lift(E, c), prec))
    return acc


def _hensel_root(E, coeff_series, w0, prec):
    """Series w with sum_i coeff_series[i] * w^i = 0 and w(0) = w0.

    Requires the derivative to be a unit at (w0, z=0); Newton iteration
    doubles the correct precision each round.
    """
    nonconst = [(i, cs) for i, cs in enumerate(coeff_series) if i >= 1]
    w = (0, [w0] + [E.zero()] * (prec - 1))
    for _ in range(max(4, prec.bit_length() + 2)):
        powers = [_s_const(E, E.one(), prec)]
        for _i in range(len(coeff_series) - 1):
            powers.append(_s_mul(E, powers[-1], w))
        Fw = (0, [E.zero()] * prec)
        for i, cs in enumerate(coeff_series):
            Fw = _s_add(E, Fw, _s_mul(E, cs, powers[i]))
        dFw = (0, [E.zero()] * prec)
        for i, cs in nonconst:
            mult = i % E.p
            if mult:
                scale = E.zero()
                for _ in range(mult):
                    scale = scale + E.one()
                dFw = _s_add(E, dFw, _s_scalar(scale, _s_mul(E, cs, powers[i - 1])))
        done = all(not c for c in Fw[1])
        if done:
            break
        step = _s_mul(E, Fw, _s_inv(E, dFw))
        w = _s_add(E, w, _s_scalar(-E.one(), step))
        co = list(w[1])[:prec]
        co += [E.zero()] * (prec - len(co))
        w = (0, co)
    return w


def _local_xy(P: ClosedPoint, prec: int):
    """Laurent expansions of (x, y) in the canonical uniformizer at P.

    Returns (E, xs, ys); E is the residue field and ys is None on P^1.
    """
    c = P.curve
    F = c.field
    prec = max(prec, 8)
    if c.kind == PROJECTIVE_LINE:
        if P.kind == "inf":
            return F, (-1, [F.one()] + [F.zero()] * (prec - 1)), None
        if P.kind == "p1_rational":
            E, xi = F, P.data
        else:
            E = c.residue_field(P.degree)
            xi = _canonical_root(P.data, E)
        if P.degree == 1:
            co = [xi, E.one()] + [E.zero()] * (prec - 2)
            return E, (0, co), None
        # z = pi(x): invert for x(z) by Hensel (pi is separable)
        coeffs = [_s_const(E, lift(E, co_), prec) for co_ in P.data.co]
        coeffs[0] = _s_add(E, coeffs[0], (1, [-E.one()] + [E.zero()] * (prec - 1)))
        xs = _hensel_root(E, coeffs, xi, prec)
        return E, xs, None
    if P.kind == "inf":
        E = F
        one = E.one()
        # x = A/z^2, y = A/z^3 where
        # -A^3 + (1 + a1 z - a2 z^2) A^2 + (a3 z^3 - a4 z^4) A - a6 z^6 = 0
        def ser(pairs):
            co = [E.zero()] * prec
            for exp, coeff in pairs:
                if exp < prec:
                    co[exp] = co[exp] + coeff
            return (0, co)
        coeffs = [
            ser([(6, -c.a6)]),
            ser([(3, c.a3), (4, -c.a4)]),
            ser([(0, one), (1, c.a1), (2, -c.a2)]),
            ser([(0, -one)]),
        ]
        A = _hensel_root(E, coeffs, one, prec)
        return E, (A[0] - 2, list(A[1])), (A[0] - 3, list(A[1]))
    E = c.residue_field(P.degree)
    xi, eta = P.data
    if not P.is_two_torsion():
        # z = x - xi; solve the Weierstrass equation for y(z)
        xs = (0, [xi, E.one()] + [E.zero()] * (prec - 2))
        rhs = _poly_at_series(Poly(F, [c.a6, c.a4, c.a2, F.one()]), xs, E, prec)
        ylin = _poly_at_series(Poly(F, [c.a3, c.a1]), xs, E, prec)
        coeffs = [_s_scalar(-E.one(), rhs), ylin, _s_const(E, E.one(), prec)]
        ys = _hensel_root(E, coeffs, eta, prec)
        return E, xs, ys
    # z = y - eta at a 2-torsion point; solve for x(z)
    ys = (0, [eta, E.one()] + [E.zero()] * (prec - 2))
    y2 = _s_mul(E, ys, ys)
    c0 = _s_add(E, y2, _s_scalar(lift(E, c.a3), ys))
    c0 = _s_add(E, c0, _s_const(E, -lift(E, c.a6), prec))
    c1 = _s_add(E, _s_scalar(lift(E, c.a1), ys), _s_const(E, -lift(E, c.a4), prec))
    coeffs = [c0, c1, _s_const(E, -lift(E, c.a2), prec), _s_const(E, -E.one(), prec)]
    xs = _hensel_root(E, coeffs, xi, prec)
    return E, xs, ys


_ROOT_CACHE: dict = {}


def _canonical_root(pi: Poly, E: FiniteField) -> FFElement:
    key = (pi.field._key, tuple(c.idx for c in pi.co), E._key)
    if key not in _ROOT_CACHE:
        for cand in E.elements():
            if not pi(cand):
                _ROOT_CACHE[key] = cand
                break
        else:
            raise ValueError("polynomial has no root in the residue field")
    return _ROOT_CACHE[key]


def _expand_function(f: FunctionRep, P: ClosedPoint, prec: int):
    E, xs, ys = _local_xy(P, prec)
    num = _poly_at_series(f.u, xs, E, prec)
    if f.v:
        num = _s_add(E, num, _s_mul(E, _poly_at_series(f.v, xs, E, prec), ys))
    den = _poly_at_series(f.den, xs, E, prec)
    return E, _s_mul(E, num, _s_inv(E, den))


def _function_series(f: FunctionRep, P: ClosedPoint, need: int):
    """Expansion whose window reaches past exponent `need`; retries on
    precision loss."""
    if f.is_zero():
        raise ValueError("the zero function has no expansion")
    degs = max(f.u.degree, 0), (max(f.v.degree, 0) if f.v else 0), max(f.den.degree, 0)
    prec = max(8, 2 * (sum(degs) + 3) + abs(need) + 4)
    for _ in range(6):
        try:
            E, ser = _expand_function(f, P, prec)
            val, co = _s_normalize(ser)
            if val + len(co) > need:
                return E, (val, co)
        except _PrecisionLoss:
            pass
        prec *= 2
    raise RuntimeError(f"series precision exhausted expanding {f!r} at {P!r}")


# -- public operations ----------------------------------------------------


def enumerate_points(curve: Curve, k: int):
    """All closed points of exact degree k, in canonical order.

    Degree 1 lists the full rational point set, infinite point first.
    """
    if k < 1:
        raise ValueError("degree must be >= 1")
    cached = curve._by_degree.get(k)
    if cached is not None:
        return list(cached)
    F = curve.field
    pts = []
    if curve.kind == PROJECTIVE_LINE:
        if k == 1:
            pts.append(curve.infinity())
            for a in F.elements():
                pts.append(ClosedPoint.p1_rational(curve, a))
        else:
            q = F.order
            for idx in range(q ** k):
                digs = []
                t = idx
                for _ in range(k):
                    digs.append(t % q)
                    t //= q
                cand = Poly(F, [FFElement(F, d) for d in digs] + [F.one()])
                if cand.is_irreducible():
                    pts.append(ClosedPoint.p1_from_minpoly(curve, cand))
    else:
        if k == 1:
            pts.append(curve.infinity())
        E = curve.residue_field(k)
        seen = set()
        for x in E.elements():
            for y in curve.y_solutions(x):
                if _exact_degree(curve, x, y) != k:
                    continue
                P = ClosedPoint.elliptic_affine(curve, x, y)
                if P not in seen:
                    seen.add(P)
                    pts.append(P)
        pts.sort(key=lambda P: P._skey)
    curve._by_degree[k] = list(pts)
    return pts


def canonical_divisor(curve: Curve) -> Divisor:
    """-2(inf) on P^1, the zero divisor on an elliptic curve; degree 2g-2."""
    if curve.kind == PROJECTIVE_LINE:
        return Divisor.of_point(curve.infinity(), -2)
    return Divisor(curve)


def _div_of_irreducible_x(curve: Curve, pi: Poly) -> Divisor:
    """Exact divisor of the function pi(x) on an elliptic curve.

    pi(x) vanishes on one or two closed points: two sheet points of degree
    e = deg(pi), one 2-torsion point counted twice, or a single point of
    degree 2e covering both sheets.
    """
    e = pi.degree
    E = curve.residue_field(e)
    xi = _canonical_root(pi, E)
    ys = curve.y_solutions(xi)
    O = curve.infinity()
    if not ys:
        E2 = curve.residue_field(2 * e)
        xi2 = _canonical_root(pi, E2)
        ys2 = curve.y_solutions(xi2)
        P = ClosedPoint.elliptic_affine(curve, xi2, ys2[0])
        return Divisor(curve, [(P, 1), (O, -2 * e)])
    if len(ys) == 1:
        P = ClosedPoint.elliptic_affine(curve, xi, ys[0])
        return Divisor(curve, [(P, 2), (O, -2 * e)])
    P1 = ClosedPoint.elliptic_affine(curve, xi, ys[0])
    P2 = ClosedPoint.elliptic_affine(curve, xi, ys[1])
    return Divisor(curve, [(P1, 1), (P2, 1), (O, -2 * e)])


def valuation(f: FunctionRep, P: ClosedPoint) -> int:
    """Order of vanishing of f at P (negative for a pole)."""
    if f.is_zero():
        raise ValueError("valuation of the zero function")
    curve = f.curve
    if curve.kind == PROJECTIVE_LINE:
        if P.kind == "inf":
            return f.den.degree - f.u.degree
        pi = P.min_poly()
        return _multiplicity(f.u, pi) - _multiplicity(f.den, pi)
    if P.kind == "inf":
        return _poly_pair_val_at_O(curve, f.u, f.v) - _xpoly_val_at_O(f.den)
    return _poly_pair_valuation(f, P) - _xpoly_valuation(f.den, P)


def _multiplicity(poly: Poly, pi: Poly) -> int:
    if not poly:
        return _BIG
    m = 0
    while True:
        q, r = divmod(poly, pi)
        if r:
            return m
        poly = q
        m += 1


def _xpoly_val_at_O(d: Poly) -> int:
    return -2 * d.degree if d.degree is not DEG_NEG_INF else _BIG


def _xpoly_valuation(d: Poly, P: ClosedPoint) -> int:
    """Valuation at an affine elliptic point of a polynomial in x alone."""
    if d.degree == 0:
        return 0
    m = _multiplicity(d, P.min_poly())
    if m == 0:
        return 0
    # v_P(pi) = 2 exactly at 2-torsion points; a degree-2e point covering
    # both sheets and a plain one-sheet point both give v_P(pi) = 1
    return m * (2 if P.is_two_torsion() else 1)


def _poly_pair_valuation(f: FunctionRep, P: ClosedPoint) -> int:
    g = FunctionRep(f.curve, f.u, f.v if f.v else None)
    _, (val, _) = _function_series(g, P, 0)
    return val


def _poly_pair_val_at_O(curve, u: Poly, v: Poly) -> int:
    vu = -2 * u.degree if u else None
    vv = (-3 - 2 * v.degree) if v else None
    if vu is None:
        return vv if vv is not None else _BIG
    if vv is None:
        return vu
    return min(vu, vv)  # opposite parities, no cancellation


def evaluate_generalized(f: FunctionRep, P: ClosedPoint, nu: int) -> FFElement:
    """(z^nu * f)(P) in the residue field, z the canonical uniformizer at P.

    Requires v_P(f) >= -nu; a deeper pole raises PoleDeeperThanTwistError.
    """
    curve = f.curve
    if f.is_zero():
        return curve.residue_field(P.degree).zero()
    if nu == 0 and P.kind != "inf":
        # plain evaluation when the reduced denominator does not vanish
        if P.kind == "p1_rational":
            xv = P.data
        elif P.kind == "p1_poly":
            xv = _canonical_root(P.data, curve.residue_field(P.degree))
        else:
            xv = P.data[0]
        E = xv.field
        dv = f.den(xv)
        if dv:
            uv = f.u(xv) if f.u else E.zero()
            if f.v:
                uv = uv + f.v(xv) * P.data[1]
            return uv / dv
    E, (val, co) = _function_series(f, P, -nu)
    if val < -nu:
        raise PoleDeeperThanTwistError(
            f"v_P(f) = {val} but the twist only allows poles up to {nu}")
    pos = -nu - val
    return co[pos] if 0 <= pos < len(co) else E.zero()


def principal_divisor(f: FunctionRep) -> Divisor:
    """div(f); always of degree 0."""
    if f.is_zero():
        raise ValueError("the zero function has no divisor")
    curve = f.curve
    F = curve.field
    if curve.kind == PROJECTIVE_LINE:
        parts = {}
        if f.u.degree != 0:
            for pi, m in factor_poly(f.u):
                P = ClosedPoint.p1_from_minpoly(curve, pi)
                parts[P] = parts.get(P, 0) + m
        if f.den.degree != 0:
            for pi, m in factor_poly(f.den):
                P = ClosedPoint.p1_from_minpoly(curve, pi)
                parts[P] = parts.get(P, 0) - m
        deg_fin = sum(m * P.degree for P, m in parts.items())
        inf = curve.infinity()
        parts[inf] = parts.get(inf, 0) - deg_fin
        D = Divisor(curve, parts)
        assert D.degree == 0
        return D
    # elliptic: the norm u^2 - u v (a1 x + a3) - v^2 rhs locates finite zeros
    rhs = Poly(F, [curve.a6, curve.a4, curve.a2, F.one()])
    ylin = Poly(F, [curve.a3, curve.a1])
    norm = f.u * f.u - f.u * f.v * ylin - f.v * f.v * rhs
    parts = {}
    gnum = FunctionRep(curve, f.u, f.v if f.v else None)
    if norm.degree != 0:
        for pi, _m in factor_poly(norm):
            for P in _points_above(curve, pi):
                v = _poly_pair_valuation(gnum, P)
                if v:
                    parts[P] = parts.get(P, 0) + v
    O = curve.infinity()
    parts[O] = parts.get(O, 0) + _poly_pair_val_at_O(curve, f.u, f.v)
    if f.den.degree != 0:
        for pi, m in factor_poly(f.den):
            for P, mm in _div_of_irreducible_x(curve, pi)._d.items():
                parts[P] = parts.get(P, 0) - m * mm
    D = Divisor(curve, parts)
    assert D.degree == 0, f"principal divisor has degree {D.degree}"
    return D


def _points_above(curve: Curve, pi: Poly):
    return [P for P in _div_of_irreducible_x(curve, pi).support() if not P.is_infinite()]


def riemann_roch_space(curve: Curve, D: Divisor) -> RiemannRochBasis:
    """Explicit basis of L(D) = {f : div(f) + D >= 0} plus the zero function.

    The allowed finite poles are cleared with a polynomial c(x) built from
    the minimal polynomials of the positive part of D, so g = f * c ranges
    over functions with poles only at infinity (polynomials on P^1; the
    span of 1, x, y, x^2, xy, ... on an elliptic curve) subject to linear
    vanishing conditions, solved exactly by row reduction.
    """
    if curve.kind == PROJECTIVE_LINE:
        return _rr_p1(curve, D)
    return _rr_elliptic(curve, D)


def _rr_p1(curve: Curve, D: Divisor) -> RiemannRochBasis:
    F = curve.field
    inf = curve.infinity()
    c = Poly.constant(F, 1)
    div_c = {}
    for P, m in D.items():
        if P.is_infinite() or m <= 0:
            continue
        c = c * P.min_poly() ** m
        div_c[P] = m
    deg_c = c.degree if c.degree is not DEG_NEG_INF else 0
    div_c[inf] = -deg_c
    Dhat = D - Divisor(curve, div_c)
    N = Dhat.multiplicity(inf)
    if N < 0:
        return RiemannRochBasis(D, [])
    ncols = N + 1
    rows = []
    for P, m in Dhat.items():
        if P.is_infinite() or m >= 0:
            continue
        modulus = P.min_poly() ** (-m)
        dm = modulus.degree
        cols = []
        rem = Poly.constant(F, 1)
        for _j in range(ncols):
            cols.append(rem)
            rem = rem.shift(1) % modulus
        for t in range(dm):
            rows.append([col.co[t] if t < len(col.co) else F.zero() for col in cols])
    if rows:
        kern = kernel_basis(rows)
    else:
        kern = [[F.one() if i == j else F.zero() for i in range(ncols)]
                for j in range(ncols)]
    basis = [FunctionRep(curve, Poly(F, vec), None, c) for vec in kern]
    return RiemannRochBasis(D, basis)


def _rr_elliptic(curve: Curve, D: Divisor) -> RiemannRochBasis:
    F = curve.field
    O = curve.infinity()
    c = Poly.constant(F, 1)
    div_c = Divisor(curve)
    for P, m in D.items():
        if P.is_infinite() or m <= 0:
            continue
        pi = P.min_poly()
        c = c * pi ** m
        div_c = div_c + m * _div_of_irreducible_x(curve, pi)
    Dhat = D - div_c
    N = Dhat.multiplicity(O)
    if N < 0:
        return RiemannRochBasis(D, [])
    monomials = [(i, j) for j in (0, 1)
                 for i in range(0, max(-1, (N - 3 * j)) // 2 + 1)
                 if 2 * i + 3 * j <= N]
    monomials.sort(key=lambda t: (2 * t[0] + 3 * t[1],))
    rows = []
    for P, m in Dhat.items():
        if P.is_infinite() or m >= 0:
            continue
        r = -m
        E, xs, ys = _local_xy(P, r + 8)
        max_i = max(i for i, _ in monomials)
        xpow = [_s_const(E, E.one(), r + 2)]
        for _i in range(max_i):
            xpow.append(_s_mul(E, xpow[-1], xs))
        mono_series = [(_s_mul(E, xpow[i], ys) if j else xpow[i])
                       for (i, j) in monomials]
        edeg = P.degree
        for t in range(r):
            coeffs = []
            for val, co in mono_series:
                pos = t - val
                coeffs.append(co[pos] if 0 <= pos < len(co) else E.zero())
            for a in range(edeg):
                row = []
                for cval in coeffs:
                    comps = cval.coeffs() if edeg > 1 else (cval,)
                    row.append(comps[a])
                rows.append(row)
    ncols = len(monomials)
    if rows:
        kern = kernel_basis(rows, ncols, F)
    else:
        kern = [[F.one() if i == j else F.zero() for i in range(ncols)]
                for j in range(ncols)]
    basis = []
    for vec in kern:
        u = Poly(F, [])
        v = Poly(F, [])
        for lam, (i, j) in zip(vec, monomials):
            if not lam:
                continue
            term = Poly(F, [F.zero()] * i + [lam])
            if j:
                v = v + term
            else:
                u = u + term
        basis.append(FunctionRep(curve, u, v, c))
    return RiemannRochBasis(D, basis)


def dim_l(curve: Curve, D: Divisor) -> int:
    """l(D), computed from an explicit basis."""
    return riemann_roch_space(curve, D).dimension


def equivalent_disjoint(curve: Curve, D: Divisor, avoid) -> Divisor:
    """A divisor linearly equivalent to D with support disjoint from avoid.

    On P^1 each offending point moves to an unaffected rational point by a
    divisor of a linear fraction; an elliptic divisor is reduced to
    (S) + (deg D - 1)(O) by the group law, then offending parts are shifted
    with chord relations (A) ~ (A + R) + (O) - (R) and
    (O) ~ 2(R) - (2R).
    """
    avoid = set(avoid)
    if not any(P in avoid for P in D.support()):
        return D
    rats = curve.rational_points()
    if curve.kind == PROJECTIVE_LINE:
        out = D
        for P in list(out.support()):
            if P not in avoid:
                continue
            m = out.multiplicity(P)
            target = next((R for R in rats
                           if R not in avoid and R not in out.support()), None)
            if target is None:
                raise ValueError("not enough rational points to avoid the set")
            out = out - Divisor.of_point(P, m) + Divisor.of_point(target, m * P.degree)
        return out
    O = curve.infinity()
    S = O
    for P, m in D.items():
        S = curve.add_points(S, curve.mul_point(m, curve.trace_to_rational(P)))
    out = Divisor.of_point(S, 1) + Divisor.of_point(O, D.degree - 1)
    for _ in range(4 * (len(avoid) + 2)):
        offender = next((P for P in out.support() if P in avoid), None)
        if offender is None:
            break
        m = out.multiplicity(offender)
        if offender == O:
            R = next((R for R in rats if not R.is_infinite() and R not in avoid
                      and not curve.mul_point(2, R).is_infinite()
                      and curve.mul_point(2, R) not in avoid), None)
            if R is None:
                raise ValueError("not enough rational points to avoid the set")
            out = out - Divisor.of_point(O, m) + Divisor.of_point(R, 2 * m) \
                - Divisor.of_point(curve.mul_point(2, R), m)
        else:
            R = next((R for R in rats if not R.is_infinite() and R not in avoid
                      and R != offender
                      and curve.add_points(offender, R) not in avoid), None)
            if R is None:
                raise ValueError("not enough rational points to avoid the set")
            out = out - Divisor.of_point(offender, m) \
                + Divisor.of_point(curve.add_points(offender, R), m) \
                + Divisor.of_point(O, m) - Divisor.of_point(R, m)
    if any(P in avoid for P in out.support()):
        raise ValueError("could not move the support off the avoid set")
    return out


# -- JSON -------------------------------------------------------------------


def curve_to_json(c: Curve) -> dict:
    out = {"kind": c.kind, "field": field_to_json(c.field)}
    if c.kind == ELLIPTIC:
        out["a"] = [element_to_json(v) for v in (c.a1, c.a2, c.a3, c.a4, c.a6)]
    return out


def curve_from_json(obj: dict) -> Curve:
    F = field_from_json(obj["field"])
    if obj["kind"] == PROJECTIVE_LINE:
        return Curve.projective_line(F)
    a = [element_from_json(F, v) for v in obj["a"]]
    return Curve.elliptic(F, *a)


def point_to_json(P: ClosedPoint) -> dict:
    if P.kind == "inf":
        return {"kind": "inf"}
    if P.kind in ("p1_rational", "p1_poly"):
        return {"kind": "p1", "degree": P.degree, "min_poly": poly_to_json(P.min_poly())}
    x, y = P.data
    return {"kind": "affine", "degree": P.degree,
            "x": element_to_json(x), "y": element_to_json(y)}


def point_from_json(curve: Curve, obj: dict) -> ClosedPoint:
    if obj["kind"] == "inf":
        return curve.infinity()
    if obj["kind"] == "p1":
        return ClosedPoint.p1_from_minpoly(curve, poly_from_json(curve.field, obj["min_poly"]))
    E = curve.residue_field(obj["degree"])
    x = element_from_json(E, obj["x"])
    y = element_from_json(E, obj["y"])
    return ClosedPoint.elliptic_affine(curve, x, y)


def divisor_to_json(D: Divisor) -> list:
    return [[point_to_json(P), m] for P, m in D.items()]


def divisor_from_json(curve: Curve, data) -> Divisor:
    return Divisor(curve, [(point_from_json(curve, p), m) for p, m in data])


def function_to_json(f: FunctionRep) -> dict:
    out = {"num": poly_to_json(f.u), "den": poly_to_json(f.den)}
    if f.curve.kind == ELLIPTIC:
        out["num_y"] = poly_to_json(f.v)
    return out


def function_from_json(curve: Curve, obj: dict) -> FunctionRep:
    u = poly_from_json(curve.field, obj["num"])
    den = poly_from_json(curve.field, obj["den"])
    v = poly_from_json(curve.field, obj.get("num_y", [])) if curve.kind == ELLIPTIC else None
    return FunctionRep(curve, u, v, den)
