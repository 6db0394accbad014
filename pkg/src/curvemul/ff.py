"""Exact arithmetic in finite fields and univariate polynomials, plus dense
linear algebra (rank / kernel / solve) over any of those fields.

Fields are towers: a prime field F_p, or an extension of an already built
field by a monic irreducible modulus.  An element is stored as an integer
index in [0, order); the index is the little-endian mixed-radix encoding of
the element's coefficient vector over the base field.  Index order is the
canonical enumeration order used everywhere (root finding, point listings,
tie breaking), so identical inputs always produce identical outputs.

Rationals are `fractions.Fraction`; no floating point is used anywhere.
"""

from __future__ import annotations

from fractions import Fraction

__all__ = [
    "Fraction",
    "FiniteField",
    "FFElement",
    "Poly",
    "DEG_NEG_INF",
    "field",
    "extend",
    "find_irreducible",
    "is_prime",
    "embed",
    "lift",
    "is_ancestor",
    "factor_poly",
    "solve_linear",
    "SolveResult",
    "rref",
    "kernel_basis",
    "matmul",
    "mat_rank",
    "identity_matrix",
    "element_to_json",
    "element_from_json",
    "field_to_json",
    "field_from_json",
    "poly_to_json",
    "poly_from_json",
]

DEG_NEG_INF = float("-inf")

# Fields are desk scale; Zech logarithm tables are built automatically below
# this order, on demand above it.
_AUTO_TABLE_LIMIT = 4096


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


class FiniteField:
    """A prime field F_p or an extension of another FiniteField.

    Do not call directly: use :func:`field` and :func:`extend`, which cache
    instances so that equal fields are identical objects.
    """

    __slots__ = (
        "p", "base", "modulus", "degree", "order", "name",
        "_dig", "_red", "_log", "_exp", "_sqrt", "_key", "_building",
    )

    def __init__(self, p, base=None, modulus=None):
        self.p = p
        self.base = base
        if base is None:
            self.degree = 1
            self.order = p
            self.modulus = None
            self.name = f"GF({p})"
        else:
            self.degree = len(modulus) - 1
            self.order = base.order ** self.degree
            self.modulus = tuple(modulus)  # base-field indices, monic
            self.name = f"GF({self.order})"
        self._dig = None
        self._red = None
        self._log = None
        self._exp = None
        self._sqrt = None
        self._building = False
        self._key = self._make_key()

    def _make_key(self):
        if self.base is None:
            return (self.p,)
        return self.base._key + (self.modulus,)

    def __eq__(self, other):
        return isinstance(other, FiniteField) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        return self.name

    # -- element construction -------------------------------------------

    def __call__(self, v) -> "FFElement":
        if isinstance(v, FFElement):
            if v.field is self or v.field == self:
                return FFElement(self, v.idx)
            if self.base is not None and (v.field == self.base):
                # constant embedding of the base field
                return FFElement(self, v.idx)
            raise ValueError(f"cannot coerce element of {v.field} into {self}")
        if isinstance(v, int):
            # prime fields reduce integers mod p; extensions take an index
            return FFElement(self, v % self.p if self.base is None else v)
        if isinstance(v, (list, tuple)):
            if self.base is None:
                raise ValueError("coefficient lists need an extension field")
            digs = [self.base(c).idx for c in v]
            if len(digs) > self.degree:
                raise ValueError("coefficient list longer than field degree")
            digs += [0] * (self.degree - len(digs))
            return FFElement(self, self._enc(digs))
        raise TypeError(f"cannot build a {self} element from {v!r}")

    def zero(self) -> "FFElement":
        return FFElement(self, 0)

    def one(self) -> "FFElement":
        return FFElement(self, 1)

    def gen(self) -> "FFElement":
        """The residue of the modulus variable (prime fields: the element 1)."""
        if self.base is None:
            return FFElement(self, 1 % self.p)
        return FFElement(self, self.base.order)

    def elements(self):
        for i in range(self.order):
            yield FFElement(self, i)

    # -- digit plumbing ---------------------------------------------------

    def _digits(self, a):
        if self.base is None:
            return (a,)
        dig = self._dig
        if dig is None:
            b = self.base.order
            m = self.degree
            dig = []
            for i in range(self.order):
                x = i
                row = []
                for _ in range(m):
                    row.append(x % b)
                    x //= b
                dig.append(tuple(row))
            self._dig = dig
        return dig[a]

    def _enc(self, digs):
        b = self.base.order
        idx = 0
        for d in reversed(digs):
            idx = idx * b + d
        return idx

    def coeffs(self, a) -> tuple:
        """Coefficient vector over the base field (little endian), as elements."""
        if self.base is None:
            return (FFElement(self, a),)
        return tuple(FFElement(self.base, d) for d in self._digits(a))

    # -- index arithmetic -------------------------------------------------

    def add_idx(self, a, b):
        if self.base is None:
            return (a + b) % self.p
        if self.p == 2:
            return a ^ b
        ba = self._digits(a)
        bb = self._digits(b)
        base = self.base
        return self._enc([base.add_idx(x, y) for x, y in zip(ba, bb)])

    def neg_idx(self, a):
        if self.base is None:
            return (-a) % self.p
        if self.p == 2:
            return a
        base = self.base
        return self._enc([base.neg_idx(x) for x in self._digits(a)])

    def sub_idx(self, a, b):
        return self.add_idx(a, self.neg_idx(b))

    def _reduction_rows(self):
        # x^(m+j) mod modulus, for j = 0 .. m-2, as base-index rows
        if self._red is None:
            base = self.base
            m = self.degree
            row = [base.neg_idx(c) for c in self.modulus[:m]]  # x^m
            rows = [tuple(row)]
            for _ in range(m - 2):
                carry = row[m - 1]
                row = [0] + row[: m - 1]
                if carry:
                    top = rows[0]
                    row = [base.add_idx(row[t], base.mul_idx(carry, top[t]))
                           for t in range(m)]
                rows.append(tuple(row))
            self._red = rows
        return self._red

    def _raw_mul(self, a, b):
        base = self.base
        m = self.degree
        da = self._digits(a)
        db = self._digits(b)
        c = [0] * (2 * m - 1)
        for i, x in enumerate(da):
            if not x:
                continue
            for j, y in enumerate(db):
                if y:
                    c[i + j] = base.add_idx(c[i + j], base.mul_idx(x, y))
        if m > 1:
            red = self._reduction_rows()
            for i in range(2 * m - 2, m - 1, -1):
                ci = c[i]
                if ci:
                    c[i] = 0
                    row = red[i - m]
                    for t in range(m):
                        rt = row[t]
                        if rt:
                            c[t] = base.add_idx(c[t], base.mul_idx(ci, rt))
        return self._enc(c[:m])

    def mul_idx(self, a, b):
        if self.base is None:
            return (a * b) % self.p
        if a == 0 or b == 0:
            return 0
        log = self._log
        if log is None and self.order <= _AUTO_TABLE_LIMIT and not self._building:
            self.build_tables()
            log = self._log
        if log is not None:
            return self._exp[(log[a] + log[b]) % (self.order - 1)]
        return self._raw_mul(a, b)

    def pow_idx(self, a, e):
        n = self.order
        if e < 0:
            a = self.inv_idx(a)
            e = -e
        e = e % (n - 1) if a != 0 and e >= n - 1 else e
        r = 1 % n
        base = a
        while e:
            if e & 1:
                r = self.mul_idx(r, base)
            base = self.mul_idx(base, base)
            e >>= 1
        return r

    def inv_idx(self, a):
        if a == 0:
            raise ZeroDivisionError(f"inversion of zero in {self}")
        if self.base is None:
            return pow(a, self.p - 2, self.p)
        if self._log is not None:
            return self._exp[(self.order - 1 - self._log[a]) % (self.order - 1)]
        return self.pow_idx(a, self.order - 2)

    # -- multiplicative tables -------------------------------------------

    def build_tables(self):
        """Build discrete-log tables (order must stay desk scale)."""
        if self._log is not None or self.base is None:
            return
        self._building = True
        try:
            n = self.order
            g = self._find_generator()
            exp = [0] * (n - 1)
            log = [0] * n
            acc = 1
            for i in range(n - 1):
                exp[i] = acc
                log[acc] = i
                acc = self._raw_mul(acc, g)
            self._exp = exp
            self._log = log
        finally:
            self._building = False

    def _raw_pow(self, a, e):
        r = 1
        while e:
            if e & 1:
                r = self._raw_mul(r, a)
            a = self._raw_mul(a, a)
            e >>= 1
        return r

    def _find_generator(self):
        n = self.order - 1
        if n == 1:
            return 1
        fac = []
        m = n
        d = 2
        while d * d <= m:
            if m % d == 0:
                fac.append(d)
                while m % d == 0:
                    m //= d
            d += 1
        if m > 1:
            fac.append(m)
        for idx in range(2, self.order):
            if all(self._raw_pow(idx, n // r) != 1 for r in fac):
                return idx
        raise RuntimeError("no multiplicative generator found")  # pragma: no cover

    def sqrt_idx(self, a):
        """A square root index, or None.  Deterministic (smallest root)."""
        if self._sqrt is None:
            table = {}
            for i in range(self.order):
                s = self.mul_idx(i, i)
                if s not in table:
                    table[s] = i
            self._sqrt = table
        return self._sqrt.get(a)


class FFElement:
    """An element of a FiniteField; immutable, hashable, operator overloaded."""

    __slots__ = ("field", "idx")

    def __init__(self, field, idx):
        if not 0 <= idx < field.order:
            raise ValueError(f"index {idx} out of range for {field}")
        self.field = field
        self.idx = idx

    def coeffs(self):
        return self.field.coeffs(self.idx)

    def _coerce(self, other):
        # integers act through the ring homomorphism Z -> F (n times one);
        # the prime subfield embeds with unchanged index
        if isinstance(other, FFElement):
            return other
        if isinstance(other, int):
            return FFElement(self.field, other % self.field.p)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return FFElement(self.field, self.field.add_idx(self.idx, o.idx))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return FFElement(self.field, self.field.sub_idx(self.idx, o.idx))

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return FFElement(self.field, self.field.sub_idx(o.idx, self.idx))

    def __neg__(self):
        return FFElement(self.field, self.field.neg_idx(self.idx))

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return FFElement(self.field, self.field.mul_idx(self.idx, o.idx))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return FFElement(self.field, self.field.mul_idx(self.idx, self.field.inv_idx(o.idx)))

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return FFElement(self.field, self.field.mul_idx(o.idx, self.field.inv_idx(self.idx)))

    def __pow__(self, e):
        return FFElement(self.field, self.field.pow_idx(self.idx, e))

    def inv(self):
        return FFElement(self.field, self.field.inv_idx(self.idx))

    def __bool__(self):
        return self.idx != 0

    def __eq__(self, other):
        if isinstance(other, int):
            o = self._coerce(other)
            return o is not NotImplemented and self.idx == o.idx
        return (isinstance(other, FFElement) and self.field == other.field
                and self.idx == other.idx)

    def __hash__(self):
        return hash((self.field._key, self.idx))

    def __repr__(self):
        return f"{self.field.name}:{self.idx}"


# -- field construction, cached ------------------------------------------

_PRIME_FIELDS: dict = {}
_EXTENSIONS: dict = {}


def field(p: int, m: int = 1) -> FiniteField:
    """F_{p^m} with the lexicographically smallest irreducible modulus.

    Rejects non-prime p and m < 1.  Results are cached, so equal parameters
    give the identical object.
    """
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    if m < 1:
        raise ValueError("extension degree must be >= 1")
    if p not in _PRIME_FIELDS:
        _PRIME_FIELDS[p] = FiniteField(p)
    Fp = _PRIME_FIELDS[p]
    if m == 1:
        return Fp
    return extend(Fp, m)


def extend(F: FiniteField, k: int) -> FiniteField:
    """The degree-k extension of F, modulo find_irreducible(F, k).  Cached."""
    if k < 1:
        raise ValueError("extension degree must be >= 1")
    key = (F._key, k)
    if key not in _EXTENSIONS:
        mod = find_irreducible(F, k)
        _EXTENSIONS[key] = FiniteField(F.p, F, tuple(c.idx for c in mod.co))
    return _EXTENSIONS[key]


_IRR_CACHE: dict = {}


def find_irreducible(F: FiniteField, k: int) -> "Poly":
    """Lexicographically smallest monic irreducible of degree k over F.

    "Smallest" means smallest little-endian index vector of the lower
    coefficients, i.e. the order in which candidates are enumerated.
    """
    if k < 1:
        raise ValueError("degree must be >= 1")
    key = (F._key, k)
    if key in _IRR_CACHE:
        return _IRR_CACHE[key]
    q = F.order
    for idx in range(q ** k):
        digs = []
        x = idx
        for _ in range(k):
            digs.append(x % q)
            x //= q
        cand = Poly(F, [FFElement(F, d) for d in digs] + [F.one()])
        if cand.is_irreducible():
            _IRR_CACHE[key] = cand
            return cand
    raise RuntimeError("no irreducible polynomial found")  # pragma: no cover


def is_ancestor(F: FiniteField, E: FiniteField) -> bool:
    """True when F appears in E's base chain (or equals E)."""
    node = E
    while node is not None:
        if node == F:
            return True
        node = node.base
    return False


def lift(E: FiniteField, e: FFElement) -> FFElement:
    """Constant embedding of e into the tower extension E of e.field.

    The little-endian index encoding makes this the identity on indices.
    """
    if not is_ancestor(e.field, E):
        raise ValueError(f"{e.field} is not a subtower of {E}")
    return FFElement(E, e.idx)


def embed(E1: FiniteField, E2: FiniteField):
    """The canonical embedding E1 -> E2 for towers over a common base.

    The image of E1's generator is the first root (in index order) of E1's
    modulus in E2; the map is the base-linear ring homomorphism extending
    that choice.  Raises if no root exists.
    """
    if E1.base is None:
        raise ValueError("source field must be an extension")
    if not is_ancestor(E1.base, E2):
        raise ValueError("target must be a tower over the source's base field")
    mod = Poly(E1.base, [FFElement(E1.base, c) for c in E1.modulus])
    root = None
    for cand in E2.elements():
        acc = E2.zero()
        for c in reversed(mod.co):
            acc = acc * cand + lift(E2, c)
        if not acc:
            root = cand
            break
    if root is None:
        raise ValueError(f"{E1} does not embed into {E2}")

    def phi(e: FFElement) -> FFElement:
        acc = E2.zero()
        for c in reversed(e.coeffs()):
            acc = acc * root + lift(E2, c)
        return acc

    return phi


# -- polynomials -----------------------------------------------------------


class Poly:
    """Dense univariate polynomial over a FiniteField.  deg(0) = -inf."""

    __slots__ = ("field", "co")

    def __init__(self, field, coeffs):
        while coeffs and not coeffs[-1]:
            coeffs = coeffs[:-1]
        self.field = field
        self.co = tuple(coeffs)

    @classmethod
    def from_ints(cls, field, ints):
        return cls(field, [field(i) for i in ints])

    @classmethod
    def x(cls, field):
        return cls(field, [field.zero(), field.one()])

    @classmethod
    def constant(cls, field, c):
        return cls(field, [field(c)])

    @property
    def degree(self):
        return len(self.co) - 1 if self.co else DEG_NEG_INF

    def __bool__(self):
        return bool(self.co)

    def __eq__(self, other):
        return (isinstance(other, Poly) and self.field == other.field
                and self.co == other.co)

    def __hash__(self):
        return hash((self.field._key, tuple(c.idx for c in self.co)))

    def __repr__(self):
        if not self.co:
            return "Poly(0)"
        terms = []
        for i, c in enumerate(self.co):
            if c:
                terms.append(f"{c.idx}*x^{i}")
        return "Poly(" + " + ".join(terms) + f" over {self.field.name})"

    def __add__(self, other):
        other = self._coerce(other)
        a, b = self.co, other.co
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] = out[i] + c
        return Poly(self.field, out)

    def __neg__(self):
        return Poly(self.field, [-c for c in self.co])

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def _coerce(self, other):
        if isinstance(other, Poly):
            return other
        return Poly.constant(self.field, other)

    def __mul__(self, other):
        if isinstance(other, FFElement):
            return Poly(self.field, [c * other for c in self.co])
        other = self._coerce(other)
        if not self.co or not other.co:
            return Poly(self.field, [])
        out = [self.field.zero()] * (len(self.co) + len(other.co) - 1)
        for i, a in enumerate(self.co):
            if not a:
                continue
            for j, b in enumerate(other.co):
                if b:
                    out[i + j] = out[i + j] + a * b
        return Poly(self.field, out)

    __rmul__ = __mul__

    def __divmod__(self, other):
        other = self._coerce(other)
        if not other:
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.co)
        db = other.degree
        lead_inv = other.co[-1].inv()
        quo = [self.field.zero()] * max(0, len(rem) - db)
        for i in range(len(rem) - 1, db - 1, -1):
            c = rem[i]
            if c:
                f = c * lead_inv
                quo[i - db] = f
                for j, b in enumerate(other.co):
                    rem[i - db + j] = rem[i - db + j] - f * b
        return Poly(self.field, quo), Poly(self.field, rem[:db] if db > 0 else [])

    def __floordiv__(self, other):
        return divmod(self, other)[0]

    def __mod__(self, other):
        return divmod(self, other)[1]

    def __pow__(self, e):
        r = Poly.constant(self.field, 1)
        b = self
        while e:
            if e & 1:
                r = r * b
            b = b * b
            e >>= 1
        return r

    def pow_mod(self, e, mod):
        r = Poly.constant(self.field, 1) % mod
        b = self % mod
        while e:
            if e & 1:
                r = (r * b) % mod
            b = (b * b) % mod
            e >>= 1
        return r

    def monic(self):
        if not self.co:
            return self
        return self * self.co[-1].inv()

    def gcd(self, other):
        a, b = self, self._coerce(other)
        while b:
            a, b = b, a % b
        return a.monic()

    def derivative(self):
        out = []
        for i in range(1, len(self.co)):
            c = self.co[i]
            s = self.field.zero()
            for _ in range(i % self.field.p):
                s = s + c
            out.append(s)
        return Poly(self.field, out)

    def shift(self, k):
        if not self.co:
            return self
        return Poly(self.field, [self.field.zero()] * k + list(self.co))

    def __call__(self, x: FFElement) -> FFElement:
        """Evaluate at x, which may live in this field or any tower over it."""
        E = x.field
        if E == self.field:
            acc = E.zero()
            for c in reversed(self.co):
                acc = acc * x + c
            return acc
        if is_ancestor(self.field, E):
            acc = E.zero()
            for c in reversed(self.co):
                acc = acc * x + lift(E, c)
            return acc
        raise ValueError("evaluation point not in the coefficient field's tower")

    def is_irreducible(self) -> bool:
        """Rabin's test: x^{q^k} = x mod f and gcd(x^{q^{k/r}} - x, f) = 1."""
        k = self.degree
        if k is DEG_NEG_INF or k == 0:
            return False
        if k == 1:
            return True
        q = self.field.order
        x = Poly.x(self.field)
        primes = []
        m = k
        d = 2
        while d * d <= m:
            if m % d == 0:
                primes.append(d)
                while m % d == 0:
                    m //= d
            d += 1
        if m > 1:
            primes.append(m)
        f = self.monic()
        for r in primes:
            h = x
            for _ in range(k // r):
                h = h.pow_mod(q, f)
            if f.gcd(h - x).degree != 0:
                return False
        h = x
        for _ in range(k):
            h = h.pow_mod(q, f)
        return not (h - x) % f


def _pth_root_coeff(c: FFElement) -> FFElement:
    # a^(1/p) = a^(p^(R-1)) in a field of order p^R
    F = c.field
    R = 0
    n = F.order
    while n > 1:
        n //= F.p
        R += 1
    return c ** (F.p ** (R - 1)) if R > 1 else c


def factor_poly(f: Poly) -> list:
    """Factor into monic irreducibles: list of (poly, multiplicity), sorted.

    Distinct-degree splitting first; equal-degree blocks are split by
    scanning the canonical enumeration of F_{q^d} for a root and peeling off
    its minimal polynomial, which keeps the result deterministic.
    """
    F = f.field
    if not f:
        raise ValueError("cannot factor the zero polynomial")
    found: dict = {}
    work = f.monic()
    while work.degree > 0:
        der = work.derivative()
        if not der:
            # work = g(x^p); take p-th roots of coefficients
            g = Poly(F, [_pth_root_coeff(work.co[i]) for i in range(0, len(work.co), F.p)])
            for poly, m in factor_poly(g):
                found[poly] = found.get(poly, 0) + m * F.p
            break
        sf = (work // work.gcd(der)).monic()
        for irr in _factor_squarefree(sf):
            m = 0
            while True:
                q_, r_ = divmod(work, irr)
                if r_:
                    break
                work = q_
                m += 1
            found[irr] = found.get(irr, 0) + m
        work = work.monic()
    return sorted(found.items(), key=lambda t: (t[0].degree, tuple(c.idx for c in t[0].co)))


def _factor_squarefree(f: Poly) -> list:
    F = f.field
    q = F.order
    out = []
    x = Poly.x(F)
    h = x
    rest = f
    d = 0
    while rest.degree > 0 and 2 * (d + 1) <= rest.degree:
        d += 1
        h = h.pow_mod(q, rest)
        g = rest.gcd(h - x)
        if g.degree > 0:
            out.extend(_split_equal_degree(g, d))
            rest = rest // g
            h = h % rest
    if rest.degree > 0:
        out.append(rest.monic())
    return out


def _split_equal_degree(g: Poly, d: int) -> list:
    # g = product of distinct monic irreducibles, all of degree d
    F = g.field
    out = []
    while g.degree > d:
        E = F if d == 1 else extend(F, d)
        root = None
        for cand in E.elements():
            if not g(cand):
                root = cand
                break
        if root is None:  # pragma: no cover
            raise RuntimeError("equal-degree splitting failed")
        minp = Poly.constant(E, 1)
        xE = Poly.x(E)
        r = root
        for _ in range(d):
            minp = minp * (xE - Poly.constant(E, r))
            r = r ** F.order
        coeffs = []
        for c in minp.co:
            if c.idx >= F.order:  # pragma: no cover
                raise RuntimeError("minimal polynomial has a non-base coefficient")
            coeffs.append(FFElement(F, c.idx))
        irr = Poly(F, coeffs)
        out.append(irr)
        g = g // irr
    if g.degree == d:
        out.append(g.monic())
    return out


# -- linear algebra --------------------------------------------------------


class SolveResult:
    """Rank, kernel basis and (when a rhs is given) one particular solution."""

    __slots__ = ("rank", "kernel", "solution", "consistent", "ncols")

    def __init__(self, rank, kernel, solution, consistent, ncols):
        self.rank = rank
        self.kernel = kernel
        self.solution = solution
        self.consistent = consistent
        self.ncols = ncols


def rref(rows):
    """Reduced row echelon form.  Returns (new_rows, pivot_columns)."""
    rows = [list(r) for r in rows]
    if not rows:
        return rows, []
    ncols = len(rows[0])
    if any(len(r) != ncols for r in rows):
        raise ValueError("ragged matrix")
    pivots = []
    r = 0
    for c in range(ncols):
        pivot = None
        for i in range(r, len(rows)):
            if rows[i][c]:
                pivot = i
                break
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        inv = rows[r][c].inv()
        rows[r] = [v * inv for v in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c]:
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return rows, pivots


def kernel_basis(rows, ncols=None, F=None):
    """Basis of the right kernel, free variables set one at a time."""
    if rows:
        ncols = len(rows[0])
        F = rows[0][0].field
    elif ncols is None or F is None:
        raise ValueError("empty matrix needs explicit ncols and field")
    red, pivots = rref(rows)
    pivset = set(pivots)
    free = [c for c in range(ncols) if c not in pivset]
    basis = []
    for fc in free:
        vec = [F.zero()] * ncols
        vec[fc] = F.one()
        for r, pc in enumerate(pivots):
            vec[pc] = -red[r][fc]
        basis.append(vec)
    return basis


def solve_linear(matrix, rhs=None) -> SolveResult:
    """Row reduce a rectangular system over a finite field.

    Returns rank, a kernel basis, and when `rhs` is supplied, one particular
    solution with free variables set to zero (solution is None and
    consistent is False for an inconsistent system).  Shape errors raise
    ValueError; inconsistency does not.
    """
    rows = [list(r) for r in matrix]
    if not rows:
        raise ValueError("empty matrix")
    ncols = len(rows[0])
    if any(len(r) != ncols for r in rows):
        raise ValueError("ragged matrix")
    F = rows[0][0].field
    if rhs is None:
        red, pivots = rref(rows)
        return SolveResult(len(pivots), kernel_basis(rows, ncols, F), None, True, ncols)
    if len(rhs) != len(rows):
        raise ValueError("rhs length does not match row count")
    aug = [row + [b] for row, b in zip(rows, rhs)]
    red, pivots = rref(aug)
    consistent = ncols not in pivots
    rank = len([c for c in pivots if c < ncols])
    solution = None
    if consistent:
        solution = [F.zero()] * ncols
        for r, pc in enumerate(pivots):
            solution[pc] = red[r][ncols]
    kern = kernel_basis(rows, ncols, F)
    return SolveResult(rank, kern, solution, consistent, ncols)


def matmul(A, B):
    if not A or not B:
        return []
    F = A[0][0].field
    n, m, k = len(A), len(B), len(B[0])
    if len(A[0]) != m:
        raise ValueError("shape mismatch")
    out = [[F.zero()] * k for _ in range(n)]
    for i in range(n):
        Ai = A[i]
        for j in range(m):
            a = Ai[j]
            if not a:
                continue
            Bj = B[j]
            row = out[i]
            for t in range(k):
                if Bj[t]:
                    row[t] = row[t] + a * Bj[t]
    return out


def mat_rank(A) -> int:
    if not A:
        return 0
    return len(rref(A)[1])


def identity_matrix(F, n):
    return [[F.one() if i == j else F.zero() for j in range(n)] for i in range(n)]


# -- JSON serialization -----------------------------------------------------
# Elements: int for prime fields, little-endian list of base serializations
# for extensions.  Fields: characteristic plus the tower of moduli.


def element_to_json(e: FFElement):
    if e.field.base is None:
        return e.idx
    return [element_to_json(c) for c in e.coeffs()]


def element_from_json(F: FiniteField, data) -> FFElement:
    if F.base is None:
        if not isinstance(data, int):
            raise ValueError("prime-field element must be an int")
        return F(data % F.p)
    if not isinstance(data, list):
        raise ValueError("extension element must be a list")
    return F([element_from_json(F.base, c) for c in data])


def field_to_json(F: FiniteField) -> dict:
    tower = []
    node = F
    while node.base is not None:
        level_base = node.base
        tower.append([element_to_json(FFElement(level_base, c)) for c in node.modulus])
        node = level_base
    return {"p": F.p, "tower": list(reversed(tower))}


def field_from_json(obj: dict) -> FiniteField:
    p = obj["p"]
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    if p not in _PRIME_FIELDS:
        _PRIME_FIELDS[p] = FiniteField(p)
    F = _PRIME_FIELDS[p]
    for mod_ser in obj.get("tower", []):
        coeffs = [element_from_json(F, c) for c in mod_ser]
        mod = Poly(F, coeffs)
        if mod.degree is DEG_NEG_INF or mod.degree < 1 or mod.co[-1] != F.one():
            raise ValueError("modulus must be monic of degree >= 1")
        if not mod.is_irreducible():
            raise ValueError("modulus is not irreducible")
        key = (F._key, mod.degree)
        canonical = _EXTENSIONS.get(key)
        idxs = tuple(c.idx for c in mod.co)
        if canonical is not None and canonical.modulus == idxs:
            F = canonical
        else:
            F = FiniteField(p, F, idxs)
    return F


def poly_to_json(f: Poly):
    return [element_to_json(c) for c in f.co]


def poly_from_json(F: FiniteField, data) -> Poly:
    return Poly(F, [element_from_json(F, c) for c in data])
