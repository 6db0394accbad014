"""Exact evaluators for the numeric bounds attached to the construction:
Dedekind psi and psi-ceilings, prime gaps, the genus of the classical
modular curves, rate and complexity bound expressions, and the inventory
criterion giving mu_q(k) <= 2k + g - 1.

Every reported value is an int or a Fraction; nothing here touches floats.
Quantities the machinery cannot certify itself (Ihara-type constants,
multiplication complexities of truncated power-series rings, prime gaps
beyond a sieve limit) are inputs, and the reports say which hypotheses
were actually checked.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction

import numpy as np

__all__ = [
    "BoundReport",
    "psi",
    "psi_sieve",
    "ceil_psi",
    "prime_sieve",
    "ceil_prime",
    "next_prime_after",
    "prime_eps",
    "nu_infinity",
    "nu2",
    "nu3",
    "genus_x0",
    "x0_point_lower_bound",
    "stv_bounds",
    "rq_bounds",
    "kappa_window",
    "weil_point_guarantee",
    "mu_upper",
    "ballet_bound",
    "co_bound",
    "n1_3n2_bound",
    "dv_ratio_report",
]


@dataclass
class BoundReport:
    """A named exact value with the hypothesis checks behind it."""
    name: str
    value: object = None  # Fraction | int | None when inapplicable
    hypotheses: dict = dc_field(default_factory=dict)
    details: dict = dc_field(default_factory=dict)

    @property
    def applicable(self) -> bool:
        return all(self.hypotheses.values())

    def to_json(self) -> dict:
        def enc(v):
            if isinstance(v, Fraction):
                return {"num": v.numerator, "den": v.denominator}
            if isinstance(v, dict):
                return {k: enc(x) for k, x in v.items()}
            if isinstance(v, (list, tuple)):
                return [enc(x) for x in v]
            return v
        return {"name": self.name, "value": enc(self.value),
                "applicable": self.applicable,
                "hypotheses": self.hypotheses, "details": enc(self.details)}


# -- Dedekind psi -------------------------------------------------------------


def _trial_factor(n: int):
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            e = 0
            while n % d == 0:
                n //= d
                e += 1
            out.append((d, e))
        d += 1
    if n > 1:
        out.append((n, 1))
    return out


def psi(N: int) -> int:
    """N * prod over prime divisors l of (1 + 1/l), by trial division."""
    if N < 1:
        raise ValueError("psi needs N >= 1")
    val = N
    for l, _e in _trial_factor(N):
        val = val // l * (l + 1)
    return val


def psi_sieve(limit: int) -> np.ndarray:
    """psi(0..limit) as an integer array (psi[0] unused)."""
    vals = np.arange(limit + 1, dtype=np.int64)
    is_comp = np.zeros(limit + 1, dtype=bool)
    for l in range(2, limit + 1):
        if not is_comp[l]:
            is_comp[l * l::l] = True
            vals[l::l] //= l
            vals[l::l] *= l + 1
    return vals


_PSI_SUCC: dict = {}


def _psi_successor_table(p: int, cap: int):
    # sorted unique psi values over N coprime to p, with least witnesses
    entry = _PSI_SUCC.get(p)
    if entry is not None and entry[0] >= cap:
        return entry[1], entry[2]
    limit = 1
    while limit < cap:
        limit *= 2
    sieve = psi_sieve(limit)
    ns = np.arange(limit + 1, dtype=np.int64)
    mask = ns % p != 0
    mask[0] = False
    vals = sieve[mask]
    ns = ns[mask]
    order = np.lexsort((ns, vals))
    vals = vals[order]
    ns = ns[order]
    keep = np.ones(len(vals), dtype=bool)
    keep[1:] = vals[1:] != vals[:-1]
    vals = vals[keep]
    ns = ns[keep]
    _PSI_SUCC[p] = (limit, vals, ns)
    return vals, ns


def ceil_psi(x: Fraction, p: int):
    """Smallest psi-value >= x over N coprime to p, with its least witness.

    The search space is complete because psi(N) >= N: an admissible value
    <= cap exists (a power of 2 once x >= 3/2 and p is odd; the next prime
    above x - 1 for p = 2), so witnesses beyond the cap cannot win.
    """
    x = Fraction(x)
    if x <= 0:
        raise ValueError("needs x > 0")
    if x <= 1:
        return 1, 1
    if p != 2:
        j = 0
        while 3 * (1 << j) < x:
            j += 1
        cap = 3 * (1 << j)  # psi(2^(j+1)) >= x
    else:
        P = ceil_prime(max(3, x - 1))
        cap = P + 1
    vals, ns = _psi_successor_table(p, cap)
    threshold = x.numerator // x.denominator
    if threshold < x:
        threshold += 1
    pos = int(np.searchsorted(vals, threshold))
    return int(vals[pos]), int(ns[pos])


def _is_prime_int(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


# -- primes -------------------------------------------------------------------


def prime_sieve(limit: int) -> np.ndarray:
    if limit < 2:
        return np.array([], dtype=np.int64)
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, int(limit ** 0.5) + 1):
        if flags[p]:
            flags[p * p::p] = False
    return np.flatnonzero(flags).astype(np.int64)


def ceil_prime(x) -> int:
    """Smallest prime >= x."""
    n = int(x)
    if n < x:
        n += 1
    n = max(n, 2)
    while not _is_prime_int(n):
        n += 1
    return n


def next_prime_after(x: int) -> int:
    return ceil_prime(x + 1)


def prime_eps(x: int, scan_limit: int) -> BoundReport:
    """sup over y >= x of (next_prime(y) - y) / y, restricted to the sieve
    window [x, scan_limit]; behaviour past the window rests on external
    prime-gap estimates and is flagged, never computed.
    """
    if x < 2 or scan_limit < x:
        raise ValueError("needs 2 <= x <= scan_limit")
    primes = prime_sieve(scan_limit)
    first = ceil_prime(x)
    sel = primes[primes >= first]
    best = Fraction(first - x, x)  # the approach segment before the first prime
    gaps = np.diff(sel)
    if len(sel) >= 2:
        ratios = [(int(g), int(p)) for g, p in zip(gaps, sel[:-1])]
        for g, p in ratios:
            r = Fraction(g, p)
            if r > best:
                best = r
    return BoundReport(
        name="prime-gap-eps",
        value=best,
        hypotheses={"window_only": True},
        details={"from": x, "scan_limit": scan_limit,
                 "note": "values beyond scan_limit rely on external estimates"},
    )


# -- modular curve genus ------------------------------------------------------


def nu_infinity(N: int) -> int:
    """Cusp count: multiplicative, 2 l^((v-1)/2) or (l+1) l^(v/2-1) per l^v."""
    out = 1
    for l, v in _trial_factor(N):
        if v % 2:
            out *= 2 * l ** ((v - 1) // 2)
        else:
            out *= (l + 1) * l ** (v // 2 - 1)
    return out


def _legendre_minus1(p: int) -> int:
    if p == 2:
        return 0
    return 1 if p % 4 == 1 else -1


def _legendre_minus3(p: int) -> int:
    if p == 3:
        return 0
    return 1 if p % 3 == 1 else -1


def nu2(N: int) -> int:
    if N % 4 == 0:
        return 0
    out = 1
    for l, _v in _trial_factor(N):
        out *= 1 + _legendre_minus1(l)
    return out


def nu3(N: int) -> int:
    if N % 9 == 0:
        return 0
    out = 1
    for l, _v in _trial_factor(N):
        out *= 1 + _legendre_minus3(l)
    return out


def genus_x0(N: int):
    """Exact genus of the level-N modular curve, with the psi/12 cap.

    Returns (genus, psi(N)/12, nu_inf, nu3, nu2).
    """
    if N < 1:
        raise ValueError("needs N >= 1")
    cap = Fraction(psi(N), 12)
    g = cap + 1 - Fraction(nu_infinity(N), 2) - Fraction(nu3(N), 3) - Fraction(nu2(N), 4)
    if g.denominator != 1 or g < 0:  # pragma: no cover
        raise RuntimeError(f"genus formula broke at N={N}: {g}")
    g = int(g)
    assert g <= cap
    return g, cap, nu_infinity(N), nu3(N), nu2(N)


def x0_point_lower_bound(p: int, N: int) -> Fraction:
    """(p-1) psi(N) / 12, the guaranteed quadratic-field point count."""
    if not _is_prime_int(p):
        raise ValueError(f"{p} is not prime")
    if N < 1:
        raise ValueError("needs N >= 1")
    import math
    if math.gcd(N, p) != 1:
        raise ValueError("N must be coprime to p")
    return Fraction((p - 1) * psi(N), 12)


# -- rate / complexity bound expressions -------------------------------------


def stv_threshold(q: int) -> Fraction:
    return 5 - Fraction(14 * q * q - 4, q ** 4 + 2 * q * q - 1)


def stv_bounds(q: int, A: Fraction, A_prime=None) -> BoundReport:
    """Asymptotic complexity-ratio bounds from a supplied point/genus
    density A (and optionally A' for the limsup variant).

    The liminf ratio is at most 2(1 + 1/(A-1)) once A clears the exact
    threshold 5 - (14q^2-4)/(q^4+2q^2-1); square q >= 49 also gets the
    closed form 2(1 + 1/(sqrt(q)-2)) at A' = sqrt(q) - 1.
    """
    A = Fraction(A)
    thr = stv_threshold(q)
    hyp = {"A_gt_1": A > 1, "A_ge_threshold": A >= thr}
    details = {"threshold": thr}
    value = None
    if all(hyp.values()):
        value = 2 * (1 + 1 / (A - 1))
    details["mq_bound"] = value
    if A_prime is not None:
        Ap = Fraction(A_prime)
        hyp["Aprime_gt_1"] = Ap > 1
        hyp["Aprime_ge_threshold"] = Ap >= thr
        details["Mq_bound"] = (2 * (1 + 1 / (Ap - 1))
                               if Ap > 1 and Ap >= thr else None)
    r = _isqrt(q)
    if r * r == q and q >= 49:
        details["square_Mq_bound"] = 2 * (1 + Fraction(1, r - 2))
        details["square_A"] = r - 1
    return BoundReport("stv", value, hyp, details)


def _isqrt(n: int) -> int:
    import math
    return math.isqrt(n)


def rq_critical_nu(q: int) -> Fraction:
    return 4 - Fraction(12 * q * q - 4, q ** 4 + 2 * q * q - 1)


def rq_bounds(nu: Fraction, q=None) -> BoundReport:
    """Asymptotic intersecting-code rate floor at point density nu.

    Finite q sharpens the first min-term by a 1/(q^2-1) correction; the
    two terms agree exactly at nu = 4 - (12q^2-4)/(q^4+2q^2-1), and for
    nu at or above it the floor is 1/2 - 1/(2 nu).
    """
    nu = Fraction(nu)
    if nu <= 1:
        raise ValueError("needs nu > 1")
    term2 = Fraction(1, 2) - 1 / (2 * nu)
    if q is None:
        term1 = 1 - Fraction(5, 2) / nu
        details = {"term1": term1, "term2": term2}
        return BoundReport("rate-floor", min(term1, term2),
                           {"nu_gt_1": True}, details)
    q2m1 = q * q - 1
    term1 = 1 - Fraction(5, 2) / nu + (2 - Fraction(2) / nu + Fraction(1, q2m1)) / q2m1
    crit = rq_critical_nu(q)
    details = {"term1": term1, "term2": term2, "critical_nu": crit,
               "rq_conclusion": (Fraction(1, 2) - 1 / (2 * nu)) if nu >= crit else None}
    return BoundReport("rate-floor", min(term1, term2),
                       {"nu_gt_1": True, "nu_ge_critical": nu >= crit}, details)


def kappa_window(nu: Fraction, q=None) -> Fraction:
    """Supremum of admissible extension-degree densities kappa at point
    density nu (the length-per-genus budget of the two-constraint
    construction); nu must exceed 2."""
    nu = Fraction(nu)
    if nu <= 2:
        raise ValueError("needs nu > 2")
    if q is None:
        if nu <= 4:
            return (nu - 2) / 2
        if nu < 5:
            return nu - 3
        return (nu - 1) / 2
    t1 = 4 - Fraction(10 * q * q - 2, q ** 4 + 2 * q * q - 1)
    t2 = 5 - Fraction(14 * q * q - 4, q ** 4 + 2 * q * q - 1)
    if nu <= t1:
        return (nu - 2) / 2
    if nu < t2:
        inv = Fraction(q * q, q * q - 1)
        return inv * inv * nu - 3 * inv
    return (nu - 1) / 2


# -- inventory bound on mu_q(k) ----------------------------------------------


def weil_point_guarantee(q: int, k: int, g: int) -> bool:
    """Exact check of 2g + 1 <= q^((k-1)/2) (sqrt(q) - 1), which forces a
    closed point of degree exactly k."""
    c = 2 * g + 1
    # c <= A - B with A = sqrt(q^k), B = sqrt(q^(k-1))
    rhs = q ** k - q ** (k - 1) - c * c
    if rhs < 0:
        return False
    return 4 * c * c * q ** (k - 1) <= rhs * rhs


def mu_upper(q: int, k: int, inventory=None) -> BoundReport:
    """Best bound 2k + g - 1 over curve inventory rows (g, N1) satisfying:
    a) a degree-k point is guaranteed, b) N1 > 5g (strict), c) N1 - g >= 2k - 1.

    The exact genus-0 row (N1 = q + 1) is always included; it reduces to
    length 2k - 1 for k <= q/2 + 1.  Extra rows (an elliptic curve, a
    modular curve, ...) are caller-supplied.
    """
    if k < 1:
        raise ValueError("needs k >= 1")
    rows = [(0, q + 1)]
    if inventory:
        rows.extend((int(g), int(n1)) for g, n1 in inventory)
    best = None
    accepted = []
    rejected = []
    for g, n1 in rows:
        conds = {
            # P^1 has closed points of every degree; positive genus rows
            # go through the exact sufficient criterion
            "degree_k_point": True if g == 0 else weil_point_guarantee(q, k, g),
            "n1_gt_5g": n1 > 5 * g,
            "n1_minus_g": n1 - g >= 2 * k - 1,
        }
        if all(conds.values()):
            bound = 2 * k + g - 1
            accepted.append({"g": g, "n1": n1, "bound": bound})
            if best is None or bound < best:
                best = bound
        else:
            rejected.append({"g": g, "n1": n1, "failed": [c for c, v in conds.items() if not v]})
    return BoundReport("mu-upper", best,
                       {"nonempty_inventory": best is not None},
                       {"accepted": accepted, "rejected": rejected})


def ballet_bound(p: int, k: int) -> BoundReport:
    """Modular-curve bound for mu over GF(p^2):
    (1/k) mu <= 2 + (psi-ceiling((24k-12)/(p-2)) / 12 - 1) / k,
    for prime p >= 7 and k > (p^2 + p + 1)/2.
    """
    hyp = {"p_prime": _is_prime_int(p), "p_ge_7": p >= 7,
           "k_large": 2 * k > p * p + p + 1}
    if not all(hyp.values()):
        return BoundReport("ballet", None, hyp, {})
    x = Fraction(24 * k - 12, p - 2)
    val, witness = ceil_psi(x, p)
    bound = 2 + (Fraction(val, 12) - 1) / k
    return BoundReport("ballet", bound, hyp,
                       {"ceiling": val, "witness_N": witness, "x": x,
                        "mu_bound": bound * k})


def co_bound(point_spec, mu_table, mhat_table, n1: int, g: int, k: int,
             q=None, has_degree_k_point=None) -> BoundReport:
    """Evaluation-divisor bound: sum of mu_q(deg P_i) * Mhat_{q^deg}(u_i)
    over the divisor specification [(deg_i, u_i), ...].

    mu_table maps degree -> mu_q(degree); mhat_table maps (degree, u) ->
    the multiplication complexity of the truncated power-series ring.  The
    trivial entries mu(1) = 1 and Mhat(_, 1) = 1 are built in.  Hypotheses
    checked: N1 > 5g, deg G >= 2k + g - 1, and the degree-k point
    guarantee (from q via the exact criterion, or supplied as a boolean).
    """
    mu_table = dict(mu_table or {})
    mu_table.setdefault(1, 1)
    mhat = dict(mhat_table or {})
    deg_g = sum(d * u for d, u in point_spec)
    if has_degree_k_point is None:
        if q is None:
            raise ValueError("supply q or has_degree_k_point for the point hypothesis")
        has_degree_k_point = weil_point_guarantee(q, k, g)
    hyp = {
        "n1_gt_5g": n1 > 5 * g,
        "degG": deg_g >= 2 * k + g - 1,
        "degree_k_point": bool(has_degree_k_point),
    }
    total = 0
    missing = []
    for d, u in point_spec:
        mu_d = mu_table.get(d)
        mh = 1 if u == 1 else mhat.get((d, u))
        if mu_d is None or mh is None:
            missing.append((d, u))
            continue
        total += mu_d * mh
    if missing:
        return BoundReport("evaluation-divisor", None,
                           dict(hyp, tables_complete=False),
                           {"missing": missing, "degG": deg_g})
    return BoundReport("evaluation-divisor", total, dict(hyp, tables_complete=True),
                       {"degG": deg_g})


def n1_3n2_bound(q: int, k: int, g: int, n1: int, n2: int) -> BoundReport:
    """Degree <= 2 specialisation: mu_q(k) <= N1 + 3 N2 when the curve has
    a degree-k point, N1 > 5g, and N1 + 2 N2 >= 2k + g - 1."""
    hyp = {
        "degree_k_point": weil_point_guarantee(q, k, g),
        "n1_gt_5g": n1 > 5 * g,
        "enough_places": n1 + 2 * n2 >= 2 * k + g - 1,
    }
    value = n1 + 3 * n2 if all(hyp.values()) else None
    return BoundReport("n1-3n2", value, hyp, {"uses": "mu_q(2) <= 3"})


def dv_ratio_report(q: int, g: int, n1: int, n2: int) -> BoundReport:
    """Density (N1/(sqrt(q)-1) + 2 N2/(q-1)) / g against the asymptotic cap 1.

    The exact Fraction value needs square q; for non-squares only the
    comparison with 1 is decided (exactly, by quadratic-integer
    arithmetic).
    """
    if g < 1:
        raise ValueError("needs g >= 1")
    r = _isqrt(q)
    details = {}
    if r * r == q:
        val = (Fraction(n1, r - 1) + Fraction(2 * n2, q - 1)) / g
        return BoundReport("dv-density", val, {"exact": True},
                           {"le_1": val <= 1})
    # N1/(sqrt q - 1) + 2N2/(q-1) <= g  <=>  N1 (q-1) + 2 N2 (sqrt q - 1) <= g (q-1)(sqrt q - 1)
    # move sqrt q terms to one side: compare A + B sqrt(q) with 0 exactly
    # lhs - rhs = [N1(q-1) - 2N2 + g(q-1)] + [2N2 - g(q-1)] sqrt(q)  ... derive:
    # g(q-1)(sqrt q -1) = g(q-1) sqrt q - g(q-1)
    A = n1 * (q - 1) - 2 * n2 + g * (q - 1)
    B = 2 * n2 - g * (q - 1)
    # decide A + B sqrt(q) <= 0 with integer arithmetic
    if B == 0:
        le = A <= 0
    elif B > 0:
        le = A <= 0 and A * A >= B * B * q
    else:
        le = A <= 0 or A * A <= B * B * q
    return BoundReport("dv-density", None, {"exact": False},
                       {"le_1": bool(le), "note": "exact value needs square q"})
