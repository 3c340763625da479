"""Screening quadratic twists of curves with a rational p-torsion point.

Frey's theorem gives #Cl(d)_p | #Sel_p(E_d) under local conditions on d.
This module checks those conditions and the twist root number, builds a
congruence class of D on which both hold uniformly, and joins that class
with the class-group oracle.  Selmer groups are never computed: outputs
are corollary witnesses, not verified Selmer ranks.

Sign convention.  D is always a positive square-free integer.  Under the
default ``"negative"`` convention the twisting field is Q(sqrt(-D)), so
Frey's d is -D and the class group is Cl(-D).  ``"positive"`` uses d = D
(real quadratic twists); class groups of real fields are not available,
so screening requires the negative convention.

Conductors, root numbers and Tate-curve flags are data, shipped in
``data/curves.jsonl`` (one JSON object per line, fields in this order:
label, p, a_invariants, conductor as [[q, e], ...], sign, tate as
{q: bool}, disc_valuations, j_valuations, torsion_point, alpha, optional
base_twists, twists as [[disc, conductor, root_number], ...]).
"""

from __future__ import annotations

import json
import math
import os
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from multiprocessing import get_context

from .arith import (
    ArithmeticDomainError,
    Factorization,
    factorize,
    fundamental_discriminant,
    is_squarefree,
    kronecker,
    squarefree_in_ap,
)
from .qform import (
    QForm,
    discriminant_of,
    has_element_of_order,
    identity,
    order_certificate,
    power,
    reduced_forms,
)

CONVENTIONS = ("negative", "positive")


class UnsatisfiableClassError(ValueError):
    """No residue class meets every condition; ``prime`` is the culprit."""

    def __init__(self, msg, prime=None):
        super().__init__(msg)
        self.prime = prime


class HypothesisError(ValueError):
    """The curve does not satisfy the hypotheses needed for the requested case."""


@dataclass(frozen=True)
class BaseTwist:
    d: int
    disc: int
    conductor: Factorization
    sign: int

    @property
    def N(self) -> int:
        return self.conductor.value()


@dataclass(frozen=True)
class CurveData:
    label: str
    p: int
    a_invariants: tuple
    conductor: Factorization
    sign: int
    tate: dict
    disc_valuations: dict
    j_valuations: dict
    torsion_point: tuple | None = None
    alpha: int | None = None
    base_twists: tuple = ()
    twists: tuple = field(default=(), repr=False)

    @property
    def N(self) -> int:
        return self.conductor.value()

    def base_twist(self, d: int) -> BaseTwist:
        for bt in self.base_twists:
            if bt.d == d:
                return bt
        raise ArithmeticDomainError("no conductor/sign data for the twist of %s by %d" % (self.label, d))


@dataclass(frozen=True)
class CongruenceClass:
    A: int
    B: int
    sign_convention: str = "negative"
    case: int = 1
    d: int | None = None

    def __contains__(self, D: int) -> bool:
        return D % self.B == self.A

    def members(self, X: int, lo: int = 1):
        return squarefree_in_ap(X, self.A, self.B, lo=lo)


# -- curve invariants -------------------------------------------------------------


def weierstrass_invariants(a) -> tuple[int, Fraction]:
    """(discriminant, j-invariant) of the Weierstrass model with invariants a."""
    a1, a2, a3, a4, a6 = a
    b2 = a1 * a1 + 4 * a2
    b4 = 2 * a4 + a1 * a3
    b6 = a3 * a3 + 4 * a6
    b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
    c4 = b2 * b2 - 24 * b4
    disc = -b2 * b2 * b8 - 8 * b4**3 - 27 * b6 * b6 + 9 * b2 * b4 * b6
    if disc == 0:
        raise ArithmeticDomainError("singular curve %r" % (tuple(a),))
    return disc, Fraction(c4**3, disc)


def valuation(x, q: int) -> int:
    """q-adic valuation of a nonzero rational."""
    x = Fraction(x)
    if x == 0:
        raise ArithmeticDomainError("valuation of 0")
    v = 0
    n, d = abs(x.numerator), x.denominator
    while n % q == 0:
        n //= q
        v += 1
    while d % q == 0:
        d //= q
        v -= 1
    return v


def _on_curve(a, P) -> bool:
    a1, a2, a3, a4, a6 = a
    x, y = P
    return y * y + a1 * x * y + a3 * y == x**3 + a2 * x * x + a4 * x + a6


def _ec_add(a, P, Q):
    """Chord-and-tangent addition over Q; None is the point at infinity."""
    if P is None:
        return Q
    if Q is None:
        return P
    a1, a2, a3, a4, a6 = a
    x1, y1 = P
    x2, y2 = Q
    if x1 == x2:
        if y1 + y2 + a1 * x2 + a3 == 0:
            return None
        lam = Fraction(3 * x1 * x1 + 2 * a2 * x1 + a4 - a1 * y1, 2 * y1 + a1 * x1 + a3)
    else:
        lam = Fraction(y2 - y1, 1) / (x2 - x1)
    nu = y1 - lam * x1
    x3 = lam * lam + a1 * lam - a2 - x1 - x2
    y3 = -(lam + a1) * x3 - nu - a3
    return (x3, y3)


def point_order(a, P, bound: int = 20) -> int | None:
    """Order of the rational point P if it is at most ``bound``."""
    Q, k = P, 1
    while Q is not None:
        if k == bound:
            return None
        Q = _ec_add(a, Q, P)
        k += 1
    return k


def validate_curve(curve: CurveData) -> list[str]:
    """Consistency problems between stored and recomputed data (empty if none)."""
    problems = []
    disc, j = weierstrass_invariants(curve.a_invariants)
    for q, v in curve.disc_valuations.items():
        if valuation(disc, q) != v:
            problems.append("v_%d(disc) is %d, stored %d" % (q, valuation(disc, q), v))
    for q, v in curve.j_valuations.items():
        got = valuation(j, q) if j else math.inf
        if got != v:
            problems.append("v_%d(j) is %s, stored %d" % (q, got, v))
    for q in curve.conductor.primes():
        if disc % q:
            problems.append("conductor prime %d does not divide disc" % q)
        if q not in curve.tate:
            problems.append("no Tate flag for %d" % q)
    if curve.alpha is not None and curve.alpha != alpha(curve):
        problems.append("alpha is %d, stored %d" % (alpha(curve), curve.alpha))
    if curve.torsion_point is not None:
        P = curve.torsion_point
        if not _on_curve(curve.a_invariants, P):
            problems.append("torsion point %r not on curve" % (P,))
        elif point_order(curve.a_invariants, P) != curve.p:
            problems.append("torsion point %r does not have order %d" % (P, curve.p))
    return problems


def _parse(rec: dict) -> CurveData:
    ints = lambda m: {int(k): v for k, v in m.items()}
    return CurveData(
        label=rec["label"],
        p=rec["p"],
        a_invariants=tuple(rec["a_invariants"]),
        conductor=Factorization(rec["conductor"]),
        sign=rec["sign"],
        tate=ints(rec["tate"]),
        disc_valuations=ints(rec["disc_valuations"]),
        j_valuations=ints(rec["j_valuations"]),
        torsion_point=tuple(rec["torsion_point"]) if rec.get("torsion_point") else None,
        alpha=rec.get("alpha"),
        base_twists=tuple(
            BaseTwist(b["d"], b["disc"], Factorization(b["conductor"]), b["sign"]) for b in rec.get("base_twists", ())
        ),
        twists=tuple(tuple(t) for t in rec.get("twists", ())),
    )


def load_curves(path=None) -> dict[str, CurveData]:
    """Curve records keyed by label; the bundled dataset by default."""
    if path is None:
        text = resources.files("classdiv").joinpath("data/curves.jsonl").read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    out = {}
    for line in text.splitlines():
        if line.strip():
            c = _parse(json.loads(line))
            out[c.label] = c
    return out


def get_curve(label: str) -> CurveData:
    curves = load_curves()
    if label not in curves:
        raise ArithmeticDomainError("unknown curve %r (have %s)" % (label, ", ".join(sorted(curves))))
    return curves[label]


# -- hypotheses -------------------------------------------------------------------


def s_tilde(curve: CurveData) -> set[int]:
    """Odd q | N with q = -1 (mod p), p does not divide v_q(disc), v_q(j) < 0."""
    p = curve.p
    return {
        q
        for q in curve.conductor.primes()
        if q != 2
        and q % p == p - 1
        and curve.disc_valuations.get(q, 0) % p != 0
        and curve.j_valuations.get(q, 0) < 0
    }


def alpha(curve: CurveData) -> int:
    """Primes q != p with q || N and (v_q(j) >= 0 or Tate at q)."""
    return sum(
        1
        for q, e in curve.conductor
        if e == 1 and q != curve.p and (curve.j_valuations.get(q, 0) >= 0 or curve.tate.get(q, False))
    )


def corollary_exponent(p: int) -> Fraction:
    """1/2 + 3/(2p + 2)."""
    if p not in (3, 5, 7):
        raise ArithmeticDomainError("p must be 3, 5 or 7, got %r" % p)
    return Fraction(1, 2) + Fraction(3, 2 * p + 2)


@dataclass
class HypothesisReport:
    label: str
    case: int
    failures: list

    @property
    def ok(self) -> bool:
        return not self.failures


def check_corollary_hypotheses(curve: CurveData, case: int, d: int | None = None) -> HypothesisReport:
    """Every failed hypothesis for the given case, as human-readable strings."""
    fails = []
    p, N = curve.p, curve.N
    a = tuple(curve.a_invariants)
    if p not in (3, 5, 7):
        fails.append("torsion prime %d not in {3, 5, 7}" % p)
    P = curve.torsion_point
    if P is None:
        fails.append("no torsion point recorded")
    elif not _on_curve(a, P) or point_order(a, P) != p:
        fails.append("recorded point %r is not a rational point of order %d" % (P, p))
    elif a != (0, 0, 0, 0, 1) and any(Fraction(c).denominator % p == 0 for c in P):
        fails.append("torsion point lies in the kernel of reduction mod %d" % p)
    st = s_tilde(curve)
    if st:
        fails.append("S~_E = %s is not empty" % sorted(st))
    vpN = curve.conductor.exponent(p)
    if case == 1:
        if N % 2 == 0:
            fails.append("case 1 needs odd conductor")
        if vpN % 2 == 0:
            fails.append("case 1 needs odd v_p(N), got %d" % vpN)
        if curve.j_valuations.get(p, 0) < 0:
            fails.append("case 1 needs v_p(j) >= 0")
    elif case == 2:
        if N % 2 == 0:
            fails.append("case 2 needs odd conductor")
        if (-1) ** alpha(curve) != -curve.sign:
            fails.append("case 2 needs (-1)^alpha = -sign, got alpha=%d sign=%d" % (alpha(curve), curve.sign))
    elif case == 3:
        if d is None:
            fails.append("case 3 needs d")
        else:
            try:
                bt = curve.base_twist(d)
            except ArithmeticDomainError as e:
                fails.append(str(e))
            else:
                if not set(bt.conductor.primes()) - set(curve.conductor.primes()):
                    fails.append("N(E_d) has no prime outside N(E)")
                if N % 2 == 0 and bt.N % 2 == 0 and d % 4 != 3:
                    fails.append("d must be 3 mod 4 when 2 | gcd(N(E), N(E_d))")
    else:
        fails.append("case must be 1, 2 or 3")
    return HypothesisReport(curve.label, case, fails)


# -- conditions on D ----------------------------------------------------------------


def _check_convention(convention: str):
    if convention not in CONVENTIONS:
        raise ArithmeticDomainError("convention must be one of %s" % (CONVENTIONS,))


def twist_index(D: int, convention: str = "negative") -> int:
    """Frey's d for the positive square-free D."""
    _check_convention(convention)
    if D < 1 or not is_squarefree(D):
        raise ArithmeticDomainError("D must be a positive square-free integer, got %r" % D)
    return -D if convention == "negative" else D


def twist_discriminant(D: int, convention: str = "negative") -> int:
    return fundamental_discriminant(twist_index(D, convention))


def frey_conditions(curve: CurveData, D: int, convention: str = "negative") -> dict:
    """Frey's conditions for d = twist_index(D), keyed by (name, prime)."""
    d = twist_index(D, convention)
    p, N = curve.p, curve.N
    if math.gcd(D, p * N) != 1:
        raise ArithmeticDomainError("D=%d is not coprime to pN=%d" % (D, p * N))
    out = {}
    if N % 2 == 0:
        out[("d = 3 mod 4", 2)] = d % 4 == 3
    for q in curve.conductor.primes():
        if q in (2, p):
            continue
        want = -1 if (curve.tate[q] or curve.j_valuations.get(q, 0) >= 0) else 1
        out[("(d/q)", q)] = kronecker(d, q) == want
    # The printed condition leaves q unbound; it is read as q = p.
    if curve.j_valuations.get(p, 0) < 0:
        out[("(d/p) = -1", p)] = kronecker(d, p) == -1
    return out


def frey_admissible(curve: CurveData, D: int, convention: str = "negative") -> bool:
    return all(frey_conditions(curve, D, convention).values())


def twist_sign(curve: CurveData, D: int, convention: str = "negative", base: int | None = None) -> int:
    """Root number of the twist of E by the field of twist_index(D).

    Uses sgn(E_D) = sgn(E) chi_D(-N(E)), which needs the twist discriminant
    coprime to N(E).  With ``base = d`` the twist is read as a twist of the
    stored E_d by D/d, so only coprimality with N(E_d) is needed.
    """
    t = twist_index(D, convention)
    if base is None:
        N, s = curve.N, curve.sign
    else:
        bt = curve.base_twist(base)
        if D % base:
            raise ArithmeticDomainError("%d does not divide D=%d" % (base, D))
        t //= base
        if t == 1:
            return bt.sign
        N, s = bt.N, bt.sign
    disc = fundamental_discriminant(t)
    if math.gcd(disc, N) != 1:
        raise ArithmeticDomainError("twist discriminant %d is not coprime to N=%d" % (disc, N))
    return s * kronecker(disc, -N)


def _structural(curve: CurveData, D: int, case: int, d: int | None, convention: str):
    """(name, prime) of the first coprimality/divisibility requirement D
    misses, or None.  These decide which residues are candidates at all."""
    if case == 3:
        bt = curve.base_twist(d)
        if D % d:
            return ("d | D", _primes(d)[0])
        rest = D // d
        for q in _primes(bt.N):
            if rest % q == 0:
                return ("gcd(D/d, N(E_d)) = 1", q)
        if bt.N % 2 == 0 and (twist_index(D, convention) // d) % 4 != 1:
            return ("D/d twist = 1 mod 4", 2)
    for q in _primes(curve.p * curve.N):
        if D % q == 0:
            return ("gcd(D, pN) = 1", q)
    if convention == "positive" and D == 1:
        return ("D > 1", None)
    return None


def _case_ok(curve: CurveData, D: int, case: int, d: int | None, convention: str) -> dict:
    """Frey's conditions and the sign condition for a structurally valid D."""
    conds = frey_conditions(curve, D, convention)
    conds[("sign = +1", None)] = twist_sign(curve, D, convention, base=d if case == 3 else None) == 1
    return conds


@lru_cache(maxsize=None)
def _primes(n: int) -> tuple[int, ...]:
    return tuple(factorize(n).primes())


def _class_modulus(curve: CurveData, case: int, d: int | None) -> int:
    primes = set(factorize(curve.p * curve.N).primes())
    two = curve.N % 2 == 0
    if case == 3:
        bt = curve.base_twist(d)
        primes |= set(bt.conductor.primes()) | set(factorize(d).primes())
        two = two or bt.N % 2 == 0
    primes.discard(2)
    return math.prod(primes) * (8 if two else 1)


def _representative(A: int, B: int, convention: str = "negative") -> int | None:
    D = A if A > 0 else B
    if D == 1 and convention == "positive":
        D += B
    for _ in range(200):
        if is_squarefree(D):
            return D
        D += B
    return None


def build_class(curve: CurveData, case: int, d: int | None = None, convention: str = "negative",
                check_hypotheses: bool = True, samples: int = 500, seed: int = 0) -> CongruenceClass:
    """Smallest A mod B such that every square-free D = A (mod B) meets
    Frey's conditions, the case conditions and has twist sign +1.

    The conditions depend only on D mod B, so one square-free
    representative decides each residue; ``samples`` further members are
    re-checked as a guard.
    """
    _check_convention(convention)
    if case == 3 and (d is None or d < 1 or not is_squarefree(d)):
        raise ArithmeticDomainError("case 3 needs a positive square-free d")
    if check_hypotheses:
        rep = check_corollary_hypotheses(curve, case, d)
        if not rep.ok:
            raise HypothesisError("%s, case %d: %s" % (curve.label, case, "; ".join(rep.failures)))
    B = _class_modulus(curve, case, d)
    table = []
    blocked = {}
    for A in range(B):
        if not is_squarefree(math.gcd(A, B)):
            continue
        D = _representative(A, B, convention)
        if D is None:
            continue
        bad = _structural(curve, D, case, d, convention)
        if bad is not None:
            blocked[bad[1]] = blocked.get(bad[1], 0) + 1
            continue
        table.append((A, _case_ok(curve, D, case, d, convention)))
    if not table:
        q = max(blocked, key=lambda k: (blocked[k], -(k or 0))) if blocked else None
        raise UnsatisfiableClassError(
            "%s, case %d: no residue meets the divisibility conditions (at %s)" % (curve.label, case, q), prime=q
        )
    for A, conds in table:
        if all(conds.values()):
            cls = CongruenceClass(A, B, convention, case, d)
            _validate_class(curve, cls, samples, seed)
            return cls
    # Find which prime's conditions block every class.
    keyed = sorted({k[1] for _, conds in table for k in conds if k[1] is not None})
    for q in keyed:
        if any(all(v for k, v in conds.items() if k[1] != q) for _, conds in table):
            raise UnsatisfiableClassError(
                "%s, case %d: conditions at %d conflict with the others" % (curve.label, case, q), prime=q
            )
    raise UnsatisfiableClassError("%s, case %d: no admissible class" % (curve.label, case))


def class_member_ok(curve: CurveData, cls: CongruenceClass, D: int) -> bool:
    if D % cls.B != cls.A or not is_squarefree(D):
        return False
    if _structural(curve, D, cls.case, cls.d, cls.sign_convention) is not None:
        return False
    return all(_case_ok(curve, D, cls.case, cls.d, cls.sign_convention).values())


def sample_members(cls: CongruenceClass, n: int, seed: int = 0) -> list[int]:
    """n square-free members drawn with a seeded RNG (all of them if fewer)."""
    X = max(10**5, 4 * n * cls.B)
    pool = list(cls.members(X))
    rng = random.Random(seed)
    return sorted(pool if len(pool) <= n else rng.sample(pool, n))


def _validate_class(curve, cls, samples, seed):
    if samples <= 0:
        return
    for D in sample_members(cls, samples, seed):
        if not class_member_ok(curve, cls, D):
            raise AssertionError("class %r fails at D=%d" % (cls, D))


# -- screening ----------------------------------------------------------------------


@dataclass(frozen=True)
class Witness:
    D: int
    h: int
    certificate: QForm
    A: int
    B: int


def _screen_range(args):
    lo, hi, A, B, p = args
    out = []
    for D in squarefree_in_ap(hi, A, B, lo=lo):
        disc = discriminant_of(D).value
        if has_element_of_order(disc, p):
            out.append(Witness(D, len(reduced_forms(disc)), order_certificate(disc, p), A, B))
    return out


def screen_twists(curve: CurveData, X: int, case: int, d: int | None = None, convention: str = "negative",
                  shards: int = 1, check_hypotheses: bool = True, samples: int = 500, seed: int = 0):
    """Members D <= X of the built class with an element of order p in Cl(-D).

    Returns (class, witnesses); each witness carries h(-D) and a reduced
    form of exact order p.
    """
    if convention != "negative":
        raise ArithmeticDomainError("screening needs the negative convention (Cl(-D) is imaginary)")
    cls = build_class(curve, case, d, convention, check_hypotheses, samples, seed)
    shards = max(1, shards)
    edges = [1 + (X * i) // shards for i in range(shards)] + [X + 1]
    tasks = [(edges[i], edges[i + 1] - 1, cls.A, cls.B, curve.p) for i in range(shards) if edges[i] < edges[i + 1]]
    if len(tasks) <= 1:
        parts = [_screen_range(t) for t in tasks]
    else:
        workers = min(len(tasks), os.cpu_count() or 1)
        with ProcessPoolExecutor(max_workers=workers, mp_context=get_context("fork")) as pool:
            parts = list(pool.map(_screen_range, tasks))
    return cls, [w for part in parts for w in part]


def revalidate_witness(curve: CurveData, cls: CongruenceClass, w: Witness) -> list[str]:
    """Independent re-check of one witness; returns the failed checks."""
    bad = []
    if not is_squarefree(w.D):
        bad.append("not square-free")
    if w.D % cls.B != cls.A:
        bad.append("not in class")
    disc = discriminant_of(w.D).value
    h = len(reduced_forms(disc))
    if h != w.h or h % curve.p:
        bad.append("p does not divide h")
    if not class_member_ok(curve, cls, w.D):
        bad.append("class conditions fail")
    if w.certificate == identity(disc) or power(w.certificate, curve.p) != identity(disc):
        bad.append("certificate is not of order p")
    return bad


def witnesses_csv(witnesses) -> str:
    lines = ["D,h,certificate,A,B"]
    for w in witnesses:
        a, b, c = w.certificate
        lines.append("%d,%d,(%d %d %d),%d,%d" % (w.D, w.h, a, b, c, w.A, w.B))
    return "\n".join(lines) + "\n"
