"""Congruence-restricted constructions of discriminants with large class
group torsion.

Two Diophantine families produce square-free D whose class group Cl(-D)
contains an element of prescribed order:

* g = 2 (mod 4), with g1 = g/2 odd:  t^2 D = m^g1 - n^2, gcd(m, 2n) = 1,
  m^g1 < (D+1)^2  gives order g1, and order 2*g1 when D has two odd prime
  factors.
* g = 0 (mod 4):  D = 2 m^(g/2) - t^2, gcd(m, 2t) = 1, m^(g/2) < D + 1
  gives order g.

To land D in a prescribed class A (mod B) the solutions are restricted to a
residue class modulo a lifted modulus B'.  The residue data are produced by
:func:`lemma41_triple` (first family) and :func:`is_special` (second).

Sign convention: every generator emits D in the class of the witness
target, i.e. ``D = w.target (mod w.modulus)``.  Building the witness for
``target = A'`` puts D in A (mod B); building it for ``-A'`` reproduces the
literal bookkeeping of the original argument, where D = -A' (mod B').
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from typing import Iterator

from .arith import (
    ArithmeticDomainError,
    crt,
    factorize,
    hensel_sqrt,
    iroot,
    is_prime,
    is_squarefree,
    primes_up_to,
)

log = logging.getLogger(__name__)


class NoSolutionError(ValueError):
    """A residue system that was expected to be solvable has no solution."""


class LiftError(ValueError):
    """No admissible lifted progression passes the required check."""


@dataclass(frozen=True)
class SpecialWitness:
    m0: int
    t0: int
    modulus: int
    target: int
    g: int
    m: int  # integer representatives with gcd(m, 2t) = 1
    t: int

    def check(self) -> bool:
        B = self.modulus
        return (
            (2 * pow(self.m0, self.g // 2, B) - self.t0 * self.t0 - self.target) % B == 0
            and math.gcd(self.t0, B) == 1
            and (self.m - self.m0) % B == 0
            and (self.t - self.t0) % B == 0
            and math.gcd(self.m, 2 * self.t) == 1
        )


@dataclass(frozen=True)
class TripleWitness:
    m1: int
    n1: int
    t1: int
    modulus: int
    target: int
    g1: int
    m: int  # integer representatives with gcd(m, 2n) = 1
    n: int
    t: int

    def check(self) -> bool:
        b = self.modulus
        return (
            (pow(self.m1, self.g1, b) - self.n1 * self.n1 - self.t1 * self.t1 * self.target) % b == 0
            and math.gcd(self.t1, b) == 1
            and math.gcd(self.m1, b) == 1
            and all((x - y) % b == 0 for x, y in ((self.m, self.m1), (self.n, self.n1), (self.t, self.t1)))
            and math.gcd(self.m, 2 * self.n) == 1
        )


@dataclass(frozen=True)
class ProgressionLift:
    A_prime: int
    B_prime: int
    r: int
    A: int
    B: int
    case: str
    sign: int = 1

    @property
    def target(self) -> int:
        """Residue mod B' that witnesses are built for."""
        return self.sign * self.A_prime % self.B_prime


@dataclass(frozen=True)
class BoxParams:
    X: int
    T: int
    g1: int
    M: int
    N: int


def _check_even_g(g: int) -> None:
    if g < 4 or g % 2:
        raise ArithmeticDomainError("g must be an even integer >= 4, got %r" % g)


# -- special pairs --------------------------------------------------------


def _special_reps(m0: int, t0: int, B: int) -> tuple[int, int]:
    """Integers m = m0, t = t0 (mod B) with gcd(m, 2t) = 1."""
    for j in range(64 * B):
        t = t0 + j * B
        if t <= 0:
            continue
        for i in range(64):
            m = m0 + i * B
            if m > 0 and math.gcd(m, 2 * t) == 1:
                return m, t
    raise NoSolutionError("no representatives found for (%d, %d) mod %d" % (m0, t0, B))


def is_special(A: int, B: int, g: int) -> SpecialWitness | None:
    """Witness that 2 m^(g/2) - t^2 = A (mod B) is solvable with
    gcd(t, B) = 1 and gcd(m, 2t) = 1, or None.

    Residues mod B suffice: when B is even m0 must be odd; otherwise odd
    coprime representatives always exist by CRT because gcd(t, B) = 1.
    Returns the lexicographically smallest (m0, t0).
    """
    _check_even_g(g)
    if B < 2:
        raise ArithmeticDomainError("modulus must be >= 2")
    g1 = g // 2
    A %= B
    units = [t for t in range(B) if math.gcd(t, B) == 1]
    by_value: dict[int, int] = {}
    for t in units:
        by_value.setdefault((A + t * t) % B, t)
    for m0 in range(B):
        if B % 2 == 0 and m0 % 2 == 0:
            continue
        t0 = by_value.get(2 * pow(m0, g1, B) % B)
        if t0 is not None:
            m, t = _special_reps(m0, t0, B)
            return SpecialWitness(m0, t0, B, A, g, m, t)
    return None


# -- constructive residue lemmas ------------------------------------------


def lemma42_uv(A: int, p: int) -> tuple[int, int]:
    """Units u, v mod p (p >= 7 prime) with A + u^2 = v^2 (mod p).

    Uses v^2 - u^2 = (v - u)(v + u): v = (A+1)/2, u = (A-1)/2, or when that
    makes uv = 0 (A = +-1), v = 1 + A/4, u = -1 + A/4.
    """
    if p < 7 or not is_prime(p):
        raise ArithmeticDomainError("lemma42_uv needs a prime p >= 7, got %r" % p)
    A %= p
    if A == 0:
        return 1, 1
    half = pow(2, -1, p)
    v, u = (A + 1) * half % p, (A - 1) * half % p
    if u * v % p == 0:
        quarter = half * half % p
        v, u = (1 + A * quarter) % p, (-1 + A * quarter) % p
        if u * v % p == 0:
            raise AssertionError("both branches vanish mod %d" % p)
    return u, v


def _triple_prime_power(a: int, p: int, k: int, g1: int) -> tuple[int, int, int]:
    """(m, n, t) mod p^k with m^g1 - n^2 = t^2 a, t and m units."""
    q = p**k
    if p >= 7:
        u, v = lemma42_uv(a, p)
        m = 1
        t = pow(v, -1, p)
        rhs = (1 - t * t * a) % q
        n = hensel_sqrt(rhs, p, k)[0]
        return m, n, t

    def residual(m, n, t, mod):
        return (pow(m, g1, mod) - n * n - t * t * a) % mod

    # Depth-first search over lifts, level by level.
    def extend(sol, pe):
        if pe == q:
            return sol
        nxt = pe * p
        m, n, t = sol
        for i, j, l in itertools.product(range(p), repeat=3):
            cand = (m + i * pe, n + j * pe, t + l * pe)
            if residual(*cand, nxt) == 0:
                found = extend(cand, nxt)
                if found:
                    return found
        return None

    for m, n, t in itertools.product(range(1, p), range(p), range(1, p)):
        if residual(m, n, t, p) == 0:
            found = extend((m, n, t), p)
            if found:
                return found
    raise NoSolutionError("m^%d - n^2 = t^2*%d has no unit solution mod %d^%d" % (g1, a, p, k))


def lemma41_triple(a: int, b: int, g1: int) -> TripleWitness:
    """Residues (m1, n1, t1) mod b with m1^g1 - n1^2 = t1^2 a (mod b) and
    gcd(t1, b) = gcd(m1, b) = 1, solved prime power by prime power and
    glued with CRT."""
    if b < 2:
        raise ArithmeticDomainError("modulus must be >= 2")
    if g1 < 2:
        raise ArithmeticDomainError("g1 must be >= 2")
    if g1 % 2 == 0 and b % 2 == 0:
        raise ArithmeticDomainError("even g1 needs an odd modulus")
    parts = [(_triple_prime_power(a, p, e, g1), p**e) for p, e in factorize(b)]
    m1 = crt([(s[0], q) for s, q in parts])[0]
    n1 = crt([(s[1], q) for s, q in parts])[0]
    t1 = crt([(s[2], q) for s, q in parts])[0]
    m, n, t = _triple_reps(m1, n1, t1, b)
    return TripleWitness(m1, n1, t1, b, a % b, g1, m, n, t)


def _triple_reps(m1, n1, t1, b):
    m = m1 if m1 % 2 else m1 + b
    if m % 2 == 0:
        raise NoSolutionError("no odd representative for m1 = %d mod %d" % (m1, b))
    n = next(n1 + j * b for j in itertools.count() if n1 + j * b > 0 and math.gcd(m, n1 + j * b) == 1)
    t = t1 if t1 > 0 else t1 + b
    return m, n, t


# -- progression lifting --------------------------------------------------


def _valuation(n: int, p: int) -> int:
    v = 0
    while n and n % p == 0:
        n //= p
        v += 1
    return v


def _smallest_odd_prime_not_dividing(B: int) -> int:
    return next(p for p in primes_up_to(10_000) if p > 2 and B % p)


def lift_progression(
    A: int, B: int, g: int, case: str = "case1", sign: int = 1, max_tries: int = 10_000
) -> ProgressionLift:
    """Sub-progression A' (mod B') of A (mod B) whose members avoid p^2 for
    every p | B r (and avoid 4), and are divisible by r.

    case1: r = 1 if gcd(A, B) > 2, else the smallest odd prime not dividing
    B.  case2: r = 1 and (A', B') must itself be special for g.  In both
    cases 2 is among the sieved primes, so no member is divisible by 4.

    ``sign`` selects the residue the witnesses will target: +1 emits D in
    A' (mod B'), -1 emits D in -A' (mod B').  The validity check (Lemma
    solvability or specialness) is applied to ``sign * A'``.
    """
    if sign not in (1, -1):
        raise ArithmeticDomainError("sign must be +1 or -1")
    _check_even_g(g)
    if B < 2:
        raise ArithmeticDomainError("modulus must be >= 2")
    G = math.gcd(A, B)
    if not is_squarefree(G):
        raise ArithmeticDomainError("gcd(A, B) = %d is not square-free" % G)
    if case == "case1":
        r = 1 if G > 2 else _smallest_odd_prime_not_dividing(B)
        primes = sorted(set(factorize(B).primes()) | {2} | ({r} if r > 1 else set()))
    elif case == "case2":
        r = 1
        primes = sorted(set(factorize(B).primes()) | {2})
    else:
        raise ArithmeticDomainError("unknown case %r" % case)

    local = []
    for p in primes:
        v = _valuation(B, p)
        e = max(v, 2)
        q = p**e
        base = p**v
        cands = [
            x
            for x in range(q)
            if (x - A) % base == 0 and x % (p * p) != 0 and (p != r or x % p == 0)
        ]
        if not cands:
            raise LiftError("no admissible residue modulo %d^%d" % (p, e))
        local.append((cands, q))

    # every prime of B is sieved, so B | B'
    for tries, choice in enumerate(itertools.product(*(c for c, _ in local))):
        if tries >= max_tries:
            break
        Ap, Bp = crt([(x, q) for x, (_, q) in zip(choice, local)])
        if case == "case1":
            try:
                lemma41_triple(sign * Ap, Bp, g // 2)
            except NoSolutionError:
                continue
        elif is_special(sign * Ap, Bp, g) is None:
            continue
        return ProgressionLift(Ap, Bp, r, A, B, case, sign)
    raise LiftError("no special lift of %d mod %d for g=%d" % (A, B, g))


# -- box parameters -------------------------------------------------------


def default_T(X: int, g: int) -> int:
    """floor(X^((g1-2)/(4(g1+1)))) clamped to [1, sqrt(X)/2^(g1+3)]."""
    _check_even_g(g)
    if g % 4 != 2:
        raise ArithmeticDomainError("default_T is defined for g = 2 (mod 4)")
    g1 = g // 2
    T = iroot(X ** (g1 - 2), 4 * (g1 + 1))
    upper = math.isqrt(X) >> (g1 + 3)
    return max(1, min(T, upper))


def box_params(X: int, T: int, g1: int) -> BoxParams:
    """M = floor(T^(2/g1) X^(1/g1) / 2), N = floor(T X^(1/2) / 2^(g1+1))."""
    M = iroot(T * T * X, g1) // 2
    N = math.isqrt(T * T * X) >> (g1 + 1)
    return BoxParams(X, T, g1, M, N)


# -- generators -----------------------------------------------------------


def _class_range(lo: int, hi: int, r: int, mod: int) -> range:
    """Integers x with lo < x <= hi and x = r (mod mod)."""
    start = lo + 1 + (r - lo - 1) % mod
    return range(start, hi + 1, mod)


def _sqrt_mod_square(value: int, t: int) -> list[int]:
    """All n mod t^2 with n^2 = value (mod t^2)."""
    residues, modulus = [0], 1
    for p, e in factorize(t):
        local = hensel_sqrt(value, p, 2 * e)
        if not local:
            return []
        q = p ** (2 * e)
        residues = [crt([(x, modulus), (y, q)])[0] for x in residues for y in local]
        modulus *= q
    return residues


def gen_case1(X: int, T: int, g: int, w: TripleWitness, stats: dict | None = None) -> Iterator[tuple[int, int, int, int]]:
    """All (m, n, t, D) with m in (M, 2M], n in (N, 2N], t in (T, 2T],
    m^g1 - n^2 = D t^2, gcd(m, 2n) = 1, (m, n, t) = w (mod B'), and
    1 <= D <= X, m^g1 < (D+1)^2.  Ascending in (t, m, n).

    ``stats`` (optional) collects counts of tuples dropped by the D <= X and
    m^g1 < (D+1)^2 checks, which cannot trigger under the default T.
    """
    _check_even_g(g)
    if g % 4 != 2:
        raise ArithmeticDomainError("case 1 needs g = 2 (mod 4)")
    g1 = g // 2
    if w.g1 != g1:
        raise ArithmeticDomainError("witness built for g1=%d, not %d" % (w.g1, g1))
    box = box_params(X, T, g1)
    Bp = w.modulus
    if stats is not None:
        stats.setdefault("out_of_range", 0)
        stats.setdefault("height_violations", 0)
    for t in _class_range(T, 2 * T, w.t1, Bp):
        t2 = t * t
        for m in _class_range(box.M, 2 * box.M, w.m1, Bp):
            if m % 2 == 0 or math.gcd(m, t) != 1:
                continue
            mg = m**g1
            roots = _sqrt_mod_square(mg, t)
            if not roots:
                continue
            mod = Bp * t2
            ns = []
            for x in roots:
                r = crt([(x, t2), (w.n1 % Bp, Bp)])[0]
                ns.extend(_class_range(box.N, 2 * box.N, r, mod))
            for n in sorted(ns):
                if math.gcd(m, n) != 1:
                    continue
                D = (mg - n * n) // t2
                if D < 1 or D > X:
                    if stats is not None:
                        stats["out_of_range"] += 1
                    continue
                if mg >= (D + 1) ** 2:
                    if stats is not None:
                        stats["height_violations"] += 1
                    continue
                yield m, n, t, D


def gen_case2(X: int, g: int, w: SpecialWitness) -> Iterator[tuple[int, int, int]]:
    """All (m, t, D) with D = 2 m^(g/2) - t^2 in [1, X], m^(g/2) < D + 1,
    gcd(m, 2t) = 1 and (m, t) = (m0, t0) (mod B').  Ascending in (m, t)."""
    _check_even_g(g)
    if g % 4:
        raise ArithmeticDomainError("case 2 needs g = 0 (mod 4)")
    if w.g != g:
        raise ArithmeticDomainError("witness built for g=%d, not %d" % (w.g, g))
    g1 = g // 2
    Bp = w.modulus
    mmax = iroot(X, g1)
    for m in _class_range(0, mmax, w.m0, Bp):
        if m % 2 == 0:
            continue
        mg = m**g1
        # m^g1 <= D  <=>  t^2 <= m^g1 ;  D <= X  <=>  t^2 >= 2 m^g1 - X
        low = 2 * mg - X
        tmin = math.isqrt(low - 1) + 1 if low > 0 else 1
        tmax = math.isqrt(mg)
        for t in _class_range(tmin - 1, tmax, w.t0, Bp):
            if math.gcd(m, t) != 1:
                continue
            yield m, t, 2 * mg - t * t


def _g4_hypothesis(A: int, B: int, bound: int | None = None) -> tuple[int, int] | None:
    bound = bound or 8 * B
    for x in range(1, bound + 1):
        for y in range(0, math.isqrt(2 * x * x - 1) + 1):
            v = 2 * x * x - y * y
            if v > 0 and (v - A) % B == 0 and math.gcd(x, 2 * y) == 1 and is_squarefree(v):
                return x, y
    return None


def gen_case3_g4(X: int, A: int, B: int, sign: int = 1) -> Iterator[int]:
    """D = p * gcd(A, B) <= X over primes p > gcd(A, B) with
    p * gcd(A, B) = 1 (mod 8) and D = sign*A (mod B).

    Requires integers x, y with 0 < 2x^2 - y^2 = A (mod B) square-free and
    gcd(x, 2y) = 1; if a bounded search finds none, a warning is logged and
    nothing is emitted.
    """
    if sign not in (1, -1):
        raise ArithmeticDomainError("sign must be +1 or -1")
    if _g4_hypothesis(sign * A, B) is None:
        log.warning("no x, y with 0 < 2x^2 - y^2 = %d (mod %d) square-free; hypothesis fails", sign * A, B)
        return
    G = math.gcd(A, B)
    target = sign * A
    for p in primes_up_to(X // G):
        if p <= G:
            continue
        D = p * G
        if D % 8 == 1 and (D - target) % B == 0:
            yield D
