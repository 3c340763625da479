"""Class groups of imaginary quadratic fields via reduced binary quadratic
forms.

Forms are ``(a, b, c)`` with ``b^2 - 4ac = disc < 0`` and ``a > 0``.
Composition is Gauss composition (Cohen, Algorithm 5.4.7) followed by
reduction, so every group operation returns the canonical reduced
representative.  :func:`has_element_of_order` is the ground-truth oracle
used by the rest of the package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple

from .arith import (
    ArithmeticDomainError,
    Factorization,
    crt,
    factorize,
    hensel_sqrt,
    is_squarefree,
)

# Reduced-form enumeration uses a cached table of square roots modulo 4a
# for a below this bound; larger a fall back to hensel_sqrt + CRT.
ROOT_TABLE_LIMIT = 2048


class Discriminant(NamedTuple):
    value: int
    source_D: int


class QForm(NamedTuple):
    a: int
    b: int
    c: int

    @property
    def disc(self) -> int:
        return self.b * self.b - 4 * self.a * self.c

    def inverse(self) -> "QForm":
        return reduce(QForm(self.a, -self.b, self.c))

    def is_reduced(self) -> bool:
        a, b, c = self
        if not (abs(b) <= a <= c):
            return False
        return b >= 0 if (abs(b) == a or a == c) else True

    def is_ambiguous(self) -> bool:
        """A reduced form whose class has order dividing 2."""
        a, b, c = self
        return b == 0 or b == a or a == c


@dataclass
class ClassGroupSummary:
    disc: Discriminant
    h: int
    exponent: int
    reduced_forms: list[QForm] = field(repr=False)


def discriminant_of(D: int) -> Discriminant:
    """Field discriminant of Q(sqrt(-D)) for square-free D >= 1."""
    if D < 1 or not is_squarefree(D):
        raise ArithmeticDomainError("D must be a positive square-free integer, got %r" % D)
    return Discriminant(-D if D % 4 == 3 else -4 * D, D)


def is_fundamental(disc: int) -> bool:
    if disc >= 0:
        return False
    if disc % 4 == 1:
        return is_squarefree(-disc)
    if disc % 4 == 0:
        m = -disc // 4
        return m % 4 in (1, 2) and is_squarefree(m)
    return False


def _disc_value(disc) -> int:
    return disc.value if isinstance(disc, Discriminant) else int(disc)


def _checked_disc(disc) -> int:
    d = _disc_value(disc)
    if not is_fundamental(d):
        raise ArithmeticDomainError("%d is not a negative fundamental discriminant" % d)
    return d


def reduce(f) -> QForm:
    a, b, c = f
    if a <= 0 or b * b - 4 * a * c >= 0:
        raise ArithmeticDomainError("form %r is not positive definite" % (tuple(f),))
    while True:
        if not (-a < b <= a):
            r = (a - b) // (2 * a)
            b, c = b + 2 * r * a, a * r * r + b * r + c
        if a > c:
            a, b, c = c, -b, a
            continue
        break
    if a == c and b < 0:
        b = -b
    return QForm(a, b, c)


def identity(disc) -> QForm:
    d = _disc_value(disc)
    return QForm(1, d % 2, (d % 2 - d) // 4)


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return x0, y0, a


def compose(f, g) -> QForm:
    """Reduced representative of the product class of f and g."""
    a1, b1, c1 = f
    a2, b2, c2 = g
    disc = b1 * b1 - 4 * a1 * c1
    if b2 * b2 - 4 * a2 * c2 != disc:
        raise ArithmeticDomainError("forms have different discriminants")
    if a1 > a2:
        a1, b1, c1, a2, b2, c2 = a2, b2, c2, a1, b1, c1
    s = (b1 + b2) // 2
    n = b2 - s
    if a2 % a1 == 0:
        y1, d = 0, a1
    else:
        u, _, d = _xgcd(a2, a1)
        y1 = u
    if s % d == 0:
        y2, x2, d1 = -1, 0, d
    else:
        u, v, d1 = _xgcd(s, d)
        x2, y2 = u, -v
    v1 = a1 // d1
    v2 = a2 // d1
    r = (y1 * y2 * n - x2 * c2) % v1
    b3 = b2 + 2 * v2 * r
    a3 = v1 * v2
    c3 = (b3 * b3 - disc) // (4 * a3)
    return reduce((a3, b3, c3))


def power(f, n: int) -> QForm:
    if n < 0:
        f, n = f.inverse(), -n
    result = identity(f.disc)
    base = reduce(f)
    while n:
        if n & 1:
            result = compose(result, base)
        n >>= 1
        if n:
            base = compose(base, base)
    return result


@lru_cache(maxsize=ROOT_TABLE_LIMIT)
def _square_roots_mod_4a(a: int) -> dict[int, tuple[int, ...]]:
    """Map r -> all b in [0, a] with b^2 = r (mod 4a)."""
    table: dict[int, list[int]] = {}
    m = 4 * a
    for b in range(a + 1):
        table.setdefault(b * b % m, []).append(b)
    return {r: tuple(bs) for r, bs in table.items()}


def _roots_b(disc: int, a: int) -> list[int]:
    """b in (-a, a] with b^2 = disc (mod 4a)."""
    if a <= ROOT_TABLE_LIMIT:
        nonneg = _square_roots_mod_4a(a).get(disc % (4 * a), ())
    else:
        residues = [0]
        modulus = 1
        for p, e in factorize(4 * a):
            local = hensel_sqrt(disc, p, e)
            if not local:
                return []
            residues = [crt([(x, modulus), (y, p**e)])[0] for x in residues for y in local]
            modulus *= p**e
        nonneg = sorted({min(x % (2 * a), 2 * a - x % (2 * a)) for x in residues})
    out = []
    for b in nonneg:
        out.append(b)
        if 0 < b < a:
            out.append(-b)
    return out


def reduced_forms(disc) -> list[QForm]:
    """All reduced forms of the fundamental discriminant, sorted."""
    d = _checked_disc(disc)
    return _reduced_forms(d)


@lru_cache(maxsize=4096)
def _reduced_forms_cached(d: int) -> tuple[QForm, ...]:
    return tuple(_enumerate(d))


def _reduced_forms(d: int) -> list[QForm]:
    return list(_reduced_forms_cached(d))


def _enumerate(d: int) -> list[QForm]:
    forms = []
    amax = math.isqrt(-d // 3)
    small = min(amax, ROOT_TABLE_LIMIT)
    tables = _root_tables(small)
    for a in range(1, small + 1):
        nonneg = tables[a].get(d % (4 * a))
        if not nonneg:
            continue
        a4 = 4 * a
        for b in nonneg:
            c = (b * b - d) // a4
            if c < a:
                continue
            forms.append(QForm(a, b, c))
            if 0 < b < a and a != c:
                forms.append(QForm(a, -b, c))
    for a in range(small + 1, amax + 1):
        for b in _roots_b(d, a):
            c = (b * b - d) // (4 * a)
            if c < a:
                continue
            if b < 0 and (a == c or -b == a):
                continue
            forms.append(QForm(a, b, c))
    forms.sort()
    return forms


_TABLES: list[dict] = [{}]


def _root_tables(n: int) -> list[dict]:
    while len(_TABLES) <= n:
        _TABLES.append(_square_roots_mod_4a(len(_TABLES)))
    return _TABLES


def class_number(disc) -> int:
    return len(reduced_forms(disc))


def element_order(f, h_fact: Factorization) -> int:
    """Order of the class of f, given the factorization of the class number."""
    f = reduce(f)
    e = identity(f.disc)
    order = h_fact.value()
    for p, k in h_fact:
        for _ in range(k):
            if power(f, order // p) == e:
                order //= p
            else:
                break
    return order


def class_group(disc) -> ClassGroupSummary:
    """Class number, exponent (running lcm of element orders) and forms."""
    d = _checked_disc(disc)
    forms = _reduced_forms(d)
    h = len(forms)
    hf = factorize(h)
    exponent = 1
    for f in forms:
        if exponent == h:
            break
        exponent = math.lcm(exponent, element_order(f, hf))
    src = -d if d % 4 else -d // 4
    return ClassGroupSummary(Discriminant(d, src), h, exponent, forms)


def two_torsion_count(disc) -> int:
    """Number of classes of order dividing 2."""
    return sum(1 for f in reduced_forms(disc) if f.is_ambiguous())


def _valuation(n: int, p: int) -> int:
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def has_element_of_order(disc, g: int) -> bool:
    """True iff Cl(disc) contains an element of order g (g | exponent).

    Works one prime power q^k || g at a time: an element whose order is
    divisible by q^k is searched for among the q-primary projections
    f^(h / q^v) of the reduced forms, with early exit.  Two shortcuts are
    exact: q | h suffices when k = 1 (Cauchy), and for q^k = 4 the 2-part of
    the exponent exceeds 2 iff the ambiguous classes do not exhaust the
    2-Sylow subgroup.
    """
    if g < 1:
        raise ArithmeticDomainError("order must be positive")
    d = _checked_disc(disc)
    forms = _reduced_forms(d)
    h = len(forms)
    if g == 1:
        return True
    if h % g:
        return False
    e = identity(d)
    for q, k in factorize(g):
        if k == 1:
            continue
        v = _valuation(h, q)
        if q == 2 and k == 2:
            if sum(1 for f in forms if f.is_ambiguous()) == 2**v:
                return False
            continue
        cofactor = h // q**v
        need = q ** (k - 1)
        if not any(power(power(f, cofactor), need) != e for f in forms):
            return False
    return True


def order_certificate(disc, g: int) -> QForm | None:
    """A reduced form of exact order g, or None if none exists."""
    d = _checked_disc(disc)
    forms = _reduced_forms(d)
    h = len(forms)
    if h % g:
        return None
    hf = factorize(h)
    for f in forms:
        o = element_order(f, hf)
        if o % g == 0:
            return power(f, o // g)
    return None
