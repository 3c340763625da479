"""Exact integer arithmetic: factorization, quadratic symbols, modular
square roots, CRT and a square-free sieve over arithmetic progressions.

Everything here is integer-only.  Inputs to :func:`factorize` are capped at
``MAGNITUDE_CAP`` so that products formed during form composition stay
within 128-bit signed range.
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Iterator, NamedTuple

import numpy as np

MAGNITUDE_CAP = 2**94
TRIAL_LIMIT = 10**5

# Deterministic for n < 3.3e24 (covers 2^64 with margin).
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
_MR_EXTRA = (43, 47, 53, 59, 61, 67, 71)


class ArithmeticDomainError(ValueError):
    """An argument is outside the mathematical domain of the operation."""


class MagnitudeError(ValueError):
    """An argument exceeds the configured magnitude cap."""


class PrimePower(NamedTuple):
    prime: int
    exponent: int


class Factorization(tuple):
    """Prime factorization as a tuple of ``(prime, exponent)`` pairs in
    strictly increasing prime order."""

    def __new__(cls, pairs=()):
        return super().__new__(cls, (PrimePower(int(p), int(e)) for p, e in pairs))

    def value(self) -> int:
        out = 1
        for p, e in self:
            out *= p**e
        return out

    def primes(self) -> list[int]:
        return [p for p, _ in self]

    def exponent(self, p: int) -> int:
        for q, e in self:
            if q == p:
                return e
        return 0

    def __repr__(self):
        return "Factorization(%s)" % list(map(tuple, self))


@lru_cache(maxsize=None)
def primes_up_to(n: int) -> tuple[int, ...]:
    """All primes p <= n (sieve of Eratosthenes)."""
    if n < 2:
        return ()
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if sieve[p]:
            sieve[p * p :: p] = False
    return tuple(int(p) for p in np.flatnonzero(sieve))


def _mr_round(n: int, a: int, d: int, s: int) -> bool:
    x = pow(a, d, n)
    if x == 1 or x == n - 1:
        return True
    for _ in range(s - 1):
        x = x * x % n
        if x == n - 1:
            return True
    return False


def is_prime(n: int) -> bool:
    """Miller-Rabin with a fixed base set; deterministic below 3.3e24."""
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    bases = _MR_BASES if n < 3_317_044_064_679_887_385_961_981 else _MR_BASES + _MR_EXTRA
    return all(_mr_round(n, a, d, s) for a in bases)


def _brent(n: int) -> int:
    """Return a nontrivial factor of the odd composite n (Pollard rho, Brent)."""
    for c in range(1, 10_000):
        y, r, q, g = 2, 1, 1, 1
        x = ys = y
        m = 128
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = math.gcd(q, n)
                k += m
            r *= 2
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
        if g != n:
            return g
    raise RuntimeError("Pollard rho failed on %d" % n)


def factorize(n: int, cap: int = MAGNITUDE_CAP) -> Factorization:
    """Factor ``n >= 1``: trial division to 1e5, then Brent's rho."""
    if n < 1:
        raise ArithmeticDomainError("factorize needs n >= 1, got %r" % n)
    if n > cap:
        raise MagnitudeError("%d exceeds magnitude cap %d" % (n, cap))
    found: dict[int, int] = {}
    for p in primes_up_to(TRIAL_LIMIT):
        if p * p > n:
            break
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            found[p] = e
    if n > 1:
        stack = [n]
        while stack:
            m = stack.pop()
            if is_prime(m):
                found[m] = found.get(m, 0) + 1
            else:
                f = _brent(m)
                stack += [f, m // f]
    return Factorization(sorted(found.items()))


def is_squarefree(n: int) -> bool:
    if n < 1:
        raise ArithmeticDomainError("is_squarefree needs n >= 1")
    return all(e == 1 for _, e in factorize(n))


def radical(n: int) -> int:
    return math.prod(factorize(n).primes())


def divisor_count(n: int) -> int:
    return math.prod(e + 1 for _, e in factorize(n))


def jacobi(a: int, n: int) -> int:
    """Jacobi symbol (a/n) for odd positive n, via reciprocity."""
    if n <= 0 or n % 2 == 0:
        raise ArithmeticDomainError("jacobi needs odd positive n, got %r" % n)
    a %= n
    result = 1
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def kronecker(a: int, n: int) -> int:
    """Kronecker symbol (a/n) for arbitrary integers."""
    if n == 0:
        return 1 if abs(a) == 1 else 0
    result = 1
    if n < 0:
        n = -n
        if a < 0:
            result = -result
    v = 0
    while n % 2 == 0:
        n //= 2
        v += 1
    if v:
        if a % 2 == 0:
            return 0
        if v % 2 and a % 8 in (3, 5):
            result = -result
    return result * jacobi(a, n)


def fundamental_discriminant(d: int) -> int:
    """Discriminant of Q(sqrt(d)) for square-free d != 1."""
    if d == 0 or d == 1:
        raise ArithmeticDomainError("no quadratic field for d=%r" % d)
    if not is_squarefree(abs(d)):
        raise ArithmeticDomainError("%d is not square-free" % d)
    return d if d % 4 == 1 else 4 * d


def sqrt_mod(a: int, p: int) -> int | None:
    """Smallest square root of a modulo the odd prime p, or None.

    Tonelli-Shanks; the returned root is min(r, p - r).
    """
    if p == 2:
        return a % 2
    if p < 2 or not is_prime(p):
        raise ArithmeticDomainError("sqrt_mod needs a prime modulus, got %r" % p)
    a %= p
    if a == 0:
        return 0
    if pow(a, (p - 1) // 2, p) != 1:
        return None
    if p % 4 == 3:
        r = pow(a, (p + 1) // 4, p)
    else:
        q, s = p - 1, 0
        while q % 2 == 0:
            q //= 2
            s += 1
        z = 2
        while pow(z, (p - 1) // 2, p) != p - 1:
            z += 1
        m, c, t, r = s, pow(z, q, p), pow(a, q, p), pow(a, (q + 1) // 2, p)
        while t != 1:
            i, t2 = 0, t
            while t2 != 1:
                t2 = t2 * t2 % p
                i += 1
            b = pow(c, 1 << (m - i - 1), p)
            m, c, t, r = i, b * b % p, t * b * b % p, r * b % p
    return min(r, p - r)


def hensel_sqrt(a: int, p: int, k: int) -> list[int]:
    """All x mod p^k with x^2 = a (mod p^k), sorted."""
    if k < 1:
        raise ArithmeticDomainError("exponent must be >= 1")
    mod = p**k
    a %= mod
    if p != 2 and a % p:
        r = sqrt_mod(a, p)
        if r is None:
            return []
        # Newton iteration on a unit root
        pe = p
        while pe < mod:
            pe = min(pe * pe, mod)
            r = (r - (r * r - a) * pow(2 * r, -1, pe)) % pe
        return sorted({r, mod - r})
    # General case: lift the full solution set one power at a time.
    sols = [x for x in range(p) if (x * x - a) % p == 0]
    pe = p
    for _ in range(k - 1):
        nxt = pe * p
        sols = [
            y
            for x in sols
            for y in range(x, nxt, pe)
            if (y * y - a) % nxt == 0
        ]
        pe = nxt
    return sorted(set(sols))


def sqrt_mod_n(a: int, n: int) -> list[int]:
    """All x mod n with x^2 = a (mod n), via prime powers and CRT."""
    if n == 1:
        return [0]
    roots = [0]
    modulus = 1
    for p, e in factorize(n):
        local = hensel_sqrt(a, p, e)
        if not local:
            return []
        pe = p**e
        roots = [crt([(r, modulus), (s, pe)])[0] for r in roots for s in local]
        modulus *= pe
    return sorted(roots)


def crt(residues) -> tuple[int, int]:
    """Combine ``[(r_i, m_i)]`` with pairwise coprime moduli into ``(r, M)``."""
    r, m = 0, 1
    for ri, mi in residues:
        if mi < 1:
            raise ArithmeticDomainError("moduli must be positive")
        if math.gcd(m, mi) != 1:
            raise ArithmeticDomainError("moduli %d and %d are not coprime" % (m, mi))
        # r + m*s = ri (mod mi)
        s = (ri - r) * pow(m, -1, mi) % mi if mi > 1 else 0
        r, m = r + m * s, m * mi
        r %= m
    return r, m


def iroot(n: int, k: int) -> int:
    """floor(n ** (1/k)) for n >= 0, exactly."""
    if n < 0 or k < 1:
        raise ArithmeticDomainError("iroot needs n >= 0, k >= 1")
    if n < 2 or k == 1:
        return n
    if k == 2:
        return math.isqrt(n)
    x = 1 << -(-n.bit_length() // k)
    while True:
        y = ((k - 1) * x + n // x ** (k - 1)) // k
        if y >= x:
            break
        x = y
    while x**k > n:
        x -= 1
    while (x + 1) ** k <= n:
        x += 1
    return x


def squarefree_in_ap(
    X: int, A: int, B: int, lo: int = 1, segment: int = 1 << 18
) -> Iterator[int]:
    """Square-free D with lo <= D <= X and D = A (mod B), ascending.

    Segmented sieve over the progression: for each prime p <= sqrt(X) the
    members divisible by p^2 form a sub-progression that is struck out.
    """
    if B < 1:
        raise ArithmeticDomainError("modulus must be >= 1")
    lo = max(lo, 1)
    if X < lo:
        return
    A %= B
    first = lo + (A - lo) % B
    if first > X:
        return
    count = (X - first) // B + 1
    sieving = primes_up_to(math.isqrt(X))
    # For each p: index offsets i with p^2 | first + i*B (or None).
    plan = []
    for p in sieving:
        q = p * p
        g = math.gcd(B, q)
        if first % g:
            continue
        step = q // g
        i0 = (-(first // g)) * pow(B // g, -1, step) % step if step > 1 else 0
        plan.append((i0, step))
    for start in range(0, count, segment):
        stop = min(start + segment, count)
        keep = np.ones(stop - start, dtype=bool)
        for i0, step in plan:
            off = (i0 - start) % step
            keep[off::step] = False
        for i in np.flatnonzero(keep):
            yield first + (start + int(i)) * B
