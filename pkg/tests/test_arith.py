import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from classdiv.arith import (
    ArithmeticDomainError,
    MagnitudeError,
    crt,
    divisor_count,
    factorize,
    fundamental_discriminant,
    hensel_sqrt,
    iroot,
    is_prime,
    is_squarefree,
    jacobi,
    kronecker,
    primes_up_to,
    radical,
    sqrt_mod,
    sqrt_mod_n,
    squarefree_in_ap,
)


def trial_factor(n):
    out, p = [], 2
    while p * p <= n:
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        if e:
            out.append((p, e))
        p += 1
    if n > 1:
        out.append((n, 1))
    return out


def euler_legendre(a, p):
    r = pow(a % p, (p - 1) // 2, p)
    return -1 if r == p - 1 else r


def test_factorize_examples():
    assert list(factorize(1)) == []
    assert list(map(tuple, factorize(60))) == [(2, 2), (3, 1), (5, 1)]
    assert list(map(tuple, factorize(10403))) == [(101, 1), (103, 1)]


def test_factorize_large_semiprime():
    p, q = 1000000007, 998244353
    assert list(map(tuple, factorize(p * q))) == [(q, 1), (p, 1)]
    n = (2**61 - 1) * (2**31 - 1)
    assert factorize(n).value() == n


def test_factorize_cap():
    with pytest.raises(MagnitudeError):
        factorize(2**95)
    with pytest.raises(ArithmeticDomainError):
        factorize(0)


@given(st.integers(1, 10**7))
def test_factorize_matches_trial_division(n):
    f = factorize(n)
    assert list(map(tuple, f)) == trial_factor(n)
    assert all(is_prime(p) for p in f.primes())


def test_is_prime_against_sieve():
    ps = set(primes_up_to(20000))
    assert all(is_prime(n) == (n in ps) for n in range(20001))
    # strong pseudoprimes to several small bases
    assert not is_prime(3215031751)
    assert not is_prime(3825123056546413051)
    assert is_prime(2**89 - 1)


def test_squarefree_helpers():
    assert is_squarefree(1) and is_squarefree(97) and not is_squarefree(12)
    assert radical(72) == 6
    assert divisor_count(60) == 12


def test_jacobi_examples():
    assert jacobi(2, 7) == 1
    assert jacobi(0, 9) == 0
    assert all(jacobi(a, 1) == 1 for a in range(-5, 6))
    for n in (0, -3, 8):
        with pytest.raises(ArithmeticDomainError):
            jacobi(3, n)


def test_jacobi_is_product_of_legendre():
    for n in range(1, 400, 2):
        for a in range(-30, 30):
            expect = 1
            for p, e in trial_factor(n):
                expect *= euler_legendre(a, p) ** e
            assert jacobi(a, n) == expect


def test_kronecker_examples():
    assert kronecker(-4, 7) == -1
    assert kronecker(17, 1) == 1
    assert kronecker(-8, 3) == 1
    assert kronecker(5, 2) == -1 and kronecker(7, 2) == 1 and kronecker(6, 2) == 0
    assert kronecker(-3, -1) == -1 and kronecker(3, -1) == 1


def test_kronecker_character_periodic():
    # n -> (d/n) is periodic mod |d| for fundamental d
    for d in (-4, -3, -7, -8, 5, 8, 12, -20, 13, -15):
        for n in range(1, 200):
            assert kronecker(d, n) == kronecker(d, n + abs(d))


def test_fundamental_discriminant():
    assert fundamental_discriminant(-3) == -3
    assert fundamental_discriminant(-1) == -4
    assert fundamental_discriminant(3) == 12
    with pytest.raises(ArithmeticDomainError):
        fundamental_discriminant(1)
    with pytest.raises(ArithmeticDomainError):
        fundamental_discriminant(-12)


def test_sqrt_mod_examples():
    assert sqrt_mod(4, 7) == 2
    assert sqrt_mod(3, 7) is None
    assert sqrt_mod(0, 5) == 0
    with pytest.raises(ArithmeticDomainError):
        sqrt_mod(4, 15)


def test_sqrt_mod_exhaustive():
    for p in primes_up_to(300)[1:]:
        squares = {x * x % p for x in range(p)}
        for a in range(p):
            r = sqrt_mod(a, p)
            if a in squares:
                assert r * r % p == a and r <= p - r
            else:
                assert r is None


def test_hensel_examples():
    assert hensel_sqrt(1, 3, 2) == [1, 8]
    # exhausting residues mod 7 gives 3^2 = 4^2 = 2
    assert hensel_sqrt(2, 7, 1) == [3, 4]
    assert hensel_sqrt(0, 5, 1) == [0]


def test_hensel_exhaustive():
    for p, k in [(2, 1), (2, 3), (2, 5), (3, 3), (5, 2), (7, 2), (3, 4)]:
        m = p**k
        for a in range(m):
            assert hensel_sqrt(a, p, k) == [x for x in range(m) if (x * x - a) % m == 0]


def test_sqrt_mod_n():
    for n in (1, 12, 45, 100, 360):
        for a in range(n):
            assert sqrt_mod_n(a, n) == [x for x in range(n) if (x * x - a) % n == 0]


def test_crt_examples():
    assert crt([(1, 2), (2, 3)]) == (5, 6)
    assert crt([(0, 5)]) == (0, 5)
    scan = [x for x in range(180) if x % 4 == 3 and x % 9 == 4 and x % 5 == 0]
    assert crt([(3, 4), (4, 9), (0, 5)]) == (scan[0], 180)
    with pytest.raises(ArithmeticDomainError):
        crt([(1, 4), (1, 6)])


@given(st.lists(st.integers(0, 10**6), min_size=1, max_size=4))
def test_crt_property(rs):
    mods = [3, 7, 11, 16][: len(rs)]
    r, m = crt(list(zip(rs, mods)))
    assert m == math.prod(mods)
    assert all(r % mi == ri % mi for ri, mi in zip(rs, mods))


def test_iroot():
    for n in range(0, 3000):
        for k in (1, 2, 3, 5):
            x = iroot(n, k)
            assert x**k <= n < (x + 1) ** k
    assert iroot(2**64, 8) == 256
    assert iroot(10**40 - 1, 4) == 10**10 - 1


def test_squarefree_in_ap_examples():
    assert list(squarefree_in_ap(30, 1, 4)) == [1, 5, 13, 17, 21, 29]
    assert list(squarefree_in_ap(10, 0, 4)) == []
    assert list(squarefree_in_ap(3, 3, 4)) == [3]


@settings(max_examples=60)
@given(st.integers(1, 3000), st.integers(0, 60), st.integers(1, 60), st.integers(1, 100))
def test_squarefree_in_ap_matches_filter(X, A, B, lo):
    expect = [D for D in range(lo, X + 1) if D % B == A % B and is_squarefree(D)]
    assert list(squarefree_in_ap(X, A, B, lo=lo)) == expect


def test_squarefree_in_ap_segments():
    a = list(squarefree_in_ap(20000, 3, 7, segment=97))
    b = list(squarefree_in_ap(20000, 3, 7))
    assert a == b


def test_random_factorizations_roundtrip():
    rng = random.Random(7)
    for _ in range(200):
        n = rng.randrange(1, 2**80)
        assert factorize(n).value() == n
