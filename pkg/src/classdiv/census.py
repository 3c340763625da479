"""Counting discriminants with an element of order g in their class group.

Two counts are compared on every run:

* the exact count N_g(X; A, B) of square-free D <= X, D = A (mod B), with
  an order-g element in Cl(-D), from the class-group oracle;
* the construction count S of distinct D produced by the Diophantine
  families, with the multiplicity moments sum R and sum R^2.

They satisfy  ceil((sum R)^2 / sum R^2) <= S <= N_g <= #square-free members.
"""

from __future__ import annotations

import bisect
import csv
import io
import json
import math
import os
import statistics
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from multiprocessing import get_context

from .arith import (
    ArithmeticDomainError,
    factorize,
    hensel_sqrt,
    is_squarefree,
    squarefree_in_ap,
)
from .construct import (
    LiftError,
    NoSolutionError,
    TripleWitness,
    box_params,
    default_T,
    gen_case1,
    gen_case2,
    is_special,
    lemma41_triple,
    lift_progression,
    _class_range,
)
from .qform import discriminant_of, has_element_of_order

DEFAULT_CAP = 10**6
MIN_D = 63


class BudgetError(RuntimeError):
    """Requested census exceeds the configured size cap."""


def epsilon(g: int) -> Fraction:
    """2/g for g = 0 (mod 4), 3/(g+2) for g = 2 (mod 4)."""
    if g < 4 or g % 2:
        raise ArithmeticDomainError("epsilon(g) needs even g >= 4, got %r" % g)
    return Fraction(2, g) if g % 4 == 0 else Fraction(3, g + 2)


# -- exact census -----------------------------------------------------------


def _scan(args):
    lo, hi, A, B, g, grid = args
    hits = []
    sf = [0] * len(grid)
    for D in squarefree_in_ap(hi, A, B, lo=lo):
        sf[bisect.bisect_left(grid, D)] += 1
        if D > 2 and has_element_of_order(discriminant_of(D).value, g):
            hits.append(D)
    return hits, sf


def _shard_bounds(X: int, shards: int) -> list[tuple[int, int]]:
    edges = [1 + (X * i) // shards for i in range(shards)] + [X + 1]
    return [(edges[i], edges[i + 1] - 1) for i in range(shards) if edges[i] <= edges[i + 1] - 1]


def _run_shards(tasks, shards: int):
    if shards <= 1 or len(tasks) <= 1:
        return [_scan(t) for t in tasks]
    workers = min(len(tasks), os.cpu_count() or 1)
    with ProcessPoolExecutor(max_workers=workers, mp_context=get_context("fork")) as pool:
        return list(pool.map(_scan, tasks))


def census_exact_grid(grid, A: int, B: int, g: int, shards: int = 1, cap: int = DEFAULT_CAP):
    """Exact N_g(X; A, B) and square-free class counts for every X in grid.

    The range [1, max(grid)] is split into ``shards`` contiguous segments;
    results merge by concatenation and summation, so the output does not
    depend on the shard count.
    """
    grid = sorted(grid)
    if not grid or grid[0] < 1:
        raise ArithmeticDomainError("grid must be non-empty and positive")
    if B < 1:
        raise ArithmeticDomainError("modulus must be >= 1")
    if grid[-1] > cap:
        raise BudgetError("X = %d exceeds census cap %d" % (grid[-1], cap))
    tasks = [(lo, hi, A, B, g, grid) for lo, hi in _shard_bounds(grid[-1], max(1, shards))]
    hits: list[int] = []
    sf = [0] * len(grid)
    for h, s in _run_shards(tasks, shards):
        hits += h
        sf = [x + y for x, y in zip(sf, s)]
    exact = [bisect.bisect_right(hits, X) for X in grid]
    sf_cum = [sum(sf[: i + 1]) for i in range(len(grid))]
    return exact, sf_cum, hits


def census_exact(X: int, A: int, B: int, g: int, shards: int = 1, cap: int = DEFAULT_CAP) -> int:
    """#{square-free D <= X, D = A (mod B), Cl(-D) has an element of order g}."""
    return census_exact_grid([X], A, B, g, shards, cap)[0][0]


# -- construction census ----------------------------------------------------


@dataclass
class ConstructionCount:
    X: int
    g: int
    S: int
    sumR: int
    sumR2: int
    multiplicity: dict = field(repr=False)
    nonsquarefree: int = 0
    below_min: int = 0
    single_odd_prime: int = 0
    oracle_failures: list = field(default_factory=list)
    T: int | None = None
    lift: object = None
    witness: object = None

    @property
    def cs_bound(self) -> int:
        """ceil((sum R)^2 / sum R^2), or 0 when there are no witnesses."""
        if self.sumR2 == 0:
            return 0
        return -(-self.sumR * self.sumR // self.sumR2)


def _odd_prime_count(D: int) -> int:
    return sum(1 for p in factorize(D).primes() if p != 2)


def construction_setup(A: int, B: int, g: int, sign: int = 1, lift: bool = True):
    """Lifted progression and witness used by the constructions for (A, B).

    With ``lift=False`` the witness is built for (sign*A, B) directly; the
    returned lift is None.  Useful at desk scale, where the lifted modulus
    B' leaves the case-1 box empty.
    """
    if not lift:
        if g % 4 == 2:
            return None, lemma41_triple(sign * A, B, g // 2)
        w = is_special(sign * A, B, g)
        if w is None:
            raise NoSolutionError("(%d, %d) is not special for g=%d" % (sign * A, B, g))
        return None, w
    if g % 4 == 2:
        lift = lift_progression(A, B, g, "case1", sign=sign)
        w = lemma41_triple(lift.target, lift.B_prime, g // 2)
    else:
        lift = lift_progression(A, B, g, "case2", sign=sign)
        w = is_special(lift.target, lift.B_prime, g)
    return lift, w


def emissions(X: int, g: int, witness, T: int | None = None):
    """D values (with repetition) emitted by the construction for g."""
    if g % 4 == 2:
        if T is None:
            T = default_T(X, g)
        return [D for *_, D in gen_case1(X, T, g, witness)], T
    return [D for *_, D in gen_case2(X, g, witness)], None


def count_emissions(X: int, g: int, Ds, T=None, lift=None, witness=None) -> ConstructionCount:
    """Tally a multiset of emitted D into S, sum R, sum R^2 with oracle checks.

    Only square-free D >= 63 count; for g = 2 (mod 4) D must also have two
    odd prime factors, which is what upgrades order g/2 to order g.
    """
    mult = Counter(Ds)
    out = ConstructionCount(X, g, 0, 0, 0, {}, T=T, lift=lift, witness=witness)
    for D in sorted(mult):
        R = mult[D]
        if not is_squarefree(D):
            out.nonsquarefree += R
            continue
        if D < MIN_D:
            out.below_min += R
            continue
        if g % 4 == 2 and _odd_prime_count(D) < 2:
            out.single_odd_prime += R
            continue
        if not has_element_of_order(discriminant_of(D).value, g):
            out.oracle_failures.append(D)
        out.multiplicity[D] = R
        out.S += 1
        out.sumR += R
        out.sumR2 += R * R
    return out


def census_construction(X: int, A: int, B: int, g: int, T: int | None = None, sign: int = 1,
                        lift: bool = True) -> ConstructionCount:
    """Construction count S with multiplicity moments for the class (A, B)."""
    lift, w = construction_setup(A, B, g, sign, lift)
    Ds, T = emissions(X, g, w, T)
    return count_emissions(X, g, Ds, T, lift, w)


# -- diagnostics --------------------------------------------------------------


@dataclass
class NSplit:
    """Case-1 tuples split by the smallest prime p with p^2 | D.

    ``small``: p <= log X.  ``n1`` = tuples with no such small p, which
    splits exactly into ``squarefree`` + ``n2`` (log X < p <= Z) + ``n3``
    (p > Z).
    """

    total: int
    small: int
    squarefree: int
    n2: int
    n3: int
    logX: float
    Z: float

    @property
    def n1(self) -> int:
        return self.squarefree + self.n2 + self.n3


def _smallest_square_prime(D: int) -> int | None:
    for p, e in factorize(D):
        if e >= 2:
            return p
    return None


def n_split_diagnostic(X: int, T: int, g: int, witness: TripleWitness) -> NSplit:
    logX = math.log(X)
    Z = X ** (1 / 3) * T ** (-1 / 3) * logX ** (2 / 3)
    small = sf = n2 = n3 = total = 0
    for *_, D in gen_case1(X, T, g, witness):
        total += 1
        p = _smallest_square_prime(D)
        if p is None:
            sf += 1
        elif p <= logX:
            small += 1
        elif p <= Z:
            n2 += 1
        else:
            n3 += 1
    return NSplit(total, small, sf, n2, n3, logX, Z)


def phi(m: int, ell: int, g1: int) -> int:
    """Number of n mod ell with n^2 = m^g1 (mod ell)."""
    count = 1
    for p, e in factorize(ell):
        count *= len(hensel_sqrt(pow(m, g1, p**e), p, e))
    return count


def average_phi(X: int, T: int, g: int, witness: TripleWitness) -> Fraction | None:
    """Mean of phi_m(t^2) over the case-1 (m, t) box in the witness class."""
    g1 = g // 2
    box = box_params(X, T, g1)
    total = n = 0
    for t in _class_range(T, 2 * T, witness.t1, witness.modulus):
        for m in _class_range(box.M, 2 * box.M, witness.m1, witness.modulus):
            if m % 2 == 0 or math.gcd(m, t) != 1:
                continue
            total += phi(m, t * t, g1)
            n += 1
    return Fraction(total, n) if n else None


def fit_exponent(points) -> float:
    """Least-squares slope of log(count) against log(X)."""
    pts = [(X, c) for X, c in points if c > 0]
    if len(pts) < 2 or len({X for X, _ in pts}) < 2:
        raise ArithmeticDomainError("need at least two points with positive counts")
    xs = [math.log(X) for X, _ in pts]
    ys = [math.log(c) for _, c in pts]
    return statistics.linear_regression(xs, ys).slope


# -- reports --------------------------------------------------------------------


CSV_COLUMNS = [
    "X", "g", "A", "B", "T", "exact_count", "squarefree_count", "witness_count",
    "sumR", "sumR2", "cs_bound", "nonsquarefree_emissions", "oracle_failures",
    "epsilon_g", "fitted_exponent",
]


@dataclass
class CountReport:
    g: int
    A: int
    B: int
    grid: list
    exact_counts: list
    squarefree_counts: list
    witness_counts: list
    sumR: list
    sumR2: list
    cs_bounds: list
    nonsquarefree_emissions: list
    oracle_failures: list
    T: list
    epsilon_g: Fraction
    fitted_exponent: float | None
    lift: dict | None = None
    construction_note: str | None = None

    def chain_holds(self) -> list[bool]:
        return [
            cs <= s <= n <= q
            for cs, s, n, q in zip(self.cs_bounds, self.witness_counts, self.exact_counts, self.squarefree_counts)
        ]

    def rows(self) -> list[dict]:
        eps = "%d/%d" % (self.epsilon_g.numerator, self.epsilon_g.denominator)
        fit = "" if self.fitted_exponent is None else "%.6f" % self.fitted_exponent
        return [
            {
                "X": X, "g": self.g, "A": self.A, "B": self.B,
                "T": "" if self.T[i] is None else self.T[i],
                "exact_count": self.exact_counts[i],
                "squarefree_count": self.squarefree_counts[i],
                "witness_count": self.witness_counts[i],
                "sumR": self.sumR[i], "sumR2": self.sumR2[i], "cs_bound": self.cs_bounds[i],
                "nonsquarefree_emissions": self.nonsquarefree_emissions[i],
                "oracle_failures": len(self.oracle_failures[i]),
                "epsilon_g": eps, "fitted_exponent": fit,
            }
            for i, X in enumerate(self.grid)
        ]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(self.rows())
        return buf.getvalue()

    def to_dict(self) -> dict:
        d = asdict(self)
        d["epsilon_g"] = "%d/%d" % (self.epsilon_g.numerator, self.epsilon_g.denominator)
        d["fitted_exponent"] = None if self.fitted_exponent is None else round(self.fitted_exponent, 6)
        d["rows"] = self.rows()
        return d

    def to_json(self, config: dict | None = None) -> str:
        d = self.to_dict()
        if config is not None:
            d["config"] = config
        return json.dumps(d, indent=2, sort_keys=True) + "\n"


def run_census(grid, A: int, B: int, g: int, T: int | None = None, shards: int = 1,
               cap: int = DEFAULT_CAP, sign: int = 1, lift: bool = True) -> CountReport:
    """Exact and construction counts over a grid of X values."""
    grid = sorted(grid)
    exact, sf, _ = census_exact_grid(grid, A, B, g, shards=shards, cap=cap)
    note = None
    G = math.gcd(A, B)
    try:
        if not is_squarefree(G):
            raise NoSolutionError("gcd(A, B) = %d is not square-free: the class has no square-free members" % G)
        lift, w = construction_setup(A, B, g, sign, lift)
    except (LiftError, NoSolutionError) as e:
        # No construction for this class: witness counts are zero.
        lift, w, note = None, None, str(e)
    counts = []
    if w is None:
        counts = [ConstructionCount(X, g, 0, 0, 0, {}) for X in grid]
    elif g % 4 == 2:
        for X in grid:
            Ds, TX = emissions(X, g, w, T)
            counts.append(count_emissions(X, g, Ds, TX, lift, w))
    else:
        Ds, _ = emissions(grid[-1], g, w)
        for X in grid:
            counts.append(count_emissions(X, g, [D for D in Ds if D <= X], None, lift, w))
    fit = None
    if sum(1 for c in exact if c > 0) >= 2 and len(set(grid)) >= 2:
        fit = fit_exponent(list(zip(grid, exact)))
    return CountReport(
        g=g, A=A, B=B, grid=grid,
        exact_counts=exact, squarefree_counts=sf,
        witness_counts=[c.S for c in counts],
        sumR=[c.sumR for c in counts], sumR2=[c.sumR2 for c in counts],
        cs_bounds=[c.cs_bound for c in counts],
        nonsquarefree_emissions=[c.nonsquarefree for c in counts],
        oracle_failures=[c.oracle_failures for c in counts],
        T=[c.T for c in counts],
        epsilon_g=epsilon(g), fitted_exponent=fit,
        lift=None if lift is None else {
            "A_prime": lift.A_prime, "B_prime": lift.B_prime, "r": lift.r, "case": lift.case, "sign": lift.sign,
        },
        construction_note=note,
    )
