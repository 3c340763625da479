"""
Counting D with g | h(-D) in a residue class
=============================================

Compare the exact count in a class with what the constructions reach.
"""

from classdiv.census import run_census
from classdiv.construct import gen_case2, is_special, lift_progression

# (1, 4) is special for g = 4: 2*1^2 - 1^2 = 1
w = is_special(1, 4, 4)
print(w)

# the first few D emitted, with the (m, t) that produced them
print(list(gen_case2(500, 4, w))[:8])

# a class that needs lifting: 3 mod 5 becomes 53 mod 100
lift = lift_progression(3, 5, 4, "case2")
print(lift.A_prime, lift.B_prime, is_special(lift.target, lift.B_prime, 4))

# exact count N, construction count S and the bound from the moments of R
r = run_census([10**3, 10**4, 5 * 10**4], 1, 4, 4)
for row in r.rows():
    print(row["X"], row["exact_count"], row["witness_count"], row["cs_bound"], row["squarefree_count"])
print("chain holds:", r.chain_holds(), "fitted exponent %.3f" % r.fitted_exponent)

# g = 6 at small modulus; the default T is 1 at this size and the box is
# empty, so widen it by hand
for T in (1, 4, 8):
    r = run_census([10**4, 10**5], 1, 2, 6, T=T, lift=False)
    print(T, r.exact_counts, r.witness_counts, r.chain_holds())
