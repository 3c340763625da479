"""
Twists of 27a4 with p | h(-D)
=============================

Build the congruence class of D where the twist conditions hold, then screen it.
"""

from classdiv.frey import build_class, check_corollary_hypotheses, corollary_exponent, get_curve, screen_twists, twist_sign

E = get_curve("27a4")
print(E.a_invariants, E.N, E.sign, E.torsion_point)

# the hypotheses hold for 27a4, so the exponent applies
print(check_corollary_hypotheses(E, 1), corollary_exponent(E.p))

cls = build_class(E, 1)
print("D = %d mod %d" % (cls.A, cls.B))
print([(D, twist_sign(E, D)) for D in cls.members(60)])

# every witness carries a form of order 3 as a certificate
_, ws = screen_twists(E, 2000, 1)
print(len(ws), ws[:5])

# 574i1 fails the S~_E condition (41 = -1 mod 7) but the class still builds
F = get_curve("574i1")
print(check_corollary_hypotheses(F, 3, 3).failures)
print(build_class(F, 3, d=3, check_hypotheses=False))
