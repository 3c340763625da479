"""
Class groups from reduced forms
===============================

Enumerate reduced forms, compose them and look for elements of a given order.
"""

from classdiv.arith import is_squarefree
from classdiv.qform import class_group, compose, discriminant_of, has_element_of_order, reduced_forms, two_torsion_count

# D = 23 gives the discriminant -23 and three reduced forms
d = discriminant_of(23).value
forms = reduced_forms(d)
print(d, forms)

# (2,1,3) generates: its square is (2,-1,3), its cube the identity
f = forms[2]
print(compose(f, f), compose(compose(f, f), f))

# 1155 = 3*5*7*11, so genus theory predicts 2^3 elements of order dividing 2
d = discriminant_of(1155).value
cg = class_group(d)
print(cg.h, cg.exponent, two_torsion_count(d))

# square-free D = 1 (mod 4) below 400 whose class group has an element of order 4
hits = [D for D in range(65, 400, 4) if is_squarefree(D) and has_element_of_order(discriminant_of(D).value, 4)]
print(hits)
