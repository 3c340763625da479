"""Imaginary quadratic class groups with elements of prescribed order.

Modules: ``arith`` (integer arithmetic), ``qform`` (binary quadratic
forms and the class-group oracle), ``construct`` (Diophantine families
producing discriminants), ``census`` (exact and constructive counts),
``frey`` (quadratic-twist screening) and ``cli``.
"""

from .arith import ArithmeticDomainError, MagnitudeError
from .qform import class_group, class_number, discriminant_of, has_element_of_order

__all__ = [
    "ArithmeticDomainError",
    "MagnitudeError",
    "class_group",
    "class_number",
    "discriminant_of",
    "has_element_of_order",
]
