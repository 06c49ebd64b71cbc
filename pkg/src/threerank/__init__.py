"""Class groups of quadratic fields and their 3-parts.

Subpackages and modules:

* ``core_arith``: sieves, fundamental discriminants, closed-form main terms.
* ``quad_class``: binary quadratic forms, class groups, bulk tables.
* ``cubic_forms``: binary cubic forms up to GL2(Z), maximality, class counts.
* ``experiments``: averages, densities, windows and tables over finite ranges.
* ``cli``: the ``threerank`` command.
"""

from .quad_class import ClassGroupInfo, class_group, class_number, r3

__version__ = "0.1.0"

__all__ = ["ClassGroupInfo", "class_group", "class_number", "r3", "__version__"]
