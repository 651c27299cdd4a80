"""cyclotrace: traces of geodesic cycle integrals of meromorphic modular forms.

The package computes the same trace three independent ways -- an exact
finite formula built from Hurwitz class numbers and Rankin--Cohen
brackets, numerical quadrature along closed geodesics, and a convergent
hypergeometric lattice sum -- and certifies their agreement.
"""

from .analytic import eval_fkA, lhs_geodesic, lhs_latticesum
from .bqf import BQF, hypothesis_check
from .special_forms import closed_formula, hurwitz, rhs_trace

__version__ = "0.1.0"

__all__ = [
    "BQF",
    "closed_formula",
    "eval_fkA",
    "hurwitz",
    "hypothesis_check",
    "lhs_geodesic",
    "lhs_latticesum",
    "rhs_trace",
]
