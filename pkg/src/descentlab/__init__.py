"""descentlab: exact finite computations with descent data, cubical filling and lex operations."""

from .report import Budget, BudgetExhausted, Report, Violation
from .cat import (CategoryError, FinCat, Sieve, Site, enumerate_sieves, generate_topology,
                  generated_sieve, maximal_sieve, pullback, slice_index, trivial_topology,
                  validate_category, validate_site)
from .groupoid import (FinGroupoid, GpdFunctor, GpdPresheaf, PresheafMap, check_equivalence,
                       global_points, is_contractible, pointwise_contractible, validate_functor,
                       validate_groupoid, validate_presheaf)
from .descent import (alpha_gpd, check_modal, check_stack, descent_groupoid, e_groupoid,
                      eta_descent, projection, set_sheaf_oracle, sieve_descent)

__version__ = "0.1.0"
