"""Numerical potential theory for p-Laplace type equations near infinity.

Condenser (p, w)-capacities on grids and in closed form, the circular
inversion and its weighted pushforward, Wiener-type integrals with analytic
certificates, and a classifier for regularity of the point at infinity.
"""
__version__ = "0.1.0"

from .geometry import (Annulus, Ball, BallSequence, BoundaryStatus, ClosedBall, Complement,
                       Condenser, DomainError, EmptySet, Exponents, HalfSpace, Intersection,
                       Inverted, Origin, SequenceUnion, SetDescriptor, Union, ValidationError,
                       Weight, WholeSpace, boundary_unbounded, contains, membership,
                       weight_ball_mass)
from .expr import ExpressionEvalError, ExpressionParseError, evaluate, parse_expr, to_text
from .inversion import (OperatorMap, PushforwardMap, dT_apply, invert_ball, invert_point,
                        invert_set, jacobian_det_abs, pushforward_eval, verify_ellipticity)
from .solver import Grid, NotConverged
from .capacity import (CapacityEstimate, grid_capacity, normalized_grid_capacity,
                       radial_capacity_exact)
from .estimates import (annulus_split_bound, corollary63_f, duality_check, lemma73_constant,
                        poincare_constant_estimate)
from .variants import CriterionVariant, VariantKind
from .wiener import (Classification, Verdict, WholeSpaceRefused, WienerReport,
                     classic_wiener_at, classify_infinity, divergence_verdict, integrand_at,
                     wiener_partial_sum)
from .families import (BallChain, Example71, Example72, Example72F, ExcludedBall,
                       example71_upper_series, example72_I1_bound, example72_I2_lower,
                       verify_example_verdicts)
from .pdelab import DirichletProblem, RegularityProbe, probe_regularity, solve_dirichlet
from .config import JobConfig, ParseError, parse_config, print_config

__all__ = [name for name in dir() if not name.startswith("_")]
