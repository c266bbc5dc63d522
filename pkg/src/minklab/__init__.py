"""minklab: convex bodies, Minkowski billiards, and capacity experiments."""

__version__ = "0.1.0"

from . import bodies, capacities, billiards, errors, specs, experiments  # noqa: F401
from . import volume as volume  # noqa: F401  (module; the function lives inside)
from .bodies import (  # noqa: F401
    ConvexBody,
    ball,
    cross_polytope,
    cube,
    ellipsoid,
    ellipsoid_semiaxes,
    hanner,
    hpolytope,
    pball,
    polar,
    polydisc,
    vpolytope,
)
from .volume import inequality_check, mahler_volume  # noqa: F401
from .capacities import (  # noqa: F401
    LagrangianProduct,
    capacity_sandwich,
    complex_symmetric_bounds,
    ehz_lagrangian_product,
    viterbo_ratio,
)
from .billiards import (  # noqa: F401
    FlowConfig,
    PhasePoint,
    flow,
    reflect,
    shortest_closed,
    two_bounce_shortest,
    xi_euclidean,
)
from .specs import parse_body_spec  # noqa: F401
from .experiments import ExperimentReport, run_experiment  # noqa: F401
