from .applications import (
    IsogenyReport,
    MobiusMap,
    SemiAbelianParams,
    chi_system,
    f_const,
    f_const_proof,
    fs_baselines,
    isogeny_bound,
    isogeny_degree_bound,
    semiabelian_bound,
    semiabelian_bound_engine,
    torus_bound,
    torus_dim2_bounds,
    torus_lattice_bound,
)
from .bounds import (
    BoundConfig,
    BoundReport,
    EVariant,
    GammaVariant,
    HypothesisError,
    abound_general,
    bound_ci,
    bound_degree_simple,
    bound_general,
    bound_hp,
    bound_kushnirenko,
    bound_reduction_degree,
    reduction_degree_term,
    c_const,
    compare_bounds,
    e_const,
    gamma_polytope,
)
from .diffpoly import (
    DiffPolynomial,
    JetLayout,
    TauSystem,
    eliminate_linear,
    evaluate_at_jet,
    is_jet,
    jet,
    newton_polytope,
    prolong,
    tau_containment,
    tau_system,
    total_derivative,
    xi_system,
)
from .mixedvol import (
    Algorithm,
    FormalCombination,
    amixed_volume,
    binomial_count_oracle,
    bkk_count,
    compute_mixed_volume,
    mixed_volume,
    mixed_volume_blocks,
    mixed_volume_interp,
)
from .parse import ParseError, format_poly, format_system, parse_poly, parse_system
from .polytope import (
    DimensionMismatchError,
    EmptyPolytopeError,
    LatticePolytope,
    SimplexBlock,
    contains,
    dilate,
    hull,
    is_coideal,
    minkowski_sum,
    standard_simplex,
    volume,
)
from .rational import RationalFunction
from .version import VERSION

__version__ = VERSION
__all__ = (
    'RationalFunction',
    'JetLayout',
    'DiffPolynomial',
    'TauSystem',
    'total_derivative',
    'tau_system',
    'newton_polytope',
    'eliminate_linear',
    'jet',
    'is_jet',
    'evaluate_at_jet',
    'prolong',
    'xi_system',
    'tau_containment',
    'ParseError',
    'parse_poly',
    'format_poly',
    'parse_system',
    'format_system',
    'LatticePolytope',
    'SimplexBlock',
    'EmptyPolytopeError',
    'DimensionMismatchError',
    'hull',
    'minkowski_sum',
    'dilate',
    'standard_simplex',
    'volume',
    'is_coideal',
    'contains',
    'Algorithm',
    'FormalCombination',
    'mixed_volume',
    'amixed_volume',
    'mixed_volume_interp',
    'mixed_volume_blocks',
    'compute_mixed_volume',
    'bkk_count',
    'binomial_count_oracle',
    'GammaVariant',
    'EVariant',
    'BoundConfig',
    'BoundReport',
    'HypothesisError',
    'c_const',
    'e_const',
    'gamma_polytope',
    'bound_ci',
    'bound_general',
    'abound_general',
    'bound_kushnirenko',
    'bound_reduction_degree',
    'reduction_degree_term',
    'bound_degree_simple',
    'bound_hp',
    'compare_bounds',
    'SemiAbelianParams',
    'MobiusMap',
    'IsogenyReport',
    'f_const',
    'f_const_proof',
    'semiabelian_bound',
    'semiabelian_bound_engine',
    'torus_bound',
    'torus_dim2_bounds',
    'torus_lattice_bound',
    'chi_system',
    'isogeny_bound',
    'isogeny_degree_bound',
    'fs_baselines',
    'VERSION',
)
