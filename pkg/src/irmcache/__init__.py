"""Exact LRU miss rates and coupon-collector times under the independent reference model."""

from irmcache.ccp import (
    CcpCurve,
    ccp_curve,
    delta_e,
    expected_partial_time,
    ferrante_form,
    inclusion_exclusion_full,
    symmetric_function_form,
    uniform_expected_time,
)
from irmcache.lru import (
    IdentityError,
    MissRateCurve,
    flajolet_miss_rate,
    king_miss_rate,
    king_miss_rate_bruteforce,
    miss_rate_complement_form,
    miss_rate_curve,
    uniform_miss_rate,
    verify_identity,
)
from irmcache.montecarlo import SimEstimate, simulate_ccp, simulate_lru
from irmcache.popularity import (
    Popularity,
    from_spec,
    make_dirichlet,
    make_explicit,
    make_parametric,
    sum_squares,
)
from irmcache.quadrature import QuadratureError, QuadratureResult, i_integral
from irmcache.subsets import (
    ITable,
    SubsetIndex,
    TableTooLarge,
    i_permutation_oracle,
    i_table_build,
    lemma2_check,
    subset_prob_mass,
    subsets_of_size,
)

__version__ = "0.1.0"
