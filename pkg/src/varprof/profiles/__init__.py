"""Standard deviation profiles: construction, structure and file I/O."""

from varprof.profiles.core import SPARSE_DENSITY, FamilyTag, StdDevProfile, as_array, band_support
from varprof.profiles.families import (
    all_ones,
    from_array,
    make_anti_diagonal,
    make_band,
    make_block_sparse,
    make_bounded_below,
    make_remark42,
    make_sampled,
    make_separable,
)
from varprof.profiles.structure import PredicateResult, is_broadly_connected, is_super_regular
from varprof.profiles.erdos_renyi import (
    ErdosRenyiConfig,
    check_erdos_renyi_concentration,
    sample_erdos_renyi,
)
from varprof.profiles.io import load_profile, save_profile

__all__ = [
    "SPARSE_DENSITY",
    "ErdosRenyiConfig",
    "FamilyTag",
    "PredicateResult",
    "StdDevProfile",
    "all_ones",
    "as_array",
    "band_support",
    "check_erdos_renyi_concentration",
    "from_array",
    "is_broadly_connected",
    "is_super_regular",
    "load_profile",
    "make_anti_diagonal",
    "make_band",
    "make_block_sparse",
    "make_bounded_below",
    "make_remark42",
    "make_sampled",
    "make_separable",
    "sample_erdos_renyi",
    "save_profile",
]
