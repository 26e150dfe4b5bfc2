"""Finite coarse geometry: entourages, Roe-type operators and rigidity recovery."""

__version__ = "0.1.0"

from .relations import (
    GroundSet,
    Relation,
    band,
    compose,
    diagonal,
    inverse,
    metric_entourage,
    section_bounds,
    splitting_points,
    union,
)
from .groups import Group, cyclic_group, dihedral_group, group_entourage, symmetric_group
from .operators import (
    CrossedDecomposition,
    SparseOperator,
    conditional_expectation,
    crossed_decompose,
    partial_translation,
    rank_one_norm_identity_check,
    spectral_norm,
    support,
    translation_unitary,
)
from .filtration import (
    CoarseFiltration,
    MembershipCertificate,
    amplify,
    explicit_filtration,
    filter_filtration,
    filter_membership,
    group_filtration,
    level,
    line_filtration,
    membership_level,
    metric_filtration,
    structure_from_operators,
)
from .combinatorics import (
    ClaimPartition,
    Coloring,
    PartialBijection,
    SelectorResult,
    claim_partitions,
    decompose_partial_bijections,
    greedy_coloring,
    hall_selector,
    verify_claim_partition,
)
from .localization import (
    GhostProfile,
    ONLReport,
    ghost_profile,
    onl_probe,
    propertyA_witness_check,
)
from .rigidity import (
    DistortionReport,
    IsometryData,
    Locators,
    PipelineConfig,
    RecoveredEquivalence,
    RecoveryError,
    cantor_bernstein,
    check_isometry,
    closeness_level,
    concentration_check,
    embed_from_map,
    entourage_union_level,
    full_pipeline,
    locator_sets,
    recover_maps,
    verify_coarse_expanding,
)
