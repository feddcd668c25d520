"""Zigzag MDS array codes with access-optimal rebuilding, any-node codes and error decoders."""

from .anynode import (
    AnyNodeCode, build_anynode, decode_anynode, encode_anynode, l_set, rebuild_any,
    verify_mds_anynode,
)
from .error_decoder import (
    Diagnosis, SyndromeSet, correct_erasure_plus_element, correct_node_error,
    detect_by_double_rebuild, multi_element_correctable, syndromes,
)
from .exceptions import (
    CapExceededError, CodeConstructionError, DecodeError, DimensionError, FieldError,
    RebuildError, RowspaceError, SearchExhaustedError, SingularMatrixError, UncorrectableError,
    ZigzagError,
)
from .field import FMatrix, Field, det, field_new, solve_linear
from .linear import AccessLog, CodeWordArray, ShardReader
from .rebuild import (
    RebuildPlan, bandwidth_lower_bound, check_property_e, choose_X, find_u, min_optimal_e,
    optimal_subspace, ratio_lower_bound, ratio_sweep, ratio_upper_bound_partial, rebuild_multi,
    rebuild_single,
)
from .rowspace import RVec, Subspace, cosets, orth_complement, span, zigzag_perm
from .zigzag import (
    ZigzagCode, assign_coefficients_search, build_general, build_optimal, build_searched,
    decode_erasures, encode, verify_mds,
)

__all__ = [name for name in dir() if not name.startswith("_")]
