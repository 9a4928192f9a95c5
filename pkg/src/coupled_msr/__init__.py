"""Coupled-layer minimum-storage regenerating code over GF(2^m)."""
from .code import CodeParams, NodeId, derive_params, hyperplane, intersection_score
from .codec import (
    DataCube,
    NodeContent,
    complete_node,
    decode_erasures,
    decode_message,
    encode,
    extract_free,
    is_codeword,
    puncture_profile,
    shorten_profile,
)
from .field import FieldContext, get_field
from .repair import bandwidth_accounting, helper_extract, plan_repair, repair_node, repair_with_accounting

__all__ = [
    "CodeParams", "NodeId", "derive_params", "hyperplane", "intersection_score",
    "DataCube", "NodeContent", "complete_node", "decode_erasures", "decode_message", "encode",
    "extract_free", "is_codeword", "puncture_profile", "shorten_profile",
    "FieldContext", "get_field",
    "bandwidth_accounting", "helper_extract", "plan_repair", "repair_node", "repair_with_accounting",
]
__version__ = "0.1.0"
