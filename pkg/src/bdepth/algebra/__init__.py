"""Filtered complexes, their reductions and the constructions built on them."""

from bdepth.algebra.filtered import (
    FilteredComplex,
    FilteredMap,
    FilteredVectorSpace,
    GradingSet,
    LinearStep,
)
from bdepth.algebra.morphisms import apply_shift_isomorphism, extend_coefficients, quasiequivalence_audit
from bdepth.algebra.quantum import QuantumCorrection, classify, dichotomy_audit
from bdepth.algebra.reduction import (
    ReductionCertificate,
    boundary_depth,
    depth_profile,
    depth_witness,
    reduce,
    reduce_complex,
)
from bdepth.algebra.tensor import SignedComplex, tensor_complex, verify_product_bounds

__all__ = [
    "FilteredComplex",
    "FilteredMap",
    "FilteredVectorSpace",
    "GradingSet",
    "LinearStep",
    "QuantumCorrection",
    "ReductionCertificate",
    "SignedComplex",
    "apply_shift_isomorphism",
    "boundary_depth",
    "classify",
    "depth_profile",
    "depth_witness",
    "dichotomy_audit",
    "extend_coefficients",
    "quasiequivalence_audit",
    "reduce",
    "reduce_complex",
    "tensor_complex",
    "verify_product_bounds",
]
