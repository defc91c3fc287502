"""Finite groupoids, their L^p representations and operator norms."""

from .errors import LpgpdError
from .groupoid import (
    FiniteGroupoid, Slice, amplify, build_standard, disjoint_union, finite_group,
    generate_slice_semigroup, make_slice, restriction, slice_inverse, slice_product,
    transitive, validate,
)
from .convolution import AlgebraElement, MatrixElement, chi, convolve, delta, i_norm, involute, unit_element
from .measure import ObjectMeasure, Undefined, cocycle, induce, transitive_measure
from .lpspace import (
    LpOperator, NormConfig, NormEstimate, WeightedLpSpace, dual_operator, expm, is_hermitian,
    op_norm, semi_inner_product,
)
from .spatial import SpatialPartialIsometry, lamperti_decompose, spatial_compose, spatial_reverse
from .representation import (
    BundleRepresentation, integrate, ind_matrix, reduced_norm, regular_rep, validate_rep,
)

__version__ = "0.1.0"
