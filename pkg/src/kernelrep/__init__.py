"""Kernel representations of operators between vector-valued L^p spaces over
finite measure spaces, with the matching tensor, lattice, multiplier and
Hilbert-Schmidt checks."""

from .errors import KernelRepError
from .kernels import (Kernel, check_isometry, extract_density, kernel_apply,
                      kernel_to_operator, operator_to_kernel, sup_norm)
from .multiplication import Multiplier, extract_multiplier, is_local, multiplier_apply
from .operators import BlockOperator, NormEstimate, apply, compose, operator_norm
from .spaces import LpFunction, MeasureSpace, SpaceSpec, lp_norm, product_space
from .tensor import FunctionFactor, TensorElement, pi_norm

__version__ = "0.1.0"

__all__ = [
    "KernelRepError", "Kernel", "check_isometry", "extract_density", "kernel_apply",
    "kernel_to_operator", "operator_to_kernel", "sup_norm", "Multiplier",
    "extract_multiplier", "is_local", "multiplier_apply", "BlockOperator", "NormEstimate",
    "apply", "compose", "operator_norm", "LpFunction", "MeasureSpace", "SpaceSpec",
    "lp_norm", "product_space", "FunctionFactor", "TensorElement", "pi_norm",
]
