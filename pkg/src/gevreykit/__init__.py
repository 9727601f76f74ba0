"""Incremental quotients and Gevrey ladders for singular-kernel operators."""

__version__ = "0.1.0"

from .fields import ScalarField, field_from_json, make_field, manufactured_pair  # noqa: E402
from .kernel import KernelSpec, fractional_kernel, perturbed_kernel  # noqa: E402
from .quad import QuadratureConfig, evaluate  # noqa: E402
from .stencil import Stencil, build_stencil  # noqa: E402

__all__ = [
    "__version__",
    "ScalarField",
    "field_from_json",
    "make_field",
    "manufactured_pair",
    "KernelSpec",
    "fractional_kernel",
    "perturbed_kernel",
    "QuadratureConfig",
    "evaluate",
    "Stencil",
    "build_stencil",
]
