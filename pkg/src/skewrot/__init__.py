"""Products of skew rotations of the plane and the concentric-squares system."""

from .core_maps import (
    CCW,
    CW,
    CombinedHamiltonian,
    InversePolarFrame,
    MapProduct,
    PlanarPoint,
    SkewRotation,
    apply_product,
    apply_skew_rotation,
    from_inverse_polar,
    to_inverse_polar,
    two_center_product,
)
from .errors import SkewRotError

__all__ = [
    "CCW",
    "CW",
    "CombinedHamiltonian",
    "InversePolarFrame",
    "MapProduct",
    "PlanarPoint",
    "SkewRotation",
    "SkewRotError",
    "apply_product",
    "apply_skew_rotation",
    "from_inverse_polar",
    "to_inverse_polar",
    "two_center_product",
]

__version__ = "0.1.0"
