"""Skew rotations of the plane and their products.

A skew rotation about a center F moves every point z along the circle
through z centred at F by a fixed arc length h.  In inverse polar
coordinates (r = 1/|z - F|, phi) it is the shear ``phi -> phi + h r``,
``r -> r``, so it is area preserving and undefined only at F itself.

Points are accepted as :class:`PlanarPoint`, any ``(x, y)`` pair, or a
Python ``complex``; internally everything is complex arithmetic.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Optional, Sequence, Union

import numpy as np

from .errors import DegenerateCenter, NonPositiveRadius

TWO_PI = 2.0 * math.pi

# |z - F| below this is treated as the center itself.
DEGENERATE_RADIUS = 1e-300

CCW = 1
CW = -1


class PlanarPoint(NamedTuple):
    x: float
    y: float

    @property
    def z(self) -> complex:
        return complex(self.x, self.y)

    @classmethod
    def from_complex(cls, z: complex) -> "PlanarPoint":
        return cls(z.real, z.imag)


PointLike = Union[PlanarPoint, Sequence[float], complex]


def as_complex(p: PointLike) -> complex:
    """Convert a point-like value to ``complex``, rejecting NaN/Inf."""
    if isinstance(p, complex):
        z = p
    elif isinstance(p, (int, float)):
        z = complex(p, 0.0)
    else:
        x, y = p
        z = complex(float(x), float(y))
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValueError(f"non-finite point {p!r}")
    return z


def _check_orientation(sign: int) -> int:
    if sign not in (CCW, CW):
        raise ValueError(f"orientation must be +1 or -1, got {sign!r}")
    return sign


@dataclass(frozen=True)
class SkewRotation:
    """Skew rotation with the given center and arc-length shift ``h``.

    ``orientation`` is +1 for counterclockwise-positive ``h`` and -1 for
    clockwise-positive ``h``.
    """

    center: complex
    h: float
    orientation: int = CCW

    def __post_init__(self):
        object.__setattr__(self, "center", as_complex(self.center))
        object.__setattr__(self, "h", float(self.h))
        if not math.isfinite(self.h):
            raise ValueError("h must be finite")
        _check_orientation(self.orientation)

    @property
    def signed_h(self) -> float:
        """Arc length measured counterclockwise."""
        return self.orientation * self.h

    def inverse(self) -> "SkewRotation":
        return SkewRotation(self.center, -self.h, self.orientation)


@dataclass(frozen=True)
class MapProduct:
    """Ordered product of skew rotations, applied first to last."""

    factors: tuple

    def __post_init__(self):
        factors = tuple(self.factors)
        if not factors:
            raise ValueError("a map product needs at least one factor")
        object.__setattr__(self, "factors", factors)

    @property
    def angular_sum(self) -> float:
        return sum(f.signed_h for f in self.factors)

    @property
    def centers(self) -> list:
        return [f.center for f in self.factors]

    def inverse(self) -> "MapProduct":
        return MapProduct(tuple(f.inverse() for f in reversed(self.factors)))

    def __len__(self):
        return len(self.factors)


def two_center_product(h1: float, h2: float, f1: PointLike = (-1.0, 0.0),
                       f2: PointLike = (1.0, 0.0), orientation: int = CCW) -> MapProduct:
    """The two-factor map: rotate about ``f1`` by ``h1``, then about ``f2`` by ``h2``."""
    return MapProduct((SkewRotation(f1, h1, orientation),
                       SkewRotation(f2, h2, orientation)))


def _rotate(z: complex, center: complex, signed_h: float) -> complex:
    d = z - center
    rho = abs(d)
    if rho < DEGENERATE_RADIUS:
        raise DegenerateCenter(f"point {z!r} coincides with center {center!r}")
    return center + d * cmath.exp(1j * (signed_h / rho))


def apply_skew_rotation(m: SkewRotation, z: PointLike) -> PlanarPoint:
    return PlanarPoint.from_complex(_rotate(as_complex(z), m.center, m.signed_h))


def apply_product(prod: MapProduct, z: PointLike) -> PlanarPoint:
    w = as_complex(z)
    for i, f in enumerate(prod.factors):
        try:
            w = _rotate(w, f.center, f.signed_h)
        except DegenerateCenter as exc:
            raise DegenerateCenter(f"factor {i}: {exc}", factor=i) from None
    return PlanarPoint.from_complex(w)


@dataclass(frozen=True)
class InversePolarFrame:
    """Coordinates (r, phi) = (1/|z - center|, arg(z - center))."""

    center: complex = 0j

    def __post_init__(self):
        object.__setattr__(self, "center", as_complex(self.center))


def _normalize_angle(phi: float) -> float:
    phi = math.fmod(phi, TWO_PI)
    if phi < 0.0:
        phi += TWO_PI
    # fmod of a tiny negative number can round up to exactly 2*pi
    if phi >= TWO_PI:
        phi = 0.0
    return phi


def to_inverse_polar(frame: InversePolarFrame, z: PointLike) -> tuple:
    d = as_complex(z) - frame.center
    rho = abs(d)
    if rho < DEGENERATE_RADIUS:
        raise DegenerateCenter("inverse polar coordinates are undefined at the frame center")
    return 1.0 / rho, _normalize_angle(math.atan2(d.imag, d.real))


def from_inverse_polar(frame: InversePolarFrame, r: float, phi: float) -> PlanarPoint:
    if not r > 0:
        raise NonPositiveRadius(f"inverse radius must be positive, got {r!r}")
    return PlanarPoint.from_complex(frame.center + cmath.rect(1.0 / r, phi))


@dataclass(frozen=True)
class CombinedHamiltonian:
    """``H(z) = sum_j w_j |z - F_j|``; level sets are Cartesian ovals."""

    centers: tuple
    weights: tuple

    def __post_init__(self):
        centers = tuple(as_complex(c) for c in self.centers)
        weights = tuple(float(w) for w in self.weights)
        if not centers or len(centers) != len(weights):
            raise ValueError("centers and weights must be non-empty and of equal length")
        if not all(math.isfinite(w) for w in weights):
            raise ValueError("weights must be finite")
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def of_product(cls, prod: MapProduct) -> "CombinedHamiltonian":
        return cls(tuple(f.center for f in prod.factors),
                   tuple(f.signed_h for f in prod.factors))

    def __call__(self, z):
        """Vectorised evaluation on a complex array."""
        z = np.asarray(z, dtype=complex)
        total = np.zeros(z.shape)
        for c, w in zip(self.centers, self.weights):
            total = total + w * np.abs(z - c)
        return total


def combined_h(H: CombinedHamiltonian, z: PointLike) -> float:
    w = as_complex(z)
    return math.fsum(wt * abs(w - c) for c, wt in zip(H.centers, H.weights))


@dataclass(frozen=True)
class RigidMotion:
    """The motion ``z -> a z + b`` with its fixed point, if it has one."""

    a: complex
    b: complex
    fixed_point: Optional[PlanarPoint] = field(default=None)

    def __call__(self, z: PointLike) -> PlanarPoint:
        return PlanarPoint.from_complex(self.a * as_complex(z) + self.b)


def compose_rigid_motions(motions: Iterable[tuple], tol: float = 1e-12) -> RigidMotion:
    """Compose motions ``z -> a_i z + b_i`` (applied in the given order).

    The fixed point of the composite solves ``z = a z + b``, i.e.
    ``b / (1 - a)``.  It is reported as ``None`` when ``a == 1`` (identity
    or a pure translation).
    """
    a, b = 1 + 0j, 0j
    for ai, bi in motions:
        ai, bi = complex(ai), complex(bi)
        if abs(abs(ai) - 1.0) > 1e-9:
            raise ValueError(f"rotation part must have unit modulus, got |a|={abs(ai)}")
        a, b = ai * a, ai * b + bi
    fixed = None
    if abs(a - 1.0) > tol:
        fixed = PlanarPoint.from_complex(b / (1.0 - a))
    return RigidMotion(a, b, fixed)


def rotation_about(center: PointLike, angle: float) -> tuple:
    """(a, b) for the rigid rotation by ``angle`` about ``center``."""
    c = as_complex(center)
    a = cmath.exp(1j * angle)
    return a, c - a * c
