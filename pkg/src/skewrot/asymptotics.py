"""Numerical checks of the asymptotic structure of skew-rotation products.

Big-O statements are turned into measurable quantities: residuals of the
map in an inverse-polar frame are sampled over a range of small ``r`` and
their order is the slope of a log-log least-squares fit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import shapely

from .core_maps import (
    InversePolarFrame,
    MapProduct,
    _rotate,
    as_complex,
    from_inverse_polar,
    to_inverse_polar,
)
from .errors import DegenerateCenter, InsufficientData, RefinementLimit

NOISE_FLOOR = 1e-14


def _wrap(angle: float) -> float:
    """Reduce to (-pi, pi]."""
    return angle - 2.0 * math.pi * math.ceil((angle - math.pi) / (2.0 * math.pi))


def _apply(prod: MapProduct, z: complex) -> complex:
    for i, f in enumerate(prod.factors):
        try:
            z = _rotate(z, f.center, f.signed_h)
        except DegenerateCenter as exc:
            raise DegenerateCenter(f"factor {i}: {exc}", factor=i) from None
    return z


@dataclass(frozen=True)
class ResidualSample:
    r: float
    phi: float
    angle_residual: float
    radius_residual: float


@dataclass(frozen=True)
class OrderFit:
    slope: float
    intercept: float
    r_range: tuple
    n_samples: int


def sample_residuals(prod: MapProduct, frame: InversePolarFrame,
                     rs: Sequence[float], phis: Sequence[float]) -> list:
    """Residuals of ``prod`` against the pure shear ``phi + (sum h) r``.

    ``rs`` and ``phis`` are paired.  The angle increment is unwrapped onto
    the branch nearest the first-order prediction, so large ``h r`` is
    handled correctly.
    """
    if len(rs) != len(phis):
        raise ValueError("rs and phis must have the same length")
    total_h = prod.angular_sum
    out = []
    for r, phi in zip(rs, phis):
        if not r > 0:
            raise ValueError("inverse radii must be positive")
        z = from_inverse_polar(frame, r, phi).z
        r1, phi1 = to_inverse_polar(frame, _apply(prod, z))
        predicted = total_h * r
        advance = predicted + _wrap(phi1 - phi - predicted)
        out.append(ResidualSample(r, phi, advance - predicted, r1 - r))
    return out


def _loglog_fit(xs, ys) -> OrderFit:
    xs = np.asarray(xs, dtype=float)
    ys = np.abs(np.asarray(ys, dtype=float))
    keep = ys >= NOISE_FLOOR
    if keep.sum() < 3:
        raise InsufficientData(f"only {int(keep.sum())} samples above the noise floor")
    lx, ly = np.log(xs[keep]), np.log(ys[keep])
    slope, intercept = np.polyfit(lx, ly, 1)
    return OrderFit(float(slope), float(intercept),
                    (float(xs[keep].min()), float(xs[keep].max())), int(keep.sum()))


def fit_order(samples: Sequence[ResidualSample], which: str) -> OrderFit:
    """Least-squares slope of ``log|residual|`` against ``log r``."""
    if which not in ("angle", "radius"):
        raise ValueError("which must be 'angle' or 'radius'")
    attr = "angle_residual" if which == "angle" else "radius_residual"
    return _loglog_fit([s.r for s in samples], [getattr(s, attr) for s in samples])


def log_spaced(lo: float, hi: float, n: int) -> np.ndarray:
    return np.logspace(math.log10(lo), math.log10(hi), n)


# -- area preservation ---------------------------------------------------------

@dataclass(frozen=True)
class AnnulusGrid:
    """Polar grid: ``n_radial`` geometrically spaced radii times ``n_angular`` angles."""

    r_min: float
    r_max: float
    n_radial: int = 20
    n_angular: int = 50
    center: complex = 0j

    def points(self) -> np.ndarray:
        radii = np.geomspace(self.r_min, self.r_max, self.n_radial)
        # half-step offset keeps grid points off the symmetry axis
        angles = (np.arange(self.n_angular) + 0.5) * (2 * np.pi / self.n_angular)
        return (complex(self.center) + radii[:, None] * np.exp(1j * angles)[None, :]).ravel()


def numeric_jacobian(f, z: complex, step: float) -> np.ndarray:
    """Central-difference Jacobian of a complex-to-complex map seen as R^2 -> R^2."""
    dx = (f(z + step) - f(z - step)) / (2 * step)
    dy = (f(z + 1j * step) - f(z - 1j * step)) / (2 * step)
    return np.array([[dx.real, dy.real], [dx.imag, dy.imag]])


def _chain_min_radius(prod: MapProduct, z: complex) -> float:
    """Smallest distance from each factor's input point to that factor's center."""
    smallest = math.inf
    for f in prod.factors:
        d = abs(z - f.center)
        smallest = min(smallest, d)
        if d < 1e-300:
            break
        z = _rotate(z, f.center, f.signed_h)
    return smallest


def check_area_preservation(prod: MapProduct, region: AnnulusGrid, fd_step: float = 1e-6) -> float:
    """Max over the grid of ``|det J - 1|``.

    The difference step at each grid point is ``fd_step`` times the
    smallest radius met along the composition (the distance from every
    intermediate image to the center of the factor acting on it), so an
    intermediate image passing near a center does not wreck the estimate.
    """
    worst = 0.0
    for z in region.points():
        z = complex(z)
        margin = _chain_min_radius(prod, z)
        step = fd_step * margin
        if margin < 10 * step or step <= 0.0:
            raise DegenerateCenter(f"grid point {z} is within {margin:.3g} of a center")
        jac = numeric_jacobian(lambda w: _apply(prod, w), z, step)
        worst = max(worst, abs(jac[0, 0] * jac[1, 1] - jac[0, 1] * jac[1, 0] - 1.0))
    return worst


# -- intersection property ----------------------------------------------------

@dataclass(frozen=True)
class ClosedCurve:
    """Closed polygon given by its vertices (implicitly closed)."""

    vertices: tuple

    def __post_init__(self):
        verts = tuple(as_complex(v) for v in self.vertices)
        if len(verts) < 16:
            raise ValueError("a closed curve needs at least 16 vertices")
        object.__setattr__(self, "vertices", verts)

    @classmethod
    def circle(cls, radius: float, center=0j, n: int = 256) -> "ClosedCurve":
        c = as_complex(center)
        t = np.arange(n) * (2 * np.pi / n)
        return cls(tuple(c + radius * np.exp(1j * t)))

    def diameter(self) -> float:
        v = np.asarray(self.vertices)
        return float(np.abs(v[:, None] - v[None, :]).max()) if len(v) <= 2048 else \
            float(max(np.ptp(v.real), np.ptp(v.imag)) * math.sqrt(2))


def _ring(points: np.ndarray):
    coords = np.column_stack([points.real, points.imag])
    return shapely.LineString(np.vstack([coords, coords[:1]]))


def image_polygon(prod: MapProduct, curve: ClosedCurve, tol_fraction: float = 0.01,
                  max_vertices: int = 2 ** 20) -> tuple:
    """Refine ``curve`` until consecutive image vertices are closer than
    ``tol_fraction`` of the curve diameter; return (refined curve, image)."""
    tol = tol_fraction * curve.diameter()
    pts = np.asarray(curve.vertices, dtype=complex)
    while True:
        img = np.array([_apply(prod, complex(p)) for p in pts])
        gaps = np.abs(np.roll(img, -1) - img)
        bad = np.nonzero(gaps > tol)[0]
        if bad.size == 0:
            return pts, img
        if pts.size + bad.size > max_vertices:
            raise RefinementLimit(f"refinement would exceed {max_vertices} vertices")
        mids = (pts[bad] + np.roll(pts, -1)[bad]) / 2
        pts = np.insert(pts, bad + 1, mids)


def check_intersection_property(prod: MapProduct, curve: ClosedCurve,
                                max_vertices: int = 2 ** 20) -> bool:
    """True iff the image of ``curve`` under ``prod`` meets ``curve``."""
    pts, img = image_polygon(prod, curve, max_vertices=max_vertices)
    original = _ring(pts)
    if original.intersects(_ring(img)):
        return True
    # no segment crossing found: fall back to inside/outside status of the image
    polygon = shapely.Polygon(np.column_stack([pts.real, pts.imag]))
    inside = shapely.contains_xy(polygon, img.real, img.imag)
    return bool(inside.any() and not inside.all())


# -- concordance of frames ----------------------------------------------------

@dataclass(frozen=True)
class ConcordanceReport:
    rs: tuple
    dphi_dphi_dev: tuple    # max over phi of |d phi~/d phi - 1|
    dr_dr_dev: tuple        # max over phi of |d r~/d r - 1|
    dr_dphi: tuple          # max over phi of |d r~/d phi|
    dr_dphi_order: Optional[OrderFit]


def frame_change(frame_a: InversePolarFrame, frame_b: InversePolarFrame, r: float, phi: float) -> tuple:
    """Coordinates in ``frame_b`` of the point with coordinates (r, phi) in ``frame_a``."""
    return to_inverse_polar(frame_b, from_inverse_polar(frame_a, r, phi))


def check_concordance(frame_a: InversePolarFrame, frame_b: InversePolarFrame,
                      rs: Sequence[float], phis: Optional[Sequence[float]] = None,
                      rel_step: float = 1e-5) -> ConcordanceReport:
    """Central-difference partials of the (r, phi) -> (r~, phi~) change of frame."""
    rs = tuple(float(r) for r in rs)
    if phis is None:
        phis = (np.arange(16) + 0.25) * (2 * np.pi / 16)
    if frame_a.center == frame_b.center:
        # identical frames: the change of coordinates is the identity
        zeros = tuple(0.0 for _ in rs)
        return ConcordanceReport(rs, zeros, zeros, zeros, None)

    dpp, drr, drp = [], [], []
    for r in rs:
        if not r > 0:
            raise ValueError("inverse radii must be positive")
        dr = rel_step * r
        worst = [0.0, 0.0, 0.0]
        for phi in phis:
            rp, fp = frame_change(frame_a, frame_b, r, phi + rel_step)
            rm, fm = frame_change(frame_a, frame_b, r, phi - rel_step)
            d_phi_phi = _wrap(fp - fm) / (2 * rel_step)
            d_r_phi = (rp - rm) / (2 * rel_step)
            r_plus, _ = frame_change(frame_a, frame_b, r + dr, phi)
            r_minus, _ = frame_change(frame_a, frame_b, r - dr, phi)
            d_r_r = (r_plus - r_minus) / (2 * dr)
            worst[0] = max(worst[0], abs(d_phi_phi - 1.0))
            worst[1] = max(worst[1], abs(d_r_r - 1.0))
            worst[2] = max(worst[2], abs(d_r_phi))
        dpp.append(worst[0])
        drr.append(worst[1])
        drp.append(worst[2])
    try:
        order = _loglog_fit(rs, drp)
    except InsufficientData:
        order = None
    return ConcordanceReport(rs, tuple(dpp), tuple(drr), tuple(drp), order)
