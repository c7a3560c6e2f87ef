"""Long orbits of skew-rotation products and the statistics drawn from them."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .core_maps import (
    DEGENERATE_RADIUS,
    CombinedHamiltonian,
    MapProduct,
    PointLike,
    as_complex,
)
from .errors import DegenerateCenter, DegenerateSeries, NoCrossings, UnboundedOrbit

TWO_PI = 2.0 * math.pi


@dataclass
class OrbitTrace:
    """Recorded orbit of ``prod`` started at ``initial``.

    ``full_steps[k]`` is T^(k+1)(initial).  ``half_steps[k, j]`` is the image
    after factor ``j`` during step ``k``, so ``half_steps[k, -1]`` equals
    ``full_steps[k]``.
    """

    prod: MapProduct
    initial: complex
    full_steps: np.ndarray
    half_steps: Optional[np.ndarray] = None

    @property
    def n(self) -> int:
        return len(self.full_steps)

    def step_starts(self) -> np.ndarray:
        """The point each step starts from: initial, then full_steps[:-1]."""
        return np.concatenate([[self.initial], self.full_steps[:-1]])


def iterate_orbit(prod: MapProduct, z0: PointLike, n: int, record_half_steps: bool = False,
                  stop_radius: Optional[float] = None) -> OrbitTrace:
    """Apply ``prod`` ``n`` times to ``z0``.

    With ``stop_radius`` the iteration ends after the first step whose
    image satisfies ``|z| >= stop_radius``; the trace is then shorter than
    ``n``.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    z = as_complex(z0)
    factors = [(f.center, f.signed_h) for f in prod.factors]
    full = []
    half = [] if record_half_steps else None
    exp = cmath.exp
    push_full = full.append
    for k in range(n):
        for j, (c, sh) in enumerate(factors):
            d = z - c
            rho = abs(d)
            if rho < DEGENERATE_RADIUS:
                raise DegenerateCenter(f"orbit hit the center of factor {j} at step {k}",
                                       factor=j, step=k)
            z = c + d * exp(1j * (sh / rho))
            if half is not None:
                half.append(z)
        push_full(z)
        if stop_radius is not None and abs(z) >= stop_radius:
            break
    full_arr = np.array(full, dtype=complex)
    half_arr = None
    if half is not None:
        half_arr = np.array(half, dtype=complex).reshape(len(full), len(factors))
    return OrbitTrace(prod, as_complex(z0), full_arr, half_arr)


@dataclass(frozen=True)
class AnnulusEstimate:
    center: complex
    rho_min: float
    rho_max: float
    n: int


def radial_bounds(trace: OrbitTrace, center: PointLike = 0j) -> AnnulusEstimate:
    if trace.n == 0:
        raise ValueError("empty trace")
    c = as_complex(center)
    rho = np.abs(trace.full_steps - c)
    return AnnulusEstimate(c, float(rho.min()), float(rho.max()), trace.n)


# -- separatrix crossings -------------------------------------------------------

def _arc_offsets(psi0: float, theta: float, psi: float) -> list:
    """Sweep offsets (>= 0, <= |theta|) at which an arc starting at angle
    ``psi0`` and sweeping signed ``theta`` passes angle ``psi``."""
    if theta >= 0:
        t = (psi - psi0) % TWO_PI
    else:
        t = (psi0 - psi) % TWO_PI
    span = abs(theta)
    out = []
    while t <= span:
        out.append(t)
        t += TWO_PI
    return out


@dataclass(frozen=True)
class ImaginaryAxis:
    """The line x = 0."""

    def arc_angles(self, center: complex, rho: float) -> list:
        # points of the circle with x = 0
        cosv = -center.real / rho
        if abs(cosv) > 1.0:
            return []
        a = math.acos(cosv)
        return [a, -a] if a != 0.0 else [0.0]

    def level(self, z: complex) -> float:
        return z.real


@dataclass(frozen=True)
class Hyperbola:
    """Branch ``|z - F1| - |z - F2| = c`` with foci F1 = (-1, 0), F2 = (1, 0).

    ``c > 0`` is the right branch, ``c < 0`` the left one; ``|c| < 2``.
    """

    c: float

    def __post_init__(self):
        if not 0.0 < abs(self.c) < 2.0:
            raise ValueError("hyperbola constant must satisfy 0 < |c| < 2")

    @classmethod
    def through(cls, z: PointLike) -> "Hyperbola":
        w = as_complex(z)
        return cls(abs(w + 1) - abs(w - 1))

    def level(self, z: complex) -> float:
        return abs(z + 1) - abs(z - 1) - self.c

    def arc_angles(self, center: complex, rho: float) -> list:
        """Angles psi on the circle (center, rho) lying on this branch.

        Substituting the circle into x^2/A^2 - y^2/B^2 = 1 gives a degree-2
        trigonometric polynomial, i.e. a quartic in w = exp(i psi).
        """
        A2 = (self.c / 2) ** 2
        B2 = 1.0 - A2
        cx, cy = center.real, center.imag
        # x^2 = cx^2 + rho^2/2 + 2 cx rho cos + rho^2/2 cos2 ; y^2 likewise with sin
        k0 = (cx * cx + rho * rho / 2) / A2 - (cy * cy + rho * rho / 2) / B2 - 1.0
        k_cos = 2 * cx * rho / A2
        k_sin = -2 * cy * rho / B2
        k_cos2 = (rho * rho / 2) / A2 + (rho * rho / 2) / B2
        coeffs = [k_cos2 / 2, (k_cos - 1j * k_sin) / 2, k0, (k_cos + 1j * k_sin) / 2, k_cos2 / 2]
        angles = []
        for w in np.roots(coeffs):
            if abs(abs(w) - 1.0) > 1e-6:
                continue
            psi = cmath.phase(w)
            # the quartic holds both branches; drop the other one before
            # polishing, since Newton on this branch's level could pull a
            # root across
            z = center + rho * cmath.exp(1j * psi)
            if math.copysign(1.0, z.real) != math.copysign(1.0, self.c):
                continue
            psi = self._polish(center, rho, psi)
            if any(abs(((psi - q + math.pi) % TWO_PI) - math.pi) < 1e-9 for q in angles):
                continue
            angles.append(psi)
        return angles

    def _polish(self, center, rho, psi):
        for _ in range(3):
            z = center + rho * cmath.exp(1j * psi)
            g = self.level(z)
            dz = 1j * rho * cmath.exp(1j * psi)
            grad = (z + 1) / abs(z + 1) - (z - 1) / abs(z - 1)
            dg = grad.real * dz.real + grad.imag * dz.imag
            if dg == 0.0:
                break
            psi -= g / dg
        return psi


Separatrix = Union[ImaginaryAxis, Hyperbola]


def arc_crossings(center: complex, start: complex, signed_h: float, sep: Separatrix) -> list:
    """Ordinates where the arc of a skew rotation crosses ``sep``, in sweep order."""
    d = start - center
    rho = abs(d)
    theta = signed_h / rho
    psi0 = math.atan2(d.imag, d.real)
    hits = []
    for psi in sep.arc_angles(center, rho):
        for t in _arc_offsets(psi0, theta, psi):
            if t == 0.0:
                continue  # the start point belongs to the previous arc
            hits.append((t, center.imag + rho * math.sin(psi)))
    hits.sort()
    return [y for _, y in hits]


@dataclass(frozen=True)
class EscapeReport:
    escaped: bool
    first_exit_step: Optional[int]
    axis_crossings: list = field(repr=False)
    monotone_fraction: float


def detect_escape(trace: OrbitTrace, R_escape: Optional[float] = None,
                  separatrix: Separatrix = ImaginaryAxis()) -> EscapeReport:
    """Escape verdict plus the ordinates where the orbit's arcs cross ``separatrix``.

    Crossings are located on the true circular arcs traced by each factor,
    not interpolated between recorded points.
    """
    if trace.half_steps is None:
        raise ValueError("detect_escape needs a trace recorded with half steps")
    if R_escape is None:
        R_escape = 1e3 * max(abs(trace.initial), 1.0)
    radii = np.abs(trace.full_steps)
    over = np.nonzero(radii >= R_escape)[0]
    first_exit = int(over[0]) if over.size else None

    factors = [(f.center, f.signed_h) for f in trace.prod.factors]
    crossings = []
    z = trace.initial
    for k in range(trace.n):
        row = trace.half_steps[k]
        for j, (c, sh) in enumerate(factors):
            for y in arc_crossings(c, z, sh, separatrix):
                crossings.append((k, y))
            z = row[j]
    if not crossings:
        raise NoCrossings("the orbit never crosses the separatrix")
    ys = np.array([y for _, y in crossings])
    if len(ys) > 1:
        monotone = float(np.mean(np.diff(ys) > 0))
    else:
        monotone = 1.0
    return EscapeReport(first_exit is not None, first_exit, crossings, monotone)


# -- rotation number --------------------------------------------------------------

@dataclass(frozen=True)
class RotationNumberEstimate:
    value: float
    stderr: float


def winding_increments(trace: OrbitTrace, center: PointLike = 0j) -> np.ndarray:
    """Unwrapped angle swept about ``center`` during each step.

    Each factor's arc is split into pieces of at most pi/4 about its own
    center, so arcs longer than half a turn are still counted correctly.
    """
    c = as_complex(center)
    factors = [(f.center, f.signed_h) for f in trace.prod.factors]
    out = np.empty(trace.n)
    z = trace.initial
    quarter = math.pi / 4
    for k in range(trace.n):
        total = 0.0
        for fc, sh in factors:
            d = z - fc
            rho = abs(d)
            theta = sh / rho
            pieces = max(1, math.ceil(abs(theta) / quarter))
            rot = cmath.exp(1j * theta / pieces)
            prev = z
            for _ in range(pieces):
                d = d * rot
                nxt = fc + d
                total += cmath.phase((nxt - c) / (prev - c))
                prev = nxt
            z = prev
        out[k] = total
        # keep the reference path consistent with the recorded orbit
        z = trace.full_steps[k]
    return out


def rotation_number(trace: OrbitTrace, center: PointLike = 0j, batches: int = 10) -> RotationNumberEstimate:
    """Mean winding per step about ``center``, with a batch-means standard error."""
    if trace.n < 100:
        raise ValueError("rotation number needs at least 100 steps")
    c = as_complex(center)
    rho = np.abs(trace.full_steps - c)
    if rho.max() > 10 * rho.min():
        raise UnboundedOrbit(f"radial variation {rho.max() / rho.min():.3g} exceeds 10x")
    inc = winding_increments(trace, c)
    usable = (len(inc) // batches) * batches
    means = inc[:usable].reshape(batches, -1).mean(axis=1)
    stderr = float(means.std(ddof=1) / math.sqrt(batches))
    return RotationNumberEstimate(float(inc.mean()), stderr)


# -- Cartesian-oval sides ---------------------------------------------------------

@dataclass(frozen=True)
class OvalSides:
    """Side of the level ``H = c`` for every recorded point.

    ``sides[k]`` lists the sides of the images after each factor of step k
    (the last entry is the full step).  ``alternation_fraction`` counts
    consecutive (half-step, full-step) pairs inside a step lying on opposite
    sides; ``crossing_fraction`` counts steps whose path, from the step's
    start point through every intermediate image, visits both sides.
    """

    c: float
    sides: list = field(repr=False)
    alternation_fraction: float
    crossing_fraction: float


def _side_codes(values: np.ndarray, c: float) -> np.ndarray:
    return np.sign(values - c).astype(int)


_LABELS = {1: "above", -1: "below", 0: "on"}


def oval_side_sequence(trace: OrbitTrace, H: CombinedHamiltonian, c: float) -> OvalSides:
    if trace.half_steps is None:
        raise ValueError("oval_side_sequence needs a trace recorded with half steps")
    vals = H(trace.half_steps)
    codes = _side_codes(vals, c)
    pairs = codes[:, :-1] * codes[:, 1:]
    alternation = float(np.mean(pairs < 0)) if pairs.size else 0.0
    start_codes = _side_codes(H(trace.step_starts()), c)
    path = np.column_stack([start_codes, codes])
    crossing = float(np.mean(path.max(axis=1) != path.min(axis=1)))
    sides = [[_LABELS[int(v)] for v in row] for row in codes]
    return OvalSides(float(c), sides, alternation, crossing)


def _max_stabbing(lo: np.ndarray, hi: np.ndarray) -> tuple:
    """Point covered by the most open intervals (lo_i, hi_i); returns (count, point)."""
    events = np.concatenate([lo, hi])
    kinds = np.concatenate([np.ones(len(lo), int), -np.ones(len(hi), int)])
    # at equal coordinates close before open: intervals are open
    order = np.lexsort((kinds, events))
    events, kinds = events[order], kinds[order]
    running = np.cumsum(kinds)
    i = int(np.argmax(running))
    best = int(running[i])
    if best <= 0:
        return 0, float(events[0]) - 1.0
    right = events[i + 1] if i + 1 < len(events) else events[i] + 1.0
    return best, float((events[i] + right) / 2)


def scan_level(trace: OrbitTrace, H: CombinedHamiltonian, criterion: str = "alternation") -> float:
    """Level ``c`` maximising the chosen fraction over the recorded orbit.

    Exhaustive: a pair (or step path) is split by ``c`` exactly when ``c``
    lies strictly inside the range of its H values, so the best level is a
    maximum-overlap point of those ranges.
    """
    if trace.half_steps is None:
        raise ValueError("scan_level needs a trace recorded with half steps")
    vals = H(trace.half_steps)
    if criterion == "alternation":
        a, b = vals[:, :-1].ravel(), vals[:, 1:].ravel()
        lo, hi = np.minimum(a, b), np.maximum(a, b)
    elif criterion == "crossing":
        path = np.column_stack([H(trace.step_starts()), vals])
        lo, hi = path.min(axis=1), path.max(axis=1)
    else:
        raise ValueError("criterion must be 'alternation' or 'crossing'")
    return _max_stabbing(lo, hi)[1]


def midpoint_level(trace: OrbitTrace, H: CombinedHamiltonian) -> float:
    """Midpoint between the H ranges of the half-step and full-step families."""
    vals = H(trace.half_steps)
    first, last = vals[:, 0], vals[:, -1]
    lo = max(first.min(), last.min())
    hi = min(first.max(), last.max())
    return float((lo + hi) / 2)


# -- growth exponents ---------------------------------------------------------------

def estimate_growth_exponent(distances: Sequence[float], steps: Optional[Sequence[float]] = None) -> tuple:
    """Slope of log(distance) against log(step) over the second half of the series.

    ``steps`` defaults to 1, 2, ..., N.  Returns ``(exponent, r_squared)``.
    """
    d = np.asarray(distances, dtype=float)
    if len(d) < 1000:
        raise ValueError("growth exponent needs at least 1000 entries")
    t = np.arange(1, len(d) + 1, dtype=float) if steps is None else np.asarray(steps, dtype=float)
    if len(t) != len(d):
        raise ValueError("steps and distances differ in length")
    if np.any(d <= 0) or np.any(t <= 0):
        raise ValueError("distances and steps must be positive")
    half = len(d) // 2
    x, y = np.log(t[half:]), np.log(d[half:])
    if np.ptp(y) == 0.0:
        raise DegenerateSeries("distance series is constant")
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    r2 = 1.0 - float(resid @ resid) / float(((y - y.mean()) ** 2).sum())
    return float(slope), r2


def escape_start(h: float = 2.0, y_mid: float = 1.0, f1: complex = -1 + 0j) -> complex:
    """Start point whose first arc about ``f1`` (length h) has its midpoint at (0, y_mid)."""
    mid = complex(0.0, y_mid)
    rho = abs(mid - f1)
    return f1 + (mid - f1) * cmath.exp(-1j * h / (2 * rho))
