"""The non-smooth two-center system built from concentric squares.

Two families of L1 circles (diamonds) ``|x - x_j| + |y| = R`` are centred at
O1 = (-1/2, 0) and O2 = (1/2, 0).  Steps alternate between the families; each
step moves a point clockwise along its diamond by Euclidean length
``a * sqrt(2)``, i.e. by ``a`` in each coordinate.  All lengths below are
stored divided by sqrt(2), which keeps rational inputs rational.

Two independent descriptions of the dynamics live here:

* a geometric stepper that walks the diamonds, and
* the closed-form recurrences for the strip-entry triple (h_n, a_n, alpha_n).

``cross_validate`` checks them against each other exactly.

Family parity: ``alpha = family % 2``, so family 1 has alpha 1 and family 2
has alpha 0.  This is the reading under which the printed h-recurrence
matches the geometry; the conventional starting triple ``(h0, a, 0)``
therefore begins with a family-2 step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional, Union

import numpy as np

from .errors import DegenerateCenter, OutOfRegime

Number = Union[int, float, Fraction]

HALF = Fraction(1, 2)
CENTER_X = {1: -HALF, 2: HALF}


def _as_exact(v) -> Fraction:
    if isinstance(v, float):
        raise TypeError("exact mode needs rational input, got float")
    return Fraction(v)


@dataclass(frozen=True)
class SquareConfig:
    """Step parameter ``a``: each step shifts both coordinates by ``a``."""

    a: Number

    def __post_init__(self):
        a = self.a if isinstance(self.a, float) else Fraction(self.a)
        if not a > 0:
            raise ValueError("a must be positive")
        object.__setattr__(self, "a", a)

    @property
    def exact(self) -> bool:
        return isinstance(self.a, Fraction)

    @property
    def step_length(self) -> float:
        """Euclidean step length a * sqrt(2)."""
        return float(self.a) * math.sqrt(2.0)


@dataclass(frozen=True)
class StripState:
    h: Fraction
    a_rem: Fraction
    alpha: int

    def __post_init__(self):
        object.__setattr__(self, "h", Fraction(self.h))
        object.__setattr__(self, "a_rem", Fraction(self.a_rem))
        object.__setattr__(self, "alpha", int(self.alpha) % 2)


@dataclass(frozen=True)
class GeometricState:
    position: tuple
    next_family: int

    def __post_init__(self):
        if self.next_family not in (1, 2):
            raise ValueError("family must be 1 or 2")


@dataclass(frozen=True)
class OrbitClass:
    """Classification verdict.

    ``period`` is measured in map steps and ``entry_period`` in strip
    entries; both are ``None`` unless ``kind == "periodic"``.
    """

    kind: str
    period: Optional[int] = None
    entry_period: Optional[int] = None
    steps_checked: int = 0


# -- diamond geometry -----------------------------------------------------------

def _perimeter_param(u, y, R):
    """Clockwise perimeter position from the top vertex (per-coordinate units)."""
    if u >= 0 and y > 0:
        return u
    if u > 0 and y <= 0:
        return R - y
    if u <= 0 and y < 0:
        return 2 * R - u
    return 3 * R + y


def _point_at(s, R, xc):
    k = min(int(s // R), 3)
    t = s - k * R
    if k == 0:
        return xc + t, R - t
    if k == 1:
        return xc + R - t, -t
    if k == 2:
        return xc - t, t - R
    return xc - R + t, t


def _advance(x, y, xc, dist, half=None):
    """Move (x, y) clockwise by ``dist`` along the diamond centred at (xc, 0).

    Works for any numeric type supporting +, -, //, % and comparisons.
    Negative ``dist`` moves counterclockwise.  When ``half`` is given, also
    returns the path offsets, within the first lap, at which the point
    enters the strip ``|x| <= half`` from outside.
    """
    u = x - xc
    R = abs(u) + abs(y)
    if R == 0:
        raise DegenerateCenter(f"point ({x}, {y}) is the active center")
    s = _perimeter_param(u, y, R)
    nx, ny = _point_at((s + dist) % (4 * R), R, xc)
    if half is None:
        return nx, ny, None

    entries = []
    inside = -half <= x <= half
    remaining = min(dist, 4 * R)
    travelled = 0 * dist
    s_cur = s
    while remaining > 0:
        k = s_cur // R
        seg = min((k + 1) * R - s_cur, remaining)
        side = int(k) % 4
        xa, _ = _point_at(s_cur - (k - side) * R, R, xc)
        rightward = side in (0, 3)
        pos, left, base = xa, seg, travelled
        if not inside:
            if rightward and pos < -half:
                d = -half - pos
            elif not rightward and pos > half:
                d = pos - half
            else:
                d = None
            if d is not None and d <= left:
                entries.append(base + d)
                inside = True
                pos = -half if rightward else half
                left -= d
        if inside:
            d = half - pos if rightward else pos + half
            if d < left:
                inside = False
        travelled += seg
        s_cur += seg
        remaining -= seg
    return nx, ny, entries


def geometric_step(cfg: SquareConfig, s: GeometricState) -> GeometricState:
    """One map step along the diamond of ``s.next_family``."""
    x, y = s.position
    if cfg.exact:
        x, y = _as_exact(x), _as_exact(y)
        xc = CENTER_X[s.next_family]
    else:
        x, y = float(x), float(y)
        xc = float(CENTER_X[s.next_family])
    nx, ny, _ = _advance(x, y, xc, cfg.a)
    return GeometricState((nx, ny), 3 - s.next_family)


# -- exact lattice walker ---------------------------------------------------------

class _Lattice:
    """Scale rationals by a common denominator so stepping runs on ints."""

    def __init__(self, *values):
        D = 2
        for v in values:
            D = math.lcm(D, Fraction(v).denominator)
        self.D = D

    def to_int(self, v) -> int:
        f = Fraction(v) * self.D
        assert f.denominator == 1
        return f.numerator

    def to_frac(self, n: int) -> Fraction:
        return Fraction(n, self.D)


@dataclass(frozen=True)
class StripEntry:
    """One strip entry observed by the geometric stepper.

    ``step`` is the index of the map step holding the remaining part
    ``a_rem`` of the entering step.
    """

    step: int
    h: Fraction
    a_rem: Fraction
    alpha: int

    @property
    def triple(self) -> tuple:
        return (self.h, self.a_rem, self.alpha)


def _start_from_triple(cfg: SquareConfig, h0, a0, alpha0) -> tuple:
    """Step-start point and family whose first step enters the strip with
    the triple (h0, a0, alpha0)."""
    a = cfg.a
    h0, a0 = Fraction(h0), Fraction(a0)
    if h0 == 0:
        raise ValueError("h0 must be non-zero")
    if not 0 < a0 <= a:
        raise ValueError("a0 must lie in (0, a]")
    family = 1 if alpha0 % 2 == 1 else 2
    bx = -HALF if h0 > 0 else HALF
    if a0 == a:
        return (bx, h0), family
    px, py, _ = _advance(bx, h0, CENTER_X[family], -(a - a0))
    return (px, py), family


def _walk(cfg: SquareConfig, start: tuple, family: int, n_steps: int,
          lattice: _Lattice) -> Iterator[tuple]:
    """Yield ``(k, x, y, next_family, entries)`` after each step, on the int lattice."""
    x, y = lattice.to_int(start[0]), lattice.to_int(start[1])
    a = lattice.to_int(cfg.a)
    half = lattice.D // 2
    centers = {1: -half, 2: half}
    for k in range(n_steps):
        x, y, entries = _advance(x, y, centers[family], a, half)
        yield k, x, y, family, entries
        family = 3 - family


def entry_series(cfg: SquareConfig, h0, n_steps: int, alpha0: int = 0,
                 a0=None, max_entries: Optional[int] = None) -> list:
    """Strip entries of the orbit started from the triple (h0, a0, alpha0).

    The triple itself is entry 0.  Runs the exact geometric stepper for
    ``n_steps`` map steps (or until ``max_entries`` entries are found).
    """
    if not cfg.exact:
        raise TypeError("entry_series needs an exact (rational) configuration")
    a0 = cfg.a if a0 is None else Fraction(a0)
    start, family = _start_from_triple(cfg, h0, a0, alpha0)
    lat = _Lattice(cfg.a, h0, a0, start[0], start[1])
    a_int = lat.to_int(cfg.a)
    out = []
    if a0 == cfg.a:
        out.append(StripEntry(0, Fraction(h0), a0, alpha0 % 2))
    for k, x, y, fam, entries in _walk(cfg, start, family, n_steps, lat):
        if entries:
            xc = -lat.D // 2 if fam == 1 else lat.D // 2
            for t in entries:
                # walk back from the end of the step to the entry point
                _, py, _ = _advance(x, y, xc, -(a_int - t))
                if t < a_int:
                    out.append(StripEntry(k, lat.to_frac(py), lat.to_frac(a_int - t), fam % 2))
                else:
                    out.append(StripEntry(k + 1, lat.to_frac(py), cfg.a, (3 - fam) % 2))
        if max_entries is not None and len(out) >= max_entries:
            break
    return out[:max_entries] if max_entries is not None else out


def entry_ordinate_by_step(cfg: SquareConfig, h0, n_steps: int, alpha0: int = 0,
                           a0=None) -> np.ndarray:
    """``|h|`` of the latest strip entry after each of the steps 1..n_steps.

    This is the entry-ordinate distance as a step-indexed series, ready for
    :func:`skewrot.orbit_analysis.estimate_growth_exponent`.
    """
    entries = entry_series(cfg, h0, n_steps, alpha0, a0)
    at = np.array([e.step for e in entries])
    h = np.array([abs(float(e.h)) for e in entries])
    # an entry recorded at step index k has happened once step k completes
    idx = np.searchsorted(at, np.arange(n_steps), side="right") - 1
    return h[idx]


# -- strip recurrences ------------------------------------------------------------

def _floor(q: Fraction) -> int:
    return q.numerator // q.denominator


def _recurrence(cfg: SquareConfig, st: StripState) -> tuple:
    a = cfg.a
    if not cfg.exact:
        raise TypeError("strip recurrences need an exact (rational) configuration")
    if a > 1:
        raise OutOfRegime("recurrences assume a <= 1 (one step never overshoots the strip)", st)
    if abs(st.h) <= a:
        raise OutOfRegime(f"|h_n| = {abs(st.h)} <= a = {a}", st)
    if not 0 < st.a_rem <= a:
        raise ValueError("a_n must lie in (0, a]")
    h, an, alpha = st.h, st.a_rem, st.alpha
    q = (1 - an) / a
    gamma = _floor(q)
    beta = a * (q - gamma)
    sign_alpha = -1 if alpha % 2 else 1
    sign_g1 = 1 if (gamma + 1) % 2 == 0 else -1
    odd_gamma_term = a if gamma % 2 else 0   # (1 - (-1)^gamma) a / 2
    h1 = -(h + sign_alpha * (an + sign_g1 * beta - odd_gamma_term))
    w = (2 * abs(h1) + beta) / a
    fl = _floor(w)
    alpha1 = (alpha + gamma + 1 + fl) % 2
    a1 = a * (1 - (w - fl))
    return StripState(h1, a1, alpha1), gamma + 1 + fl


def strip_recurrence_step(cfg: SquareConfig, st: StripState) -> StripState:
    """Next strip-entry triple from the closed-form recurrences."""
    return _recurrence(cfg, st)[0]


def recurrence_steps(cfg: SquareConfig, st: StripState) -> int:
    """Map steps between entry ``st`` and the next entry."""
    return _recurrence(cfg, st)[1]


# -- cross validation -------------------------------------------------------------

@dataclass(frozen=True)
class CrossValidation:
    matched: bool
    entries_checked: int
    first_mismatch: Optional[tuple] = None   # (index, geometric, recurrence)
    left_regime: bool = False

    def __bool__(self):
        return self.matched


def cross_validate(cfg: SquareConfig, h0, n_entries: int, alpha0: int = 0, a0=None,
                   max_steps: int = 10 ** 7) -> CrossValidation:
    """Compare ``n_entries`` recurrence steps with the geometric stepper.

    Triples and the number of map steps between entries must agree exactly.
    Comparison stops early if the recurrence leaves its regime.
    """
    a0 = cfg.a if a0 is None else Fraction(a0)
    if abs(Fraction(h0)) <= cfg.a:
        raise OutOfRegime("cross validation needs |h0| > a")
    geo = entry_series(cfg, h0, max_steps, alpha0, a0, max_entries=n_entries + 1)
    if len(geo) < n_entries + 1:
        raise RuntimeError(f"only {len(geo)} entries within {max_steps} steps")
    st = StripState(h0, a0, alpha0)
    for n in range(n_entries):
        try:
            nxt, steps = _recurrence(cfg, st)
        except OutOfRegime:
            return CrossValidation(True, n, None, left_regime=True)
        g = geo[n + 1]
        if g.triple != (nxt.h, nxt.a_rem, nxt.alpha) or g.step - geo[n].step != steps:
            return CrossValidation(False, n, (n + 1, (g.triple, g.step - geo[n].step),
                                              ((nxt.h, nxt.a_rem, nxt.alpha), steps)))
        st = nxt
    return CrossValidation(True, n_entries)


# -- classification ---------------------------------------------------------------

def _expanding(hs: list, h0, a) -> bool:
    if len(hs) < 11 or abs(hs[-1]) <= abs(h0) + 10 * a:
        return False
    tail = [abs(h) for h in hs[-11:]]
    return all(u < v for u, v in zip(tail, tail[1:]))


def classify_orbit(cfg: SquareConfig, h0, a0, alpha0: int, max_steps: int,
                   geometric_fallback: bool = False) -> OrbitClass:
    """Classify the orbit with strip-entry triple (h0, a0, alpha0).

    Iterates the exact recurrences, hashing every triple; the first repeat
    gives the period.  ``max_steps`` bounds the number of map steps.  With
    ``geometric_fallback`` an orbit that leaves the recurrence regime is
    re-classified by the geometric stepper instead of raising.
    """
    st = StripState(h0, a0, alpha0)
    seen = {st: (0, 0)}
    hs = [st.h]
    steps = 0
    n = 0
    while steps < max_steps:
        try:
            st, dt = _recurrence(cfg, st)
        except OutOfRegime:
            if geometric_fallback:
                return classify_geometric(cfg, h0, a0, alpha0, max_steps)
            raise
        steps += dt
        n += 1
        if st in seen:
            n0, s0 = seen[st]
            return OrbitClass("periodic", steps - s0, n - n0, steps)
        seen[st] = (n, steps)
        hs.append(st.h)
        if _expanding(hs, h0, cfg.a):
            return OrbitClass("expanding", steps_checked=steps)
    return OrbitClass("unresolved", steps_checked=steps)


def classify_geometric(cfg: SquareConfig, h0, a0, alpha0: int, max_steps: int) -> OrbitClass:
    """Classification by exact geometric stepping with state hashing.

    The state at each step boundary is (position, next family); the first
    repeat gives the period in map steps, and the number of strip entries
    in that window gives the period in entries.
    """
    a0 = cfg.a if a0 is None else Fraction(a0)
    start, family = _start_from_triple(cfg, h0, a0, alpha0)
    lat = _Lattice(cfg.a, h0, a0, start[0], start[1])
    key0 = (lat.to_int(start[0]), lat.to_int(start[1]), family)
    seen = {key0: (0, 0)}
    entry_count = 0
    hs = [Fraction(h0)]
    half = lat.D // 2
    a_int = lat.to_int(cfg.a)
    for k, x, y, fam, entries in _walk(cfg, start, family, max_steps, lat):
        for t in entries:
            entry_count += 1
            _, py, _ = _advance(x, y, -half if fam == 1 else half, -(a_int - t))
            hs.append(lat.to_frac(py))
        key = (x, y, 3 - fam)
        if key in seen:
            s0, e0 = seen[key]
            return OrbitClass("periodic", k + 1 - s0, entry_count - e0, k + 1)
        seen[key] = (k + 1, entry_count)
        if entries and _expanding(hs, h0, cfg.a):
            return OrbitClass("expanding", steps_checked=k + 1)
    return OrbitClass("unresolved", steps_checked=max_steps)


# -- floating-point runs ----------------------------------------------------------

def random_start(seed: int) -> tuple:
    """Point drawn uniformly along the perimeter of ``|x| + |y| = 1``.

    Uses numpy's PCG64 generator, so a seed gives the same point everywhere.
    """
    rng = np.random.default_rng(seed)
    s = float(rng.uniform(0.0, 4.0))
    return _point_at(s, 1.0, 0.0)


def random_walk_run(cfg: SquareConfig, n_steps: int, seed: Optional[int] = None,
                    start: Optional[tuple] = None, family: int = 1,
                    with_positions: bool = False):
    """Distances ``|T^t(x0, y0)|`` for t = 1..n_steps in floating point.

    The start is ``start`` when given, otherwise a seeded random point with
    ``|x0| + |y0| = 1``.  With ``with_positions`` the (n_steps, 2) array of
    positions is returned as well.
    """
    if start is None:
        if seed is None:
            raise ValueError("need either a start point or a seed")
        start = random_start(seed)
    x, y = float(start[0]), float(start[1])
    a = float(cfg.a)
    centers = {1: -0.5, 2: 0.5}
    out = np.empty(n_steps)
    pos = np.empty((n_steps, 2)) if with_positions else None
    hyp = math.hypot
    for t in range(n_steps):
        x, y, _ = _advance(x, y, centers[family], a)
        out[t] = hyp(x, y)
        if pos is not None:
            pos[t] = x, y
        family = 3 - family
    return (out, pos) if with_positions else out
