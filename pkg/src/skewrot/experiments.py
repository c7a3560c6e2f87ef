"""Named, reproducible experiments: each writes CSV data plus SVG figures.

CSV schemas
-----------
orbit        step, x, y, rho, phi_unwrapped, H_value, substep_index
             (step 0 is the initial point; substep_index j >= 1 is the
             image after factor j, so a full step has j = number of factors)
classify     a_num, a_den, h0_num, h0_den, alpha0, kind, period, steps_checked
crossval     a_num, a_den, h0_num, h0_den, a0, alpha0, matched, entries_checked
entries      entry, step, h, a_rem, alpha
residuals    r, phi, angle_residual, radius_residual
concordance  r, dphi_dphi_dev, dr_dr_dev, dr_dphi
intersection case, n_factors, angular_sum, radius, intersects
crossings    crossing, step, y
walk         step, x, y, distance

Floats are written with ``repr`` (shortest round-trip form), rationals as
``p/q``.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from . import plotting
from .asymptotics import (
    ClosedCurve,
    check_concordance,
    check_intersection_property,
    fit_order,
    image_polygon,
    log_spaced,
    sample_residuals,
)
from .core_maps import (
    CCW,
    CombinedHamiltonian,
    InversePolarFrame,
    MapProduct,
    SkewRotation,
    two_center_product,
)
from .errors import ConfigError, NoCrossings, UnboundedOrbit
from .orbit_analysis import (
    Hyperbola,
    ImaginaryAxis,
    OrbitTrace,
    detect_escape,
    estimate_growth_exponent,
    iterate_orbit,
    midpoint_level,
    oval_side_sequence,
    radial_bounds,
    rotation_number,
    scan_level,
    escape_start,
)
from .squares import (
    SquareConfig,
    classify_orbit,
    cross_validate,
    entry_ordinate_by_step,
    entry_series,
    random_walk_run,
)


# -- configuration -----------------------------------------------------------------

@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    parameters: dict = field(default_factory=dict)
    n_steps: Optional[int] = None
    seed: int = 0
    output_prefix: Optional[str] = None

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(data) - {"experiment", "parameters", "n_steps", "seed", "output_prefix"}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "experiment" not in data:
            raise ConfigError("config is missing 'experiment'")
        params = data.get("parameters", {}) or {}
        if not isinstance(params, dict):
            raise ConfigError("'parameters' must be an object")
        n_steps = data.get("n_steps")
        seed = data.get("seed", 0)
        try:
            n_steps = None if n_steps is None else int(n_steps)
            seed = int(seed)
        except (TypeError, ValueError):
            raise ConfigError("n_steps and seed must be integers") from None
        return cls(str(data["experiment"]), dict(params), n_steps, seed, data.get("output_prefix"))


@dataclass
class ResultBundle:
    csv_paths: list = field(default_factory=list)
    svg_paths: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)


def parse_value(v):
    """Parse a parameter value.

    Strings holding numbers become exact ``Fraction`` (``"2.5"``,
    ``"1/3"``), ``"(x,y)"`` becomes a pair and ``"p1;p2"`` a list.  JSON
    numbers and lists are accepted as they are.
    """
    if isinstance(v, bool):
        return v
    if isinstance(v, (int, float, Fraction)):
        return v
    if isinstance(v, (list, tuple)):
        return [parse_value(u) for u in v]
    if not isinstance(v, str):
        raise ConfigError(f"unsupported parameter value {v!r}")
    s = v.strip()
    if ";" in s:
        return [parse_value(u) for u in s.split(";") if u.strip()]
    if s.startswith("(") and s.endswith(")"):
        parts = [u.strip() for u in s[1:-1].split(",")]
        if len(parts) != 2:
            raise ConfigError(f"a point needs two coordinates: {v!r}")
        return tuple(parse_value(u) for u in parts)
    try:
        return Fraction(s)
    except ValueError:
        return s


def _fmt(v) -> str:
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if v is None:
        return ""
    return str(v)


class _Params:
    """Typed access to merged parameters, turning bad values into ConfigError."""

    def __init__(self, values: dict):
        self.values = values

    def raw(self, key):
        return self.values[key]

    def float(self, key) -> float:
        try:
            return float(self.values[key])
        except (TypeError, ValueError):
            raise ConfigError(f"parameter {key!r} must be a number") from None

    def int(self, key) -> int:
        v = self.values[key]
        if isinstance(v, Fraction) and v.denominator != 1 or isinstance(v, float) and not v.is_integer():
            raise ConfigError(f"parameter {key!r} must be an integer")
        try:
            return int(v)
        except (TypeError, ValueError):
            raise ConfigError(f"parameter {key!r} must be an integer") from None

    def rational(self, key) -> Fraction:
        v = self.values[key]
        if isinstance(v, float):
            raise ConfigError(f"parameter {key!r} must be exact: write it as a string")
        try:
            return Fraction(v)
        except (TypeError, ValueError):
            raise ConfigError(f"parameter {key!r} must be a rational number") from None

    def point(self, key) -> complex:
        return _to_point(self.values[key], key)

    def points(self, key) -> list:
        v = self.values[key]
        if isinstance(v, list) and v and not _is_scalar(v[0]):
            return [_to_point(u, key) for u in v]
        return [_to_point(v, key)]

    def str(self, key) -> str:
        return str(self.values[key])


def _is_scalar(v) -> bool:
    return isinstance(v, (int, float, Fraction))


def _to_point(v, key) -> complex:
    if _is_scalar(v):
        return complex(float(v), 0.0)
    try:
        x, y = v
        return complex(float(x), float(y))
    except (TypeError, ValueError):
        raise ConfigError(f"parameter {key!r} must be a point (x,y)") from None


@dataclass(frozen=True)
class Experiment:
    name: str
    description: str
    defaults: dict
    default_steps: int
    func: Callable


class _Output:
    def __init__(self, prefix: Path, bundle: ResultBundle):
        self.prefix = prefix
        self.bundle = bundle

    def path(self, tag: str, ext: str) -> Path:
        p = Path(f"{self.prefix}_{tag}.{ext}")
        p.parent.mkdir(parents=True, exist_ok=True)
        return p

    def csv(self, tag: str, header: list, rows) -> Path:
        p = self.path(tag, "csv")
        with open(p, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([_fmt(v) for v in row])
        self.bundle.csv_paths.append(str(p))
        return p

    def svg(self, tag: str, draw: Callable, *args, **kwargs) -> Path:
        p = draw(self.path(tag, "svg"), *args, **kwargs)
        self.bundle.svg_paths.append(str(p))
        return p


# -- shared writers ----------------------------------------------------------------

ORBIT_HEADER = ["step", "x", "y", "rho", "phi_unwrapped", "H_value", "substep_index"]


def orbit_rows(trace: OrbitTrace, H: CombinedHamiltonian, half_steps: bool = False, stride: int = 1):
    """Rows of the orbit CSV.  ``stride`` keeps every stride-th step."""
    k = len(trace.prod)
    if half_steps and trace.half_steps is not None:
        pts = trace.half_steps[::stride].ravel()
        steps = np.repeat(np.arange(1, trace.n + 1)[::stride], k)
        subs = np.tile(np.arange(1, k + 1), len(pts) // k)
    else:
        pts = trace.full_steps[::stride]
        steps = np.arange(1, trace.n + 1)[::stride]
        subs = np.full(len(pts), k)
    pts = np.concatenate([[trace.initial], pts])
    steps = np.concatenate([[0], steps])
    subs = np.concatenate([[0], subs])
    phi = np.unwrap(np.angle(pts))
    hv = H(pts)
    for row in zip(steps.tolist(), pts.real.tolist(), pts.imag.tolist(), np.abs(pts).tolist(),
                   phi.tolist(), hv.tolist(), subs.tolist()):
        yield row


def _product(p: _Params, h1="h1", h2="h2") -> MapProduct:
    orientation = p.int("orientation") if "orientation" in p.values else CCW
    if orientation not in (1, -1):
        raise ConfigError("orientation must be 1 or -1")
    f1 = p.point("f1") if "f1" in p.values else -1 + 0j
    f2 = p.point("f2") if "f2" in p.values else 1 + 0j
    return two_center_product(p.float(h1), p.float(h2), f1, f2, orientation)


def _oval_grid(H: CombinedHamiltonian, pts: np.ndarray, n: int = 200):
    xr = np.ptp(pts.real) or 1.0
    yr = np.ptp(pts.imag) or 1.0
    xs = np.linspace(pts.real.min() - 0.1 * xr, pts.real.max() + 0.1 * xr, n)
    ys = np.linspace(pts.imag.min() - 0.1 * yr, pts.imag.max() + 0.1 * yr, n)
    X, Y = np.meshgrid(xs, ys)
    return X, Y, H(X + 1j * Y)


# -- experiments -------------------------------------------------------------------

def _fig4_kam(p: _Params, n_steps: int, seed: int, out: _Output) -> None:
    prod = _product(p)
    H = CombinedHamiltonian.of_product(prod)
    series = []
    for i, z0 in enumerate(p.points("z0")):
        trace = iterate_orbit(prod, z0, n_steps)
        out.csv(f"orbit{i}", ORBIT_HEADER, orbit_rows(trace, H))
        bounds = radial_bounds(trace)
        s = out.bundle.summary
        s[f"orbit{i}_z0"] = f"({z0.real!r},{z0.imag!r})"
        s[f"orbit{i}_rho_min"] = bounds.rho_min
        s[f"orbit{i}_rho_max"] = bounds.rho_max
        try:
            rn = rotation_number(trace)
            s[f"orbit{i}_rotation_number"] = rn.value
            s[f"orbit{i}_rotation_stderr"] = rn.stderr
        except (UnboundedOrbit, ValueError) as exc:
            s[f"orbit{i}_rotation_number"] = f"unavailable ({exc})"
        sl = plotting.thin(trace.n)
        series.append((f"z0=({z0.real:g},{z0.imag:g})", trace.full_steps[sl].real, trace.full_steps[sl].imag))
    out.svg("orbits", plotting.orbit_scatter, series,
            title=f"h1={p.float('h1'):g}, h2={p.float('h2'):g}",
            markers=[(f"F{j + 1}", c.real, c.imag) for j, c in enumerate(prod.centers)])


FIG3_PANELS = {
    # the oval 5|z-1| - 6|z+1| puts F1 = (1, 0); with the default
    # counterclockwise sense this orbit is chaotic, so the sense is clockwise
    "left": {"h1": Fraction(5, 2), "h2": Fraction(-3), "z0": (Fraction(3), Fraction(5)),
             "f1": (Fraction(1), Fraction(0)), "f2": (Fraction(-1), Fraction(0)), "orientation": -1},
    # the oval |z-1| + 10|z+1| puts F1 = (-1, 0)
    "right": {"h1": Fraction(5, 2), "h2": Fraction(1, 4), "z0": (Fraction(8, 5), Fraction(0)),
              "f1": (Fraction(-1), Fraction(0)), "f2": (Fraction(1), Fraction(0)), "orientation": 1},
}


def fig3_trace(panel: str, n_steps: int = 10_000) -> tuple:
    """Trace (with half steps) and Hamiltonian for one panel of the oval figure."""
    p = _Params(dict(FIG3_PANELS[panel]))
    prod = _product(p)
    return iterate_orbit(prod, p.point("z0"), n_steps, record_half_steps=True), \
        CombinedHamiltonian.of_product(prod)


def _fig3_oval(p: _Params, n_steps: int, seed: int, out: _Output) -> None:
    panel = p.str("panel")
    if panel not in FIG3_PANELS:
        raise ConfigError("panel must be 'left' or 'right'")
    merged = dict(FIG3_PANELS[panel])
    merged.update({k: v for k, v in p.values.items() if k != "panel" and v is not None})
    p = _Params(merged)
    prod = _product(p)
    H = CombinedHamiltonian.of_product(prod)
    trace = iterate_orbit(prod, p.point("z0"), n_steps, record_half_steps=True)
    c = p.float("c") if "c" in p.values else scan_level(trace, H, "alternation")
    sides = oval_side_sequence(trace, H, c)
    c_cross = scan_level(trace, H, "crossing")
    c_mid = midpoint_level(trace, H)
    s = out.bundle.summary
    s["panel"] = panel
    s["c"] = c
    s["alternation_fraction"] = sides.alternation_fraction
    s["crossing_fraction"] = sides.crossing_fraction
    s["c_crossing_scan"] = c_cross
    s["crossing_fraction_at_c_crossing_scan"] = oval_side_sequence(trace, H, c_cross).crossing_fraction
    s["c_midpoint"] = c_mid
    s["alternation_fraction_at_c_midpoint"] = oval_side_sequence(trace, H, c_mid).alternation_fraction
    out.csv("orbit", ORBIT_HEADER, orbit_rows(trace, H, half_steps=True))
    half = trace.half_steps[:, 0]
    full = trace.full_steps
    pts = np.concatenate([half, full])
    out.svg("oval", plotting.orbit_scatter,
            [("after first factor", half.real, half.imag), ("full step", full.real, full.imag)],
            title=f"{panel} panel, c={c:.6g}", contour=(*_oval_grid(H, pts), c))


def _fig2_hyperbolic(p: _Params, n_steps: int, seed: int, out: _Output) -> None:
    prod = _product(p)
    H = CombinedHamiltonian.of_product(prod)
    series = []
    for i, z0 in enumerate(p.points("z0")):
        trace = iterate_orbit(prod, z0, n_steps, record_half_steps=True)
        out.csv(f"orbit{i}", ORBIT_HEADER, orbit_rows(trace, H))
        sep = ImaginaryAxis() if z0.real == 0.0 else Hyperbola.through(z0)
        s = out.bundle.summary
        s[f"orbit{i}_final_radius"] = abs(trace.full_steps[-1])
        s[f"orbit{i}_separatrix"] = "x=0" if isinstance(sep, ImaginaryAxis) else f"hyperbola c={sep.c!r}"
        try:
            rep = detect_escape(trace, separatrix=sep)
            s[f"orbit{i}_crossings"] = len(rep.axis_crossings)
            s[f"orbit{i}_monotone_fraction"] = rep.monotone_fraction
        except NoCrossings:
            s[f"orbit{i}_crossings"] = 0
        sl = plotting.thin(trace.n)
        series.append((f"z0=({z0.real:g},{z0.imag:g})", trace.full_steps[sl].real, trace.full_steps[sl].imag))
    out.svg("orbits", plotting.orbit_scatter, series,
            title=f"h1={p.float('h1'):g}, h2={p.float('h2'):g}")


def _thm4_escape(p: _Params, n_steps: int, seed: int, out: _Output) -> None:
    h = p.float("h")
    prod = two_center_product(h, -h)
    z0 = escape_start(h, p.float("y_mid"))
    R = p.float("R_escape")
    trace = iterate_orbit(prod, z0, n_steps, record_half_steps=True, stop_radius=R)
    rep = detect_escape(trace, R_escape=R)
    s = out.bundle.summary
    s["z0"] = f"({z0.real!r},{z0.imag!r})"
    s["escaped"] = rep.escaped
    s["first_exit_step"] = rep.first_exit_step
    s["steps_run"] = trace.n
    s["crossings"] = len(rep.axis_crossings)
    s["monotone_fraction"] = rep.monotone_fraction
    ys = [y for _, y in rep.axis_crossings]
    out.csv("crossings", ["crossing", "step", "y"],
            ((i, k, y) for i, (k, y) in enumerate(rep.axis_crossings)))
    out.csv("orbit", ORBIT_HEADER, orbit_rows(trace, CombinedHamiltonian.of_product(prod),
                                               stride=p.int("csv_stride")))
    out.svg("crossings", plotting.line_plot, [("y*", np.arange(len(ys)), ys)],
            title="ordinates of crossings with x = 0", xlabel="crossing", ylabel="y")


def _thm2_orders(p: _Params, n_steps: int, seed: int, out: _Output) -> None:
    prod = _product(p)
    frame = InversePolarFrame(p.point("frame"))
    rs = log_spaced(p.float("r_min"), p.float("r_max"), p.int("n_r"))
    n_phi = p.int("n_phi")
    phis = (np.arange(n_phi) + 0.5) * (2 * np.pi / n_phi)
    rr, pp = np.meshgrid(rs, phis, indexing="ij")
    samples = sample_residuals(prod, frame, rr.ravel().tolist(), pp.ravel().tolist())
    angle = fit_order(samples, "angle")
    radius = fit_order(samples, "radius")
    s = out.bundle.summary
    s["angle_order"] = angle.slope
    s["radius_order"] = radius.slope
    s["angle_samples"] = angle.n_samples
    s["radius_samples"] = radius.n_samples
    out.csv("residuals", ["r", "phi", "angle_residual", "radius_residual"],
            ((q.r, q.phi, q.angle_residual, q.radius_residual) for q in samples))
    r = np.array([q.r for q in samples])
    out.svg("residuals", plotting.line_plot,
            [("|angle residual| max", rs, np.abs([q.angle_residual for q in samples]).reshape(len(rs), -1).max(1)),
             ("|radius residual| max", rs, np.abs([q.radius_residual for q in samples]).reshape(len(rs), -1).max(1))],
            title=f"orders {angle.slope:.3f} / {radius.slope:.3f}", xlabel="r", ylabel="residual",
            logx=True, logy=True)
    del r


def random_product(rng: np.random.Generator, balanced: bool) -> MapProduct:
    """Random product of 2-4 skew rotations with centers in the unit disk.

    ``balanced`` forces the arc lengths to sum to zero.
    """
    k = int(rng.integers(2, 5))
    radii = np.sqrt(rng.uniform(0.0, 1.0, k))
    angles = rng.uniform(0.0, 2 * np.pi, k)
    centers = radii * np.exp(1j * angles)
    hs = rng.uniform(-4.0, 4.0, k)
    if balanced:
        hs[-1] = -hs[:-1].sum()
    return MapProduct(tuple(SkewRotation(complex(c), float(h)) for c, h in zip(centers, hs)))


def _lemma2_intersection(p: _Params, n_steps: int, seed: int, out: _Output) -> None:
    rng = np.random.default_rng(seed)
    rows = []
    first = None
    for i in range(p.int("n_products")):
        prod = random_product(rng, balanced=bool(i % 2))
        radius = float(rng.uniform(p.float("r_min"), p.float("r_max")))
        curve = ClosedCurve.circle(radius)
        hit = check_intersection_property(prod, curve)
        rows.append((i, len(prod), prod.angular_sum, radius, hit))
        if first is None:
            first = (prod, curve)
    s = out.bundle.summary
    s["n_cases"] = len(rows)
    s["n_intersecting"] = sum(r[-1] for r in rows)
    s["all_intersect"] = all(r[-1] for r in rows)
    out.csv("intersection", ["case", "n_factors", "angular_sum", "radius", "intersects"], rows)
    pts, img = image_polygon(*first)
    out.svg("case0", plotting.orbit_scatter,
            [("curve", pts.real, pts.imag), ("image", img.real, img.imag)], title="case 0")


def _concordance_check(p: _Params, n_steps: int, seed: int, out: _Output) -> None:
    rs = log_spaced(p.float("r_min"), p.float("r_max"), p.int("n_r"))
    rep = check_concordance(InversePolarFrame(p.point("frame_a")), InversePolarFrame(p.point("frame_b")), rs)
    s = out.bundle.summary
    s["dr_dphi_order"] = rep.dr_dphi_order.slope if rep.dr_dphi_order else "identical frames"
    s["max_dphi_dphi_dev"] = max(rep.dphi_dphi_dev)
    s["max_dr_dr_dev"] = max(rep.dr_dr_dev)
    out.csv("concordance", ["r", "dphi_dphi_dev", "dr_dr_dev", "dr_dphi"],
            zip(rep.rs, rep.dphi_dphi_dev, rep.dr_dr_dev, rep.dr_dphi))
    series = [(name, rep.rs, np.maximum(vals, 1e-300)) for name, vals in
              (("|dphi~/dphi - 1|", rep.dphi_dphi_dev), ("|dr~/dr - 1|", rep.dr_dr_dev),
               ("|dr~/dphi|", rep.dr_dphi))]
    out.svg("concordance", plotting.line_plot, series, xlabel="r", logx=True, logy=True)


def expected_class(m: int, family: str, ell: Fraction) -> tuple:
    """(kind, map-step period or None) predicted for the two families a = 1/(2m), 1/(2m-1)."""
    if family == "even":
        return "periodic", int(4 * (ell + m))
    if ell.denominator == 1:
        return "expanding", None
    return "periodic", None


CLASSIFY_HEADER = ["a_num", "a_den", "h0_num", "h0_den", "alpha0", "kind", "period", "steps_checked"]


def _squares_classify(p: _Params, n_steps: int, seed: int, out: _Output) -> None:
    rows = []
    matches = 0
    total = 0
    for family in ("even", "odd"):
        for m in range(1, p.int("m_max") + 1):
            a = Fraction(1, 2 * m) if family == "even" else Fraction(1, 2 * m - 1)
            cfg = SquareConfig(a)
            for twice_ell in range(2, 2 * p.int("l_max") + 1):
                ell = Fraction(twice_ell, 2)
                h0 = ell * a
                res = classify_orbit(cfg, h0, a, 0, n_steps, geometric_fallback=True)
                rows.append((a.numerator, a.denominator, h0.numerator, h0.denominator, 0,
                             res.kind, res.period, res.steps_checked))
                kind, period = expected_class(m, family, ell)
                total += 1
                if res.kind == kind and (period is None or res.period == period):
                    matches += 1
    s = out.bundle.summary
    s["cases"] = total
    s["matching_classification"] = matches
    out.csv("classify", CLASSIFY_HEADER, rows)
    per = [(r[2] / r[3] / (r[0] / r[1]), r[6]) for r in rows if r[5] == "periodic"]
    xs = [u for u, _ in per]
    out.svg("periods", plotting.orbit_scatter, [("periodic cases", xs, [v for _, v in per])],
            equal=False, title="map-step period vs h0/a")


def random_crossval_case(rng: np.random.Generator, q_max: int, n_entries: int) -> tuple:
    """Random exact case (a, h0, a0, alpha0) that stays in the recurrence regime.

    |h| changes by less than a per entry, so |h0| > (n_entries + 1) a keeps
    every entry of the run above a.
    """
    q = int(rng.integers(2, q_max + 1))
    pnum = int(rng.integers(1, q // 2 + 1))
    a = Fraction(pnum, q)
    a0 = a * Fraction(int(rng.integers(1, q + 1)), q)
    h0 = (n_entries + 1) * a + a * Fraction(int(rng.integers(0, 100)), 100)
    if rng.integers(0, 2):
        h0 = -h0
    return a, h0, a0, int(rng.integers(0, 2))


def _squares_crossval(p: _Params, n_steps: int, seed: int, out: _Output) -> None:
    rng = np.random.default_rng(seed)
    n_entries = p.int("n_entries")
    rows = []
    first_bad = None
    for i in range(p.int("n_cases")):
        a, h0, a0, alpha0 = random_crossval_case(rng, p.int("q_max"), n_entries)
        res = cross_validate(SquareConfig(a), h0, n_entries, alpha0, a0, max_steps=n_steps)
        rows.append((a.numerator, a.denominator, h0.numerator, h0.denominator, a0, alpha0,
                     res.matched, res.entries_checked))
        if not res.matched and first_bad is None:
            first_bad = (i, res.first_mismatch)
    s = out.bundle.summary
    s["cases"] = len(rows)
    s["all_matched"] = all(r[6] for r in rows)
    if first_bad is not None:
        s["first_mismatch"] = first_bad
    out.csv("crossval", ["a_num", "a_den", "h0_num", "h0_den", "a0", "alpha0", "matched", "entries_checked"], rows)
    out.svg("cases", plotting.orbit_scatter,
            [("cases", [r[0] / r[1] for r in rows], [r[2] / r[3] for r in rows])],
            equal=False, title="cross-validated (a, h0)")


def _squares_escape(p: _Params, n_steps: int, seed: int, out: _Output) -> None:
    cfg = SquareConfig(p.rational("a"))
    h0 = p.rational("h0")
    entries = entry_series(cfg, h0, n_steps)
    dist = entry_ordinate_by_step(cfg, h0, n_steps)
    slope, r2 = estimate_growth_exponent(dist)
    s = out.bundle.summary
    s["entries"] = len(entries)
    s["growth_exponent"] = slope
    s["r_squared"] = r2
    out.csv("entries", ["entry", "step", "h", "a_rem", "alpha"],
            ((i, e.step, e.h, e.a_rem, e.alpha) for i, e in enumerate(entries)))
    out.svg("entries", plotting.line_plot,
            [("|h_n|", [max(e.step, 1) for e in entries], [max(abs(float(e.h)), 1e-12) for e in entries])],
            xlabel="step", ylabel="|h|", logx=True, logy=True,
            title=f"growth exponent {slope:.3f}")


def _fig5_walk(p: _Params, n_steps: int, seed: int, out: _Output) -> None:
    cfg = SquareConfig(p.float("a"))
    dist, pos = random_walk_run(cfg, n_steps, seed=seed, with_positions=True)
    s = out.bundle.summary
    s["final_distance"] = float(dist[-1])
    s["max_distance"] = float(dist.max())
    if n_steps >= 1000:
        slope, r2 = estimate_growth_exponent(dist)
        s["growth_exponent"] = slope
        s["r_squared"] = r2
    stride = p.int("csv_stride")
    idx = np.arange(0, n_steps, stride)
    out.csv("walk", ["step", "x", "y", "distance"],
            zip((idx + 1).tolist(), pos[idx, 0].tolist(), pos[idx, 1].tolist(), dist[idx].tolist()))
    sl = plotting.thin(n_steps)
    out.svg("points", plotting.orbit_scatter, [("trajectory", pos[sl, 0], pos[sl, 1])],
            title=f"a={p.float('a'):g}")
    out.svg("distance", plotting.line_plot, [("|T^n|", np.arange(1, n_steps + 1)[sl], dist[sl])],
            xlabel="n", ylabel="distance")


REGISTRY = {e.name: e for e in [
    Experiment("fig4-kam", "Bounded orbits of T^(3.8,3.8): invariant ovals and an island chain",
               {"h1": Fraction(19, 5), "h2": Fraction(19, 5),
                "z0": [(Fraction(0), Fraction(2419, 1000)), (Fraction(0), Fraction(3))]},
               100_000, _fig4_kam),
    Experiment("fig3-oval", "Half-step and full-step points on both sides of a Cartesian oval",
               {"panel": "left"}, 10_000, _fig3_oval),
    Experiment("fig2-hyperbolic", "Orbits of the balanced product h1 = -h2 drifting to infinity",
               {"h1": Fraction(2), "h2": Fraction(-2), "z0": [(Fraction(1, 2), Fraction(1, 10))]},
               2_000, _fig2_hyperbolic),
    Experiment("thm4-escape", "Escaping orbit of R_(-1,0),h R_(1,0),-h with monotone axis crossings",
               {"h": Fraction(2), "y_mid": Fraction(1), "R_escape": Fraction(1000), "csv_stride": 100},
               10_000_000, _thm4_escape),
    Experiment("thm2-orders", "Log-log orders of the angle and radius residuals near infinity",
               {"h1": Fraction(1), "h2": Fraction(1), "frame": (Fraction(1), Fraction(0)),
                "r_min": Fraction(1, 10000), "r_max": Fraction(1, 100), "n_r": 20, "n_phi": 8},
               1, _thm2_orders),
    Experiment("lemma2-intersection", "Random products against large circles: image meets the curve",
               {"n_products": 20, "r_min": Fraction(10), "r_max": Fraction(50)}, 1, _lemma2_intersection),
    Experiment("concordance-check", "Partials of the change between two inverse-polar frames",
               {"frame_a": (Fraction(0), Fraction(0)), "frame_b": (Fraction(1), Fraction(0)),
                "r_min": Fraction(1, 10000), "r_max": Fraction(1, 10), "n_r": 12},
               1, _concordance_check),
    Experiment("squares-classify", "Periodic/expanding table for a = 1/(2m), 1/(2m-1), h0 = l a",
               {"m_max": 5, "l_max": 5}, 100_000, _squares_classify),
    Experiment("squares-crossval", "Geometric stepper against the strip recurrences on random cases",
               {"n_cases": 200, "n_entries": 50, "q_max": 40}, 10_000_000, _squares_crossval),
    Experiment("squares-escape", "Entry-ordinate growth of the escaping family a = 1/3",
               {"a": Fraction(1, 3), "h0": Fraction(1, 3)}, 1_000_000, _squares_escape),
    Experiment("fig5-walk", "Floating-point squares orbit from a seeded random start",
               {"a": Fraction(243, 100), "csv_stride": 100}, 1_000_000, _fig5_walk),
]}


def list_experiments() -> list:
    """(name, description, parameter names) for every registered experiment."""
    return [(e.name, e.description, sorted(e.defaults)) for e in REGISTRY.values()]


def resolve_prefix(cfg: ExperimentConfig) -> Path:
    """Output prefix; relative prefixes live under $OUTPUT_DIR (default: cwd)."""
    prefix = Path(cfg.output_prefix or f"results/{cfg.experiment}/{cfg.experiment}")
    if prefix.is_absolute():
        return prefix
    return Path(os.environ.get("OUTPUT_DIR", ".")) / prefix


def run(cfg: ExperimentConfig) -> ResultBundle:
    exp = REGISTRY.get(cfg.experiment)
    if exp is None:
        raise ConfigError(f"unknown experiment {cfg.experiment!r}; see 'list'")
    params = {k: parse_value(v) for k, v in cfg.parameters.items()}
    unknown = set(params) - set(exp.defaults)
    if exp.name == "fig3-oval":
        unknown -= {"h1", "h2", "z0", "f1", "f2", "orientation", "c"}
    if unknown:
        raise ConfigError(f"unknown parameters for {exp.name}: {sorted(unknown)}")
    merged = dict(exp.defaults)
    merged.update(params)
    n_steps = exp.default_steps if cfg.n_steps is None else cfg.n_steps
    if n_steps < 1:
        raise ConfigError("n_steps must be at least 1")
    bundle = ResultBundle()
    exp.func(_Params(merged), n_steps, cfg.seed, _Output(resolve_prefix(cfg), bundle))
    bundle.summary["experiment"] = exp.name
    bundle.summary["n_steps"] = n_steps
    bundle.summary["seed"] = cfg.seed
    for path in bundle.csv_paths + bundle.svg_paths:
        if os.path.getsize(path) == 0:
            raise RuntimeError(f"empty output file {path}")
    return bundle
