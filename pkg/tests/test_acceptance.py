"""Acceptance criteria, one test each.  Tolerances and runtime limits are fixed."""

import math
import time
from fractions import Fraction as F

import numpy as np

from skewrot.asymptotics import (
    AnnulusGrid,
    ClosedCurve,
    check_area_preservation,
    check_concordance,
    check_intersection_property,
    fit_order,
    log_spaced,
    sample_residuals,
)
from skewrot.core_maps import InversePolarFrame, SkewRotation, apply_skew_rotation, two_center_product
from skewrot.experiments import ExperimentConfig, fig3_trace, random_crossval_case, random_product, run, REGISTRY
from skewrot.orbit_analysis import (
    detect_escape,
    estimate_growth_exponent,
    iterate_orbit,
    oval_side_sequence,
    scan_level,
    escape_start,
)
from skewrot.squares import (
    GeometricState,
    SquareConfig,
    classify_geometric,
    classify_orbit,
    cross_validate,
    entry_ordinate_by_step,
    entry_series,
    geometric_step,
)


def test_c01_elementary_map_exactness(record):
    t0 = time.perf_counter()
    rng = np.random.default_rng(101)
    worst = 0.0
    for _ in range(1000):
        z = complex(*rng.uniform(-100, 100, 2))
        c = complex(*rng.uniform(-5, 5, 2))
        rho = abs(z - c)
        for h in (0.0, 2 * math.pi * rho):
            w = apply_skew_rotation(SkewRotation(c, h), z).z
            worst = max(worst, abs(w - z) / abs(z))
    dt = time.perf_counter() - t0
    record(1, worst <= 1e-12 and dt < 1.0, f"max relative error {worst:.2e} (limit 1e-12), {dt:.2f}s")


def test_c02_symplecticity(record):
    t0 = time.perf_counter()
    grid = AnnulusGrid(2.0, 20.0, 20, 50)
    errs = {h: check_area_preservation(two_center_product(*h), grid)
            for h in [(3.8, 3.8), (2.5, -3.0), (2.0, -2.0)]}
    dt = time.perf_counter() - t0
    worst = max(errs.values())
    record(2, len(grid.points()) == 1000 and worst < 1e-5 and dt < 5.0,
           f"max |det J - 1| = {worst:.2e} (limit 1e-5), {dt:.2f}s")


def test_c03_perturbed_skew_rotation_orders(record):
    t0 = time.perf_counter()
    rs = log_spaced(1e-4, 1e-2, 20)
    phis = (np.arange(8) + 0.5) * (np.pi / 4)
    rr, pp = np.meshgrid(rs, phis, indexing="ij")
    samples = sample_residuals(two_center_product(1.0, 1.0), InversePolarFrame((1, 0)),
                               rr.ravel().tolist(), pp.ravel().tolist())
    angle = fit_order(samples, "angle").slope
    radius = fit_order(samples, "radius").slope
    dt = time.perf_counter() - t0
    record(3, angle >= 1.9 and radius >= 2.9 and dt < 5.0,
           f"angle order {angle:.4f} (>= 1.9), radius order {radius:.4f} (>= 2.9), {dt:.2f}s")


def test_c04_concordance(record):
    t0 = time.perf_counter()
    rep = check_concordance(InversePolarFrame((0, 0)), InversePolarFrame((1, 0)), log_spaced(1e-4, 1e-1, 12))
    order = rep.dr_dphi_order.slope
    dt = time.perf_counter() - t0
    record(4, order >= 1.9 and dt < 5.0, f"order of dr~/dphi {order:.4f} (>= 1.9), {dt:.2f}s")


def test_c05_intersection_property(record):
    t0 = time.perf_counter()
    rng = np.random.default_rng(505)
    results = []
    sums = []
    for i in range(20):
        prod = random_product(rng, balanced=bool(i % 2))
        sums.append(prod.angular_sum)
        results.append(check_intersection_property(prod, ClosedCurve.circle(float(rng.uniform(10, 50)))))
    dt = time.perf_counter() - t0
    mixed = any(abs(s) < 1e-12 for s in sums) and any(abs(s) > 1e-3 for s in sums)
    record(5, all(results) and mixed and dt < 10.0,
           f"{sum(results)}/20 intersect (balanced and unbalanced mixed: {mixed}), {dt:.2f}s")


def boundedness_sweep(n=10, seed=2024):
    """Seeded sweep of (h1, h2, z0) with sum h != 0 and |z0| in [2, 10]."""
    rng = np.random.default_rng(seed)
    cases = []
    for _ in range(n):
        h1, h2 = rng.uniform(0.5, 4.0, 2) * rng.choice([1, -1], 2)
        if abs(h1 + h2) < 0.5:
            h2 = -h2
        r = rng.uniform(2, 10)
        th = rng.uniform(0, 2 * np.pi)
        cases.append((float(h1), float(h2), complex(r * np.exp(1j * th))))
    return cases


def test_c06_boundedness(record):
    t0 = time.perf_counter()
    cases = [(3.8, 3.8, 2.419j)] + boundedness_sweep()
    worst = 0.0
    for h1, h2, z0 in cases:
        rho = np.abs(iterate_orbit(two_center_product(h1, h2), z0, 10 ** 6).full_steps)
        worst = max(worst, rho.max() / rho[:10 ** 5].max() - 1.0)
    dt = time.perf_counter() - t0
    record(6, len(cases) == 11 and worst < 0.01 and dt < 60.0,
           f"max growth of rho_max from 1e5 to 1e6 steps {worst:.2e} (limit 1e-2), {dt:.1f}s")


def test_c07_escape(record):
    t0 = time.perf_counter()
    prod = two_center_product(2.0, -2.0)
    trace = iterate_orbit(prod, escape_start(2.0, 1.0), 10 ** 7, record_half_steps=True, stop_radius=1e3)
    rep = detect_escape(trace, R_escape=1e3)
    dt = time.perf_counter() - t0
    record(7, rep.escaped and rep.monotone_fraction == 1.0 and dt < 120.0,
           f"|z| > 1e3 at step {rep.first_exit_step}, {len(rep.axis_crossings)} crossings, "
           f"monotone_fraction {rep.monotone_fraction}, {dt:.1f}s")


def test_c08_oval_alternation(record):
    t0 = time.perf_counter()
    parts = []
    ok = True
    for panel in ("left", "right"):
        trace, H = fig3_trace(panel, 10 ** 4)
        c = scan_level(trace, H, "alternation")
        sides = oval_side_sequence(trace, H, c)
        ok &= sides.alternation_fraction >= 0.99
        parts.append(f"{panel}: alternation {sides.alternation_fraction:.4f} "
                     f"(path crossing {sides.crossing_fraction:.4f})")
    dt = time.perf_counter() - t0
    record(8, ok and dt < 5.0, "; ".join(parts) + f" (limit 0.99), {dt:.2f}s")


def test_c09_squares_periodicity(record):
    t0 = time.perf_counter()
    ok = True
    seen = []
    for m in (1, 2, 3):
        a = F(1, 2 * m)
        cfg = SquareConfig(a)
        for ell in (F(1), F(3, 2), F(2)):
            h0 = ell * a
            expected = 4 * (ell + m)
            s0 = GeometricState((F(-1, 2), h0), 2)
            s = s0
            for _ in range(int(expected)):
                s = geometric_step(cfg, s)
            res = classify_orbit(cfg, h0, a, 0, 10 ** 5, geometric_fallback=True)
            ok &= s == s0 and res.kind == "periodic" and res.period == expected
            seen.append(f"m={m},l={ell}:{res.period}/{res.entry_period}")
    dt = time.perf_counter() - t0
    record(9, ok and dt < 5.0, "period steps/entries " + " ".join(seen) + f", {dt:.2f}s")


def test_c10_squares_expansion(record):
    t0 = time.perf_counter()
    ok = True
    for m in (1, 2, 3):
        a = F(1, 2 * m - 1)
        hs = [e.h for e in entry_series(SquareConfig(a), a, 10 ** 6, max_entries=202)]
        ok &= len(hs) == 202 and all(hs[2 * n + 2] - hs[2 * n] == 2 * a for n in range(100))
    dt = time.perf_counter() - t0
    record(10, ok and dt < 5.0, f"h_(2n+2) - h_(2n) = 2a exactly for n < 100, m = 1..3, {dt:.2f}s")


def test_c11_squares_half_integer_periodicity(record):
    t0 = time.perf_counter()
    ok = True
    seen = []
    for m in (1, 2, 3):
        a = F(1, 2 * m - 1)
        for ell in (F(1, 2), F(3, 2)):
            res = classify_orbit(SquareConfig(a), ell * a, a, 0, 10 ** 5, geometric_fallback=True)
            geo = classify_geometric(SquareConfig(a), ell * a, a, 0, 10 ** 5)
            ok &= res.kind == "periodic" and geo.kind == "periodic"
            seen.append(f"m={m},l={ell}: {res.period} steps/{res.entry_period} entries "
                        f"(4l+2m-1={4 * ell + 2 * m - 1})")
    dt = time.perf_counter() - t0
    record(11, ok and dt < 5.0, "; ".join(seen) + f", {dt:.2f}s")


def test_c12_oracle_equivalence(record):
    t0 = time.perf_counter()
    rng = np.random.default_rng(1212)
    bad = []
    for i in range(1000):
        a, h0, a0, alpha0 = random_crossval_case(rng, 40, 50)
        res = cross_validate(SquareConfig(a), h0, 50, alpha0, a0)
        if not res or res.entries_checked != 50:
            bad.append((i, a, h0, res.first_mismatch))
    dt = time.perf_counter() - t0
    record(12, not bad and dt < 60.0, f"{1000 - len(bad)}/1000 cases agree over 50 entries, {dt:.1f}s"
           + (f", first mismatch {bad[0]}" if bad else ""))


def test_c13_escaping_family_growth(record):
    t0 = time.perf_counter()
    dist = entry_ordinate_by_step(SquareConfig(F(1, 3)), F(1, 3), 10 ** 6)
    slope, r2 = estimate_growth_exponent(dist)
    dt = time.perf_counter() - t0
    record(13, abs(slope - 0.5) <= 0.1 and dt < 60.0,
           f"exponent {slope:.4f} (0.5 +- 0.1), r^2 {r2:.4f}, {dt:.1f}s")


# configs for the determinism check; heavy defaults are trimmed, nothing else changes
DETERMINISM = {
    "fig4-kam": {"n_steps": 20000},
    "fig5-walk": {"n_steps": 100000},
    "squares-crossval": {"parameters": {"n_cases": 50}},
}


def test_c14_determinism(record, tmp_path):
    diffs = []
    for name in sorted(REGISTRY):
        extra = DETERMINISM.get(name, {})
        outs = []
        for rep in ("a", "b"):
            cfg = ExperimentConfig(name, dict(extra.get("parameters", {})), extra.get("n_steps"), 7,
                                   str(tmp_path / rep / name))
            outs.append(run(cfg).csv_paths)
        for pa, pb in zip(*outs):
            if open(pa, "rb").read() != open(pb, "rb").read():
                diffs.append(pa)
    record(14, not diffs, f"{len(REGISTRY)} experiments rerun, differing CSVs: {diffs or 'none'}")
