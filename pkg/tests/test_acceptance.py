"""One test per acceptance criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v``; the lines are echoed as
they happen and again in an "acceptance criteria" summary section.
"""

import math
import time
from fractions import Fraction

import numpy as np

from pairbounds import (
    UPPER_METHODS,
    BivariateSpec,
    FeasibleSet,
    almost_identical_tight,
    bottleneck_approx,
    build_almost_identical_extremal,
    build_complement_scaled,
    build_identical_extremal,
    build_intersection_extremal,
    build_scaled_bivariate,
    build_union_extremal,
    correlation_gap,
    identical_tight,
    intersection_tight_lower,
    ordered_bp,
    ordered_sss,
    ratio_boole_over_tight,
    ratio_scan,
    solve_aggregated_twise,
    solve_exact,
    sss,
    boros_prekopa,
    union_tight,
    verify_distribution,
)
from pairbounds.formats import load_dataset
from pairbounds.tables import diff_table

SEED = 20240611
GAP_TARGET = 1.5819


def _describe(cells, limit=4):
    parts = [f"{c.row}{'[p=' + c.key + ']' if c.key else ''} k={c.k} {c.computed:.7f} vs {c.printed}" for c in cells[:limit]]
    more = f" (+{len(cells) - limit} more)" if len(cells) > limit else ""
    return "; ".join(parts) + more


def test_criterion_01_table_n12(criterion):
    start = time.time()
    diff = diff_table("n12", tolerance=5e-5, with_lp=True)
    elapsed = time.time() - start
    tight = [c for c in diff.cells if c.row == "tight" and c.k >= 5]
    printed = [c.printed for c in tight]
    bad = diff.mismatched_cells
    ok = not bad and not diff.mismatched_marks and elapsed < 120
    msg = (
        f"n=12 table, {len(diff.cells) - len(bad)}/{len(diff.cells)} cells within 5e-5, "
        f"tight row k=5..12 printed {printed} max |diff| {max(c.error for c in tight):.1e}, "
        f"marks {'match' if not diff.mismatched_marks else 'differ'}, {elapsed:.1f}s"
    )
    if bad:
        msg += f"; outside tolerance: {_describe(bad)}"
    criterion(1, ok, msg)


def test_criterion_02_table_n11(criterion):
    diff = diff_table("n11", tolerance=5e-6)
    bad = diff.mismatched_cells
    ok = not bad and not diff.mismatched_marks
    msg = (
        f"n=11 table, {len(diff.cells) - len(bad)}/{len(diff.cells)} cells within 5e-6, "
        f"underline rows {len(diff.marks) - len(diff.mismatched_marks)}/{len(diff.marks)} match, "
        f"max |diff| {max(c.error for c in diff.cells):.1e}"
    )
    if bad:
        msg += f"; outside tolerance: {_describe(bad)}"
    criterion(2, ok, msg)


def test_criterion_03_union_exactness(criterion):
    rng = np.random.default_rng(SEED + 3)
    start = time.time()
    worst = 0.0
    count = 0
    for n in range(2, 11):
        for _ in range(200):
            p = rng.random(n)
            lp = solve_exact(p, BivariateSpec.pairwise_independent(p), 1, "max")
            worst = max(worst, abs(lp.value - union_tight(p).value))
            count += 1
    elapsed = time.time() - start
    ok = worst <= 1e-6 and elapsed < 300
    criterion(3, ok, f"union_tight vs LP max, {count} instances n=2..10, max |diff| {worst:.1e} (tol 1e-6), {elapsed:.1f}s")


def test_criterion_04_intersection_exactness(criterion):
    rng = np.random.default_rng(SEED + 4)
    start = time.time()
    worst = 0.0
    worst_dual = 0.0
    count = 0
    for n in range(2, 11):
        for _ in range(200):
            p = rng.random(n)
            lp = solve_exact(p, None, n, "min")
            worst = max(worst, abs(lp.value - intersection_tight_lower(p).value))
            comp = [1 - v for v in sorted(p, reverse=True)]
            worst_dual = max(worst_dual, abs(union_tight(p).value - (1 - intersection_tight_lower(comp).value)))
            count += 1
    elapsed = time.time() - start
    ok = worst <= 1e-6 and worst_dual <= 1e-12 and elapsed < 300
    criterion(
        4,
        ok,
        f"intersection_tight_lower vs LP min, {count} instances, max |diff| {worst:.1e} (tol 1e-6); "
        f"complement duality max |diff| {worst_dual:.1e} (tol 1e-12), {elapsed:.1f}s",
    )


def _frac(rng, lo, hi, den=1000):
    """Random rational in [lo, hi] on a grid of ``den`` steps."""
    return lo + (hi - lo) * Fraction(int(rng.integers(0, den + 1)), den)


def _identical_instance(rng, case):
    while True:
        n = int(rng.integers(3, 16))
        p = _frac(rng, Fraction(1, 100), Fraction(99, 100))
        a = (n - 1) * p
        ks = {
            "a": [k for k in range(1, n + 1) if k < a],
            "b": [k for k in range(1, n + 1) if a <= k < 1 + a],
            "c": [k for k in range(1, n + 1) if k >= 1 + a],
        }[case]
        if ks:
            return n, int(rng.choice(ks)), p


def _almost_instance(rng, case):
    while True:
        n = int(rng.integers(4 if case == "b" else 3, 9))
        p = Fraction(1, n - 1) * _frac(rng, Fraction(1, 20), 1)
        if case == "a":
            q = _frac(rng, (n - 2) * p, Fraction(999, 1000))
            if not 0 < q < 1:
                continue
            k = int(rng.integers(3, n + 1))
        elif case == "b":
            q = _frac(rng, p, (n - 2) * p * Fraction(999, 1000))
            lo = math.ceil(2 + (n - 2) * p / q)
            if lo > n:
                continue
            k = int(rng.integers(lo, n + 1))
        else:
            q = p * _frac(rng, Fraction(1, 100), Fraction(99, 100))
            k = n
        return n, k, p, q


def _check(dist, p, biv, k, target, stats, label):
    """Exact check, then the same construction in floats at 1e-9."""
    rep = verify_distribution(dist, p, biv, k)
    exact_ok = rep.passed and (target is None or rep.objective_mass == target)
    stats.setdefault(label, [0, 0, 0.0])
    stats[label][0] += 1
    stats[label][1] += int(exact_ok)
    return exact_ok


def test_criterion_05_extremal_certification(criterion):
    rng = np.random.default_rng(SEED + 5)
    stats: dict = {}
    float_err = 0.0

    def float_check(builder, args, p, biv, k, target, label):
        nonlocal float_err
        dist = builder(*args)
        rep = verify_distribution(dist, p, biv, k, tol=1e-9)
        err = max(rep.total_mass_error, rep.max_univariate_error, rep.max_bivariate_error)
        if target is not None:
            err = max(err, abs(float(rep.objective_mass) - float(target)))
        float_err = max(float_err, err)
        if not rep.passed or err > 1e-9 or rep.min_mass < -1e-12:
            stats[label][2] += 1

    for _ in range(100):
        n = int(rng.integers(2, 9))
        p = [_frac(rng, 0, 1) for _ in range(n)]
        pf = [float(v) for v in p]
        _check(build_union_extremal(p), p, None, 1, union_tight(p).value, stats, "union")
        float_check(build_union_extremal, (pf,), pf, None, 1, union_tight(pf).value, "union")
        _check(build_intersection_extremal(p), p, None, n, intersection_tight_lower(p).value, stats, "intersection")
        float_check(build_intersection_extremal, (pf,), pf, None, n, intersection_tight_lower(pf).value, "intersection")

        scale = _frac(rng, max(p), 1) or Fraction(1)
        if scale > 0:
            biv = BivariateSpec.scaled(p, scale)
            _check(build_scaled_bivariate(p, scale), p, biv, 1, None, stats, "scaled")
            float_check(build_scaled_bivariate, (pf, float(scale)), pf, BivariateSpec.scaled(pf, float(scale)), 1, None, "scaled")

        q = [_frac(rng, Fraction(1, 1000), Fraction(999, 1000)) for _ in range(n)]
        qf = [float(v) for v in q]
        s = _frac(rng, 0, min(q))
        _check(build_complement_scaled(q, s), q, BivariateSpec.complement_scaled(q, s), 1, None, stats, "complement-scaled")
        float_check(
            build_complement_scaled, (qf, float(s)), qf, BivariateSpec.complement_scaled(qf, float(s)), 1, None, "complement-scaled"
        )

    for case in "abc":
        for _ in range(100):
            n, k, p = _identical_instance(rng, case)
            label = f"identical-{case}"
            assert identical_tight(n, k, p).detail["case"] == case
            _check(build_identical_extremal(n, k, p), [p] * n, None, k, identical_tight(n, k, p).value, stats, label)
            float_check(build_identical_extremal, (n, k, float(p)), [float(p)] * n, None, k, identical_tight(n, k, float(p)).value, label)
    for case in "abc":
        for _ in range(100):
            n, k, p, q = _almost_instance(rng, case)
            label = f"almost-identical-{case}"
            rep = almost_identical_tight(n, k, p, q)
            assert rep.detail["case"] == case
            marg = [p] * (n - 1) + [q]
            _check(build_almost_identical_extremal(n, k, p, q), marg, None, k, rep.value, stats, label)
            pf, qf = float(p), float(q)
            float_check(
                build_almost_identical_extremal, (n, k, pf, qf), [pf] * (n - 1) + [qf], None, k,
                almost_identical_tight(n, k, pf, qf).value, label,
            )

    ok = all(total == good and bad == 0 for total, good, bad in stats.values())
    summary = ", ".join(f"{label} {good}/{total}" for label, (total, good, _) in stats.items())
    criterion(5, ok, f"exact certificates {summary}; float max error {float_err:.1e} (tol 1e-9)")


def test_criterion_06_dominance(criterion):
    rng = np.random.default_rng(SEED + 6)
    tol = 1e-12
    failures = []
    for inst in range(500):
        n = int(rng.integers(1, 16))
        hi = [1.0, 0.5, 0.2, 0.05][inst % 4]
        p = rng.random(n) * hi
        values = {name: [float(fn(p, k).value) for k in range(1, n + 1)] for name, fn in UPPER_METHODS.items()}
        for name, vals in values.items():
            if any(v < -tol or v > 1 + tol for v in vals):
                failures.append((inst, name, "range"))
            if any(b > a + tol for a, b in zip(vals, vals[1:])):
                failures.append((inst, name, "monotone"))
        for i in range(n):
            v = {name: vals[i] for name, vals in values.items()}
            checks = [
                v["ordered_sss"] <= v["sss"] + tol,
                v["ordered_bp"] <= v["bp"] + tol,
                v["ordered_chebyshev"] <= v["chebyshev"] + tol,
                v["ordered_bp"] <= min(v["ordered_sss"], v["ordered_chebyshev"]) + tol,
                v["tightened_sss"] <= v["ordered_sss"] + tol,
                v["tightened_bp"] <= v["ordered_bp"] + tol,
                v["tightened_chebyshev"] <= v["ordered_chebyshev"] + tol,
            ]
            if not all(checks):
                failures.append((inst, i + 1, checks))
    criterion(6, not failures, f"500 random vectors n<=15 at every k, {len(failures)} dominance/range/monotonicity violations")


def test_criterion_07_boole_ratio(criterion):
    maxima = {n: ratio_scan(n, 10_000, seed=SEED + n, workers=4).max_ratio for n in (2, 5, 10)}
    at_pair = float(ratio_boole_over_tight([0.5, 0.5]))
    at_triple = float(ratio_boole_over_tight([0.25, 0.25, 0.5]))
    ok = all(m <= 4 / 3 + 1e-12 for m in maxima.values())
    ok = ok and abs(at_pair - 4 / 3) <= 1e-12 and abs(at_triple - 4 / 3) <= 1e-12
    scans = ", ".join(f"n={n} max {m:.6f}" for n, m in maxima.items())
    criterion(7, ok, f"Boole/tight ratio scans ({scans}) <= 4/3; ratio at (0.5,0.5) {at_pair!r}, at (0.25,0.25,0.5) {at_triple!r}")


def _prop_grid():
    grid = {"a": [], "b": [], "c": []}
    for n in range(4, 11):
        for pf in (0.5, 1.0):
            p = pf / (n - 1)
            for q in sorted({(n - 2) * p, 0.9}):
                for k in range(3, n + 1):
                    grid["a"].append((n, k, p, q))
    for n in range(5, 11):
        for pf in (0.5, 0.8):
            p = pf / (n - 1)
            for q in (p, 1.5 * p, 0.5 * (n - 1) * p):
                if not p <= q < (n - 2) * p:
                    continue
                lo = math.ceil(2 + (n - 2) * p / q - 1e-9)
                for k in range(lo, n + 1):
                    grid["b"].append((n, k, p, q))
    for n in range(3, 11):
        for pf in (0.5, 1.0):
            p = pf / (n - 1)
            for qf in (0.3, 0.8):
                grid["c"].append((n, n, p, qf * p))
    return grid


def test_criterion_08_almost_identical(criterion):
    worst = 0.0
    strict = {}
    counts = {}
    for case, points in _prop_grid().items():
        counts[case] = len(points)
        strict[case] = {"sss": False, "bp": False}
        for n, k, p, q in points:
            marg = [p] * (n - 1) + [q]
            rep = almost_identical_tight(n, k, p, q)
            assert rep.detail["case"] == case, (n, k, p, q, rep.detail)
            tight = solve_exact(marg, None, k, "max").value
            vals = [ordered_sss(marg, k).value, ordered_bp(marg, k).value, rep.value]
            worst = max(worst, max(abs(v - tight) for v in vals))
            strict[case]["sss"] |= sss(marg, k).value > tight + 1e-6
            strict[case]["bp"] |= boros_prekopa(marg, k).value > tight + 1e-6
    ok = worst <= 1e-6 and all(all(s.values()) for s in strict.values())
    detail = ", ".join(
        f"case {c}: {counts[c]} points, unordered strictly larger somewhere "
        f"(sss {strict[c]['sss']}, bp {strict[c]['bp']})"
        for c in "abc"
    )
    criterion(8, ok, f"ordered_sss = ordered_bp = closed form = LP max within {worst:.1e} (tol 1e-6); {detail}")


def test_criterion_09_aggregated_lp(criterion):
    worst = 0.0
    count = 0
    for n in range(3, 9):
        for k in range(1, n + 1):
            for p in (0.1, 0.3, 0.5, 0.9):
                for sense in ("max", "min"):
                    agg = solve_aggregated_twise(n, k, p, 2, sense).value
                    full = solve_exact([p] * n, None, k, sense).value
                    worst = max(worst, abs(agg - full))
                    count += 1
    full_order = max(abs(solve_aggregated_twise(n, n, 0.5, n, "max").value - 0.5**n) for n in range(3, 9))
    ok = worst <= 1e-7 and full_order <= 1e-9
    criterion(
        9,
        ok,
        f"aggregated t=2 vs full LP, {count} solves, max |diff| {worst:.1e} (tol 1e-7); "
        f"t=n, k=n, p=0.5 vs p^n max |diff| {full_order:.1e} (tol 1e-9)",
    )


def test_criterion_10_general_bivariates(criterion, example_p, example_biv):
    general = solve_exact(example_p, example_biv, 1, "max").value
    pairwise = solve_exact(example_p, BivariateSpec.pairwise_independent(example_p), 1, "max").value
    ok = abs(general - 0.784) <= 1e-6 and abs(pairwise - 0.688) <= 1e-6
    criterion(10, ok, f"general bivariates max {general:.9f} (0.784), pairwise independent max {pairwise:.9f} (0.688), tol 1e-6")


def test_criterion_11_bottleneck(criterion):
    rng = np.random.default_rng(SEED + 11)
    ratios = []
    for _ in range(200):
        n = int(rng.integers(1, 11))
        size = int(rng.integers(1, 51))
        sols = {tuple(int(b) for b in rng.integers(0, 2, n)) for _ in range(size)}
        X = FeasibleSet.of(sols)
        ratios.append(bottleneck_approx(X, rng.random(n)).ratio)
    lo, hi = min(ratios), max(ratios)
    clause1 = lo >= 1 - 1e-12 and hi <= 4 / 3 + 1e-12
    arb = float(correlation_gap([0.5, 0.5], "arbitrary"))
    pw = float(correlation_gap([0.5, 0.5], "pairwise"))
    clause2 = abs(arb - 4 / 3) <= 1e-12 and abs(pw - 1) <= 1e-12
    n = 100
    gap_arb = float(correlation_gap([1 / n] * n, "arbitrary"))
    gap_pw = float(correlation_gap([1 / n] * n, "pairwise"))
    clause3 = abs(gap_arb - GAP_TARGET) <= 0.01 and abs(gap_pw - GAP_TARGET) <= 0.01
    msg = (
        f"200 bottleneck ratios in [{lo:.6f}, {hi:.6f}] ({'ok' if clause1 else 'bad'}); "
        f"gaps at (0.5,0.5): arbitrary {arb!r}, pairwise {pw!r} ({'ok' if clause2 else 'bad'}); "
        f"n=100, p=1/n: arbitrary {gap_arb:.5f} (|diff| {abs(gap_arb - GAP_TARGET):.4f}), "
        f"pairwise {gap_pw:.5f} (|diff| {abs(gap_pw - GAP_TARGET):.4f}) vs 1.5819 +- 0.01 "
        f"({'ok' if clause3 else 'bad'})"
    )
    criterion(11, clause1 and clause2 and clause3, msg)


def test_dataset_is_the_published_instance():
    p = load_dataset("n12")["p"]
    assert p[6:] == [0.4952, 0.6075, 0.6842, 0.8084, 0.9489, 0.9656]
