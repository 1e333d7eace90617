"""Identical and almost-identical marginals: closed forms against the LP.

Run with ``python docs/examples/identical_cases.py``.
"""

from fractions import Fraction

from pairbounds import (
    CaseUnsupported,
    almost_identical_tight,
    build_identical_extremal,
    identical_tight,
    identical_tight_lower,
    solve_aggregated_twise,
)

# Exact arithmetic: pass Fractions (or strings like "1/2").
half = Fraction(1, 2)
print("n=3 k=3 p=1/2 upper:", identical_tight(3, 3, half).value)
print("level law:", build_identical_extremal(3, 3, half).levels)

# Float arithmetic for a larger instance, cross-checked by the
# aggregated LP that works on the number of successes only. Below the
# closed-form region the lower bound falls back to that LP.
n, prob = 11, 0.1
print(f"\n{'k':>2} {'upper':>10} {'lower':>10} {'agg LP':>10}")
for k in range(1, n + 1):
    up = identical_tight(n, k, prob).value
    lo = identical_tight_lower(n, k, prob, lp_fallback=True).value
    agg = solve_aggregated_twise(n, k, prob).value
    print(f"{k:>2} {float(up):10.6f} {float(lo):10.6f} {agg:10.6f}")

# One marginal q differs from the other n-1 marginals p.
print()
for n, k, p, q in [(4, 3, 0.2, 0.5), (4, 4, 0.25, 0.1)]:
    rep = almost_identical_tight(n, k, p, q)
    print(f"almost identical n={n} k={k} p={p} q={q}: {rep.value:.6f} (case {rep.detail['case']})")

# Not every (n, k, p, q) has a closed form; those raise CaseUnsupported.
try:
    almost_identical_tight(4, 2, 0.2, 0.01)
except CaseUnsupported as exc:
    print("unsupported:", exc)
