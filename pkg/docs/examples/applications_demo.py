"""Correlation gap, Boole ratio and the bottleneck approximation.

Run with ``python docs/examples/applications_demo.py``.
"""

import math

from pairbounds import FeasibleSet, bottleneck_approx, correlation_gap, ratio_boole_over_tight, ratio_scan

# Boole over tight never exceeds 4/3, and two fair coins attain it.
print("ratio [1/2, 1/2]:", ratio_boole_over_tight(["1/2", "1/2"]))
scan = ratio_scan(5, 2000, seed=7, workers=2)
print("random scan max:", round(scan.max_ratio, 6), "at", [round(v, 3) for v in scan.argmax_p])

# Correlation gap for many small events approaches e/(e-1).
for n in (10, 100, 1000):
    p = [1 / n] * n
    print(f"n={n:<5} arbitrary {correlation_gap(p, 'arbitrary'):.5f}  pairwise {correlation_gap(p, 'pairwise'):.5f}")
print("e/(e-1) =", round(math.e / (math.e - 1), 5))

# Pick the s-t path minimising the tight union bound of edge failures.
paths = FeasibleSet.st_paths([(0, 1), (1, 2), (0, 2)], 0, 2)
res = bottleneck_approx(paths, [0.3, 0.2, 0.4])
print("chosen path edges:", res.chosen, "f_hat", round(res.f_hat, 4), "opt", round(res.opt, 4), "ratio", round(res.ratio, 4))
