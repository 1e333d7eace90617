"""Classical and ordered bounds on the bundled twelve-event dataset.

Run with ``python docs/examples/ordered_bounds_table.py``.
"""

from pairbounds import ordered_bp, ordered_chebyshev, ordered_sss, ruger, sss, boros_prekopa, chebyshev
from pairbounds.formats import load_dataset

p = load_dataset("n12")["p"]
methods = [chebyshev, ordered_chebyshev, sss, ordered_sss, boros_prekopa, ordered_bp, ruger]

print("k   " + " ".join(f"{m.__name__:>18}" for m in methods))
for k in range(2, len(p) + 1):
    row = [float(m(p, k).value) for m in methods]
    print(f"{k:<3} " + " ".join(f"{v:18.6f}" for v in row))
