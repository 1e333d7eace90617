"""LP bounds with general (non-independent) bivariate probabilities, plus duals.

Run with ``python docs/examples/general_bivariates_lp.py``.
"""

import numpy as np

from pairbounds import BivariateSpec, check_dual_feasible, solve_exact

p = [0.35, 0.19, 0.13, 0.2]
biv = BivariateSpec.general(4, [(0, 1, 0.001), (0, 2, 0.022), (0, 3, 0.03), (1, 2, 0.017), (1, 3, 0.018), (2, 3, 0.019)])

for sense in ("max", "min"):
    out = solve_exact(p, biv, k=1, sense=sense)
    print(f"{sense} P(at least one) = {out.value:.6f}  status={out.status}")

    # The dual multipliers certify the optimum: the dual objective equals
    # the primal value and every scenario constraint holds.
    dual = out.dual
    print("  dual objective ", round(dual.objective(p, biv), 9))
    print("  dual feasible  ", check_dual_feasible(dual, 1, sense=sense).feasible)
    print("  lambda_i       ", np.round(dual.lambda_i, 4))
