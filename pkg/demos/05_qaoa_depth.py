"""Tree-level QAOA satisfied fraction as depth grows, for (k, D) = (3, 6).

Each depth is warm-started from the previous optimum, so the values are
nondecreasing.  Compare with Turbo Prange at the same (k, D).
"""

from __future__ import annotations

from xorsat_lab import qaoa, theory

res = qaoa.optimize(3, 6, 5, restarts=5, seed=0)
for p, val in res.history:
    print(f"p={p}: {val:.5f}")
print(f"turbo prange prediction: {theory.turbo_prange_score(3, 6):.5f}")
