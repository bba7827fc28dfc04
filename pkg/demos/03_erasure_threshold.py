"""Block-erasure recovery probability versus erasure rate around e_max.

The success curve drops from 1 to 0 near the predicted threshold; the
transition sharpens as the block length b grows.
"""

from __future__ import annotations

import numpy as np

from xorsat_lab import fgum, theory

k, D = 3, 6
e = theory.e_max(k, D)
rates = list(np.linspace(e - 0.06, e + 0.06, 9))
for b in (200, 1000):
    curve = fgum.threshold_scan(k, D, b, rates, trials=20, seed=0)
    print(f"b={b}: crossing {curve.crossing:.4f} (e_max {e:.4f})")
    for r, p in zip(curve.erasure_rates, curve.success_probs):
        print(f"   rate {r:.3f}  success {p:.2f}  " + "#" * int(round(30 * p)))
