"""Prange, Turbo Prange and simulated annealing on one sampled instance.

Turbo Prange should land near the erasure-decoding prediction and Prange near
(1 + k/D) / 2; annealing does better than both at small k.
"""

from __future__ import annotations

import sys

from xorsat_lab import ensemble, solvers, theory

k, D = (int(x) for x in sys.argv[1:3]) if len(sys.argv) > 2 else (3, 6)
inst = ensemble.sample_instance(k, D, b=2520 // k, seed=1)
print(f"instance: k={k} D={D} n={inst.n} m={inst.m}")
print(f"prange        {solvers.prange(inst, 0).score:.4f}   predicted {theory.prange_score(k, D):.4f}")
print(f"turbo prange  {solvers.turbo_prange(inst, 0).score:.4f}   predicted {theory.turbo_prange_score(k, D):.4f}")
sa = solvers.simulated_annealing(inst, solvers.SAConfig(sweeps=5000, seeds=2))
print(f"annealing     {sa.score:.4f}   (5000 sweeps, best of 2)")
