"""Closed-form scores across the (k, D) grid, next to the published values.

Prints e_max, the erasure-decoding (FGUM) score, the Prange score and the
reference entries they are meant to reproduce.
"""

from __future__ import annotations

from xorsat_lab import theory

print(f"{'k':>2} {'D':>2} {'e_max':>8} {'fgum':>8} {'ref':>7} {'prange':>8} {'ref':>8}")
for k, D in theory.REFERENCE_GRID:
    ref = theory.REFERENCE_TABLE[(k, D)]
    print(f"{k:>2} {D:>2} {theory.e_max(k, D):8.5f} {theory.fgum_score(k, D):8.5f} {ref['fgum']:7.4f} "
          f"{theory.prange_score(k, D):8.5f} {ref['prange']:8.5f}")
