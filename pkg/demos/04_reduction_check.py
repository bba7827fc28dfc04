"""Dense simulation of the quantum reduction on a 4-bit code.

A perfect decoder reproduces the target distribution.  Interpolating toward
the identity raises the decoding error eps; for that structured family the
postselection removes exactly the failed branches, so the score stays at the
ideal value while the guaranteed bound loosens as 2 sqrt(eps).  Random
decoders with garbage qubits show the generic case.
"""

from __future__ import annotations

import numpy as np

from xorsat_lab.regev import (
    interpolated_decoder,
    random_code,
    random_decoder,
    random_unique_decodable_bias,
    verify_distance_bounds,
    verify_error_bound,
)

rng = np.random.default_rng(0)
code = random_code(4, 2, rng)
P = random_unique_decodable_bias(code, rng)
print(f"code: m={code.m}, |C|={code.C.size}, |C_perp|={code.C_perp.size}")
print(f"{'theta':>6} {'eps':>8} {'score':>8} {'bound':>8} {'trace':>8} {'sqrt eps':>8}")
for theta in (1.0, 0.9, 0.8, 0.7, 0.5):
    dec = interpolated_decoder(code, P, theta)
    eb = verify_error_bound(code, P, dec)
    db = verify_distance_bounds(code, P, dec)
    print(f"{theta:6.2f} {eb.eps:8.4f} {eb.lhs:8.4f} {eb.rhs:8.4f} "
          f"{db.details['trace_distance']:8.4f} {db.details['sqrt_eps']:8.4f}")

print("random decoders (one garbage qubit):")
for i in range(4):
    dec = random_decoder(code, P, rng, g=1)
    eb = verify_error_bound(code, P, dec)
    db = verify_distance_bounds(code, P, dec)
    print(f"{'rand':>6} {eb.eps:8.4f} {eb.lhs:8.4f} {eb.rhs:8.4f} "
          f"{db.details['trace_distance']:8.4f} {db.details['sqrt_eps']:8.4f}")
