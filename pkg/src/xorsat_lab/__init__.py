"""Max-k-XORSAT on regular Gallager instances.

Modules: ``gf2`` (packed GF(2) linear algebra), ``ensemble`` (instance
sampling and cycle audits), ``theory`` (closed-form predictions),
``solvers`` (Prange, Turbo Prange, simulated annealing), ``fgum`` (block
erasure recovery), ``bp`` (belief propagation and density evolution),
``qaoa`` (tree-level QAOA), ``regev`` (dense reduction checks), ``harness``
and ``cli``.
"""

__version__ = "0.1.0"
