"""Depth-p QAOA on the (D, k)-biregular hypertree.

A computational-basis path for one qubit through ket and bra is a vector
``a`` in {+1, -1}^(2p+1), ordered (z_1, ..., z_p, z_0, z_-p, ..., z_-1): the
ket-side values after each phase layer, the value where the observable is
measured, then the bra side in reverse.  The expectation of the root
constraint is a sum over one path per qubit of

  * a per-qubit weight f(a): 1/2 times the mixer matrix elements between
    consecutive entries (ket elements, conjugated bra elements), and
  * a per-constraint phase K(c) = exp(-i sum_j Gamma_j c_j) with c the
    entrywise product of its qubits' paths, Gamma = (g_1..g_p, 0, -g_p..-g_1).

On the tree, identical subtrees collapse: with F the weight of a subtree
hanging below a qubit,

    G = K * F^{*(k-1)}        (one child constraint and its k-1 subtrees)
    F' = f . G^{D-1}          (all D-1 child constraints of a qubit)

where * is convolution over the group {+1,-1}^(2p+1) under entrywise
product, done with fast Walsh-Hadamard transforms.  Starting from F = f at
the leaves and applying p steps gives the subtrees of the root's qubits.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .rng import stream

MAX_TREE_P = 12
MAX_LIGHTCONE_QUBITS = 26


@dataclass(frozen=True)
class QaoaParams:
    gammas: tuple[float, ...]
    betas: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.gammas) != len(self.betas):
            raise ValueError("gammas and betas must have equal length")
        if len(self.gammas) < 1:
            raise ValueError("depth p must be >= 1")
        if not all(math.isfinite(x) for x in (*self.gammas, *self.betas)):
            raise ValueError("angles must be finite")

    @property
    def p(self) -> int:
        return len(self.gammas)

    @classmethod
    def from_vector(cls, x) -> QaoaParams:
        x = np.asarray(x, dtype=np.float64)
        p = x.size // 2
        return cls(tuple(float(v) for v in x[:p]), tuple(float(v) for v in x[p:]))

    def vector(self) -> np.ndarray:
        return np.array([*self.gammas, *self.betas], dtype=np.float64)

    def to_dict(self) -> dict:
        return {"p": self.p, "gammas": list(self.gammas), "betas": list(self.betas)}


@dataclass(frozen=True)
class TreeEvalResult:
    k: int
    D: int
    p: int
    satisfied_fraction: float
    params: QaoaParams
    optimizer_evals: int
    wall_time: float = 0.0
    history: list = field(default_factory=list, compare=False)

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "D": self.D,
            "p": self.p,
            "satisfied_fraction": self.satisfied_fraction,
            "params": self.params.to_dict(),
            "optimizer_evals": self.optimizer_evals,
            "wall_time": self.wall_time,
        }


# ---------------------------------------------------------------------------
# collapsed tree evaluation


def _wht(x: np.ndarray) -> np.ndarray:
    """Unnormalized Walsh-Hadamard transform along a length-2^L axis."""
    y = np.array(x, dtype=np.complex128, copy=True)
    n = y.size
    h = 1
    while h < n:
        v = y.reshape(-1, 2, h)
        a = v[:, 0, :].copy()
        v[:, 0, :] += v[:, 1, :]
        v[:, 1, :] = a - v[:, 1, :]
        h *= 2
    return y


def _path_signs(p: int) -> np.ndarray:
    """(2^(2p+1), 2p+1) array of +-1: bit j of the index set means entry j is -1."""
    L = 2 * p + 1
    idx = np.arange(1 << L, dtype=np.int64)
    bits = (idx[:, None] >> np.arange(L)) & 1
    return (1 - 2 * bits).astype(np.int8)


def _gamma_vector(params: QaoaParams) -> np.ndarray:
    g = np.asarray(params.gammas)
    return np.concatenate([g, [0.0], -g[::-1]])


def _phase_table(params: QaoaParams, signs: np.ndarray) -> np.ndarray:
    return np.exp(-1j * (signs @ _gamma_vector(params)))


def _mixer_weight(params: QaoaParams, signs: np.ndarray) -> np.ndarray:
    p = params.p
    w = np.full(signs.shape[0], 0.5, dtype=np.complex128)
    for ell in range(1, p + 1):
        b = params.betas[ell - 1]
        c, s = math.cos(b), math.sin(b)
        # ket: <z_{l+1}| e^{-i b X} |z_l>, positions l-1 and l (z_{p+1} is z_0)
        same = signs[:, ell - 1] == signs[:, ell]
        w *= np.where(same, c, -1j * s)
        # bra: <z_{-l}| e^{+i b X} |z_{-(l+1)}>, positions 2p+1-l and 2p-l
        same = signs[:, 2 * p + 1 - ell] == signs[:, 2 * p - ell]
        w *= np.where(same, c, 1j * s)
    return w


def tree_energy(k: int, D: int, params: QaoaParams, max_p: int = MAX_TREE_P, return_imag: bool = False):
    """Satisfied fraction (1 + <Z...Z>_root) / 2 of depth-p QAOA on the infinite tree."""
    if k < 2 or D < 2:
        raise ValueError("need k >= 2 and D >= 2")
    p = params.p
    if p > max_p:
        raise ValueError(f"p={p} exceeds the configured budget max_p={max_p}")
    signs = _path_signs(p)
    K_hat = _wht(_phase_table(params, signs))
    f = _mixer_weight(params, signs)
    N = f.size
    F = f
    for _ in range(p):
        Fh = _wht(F)
        G = _wht(K_hat * Fh ** (k - 1)) / N
        F = f * G ** (D - 1)
    Fz = signs[:, p] * F
    terms = K_hat * _wht(Fz) ** k
    zexp = np.sum(terms) / N
    # the exact value is real; the residue is rounding amplified by the nested
    # powers (about 1e-10 at p = 6, confirmed against extended precision), so
    # the guard only catches gross errors such as a wrong sign convention
    scale = float(np.sum(np.abs(terms))) / N
    if abs(zexp.imag) > 1e-8 * max(1.0, scale):
        raise FloatingPointError(f"non-negligible imaginary residue {zexp.imag:.3e}")
    val = (1.0 + zexp.real) / 2.0
    return (val, zexp.imag) if return_imag else val


# ---------------------------------------------------------------------------
# explicit light cone oracle


@dataclass(frozen=True)
class LightConeGraph:
    n_qubits: int
    constraints: tuple[tuple[int, ...], ...]
    root: int = 0
    depth: dict = field(default_factory=dict, compare=False)

    def relabeled(self, perm: np.ndarray) -> LightConeGraph:
        perm = np.asarray(perm)
        cons = tuple(tuple(int(perm[q]) for q in c) for c in self.constraints)
        return LightConeGraph(self.n_qubits, cons, self.root, {int(perm[q]): d for q, d in self.depth.items()})


def lightcone_size(k: int, D: int, p: int, merge_leaves: bool = False) -> int:
    """Qubit count of the depth-p light cone of one constraint."""
    total, layer = k, k
    for step in range(p):
        per = 1 if (merge_leaves and step == p - 1) else k - 1
        layer = layer * (D - 1) * per
        total += layer
    return total


def build_lightcone(k: int, D: int, p: int, merge_leaves: bool = False) -> LightConeGraph:
    """The root constraint plus, for every qubit within p-1 constraint hops of
    it, its other D-1 constraints with fresh qubits.

    With ``merge_leaves`` each outermost constraint gets a single fresh qubit
    instead of k-1.  This is exact for the root observable: those qubits are
    never touched again, and the product of k-1 independent |+> qubits' Z
    values has the same law as one |+> qubit's.
    """
    cons = [tuple(range(k))]
    depth = {q: 0 for q in range(k)}
    frontier = list(range(k))
    nq = k
    for step in range(p):
        per = 1 if (merge_leaves and step == p - 1) else k - 1
        nxt = []
        for q in frontier:
            for _ in range(D - 1):
                new = list(range(nq, nq + per))
                nq += per
                cons.append((q, *new))
                for w in new:
                    depth[w] = step + 1
                nxt.extend(new)
        frontier = nxt
    return LightConeGraph(nq, tuple(cons), 0, depth)


def _apply_mixer(psi: np.ndarray, n: int, beta: float) -> None:
    c, s = math.cos(beta), -1j * math.sin(beta)
    for q in range(n):
        v = psi.reshape(-1, 2, 1 << q)
        a0 = v[:, 0, :].copy()
        v[:, 0, :] *= c
        v[:, 0, :] += s * v[:, 1, :]
        v[:, 1, :] *= c
        v[:, 1, :] += s * a0


def _parity_signs(idx: np.ndarray, qubits) -> np.ndarray:
    par = np.zeros(idx.shape, dtype=np.int64)
    for q in qubits:
        par ^= (idx >> q) & 1
    return 1 - 2 * par


def statevector_energy(graph: LightConeGraph, params: QaoaParams, max_qubits: int = MAX_LIGHTCONE_QUBITS) -> float:
    """Exact root-constraint satisfaction probability on an explicit graph."""
    n = graph.n_qubits
    if n > max_qubits:
        raise ValueError(f"light cone has {n} qubits, above the limit of {max_qubits}")
    idx = np.arange(1 << n, dtype=np.int64)
    cost = np.zeros(1 << n, dtype=np.float64)
    for c in graph.constraints:
        cost += _parity_signs(idx, c)
    psi = np.full(1 << n, 2.0 ** (-n / 2), dtype=np.complex128)
    for g, b in zip(params.gammas, params.betas):
        psi *= np.exp(-1j * g * cost)
        _apply_mixer(psi, n, b)
    zz = _parity_signs(idx, graph.constraints[graph.root])
    zexp = float(np.sum(np.abs(psi) ** 2 * zz))
    return (1.0 + zexp) / 2.0


def lightcone_statevector_energy(k: int, D: int, params: QaoaParams, max_qubits: int = MAX_LIGHTCONE_QUBITS,
                                 merge_leaves: bool | None = None) -> float:
    """Brute-force QAOA energy on the explicit depth-p light cone.

    ``merge_leaves=None`` uses the full cone when it fits in ``max_qubits``
    and the exact leaf-merged cone otherwise.
    """
    p = params.p
    if merge_leaves is None:
        merge_leaves = lightcone_size(k, D, p) > max_qubits
    return statevector_energy(build_lightcone(k, D, p, merge_leaves), params, max_qubits)


# ---------------------------------------------------------------------------
# optimization


def interpolate_params(params: QaoaParams) -> QaoaParams:
    """Depth p+1 starting point by linear interpolation of the depth-p schedule."""
    p = params.p

    def grow(x):
        x = np.asarray(x)
        out = np.zeros(p + 1)
        for i in range(p + 1):
            left = x[i - 1] if i >= 1 else 0.0
            right = x[i] if i < p else 0.0
            out[i] = i / p * left + (p - i) / p * right
        return out

    return QaoaParams(tuple(grow(params.gammas)), tuple(grow(params.betas)))


def _local_search(obj, x0: np.ndarray, tol: float):
    # quasi-Newton on finite-difference gradients does most of the work; a
    # short simplex polish guards against a gradient stall on flat ridges
    res = minimize(obj, x0, method="L-BFGS-B", options=dict(ftol=1e-15, gtol=tol, maxiter=1000))
    res2 = minimize(obj, res.x, method="Nelder-Mead",
                    options=dict(xatol=tol, fatol=1e-13, maxiter=40 * x0.size, adaptive=True))
    best = res2 if res2.fun <= res.fun else res
    return best.x, best.fun, res.nfev + res2.nfev


def optimize(k: int, D: int, p: int, restarts: int = 20, seed: int = 0, tol: float = 1e-8,
             warm: QaoaParams | None = None, max_p: int = MAX_TREE_P) -> TreeEvalResult:
    """Maximize tree_energy over the 2p angles.

    Depths 1..p are optimized in turn.  Each depth starts from the
    interpolated previous optimum and from the previous optimum padded with a
    zero layer (which reproduces the previous value exactly, so the result is
    nondecreasing in p), plus ``restarts`` random starts at p = 1 and a few
    perturbed starts at higher depth.
    """
    if p < 1 or p > max_p:
        raise ValueError(f"p must lie in [1, {max_p}]")
    t0 = time.perf_counter()
    rng = np.random.Generator(stream(seed, 501, k, D))
    evals = 0

    def make_obj(depth):
        def obj(x):
            nonlocal evals
            evals += 1
            return -tree_energy(k, D, QaoaParams.from_vector(x), max_p=max_p)
        return obj

    best: QaoaParams | None = None
    best_val = -np.inf
    history = []
    start_depth = 1
    if warm is not None:
        best, best_val, start_depth = warm, tree_energy(k, D, warm, max_p=max_p), warm.p + 1
        history.append((warm.p, float(best_val)))
    for depth in range(start_depth, p + 1):
        obj = make_obj(depth)
        starts = []
        if best is None:
            for _ in range(max(restarts, 1)):
                starts.append(np.concatenate([rng.uniform(0, math.pi / 2, depth), rng.uniform(0, math.pi / 2, depth)]))
        else:
            starts.append(interpolate_params(best).vector())
            padded = np.concatenate([best.gammas, [0.0], best.betas, [0.0]])
            starts.append(padded)
            for _ in range(max(1, restarts // 5)):
                starts.append(starts[0] + rng.normal(0.0, 0.05, 2 * depth))
        depth_best, depth_val = None, -np.inf
        for x0 in starts:
            x, fun, _ = _local_search(obj, np.asarray(x0, dtype=np.float64), tol)
            if -fun > depth_val:
                depth_best, depth_val = x, -fun
        if best is not None and depth_val < best_val:
            # cannot happen in exact arithmetic (the padded start is feasible);
            # keep the padded previous optimum to stay monotone
            depth_best, depth_val = np.concatenate([best.gammas, [0.0], best.betas, [0.0]]), best_val
        best, best_val = QaoaParams.from_vector(depth_best), depth_val
        history.append((depth, float(best_val)))
    return TreeEvalResult(k, D, p, float(best_val), best, evals, time.perf_counter() - t0, history)
