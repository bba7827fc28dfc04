"""Dense simulation of Regev's reduction over F_2 on tiny codes.

Registers: ``first`` (m qubits, holds a dual codeword), ``second`` (m qubits,
holds the corrupted word), ``output`` (m qubits, the decoder's answer) and an
optional ``garbage`` register of g qubits.  States are arrays of shape
(2^m, 2^m, 2^(m+g)) indexed [first, second, output*2^g + garbage].  A bit
string x in F_2^m is the integer whose bit i is x_i.

Decoders are unitaries on (second, output, garbage) that leave the second
register's computational basis value unchanged, i.e. a block-diagonal family
``V[y]`` acting on (output, garbage) for each received word y.  This covers
the coherent lookup decoders and the imperfect variants used for testing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .gf2 import GF2Matrix, GF2Vector, rank

NORM_TOL = 1e-12
UNITARY_TOL = 1e-10


def _popcount_parity(x: np.ndarray) -> np.ndarray:
    return (np.bitwise_count(np.asarray(x, dtype=np.uint64)) & np.uint64(1)).astype(np.int64)


def _sign_table(m: int) -> np.ndarray:
    """S[a, b] = (-1)^(a . b) over F_2^m."""
    idx = np.arange(1 << m, dtype=np.uint64)
    return 1 - 2 * _popcount_parity(idx[:, None] & idx[None, :])


def hadamard(vec: np.ndarray, axis: int = 0) -> np.ndarray:
    """Normalized Hadamard transform of one register (self-inverse)."""
    vec = np.asarray(vec, dtype=np.complex128)
    size = vec.shape[axis]
    m = size.bit_length() - 1
    out = np.moveaxis(vec, axis, -1).copy()
    shape = out.shape
    h = 1
    while h < size:
        v = out.reshape(-1, size // (2 * h), 2, h)
        a = v[:, :, 0, :].copy()
        v[:, :, 0, :] += v[:, :, 1, :]
        v[:, :, 1, :] = a - v[:, :, 1, :]
        h *= 2
    out = out.reshape(shape) / math.sqrt(2.0**m)
    return np.moveaxis(out, -1, axis)


def _weights(m: int) -> np.ndarray:
    return np.bitwise_count(np.arange(1 << m, dtype=np.uint64)).astype(np.int64)


# ---------------------------------------------------------------------------
# codes and bias functions


@dataclass(frozen=True)
class CodePair:
    """C = column space of B and its dual, as integer sets over F_2^m."""

    B: GF2Matrix
    C: np.ndarray
    C_perp: np.ndarray

    @property
    def m(self) -> int:
        return self.B.rows

    def in_C(self) -> np.ndarray:
        mask = np.zeros(1 << self.m, dtype=bool)
        mask[self.C] = True
        return mask


def code_pair(B: GF2Matrix) -> CodePair:
    m, n = B.rows, B.cols
    if m > 6:
        raise ValueError("dense simulation is limited to m <= 6")
    if rank(B) != n:
        raise ValueError("B must have full column rank")
    dense = B.to_dense().astype(np.int64)
    col_words = np.array([sum(int(dense[i, j]) << i for i in range(m)) for j in range(n)], dtype=np.uint64)
    xs = np.arange(1 << n, dtype=np.uint64)
    C = np.zeros(1 << n, dtype=np.uint64)
    for j in range(n):
        C ^= np.where((xs >> np.uint64(j)) & np.uint64(1), col_words[j], np.uint64(0))
    words = np.arange(1 << m, dtype=np.uint64)
    orth = np.ones(1 << m, dtype=bool)
    for j in range(n):
        orth &= _popcount_parity(words & col_words[j]) == 0
    return CodePair(B, np.sort(C.astype(np.int64)), np.flatnonzero(orth))


@dataclass(frozen=True)
class BiasFunction:
    """Amplitudes P over F_2^m, normalized in l2."""

    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=np.complex128)
        if v.ndim != 1 or v.size & (v.size - 1):
            raise ValueError("P must be a vector of length 2^m")
        if abs(np.sum(np.abs(v) ** 2) - 1.0) > NORM_TOL:
            raise ValueError("P must satisfy sum |P|^2 = 1")
        object.__setattr__(self, "values", v)

    @property
    def m(self) -> int:
        return self.values.size.bit_length() - 1

    @property
    def hadamard(self) -> np.ndarray:
        return hadamard(self.values)

    @classmethod
    def from_hadamard(cls, tilde: np.ndarray) -> BiasFunction:
        return cls(hadamard(np.asarray(tilde, dtype=np.complex128)))

    def expectation(self, H_diag: np.ndarray) -> float:
        """<S|H|S> for diagonal H."""
        return float(np.sum(np.abs(self.values) ** 2 * H_diag))


def p_alpha(m: int, alpha: float) -> BiasFunction:
    """Product amplitudes sqrt(1-alpha)^(1-y_j) sqrt(alpha)^(y_j)."""
    w = _weights(m)
    return BiasFunction(np.sqrt((1.0 - alpha) ** (m - w) * alpha**w).astype(np.complex128))


def coset_leaders(code: CodePair) -> np.ndarray:
    """One minimum-weight representative of each coset of the dual code."""
    m = code.m
    w = _weights(m)
    seen = np.zeros(1 << m, dtype=bool)
    leaders = []
    for x in np.argsort(w, kind="stable"):
        if not seen[x]:
            leaders.append(int(x))
            seen[np.bitwise_xor(code.C_perp, x)] = True
    return np.array(leaders, dtype=np.int64)


def random_unique_decodable_bias(code: CodePair, rng: np.random.Generator, support: int | None = None) -> BiasFunction:
    """P whose Hadamard transform lives on coset leaders, so lookup decoding is perfect."""
    leaders = coset_leaders(code)
    if support is not None:
        leaders = leaders[:support]
    tilde = np.zeros(1 << code.m, dtype=np.complex128)
    amp = rng.normal(size=leaders.size) + 1j * rng.normal(size=leaders.size)
    tilde[leaders] = amp / np.linalg.norm(amp)
    return BiasFunction.from_hadamard(tilde)


# ---------------------------------------------------------------------------
# decoders


@dataclass(frozen=True)
class DecoderSpec:
    """Block-diagonal decoder: ``blocks[y]`` acts on (output, garbage) when
    the second register holds y."""

    m: int
    g: int
    blocks: np.ndarray
    name: str = "custom"
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        if self.m > 6 or self.g > 4:
            raise ValueError("need m <= 6 and g <= 4")
        A = 1 << (self.m + self.g)
        if self.blocks.shape != (1 << self.m, A, A):
            raise ValueError(f"blocks must have shape {(1 << self.m, A, A)}")
        eye = np.eye(A)
        for y, V in enumerate(self.blocks):
            if np.max(np.abs(V.conj().T @ V - eye)) > UNITARY_TOL:
                raise ValueError(f"decoder block {y} is not unitary")

    def apply(self, state: np.ndarray, inverse: bool = False) -> np.ndarray:
        """Apply to a (first, second, output*garbage) tensor."""
        V = np.conj(np.swapaxes(self.blocks, 1, 2)) if inverse else self.blocks
        return np.einsum("yij,fyj->fyi", V, state)

    def apply_to(self, vec: np.ndarray) -> np.ndarray:
        """Apply to a (second, output*garbage) tensor."""
        return self.apply(vec[None], False)[0]


def lookup_table(code: CodePair, P: BiasFunction) -> np.ndarray:
    """dec(y) = the dual codeword d maximizing |P~(y - d)| (lowest index on ties)."""
    tilde = np.abs(P.hadamard)
    Y = np.arange(1 << code.m)
    scores = tilde[np.bitwise_xor(Y[:, None], code.C_perp[None, :])]
    return code.C_perp[np.argmax(scores, axis=1)]


def _xor_perm(m: int, g: int, shift: int) -> np.ndarray:
    """Permutation matrix |o, s> -> |o xor shift, s> on (output, garbage)."""
    A = 1 << (m + g)
    a = np.arange(A)
    out = np.zeros((A, A))
    out[((a >> g) ^ shift) << g | (a & ((1 << g) - 1)), a] = 1.0
    return out


def interpolated_decoder(code: CodePair, P: BiasFunction, theta: float, g: int = 0,
                         garbage_unitaries: np.ndarray | None = None, name: str | None = None) -> DecoderSpec:
    """Fractional power of the coherent lookup decoder.

    The lookup unitary is an involution W, so W^theta = P+ + e^{i pi theta} P-
    with P+- = (I +- W)/2; theta=1 is the lookup decoder, theta=0 the identity.
    ``garbage_unitaries[y]`` (optional) is then applied on (output, garbage).
    """
    m = code.m
    A = 1 << (m + g)
    dec = lookup_table(code, P)
    phase = np.exp(1j * math.pi * theta)
    eye = np.eye(A)
    blocks = np.empty((1 << m, A, A), dtype=np.complex128)
    for y in range(1 << m):
        W = _xor_perm(m, g, int(dec[y]))
        blocks[y] = (eye + W) / 2 + phase * (eye - W) / 2
        if garbage_unitaries is not None:
            blocks[y] = garbage_unitaries[y] @ blocks[y]
    label = name or ("perfect" if theta == 1 and garbage_unitaries is None else f"interpolated:{theta:g}")
    return DecoderSpec(m, g, blocks, label, dict(theta=theta))


def perfect_decoder(code: CodePair, P: BiasFunction) -> DecoderSpec:
    return interpolated_decoder(code, P, 1.0, name="perfect")


def zero_decoder(m: int, g: int = 0) -> DecoderSpec:
    """Leaves the output register at 0^m."""
    A = 1 << (m + g)
    return DecoderSpec(m, g, np.broadcast_to(np.eye(A, dtype=np.complex128), (1 << m, A, A)).copy(), "zero")


def _random_unitary(dim: int, rng: np.random.Generator, strength: float) -> np.ndarray:
    """exp(i * strength * H) for a random Hermitian H of unit spectral scale."""
    X = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    H = (X + X.conj().T) / (2 * math.sqrt(dim))
    w, U = np.linalg.eigh(H)
    return (U * np.exp(1j * strength * w)) @ U.conj().T


def random_decoder(code: CodePair, P: BiasFunction, rng: np.random.Generator, g: int = 1) -> DecoderSpec:
    """An imperfect decoder: partial lookup followed by a received-word-controlled
    random unitary on (output, garbage)."""
    theta = float(rng.uniform(0.5, 1.0))
    strength = float(rng.uniform(0.0, 1.5))
    A = 1 << (code.m + g)
    garb = np.stack([_random_unitary(A, rng, strength) for _ in range(1 << code.m)])
    dec = interpolated_decoder(code, P, theta, g, garb, name="random")
    return DecoderSpec(dec.m, dec.g, dec.blocks, "random", dict(theta=theta, strength=strength, g=g))


# ---------------------------------------------------------------------------
# the reduction


def _check_norm(state: np.ndarray, step: str, log: list) -> None:
    nrm = float(np.sum(np.abs(state) ** 2))
    log.append((step, nrm))
    if abs(nrm - 1.0) > NORM_TOL:
        raise AssertionError(f"norm {nrm!r} after {step}")


def _dot_sign(v: int, x: np.ndarray) -> np.ndarray:
    return 1 - 2 * _popcount_parity(np.uint64(v) & np.asarray(x, dtype=np.uint64))


@dataclass
class ReductionRun:
    algo_distribution: np.ndarray
    actual_distribution: np.ndarray
    postselect_prob: float
    phi_actual: np.ndarray
    norm_log: list
    n_dec: float


def run_reduction_full(code: CodePair, v: int, P: BiasFunction, dec: DecoderSpec) -> ReductionRun:
    """Run the nine reduction steps (numbered in the comments below) on the full register tensor."""
    m, g = code.m, dec.g
    M, A = 1 << m, 1 << (m + g)
    if P.m != m or dec.m != m:
        raise ValueError("size mismatch between code, bias function and decoder")
    idx = np.arange(M)
    tilde = P.hadamard
    log: list = []
    # step 1: uniform superposition on the dual code, P~ in the second register
    psi = np.zeros((M, M, A), dtype=np.complex128)
    psi[code.C_perp, :, 0] = tilde[None, :] / math.sqrt(code.C_perp.size)
    _check_norm(psi, "prepare", log)
    # step 2: Z^{-v} on the first register
    psi *= _dot_sign(v, idx)[:, None, None]
    _check_norm(psi, "phase", log)
    # step 3: second += first
    psi = psi[idx[:, None], np.bitwise_xor(idx[:, None], idx[None, :]), :]
    _check_norm(psi, "add", log)
    # step 4: decode
    psi = dec.apply(psi)
    _check_norm(psi, "decode", log)
    # step 5: postselect output == first
    out_val = np.arange(A) >> g
    keep = idx[:, None] == out_val[None, :]
    psi = psi * keep[:, None, :]
    p_succ = float(np.sum(np.abs(psi) ** 2))
    if p_succ <= 0:
        raise ZeroDivisionError("postselection never succeeds")
    psi /= math.sqrt(p_succ)
    n_dec = 1.0 / math.sqrt(code.C_perp.size * p_succ)
    _check_norm(psi, "postselect", log)
    # step 6: first -= output, which leaves first in |0>
    new = np.zeros_like(psi)
    for f in range(M):
        for a in range(A):
            col = psi[f, :, a]
            if np.any(col):
                new[f ^ (a >> g), :, a] += col
    if np.max(np.abs(new[1:])) > 1e-13:
        raise AssertionError("first register not cleared")
    phi = new[0]
    _check_norm(phi, "uncompute", log)
    # step 7: undo the decoder
    phi = dec.apply(phi[None], inverse=True)[0]
    _check_norm(phi, "undecode", log)
    # step 8: Z^v on the (former second) register
    phi = phi * _dot_sign(v, idx)[:, None]
    _check_norm(phi, "rephase", log)
    phi_actual = phi
    # step 9: inverse QFT (Hadamard) and measure
    out = hadamard(phi, axis=0)
    _check_norm(out, "transform", log)
    d_actual = np.sum(np.abs(out) ** 2, axis=1)
    return ReductionRun(_condition_on_code(d_actual, code), d_actual, p_succ, phi_actual, log, n_dec)


def _condition_on_code(d_actual: np.ndarray, code: CodePair) -> np.ndarray:
    mask = code.in_C()
    mass = float(d_actual[mask].sum())
    out = np.zeros_like(d_actual)
    if mass > 0:
        out[mask] = d_actual[mask] / mass
    return out


def run_reduction(B: GF2Matrix, v: GF2Vector, P: BiasFunction, dec: DecoderSpec) -> tuple[np.ndarray, float]:
    """(D_algo over F_2^m, postselection success probability)."""
    code = code_pair(B)
    run = run_reduction_full(code, _vec_to_int(v), P, dec)
    return run.algo_distribution, run.postselect_prob


def _vec_to_int(v: GF2Vector | int) -> int:
    if isinstance(v, (int, np.integer)):
        return int(v)
    return int(sum(int(b) << i for i, b in enumerate(v.to_bits())))


class ReductionAllShifts:
    """Step-8 states for every shift v at once.

    Steps 1-6 do not depend on v except through the phase (-1)^(v.d) carried
    by the dual-codeword branch d, and steps 7-8 are linear, so each branch is
    pushed through once and the shifts are recombined exactly.
    """

    def __init__(self, code: CodePair, P: BiasFunction, dec: DecoderSpec) -> None:
        m, g = code.m, dec.g
        M, A = 1 << m, 1 << (m + g)
        self.code, self.P, self.dec = code, P, dec
        tilde = P.hadamard
        idx = np.arange(M)
        branches = np.zeros((code.C_perp.size, M, A), dtype=np.complex128)
        for i, d in enumerate(code.C_perp):
            branches[i, np.bitwise_xor(idx, d), 0] = tilde
        branches = dec.apply(branches)
        out_val = np.arange(A) >> g
        for i, d in enumerate(code.C_perp):
            branches[i][:, out_val != d] = 0.0
        succ = np.sum(np.abs(branches) ** 2, axis=(1, 2))
        self.eps_per_codeword = 1.0 - succ
        self.postselect_prob = float(succ.mean())
        self.n_dec = 1.0 / math.sqrt(code.C_perp.size * self.postselect_prob)
        self.branches = dec.apply(branches, inverse=True)
        self.sign = _sign_table(m)

    def phi_actual(self, v: int) -> np.ndarray:
        s = self.sign[v, self.code.C_perp].astype(np.float64)
        phi = np.tensordot(s, self.branches, axes=1) * self.n_dec
        return phi * self.sign[v][:, None]

    def phi_target(self, v: int) -> np.ndarray | None:
        """Normalized ideal step-8 state on the second register (ancilla 0), or
        None when it vanishes."""
        tilde = self.P.hadamard
        idx = np.arange(self.sign.shape[0])
        t = np.zeros(idx.size, dtype=np.complex128)
        for d in self.code.C_perp:
            e = np.bitwise_xor(idx, d)
            t += self.sign[v][e] * tilde[e]
        nrm = np.linalg.norm(t)
        return None if nrm < 1e-14 else t / nrm

    def target_norm_inv_sq(self, v: int) -> float:
        """1 / N_target^2 for shift v."""
        tilde = self.P.hadamard
        idx = np.arange(self.sign.shape[0])
        t = np.zeros(idx.size, dtype=np.complex128)
        for d in self.code.C_perp:
            e = np.bitwise_xor(idx, d)
            t += self.sign[v][e] * tilde[e]
        return float(np.sum(np.abs(t) ** 2))

    def distributions(self, v: int) -> tuple[np.ndarray, np.ndarray]:
        out = hadamard(self.phi_actual(v), axis=0)
        d_actual = np.sum(np.abs(out) ** 2, axis=1)
        return d_actual, _condition_on_code(d_actual, self.code)

    def target_distribution(self, v: int) -> np.ndarray:
        """|P(c - v)|^2 normalized over c in C (zero vector if that mass vanishes)."""
        M = self.sign.shape[0]
        w = np.zeros(M)
        pv = np.abs(self.P.values) ** 2
        w[self.code.C] = pv[np.bitwise_xor(self.code.C, v)]
        s = w.sum()
        return w / s if s > 0 else w


def measure_epsilon(B: GF2Matrix | CodePair, P: BiasFunction, dec: DecoderSpec) -> tuple[float, np.ndarray]:
    """(mean failure probability over the dual code, per-codeword failure probabilities).

    For each dual codeword d the decoder is run on sum_e P~(e)|d+e>|0> and
    the failure probability is the weight not landing on |d> in the output.
    """
    code = B if isinstance(B, CodePair) else code_pair(B)
    m, g = code.m, dec.g
    M, A = 1 << m, 1 << (m + g)
    tilde = P.hadamard
    idx = np.arange(M)
    out_val = np.arange(A) >> g
    eps = np.empty(code.C_perp.size)
    for i, d in enumerate(code.C_perp):
        vec = np.zeros((M, A), dtype=np.complex128)
        vec[np.bitwise_xor(idx, d), 0] = tilde
        vec = dec.apply_to(vec)
        eps[i] = 1.0 - float(np.sum(np.abs(vec[:, out_val == d]) ** 2))
    return float(eps.mean()), eps


def objective_diag(m: int) -> np.ndarray:
    """Diagonal of 1 - |x|/m."""
    return 1.0 - _weights(m) / m


@dataclass
class BoundReport:
    eps: float
    lhs: float
    rhs: float
    slack: float
    holds: bool
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"eps": self.eps, "lhs": self.lhs, "rhs": self.rhs, "slack": self.slack, "holds": self.holds,
                **self.details}


def verify_error_bound(B: GF2Matrix | CodePair, P: BiasFunction, dec: DecoderSpec,
                       H_obj: np.ndarray | None = None, tol: float = 1e-12) -> BoundReport:
    """E_v tr[X^v H X^-v rho(v)] >= <S|H|S> - 2 sqrt(eps), summing over all v.

    Also reports the normalization-weighted score, which equals <S|H|S>
    exactly for an ideal (target) output.
    """
    code = B if isinstance(B, CodePair) else code_pair(B)
    m = code.m
    H = objective_diag(m) if H_obj is None else np.asarray(H_obj, dtype=np.float64)
    if H.shape != (1 << m,) or np.any(H < 0) or np.any(H > 1):
        raise ValueError("H_obj must be a diagonal in [0, 1] of length 2^m")
    eps, _ = measure_epsilon(code, P, dec)
    red = ReductionAllShifts(code, P, dec)
    idx = np.arange(1 << m)
    lhs = 0.0
    target_score = 0.0
    weighted_target = 0.0
    undefined = 0
    for v in range(1 << m):
        _, d_algo = red.distributions(v)
        if d_algo.sum() == 0:
            undefined += 1
        lhs += float(np.sum(d_algo * H[np.bitwise_xor(idx, v)]))
        d_t = red.target_distribution(v)
        s_t = float(np.sum(d_t * H[np.bitwise_xor(idx, v)]))
        target_score += s_t
        weighted_target += s_t * red.target_norm_inv_sq(v) / code.C_perp.size
    M = 1 << m
    lhs /= M
    s_h_s = P.expectation(H)
    rhs = s_h_s - 2.0 * math.sqrt(max(eps, 0.0))
    return BoundReport(
        eps=eps,
        lhs=lhs,
        rhs=rhs,
        slack=lhs - rhs,
        holds=lhs >= rhs - tol,
        details=dict(
            s_h_s=s_h_s,
            target_score=target_score / M,
            weighted_target_score=weighted_target / M,
            postselect_prob=red.postselect_prob,
            n_dec=red.n_dec,
            undefined_shifts=undefined,
        ),
    )


def verify_distance_bounds(B: GF2Matrix | CodePair, P: BiasFunction, dec: DecoderSpec,
                           tol: float = 1e-12) -> BoundReport:
    """E_v trace distance(actual, target) <= sqrt(eps) and
    E_v TV(D_algo, D_actual) <= eps^(1/4), by exact enumeration over v.

    Shifts where the ideal state vanishes count as distance 1 and shifts where
    the output misses C entirely count as TV distance 1.
    """
    code = B if isinstance(B, CodePair) else code_pair(B)
    m = code.m
    eps, _ = measure_epsilon(code, P, dec)
    red = ReductionAllShifts(code, P, dec)
    M = 1 << m
    trace_d, tv_algo, tv_target = 0.0, 0.0, 0.0
    per_v_ok = True
    overlap_sq = 0.0
    for v in range(M):
        phi_a = red.phi_actual(v)
        t = red.phi_target(v)
        if t is None:
            td = 1.0
        else:
            ov = abs(np.vdot(t, phi_a[:, 0])) ** 2
            overlap_sq += ov
            td = math.sqrt(max(0.0, 1.0 - ov))
        d_actual, d_algo = red.distributions(v)
        tv_a = 1.0 if d_algo.sum() == 0 else 0.5 * float(np.abs(d_algo - d_actual).sum())
        tv_t = 0.5 * float(np.abs(red.target_distribution(v) - d_actual).sum())
        per_v_ok &= tv_t <= td + 1e-10
        trace_d += td
        tv_algo += tv_a
        tv_target += tv_t
    trace_d /= M
    tv_algo /= M
    tv_target /= M
    b1, b2 = math.sqrt(max(eps, 0.0)), max(eps, 0.0) ** 0.25
    holds = trace_d <= b1 + tol and tv_algo <= b2 + tol and tv_target <= b1 + tol and per_v_ok
    return BoundReport(
        eps=eps,
        lhs=trace_d,
        rhs=b1,
        slack=b1 - trace_d,
        holds=holds,
        details=dict(
            trace_distance=trace_d,
            sqrt_eps=b1,
            tv_algo_actual=tv_algo,
            quartic_root_eps=b2,
            tv_actual_target=tv_target,
            tv_below_trace_every_v=per_v_ok,
            mean_overlap_sq=overlap_sq / M,
        ),
    )


def random_code(m: int, n: int, rng: np.random.Generator) -> CodePair:
    """A uniformly random full-column-rank B in F_2^{m x n}."""
    while True:
        dense = rng.integers(0, 2, size=(m, n))
        B = GF2Matrix.from_dense(dense)
        if rank(B) == n:
            return code_pair(B)
