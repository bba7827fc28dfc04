"""Experiment orchestration: configs, result records, budgets and comparison-table rows.

Every verb of the command-line program is a function here taking an
:class:`ExperimentConfig` and returning ``(rows, records)``: ``rows`` is the
verb's primary output (CSV rows or a JSON document) and ``records`` are
:class:`ResultRecord` log entries carrying the full config needed to rerun
them.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import __version__, bp, ensemble, fgum, qaoa, regev, solvers, theory
from .gf2 import GF2Vector
from .rng import RawStream, stream

FORMATS = ("csv", "json-lines")
PROVENANCE = ("theory", "montecarlo", "exact")
THREADS_ENV = "XORSAT_LAB_THREADS"


class ConfigError(ValueError):
    """Invalid configuration; ``path`` names the offending field."""

    def __init__(self, path: str, message: str) -> None:
        super().__init__(f"{path}: {message}")
        self.path = path


class InvariantBreach(RuntimeError):
    """A verb finished but one of its checked invariants failed."""


# ---------------------------------------------------------------------------
# budgets


@dataclass(frozen=True)
class Budget:
    name: str
    n: int  # target variable count (b = n // k)
    solver_seeds: int
    sa_sweeps: int
    sa_runs: int
    de_population: int
    de_max_iters: int
    de_tol: float
    qaoa_p: int
    qaoa_restarts: int
    fgum_b: int
    fgum_trials: int
    tolerance: float  # expected agreement with the reference table at this budget


BUDGETS: dict[str, Budget] = {
    "smoke": Budget("smoke", n=420, solver_seeds=2, sa_sweeps=300, sa_runs=1, de_population=10_000,
                    de_max_iters=400, de_tol=2e-3, qaoa_p=1, qaoa_restarts=3, fgum_b=200, fgum_trials=10,
                    tolerance=0.05),
    "desk": Budget("desk", n=2520, solver_seeds=20, sa_sweeps=10_000, sa_runs=4, de_population=100_000,
                   de_max_iters=2000, de_tol=2.5e-4, qaoa_p=4, qaoa_restarts=10, fgum_b=2000, fgum_trials=30,
                   tolerance=0.005),
    "full": Budget("full", n=2520, solver_seeds=20, sa_sweeps=1_000_000, sa_runs=4, de_population=100_000,
                   de_max_iters=2000, de_tol=2.5e-4, qaoa_p=8, qaoa_restarts=20, fgum_b=2000, fgum_trials=200,
                   tolerance=0.002),
}


# ---------------------------------------------------------------------------
# config and records


@dataclass
class ExperimentConfig:
    verb: str
    grid: list[tuple[int, int]] = field(default_factory=list)
    b: int | None = None
    n: int | None = None
    seeds: list[int] = field(default_factory=lambda: [0])
    options: dict[str, Any] = field(default_factory=dict)
    output: str | None = None
    log: str | None = None
    format: str = "csv"
    budget: str = "desk"
    workers: int = 1
    instance: str | None = None

    def __post_init__(self) -> None:
        self.grid = [tuple(int(x) for x in kd) for kd in self.grid]
        self.seeds = [int(s) for s in self.seeds]
        self.validate()

    def validate(self) -> None:
        if self.verb not in VERBS:
            raise ConfigError("verb", f"unknown verb {self.verb!r}; expected one of {sorted(VERBS)}")
        if not self.seeds:
            raise ConfigError("seeds", "must be nonempty")
        if any(s < 0 for s in self.seeds):
            raise ConfigError("seeds", "must be nonnegative")
        for i, kd in enumerate(self.grid):
            if len(kd) != 2:
                raise ConfigError(f"grid[{i}]", "expected a (k, D) pair")
            if kd[0] < 2 or kd[1] < 2:
                raise ConfigError(f"grid[{i}]", f"need k >= 2 and D >= 2, got {kd}")
        if self.b is not None and self.b < 1:
            raise ConfigError("b", "must be positive")
        if self.n is not None and self.b is not None:
            for i, (k, _) in enumerate(self.grid):
                if self.n != k * self.b:
                    raise ConfigError("n", f"n={self.n} but k*b={k * self.b} for grid[{i}]")
        if self.n is not None and self.b is None:
            for i, (k, _) in enumerate(self.grid):
                if self.n % k:
                    raise ConfigError("n", f"n={self.n} is not a multiple of k={k} (grid[{i}])")
        if self.format not in FORMATS:
            raise ConfigError("format", f"expected one of {FORMATS}")
        if self.budget not in BUDGETS:
            raise ConfigError("budget", f"expected one of {sorted(BUDGETS)}")
        if self.workers < 1:
            raise ConfigError("workers", "must be >= 1")

    def block_length(self, k: int) -> int:
        """b for row k: explicit b, else n / k, else the budget's n / k."""
        if self.b is not None:
            return self.b
        n = self.n if self.n is not None else BUDGETS[self.budget].n
        return n // k

    def option(self, name: str, default: Any = None) -> Any:
        return self.options.get(name, default)

    def echo(self) -> dict:
        d = asdict(self)
        d["grid"] = [list(kd) for kd in self.grid]
        d.pop("output", None)
        d.pop("log", None)
        d.pop("workers", None)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> ExperimentConfig:
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(sorted(unknown)[0], "unknown config field")
        if "verb" not in d:
            raise ConfigError("verb", "missing")
        return cls(**d)


@dataclass
class ResultRecord:
    timestamp: str
    config: dict
    metric: str
    value: Any
    ci_halfwidth: float | None
    provenance: str
    version: str = __version__
    extra: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.provenance not in PROVENANCE:
            raise ValueError(f"provenance must be one of {PROVENANCE}")

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, default=_json_default)


def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, tuple):
        return list(o)
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def record(cfg: ExperimentConfig, metric: str, value: Any, provenance: str, ci: float | None = None,
           **extra) -> ResultRecord:
    return ResultRecord(_now(), cfg.echo(), metric, value, ci, provenance, __version__, extra)


# ---------------------------------------------------------------------------
# worker pool


def worker_count(requested: int) -> int:
    cap = os.environ.get(THREADS_ENV)
    if cap is not None:
        try:
            cap_i = int(cap)
        except ValueError as exc:
            raise ConfigError(THREADS_ENV, f"not an integer: {cap!r}") from exc
        if cap_i < 1:
            raise ConfigError(THREADS_ENV, "must be >= 1")
        return max(1, min(requested, cap_i))
    return max(1, requested)


def parallel_map(fn: Callable, jobs: list, workers: int) -> list:
    """Order-preserving map; results do not depend on the worker count."""
    workers = worker_count(workers)
    if workers == 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
        return list(pool.map(fn, jobs))


# ---------------------------------------------------------------------------
# verbs


def _grid(cfg: ExperimentConfig) -> list[tuple[int, int]]:
    return cfg.grid or list(theory.REFERENCE_GRID)


def _single(cfg: ExperimentConfig) -> tuple[int, int]:
    if cfg.instance is not None:
        inst = ensemble.Instance.load(cfg.instance)
        return inst.k, inst.D
    if len(cfg.grid) != 1:
        raise ConfigError("grid", "this verb needs exactly one (k, D) pair")
    return cfg.grid[0]


def _instance(cfg: ExperimentConfig, seed: int) -> ensemble.Instance:
    if cfg.instance is not None:
        try:
            return ensemble.Instance.load(cfg.instance)
        except OSError as exc:
            raise OSError(f"cannot read instance file {cfg.instance}: {exc}") from exc
    k, D = _single(cfg)
    return ensemble.sample_instance(k, D, cfg.block_length(k), seed)


PREDICT_FIELDS = list(theory.REPORT_FIELDS)


def verb_predict(cfg: ExperimentConfig):
    rows, recs = [], []
    for k, D in _grid(cfg):
        try:
            row = theory.report(k, D).as_row()
        except ValueError as exc:
            raise ConfigError("grid", str(exc)) from exc
        rows.append(row)
        for key in ("fgum_score", "turbo_prange_score", "prange_score", "e_max"):
            recs.append(record(cfg, key, row[key], "theory", k=k, D=D))
    return rows, recs


def verb_sample(cfg: ExperimentConfig):
    k, D = _single(cfg)
    b = cfg.block_length(k)
    seed = cfg.seeds[0]
    inst = ensemble.sample_instance(k, D, b, seed)
    ensemble.check_regular(inst)
    doc = inst.to_dict()
    recs = [record(cfg, "instance", dict(k=k, D=D, b=b, m=inst.m, n=inst.n), "exact")]
    return doc, recs


SOLVERS = ("prange", "turbo-prange", "sa", "greedy")


def _solve_one(job: tuple[dict, int]) -> dict:
    cfg_d, seed = job
    cfg = ExperimentConfig.from_dict(cfg_d)
    algo = cfg.option("algo", "prange")
    inst = _instance(cfg, cfg.option("instance_seed", seed))
    if algo == "prange":
        res = solvers.prange(inst, seed)
    elif algo == "turbo-prange":
        res = solvers.turbo_prange(inst, seed)
    elif algo == "sa":
        sa = solvers.SAConfig(
            sweeps=int(cfg.option("sweeps", BUDGETS[cfg.budget].sa_sweeps)),
            beta_start=float(cfg.option("beta_start", 0.2)),
            beta_end=float(cfg.option("beta_end", 4.0)),
            seeds=int(cfg.option("runs", BUDGETS[cfg.budget].sa_runs)),
            schedule=cfg.option("schedule", "linear"),
            seed=seed,
        )
        res = solvers.simulated_annealing(inst, sa)
    elif algo == "greedy":
        raw = RawStream(stream(seed, 105))
        from .gf2 import unpack_bits, n_words

        start = GF2Vector.from_bits(unpack_bits(raw.words(n_words(inst.n)), inst.n).astype(np.uint8))
        res = solvers.greedy(inst, start, seed)
    else:
        raise ConfigError("options.algo", f"expected one of {SOLVERS}")
    if inst.satisfied(res.assignment.to_bits()) != res.satisfied:
        raise InvariantBreach("reported satisfied count does not match the assignment")
    d = res.to_dict()
    d.update(k=inst.k, D=inst.D, b=inst.b, instance_seed=int(inst.seed))
    return d


def verb_solve(cfg: ExperimentConfig):
    algo = cfg.option("algo", "prange")
    if algo not in SOLVERS:
        raise ConfigError("options.algo", f"expected one of {SOLVERS}")
    _single(cfg)
    cfg_d = asdict(cfg)
    results = parallel_map(_solve_one, [(cfg_d, s) for s in cfg.seeds], cfg.workers)
    recs = []
    for r in results:
        extra = {k: v for k, v in r.items() if k not in ("score", "wall_time")}
        recs.append(record(cfg, f"{algo}_score", r["score"], "montecarlo", wall_time=r["wall_time"], **extra))
    scores = [r["score"] for r in results]
    if len(scores) > 1:
        sd = float(np.std(scores, ddof=1))
        recs.append(record(cfg, f"{algo}_mean_score", float(np.mean(scores)), "montecarlo",
                           ci=1.96 * sd / math.sqrt(len(scores)), seeds=len(scores)))
    return results, recs


FGUM_FIELDS = list(fgum.CSV_FIELDS)


def default_rates(k: int, D: int, points: int = 15, span: float = 0.12) -> list[float]:
    e = theory.e_max(k, D)
    lo, hi = max(0.0, e - span / 2), min(1.0, e + span / 2)
    return [float(x) for x in np.linspace(lo, hi, points)]


def verb_fgum_sim(cfg: ExperimentConfig):
    k, D = _single(cfg)
    b = cfg.b if cfg.b is not None else BUDGETS[cfg.budget].fgum_b
    rates = cfg.option("rates") or default_rates(k, D)
    trials = int(cfg.option("trials", BUDGETS[cfg.budget].fgum_trials))
    curve = fgum.threshold_scan(k, D, b, sorted(float(r) for r in rates), trials, cfg.seeds[0])
    recs = [record(cfg, "fgum_crossing", curve.crossing, "montecarlo", predicted=theory.e_max(k, D),
                   width=curve.width)]
    for row in curve.rows():
        recs.append(record(cfg, "fgum_success", row["successes"] / row["trials"], "montecarlo",
                           ci=row["ci_halfwidth"], rate=row["rate"]))
    return curve.rows(), recs


BP_THRESHOLD_FIELDS = ["k", "D", "eps_star", "dqi_bp_score", "reference_dqi_bp"]


def _de_config(cfg: ExperimentConfig, seed: int) -> bp.DEConfig:
    bud = BUDGETS[cfg.budget]
    return bp.DEConfig(
        population_size=int(cfg.option("population", bud.de_population)),
        max_iters=int(cfg.option("max_iters", bud.de_max_iters)),
        bisection_tol=float(cfg.option("bisection_tol", bud.de_tol)),
        seed=seed,
    )


def _bp_threshold_one(job: tuple[dict, int, int]) -> dict:
    cfg_d, k, D = job
    cfg = ExperimentConfig.from_dict(cfg_d)
    eps = bp.de_threshold(k, D, _de_config(cfg, cfg.seeds[0]))
    ref = theory.REFERENCE_TABLE.get((k, D), {}).get("dqi_bp")
    return dict(k=k, D=D, eps_star=eps, dqi_bp_score=theory.bp_score_from_threshold(eps), reference_dqi_bp=ref)


def verb_bp_threshold(cfg: ExperimentConfig):
    cfg_d = asdict(cfg)
    rows = parallel_map(_bp_threshold_one, [(cfg_d, k, D) for k, D in _grid(cfg)], cfg.workers)
    recs = [record(cfg, "dqi_bp_score", r["dqi_bp_score"], "montecarlo", k=r["k"], D=r["D"],
                   eps_star=r["eps_star"]) for r in rows]
    return rows, recs


BP_DECODE_FIELDS = ["k", "D", "b", "crossover", "trials", "successes", "success_rate", "ci_halfwidth"]


def verb_bp_decode(cfg: ExperimentConfig):
    crossovers = cfg.option("crossover", [0.05])
    if not isinstance(crossovers, list):
        crossovers = [crossovers]
    trials = int(cfg.option("trials", 20))
    inst = _instance(cfg, cfg.option("instance_seed", cfg.seeds[0]))
    rows, recs = [], []
    for eps in crossovers:
        rate = bp.bp_block_success(inst, float(eps), trials, cfg.seeds[0],
                                   max_iters=int(cfg.option("max_iters", 100)))
        succ = int(round(rate * trials))
        half = fgum.binomial_halfwidth(succ, trials)
        rows.append(dict(k=inst.k, D=inst.D, b=inst.b, crossover=float(eps), trials=trials, successes=succ,
                         success_rate=rate, ci_halfwidth=half))
        recs.append(record(cfg, "bp_block_success", rate, "montecarlo", ci=half, crossover=float(eps)))
    return rows, recs


def verb_qaoa(cfg: ExperimentConfig):
    k, D = _single(cfg)
    p = int(cfg.option("p", BUDGETS[cfg.budget].qaoa_p))
    restarts = int(cfg.option("restarts", BUDGETS[cfg.budget].qaoa_restarts))
    res = qaoa.optimize(k, D, p, restarts=restarts, seed=cfg.seeds[0])
    doc = res.to_dict()
    doc["history"] = [dict(p=q, satisfied_fraction=v) for q, v in res.history]
    vals = [v for _, v in res.history]
    if any(b < a - 1e-9 for a, b in zip(vals, vals[1:])):
        raise InvariantBreach("optimized QAOA value decreased with depth")
    recs = [record(cfg, "qaoa_tree_value", res.satisfied_fraction, "exact", p=p, params=res.params.to_dict())]
    return doc, recs


def _parse_decoder(tag: str) -> tuple[str, float | None]:
    if tag in ("perfect", "zero", "random"):
        return tag, None
    if tag.startswith("interpolated:"):
        try:
            theta = float(tag.split(":", 1)[1])
        except ValueError as exc:
            raise ConfigError("options.decoder", f"bad interpolation parameter in {tag!r}") from exc
        if not 0.0 <= theta <= 1.0:
            raise ConfigError("options.decoder", "interpolation parameter must lie in [0, 1]")
        return "interpolated", theta
    raise ConfigError("options.decoder", f"expected perfect | interpolated:theta | zero | random, got {tag!r}")


def regev_case(m: int, seed: int, decoder: str, bias: str = "alpha", alpha: float = 0.2, n: int | None = None,
               g: int = 0):
    """Build (code, P, decoder) for a seeded tiny instance."""
    if not 1 <= m <= 6:
        raise ConfigError("options.m", "must lie in [1, 6]")
    n = n if n is not None else max(1, m // 2)
    if not 1 <= n <= m:
        raise ConfigError("options.n", "must lie in [1, m]")
    rng = np.random.Generator(stream(seed, 601, m, n))
    code = regev.random_code(m, n, rng)
    if bias == "alpha":
        P = regev.p_alpha(m, alpha)
    elif bias == "unique":
        P = regev.random_unique_decodable_bias(code, rng)
    else:
        raise ConfigError("options.bias", "expected alpha | unique")
    kind, theta = _parse_decoder(decoder)
    if kind == "perfect":
        dec = regev.perfect_decoder(code, P)
    elif kind == "zero":
        dec = regev.zero_decoder(m, g)
    elif kind == "interpolated":
        dec = regev.interpolated_decoder(code, P, theta, g)
    else:
        dec = regev.random_decoder(code, P, rng, g=max(g, 1) if m <= 4 else g)
    return code, P, dec


def verb_regev_verify(cfg: ExperimentConfig):
    m = int(cfg.option("m", 2))
    code, P, dec = regev_case(m, cfg.seeds[0], cfg.option("decoder", "perfect"), cfg.option("bias", "alpha"),
                              float(cfg.option("alpha", 0.2)), cfg.option("n"), int(cfg.option("g", 0)))
    eb = regev.verify_error_bound(code, P, dec)
    db = regev.verify_distance_bounds(code, P, dec)
    passed = bool(eb.holds and db.holds)
    doc = dict(
        m=m,
        n=code.B.cols,
        decoder=dec.name,
        eps=eb.eps,
        error_bound=dict(lhs=eb.lhs, rhs=eb.rhs, slack=eb.slack, holds=eb.holds),
        trace_distance_bound=dict(lhs=db.details["trace_distance"], rhs=db.details["sqrt_eps"],
                                  slack=db.details["sqrt_eps"] - db.details["trace_distance"],
                                  holds=db.details["trace_distance"] <= db.details["sqrt_eps"] + 1e-12),
        tv_bound=dict(lhs=db.details["tv_algo_actual"], rhs=db.details["quartic_root_eps"],
                      slack=db.details["quartic_root_eps"] - db.details["tv_algo_actual"],
                      holds=db.details["tv_algo_actual"] <= db.details["quartic_root_eps"] + 1e-12),
        s_h_s=eb.details["s_h_s"],
        postselect_prob=eb.details["postselect_prob"],
        passed=passed,
    )
    recs = [record(cfg, "regev_eps", eb.eps, "exact"), record(cfg, "regev_slack", eb.slack, "exact"),
            record(cfg, "regev_pass", passed, "exact")]
    if not passed:
        raise InvariantBreach("a reduction bound failed: " + json.dumps(doc, default=_json_default))
    return doc, recs


CYCLE_FIELDS = ["ell", "mean_cycles", "bound", "mean_treelike_fraction", "samples", "regular", "partition_ok"]


def _audit_one(job: tuple[int, int, int, int]) -> dict:
    k, D, b, seed = job
    inst = ensemble.sample_instance(k, D, b, seed)
    regular = True
    try:
        ensemble.check_regular(inst)
    except (AssertionError, ValueError):
        regular = False
    part = ensemble.block_partition(inst)
    covered = np.sort(np.concatenate(part.blocks))
    partition_ok = bool(len(part.blocks) == b and np.array_equal(covered, np.arange(inst.m))
                        and all(len(blk) == D for blk in part.blocks))
    return dict(c2=ensemble.count_short_cycles(inst, 2), c3=ensemble.count_short_cycles(inst, 3),
                t1=ensemble.treelike_fraction(inst, 1), regular=regular, partition_ok=partition_ok)


def verb_cycle_audit(cfg: ExperimentConfig):
    k, D = _single(cfg)
    b = cfg.b if cfg.b is not None else 50
    samples = int(cfg.option("samples", 100))
    base = RawStream(stream(cfg.seeds[0], 701, k, D, b))
    jobs = [(k, D, b, base.seed64()) for _ in range(samples)]
    res = parallel_map(_audit_one, jobs, cfg.workers)
    regular = all(r["regular"] for r in res)
    partition_ok = all(r["partition_ok"] for r in res)
    t1 = float(np.mean([r["t1"] for r in res]))
    rows, recs = [], []
    for ell in (2, 3):
        mean = float(np.mean([r[f"c{ell}"] for r in res]))
        bound = float((4 * k * D) ** ell)
        rows.append(dict(ell=ell, mean_cycles=mean, bound=bound, mean_treelike_fraction=t1, samples=samples,
                         regular=regular, partition_ok=partition_ok))
        recs.append(record(cfg, f"mean_cycles_{ell}", mean, "montecarlo", bound=bound))
    if not (regular and partition_ok) or any(r["mean_cycles"] > r["bound"] for r in rows):
        raise InvariantBreach("ensemble audit failed: " + json.dumps(rows))
    return rows, recs


# ---------------------------------------------------------------------------
# comparison table


TABLE1_FIELDS = ["k", "D", "prange_analytic", "prange_empirical", "sa", "dqi_bp", "fgum_theory",
                 "turbo_prange_empirical", "qaoa", "qaoa_p", "best_theory_column"]
THEORY_COLUMNS = ("prange_analytic", "dqi_bp", "fgum_theory")
_REFERENCE_COLUMN = dict(prange_analytic="prange", dqi_bp="dqi_bp", fgum_theory="fgum")


def best_column(row: dict, columns=THEORY_COLUMNS) -> str:
    return max(columns, key=lambda c: row[c])


def reference_best_column(k: int, D: int, columns=THEORY_COLUMNS) -> str:
    ref = theory.REFERENCE_TABLE[(k, D)]
    return max(columns, key=lambda c: ref[_REFERENCE_COLUMN[c]])


def table1_row(job: tuple[int, int, str, int]) -> dict:
    k, D, budget, seed = job
    bud = BUDGETS[budget]
    b = bud.n // k
    pr, tp = [], []
    for s in range(bud.solver_seeds):
        inst = ensemble.sample_instance(k, D, b, int(stream(seed, 801, k, D, s).random_raw()))
        pr.append(solvers.prange(inst, s).score)
        tp.append(solvers.turbo_prange(inst, s).score)
    inst = ensemble.sample_instance(k, D, b, int(stream(seed, 802, k, D).random_raw()))
    sa = solvers.simulated_annealing(inst, solvers.SAConfig(sweeps=bud.sa_sweeps, seeds=bud.sa_runs, seed=seed))
    de = bp.de_threshold(k, D, bp.DEConfig(population_size=bud.de_population, max_iters=bud.de_max_iters,
                                           bisection_tol=bud.de_tol, seed=seed))
    q = qaoa.optimize(k, D, bud.qaoa_p, restarts=bud.qaoa_restarts, seed=seed)
    row = dict(
        k=k,
        D=D,
        prange_analytic=theory.prange_score(k, D),
        prange_empirical=float(np.mean(pr)),
        sa=sa.score,
        dqi_bp=theory.bp_score_from_threshold(de),
        fgum_theory=theory.fgum_score(k, D),
        turbo_prange_empirical=float(np.mean(tp)),
        qaoa=q.satisfied_fraction,
        qaoa_p=bud.qaoa_p,
    )
    row["best_theory_column"] = best_column(row)
    return row


def table1(grid: list[tuple[int, int]], budget: str, seed: int = 0, workers: int = 1) -> list[dict]:
    for i, kd in enumerate(grid):
        if tuple(kd) not in theory.REFERENCE_TABLE:
            raise ConfigError(f"grid[{i}]", f"{tuple(kd)} is not a row of the comparison table")
    if budget not in BUDGETS:
        raise ConfigError("budget", f"expected one of {sorted(BUDGETS)}")
    return parallel_map(table1_row, [(k, D, budget, seed) for k, D in grid], workers)


def verb_table1(cfg: ExperimentConfig):
    rows = table1(_grid(cfg), cfg.budget, cfg.seeds[0], cfg.workers)
    recs = []
    for r in rows:
        for col, prov in (("prange_analytic", "theory"), ("fgum_theory", "theory"), ("dqi_bp", "montecarlo"),
                          ("prange_empirical", "montecarlo"), ("turbo_prange_empirical", "montecarlo"),
                          ("sa", "montecarlo"), ("qaoa", "exact")):
            recs.append(record(cfg, col, r[col], prov, k=r["k"], D=r["D"]))
    return rows, recs


# ---------------------------------------------------------------------------
# dispatch and output


VERBS: dict[str, tuple[Callable, list[str] | None]] = {
    "predict": (verb_predict, PREDICT_FIELDS),
    "sample": (verb_sample, None),
    "solve": (verb_solve, None),
    "fgum-sim": (verb_fgum_sim, FGUM_FIELDS),
    "bp-threshold": (verb_bp_threshold, BP_THRESHOLD_FIELDS),
    "bp-decode": (verb_bp_decode, BP_DECODE_FIELDS),
    "qaoa": (verb_qaoa, None),
    "regev-verify": (verb_regev_verify, None),
    "table1": (verb_table1, TABLE1_FIELDS),
    "cycle-audit": (verb_cycle_audit, CYCLE_FIELDS),
}


def render(verb: str, payload, fmt: str) -> str:
    """Primary output text: CSV for tabular verbs, JSON otherwise."""
    header = VERBS[verb][1]
    if verb == "solve":
        return "".join(json.dumps(r, sort_keys=True, default=_json_default) + "\n" for r in payload)
    if header is None:
        return json.dumps(payload, indent=2, sort_keys=True, default=_json_default) + "\n"
    if fmt == "json-lines":
        return "".join(json.dumps(r, sort_keys=True, default=_json_default) + "\n" for r in payload)
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=header, lineterminator="\n", extrasaction="ignore")
    w.writeheader()
    for r in payload:
        w.writerow({k: (repr(float(v)) if isinstance(v, (float, np.floating)) else v) for k, v in r.items()})
    return buf.getvalue()


def run(cfg: ExperimentConfig, stdout=None) -> int:
    """Dispatch ``cfg.verb``; write the primary output and the record log.

    Returns 0 on success.  Invariant breaches and config errors propagate so
    the caller can report them with a nonzero status.
    """
    fn, _ = VERBS[cfg.verb]
    t0 = time.perf_counter()
    payload, recs = fn(cfg)
    text = render(cfg.verb, payload, cfg.format)
    if cfg.output:
        Path(cfg.output).parent.mkdir(parents=True, exist_ok=True)
        mode = "a" if cfg.verb == "solve" else "w"
        with open(cfg.output, mode) as fh:
            fh.write(text)
    elif stdout is not None:
        stdout.write(text)
    if cfg.log:
        Path(cfg.log).parent.mkdir(parents=True, exist_ok=True)
        with open(cfg.log, "a") as fh:
            for r in recs:
                r.extra.setdefault("verb_wall_time", time.perf_counter() - t0)
                fh.write(r.to_json() + "\n")
    return 0
