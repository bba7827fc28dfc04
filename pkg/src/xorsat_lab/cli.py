"""Command-line entry point ``xorsat-lab``.

Settings come from built-in defaults, then an optional JSON config file
(``--config``), then explicit flags; later sources win.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .harness import BUDGETS, FORMATS, SOLVERS, VERBS, ConfigError, ExperimentConfig, InvariantBreach, run

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INVARIANT = 3
EXIT_IO = 4

# flags stored in ExperimentConfig.options rather than as top-level fields
_OPTION_FLAGS = {
    "algo", "sweeps", "beta_start", "beta_end", "runs", "schedule", "rates", "trials", "population",
    "max_iters", "bisection_tol", "crossover", "p", "restarts", "m", "n_cols", "decoder", "bias", "alpha",
    "g", "samples", "instance_seed",
}


def _pair(text: str) -> tuple[int, int]:
    try:
        k, D = (int(x) for x in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected K,D, got {text!r}") from exc
    return k, D


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _ints(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    S = argparse.SUPPRESS
    common = argparse.ArgumentParser(add_help=False, argument_default=S)
    g = common.add_argument_group("common")
    g.add_argument("--config", help="JSON config file; flags override its fields")
    g.add_argument("--k", type=int, help="equation arity (constraint degree)")
    g.add_argument("--D", type=int, help="variable degree")
    g.add_argument("--grid", type=_pair, action="append", metavar="K,D", help="repeatable (k, D) pair")
    g.add_argument("--b", type=int, help="block length (n = k*b, m = D*b)")
    g.add_argument("--n", type=int, help="number of variables (b = n/k)")
    g.add_argument("--seed", type=int, help="single seed")
    g.add_argument("--seeds", type=_ints, help="comma-separated seeds")
    g.add_argument("--budget", choices=sorted(BUDGETS))
    g.add_argument("--out", dest="output", help="primary output path (default stdout)")
    g.add_argument("--log", help="append JSON-lines result records here")
    g.add_argument("--format", choices=FORMATS)
    g.add_argument("--workers", type=int, help="worker processes (capped by XORSAT_LAB_THREADS)")
    g.add_argument("--instance", help="instance JSON file")

    parser = argparse.ArgumentParser(prog="xorsat-lab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="verb", required=True)

    sub.add_parser("predict", parents=[common], help="closed-form predictions as CSV",
                   argument_default=S)
    sub.add_parser("sample", parents=[common], help="write a Gallager instance as JSON", argument_default=S)

    p = sub.add_parser("solve", parents=[common], help="run a classical solver", argument_default=S)
    p.add_argument("--algo", choices=SOLVERS)
    p.add_argument("--sweeps", type=int)
    p.add_argument("--beta-start", dest="beta_start", type=float)
    p.add_argument("--beta-end", dest="beta_end", type=float)
    p.add_argument("--runs", type=int, help="independent annealing runs per seed (best kept)")
    p.add_argument("--schedule", choices=("linear", "geometric", "constant"))
    p.add_argument("--instance-seed", dest="instance_seed", type=int,
                   help="sample one instance with this seed for every solver seed")

    p = sub.add_parser("fgum-sim", parents=[common], help="block erasure threshold scan", argument_default=S)
    p.add_argument("--rates", type=_floats, help="comma-separated erasure rates")
    p.add_argument("--trials", type=int)

    p = sub.add_parser("bp-threshold", parents=[common], help="density evolution thresholds",
                       argument_default=S)
    p.add_argument("--population", type=int)
    p.add_argument("--max-iters", dest="max_iters", type=int)
    p.add_argument("--bisection-tol", dest="bisection_tol", type=float)

    p = sub.add_parser("bp-decode", parents=[common], help="BP block success on an instance",
                       argument_default=S)
    p.add_argument("--crossover", type=_floats, help="comma-separated BSC crossover probabilities")
    p.add_argument("--trials", type=int)
    p.add_argument("--max-iters", dest="max_iters", type=int)
    p.add_argument("--instance-seed", dest="instance_seed", type=int)

    p = sub.add_parser("qaoa", parents=[common], help="optimize tree-level QAOA", argument_default=S)
    p.add_argument("--p", type=int)
    p.add_argument("--restarts", type=int)

    p = sub.add_parser("regev-verify", parents=[common], help="dense check of the reduction bounds",
                       argument_default=S)
    p.add_argument("--m", type=int)
    p.add_argument("--n-cols", dest="n_cols", type=int, help="columns of B (default m // 2)")
    p.add_argument("--decoder", help="perfect | interpolated:THETA | zero | random")
    p.add_argument("--bias", choices=("alpha", "unique"))
    p.add_argument("--alpha", type=float)
    p.add_argument("--g", type=int, help="garbage qubits")

    sub.add_parser("table1", parents=[common], help="reproduce the comparison table", argument_default=S)

    p = sub.add_parser("cycle-audit", parents=[common], help="short-cycle and regularity audit",
                       argument_default=S)
    p.add_argument("--samples", type=int)
    return parser


def config_from_args(ns: argparse.Namespace) -> ExperimentConfig:
    flags = vars(ns).copy()
    verb = flags.pop("verb")
    base: dict = {}
    if "config" in flags:
        path = flags.pop("config")
        try:
            base = json.loads(Path(path).read_text())
        except OSError as exc:
            raise OSError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError("config", f"{path} is not valid JSON: {exc}") from exc
        if not isinstance(base, dict):
            raise ConfigError("config", "top level must be an object")
    if base.get("verb", verb) != verb:
        raise ConfigError("verb", f"config is for {base['verb']!r}, command line says {verb!r}")
    base["verb"] = verb
    options = dict(base.get("options", {}))
    for key in list(flags):
        if key in _OPTION_FLAGS:
            options["n" if key == "n_cols" else key] = flags.pop(key)
    base["options"] = options
    k, D = flags.pop("k", None), flags.pop("D", None)
    if "grid" in flags:
        base["grid"] = [list(kd) for kd in flags.pop("grid")]
    elif k is not None or D is not None:
        if k is None or D is None:
            raise ConfigError("grid", "--k and --D must be given together")
        base["grid"] = [[k, D]]
    if "seed" in flags:
        base["seeds"] = [flags.pop("seed")]
    base.update(flags)
    return ExperimentConfig.from_dict(base)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = config_from_args(ns)
        return run(cfg, sys.stdout)
    except ConfigError as exc:
        print(f"xorsat-lab: invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InvariantBreach as exc:
        print(f"xorsat-lab: invariant breach: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except OSError as exc:
        print(f"xorsat-lab: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
