"""``bbmit`` command-line interface.

Every subcommand produces a report (JSON by default, ``--format csv`` for
tables) carrying the command, the full config including the seed, the result,
the oracle ledger, timings and the tool version.

Exit codes: 0 completed, 1 a violation or witness was found, 2 error.
Caps default to the library values and can be overridden with the
``BBMIT_SPAN_CAP``, ``BBMIT_ENUM_CAP`` and ``BBMIT_MATRIX_CAP`` environment
variables or the matching flags.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Sequence

from . import __version__
from .errors import BBMITError, LemmaViolation, NotApplicable, NotAProperCoset
from .io import MITInstance, dumps_instance, emit_report, parse_instance
from .quantum import COST_CURVE_COLUMNS, cost_curve, optimize_parameters, szegedy_detect
from .reduction import (
    SplitCollisionInstance,
    build_instance,
    has_m_collision,
    has_split_collision,
    planted_collision,
    random_partition_lift,
    split_probability,
    verify_equivalence,
)
from .ring import DEFAULT_SPAN_CAP, QueryLedger, enumerate_additive_span
from .rng import make_rng
from .testers import (
    DEFAULT_ENUMERATION_CAP,
    SamplerConfig,
    deterministic_test,
    exhaustive_nonzero_fraction,
    randomized_test,
    verify_coset_lemma,
    verify_subsum_lemma,
)
from .walk import DEFAULT_MATRIX_CAP, GAP_TABLE_COLUMNS, classical_search, gap_table, walk_matrices

CAP_ENV = {
    "span_cap": ("BBMIT_SPAN_CAP", DEFAULT_SPAN_CAP),
    "enum_cap": ("BBMIT_ENUM_CAP", DEFAULT_ENUMERATION_CAP),
    "matrix_cap": ("BBMIT_MATRIX_CAP", DEFAULT_MATRIX_CAP),
}


@dataclass(frozen=True)
class ExperimentConfig:
    command: str
    inputs: tuple[str, ...] = ()
    seed: int = 0
    span_cap: int = DEFAULT_SPAN_CAP
    enum_cap: int = DEFAULT_ENUMERATION_CAP
    matrix_cap: int = DEFAULT_MATRIX_CAP
    fmt: str = "json"
    failure_bound: float = 0.01
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in CAP_ENV:
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.fmt not in ("json", "csv"):
            raise ValueError(f"unknown format {self.fmt!r}")

    def as_dict(self) -> dict:
        return {
            "command": self.command,
            "inputs": list(self.inputs),
            "seed": self.seed,
            "caps": {"span": self.span_cap, "enumeration": self.enum_cap, "matrix": self.matrix_cap},
            "format": self.fmt,
            "failure_bound": self.failure_bound,
            "params": dict(sorted(self.params.items())),
        }


@dataclass
class _Outcome:
    result: dict
    exit_code: int = 0
    ledger: QueryLedger | None = None
    table: dict | None = None


def _mit(config: ExperimentConfig) -> MITInstance:
    inst = parse_instance(config.inputs[0])
    if not isinstance(inst, MITInstance):
        raise BBMITError(f"{config.inputs[0]}: expected a ring/basis/polynomial instance "
                         "(run `bbmit reduce` on split-collision files first)")
    return inst


def _split(config: ExperimentConfig) -> SplitCollisionInstance:
    inst = parse_instance(config.inputs[0])
    if not isinstance(inst, SplitCollisionInstance):
        raise BBMITError(f"{config.inputs[0]}: expected a split-collision instance {{k, m, f}}")
    return inst


def _literals(ring, values):
    return None if values is None else [ring.to_literal(v) for v in values]


def _one_based(subsets):
    return None if subsets is None else [[i + 1 for i in u] for u in subsets]


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _test_det(config: ExperimentConfig) -> _Outcome:
    inst = _mit(config)
    k, m = inst.basis.k, inst.polynomial.m
    if k ** m > config.enum_cap:
        raise BBMITError(f"{k}^{m} generator tuples exceed enumeration cap {config.enum_cap}")
    v = deterministic_test(inst.polynomial, inst.ring, inst.basis)
    return _Outcome(
        {"verdict": v.outcome.value, "witness": _literals(inst.ring, v.witness), "k": k, "m": m,
         "zero_prepended": inst.basis.zero_prepended},
        1 if v.violated else 0, v.ledger_delta)


def _test_rand(config: ExperimentConfig) -> _Outcome:
    inst = _mit(config)
    p = config.params
    sampler = SamplerConfig(p.get("ell"), p.get("trials"), config.seed, config.failure_bound)
    v = randomized_test(inst.polynomial, inst.ring, inst.basis, sampler, make_rng(config.seed))
    return _Outcome(
        {"verdict": v.outcome.value, "witness": _literals(inst.ring, v.witness),
         "witness_subsets": _one_based(v.witness_subsets), "ell": v.ell, "trials": v.trials,
         "trials_run": v.trials_run, "per_trial_bound": v.per_trial_bound,
         "k": inst.basis.k, "m": inst.polynomial.m},
        1 if v.violated else 0, v.ledger_delta)


def _walk_search(config: ExperimentConfig) -> _Outcome:
    inst = _mit(config)
    k = inst.basis.k
    ell = config.params.get("ell") or max(1, k // 2)
    res = classical_search(inst.polynomial, inst.ring, inst.basis, ell,
                           config.params["max_steps"], make_rng(config.seed))
    return _Outcome(
        {"hit": res.hit, "steps": res.steps, "ell": ell, "k": k,
         "subsets": _one_based(res.state.subsets),
         "values": _literals(inst.ring, res.state.values) if res.hit else None},
        1 if res.hit else 0, res.ledger)


def _lemmas(config: ExperimentConfig) -> _Outcome:
    inst = _mit(config)
    ring, basis, f = inst.ring, inst.basis, inst.polynomial
    k = basis.k
    ells = config.params.get("ells") or list(range(1, k))
    before = ring.ledger
    result: dict = {"k": k, "m": f.m, "cosets": [], "fractions": [], "subsums": [], "violations": []}
    try:
        span_size = len(enumerate_additive_span(ring, basis, config.span_cap))
        result["span_size"] = span_size
        for i in range(f.m):
            try:
                rep = verify_coset_lemma(f, ring, basis, i, config.span_cap)
            except NotApplicable as e:
                result["cosets"].append({"coordinate": i + 1, "status": "not_applicable", "reason": str(e)})
                continue
            result["cosets"].append({
                "coordinate": i + 1, "status": "holds", "size": rep.size,
                "subgroup_size": None if rep.subgroup is None else len(rep.subgroup),
                "representative": None if rep.representative is None else ring.to_literal(rep.representative),
            })
            if rep.zero_set:
                for ell in ells:
                    try:
                        chk = verify_subsum_lemma(ring, basis, rep.zero_set, ell, config.span_cap)
                    except NotAProperCoset:
                        continue
                    result["subsums"].append({"coordinate": i + 1, "ell": ell,
                                              "probability": chk.probability, "bound": chk.bound})
        for ell in ells:
            chk = exhaustive_nonzero_fraction(f, ring, basis, ell, config.enum_cap)
            result["fractions"].append({"ell": ell, "fraction": chk.probability, "bound": chk.bound})
    except LemmaViolation as e:
        result["violations"].append(str(e))
    return _Outcome(result, 1 if result["violations"] else 0, ring.ledger - before)


def _spectral(config: ExperimentConfig) -> _Outcome:
    p = config.params
    rows = gap_table(p["k_max"], p["k_min"], config.matrix_cap)
    worst = max(abs(float(r["delta_exact"]) - r["delta_numeric"]) for r in rows) if rows else 0.0
    bound_ok = all(r["delta_hat"] >= r["bound_1_over_2ell"] for r in rows)
    return _Outcome({"rows": len(rows), "max_abs_error": worst, "delta_hat_bound_holds": bound_ok},
                    table={"columns": list(GAP_TABLE_COLUMNS), "rows": rows})


def _cost(config: ExperimentConfig) -> _Outcome:
    p = config.params
    k, m = p["k"], p["m"]
    opt = optimize_parameters(k, m)
    rows = cost_curve(k, m, p.get("alpha"))
    return _Outcome(
        {"k": k, "m": m, "ell_star": opt.ell_star, "alpha_star": opt.alpha_star, "q_star": opt.q_star,
         "feasible": opt.feasible, "alpha_admissible": opt.alpha_admissible,
         "neighbors": opt.neighbors, "argmin_ell": opt.argmin_ell, "argmin_q": opt.argmin_q,
         "argmin_in_window": opt.argmin_in_window},
        table={"columns": list(COST_CURVE_COLUMNS), "rows": rows})


def _szegedy(config: ExperimentConfig) -> _Outcome:
    p = config.params
    wm = walk_matrices(p["k"], p["ell"], config.matrix_cap)
    marked = [x - 1 for x in p["marked"]]
    res = szegedy_detect(wm.A, marked, p["c"], p["gamma"], p.get("epsilon"), config.matrix_cap)
    return _Outcome({
        "k": p["k"], "ell": p["ell"], "vertices": len(wm.vertices),
        "marked": [list(i + 1 for i in wm.vertices[x]) for x in marked],
        "epsilon": res.epsilon, "delta_hat": res.delta_hat, "horizon": res.horizon,
        "min_fidelity": res.min_fidelity, "steps_used": res.steps_used, "detected": res.detected,
        "unitarity_error": res.unitarity_error,
    })


def _reduce(config: ExperimentConfig) -> _Outcome:
    inst = _split(config)
    red = build_instance(inst, config.params["clash_rule"])
    text = dumps_instance(red)
    out = config.params.get("instance_out")
    result = {"k": inst.k, "m": inst.m, "t": red.t, "generators": len(red.generators),
              "clashes": [i + 1 for i in red.clashes], "clash_rule": red.clash_rule}
    if out:
        Path(out).write_text(text)
        result["instance_path"] = out
    else:
        result["instance"] = json.loads(text)
    return _Outcome(result)


def _verify_reduction(config: ExperimentConfig) -> _Outcome:
    inst = _split(config)
    rep = verify_equivalence(inst, config.params["span"], config.enum_cap, config.params["clash_rule"])
    return _Outcome({
        "identity": rep.identity, "split_collision": rep.split_collision,
        "covering_collision": rep.covering_collision,
        "witness": None if rep.witness is None else [i + 1 for i in rep.witness],
        "f_evals": rep.f_evals, "span_identity": rep.span_identity, "agrees": rep.agrees,
    }, 0 if rep.identity else 1)


def _lift(config: ExperimentConfig) -> _Outcome:
    p = config.params
    rng = make_rng(config.seed)
    if config.inputs:
        inst = _split(config)
        table, m = inst.f, inst.m
    else:
        m = p["m"]
        table = planted_collision(p["k"], m, rng)
    k = len(table)
    counts = [sum(1 for v in table if v == w) for w in set(table)]
    successes = 0
    last = None
    for _ in range(p["repeats"]):
        last = random_partition_lift(table, m, rng)
        successes += has_split_collision(last)
    result = {
        "k": k, "m": m, "has_m_collision": has_m_collision(table, m), "repeats": p["repeats"],
        "successes": successes, "frequency": Fraction(successes, p["repeats"]),
        "exact_probability": split_probability(k, m) if counts.count(m) == 1 else None,
        "table": [v + 1 for v in table],
    }
    if p.get("instance_out"):
        Path(p["instance_out"]).write_text(dumps_instance(last))
        result["instance_path"] = p["instance_out"]
    return _Outcome(result)


COMMANDS: dict[str, Callable[[ExperimentConfig], _Outcome]] = {
    "test-det": _test_det,
    "test-rand": _test_rand,
    "walk-search": _walk_search,
    "lemmas": _lemmas,
    "spectral": _spectral,
    "cost": _cost,
    "szegedy": _szegedy,
    "reduce": _reduce,
    "verify-reduction": _verify_reduction,
    "lift": _lift,
}


def run_command(config: ExperimentConfig, timings: bool = True) -> tuple[dict, int]:
    """Dispatch one subcommand and assemble its report; returns (report, exit code)."""
    if config.command not in COMMANDS:
        raise BBMITError(f"unknown command {config.command!r}")
    start = time.perf_counter()
    out = COMMANDS[config.command](config)
    elapsed = time.perf_counter() - start
    report = {
        "command": config.command,
        "config": config.as_dict(),
        "result": out.result,
        "ledger": (out.ledger or QueryLedger()).as_dict(),
        "version": __version__,
        "exit_code": out.exit_code,
    }
    if timings:
        report["timings"] = {"wall_seconds": elapsed}
    if out.table is not None:
        report["table"] = out.table
    return report, out.exit_code


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _fraction(text: str) -> float:
    try:
        return float(Fraction(text))
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"expected a number or p/q, got {text!r}") from None


def _env_cap(name: str) -> int:
    var, default = CAP_ENV[name]
    raw = os.environ.get(var)
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError:
        raise BBMITError(f"{var}={raw!r} is not an integer") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="master RNG seed (default 0)")
    common.add_argument("--format", dest="fmt", choices=("json", "csv"), default="json")
    common.add_argument("-o", "--output", help="write the report here instead of stdout")
    common.add_argument("--span-cap", type=int, help="max span size (env BBMIT_SPAN_CAP)")
    common.add_argument("--enum-cap", type=int, help="max enumerated tuples (env BBMIT_ENUM_CAP)")
    common.add_argument("--matrix-cap", type=int, help="max dense matrix dimension (env BBMIT_MATRIX_CAP)")
    common.add_argument("--failure-bound", type=float, default=0.01)
    common.add_argument("--no-timings", action="store_true", help="omit wall-clock timings from the report")

    parser = argparse.ArgumentParser(prog="bbmit", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("test-det", parents=[common], help="deterministic test on all generator tuples")
    p.add_argument("instance")

    p = sub.add_parser("test-rand", parents=[common], help="randomized subset-sum test")
    p.add_argument("instance")
    p.add_argument("--ell", type=int)
    p.add_argument("--trials", type=int)

    p = sub.add_parser("walk-search", parents=[common], help="classical lazy subset-walk search")
    p.add_argument("instance")
    p.add_argument("--ell", type=int)
    p.add_argument("--max-steps", type=int, default=10_000)

    p = sub.add_parser("lemmas", parents=[common], help="exhaustive coset / subsum / marked-fraction checks")
    p.add_argument("instance")
    p.add_argument("--ells", type=_int_list, help="comma-separated subset sizes (default 1..k-1)")

    p = sub.add_parser("spectral", parents=[common], help="Johnson-walk spectral gap table")
    p.add_argument("--k-max", type=int, default=12)
    p.add_argument("--k-min", type=int, default=2)

    p = sub.add_parser("cost", parents=[common], help="parameter optimization and cost curve")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--alpha", type=float)

    p = sub.add_parser("szegedy", parents=[common], help="dense Szegedy walk on J(k, ell)")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--ell", type=int, required=True)
    p.add_argument("--marked", type=_int_list, default=[1], help="1-based vertex indices in lexicographic order")
    p.add_argument("--epsilon", type=_fraction)
    p.add_argument("--c", type=float, default=4.0)
    p.add_argument("--gamma", type=float, default=0.1)

    p = sub.add_parser("reduce", parents=[common], help="compile a split-collision instance to matrix rings")
    p.add_argument("instance")
    p.add_argument("--instance-out", help="write the resulting identity-testing instance here")
    p.add_argument("--clash-rule", choices=("letter", "b"), default="letter")

    p = sub.add_parser("verify-reduction", parents=[common], help="compare the reduction with brute force")
    p.add_argument("instance")
    p.add_argument("--span", action="store_true", help="also evaluate on the full additive span")
    p.add_argument("--clash-rule", choices=("letter", "b"), default="letter")

    p = sub.add_parser("lift", parents=[common], help="random-partition lift of an m-collision table")
    p.add_argument("instance", nargs="?")
    p.add_argument("--k", type=int, default=12, help="planted table size when no instance is given")
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--repeats", type=int, default=1)
    p.add_argument("--instance-out", help="write the last lifted instance here")
    return parser


_GLOBAL = {"command", "seed", "fmt", "output", "span_cap", "enum_cap", "matrix_cap",
           "failure_bound", "no_timings", "instance"}


def config_from_args(ns: argparse.Namespace) -> ExperimentConfig:
    caps = {name: getattr(ns, name) if getattr(ns, name) is not None else _env_cap(name) for name in CAP_ENV}
    params = {k: v for k, v in vars(ns).items() if k not in _GLOBAL and v is not None}
    if ns.command == "lift" and ns.instance:
        params.pop("k", None)
        params.pop("m", None)
    inputs = (ns.instance,) if getattr(ns, "instance", None) else ()
    return ExperimentConfig(ns.command, inputs, ns.seed, fmt=ns.fmt, failure_bound=ns.failure_bound,
                            params=params, **caps)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        config = config_from_args(ns)
        report, code = run_command(config, timings=not ns.no_timings)
        data = emit_report(report, config.fmt)
        if ns.output:
            Path(ns.output).write_bytes(data)
        else:
            sys.stdout.buffer.write(data)
            sys.stdout.flush()
    except (BBMITError, OSError, ValueError) as e:
        print(f"bbmit {ns.command}: error: {e}", file=sys.stderr)
        return 2
    return code


if __name__ == "__main__":
    sys.exit(main())
