"""Command-line entry point.

Verbs: ``elect``, ``verify``, ``sample``, ``experiment``, ``query-sim``.
Machine-readable output goes to standard output, diagnostics to standard
error.  Exit codes: 0 success (axiom satisfied), 2 axiom violated (witness
as JSON on stdout), 1 usage or input errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from prvote import axioms, pb, pricing
from prvote.core import (
    Instance,
    ScaleGuardError,
    candidate_name,
    dump_instance,
    instance_from_dict,
    load_preflib,
    parse_committee,
)
from prvote.exactmath import parse_rational
from prvote.experiments import ExperimentConfig, run_experiment, write_csv
from prvote.query import (
    ExactQueryOracle,
    NoisyQueryOracle,
    exact_query_gjcr,
    noisy_gjcr,
)
from prvote.rules import RULES, TieBreak, pav_exact, stv
from prvote.sampling import (
    APPROVAL_MODELS,
    RANKING_MODELS,
    CultureSpec,
    sample_profile,
)

__all__ = ["main"]


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); usage errors are 1
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="prvote", description=__doc__)
    sub = parser.add_subparsers(dest="verb", required=True)

    elect = sub.add_parser("elect", help="run a voting rule on an instance")
    elect.add_argument(
        "--rule",
        required=True,
        choices=["gjcr", "ear", "mes", "stv", "pav", "ls-pav", "phragmen", "mes-pb"],
    )
    elect.add_argument("--input", required=True)
    elect.add_argument("--k", type=int, help="override the instance's committee size")
    elect.add_argument("--tiebreak", default="lex", help="'lex' or 'file:PATH'")
    elect.add_argument(
        "--elimination",
        choices=["lowest-support", "priority"],
        default="lowest-support",
        help="STV elimination policy",
    )
    elect.add_argument("--trace", action="store_true", help="emit a JSON trace")

    verify = sub.add_parser("verify", help="check an axiom for a committee")
    verify.add_argument(
        "--axiom",
        required=True,
        choices=sorted(axioms.CHECKERS)
        + ["representative", "priceable", "rank-priceable", "pb-ejr+", "pb-pjr+"],
    )
    verify.add_argument("--committee", required=True)
    verify.add_argument("--input", required=True)
    verify.add_argument("--k", type=int)
    verify.add_argument("--f-table", dest="f_table", help="JSON mapping ell -> value")
    verify.add_argument(
        "--strict-b",
        dest="strict_b",
        action="store_true",
        help="require a price system with budget strictly above k",
    )

    sample = sub.add_parser("sample", help="draw an instance from a culture")
    sample.add_argument(
        "--model", required=True, choices=APPROVAL_MODELS + RANKING_MODELS
    )
    sample.add_argument("--n", type=int, required=True)
    sample.add_argument("--m", type=int, required=True)
    sample.add_argument("--k", type=int, required=True)
    sample.add_argument("--seed", type=int, required=True)
    sample.add_argument("--p", type=float)
    sample.add_argument("--phi", type=float)
    sample.add_argument("--g", type=int)
    sample.add_argument("--alpha", type=float)
    sample.add_argument("--dim", type=int)
    sample.add_argument("--out", required=True, help="output path, '-' for stdout")

    experiment = sub.add_parser("experiment", help="run a culture-grid experiment")
    experiment.add_argument("--config", required=True)
    experiment.add_argument("--out", required=True, help="output directory")

    qsim = sub.add_parser("query-sim", help="simulate query-model elections")
    qsim.add_argument("--mode", required=True, choices=["exact", "noisy"])
    qsim.add_argument("--delta", type=float, default=0.1)
    qsim.add_argument("--trials", type=int, default=1)
    qsim.add_argument("--input", required=True)
    qsim.add_argument("--k", type=int)
    qsim.add_argument("--seed", type=int, default=0)
    return parser


def _load_input(path: str):
    """Instance JSON, PB JSON, or PrefLib file -> (instance, names, pb or None)."""
    if path.endswith((".soi", ".toi", ".soc", ".toc")):
        instance, names = load_preflib(path, k=1)
        return instance, names, None
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if "costs" in data:
        budget_instance = pb.pb_from_dict(data)
        k = int(data.get("k", 1))
        return Instance(budget_instance.profile, k), data.get("names"), budget_instance
    instance, names = instance_from_dict(data)
    return instance, names, None


def _with_k(instance: Instance, k) -> Instance:
    if k is None:
        return instance
    return Instance(instance.profile, k)


def _tiebreak(spec: str, m: int) -> TieBreak:
    if spec == "lex":
        return TieBreak.lex()
    if spec.startswith("file:"):
        order = json.loads(Path(spec[5:]).read_text())
        return TieBreak(order, m=m)
    raise _UsageError(f"unknown tiebreak {spec!r}")


def _committee_names(committee, names) -> str:
    return ",".join(candidate_name(c, names) for c in sorted(committee))


def _cmd_elect(args) -> int:
    instance, names, budget_instance = _load_input(args.input)
    instance = _with_k(instance, args.k)
    tiebreak = _tiebreak(args.tiebreak, instance.m)
    if args.rule == "mes-pb":
        if budget_instance is None:
            raise _UsageError("--rule mes-pb needs a budgeting instance (costs)")
        result = pb.mes_pb(budget_instance, tiebreak)
    elif args.rule == "pav":
        optima = pav_exact(instance)
        if args.trace:
            print(
                json.dumps(
                    {
                        "rule": "pav",
                        "committee": sorted(optima[0]),
                        "optima": [sorted(w) for w in optima],
                    }
                )
            )
        else:
            print(_committee_names(optima[0], names))
        return 0
    elif args.rule == "stv":
        result = stv(instance, tiebreak, elimination=args.elimination)
    else:
        result = RULES[args.rule](instance, tiebreak)
    if args.trace:
        print(
            json.dumps(
                {
                    "rule": result.rule,
                    "committee": sorted(result.committee),
                    "trace": result.trace_dicts(),
                }
            )
        )
    else:
        print(_committee_names(result.committee, names))
    return 0


def _cmd_verify(args) -> int:
    instance, names, budget_instance = _load_input(args.input)
    instance = _with_k(instance, args.k)
    committee = parse_committee(args.committee, instance.m, names)

    if args.axiom in ("pb-ejr+", "pb-pjr+"):
        if budget_instance is None:
            raise _UsageError("budgeting axioms need a budgeting instance (costs)")
        check = (
            pb.check_pb_ejr_plus_upto
            if args.axiom == "pb-ejr+"
            else pb.check_pb_pjr_plus_upto
        )
        witness = check(budget_instance, committee)
        if witness is None:
            print(json.dumps({"axiom": args.axiom, "satisfied": True}))
            return 0
        print(
            json.dumps(
                {
                    "axiom": args.axiom,
                    "satisfied": False,
                    "witness": witness.to_dict(names),
                }
            )
        )
        return 2

    if args.axiom in ("priceable", "rank-priceable"):
        check = (
            pricing.check_priceable
            if args.axiom == "priceable"
            else pricing.check_rank_priceable
        )
        system = check(instance, committee, require_budget_above_k=args.strict_b)
        if system is None:
            print(json.dumps({"axiom": args.axiom, "satisfied": False}))
            return 2
        print(
            json.dumps(
                {
                    "axiom": args.axiom,
                    "satisfied": True,
                    "price_system": system.to_dict(names),
                }
            )
        )
        return 0

    if args.axiom == "representative":
        if not args.f_table:
            raise _UsageError("--axiom representative needs --f-table")
        raw = json.loads(Path(args.f_table).read_text())
        table = {int(ell): parse_rational(value) for ell, value in raw.items()}
        witness = axioms.check_representative(instance, committee, table)
    else:
        witness = axioms.CHECKERS[args.axiom](instance, committee)

    if witness is None:
        print(json.dumps({"axiom": args.axiom, "satisfied": True}))
        return 0
    print(
        json.dumps(
            {
                "axiom": args.axiom,
                "satisfied": False,
                "witness": witness.to_dict(names),
            }
        )
    )
    return 2


def _cmd_sample(args) -> int:
    spec = CultureSpec(
        args.model,
        n=args.n,
        m=args.m,
        seed=args.seed,
        p=args.p,
        phi=args.phi,
        g=args.g,
        alpha=args.alpha,
        dim=args.dim,
    )
    instance = Instance(sample_profile(spec), args.k)
    if args.out == "-":
        from prvote.core import instance_to_dict

        json.dump(instance_to_dict(instance), sys.stdout, indent=1)
        print()
    else:
        dump_instance(instance, args.out)
        print(args.out)
    return 0


def _cmd_experiment(args) -> int:
    config = ExperimentConfig.from_toml(args.config)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    def progress(done, total):
        print(f"grid point {done}/{total}", file=sys.stderr)

    rows = run_experiment(config, progress=progress)
    out_path = out_dir / "results.csv"
    write_csv(rows, out_path)
    print(str(out_path))
    return 0


def _cmd_query_sim(args) -> int:
    instance, _names, _pb = _load_input(args.input)
    instance = _with_k(instance, args.k)
    writer = csv.writer(sys.stdout)
    writer.writerow(["trial", "committee", "ejr_plus", "queries"])
    for trial in range(args.trials):
        if args.mode == "exact":
            oracle = ExactQueryOracle(instance.profile)
            committee, ledger = exact_query_gjcr(oracle, instance.k)
        else:
            rng = np.random.default_rng((args.seed, trial))
            oracle = NoisyQueryOracle(instance.profile, rng)
            committee, ledger = noisy_gjcr(oracle, instance.k, args.delta)
        verdict = axioms.check_ejr_plus(instance, committee) is None
        writer.writerow(
            [
                trial,
                " ".join(str(c) for c in sorted(committee)),
                int(verdict),
                ledger.total,
            ]
        )
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        handler = {
            "elect": _cmd_elect,
            "verify": _cmd_verify,
            "sample": _cmd_sample,
            "experiment": _cmd_experiment,
            "query-sim": _cmd_query_sim,
        }[args.verb]
        return handler(args)
    except _UsageError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except (OSError, json.JSONDecodeError, ValueError, ScaleGuardError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
