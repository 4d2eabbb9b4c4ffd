"""Command line entry point: ``satstream <command> ...``."""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .cnf import CONJUNCTIVE, ClauseStream
from .evaluation import to_bitstring
from .exceptions import SatStreamError
from .hardness import (
    HardnessConfig,
    exact_maxand,
    gen_Sk,
    gen_ksat_index,
    gen_maxand_index,
    gen_minsat_index,
    random_ksat_instance,
    random_maxand_instance,
    random_minsat_instance,
    sidecar,
)
from .harness import ExperimentConfig, random_dynamic_instance, random_instance, run_experiment
from .maxsat import StreamingMaxSAT
from .minsat import StreamingMinSAT
from .oracle import exact_maxsat, exact_minsat
from .validation import check_stream


def _emit(obj):
    print(json.dumps(obj, sort_keys=True))


def _ratio(value, opt, maximize=True):
    if opt is None:
        return None
    if maximize:
        return 1.0 if opt == 0 else value / opt
    return value / max(opt, 1)


def cmd_maxsat(args):
    stream = check_stream(args.stream, strict=args.strict)
    est = StreamingMaxSAT(mode=args.mode, eps=args.eps, K=args.K,
                          dynamic=True if args.dynamic else None, strict=args.strict,
                          budget_words=args.budget_words, delta=args.delta,
                          one_literal=args.one_literal, random_state=args.seed).fit(stream)
    final = stream.final_clauses()
    value = est.score(final)
    opt = exact_maxsat(final, stream.n)[1] if args.oracle else None
    _emit({
        "assignment": to_bitstring(est.assignment_),
        "satisfied": value,
        "satisfied_on_sample": est.satisfied_on_sample_,
        "estimate": est.estimate_,
        "estimate_conservative": est.estimate_conservative_,
        "opt": opt,
        "ratio": _ratio(value, opt),
        "space_words": est.space_.words_stored_peak,
        "space": est.space_.to_dict(),
        "branch_taken": est.branch_,
        "config": est.config_.to_dict(),
    })
    return 0


def cmd_minsat(args):
    stream = check_stream(args.stream)
    est = StreamingMinSAT(algo=args.algo, eps=args.eps, K=args.K, offline=args.offline, f=args.f,
                          u=args.u, oracle=not args.pure, delta=args.delta,
                          random_state=args.seed).fit(stream)
    final = stream.final_clauses()
    value = est.score(final)
    opt = exact_minsat(final, stream.n)[1] if args.oracle else None
    res = est.result_
    _emit({
        "assignment": to_bitstring(est.assignment_),
        "satisfied": value,
        "value_reported": est.value_,
        "opt": opt,
        "ratio": _ratio(value, opt, maximize=False),
        "space_words": est.space_.words_stored_peak,
        "space": est.space_.to_dict(),
        "guesses_run": res.guesses_run,
        "guesses_terminated": res.guesses_terminated,
        "settled_count": res.settled_count,
        "chosen_z": res.chosen_z,
        "opt_zero_detected": res.opt_zero,
    })
    return 0


def cmd_gen(args):
    rng = np.random.default_rng(args.seed)
    fam = args.family
    cfg = HardnessConfig(n=args.n, k=args.k, m=args.m, T=args.T, seed=args.seed)
    inst = None
    header_n = args.n
    if fam == "sk":
        clauses = gen_Sk(args.k)
        header_n = args.k
    elif fam == "ksat":
        cfg.check_ksat()
        inst = random_ksat_instance(cfg, rng)
        clauses = gen_ksat_index(inst, cfg)
    elif fam == "maxand":
        inst = random_maxand_instance(cfg, rng)
        clauses = gen_maxand_index(inst, cfg)
        header_n = args.n + cfg.T
    elif fam == "minsat":
        inst = random_minsat_instance(args.n, rng)
        clauses = gen_minsat_index(inst, args.n)
    else:
        if args.dynamic:
            stream = random_dynamic_instance(args.n, args.m, args.delete_frac,
                                             (args.min_size, args.max_size), args.seed)
        else:
            stream = random_instance(args.n, args.m, (args.min_size, args.max_size), args.seed)
        return _write(stream, None, args)
    kind = CONJUNCTIVE if fam == "maxand" else None
    stream = ClauseStream.from_clauses(clauses, n=header_n, kind=kind)
    return _write(stream, sidecar(fam, inst, cfg, len(clauses)), args)


def _write(stream, side, args):
    if args.out:
        stream.write(args.out)
        if side is not None:
            with open(args.out + ".json", "w") as fh:
                fh.write(side + "\n")
    else:
        sys.stdout.write(stream.render())
        if side is not None:
            print(side, file=sys.stderr)
    return 0


def cmd_run(args):
    report = run_experiment(ExperimentConfig.load(args.config))
    text = report.to_jsonl()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    sys.stdout.write(text)
    return 0 if report.passed else 1


def cmd_oracle(args):
    stream = check_stream(args.stream)
    final = stream.final_clauses()
    if args.problem == "maxsat":
        a, v = exact_maxsat(final, stream.n)
    elif args.problem == "minsat":
        a, v = exact_minsat(final, stream.n)
    else:
        a, v = exact_maxand(final, stream.n)
    _emit({"problem": args.problem, "opt": int(v), "assignment": to_bitstring(a), "m": len(final)})
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="satstream", description="Streaming Max-SAT / Min-SAT toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    mx = sub.add_parser("maxsat", help="one-pass Max-SAT on a stream file")
    mx.add_argument("stream")
    mx.add_argument("--mode", choices=["exact", "lp"], default="exact")
    mx.add_argument("--eps", type=float, default=0.15)
    mx.add_argument("--K", type=float, default=4.0)
    mx.add_argument("--seed", type=int, default=0)
    mx.add_argument("--dynamic", action="store_true", help="use L0 samplers even for a static header")
    mx.add_argument("--budget-words", type=int, default=None)
    mx.add_argument("--delta", type=float, default=1e-3)
    mx.add_argument("--one-literal", action="store_true")
    mx.add_argument("--permissive", dest="strict", action="store_false",
                    help="allow re-inserting live clauses in dynamic streams")
    mx.add_argument("--oracle", action="store_true", help="also report the exact optimum")
    mx.set_defaults(func=cmd_maxsat)

    mn = sub.add_parser("minsat", help="one-pass Min-SAT on a stream file")
    mn.add_argument("stream")
    mn.add_argument("--algo", choices=["settled", "freq", "f0"], default="settled")
    mn.add_argument("--eps", type=float, default=0.15)
    mn.add_argument("--K", type=float, default=4.0)
    mn.add_argument("--offline", choices=["exact", "kohli"], default="exact")
    mn.add_argument("--f", type=int, default=None)
    mn.add_argument("--u", type=int, default=None)
    mn.add_argument("--seed", type=int, default=0)
    mn.add_argument("--delta", type=float, default=1e-3)
    mn.add_argument("--pure", action="store_true", help="pick among guesses by scaled estimates only")
    mn.add_argument("--oracle", action="store_true", help="also report the exact optimum")
    mn.set_defaults(func=cmd_minsat)

    g = sub.add_parser("gen", help="generate a hard or random instance")
    g.add_argument("family", choices=["ksat", "maxand", "minsat", "sk", "random"])
    g.add_argument("--n", type=int, default=9)
    g.add_argument("--k", type=int, default=3)
    g.add_argument("--m", type=int, default=16)
    g.add_argument("--T", type=int, default=None)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--min-size", type=int, default=1)
    g.add_argument("--max-size", type=int, default=3)
    g.add_argument("--dynamic", action="store_true")
    g.add_argument("--delete-frac", type=float, default=0.3)
    g.add_argument("--out", default=None)
    g.set_defaults(func=cmd_gen)

    r = sub.add_parser("run", help="run an experiment file, print JSON lines")
    r.add_argument("config")
    r.add_argument("--out", default=None)
    r.set_defaults(func=cmd_run)

    o = sub.add_parser("oracle", help="exact optimum by exhaustive search")
    o.add_argument("problem", choices=["maxsat", "minsat", "maxand"])
    o.add_argument("stream")
    o.set_defaults(func=cmd_oracle)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (SatStreamError, OSError) as exc:
        print(f"satstream: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
