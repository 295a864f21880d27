"""Command line entry point: gen, inspect, simulate, recurse, sweep, verify."""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path

from .errors import ConfigError, GenerationError, GraphError, LocalMajorityError, OddDegreeSumError, ScopeError
from .generators import DEFAULT_MAX_ATTEMPTS, GenSpec, generate, gnp_probability
from .graph import degree_profile, format_edge_list, read_edge_list, write_edge_list
from .harness import ENV_OUTPUT, ENV_SEED, emit_report, load_config, sweep_alpha
from .protocol import MMP, MP, mmp_scope, run
from .structure import DEFAULT_B, DEFAULT_C, DEFAULT_EPS, DEFAULT_EPS1, DEFAULT_ETA, check_regular_typicality, check_typicality, thresholds
from .tape import RandomnessTape
from .theory import check_condition, recursion_trace

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2
EXIT_GENERATION = 3
EXIT_ASSERTION = 4
EXIT_INPUT = 5

log = logging.getLogger("localmajority")


def _default_seed() -> int:
    raw = os.environ.get(ENV_SEED)
    try:
        return int(raw) if raw else 0
    except ValueError:
        raise ConfigError(f"{ENV_SEED} must be an integer, got {raw!r}") from None


def _output_path(arg: str | None, default_name: str) -> Path | None:
    """None means stdout."""
    if arg == "-":
        return None
    if arg:
        return Path(arg)
    base = os.environ.get(ENV_OUTPUT)
    return Path(base) / default_name if base else None


def _emit(text: str, path: Path | None):
    if path is None:
        sys.stdout.write(text)
    else:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
        log.info("wrote %s", path)


def _int_list(raw: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in raw.replace(",", " ").split())
    except ValueError:
        raise ConfigError(f"expected a list of integers, got {raw!r}") from None


# ---------------------------------------------------------------- commands

def cmd_gen(args) -> int:
    seed = args.seed if args.seed is not None else _default_seed()
    p = args.p
    if args.family == "gnp" and p is None:
        if args.c is None or args.n is None:
            raise ConfigError("gnp needs --p or --c together with --n")
        p = gnp_probability(args.n, args.c)
    degrees = None
    if args.degrees:
        text = Path(args.degrees[1:]).read_text() if args.degrees.startswith("@") else args.degrees
        degrees = _int_list(text)
    spec = GenSpec(args.family, seed=seed, degrees=degrees, n=args.n, d=args.d, p=p,
                   max_attempts=args.max_attempts, require_connected=not args.allow_disconnected)
    g = generate(spec)
    out = _output_path(args.output, f"graph-{args.family}-{seed}.txt")
    if out is None:
        sys.stdout.write(format_edge_list(g))
    else:
        out.parent.mkdir(parents=True, exist_ok=True)
        write_edge_list(g, out)
    log.info("generated n=%d m=%d", g.n, g.m)
    return EXIT_OK


def cmd_inspect(args) -> int:
    g = read_edge_list(args.graph)
    prof = degree_profile(g, args.c, args.kappa_min)
    d = args.d if args.d is not None else prof.effective_degree
    t = thresholds(g.n, max(d, 5), max(2.0, 2 * g.m / g.n) if g.n else 2.0,
                   C=args.C, B=args.B, eps1=args.eps1, eps=args.eps)
    report = check_typicality(g, t, prof, eta=args.eta)
    doc = report.as_dict()
    if args.regular or prof.min_degree == prof.max_degree:
        fv = check_regular_typicality(g, t.L1)
        doc["verdicts"]["f"] = fv.passed
        doc["witnesses"]["f"] = [fv.witness.as_dict()] if fv.witness else []
        doc["regular"] = {"limit": fv.limit}
    doc["profile"] = prof.as_dict()
    _emit(json.dumps(doc, indent=2, sort_keys=True) + "\n", _output_path(args.output, "typicality.json"))
    return EXIT_OK


def cmd_simulate(args) -> int:
    g = read_edge_list(args.graph)
    seed = args.seed if args.seed is not None else _default_seed()
    if args.protocol == "mp":
        protocol = MP(args.k)
    else:
        protocol = MMP(args.k, mmp_scope(g, args.root, args.radius))
    r = run(g, protocol, args.alpha, RandomnessTape(seed), args.max_rounds)
    doc = {
        "protocol": r.protocol, "alpha": r.alpha, "seed": seed, "n": g.n,
        "consensus_time": r.consensus_time, "consensus_colour": r.consensus_colour,
        "majority_correct": r.majority_correct, "initial_majority": r.initial_majority,
        "red_counts": list(r.red_counts),
    }
    _emit(json.dumps(doc, indent=2) + "\n", _output_path(args.output, f"run-{seed}.json"))
    return EXIT_OK


def cmd_recurse(args) -> int:
    nu = (args.d - 1) // 2
    cond = check_condition(args.alpha, args.d, args.beta)
    tr = recursion_trace(args.alpha, nu, args.T)
    rows = [("t", "p_t", "bound_t", "dominated")]
    rows += [(t, repr(p), repr(b), str(ok).lower()) for t, p, b, ok in tr.rows()]
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    _emit(buf.getvalue(), _output_path(args.output, "recursion.csv"))
    print(f"condition lhs={cond.lhs:.6g} beta={cond.beta} satisfied={cond.satisfied} "
          f"alpha_max={cond.alpha_max}", file=sys.stderr)
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = replace(cfg, master_seed=args.seed)
    out_dir = Path(args.output_dir or cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    curve = sweep_alpha(cfg)
    emit_report(curve.report, "csv", out_dir / "report.csv")
    emit_report(curve.report, "json", out_dir / "report.json")
    lines = ["alpha,fraction_correct,runs"] + [f"{a!r},{f!r},{r}" for a, f, r in curve.rows()]
    (out_dir / "curve.csv").write_text("\n".join(lines) + "\n")
    print(f"config hash {cfg.config_hash}; alpha_max={curve.alpha_max}; wrote {out_dir}")
    for a, f, r in curve.rows():
        print(f"  alpha={a:<8g} correct={f:.3f} ({r} runs)")
    return EXIT_OK


def cmd_verify(args) -> int:
    from .acceptance import CRITERIA, run_all
    numbers = sorted(_int_list(args.only)) if args.only else sorted(CRITERIA)
    unknown = [i for i in numbers if i not in CRITERIA]
    if unknown:
        raise ConfigError(f"unknown criteria {unknown}")
    results = run_all(numbers, echo=lambda s: print(s, flush=True))
    failed = [r.number for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed"
          + (f"; failing: {failed}" if failed else ""))
    return EXIT_ASSERTION if failed else EXIT_OK


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="localmajority", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="sample a graph and write it as an edge list")
    g.add_argument("--family", required=True, choices=("degree-sequence", "regular", "gnp"))
    g.add_argument("--n", type=int)
    g.add_argument("--d", type=int)
    g.add_argument("--p", type=float)
    g.add_argument("--c", type=float, help="gnp: p = c log n / n")
    g.add_argument("--degrees", help="comma separated list, or @file")
    g.add_argument("--seed", type=int)
    g.add_argument("--max-attempts", type=int, default=DEFAULT_MAX_ATTEMPTS)
    g.add_argument("--allow-disconnected", action="store_true")
    g.add_argument("-o", "--output", help="output path, '-' for stdout")
    g.set_defaults(func=cmd_gen)

    i = sub.add_parser("inspect", help="typicality audit of an edge-list file, as JSON")
    i.add_argument("graph")
    i.add_argument("--d", type=int, help="degree for the thresholds (default: effective minimum degree)")
    i.add_argument("--C", type=float, default=DEFAULT_C)
    i.add_argument("--B", type=float, default=DEFAULT_B)
    i.add_argument("--eps1", type=float, default=DEFAULT_EPS1)
    i.add_argument("--eps", type=float, default=DEFAULT_EPS)
    i.add_argument("--eta", type=float, default=DEFAULT_ETA)
    i.add_argument("--c", type=float, default=0.1)
    i.add_argument("--kappa-min", type=float, default=0.25)
    i.add_argument("--regular", action="store_true", help="also evaluate (f); automatic for regular graphs")
    i.add_argument("-o", "--output")
    i.set_defaults(func=cmd_inspect)

    s = sub.add_parser("simulate", help="run MP or MMP once and emit a JSON run record")
    s.add_argument("graph")
    s.add_argument("--protocol", choices=("mp", "mmp"), default="mp")
    s.add_argument("--k", type=int, default=5)
    s.add_argument("--alpha", type=float, required=True)
    s.add_argument("--seed", type=int)
    s.add_argument("--max-rounds", type=int)
    s.add_argument("--root", type=int, default=0)
    s.add_argument("--radius", type=int, default=1)
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_simulate)

    r = sub.add_parser("recurse", help="red-probability recursion against its closed-form bound, as CSV")
    r.add_argument("--alpha", type=float, required=True)
    r.add_argument("--d", type=int, required=True)
    r.add_argument("--beta", type=float, default=0.99)
    r.add_argument("--T", type=int, default=20)
    r.add_argument("-o", "--output")
    r.set_defaults(func=cmd_recurse)

    w = sub.add_parser("sweep", help="alpha sweep campaign from a key = value config file")
    w.add_argument("config")
    w.add_argument("--seed", type=int, help="master seed (overrides file and environment)")
    w.add_argument("--output-dir")
    w.set_defaults(func=cmd_sweep)

    v = sub.add_parser("verify", help="run the acceptance criteria")
    v.add_argument("--only", help="comma separated criterion numbers")
    v.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except OddDegreeSumError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except GenerationError as exc:
        print(f"generation failed: {exc}", file=sys.stderr)
        return EXIT_GENERATION
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (GraphError, ScopeError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ValueError, LocalMajorityError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
