"""Command-line front end.

Exit codes: 0 success/verified, 1 a check failed, 2 input error,
3 undecidable under the symbol bounds.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Sequence

from .derivation import DerivationReport, check_hypotheses, reconstruct
from .errors import ConsistencyError, InputError, UndecidableError
from .golden import GOLDEN, run_golden
from .harness import CHECKS, SweepConfig, profiles_up_to, run_sweep
from .lattice import (
    KAPPA,
    P,
    Coeff,
    EmbeddingSet,
    SymbolContext,
    Tri,
    Weight,
    format_coeff,
    make_embedding_set,
    parse_coeff,
    vec_strs,
)
from .operators import CONDITION_3, reduce_to_min_cone

FORMAT_ENV = "HMFWEIGHTS_FORMAT"
EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_UNDECIDABLE = 0, 1, 2, 3


def _is_prime(n: int) -> bool:
    return n >= 2 and all(n % r for r in range(2, int(n**0.5) + 1))


def parse_prime(spec: str) -> tuple[int | None, int]:
    """``5`` -> (5, _); ``sym`` or ``sym:pmin=3`` -> (None, pmin)."""
    spec = spec.strip()
    if spec.startswith("sym"):
        pmin = 2
        rest = spec[3:].lstrip(":")
        if rest:
            key, _, val = rest.partition("=")
            if key.strip() != "pmin" or not val.strip().lstrip("-").isdigit():
                raise InputError(f"bad symbolic prime spec {spec!r}")
            pmin = int(val)
        return None, pmin
    try:
        p = int(spec)
    except ValueError:
        raise InputError(f"bad prime {spec!r}") from None
    if not _is_prime(p):
        raise InputError(f"{p} is not prime")
    return p, p


def parse_int_list(text: str, what: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise InputError(f"bad {what} list {text!r}") from None


def build_inputs(args: argparse.Namespace) -> tuple[EmbeddingSet, Weight, Coeff]:
    p_value, pmin = parse_prime(args.p)
    E = make_embedding_set(parse_int_list(args.orbits, "orbit degree"))
    texts = [t for t in args.k.split(",")]
    ltexts = args.l.split(",") if args.l else None
    all_text = " ".join(texts + (ltexts or [])).replace("kappa", KAPPA)
    bounds = {}
    if p_value is None:
        bounds[P] = pmin
    elif "p" in all_text:
        raise InputError("symbol p used with a concrete prime; use --p sym:pmin=N")
    if KAPPA in all_text:
        if args.kappa_min is None:
            raise InputError("κ entries need --kappa-min")
        bounds[KAPPA] = args.kappa_min
    ctx = SymbolContext(tuple(bounds.items())) if bounds else None
    k = [parse_coeff(t, ctx) for t in texts]
    l = [parse_coeff(t, ctx) for t in ltexts] if ltexts else None
    if len(k) != E.d or (l is not None and len(l) != E.d):
        raise InputError(f"vectors must have {E.d} entries (sum of orbit degrees)")
    p = ctx.sym(P) if p_value is None else p_value
    return E, Weight.of(E, k, l), p


# --------------------------------------------------------------------------
# Output
# --------------------------------------------------------------------------


def _dump_json(obj) -> str:
    return json.dumps(obj, ensure_ascii=False, sort_keys=True, indent=2)


def _flatten(obj, prefix: str = "") -> list[tuple[str, str]]:
    if isinstance(obj, dict):
        out = []
        for key in sorted(obj):
            out += _flatten(obj[key], f"{prefix}.{key}" if prefix else str(key))
        return out
    if isinstance(obj, list) and any(isinstance(x, (dict, list)) for x in obj):
        out = []
        for i, x in enumerate(obj):
            out += _flatten(x, f"{prefix}[{i}]")
        return out
    if isinstance(obj, list):
        return [(prefix, ",".join(str(x) for x in obj))]
    return [(prefix, "" if obj is None else str(obj))]


def _pretty_report(data: dict) -> str:
    lines = []
    tup = lambda v: "(" + ",".join(v) + ")" if v is not None else "-"  # noqa: E731
    lbl = lambda ts: "{" + ", ".join(f"τ_{t[1]}" if len(data["degrees"]) == 1 else f"τ_{{{t[0]},{t[1]}}}" for t in ts) + "}"  # noqa: E731
    lines.append(f"input      k={tup(data['input']['k'])}  l={tup(data['input']['l'])}  p={data['p']}  degrees={data['degrees']}")
    if data.get("M") is not None:
        lines.append(f"M          {lbl(data['M'])}")
        lines.append(f"M̃          {lbl(data['Mtilde'])}")
        lines.append(f"k′         {tup(data['kprime']['k'])}")
        for m in data["kmu"]:
            lines.append(f"k^μ  {lbl([m['mu']]):6} ({tup(m['k'])}, {tup(m['l'])})")
    for name, verdict in data["hypotheses"].items():
        lines.append(f"hypothesis {name:14} {verdict}")
    if data.get("kdoubleprime") is not None:
        lines.append(f"k″         {tup(data['kdoubleprime'])}")
    for c in data.get("cases", []):
        extra = "" if c.get("literal", True) else " (successor 2)"
        lines.append(f"case       {c['label']}: ({c['case']}) s={c['s']} t={c['t']}{extra}")
    for step in data.get("chain", []):
        lines.append(f"divide     {step['label']:8} {step['justification']}")
    lines.append(f"final      {tup(data['final'])}")
    lines.append(f"verdict    {data['verdict']}")
    for n in data.get("notes", []):
        lines.append(f"note       {n}")
    return "\n".join(lines)


def emit(data: dict, fmt: str, pretty=None) -> None:
    if fmt == "json":
        print(_dump_json(data))
    elif fmt == "tsv":
        for key, value in _flatten(data):
            print(f"{key}\t{value}")
    else:
        print(pretty(data) if pretty else "\n".join(f"{k}: {v}" for k, v in _flatten(data)))


def _report_exit(report: DerivationReport) -> int:
    if report.verdict == "undecidable":
        return EXIT_UNDECIDABLE
    if report.verdict != "verified" or not all(report.identities.values()):
        return EXIT_FAIL
    return EXIT_OK


# --------------------------------------------------------------------------
# Commands
# --------------------------------------------------------------------------


def cmd_derive(args: argparse.Namespace) -> int:
    _, w, p = build_inputs(args)
    assumptions = {CONDITION_3} if args.assume_condition_3 else set()
    report = reconstruct(w, p, assumptions)
    emit(report.to_json(), args.format, _pretty_report)
    return _report_exit(report)


def cmd_check(args: argparse.Namespace) -> int:
    _, w, p = build_inputs(args)
    hyp = check_hypotheses(w, p, {CONDITION_3} if args.assume_condition_3 else set())
    data = {"hypotheses": hyp.to_json(), "failed": hyp.failed, "undecided": hyp.undecided, "admissible": hyp.admissible}
    emit(data, args.format)
    if hyp.failed:
        return EXIT_FAIL
    return EXIT_OK if hyp.admissible else EXIT_UNDECIDABLE


def cmd_reduce(args: argparse.Namespace) -> int:
    E, w, p = build_inputs(args)
    red = reduce_to_min_cone(E, w.k, p)
    data = {"input": vec_strs(w.k), "p": format_coeff(p), **red.to_json(E)}
    data["chain_labels"] = [E.label(t) for t in red.chain]
    if args.format == "pretty":
        print(f"final    ({','.join(data['final'])})")
        print(f"chain    {', '.join(data['chain_labels']) or '-'}")
        for step, lab in zip(data["steps"], data["chain_labels"]):
            print(f"  {lab:8} at ({','.join(step['at'])})  p·k_τ < k_next: {step['dk']}")
        print(f"in cone  {data['in_cone']}")
    else:
        emit(data, args.format)
    return EXIT_OK if red.in_cone is Tri.ALWAYS else EXIT_UNDECIDABLE


def cmd_sweep(args: argparse.Namespace) -> int:
    primes = tuple(parse_int_list(args.p, "prime"))
    if args.cap == "auto":
        cap = None
    else:
        try:
            cap = int(args.cap)
        except ValueError:
            raise InputError(f"bad --cap {args.cap!r}") from None
    checks = tuple(c for c in args.checks.split(",") if c) if args.checks is not None else CHECKS
    cfg = SweepConfig(
        profiles=tuple(profiles_up_to(args.max_d)),
        primes=primes,
        cap=cap,
        admissible_only=args.admissible_only,
        checks=checks,
        trials=args.trials,
        seed=args.seed,
        workers=args.workers,
    )
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        cex_path = out / "counterexamples.jsonl"
        result = run_sweep(cfg, cex_path)
        summary = result.summary()
        (out / "summary.json").write_text(_dump_json(summary) + "\n", encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot write sweep output to {out}: {exc}") from None
    summary.pop("seconds")
    emit(summary, args.format)
    return EXIT_OK if result.failed == 0 and not result.counterexamples else EXIT_FAIL


def cmd_example(args: argparse.Namespace) -> int:
    if args.name not in GOLDEN:
        raise InputError(f"unknown example {args.name!r}; choose from {sorted(GOLDEN)}")
    report, diffs = run_golden(args.name)
    data = report.to_json()
    data["golden_diffs"] = diffs
    emit(data, args.format, _pretty_report)
    return EXIT_FAIL if diffs else _report_exit(report)


def _add_weight_args(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--p", required=True, help="prime, e.g. 5, or symbolic: sym:pmin=2")
    sp.add_argument("--orbits", required=True, help="residue degrees, e.g. 3 or 2,3")
    sp.add_argument("--k", required=True, help="comma-separated entries, e.g. 1,1,κ or 0,p+1,κ")
    sp.add_argument("--l", help="optional l vector (default zero)")
    sp.add_argument("--kappa-min", type=int, help="lower bound for the symbol κ")
    sp.add_argument("--assume-condition-3", action="store_true", help="declare condition (3) as an assumption")


def build_parser() -> argparse.ArgumentParser:
    default_fmt = os.environ.get(FORMAT_ENV, "json")
    parser = argparse.ArgumentParser(prog="hmfweights", description=__doc__.splitlines()[0])
    parser.add_argument("--format", choices=("json", "tsv", "pretty"), default=default_fmt)
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("derive", help="derive k′, k^μ and replay the reconstruction")
    _add_weight_args(sp)
    sp.set_defaults(func=cmd_derive)

    sp = sub.add_parser("check", help="evaluate the weight-level hypotheses")
    _add_weight_args(sp)
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("reduce", help="greedy reduction into the minimal cone")
    _add_weight_args(sp)
    sp.set_defaults(func=cmd_reduce)

    sp = sub.add_parser("sweep", help="exhaustive verification sweep")
    sp.add_argument("--p", default="2,3,5,7", help="comma-separated primes")
    sp.add_argument("--max-d", type=int, default=3)
    sp.add_argument("--cap", default="auto", help="entry cap, or 'auto' for p+2")
    sp.add_argument("--checks", help=f"comma-separated subset of {','.join(CHECKS)} (empty: counts only)")
    sp.add_argument("--trials", type=int, default=20, help="random order policies per confluence check")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--admissible-only", action="store_true", help="skip forward checks on filtered weights")
    sp.add_argument("--out", default="sweep-out", help="directory for summary.json and counterexamples.jsonl")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("example", help="run a built-in weight against its stored values")
    sp.add_argument("name", help=", ".join(GOLDEN))
    sp.set_defaults(func=cmd_example)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    # subcommand options may also carry --format after the subcommand name
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except UndecidableError as exc:
        print(f"undecidable: {exc}", file=sys.stderr)
        return EXIT_UNDECIDABLE
    except ConsistencyError as exc:
        print(f"internal consistency error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
