"""Command-line front end: ``fibbraid {gates,eval,compile,survey,classify-matrix}``.

Data goes to stdout or files; diagnostics go to stderr. Exit status is 0 on
success, 1 on a domain error (bad word, budget refusal, malformed matrix) and
2 on a usage error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .anyon_core import (Alphabet, BraidParseError, GeneratorToken, MatrixParseError,
                         evaluate_braid, format_matrix, generator_matrix, parse_braid_string,
                         parse_matrix)
from .braid_search import (DEFAULT_BUDGET, BudgetExceededError, Objective, SearchConfig,
                           SearchMode, SearchResult, partition_search)
from .gate_metrics import (CNOT_TARGET, DEFAULT_LEAKAGE_THRESHOLD, DEFAULT_UNITARITY_THRESHOLD,
                           TargetGate, decompose, distance_to_gate, unitarity_measure)
from .local_invariants import (DegenerateBlockError, closest_class, get_class, invariants_u4)
from .results_io import TableKind, emit_weyl_points, write_table


def _f(x: float) -> str:
    return format(float(x) + 0.0, ".17g")


def parse_lengths(text: str) -> tuple[int, int]:
    """``"9"`` -> (9, 9); ``"3..7"`` or ``"3-7"`` -> (3, 7)."""
    for sep in ("..", "-", ":"):
        if sep in text:
            lo, hi = text.split(sep, 1)
            return int(lo), int(hi)
    n = int(text)
    return n, n


def _lengths_arg(text: str) -> tuple[int, int]:
    try:
        lo, hi = parse_lengths(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid length range {text!r}") from None
    if lo < 1 or hi < lo:
        raise argparse.ArgumentTypeError(f"invalid length range {text!r}")
    return lo, hi


def _block_report(a: np.ndarray, out) -> None:
    print(f"d_unitary: {_f(unitarity_measure(a))}", file=out)
    try:
        inv = invariants_u4(a)
    except DegenerateBlockError as exc:
        print(f"invariants: unavailable ({exc})", file=out)
        return
    print(f"invariants: g1={_f(inv.g1)} g2={_f(inv.g2)} g3={_f(inv.g3)} "
          f"im_g3={_f(inv.g3_imag_residual)}", file=out)
    cls, d = closest_class(inv)
    print(f"closest_class: {cls.name} distance={_f(d)}", file=out)


def cmd_gates(args, out) -> int:
    for digit in range(10):
        tok = GeneratorToken.from_digit(digit)
        m = generator_matrix(tok)
        print(f"# digit {digit}: {tok}", file=out)
        out.write(format_matrix(m))
        block = decompose(m)
        print(f"m11_norm: {_f(abs(block.m11))}", file=out)
        _block_report(block.a_block, out)
        print(file=out)
    return 0


def cmd_eval(args, out) -> int:
    word = parse_braid_string(args.word, args.alphabet)
    m = evaluate_braid(word)
    block = decompose(m)
    print(f"operator: {args.word}", file=out)
    print(f"length: {len(word)}", file=out)
    print(f"m11_norm: {_f(abs(block.m11))}", file=out)
    print(f"d2_cnot: {_f(distance_to_gate(block.a_block, CNOT_TARGET))}", file=out)
    _block_report(block.a_block, out)
    if args.matrix:
        out.write(format_matrix(m))
    return 0


def cmd_classify_matrix(args, out) -> int:
    m = parse_matrix(Path(args.path).read_text(encoding="utf-8"), sizes=(4, 5))
    if m.shape == (5, 5):
        block = decompose(m)
        print(f"m11_norm: {_f(abs(block.m11))}", file=out)
        a = block.a_block
    else:
        a = m
    _block_report(a, out)
    return 0


def _objective(args) -> Objective:
    if getattr(args, "gate_file", None):
        return Objective.to_gate(TargetGate.from_file(args.gate_file))
    if getattr(args, "gate", None):
        if args.gate.upper() != "CNOT":
            raise ValueError(f"unknown gate target {args.gate!r}; use CNOT or --gate-file")
        return Objective.to_gate(CNOT_TARGET)
    if getattr(args, "cls", None):
        return Objective.to_class(get_class(args.cls))
    return Objective.survey()


def _config(args, objective: Objective) -> SearchConfig:
    return SearchConfig(
        objective=objective,
        lengths=args.lengths,
        alphabet=Alphabet(args.alphabet),
        mode=SearchMode(args.mode),
        sample_count=args.samples,
        seed=args.seed,
        unitarity_threshold=args.unitarity_threshold,
        leakage_threshold=args.leakage_threshold,
        strict_leakage=args.strict_leakage,
        top_k=args.top_k,
        reduce_words=args.reduce_words,
        dedup=args.dedup,
        budget=args.budget,
        accept_target=args.accept_target,
        with_invariants=getattr(args, "with_invariants", False),
    )


def _write_provenance(result: SearchResult, path: Path) -> None:
    path.write_text(json.dumps(result.provenance, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _summary(result: SearchResult, out, n: int = 5) -> None:
    print(f"# {result.config.objective.label}: evaluated={result.evaluated} "
          f"accepted={result.accepted} kept={len(result.records)}", file=out)
    for rank, r in enumerate(result.records[:n], start=1):
        extra = f" class={r.closest}" if r.closest else ""
        print(f"{rank} L={r.length} {r.operator} distance={_f(r.objective_distance)} "
              f"m11_norm={_f(r.m11_norm)} d_unitary={_f(r.d_unitary)}{extra}", file=out)


def cmd_compile(args, out) -> int:
    objective = _objective(args)
    if objective.kind.value == "survey":
        raise ValueError("compile needs --gate, --gate-file or --class")
    result = partition_search(_config(args, objective), args.workers)
    kind = TableKind.GATE_SEARCH if objective.kind.value == "gate" else TableKind.CLASS_SEARCH
    output = Path(args.output)
    output.parent.mkdir(parents=True, exist_ok=True)
    write_table(result.records, kind, output)
    _write_provenance(result, output.with_suffix(".provenance.json"))
    _summary(result, out)
    return 0


def cmd_survey(args, out) -> int:
    result = partition_search(_config(args, Objective.survey()), args.workers)
    outdir = Path(args.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    write_table(result.records, TableKind.SURVEY_INVARIANTS, outdir / "survey_invariants.csv")
    write_table(result.records, TableKind.CLOSEST_CLASS, outdir / "closest_class.csv")
    emit_weyl_points(result.records, outdir / "weyl_points.csv")
    _write_provenance(result, outdir / "provenance.json")
    _summary(result, out)
    return 0


def _search_flags(p: argparse.ArgumentParser, top_k_default) -> None:
    p.add_argument("--alphabet", choices=[a.value for a in Alphabet], default="basic")
    p.add_argument("--lengths", type=_lengths_arg, required=True, help="N or LO..HI (inclusive)")
    p.add_argument("--mode", choices=[m.value for m in SearchMode], default="exhaustive")
    p.add_argument("--samples", type=int, default=100_000, help="draws per length (random mode)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--accept-target", type=int, default=None,
                   help="random mode: stop after this many accepted words per length")
    p.add_argument("--unitarity-threshold", type=float, default=DEFAULT_UNITARITY_THRESHOLD)
    p.add_argument("--leakage-threshold", type=float, default=DEFAULT_LEAKAGE_THRESHOLD)
    p.add_argument("--strict-leakage", action="store_true",
                   help="also reject words with |1-|M11|| >= leakage threshold")
    p.add_argument("--top-k", type=int, default=top_k_default)
    p.add_argument("--reduce-words", action="store_true",
                   help="extended alphabet: skip words with adjacent generator/inverse pairs")
    p.add_argument("--dedup", action="store_true", help="random mode: drop repeated draws")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET,
                   help="exclusive bound on exhaustive candidate count")
    p.add_argument("--workers", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fibbraid", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gates", help="print the ten generator matrices and their metrics")
    p.set_defaults(func=cmd_gates)

    p = sub.add_parser("eval", help="evaluate one operator string")
    p.add_argument("word", help='operator digits, e.g. "0104230" ("" for the identity)')
    p.add_argument("--alphabet", choices=[a.value for a in Alphabet], default="basic")
    p.add_argument("--matrix", action="store_true", help="also dump the 5x5 matrix")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("compile", help="search for a target gate or equivalence class")
    target = p.add_mutually_exclusive_group(required=True)
    target.add_argument("--gate", help="target gate name (CNOT)")
    target.add_argument("--gate-file", help="file with a 4x4 target matrix")
    target.add_argument("--class", dest="cls", help="equivalence class: ID CNOT DCNOT SWAP B SQRT_SWAP")
    _search_flags(p, 10)
    p.add_argument("--with-invariants", action="store_true")
    p.add_argument("--output", default="compile.csv")
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("survey", help="classify every accepted word by its closest class")
    _search_flags(p, None)
    p.add_argument("--output-dir", default="survey")
    p.set_defaults(func=cmd_survey)

    p = sub.add_parser("classify-matrix", help="classify a 4x4 or 5x5 matrix dump")
    p.add_argument("path")
    p.set_defaults(func=cmd_classify_matrix)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "workers", 1) < 1:
        parser.error("--workers must be >= 1")
    try:
        return args.func(args, sys.stdout)
    except (BraidParseError, MatrixParseError, BudgetExceededError, DegenerateBlockError,
            ValueError, KeyError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"fibbraid {args.command}: error: {msg}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
