"""Command-line interface.

Exit codes: 0 on success, 1 on an internal error (including an oracle
disagreement in ``verify``), 2 on invalid input.
"""

from __future__ import annotations

import argparse
import json
import random
import re
import sys
from typing import Sequence

from .boxes import BoxError, OpCounter, congruent_diagonal, write_trace
from .field import RATIONAL, Field, FieldError, RealField
from .matrix import MatrixError, SparseSymmetricMatrix, load_matrix
from .oracle import bareiss_determinant, dense_congruent_diagonalize, random_instance, replay_trace
from .spectral import (InvalidInterval, determinant, inertia, locate, rank,
                       tolerance_sensitive)
from .treedecomp import (DecompositionError, Kind, NiceTreeDecomposition, as_nice, load_td,
                         nicify, validate, write_td)

EXIT_OK, EXIT_INTERNAL, EXIT_INVALID = 0, 1, 2

INVALID_INPUT = (MatrixError, DecompositionError, FieldError, InvalidInterval, BoxError, OSError)


class InvalidArguments(ValueError):
    pass


def _field(args) -> Field:
    if not args.real:
        return RATIONAL
    if not args.tol > 0:
        raise InvalidArguments("--tol must be positive")
    return RealField(args.tol)


def _need(args, *names):
    for name in names:
        if getattr(args, name) is None:
            raise InvalidArguments(f"--{name} is required for '{args.command}'")


def _load(args) -> tuple[SparseSymmetricMatrix, NiceTreeDecomposition]:
    _need(args, "matrix", "td")
    M = load_matrix(args.matrix, _field(args))
    T = load_td(args.td)
    if T.n != M.n:
        raise InvalidArguments(f"decomposition has {T.n} vertices but the matrix has order {M.n}")
    validate(T, M.underlying_graph())
    return M, as_nice(T)


def _real_notes(M: SparseSymmetricMatrix, sensitive: bool) -> list[str]:
    if not isinstance(M.field, RealField):
        return []
    notes = [f"note: real mode (tol {M.field.tol!r}), numerically unverified"]
    if sensitive:
        notes.append("warning: tolerance-sensitive, a pivot lies within 10x the zero tolerance")
    return notes


def _emit(args, lines: list[str], payload: dict) -> None:
    if args.json:
        print(json.dumps(payload, indent=2))
    else:
        for line in lines:
            print(line)


# --- subcommands --------------------------------------------------------------

def cmd_validate(args) -> int:
    _need(args, "matrix", "td")
    M = load_matrix(args.matrix, _field(args))
    T = load_td(args.td)
    if T.n != M.n:
        raise InvalidArguments(f"decomposition has {T.n} vertices but the matrix has order {M.n}")
    w = validate(T, M.underlying_graph())
    _emit(args, [f"valid, width {w}"], {"valid": True, "width": w})
    return EXIT_OK


def cmd_nicify(args) -> int:
    _need(args, "td")
    T = load_td(args.td)
    if args.matrix is not None:
        validate(T, load_matrix(args.matrix, _field(args)).underlying_graph())
    N = nicify(T)
    if args.out:
        with open(args.out, "w") as fh:
            write_td(N, fh)
    if args.json:
        counts = N.kind_counts()
        print(json.dumps({
            "nodes": len(N), "width": N.width, "root": N.root,
            "kinds": {k.value: counts[k] for k in Kind},
        }, indent=2))
    elif not args.out:
        write_td(N, sys.stdout)
    return EXIT_OK


def _diagonalize(args):
    M, T = _load(args)
    trace = [] if args.trace else None
    D = congruent_diagonal(M, T, relabel=not args.no_relabel, trace=trace, validate_input=False)
    if trace is not None:
        with open(args.trace, "w") as fh:
            write_trace(trace, fh)
    return M, D


def _summary(M, D) -> tuple[str, dict]:
    F = M.field
    r, det, ine = rank(D, F), F.format(determinant(D, F)), inertia(D, F)
    return (f"rank {r} det {det} inertia {ine}",
            {"rank": r, "det": det, "inertia": list(ine)})


def cmd_diag(args) -> int:
    M, D = _diagonalize(args)
    F = M.field
    pairs = [(v, F.format(d)) for v, d in D]
    line, summary = _summary(M, D)
    notes = _real_notes(M, tolerance_sensitive(D, F))
    lines = [f"{v} {d}" for v, d in pairs] + [line] + notes
    _emit(args, lines, {"diagonal": [[v, d] for v, d in pairs], **summary, "notes": notes})
    return EXIT_OK


def cmd_inertia(args) -> int:
    M, D = _diagonalize(args)
    line, summary = _summary(M, D)
    notes = _real_notes(M, tolerance_sensitive(D, M.field))
    _emit(args, [line] + notes, {**summary, "notes": notes})
    return EXIT_OK


def cmd_locate(args) -> int:
    M, T = _load(args)
    count, sensitive = locate(M, T, args.a, args.b, relabel=not args.no_relabel)
    notes = _real_notes(M, sensitive)
    _emit(args, [str(count)] + notes,
          {"interval": [args.a, args.b], "count": count, "notes": notes})
    return EXIT_OK


def cmd_verify(args) -> int:
    """Cross-check the tree DP against the dense oracles on random instances."""
    rng = random.Random(args.seed)
    failures = 0
    results = []
    for i in range(args.count):
        seed = rng.randrange(2 ** 31)
        n = rng.randint(max(2, args.k + 1), max(args.n, args.k + 1))
        k = rng.randint(1, min(args.k, n - 1))
        M, T = random_instance(n, k, seed, zero_diag=args.zero_diag)
        trace: list[str] = []
        counter = OpCounter()
        D = congruent_diagonal(M, nicify(T), trace=trace, counter=counter,
                               relabel=not args.no_relabel, check=True)
        dense = M.to_dense()
        ref = dense_congruent_diagonalize(dense)
        F = M.field
        det = determinant(D, F)
        replay = replay_trace(M, trace)
        want = [[F.zero()] * n for _ in range(n)]
        for v, d in D:
            want[v - 1][v - 1] = d
        agree = (tuple(inertia(D, F)) == ref.inertia and rank(D, F) == ref.rank
                 and det == ref.det == bareiss_determinant(dense) and replay == want)
        failures += not agree
        res = {"seed": seed, "n": n, "k": k, "agree": agree, "field_ops": counter.field_ops}
        results.append(res)
        if not args.json:
            print(f"seed {seed} n {n} k {k} {'agree' if agree else 'DISAGREE'} field_ops {counter.field_ops}")
    if args.json:
        print(json.dumps({"instances": results, "failures": failures}, indent=2))
    else:
        print(f"{args.count - failures}/{args.count} agree")
    return EXIT_OK if failures == 0 else EXIT_INTERNAL


def bench_table(sizes: Sequence[int], k: int, count: int, seed: int = 0, real: bool = False):
    """Mean field-operation counts per size plus a least-squares slope through the origin."""
    field = RealField() if real else RATIONAL
    rows = []
    for n in sizes:
        if count == 0:
            continue
        ops = []
        for s in range(count):
            M, T = random_instance(n, k, seed + s, field=field)
            counter = OpCounter()
            congruent_diagonal(M, nicify(T), counter=counter, validate_input=False)
            ops.append(counter.field_ops)
        rows.append({"n": n, "k": k, "seeds": count, "mean_field_ops": sum(ops) / len(ops)})
    for prev, row in zip(rows, rows[1:]):
        row["ratio"] = row["mean_field_ops"] / prev["mean_field_ops"]
        # per-vertex cost should stay flat; a 25% rise signals super-linear growth
        per_prev = prev["mean_field_ops"] / prev["n"]
        per_row = row["mean_field_ops"] / row["n"]
        row["superlinear"] = per_row > 1.25 * per_prev
    num = sum(r["n"] * r["mean_field_ops"] for r in rows)
    den = sum(r["n"] ** 2 for r in rows)
    coef = num / den if den else None
    return rows, coef


def cmd_bench(args) -> int:
    sizes = [int(x) for x in args.sizes.split(",") if x.strip()]
    if not sizes or min(sizes) <= args.k:
        raise InvalidArguments("--sizes must list orders larger than k")
    rows, coef = bench_table(sizes, args.k, args.count, args.seed, args.real)
    if args.json:
        print(json.dumps({"rows": rows, "coefficient": coef}, indent=2))
        return EXIT_OK
    print(f"{'n':>6} {'k':>3} {'seeds':>5} {'mean_field_ops':>16} {'ratio':>7}")
    for r in rows:
        ratio = f"{r['ratio']:.3f}" if "ratio" in r else "-"
        flag = "  superlinear" if r.get("superlinear") else ""
        print(f"{r['n']:>6} {r['k']:>3} {r['seeds']:>5} {r['mean_field_ops']:>16.1f} {ratio:>7}{flag}")
    if coef is not None:
        print(f"fitted field ops per vertex: {coef:.2f}")
    return EXIT_OK


# --- parser -------------------------------------------------------------------

# lets `locate -inf 0` and `locate -1/2 3` parse as positionals
_NEGATIVE = re.compile(r"^-(inf(inity)?|\d+(\.\d*)?([eE][-+]?\d+)?(/\d+)?|\.\d+)$")


def _common(p: argparse.ArgumentParser, files: bool = True) -> None:
    if files:
        p.add_argument("--matrix", metavar="PATH", help="symmetric matrix in coordinate format")
        p.add_argument("--td", metavar="PATH", help="tree decomposition in .td format")
        p.add_argument("--no-relabel", action="store_true",
                       help="keep input vertex labels inside the elimination")
        p.add_argument("--trace", metavar="PATH", help="write the row-operation trace here")
    p.add_argument("--real", action="store_true", help="floating-point mode instead of exact rationals")
    p.add_argument("--tol", type=float, default=1e-12, help="relative zero tolerance in real mode")
    p.add_argument("--json", action="store_true", help="machine-readable output")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="twdiag",
        description="Diagonalize a symmetric matrix by congruence along a tree decomposition.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a decomposition against a matrix")
    _common(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("nicify", help="convert a decomposition into a nice one")
    _common(p)
    p.add_argument("--out", "-o", metavar="PATH", help="write here instead of stdout")
    p.set_defaults(func=cmd_nicify)

    p = sub.add_parser("diag", help="print a congruent diagonal and its summary")
    _common(p)
    p.set_defaults(func=cmd_diag)

    p = sub.add_parser("inertia", help="print rank, determinant and inertia")
    _common(p)
    p.set_defaults(func=cmd_inertia)

    p = sub.add_parser("locate", help="count eigenvalues in the interval (A, B]")
    _common(p)
    p.add_argument("a", metavar="A")
    p.add_argument("b", metavar="B")
    p._negative_number_matcher = _NEGATIVE
    p.set_defaults(func=cmd_locate)

    p = sub.add_parser("verify", help="compare against dense oracles on random instances")
    _common(p, files=False)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--n", type=int, default=12, help="largest order")
    p.add_argument("--k", type=int, default=3, help="largest width")
    p.add_argument("--zero-diag", type=float, default=0.5, help="fraction of zero diagonal entries")
    p.add_argument("--no-relabel", action="store_true")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", help="field-operation counts as n grows")
    _common(p, files=False)
    p.add_argument("--sizes", default="200,400,800", help="comma-separated orders")
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=3, help="seeds per order")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InvalidArguments, *INVALID_INPUT) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as exc:  # noqa: BLE001 - report, do not crash with a traceback
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
