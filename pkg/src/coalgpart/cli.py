"""Command-line front end: minimize, compare, gen, bench.

Results go to stdout (or ``--out``); diagnostics go to stderr.
Exit codes: 0 ok, 1 user/input error, 2 internal-invariant or bound violation.
"""

from __future__ import annotations

import argparse
import math
import sys
import time

from .encoding import format_partition, quotient_coalgebra, read_coalgebra, root_blocks
from .errors import CoalgError, InterfaceError, InvariantError, ParseError
from .generate import generate
from .oracle import naive_refine
from .refiner import Refiner, refine_with_stats

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_INTERNAL = 2


class UserError(Exception):
    pass


def counter_bound(n):
    """Largest number of times a state may lie in a splitter."""
    return int(math.floor(math.log2(n))) if n > 0 else 0


def _write(text, path):
    if path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)


def _load(path):
    try:
        return read_coalgebra(path)
    except OSError as e:
        raise UserError(f"{path}: {e.strerror or e}") from None
    except ParseError as e:
        raise UserError(f"{path}: {e}") from None


def _partition(enc, algorithm):
    if algorithm == "naive":
        return naive_refine(enc)
    return Refiner(enc).run()


def first_difference(enc, left, right):
    """A pair of states grouped together by one partition but not the other."""
    for a, b in ((left, right), (right, left)):
        other = {}
        for i, block in enumerate(b):
            for x in block:
                other[x] = i
        for block in a:
            head = block[0]
            for x in block[1:]:
                if other[x] != other[head]:
                    return enc.names[head], enc.names[x]
    return None


# -- subcommands -------------------------------------------------------------


def cmd_minimize(args):
    enc = _load(args.input)
    if args.output == "stats":
        if args.algorithm == "naive":
            t0 = time.perf_counter()
            blocks = naive_refine(enc)
            elapsed = time.perf_counter() - t0
            text = (
                f"states={enc.n_states}\nedges={enc.n_edges}\n"
                f"blocks={len(blocks)}\nseconds={elapsed:.6f}\n"
            )
        else:
            blocks, stats = refine_with_stats(enc)
            text = stats.as_text() + f"blocks={len(blocks)}\n"
        _write(text, args.out)
        return EXIT_OK
    blocks = _partition(enc, args.algorithm)
    if args.output == "quotient":
        _write(quotient_coalgebra(enc, blocks), args.out)
    else:
        _write(format_partition(enc, blocks), args.out)
    return EXIT_OK


def cmd_compare(args):
    status = EXIT_OK
    for path in args.inputs:
        enc = _load(path)
        fast = Refiner(enc).run()
        slow = naive_refine(enc)
        same = {frozenset(b) for b in fast} == {frozenset(b) for b in slow}
        if same:
            print(f"{path}: ok ({len(root_blocks(enc, fast))} blocks)")
            continue
        pair = first_difference(enc, fast, slow)
        print(f"{path}: MISMATCH at states {pair[0]} and {pair[1]}")
        status = EXIT_INTERNAL
    return status


def cmd_gen(args):
    try:
        text = generate(
            args.functor, args.states, density=args.density,
            weight_range=args.weight_range, seed=args.seed,
        )
    except ValueError as e:
        raise UserError(str(e)) from None
    _write(text, args.out)
    return EXIT_OK


def _bench_inputs(args):
    if args.inputs:
        for path in args.inputs:
            yield path, _load(path)
        return
    lo, hi = args.ladder
    if lo < 0 or hi < lo:
        raise UserError("--ladder needs 0 <= LO <= HI")
    from .encoding import parse_coalgebra

    for k in range(lo, hi + 1):
        n = 2**k
        text = generate(args.functor, n, density=args.density,
                        weight_range=args.weight_range, seed=args.seed + k)
        yield f"2^{k}", parse_coalgebra(text)


def cmd_bench(args):
    # rows are streamed to stdout as they finish, or collected for --out
    rows = []
    emit = rows.append if args.out is not None else (lambda row: _write(row, None))
    emit("n,m,seconds,max_counter\n")
    violations = []
    for label, enc in _bench_inputs(args):
        _, stats = refine_with_stats(enc)
        bound = counter_bound(enc.n_states)
        emit(f"{enc.n_states},{enc.n_edges},{stats.seconds:.6f},{stats.max_counter}\n")
        if stats.max_counter > bound:
            violations.append(f"{label}: max counter {stats.max_counter} exceeds bound {bound}")
    if args.out is not None:
        _write("".join(rows), args.out)
    for v in violations:
        print(f"bound violation: {v}", file=sys.stderr)
    return EXIT_INTERNAL if violations else EXIT_OK


# -- argument parsing ----------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    # usage errors are input errors (exit 1); 2 is reserved for internal failures
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser():
    p = _Parser(
        prog="coalgpart",
        description="Coarsest behavioural-equivalence partitions of finite systems.",
    )
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    m = sub.add_parser("minimize", help="print the partition or quotient of a system")
    m.add_argument("input")
    m.add_argument("--algorithm", choices=("refiner", "naive"), default="refiner")
    m.add_argument("--output", choices=("partition", "quotient", "stats"), default="partition")
    m.add_argument("--out", help="write results here instead of stdout")
    m.set_defaults(func=cmd_minimize)

    c = sub.add_parser("compare", help="check the refiner against the naive oracle")
    c.add_argument("inputs", nargs="+")
    c.set_defaults(func=cmd_compare)

    gen_opts = _Parser(add_help=False)
    gen_opts.add_argument("--functor", default="P(X)")
    gen_opts.add_argument("--density", type=float, default=5.0, help="average out-degree")
    gen_opts.add_argument("--weight-range", type=int, default=3)
    gen_opts.add_argument("--seed", type=int, default=0)
    gen_opts.add_argument("--out")

    g = sub.add_parser("gen", parents=[gen_opts], help="write a random system")
    g.add_argument("--states", type=int, required=True)
    g.set_defaults(func=cmd_gen)

    b = sub.add_parser("bench", parents=[gen_opts], help="time the refiner, CSV rows")
    b.add_argument("inputs", nargs="*", help="system files (default: random doubling ladder)")
    b.add_argument("--ladder", type=int, nargs=2, metavar=("LO", "HI"),
                   default=(10, 17), help="log2 of the smallest and largest state count")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UserError, ParseError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except (InvariantError, InterfaceError) as e:
        print(f"internal error: {e}", file=sys.stderr)
        return EXIT_INTERNAL
    except CoalgError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
