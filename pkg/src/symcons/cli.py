"""``symcons`` command line: bench, sweep, codegen and demo."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .bench import (
    ProblemSpec, best_of, build_program, demo_fig1, run_bench, sweep, write_csv,
    write_sharing_csv,
)
from .codegen import render_source
from .term import DomainError
from .vm import ValidationError

# argparse itself exits with 2 on usage errors
EXIT_OK, EXIT_INVALID = 0, 3


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def _sizes(text: str) -> list[int]:
    try:
        return [_positive(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad size list {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="symcons", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def problem_args(p, with_size=True):
        p.add_argument("--family", choices=("reaction", "region"), required=True)
        if with_size:
            p.add_argument("--size", type=_positive, required=True)
        p.add_argument("--seed", type=int, default=0)

    b = sub.add_parser("bench", help="run the four benchmark stages and write CSV")
    problem_args(b)
    b.add_argument("--mode", choices=("consing", "naive"), default="consing")
    b.add_argument("--repeats", type=_positive, default=1)
    b.add_argument("--out", type=Path, required=True)

    sw = sub.add_parser("sweep", help="run both modes over several sizes")
    problem_args(sw, with_size=False)
    sw.add_argument("--sizes", type=_sizes, required=True)
    sw.add_argument("--repeats", type=_positive, default=1)
    sw.add_argument("--out", type=Path, required=True)
    sw.add_argument("--ratios", type=Path, required=True)

    cg = sub.add_parser("codegen", help="render the Jacobian program as C-like source")
    problem_args(cg)
    cg.add_argument("--mode", choices=("consing", "naive"), default="consing")
    cg.add_argument("--emit-source", type=Path, required=True)
    cg.add_argument("--emit-program", type=Path, help="also write the line-based program text")

    demo = sub.add_parser("demo", help="show a worked example")
    demo.add_argument("name", choices=("fig1",))
    return parser


def _summary(records) -> str:
    out = []
    for (family, size, mode, stage), r in best_of(records).items():
        extra = f" allocated={r.allocated_nodes} (~{r.estimated_bytes} B) distinct={r.distinct_nodes}" \
            if stage == "jacobian" else f" instructions={r.instructions}"
        out.append(f"{family} N={size} {mode:7s} {stage:9s} best={r.time_ns / 1e6:.3f} ms{extra}")
    return "\n".join(out)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "demo":
            sys.stdout.write(demo_fig1())
        elif args.command == "bench":
            spec = ProblemSpec(args.family, args.size, args.seed, args.mode, args.repeats)
            records = run_bench(spec)
            with open(args.out, "w", newline="") as fh:
                write_csv(records, fh)
            print(_summary(records))
        elif args.command == "sweep":
            records, rows = sweep(args.family, args.sizes, args.seed, args.repeats)
            with open(args.out, "w", newline="") as fh:
                write_csv(records, fh)
            with open(args.ratios, "w", newline="") as fh:
                write_sharing_csv(rows, fh)
            for r in rows:
                print(f"{r.family} N={r.size} sharing_ratio={r.sharing_ratio:.3f} "
                      f"instruction_ratio={r.instruction_ratio:.3f}")
        elif args.command == "codegen":
            spec = ProblemSpec(args.family, args.size, args.seed, args.mode)
            _, program = build_program(spec)
            args.emit_source.write_text(render_source(program, f"{spec.family}_{spec.size}_jacobian"))
            if args.emit_program:
                args.emit_program.write_text(program.dumps())
            print(f"wrote {len(program)} instructions to {args.emit_source}")
    except (ValueError, ValidationError, DomainError) as exc:
        print(f"symcons: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"symcons: error: {exc}", file=sys.stderr)
        return 1
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
