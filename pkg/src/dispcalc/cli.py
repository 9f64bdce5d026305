"""Command-line surface.

    dispcalc prove "n, n\\s => s"
    dispcalc parse --lexicon demo/lexicon.txt "john called mary up"
    dispcalc check-axioms --samples 1000 --seed 7
    dispcalc interpret --model demo/model.txt "n * (n\\s) => s"
    dispcalc show "lp(split{1}(n\\s) UP n)"
    dispcalc export --latex --out proof.tex "n, n\\s => s"

Exit codes: 0 success, 1 unprovable or inclusion fails, 2 input error.
Undeclared primitives default to sort 0 unless --signature is given.
"""

from __future__ import annotations

import argparse
import sys

from . import algebra, render
from .configurations import print_config
from .lexicon import load_lexicon, parse_sentence
from .prover import (
    Hypersequent,
    SearchBudgetExceeded,
    parse_sequent,
    prove,
)
from .types import (
    IllSortedType,
    Signature,
    TypeSyntaxError,
    UnknownPrimitive,
    figure_of,
    parse_type,
    print_type,
    segments_of,
    sort_of,
)

INPUT_ERRORS = (
    TypeSyntaxError,
    IllSortedType,
    UnknownPrimitive,
    ValueError,
    OSError,
)


def _load_signature(path: str | None) -> Signature:
    if path is None:
        return Signature(default_sort=0)
    with open(path, encoding="utf-8") as fh:
        return Signature.from_text(fh.read())


def _load_axioms(path: str | None, sig: Signature):
    if path is None:
        return ()
    axioms = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            try:
                axioms.append(parse_sequent(line, sig))
            except (TypeSyntaxError, ValueError) as exc:
                raise ValueError(f"{path}: line {lineno}: {exc}") from None
    return tuple(axioms)


def _cmd_prove(args) -> int:
    sig = _load_signature(args.signature)
    goal = parse_sequent(args.sequent, sig)
    axioms = _load_axioms(args.axioms, sig)
    max_solutions = args.max if not args.all else 100
    derivations = prove(
        goal,
        max_solutions=max_solutions,
        cut=args.cut,
        axioms=axioms,
        max_depth=args.depth,
    )
    if not derivations:
        print("unprovable")
        return 1
    for i, d in enumerate(derivations):
        if i:
            print()
        print(render.to_latex(d) if args.latex else render.to_ascii(d))
    return 0


def _cmd_parse(args) -> int:
    sig = _load_signature(args.signature)
    with open(args.lexicon, encoding="utf-8") as fh:
        try:
            lex = load_lexicon(fh.read(), sig)
        except ValueError as exc:
            raise ValueError(f"{args.lexicon}: {exc}") from None
    goal = parse_type(args.goal, sig)
    words = args.sentence.split()
    results = parse_sentence(
        words, lex, goal, max_results=None if args.all else 1
    )
    if not results:
        print("no parse")
        return 1
    for i, r in enumerate(results):
        if i:
            print()
        print(f"antecedent: {print_config(r.configuration)}")
        print(f"words: {' '.join(e.word for e in r.assignment)}")
        print(render.to_latex(r.derivation) if args.latex else render.to_ascii(r.derivation))
    return 0


def _cmd_check_axioms(args) -> int:
    generators = tuple(args.generators.split())
    checks = algebra.check_da_axioms(
        alphabet=generators, samples=args.samples, seed=args.seed
    )
    ok = True
    for check in checks:
        status = "ok" if check.failures == 0 else "FAIL"
        print(f"{check.name}: {check.passes}/{check.passes + check.failures} {status}")
        if check.counterexample:
            print(f"  counterexample: {check.counterexample}")
            ok = False
    return 0 if ok else 1


def _cmd_interpret(args) -> int:
    sig = _load_signature(args.signature)
    with open(args.model, encoding="utf-8") as fh:
        try:
            valuation = algebra.parse_model(fh.read())
        except ValueError as exc:
            raise ValueError(f"{args.model}: {exc}") from None
    if "=>" in args.expr:
        h = parse_sequent(args.expr, sig)
        verdict = algebra.check_sequent_in_model(h, valuation)
        kind = "exact" if verdict.exact else "bounded-universe advisory"
        if verdict.holds:
            print(f"holds ({kind})")
            return 0
        print(f"does not hold ({kind})")
        print(f"witness: {algebra.show_string(verdict.witness)}")
        return 1
    t = parse_type(args.expr, sig)
    interp = algebra.interpret_type(t, valuation)
    elements = ", ".join(algebra.show_string(x) for x in interp)
    print(f"sort {interp.sort}: {{{elements}}}")
    return 0


def _cmd_show(args) -> int:
    sig = _load_signature(args.signature)
    t = parse_type(args.type, sig)
    print(f"type: {print_type(t)}")
    print(f"sort: {sort_of(t)}")
    print(f"segments: {', '.join(str(s) for s in segments_of(t))}")
    print(f"figure: {print_config(figure_of(t))}")
    return 0


def _cmd_export(args) -> int:
    sig = _load_signature(args.signature)
    goal = parse_sequent(args.sequent, sig)
    derivations = prove(goal, max_depth=args.depth)
    if not derivations:
        print("unprovable")
        return 1
    if args.latex:
        text = render.to_latex(derivations[0], document=True)
    else:
        text = render.to_ascii(derivations[0]) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
        print(f"wrote {args.out}")
    else:
        print(text, end="")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dispcalc",
        description="Proof search and finite models for the displacement calculus.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--signature", help="primitive declarations, `name sort` per line")

    p = sub.add_parser("prove", help="decide a hypersequent")
    p.add_argument("sequent")
    common(p)
    p.add_argument("--axioms", help="file of non-logical axiom sequents")
    p.add_argument("--cut", action="store_true", help="enable depth-bounded Cut")
    p.add_argument("--depth", type=int, default=None, help="depth bound for Cut/axioms")
    p.add_argument("--all", action="store_true", help="list up to 100 derivations")
    p.add_argument("--max", type=int, default=1, help="number of derivations")
    p.add_argument("--latex", action="store_true")
    p.set_defaults(func=_cmd_prove)

    p = sub.add_parser("parse", help="parse a sentence against a lexicon")
    p.add_argument("sentence")
    common(p)
    p.add_argument("--lexicon", required=True)
    p.add_argument("--goal", default="s")
    p.add_argument("--all", action="store_true")
    p.add_argument("--latex", action="store_true")
    p.set_defaults(func=_cmd_parse)

    p = sub.add_parser("check-axioms", help="random-test the string algebra laws")
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--generators", default="a b")
    p.set_defaults(func=_cmd_check_axioms)

    p = sub.add_parser("interpret", help="evaluate a type or sequent in a model")
    p.add_argument("expr")
    common(p)
    p.add_argument("--model", required=True)
    p.set_defaults(func=_cmd_interpret)

    p = sub.add_parser("show", help="sort, segments, and figure of a type")
    p.add_argument("type")
    common(p)
    p.set_defaults(func=_cmd_show)

    p = sub.add_parser("export", help="prove and write a derivation")
    p.add_argument("sequent")
    common(p)
    p.add_argument("--out")
    p.add_argument("--latex", action="store_true")
    p.add_argument("--depth", type=int, default=None)
    p.set_defaults(func=_cmd_export)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SearchBudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
