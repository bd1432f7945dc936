"""Command-line entry point.

Exit codes: 0 success, 1 a computed "no" (unsat, invalid, not Harsanyi,
failed check), 2 usage, parse or input errors, 3 budget exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import algebra as alg
from . import bisequence as bs
from . import canon
from .errors import (
    BudgetExceeded,
    FormulaSyntaxError,
    ModelError,
    NotHarsanyi,
    NotNormal,
    UnsupportedFormula,
)
from .formula import accuracy, agents, depth, letters, parse, render
from .models import (
    check_operator_laws,
    dump_model,
    extend_to_kb,
    extension,
    is_harsanyi,
    is_harsanyi_h_prime,
    load_model,
    model_to_dict,
    validate_kb_space,
)
from .rewrite import denest, statement_of, verify_denest

OK, NO, USAGE, BUDGET = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(USAGE)


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


def _emit(args, data: dict, text: str) -> None:
    if args.json:
        print(json.dumps(data, sort_keys=True))
    else:
        print(text)


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise ModelError(f"cannot read {path}: {exc.strerror}") from exc


def _frac_text(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


# ------------------------------------------------------------ commands

def cmd_parse(args) -> int:
    f = parse(args.formula)
    data = {
        "formula": render(f),
        "depth": depth(f),
        "accuracy": accuracy(f),
        "letters": sorted(letters(f)),
        "agents": sorted(agents(f)),
    }
    _emit(args, data, render(f))
    return OK


def _witness_data(w: canon.SatWitness) -> dict:
    data = {"state": w.state, "model": model_to_dict(w.model)}
    if w.atom is not None:
        data["statement"] = render(statement_of(w.atom))
    return data


def cmd_sat(args) -> int:
    f = parse(args.formula)
    w = canon.sat(f, args.logic)
    if w is None:
        _emit(args, {"result": "unsat"}, "unsat")
        return NO
    data = {"result": "sat", **_witness_data(w)}
    text = f"sat\nstate {w.state}"
    if w.atom is not None:
        text += f"\n{data['statement']}"
    _emit(args, data, text)
    return OK


def cmd_valid(args) -> int:
    f = parse(args.formula)
    w = canon.counter_witness(f, args.logic)
    if w is None:
        _emit(args, {"result": "valid"}, "valid")
        return OK
    data = {"result": "invalid", "counter_witness": _witness_data(w)}
    text = f"invalid\ncounter-witness state {w.state}"
    if w.atom is not None:
        text += f"\n{data['counter_witness']['statement']}"
    _emit(args, data, text)
    return NO


def cmd_denest(args) -> int:
    f = parse(args.formula)
    g = denest(f)
    data = {"input": render(f), "output": render(g), "depth": depth(g)}
    if args.verify:
        data["verified"] = verify_denest(f, g, models=args.models)
    _emit(args, data, render(g) + (f"\nverified: {data['verified']}" if args.verify else ""))
    return NO if args.verify and not data["verified"] else OK


def cmd_atoms(args) -> int:
    cm = canon.build_canonical_harsanyi(args.q, range(1, args.w + 1))
    stmts = [render(statement_of(a)) for a in cm.atoms]
    data = {"q": args.q, "letters": list(cm.letters), "count": len(stmts), "statements": stmts}
    _emit(args, data, "\n".join(f"{i}: {s}" for i, s in enumerate(stmts)))
    return OK


def cmd_canonical(args) -> int:
    cm = canon.build_canonical_harsanyi(args.q, range(1, args.w + 1))
    data = {"model": model_to_dict(cm.space), "atoms": canon.atom_index(cm)}
    if args.out:
        Path(args.out).write_text(json.dumps(data, indent=2, sort_keys=True))
        if not args.json:
            print(f"wrote {len(cm.atoms)} states to {args.out}")
    if args.verify:
        rep = canon.verify_unique_extension(args.q, cm.letters, threads=args.threads)
        _emit(args, rep.to_dict(), rep.summary())
        return OK if rep.ok() else NO
    if not args.out:
        _emit(args, data, dump_model(cm.space))
    return OK


def cmd_cardinality(args) -> int:
    n = canon.cardinality(args.q, args.d, args.w)
    _emit(args, {"q": args.q, "d": args.d, "w": args.w, "atoms": n}, str(n))
    return OK


def cmd_bisim(args) -> int:
    space = bs.build_space(args.horizon)
    if args.coordinates:
        rep = bs.verify_coordinate_lemma(space, args.r)
        _emit(args, rep.to_dict(), rep.summary())
        return OK if rep.ok() else NO
    if args.harsanyi:
        m = bs.export(space)
        res = {str(a): is_harsanyi(m, a) for a in (1, 2)}
        _emit(args, {"states": m.n, "harsanyi": res}, "\n".join(f"agent {a}: {v}" for a, v in res.items()))
        return OK if all(res.values()) else NO
    m = args.list_length if args.list_length is not None else space.n + 1
    data = bs.jlist_report(space, m, args.r)
    if args.count:
        _emit(args, data, str(data["lists"]["consistent"]))
    else:
        _emit(args, data, f"horizon {space.n}, r = {args.r}: {data['lists']['consistent']} of {2 ** m} lists of length {m} consistent")
    return OK


def _load_algebra(args) -> alg.ModalAlgebra:
    if args.source == "counterexample":
        return alg.counterexample_algebra(args.q or 6)
    text = _read(args.source)
    if args.from_model:
        return alg.make_powerset_algebra(load_model(text), args.agent, args.q)
    return alg.load_algebra(text)


def cmd_algebra(args) -> int:
    a = _load_algebra(args)
    data: dict = {"atoms": a.atoms}
    lines = [f"algebra with {a.size} elements"]
    status = OK
    if args.dump:
        data["algebra"] = alg.algebra_to_dict(a)
        lines.append(alg.dump_algebra(a))
    if args.laws:
        rep = alg.check_sigma_h_laws(a, args.grid)
        data["laws"] = rep.to_dict()
        lines.append(rep.summary())
        status = max(status, OK if rep.ok() else NO)
    if args.search_k or args.reducibility:
        Ks = alg.search_K(a)
        data["knowledge_operators"] = [list(K) for K in Ks]
        lines.append(f"{len(Ks)} knowledge operator(s)")
        lines.extend(f"  K = {list(K)}" for K in Ks)
    if args.closure:
        c = alg.operator_closure(a, include_K=a.knowledge is not None and args.with_k)
        data["closure_size"] = len(c)
        lines.append(f"operator closure: {len(c)} tables")
    if args.reducibility:
        rep = alg.check_reducibility_witness(a)
        data["reducibility"] = rep.to_dict()
        lines.append(rep.summary())
    _emit(args, data, "\n".join(lines))
    return status


def cmd_check_model(args) -> int:
    m = load_model(_read(args.model))
    agent_list = [args.agent] if args.agent else list(m.agents)
    data: dict = {"states": m.n, "agents": list(m.agents)}
    lines = [f"{m.n} states, agents {list(m.agents)}"]
    harsanyi = {}
    for a in agent_list:
        h = is_harsanyi(m, a)
        harsanyi[str(a)] = h
        line = f"agent {a}: {'Harsanyi' if h else 'not Harsanyi'}"
        if m.n <= 12:
            data.setdefault("h_prime", {})[str(a)] = is_harsanyi_h_prime(m, a)
        lines.append(line)
    data["harsanyi"] = harsanyi
    status = OK if all(harsanyi.values()) else NO
    if args.laws:
        for a in agent_list:
            rep = check_operator_laws(m, a, args.q)
            data.setdefault("laws", {})[str(a)] = rep.to_dict()
            lines.append(rep.summary())
    if hasattr(m, "partitions"):
        rep = validate_kb_space(m)
        data["kb"] = rep.to_dict()
        lines.append(rep.summary())
        status = max(status, OK if rep.ok() else NO)
    if args.formula:
        ext = sorted(extension(m, parse(args.formula)))
        data["extension"] = ext
        lines.append(f"extension: {ext}")
    _emit(args, data, "\n".join(lines))
    return status


def cmd_kb_extend(args) -> int:
    m = load_model(_read(args.model))
    try:
        kb = extend_to_kb(m)
    except NotHarsanyi as exc:
        _emit(args, {"result": "not harsanyi", "reason": str(exc)}, f"not Harsanyi: {exc}")
        return NO
    rep = validate_kb_space(kb)
    text = dump_model(kb)
    if args.out:
        Path(args.out).write_text(text)
        text = f"wrote {args.out}"
    _emit(args, {"model": model_to_dict(kb), "validation": rep.to_dict()}, text)
    return OK if rep.ok() else NO


# -------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--threads", type=_positive, default=1, help="worker processes for parallel checks")

    parser = _Parser(prog="harsanyi", description="Probabilistic belief logic toolkit.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, help_):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.set_defaults(func=func)
        return sp

    sp = add("parse", cmd_parse, "parse and pretty-print a formula")
    sp.add_argument("formula")

    for name, func, help_ in (("sat", cmd_sat, "decide satisfiability"), ("valid", cmd_valid, "decide validity")):
        sp = add(name, func, help_)
        sp.add_argument("formula")
        sp.add_argument("--logic", choices=(canon.SIGMA_H, canon.SIGMA_PLUS), default=canon.SIGMA_H)

    sp = add("denest", cmd_denest, "rewrite a normal formula to depth at most 1")
    sp.add_argument("formula")
    sp.add_argument("--verify", action="store_true", help="check equivalence of input and output")
    sp.add_argument("--models", type=int, default=20, help="random Harsanyi models used by --verify")

    for name, func, help_ in (
        ("atoms", cmd_atoms, "list the depth-1 atoms as statements"),
        ("canonical", cmd_canonical, "build the canonical Harsanyi model"),
    ):
        sp = add(name, func, help_)
        sp.add_argument("--q", type=_positive, required=True)
        sp.add_argument("--w", type=int, default=1, help="number of letters")
        if name == "canonical":
            sp.add_argument("--out", help="write model and atom index to this file")
            sp.add_argument("--verify", action="store_true", help="run the unique extension check")

    sp = add("cardinality", cmd_cardinality, "count atoms of a local language")
    sp.add_argument("--q", type=_positive, required=True)
    sp.add_argument("--d", type=int, default=1)
    sp.add_argument("--w", type=int, default=1)

    sp = add("bisim", cmd_bisim, "truncated bi-sequence space experiments")
    sp.add_argument("--horizon", type=_positive, required=True)
    sp.add_argument("--r", type=_fraction, default=Fraction(1))
    sp.add_argument("--list-length", type=_positive)
    sp.add_argument("--count", action="store_true", help="print only the number of consistent lists")
    sp.add_argument("--coordinates", action="store_true", help="check the coordinate lemma at r")
    sp.add_argument("--harsanyi", action="store_true", help="check the exported space is Harsanyi")

    sp = add("algebra", cmd_algebra, "finite modal algebra checks")
    sp.add_argument("source", help="'counterexample' or a JSON file")
    sp.add_argument("--from-model", action="store_true", help="source is a model; use its powerset algebra")
    sp.add_argument("--agent", type=_positive, default=1)
    sp.add_argument("--q", type=_positive, help="index grid for built algebras")
    sp.add_argument("--grid", type=_positive, help="grid for --laws (default: every stored index)")
    sp.add_argument("--laws", action="store_true")
    sp.add_argument("--search-k", action="store_true")
    sp.add_argument("--closure", action="store_true")
    sp.add_argument("--with-k", action="store_true", help="seed the closure with the stored knowledge table")
    sp.add_argument("--reducibility", action="store_true")
    sp.add_argument("--dump", action="store_true", help="print the algebra as JSON")

    sp = add("check-model", cmd_check_model, "inspect a model JSON file")
    sp.add_argument("model")
    sp.add_argument("--agent", type=_positive)
    sp.add_argument("--laws", action="store_true", help="check belief operator laws")
    sp.add_argument("--q", type=_positive, default=2)
    sp.add_argument("--formula", help="print the extension of this formula")

    sp = add("kb-extend", cmd_kb_extend, "add knowledge partitions to a Harsanyi model")
    sp.add_argument("model")
    sp.add_argument("--out")
    return parser


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except FormulaSyntaxError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return USAGE
    except (NotNormal, UnsupportedFormula, ModelError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return BUDGET


def main() -> int:
    return run(sys.argv[1:])


if __name__ == "__main__":
    sys.exit(main())
