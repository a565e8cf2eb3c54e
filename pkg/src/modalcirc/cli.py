"""Command-line front end.

Every subcommand reads JSON or formula text, writes one JSON document to
standard output, and exits 0 on success, 1 on a semantic negative (a
false check, a refuted formula), or 2 on bad input.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import algebra as alg
from . import decision
from . import filtration
from . import formula as fm
from . import kripke
from . import topology as topo
from ._sweep import DEFAULT_VALUATION_CAP, BudgetExceededError

PARAMETRIC_SCHEMES = ("c", "cstar", "p", "disj")


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, "r", encoding="utf-8") as handle:
        return handle.read()


def _read_json(path: str) -> dict:
    return json.loads(_read_text(path))


def _emit(payload: dict) -> None:
    print(json.dumps(payload, indent=2, sort_keys=True))


def _write_dot(frame: kripke.Frame, path: str) -> None:
    lines = ["digraph frame {"]
    for x in range(frame.world_count):
        lines.append(f"  w{x};")
    for x, y in frame.edges:
        lines.append(f"  w{x} -> w{y};")
    lines.append("}")
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("\n".join(lines) + "\n")


def _add_formula_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--formula", help="formula text")
    parser.add_argument("--formula-file", help="file with formula text; - for stdin")
    parser.add_argument(
        "--scheme",
        help="named axiom (k, 4, w4, t, d, lob, dual-lob, grz, grz-box, di-grz, m, "
        "m-equiv, e, point3) or a parametric scheme (c, cstar, p, disj)",
    )
    parser.add_argument("--scheme-n", type=int, help="index for a parametric scheme")


def _resolve_formula(args, n_fallback: int | None = None) -> fm.Formula:
    chosen = [
        args.formula is not None,
        args.formula_file is not None,
        args.scheme is not None,
    ]
    if sum(chosen) != 1:
        raise ValueError("provide exactly one of --formula, --formula-file, --scheme")
    if args.formula is not None:
        return fm.parse(args.formula)
    if args.formula_file is not None:
        return fm.parse(_read_text(args.formula_file))
    name = args.scheme.lower().replace("-", "").replace("_", "")
    if name in PARAMETRIC_SCHEMES:
        n = args.scheme_n if args.scheme_n is not None else n_fallback
        if n is None:
            raise ValueError(f"scheme {args.scheme!r} needs --scheme-n")
        variables = fm.scheme_variables(n)
        if name == "c":
            return fm.bounded_cycle_axiom(n, variables)
        if name == "cstar":
            return fm.bounded_cycle_axiom(n, variables, star=True)
        if name == "p":
            return fm.path_scheme(n, variables)
        return fm.disjointness_scheme(n, variables)
    return fm.named_axiom(args.scheme)


def _parse_extensions(text: str | None) -> frozenset[str]:
    if not text:
        return frozenset()
    return frozenset(part.strip().lower() for part in text.split(",") if part.strip())


def _bool_result(value: bool, key: str = "result") -> int:
    _emit({key: value})
    return 0 if value else 1


# --- subcommand handlers -----------------------------------------------------


def _cmd_parse(args) -> int:
    f = _resolve_formula(args, n_fallback=args.n)

    def tree(g: fm.Formula):
        match g:
            case fm.Var(name):
                return {"kind": "var", "name": name}
            case fm.Top():
                return {"kind": "top"}
            case fm.Neg(child):
                return {"kind": "neg", "child": tree(child)}
            case fm.And(left, right):
                return {"kind": "and", "left": tree(left), "right": tree(right)}
            case fm.Box(child):
                return {"kind": "box", "child": tree(child)}

    _emit({"text": fm.pretty(f), "tree": tree(f), "variables": list(fm.variables(f))})
    return 0


def _cmd_frame_check(args) -> int:
    frame = kripke.Frame.from_json(_read_json(args.file))
    prop = args.prop.lower().replace("-", "_")
    return _bool_result(kripke.check_property(frame, prop))


def _cmd_frame_validate(args) -> int:
    frame = kripke.Frame.from_json(_read_json(args.file))
    f = _resolve_formula(args, n_fallback=args.n)
    return _bool_result(kripke.frame_valid(frame, f, args.cap), key="valid")


def _cmd_frame_clusters(args) -> int:
    frame = kripke.Frame.from_json(_read_json(args.file))
    decomposition = kripke.clusters(frame)
    if args.dot:
        _write_dot(frame, args.dot)
    payload = decomposition.to_json()
    payload["circumference"] = kripke.circumference(frame)
    _emit(payload)
    return 0


def _cmd_filter(args) -> int:
    model = kripke.Model.from_json(_read_json(args.model))
    formulas = [fm.parse(text) for text in args.phi]
    phi = fm.subformula_closure(formulas)
    result = filtration.filter_model(model, phi)
    refinement, _ = filtration.refine(result, args.n, args.variant, args.seed)
    _emit(refinement.trace_json(result))
    return 0


def _cmd_decide(args) -> int:
    spec = decision.LogicSpec(args.n, _parse_extensions(args.ext))
    f = _resolve_formula(args)
    verdict = decision.decide(
        spec,
        f,
        max_worlds=args.max_worlds,
        max_frames=args.max_frames,
        exhaustive=args.exhaustive,
        valuation_cap=args.cap,
    )
    if args.dot and verdict.countermodel is not None:
        _write_dot(verdict.countermodel.frame, args.dot)
    _emit(verdict.to_json())
    return 1 if verdict.kind == "non_theorem" else 0


def _cmd_separate(args) -> int:
    f, model = decision.separate_logics(args.n, args.m)
    if args.dot:
        _write_dot(model.frame, args.dot)
    _emit({"formula": fm.pretty(f), "model": model.to_json()})
    return 0


def _cmd_topo_check(args) -> int:
    space = topo.FiniteSpace.from_json(_read_json(args.file))
    if (args.prop is None) == (args.hered_irresolvable is None):
        raise ValueError("provide exactly one of --prop, --hered-irresolvable")
    if args.prop is not None:
        prop = args.prop.lower().replace("-", "_")
        return _bool_result(topo.separation(space, prop))
    return _bool_result(topo.is_hered_n_irresolvable(space, args.hered_irresolvable))


def _cmd_topo_validate(args) -> int:
    space = topo.FiniteSpace.from_json(_read_json(args.file))
    f = _resolve_formula(args, n_fallback=args.n)
    if args.semantics == "c":
        value = topo.valid_c(space, f, args.cap)
    else:
        value = topo.valid_d(space, f, args.cap)
    return _bool_result(value, key="valid")


def _cmd_topo_resolvable(args) -> int:
    space = topo.FiniteSpace.from_json(_read_json(args.file))
    if args.subspace:
        points = [int(part) for part in args.subspace.split(",") if part.strip()]
    else:
        points = list(range(space.point_count))
    return _bool_result(topo.is_n_resolvable(space, points, args.k))


def _cmd_alg_validate(args) -> int:
    algebra = alg.ModalAlgebra.from_json(_read_json(args.file))
    f = _resolve_formula(args, n_fallback=args.n)
    return _bool_result(alg.algebra_validates(algebra, f, args.cap), key="valid")


def _cmd_alg_dual(args) -> int:
    algebra = alg.ModalAlgebra.from_json(_read_json(args.file))
    frame = alg.dual_frame(algebra)
    if args.dot:
        _write_dot(frame, args.dot)
    _emit(frame.to_json())
    return 0


def _cmd_alg_transfer(args) -> int:
    algebra = alg.ModalAlgebra.from_json(_read_json(args.file))
    sentence = alg.parse_sentence(
        args.sentence if args.sentence is not None else _read_text(args.sentence_file)
    )
    holds, witness = alg.eval_universal(algebra, sentence, args.cap)
    if holds:
        _emit({"holds": True})
        return 1
    result = alg.transfer_countermodel(algebra.frame, algebra, args.n, sentence, witness)
    ok, new_witness = alg.eval_universal(result, sentence, args.cap)
    if ok or new_witness is None:
        raise RuntimeError("transferred algebra unexpectedly satisfies the sentence")
    assignment, index = new_witness
    _emit(
        {
            "holds": False,
            "algebra": result.to_json(),
            "witness": {
                "assignment": [sorted(kripke._worlds_from_mask(a)) for a in assignment],
                "conjunct": index,
            },
        }
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="modalcirc",
        description="workbench for modal logics of transitive frames with bounded cycles",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_cap(p):
        p.add_argument("--cap", type=int, default=DEFAULT_VALUATION_CAP,
                       help="valuation/tuple enumeration cap")

    p = sub.add_parser("parse", help="parse a formula and print its tree")
    _add_formula_args(p)
    p.add_argument("--n", type=int, help="scheme index when --scheme is parametric")
    p.set_defaults(func=_cmd_parse)

    frame = sub.add_parser("frame", help="frame operations").add_subparsers(
        dest="subcommand", required=True
    )
    p = frame.add_parser("check", help="check a frame property")
    p.add_argument("--file", required=True, help="frame JSON; - for stdin")
    p.add_argument("--prop", required=True, choices=[x.replace("_", "-") for x in kripke.PROPERTIES])
    p.set_defaults(func=_cmd_frame_check)

    p = frame.add_parser("validate", help="check frame validity of a formula")
    p.add_argument("--file", required=True)
    _add_formula_args(p)
    p.add_argument("--n", type=int, help="scheme index when --scheme is parametric")
    add_cap(p)
    p.set_defaults(func=_cmd_frame_validate)

    p = frame.add_parser("clusters", help="cluster decomposition of a transitive frame")
    p.add_argument("--file", required=True)
    p.add_argument("--dot", help="write the frame in DOT format to this path")
    p.set_defaults(func=_cmd_frame_clusters)

    p = sub.add_parser("filter", help="filtrate a model and refine its clusters")
    p.add_argument("--model", required=True, help="model JSON; - for stdin")
    p.add_argument("--phi", action="append", required=True,
                   help="formula whose subformulas join the filtration set (repeatable)")
    p.add_argument("--n", type=int, required=True, help="cycle bound of the refinement")
    p.add_argument("--variant", default="base", choices=filtration.VARIANTS)
    p.add_argument("--seed", type=int, help="seed for the linear ordering shuffle")
    p.set_defaults(func=_cmd_filter)

    p = sub.add_parser("decide", help="decide theoremhood by countermodel search")
    p.add_argument("--n", type=int, required=True, help="cycle bound of the logic")
    p.add_argument("--ext", help="comma list from d,t,three,m,e")
    _add_formula_args(p)
    p.add_argument("--max-worlds", type=int, default=decision.DEFAULT_MAX_WORLDS)
    p.add_argument("--max-frames", type=int, default=decision.DEFAULT_MAX_FRAMES)
    p.add_argument("--exhaustive", action="store_true",
                   help="allow a theorem verdict at the completeness bound")
    p.add_argument("--dot", help="write the countermodel frame in DOT format")
    add_cap(p)
    p.set_defaults(func=_cmd_decide)

    p = sub.add_parser("separate", help="witness separating two cycle bounds")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--dot", help="write the witness frame in DOT format")
    p.set_defaults(func=_cmd_separate)

    topo_sub = sub.add_parser("topo", help="finite-space operations").add_subparsers(
        dest="subcommand", required=True
    )
    p = topo_sub.add_parser("check", help="separation and irresolvability checks")
    p.add_argument("--file", required=True, help="space JSON; - for stdin")
    p.add_argument("--prop", choices=[x.replace("_", "-") for x in topo.SEPARATION_PROPERTIES])
    p.add_argument("--hered-irresolvable", type=int, metavar="N",
                   help="check hereditary N-irresolvability")
    p.set_defaults(func=_cmd_topo_check)

    p = topo_sub.add_parser("validate", help="validity under a topological semantics")
    p.add_argument("--file", required=True)
    p.add_argument("--semantics", required=True, choices=["c", "d"])
    _add_formula_args(p)
    p.add_argument("--n", type=int, help="scheme index when --scheme is parametric")
    add_cap(p)
    p.set_defaults(func=_cmd_topo_validate)

    p = topo_sub.add_parser("resolvable", help="n-resolvability of a subspace")
    p.add_argument("--file", required=True)
    p.add_argument("--k", type=int, required=True, help="number of disjoint dense parts")
    p.add_argument("--subspace", help="comma list of points; omitted = the whole space")
    p.set_defaults(func=_cmd_topo_resolvable)

    alg_sub = sub.add_parser("alg", help="modal-algebra operations").add_subparsers(
        dest="subcommand", required=True
    )
    p = alg_sub.add_parser("validate", help="validity of a formula in an algebra")
    p.add_argument("--file", required=True, help="algebra JSON; - for stdin")
    _add_formula_args(p)
    p.add_argument("--n", type=int, help="scheme index when --scheme is parametric")
    add_cap(p)
    p.set_defaults(func=_cmd_alg_validate)

    p = alg_sub.add_parser("dual", help="frame of the algebra's atoms")
    p.add_argument("--file", required=True)
    p.add_argument("--dot", help="write the dual frame in DOT format")
    p.set_defaults(func=_cmd_alg_dual)

    p = alg_sub.add_parser("transfer", help="transfer a sentence failure into a bounded-cycle powerset algebra")
    p.add_argument("--file", required=True)
    p.add_argument("--n", type=int, required=True, help="cycle bound of the target class")
    p.add_argument("--sentence", help="universal sentence text")
    p.add_argument("--sentence-file", help="file with sentence text; - for stdin")
    add_cap(p)
    p.set_defaults(func=_cmd_alg_transfer)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (
        fm.ParseError,
        ValueError,
        KeyError,
        OSError,
        BudgetExceededError,
        filtration.CoreTooLargeError,
        json.JSONDecodeError,
    ) as error:
        print(f"error: {error}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
