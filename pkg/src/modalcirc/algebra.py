"""Finite modal algebras as set algebras over a frame.

An algebra here is always concrete: a family of world sets closed under
complement, intersection, and the operator mapping a set to the worlds
all of whose successors lie in it.  Validity of formulas, satisfaction
of universal sentences, dual frames via atoms, and the countermodel
transfer into a powerset algebra of a bounded-cycle frame all work on
this representation.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

from . import formula as fm
from . import kripke
from ._sweep import DEFAULT_VALUATION_CAP, BudgetExceededError
from .decision import LogicSpec
from .filtration import filter_model, refine
from .kripke import Frame, Model, NotTransitiveError, _mask_from_worlds, _worlds_from_mask

__all__ = [
    "ModalAlgebra",
    "UniversalSentence",
    "Conjunct",
    "InvalidWitnessError",
    "complex_algebra",
    "subalgebra_generated",
    "algebra_validates",
    "dual_frame",
    "eval_universal",
    "transfer_countermodel",
    "parse_sentence",
]


class InvalidWitnessError(ValueError):
    """The supplied witness does not falsify the sentence on the algebra."""


def _box_mask(frame: Frame, a: int) -> int:
    out = 0
    for x in range(frame.world_count):
        if not frame.rows[x] & ~a:
            out |= 1 << x
    return out


class ModalAlgebra:
    """A subalgebra of the powerset algebra of a frame.

    The carrier must contain the empty and full sets and be closed
    under complement, intersection, and the box operator of the frame;
    the constructor checks all of this, plus preservation of finite
    meets by the operator.
    """

    __slots__ = ("frame", "carrier", "box_table")

    def __init__(self, frame: Frame, carrier: Iterable[Iterable[int] | int]):
        full = (1 << frame.world_count) - 1
        masks = sorted({_mask_from_worlds(c, frame.world_count) for c in carrier})
        member = set(masks)
        if 0 not in member or full not in member:
            raise ValueError("carrier must contain the empty and full sets")
        box_table = {}
        for a in masks:
            if full ^ a not in member:
                raise ValueError("carrier is not closed under complement")
            b = _box_mask(frame, a)
            if b not in member:
                raise ValueError("carrier is not closed under the box operator")
            box_table[a] = b
        for a in masks:
            for b in masks:
                if a & b not in member:
                    raise ValueError("carrier is not closed under intersection")
                if box_table[a & b] != box_table[a] & box_table[b]:
                    raise ValueError("box operator fails to preserve meets")
        if box_table[full] != full:
            raise ValueError("box operator fails to preserve the top element")
        self.frame = frame
        self.carrier = tuple(masks)
        self.box_table = box_table

    @property
    def full(self) -> int:
        return (1 << self.frame.world_count) - 1

    def atoms(self) -> tuple[int, ...]:
        """Minimal non-empty carrier elements, in mask order."""
        out = []
        for a in self.carrier:
            if a == 0:
                continue
            if not any(b != 0 and b != a and not b & ~a for b in self.carrier):
                out.append(a)
        return tuple(out)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ModalAlgebra):
            return NotImplemented
        return self.frame == other.frame and self.carrier == other.carrier

    def __repr__(self) -> str:
        return f"ModalAlgebra({self.frame!r}, {len(self.carrier)} elements)"

    def to_json(self) -> dict:
        return {
            "frame": self.frame.to_json(),
            "carrier": [list(_worlds_from_mask(c)) for c in self.carrier],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "ModalAlgebra":
        return cls(Frame.from_json(data["frame"]), [tuple(c) for c in data["carrier"]])


def complex_algebra(frame: Frame) -> ModalAlgebra:
    """The full powerset algebra of a frame."""
    return ModalAlgebra(frame, range(1 << frame.world_count))


def subalgebra_generated(frame: Frame, generators: Iterable[Iterable[int] | int]) -> ModalAlgebra:
    """Least carrier over the frame containing the generators."""
    full = (1 << frame.world_count) - 1
    masks = {0, full}
    for g in generators:
        masks.add(_mask_from_worlds(g, frame.world_count))
    changed = True
    while changed:
        changed = False
        for a in list(masks):
            for candidate in (full ^ a, _box_mask(frame, a)):
                if candidate not in masks:
                    masks.add(candidate)
                    changed = True
        for a, b in itertools.combinations(list(masks), 2):
            if a & b not in masks:
                masks.add(a & b)
                changed = True
    return ModalAlgebra(frame, masks)


def _compile_term(
    algebra: ModalAlgebra, f: fm.Formula, var_slot: Mapping[str, int]
) -> Callable[[Sequence[int]], int]:
    """Build the term function of a formula over the algebra."""
    full = algebra.full
    box = algebra.box_table
    if isinstance(f, fm.Var):
        slot = var_slot[f.name]
        return lambda t: t[slot]
    if isinstance(f, fm.Top):
        return lambda t: full
    if isinstance(f, fm.Neg):
        child = _compile_term(algebra, f.child, var_slot)
        return lambda t: full ^ child(t)
    if isinstance(f, fm.And):
        left = _compile_term(algebra, f.left, var_slot)
        right = _compile_term(algebra, f.right, var_slot)
        return lambda t: left(t) & right(t)
    if isinstance(f, fm.Box):
        child = _compile_term(algebra, f.child, var_slot)
        return lambda t: box[child(t)]
    raise TypeError(f"not a formula: {f!r}")


def algebra_validates(
    algebra: ModalAlgebra, f: fm.Formula, cap: int = DEFAULT_VALUATION_CAP
) -> bool:
    """Whether the term function of ``f`` is constantly the full set."""
    names = fm.variables(f)
    count = len(algebra.carrier) ** len(names)
    if count > cap:
        raise BudgetExceededError(f"{count} carrier tuples exceed the cap of {cap}")
    term = _compile_term(algebra, f, {name: i for i, name in enumerate(names)})
    full = algebra.full
    for tup in itertools.product(algebra.carrier, repeat=len(names)):
        if term(tup) != full:
            return False
    return True


def dual_frame(algebra: ModalAlgebra) -> Frame:
    """The frame carried by the algebra's atoms.

    An atom relates to another when it lies below the diamond of the
    other, computed inside the carrier.  For a full powerset algebra
    this reconstructs the base frame exactly.
    """
    atoms = algebra.atoms()
    full = algebra.full
    rows = []
    for a in atoms:
        row = 0
        for j, b in enumerate(atoms):
            dia_b = full ^ algebra.box_table[full ^ b]
            if not a & ~dia_b:
                row |= 1 << j
        rows.append(row)
    return Frame.from_rows(rows)


@dataclass(frozen=True)
class Conjunct:
    """A disjunction of equations and negated equations between terms."""

    positives: tuple[tuple[fm.Formula, fm.Formula], ...]
    negatives: tuple[tuple[fm.Formula, fm.Formula], ...]

    def equations(self) -> tuple[tuple[fm.Formula, fm.Formula], ...]:
        return self.positives + self.negatives


@dataclass(frozen=True)
class UniversalSentence:
    """Universally quantified conjunction of equation clauses.

    The matrix must be in conjunctive normal form and every variable of
    every term must appear in the quantifier list.
    """

    variables: tuple[str, ...]
    conjuncts: tuple[Conjunct, ...]

    def __post_init__(self):
        quantified = set(self.variables)
        for conjunct in self.conjuncts:
            for lhs, rhs in conjunct.equations():
                for term in (lhs, rhs):
                    loose = set(fm.variables(term)) - quantified
                    if loose:
                        raise ValueError(f"unquantified variables: {sorted(loose)}")


def eval_universal(
    algebra: ModalAlgebra, sentence: UniversalSentence, cap: int = DEFAULT_VALUATION_CAP
):
    """Evaluate the sentence over all carrier tuples.

    Returns (True, None) when it holds, else (False, (assignment,
    conjunct_index)) for the first falsifying assignment in carrier
    order.
    """
    names = sentence.variables
    count = len(algebra.carrier) ** len(names)
    if count > cap:
        raise BudgetExceededError(f"{count} carrier tuples exceed the cap of {cap}")
    slots = {name: i for i, name in enumerate(names)}
    compiled = []
    for conjunct in sentence.conjuncts:
        compiled.append(
            (
                [
                    (_compile_term(algebra, l, slots), _compile_term(algebra, r, slots))
                    for l, r in conjunct.positives
                ],
                [
                    (_compile_term(algebra, l, slots), _compile_term(algebra, r, slots))
                    for l, r in conjunct.negatives
                ],
            )
        )
    for tup in itertools.product(algebra.carrier, repeat=len(names)):
        for index, (positives, negatives) in enumerate(compiled):
            satisfied = any(l(tup) == r(tup) for l, r in positives) or any(
                l(tup) != r(tup) for l, r in negatives
            )
            if not satisfied:
                return False, (tup, index)
    return True, None


def transfer_countermodel(
    frame: Frame,
    algebra: ModalAlgebra,
    n: int,
    sentence: UniversalSentence,
    witness: tuple[Sequence[int], int],
) -> ModalAlgebra:
    """Shrink a sentence failure into a powerset algebra of a frame with
    cycles bounded by ``n``.

    The witness assignment becomes a valuation on the base frame; the
    model is quotiented through the subformula closure of the witnessed
    clause's equations and refined to bound the cycles.  The powerset
    algebra of the refined frame falsifies the same clause, hence the
    sentence.
    """
    if algebra.frame != frame:
        raise ValueError("the algebra is not an algebra over the given frame")
    if not kripke.check_property(frame, "transitive"):
        raise NotTransitiveError("countermodel transfer needs a transitive frame")

    assignment, index = witness
    assignment = tuple(assignment)
    if len(assignment) != len(sentence.variables):
        raise InvalidWitnessError("assignment length does not match the quantifier list")
    carrier = set(algebra.carrier)
    for a in assignment:
        if a not in carrier:
            raise InvalidWitnessError("assignment uses values outside the carrier")
    if not 0 <= index < len(sentence.conjuncts):
        raise InvalidWitnessError("no such conjunct")
    conjunct = sentence.conjuncts[index]

    slots = {name: i for i, name in enumerate(sentence.variables)}
    for lhs, rhs in conjunct.positives:
        if _compile_term(algebra, lhs, slots)(assignment) == _compile_term(
            algebra, rhs, slots
        )(assignment):
            raise InvalidWitnessError("a positive equation holds at the witness")
    for lhs, rhs in conjunct.negatives:
        if _compile_term(algebra, lhs, slots)(assignment) != _compile_term(
            algebra, rhs, slots
        )(assignment):
            raise InvalidWitnessError("a negated equation fails at the witness")

    model = Model(frame, dict(zip(sentence.variables, assignment)))
    clause_formulas = [fm.Iff(lhs, rhs) for lhs, rhs in conjunct.equations()]
    phi = fm.subformula_closure(clause_formulas)
    filtered = filter_model(model, phi)
    _, refined = refine(filtered, n, "base")

    result = complex_algebra(refined.frame)

    if not kripke.validates_logic(refined.frame, LogicSpec(n)):
        raise RuntimeError("refined frame left the admissible class")
    refined_assignment = tuple(refined.var_mask(name) for name in sentence.variables)
    full = result.full
    for position, (lhs, rhs) in enumerate(conjunct.positives):
        slots2 = {name: i for i, name in enumerate(sentence.variables)}
        value = _compile_term(result, fm.Iff(lhs, rhs), slots2)(refined_assignment)
        if value == full:
            raise RuntimeError("transfer failed to falsify a positive equation")
    for lhs, rhs in conjunct.negatives:
        slots2 = {name: i for i, name in enumerate(sentence.variables)}
        value = _compile_term(result, fm.Iff(lhs, rhs), slots2)(refined_assignment)
        if value != full:
            raise RuntimeError("transfer failed to preserve a negated equation")
    return result


# --- sentence syntax ---------------------------------------------------------
#
#   sentence := 'forall' ident* '.' conjunct ('&' conjunct)*
#   conjunct := '(' literal ('|' literal)* ')'
#   literal  := '!' '(' equation ')' | equation
#   equation := term '=' term
#
# Terms use the formula grammar at unary level; a term with a binary
# connective must be parenthesized.


def parse_sentence(text: str) -> UniversalSentence:
    """Parse a universal sentence; see the module grammar comment."""
    parser = fm._Parser(text, fm.tokenize(text))

    tok = parser.peek()
    if not (tok.kind == "ident" and tok.text == "forall"):
        raise parser.fail({"forall"})
    parser.advance()
    names = []
    while parser.peek().kind == "ident":
        names.append(parser.advance().text)
    parser.expect(".")

    def term() -> fm.Formula:
        return parser.unary()

    def equation() -> tuple[fm.Formula, fm.Formula]:
        lhs = term()
        parser.expect("=")
        return lhs, term()

    def conjunct() -> Conjunct:
        parser.expect("(")
        positives = []
        negatives = []
        while True:
            if parser.peek().kind == "!":
                parser.advance()
                parser.expect("(")
                negatives.append(equation())
                parser.expect(")")
            else:
                positives.append(equation())
            if parser.peek().kind != "|":
                break
            parser.advance()
        parser.expect(")")
        return Conjunct(tuple(positives), tuple(negatives))

    conjuncts = [conjunct()]
    while parser.peek().kind == "&":
        parser.advance()
        conjuncts.append(conjunct())
    if parser.peek().kind != "end":
        raise parser.fail({"&", "end of input"})
    return UniversalSentence(tuple(names), tuple(conjuncts))
