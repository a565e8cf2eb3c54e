"""Modal formula ASTs, parser, printer, and axiom-scheme builders.

Formulas are immutable trees over five primitive node kinds: variables,
the constant truth, negation, conjunction, and the universal modality.
Every derived connective (falsum, disjunction, implication, biconditional,
the existential modality, and the reflexive-closure modalities) is
desugared into primitives at construction time, so all semantic code in
the package evaluates exactly one small language.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence


class Formula:
    """Base class of the primitive formula nodes."""

    __slots__ = ()

    def __repr__(self) -> str:
        return f"<Formula {pretty(self)!r}>"


@dataclass(frozen=True, slots=True, repr=False)
class Var(Formula):
    name: str


@dataclass(frozen=True, slots=True, repr=False)
class Top(Formula):
    pass


@dataclass(frozen=True, slots=True, repr=False)
class Neg(Formula):
    child: Formula


@dataclass(frozen=True, slots=True, repr=False)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, slots=True, repr=False)
class Box(Formula):
    child: Formula


# Derived constructors.  Each returns a primitive tree.

def Bot() -> Formula:
    return Neg(Top())


def Dia(child: Formula) -> Formula:
    return Neg(Box(Neg(child)))


def Or(left: Formula, right: Formula) -> Formula:
    return Neg(And(Neg(left), Neg(right)))


def Imp(left: Formula, right: Formula) -> Formula:
    return Neg(And(left, Neg(right)))


def Iff(left: Formula, right: Formula) -> Formula:
    return And(Imp(left, right), Imp(right, left))


def BoxStar(child: Formula) -> Formula:
    """Truth at the point itself and at every successor."""
    return And(child, Box(child))


def DiaStar(child: Formula) -> Formula:
    """Truth at the point itself or at some successor."""
    return Or(child, Dia(child))


def immediate_subformulas(f: Formula) -> tuple[Formula, ...]:
    match f:
        case Neg(child) | Box(child):
            return (child,)
        case And(left, right):
            return (left, right)
        case _:
            return ()


def variables(f: Formula) -> tuple[str, ...]:
    """Sorted names of the variables occurring in ``f``."""
    out: set[str] = set()
    stack = [f]
    while stack:
        g = stack.pop()
        if isinstance(g, Var):
            out.add(g.name)
        else:
            stack.extend(immediate_subformulas(g))
    return tuple(sorted(out))


def node_count(f: Formula) -> int:
    """Number of nodes of the primitive tree (with multiplicity)."""
    total = 0
    stack = [f]
    while stack:
        g = stack.pop()
        total += 1
        stack.extend(immediate_subformulas(g))
    return total


class FormulaSet:
    """Finite ordered collection of formulas, deduplicated structurally.

    Iteration order is insertion order after deduplication.  Equality is
    order-insensitive.
    """

    __slots__ = ("_items", "_index")

    def __init__(self, formulas: Iterable[Formula] = ()):
        items: list[Formula] = []
        index: set[Formula] = set()
        for f in formulas:
            if not isinstance(f, Formula):
                raise TypeError(f"expected Formula, got {type(f).__name__}")
            if f not in index:
                index.add(f)
                items.append(f)
        self._items = tuple(items)
        self._index = frozenset(index)

    def __iter__(self):
        return iter(self._items)

    def __len__(self) -> int:
        return len(self._items)

    def __contains__(self, f: object) -> bool:
        return f in self._index

    def __getitem__(self, i: int) -> Formula:
        return self._items[i]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FormulaSet):
            return NotImplemented
        return self._index == other._index

    def __hash__(self) -> int:
        return hash(self._index)

    def __repr__(self) -> str:
        return f"FormulaSet([{', '.join(pretty(f) for f in self._items)}])"


def subformula_closure(formulas: Iterable[Formula]) -> FormulaSet:
    """Smallest superset of ``formulas`` closed under immediate subformulas.

    The result lists each formula before its subformulas, in first-seen
    order, which keeps downstream serializations deterministic.
    """
    out: list[Formula] = []
    seen: set[Formula] = set()

    def add(f: Formula) -> None:
        if f in seen:
            return
        seen.add(f)
        out.append(f)
        for g in immediate_subformulas(f):
            add(g)

    for f in formulas:
        add(f)
    return FormulaSet(out)


def mckinsey_closure(formulas: Iterable[Formula]) -> FormulaSet:
    """Subformula closure of boxed truth and falsity of every subformula.

    Starting from the subformula closure S of the input, this closes
    {box f, box ~f : f in S} under subformulas.  It is the formula set a
    filtration needs in order to keep final clusters simple when the
    source model satisfies the McKinsey axiom.
    """
    base = subformula_closure(formulas)
    boxed: list[Formula] = []
    for f in base:
        boxed.append(Box(f))
        boxed.append(Box(Neg(f)))
    return subformula_closure(boxed)


def _conjoin(parts: Sequence[Formula]) -> Formula:
    """Conjunction of ``parts`` associated to the right; Top when empty."""
    if not parts:
        return Top()
    out = parts[-1]
    for p in reversed(parts[:-1]):
        out = And(p, out)
    return out


def _check_arity(n: int, args: Sequence[Formula]) -> None:
    if n < 0:
        raise ValueError(f"scheme index must be >= 0, got {n}")
    if len(args) != n + 1:
        raise ValueError(f"scheme of index {n} needs {n + 1} arguments, got {len(args)}")


def disjointness_scheme(n: int, args: Sequence[Formula]) -> Formula:
    """Pairwise incompatibility of ``args``: the conjunction over all
    i < j of ~(args[i] & args[j]), in lexicographic (i, j) order.

    With a single argument the conjunction is empty and the result is Top.
    """
    _check_arity(n, args)
    parts = [
        Neg(And(args[i], args[j]))
        for i in range(n + 1)
        for j in range(i + 1, n + 1)
    ]
    return _conjoin(parts)


def path_scheme(n: int, args: Sequence[Formula]) -> Formula:
    """Nested-diamond formula asserting a successor path through
    args[1], ..., args[n] that ends in a point satisfying args[0]."""
    _check_arity(n, args)
    if n == 0:
        return Dia(args[0])
    rest = [args[0], *args[2:]]
    return Dia(And(args[1], path_scheme(n - 1, rest)))


def bounded_cycle_axiom(n: int, args: Sequence[Formula], star: bool = False) -> Formula:
    """The axiom instance whose frame validity bounds cycle length by ``n``.

    Shape: if the arguments are pairwise incompatible here and everywhere
    later, then any reachable args[0]-point can be chosen so that no
    further path cycles through args[1..n] back to args[0].  With
    ``star`` the final diamond also admits the current point itself,
    which yields the weakened variant used over weak transitivity.
    """
    _check_arity(n, args)
    tail = And(args[0], Neg(path_scheme(n, args)))
    consequent = DiaStar(tail) if star else Dia(tail)
    return Imp(BoxStar(disjointness_scheme(n, args)), Imp(Dia(args[0]), consequent))


def scheme_variables(n: int) -> list[Formula]:
    """The canonical fresh variables p0..pn used for scheme instances."""
    return [Var(f"p{i}") for i in range(n + 1)]


def _p(i: int) -> Formula:
    return Var(f"p{i}")


NAMED_AXIOMS: dict[str, Callable[[], Formula]] = {
    "k": lambda: Imp(Box(Imp(_p(0), _p(1))), Imp(Box(_p(0)), Box(_p(1)))),
    "4": lambda: Imp(Box(_p(0)), Box(Box(_p(0)))),
    "w4": lambda: Imp(Dia(Dia(_p(0))), DiaStar(_p(0))),
    "t": lambda: Imp(Box(_p(0)), _p(0)),
    "d": lambda: Dia(Top()),
    "lob": lambda: Imp(Box(Imp(Box(_p(0)), _p(0))), Box(_p(0))),
    "duallob": lambda: Imp(Dia(_p(0)), Dia(And(_p(0), Neg(Dia(_p(0)))))),
    "grz": lambda: Imp(Box(Imp(Box(Imp(_p(0), Box(_p(0)))), _p(0))), _p(0)),
    "grzbox": lambda: Imp(Box(Imp(Box(Imp(_p(0), Box(_p(0)))), _p(0))), Box(_p(0))),
    "digrz": lambda: Imp(
        Dia(_p(0)),
        Dia(And(_p(0), Neg(Dia(And(Neg(_p(0)), Dia(_p(0))))))),
    ),
    "m": lambda: Imp(Box(Dia(_p(0))), Dia(Box(_p(0)))),
    "mequiv": lambda: Dia(Or(Box(_p(0)), Box(Neg(_p(0))))),
    "e": lambda: Or(Box(Bot()), Dia(Box(Bot()))),
    "point3": lambda: Or(
        Box(Imp(And(_p(0), Box(_p(0))), _p(1))),
        Box(Imp(And(_p(1), Box(_p(1))), _p(0))),
    ),
}


def named_axiom(name: str) -> Formula:
    """Look up an axiom by name (case and -/_ insensitive).

    Known names: k, 4, w4, t, d, lob, dual-lob, grz, grz-box, di-grz,
    m, m-equiv, e, point3.
    """
    key = name.lower().replace("-", "").replace("_", "")
    try:
        builder = NAMED_AXIOMS[key]
    except KeyError:
        known = ", ".join(sorted(NAMED_AXIOMS))
        raise ValueError(f"unknown axiom {name!r}; known: {known}") from None
    return builder()


# ---------------------------------------------------------------------------
# Concrete syntax.
#
# Grammar (ASCII, with unicode aliases accepted on input):
#
#   formula  := iff
#   iff      := imp ('<->' iff)?                  right-associative
#   imp      := or  ('->' imp)?                   right-associative
#   or       := and ('|' and)*                    left-associative
#   and      := unary ('&' unary)*                left-associative
#   unary    := ('~' | 'box' | 'dia' | 'boxs' | 'dias')* atom
#   atom     := 'top' | 'bot' | identifier | '(' formula ')'
#
# Identifiers other than the keywords denote variables.

_UNICODE_ALIASES = {
    "□": "box",   # white square
    "◇": "dia",   # white diamond
    "⊤": "top",
    "⊥": "bot",
    "¬": "~",
    "∧": "&",
    "∨": "|",
    "→": "->",
    "↔": "<->",
}

_KEYWORDS = frozenset({"top", "bot", "box", "dia", "boxs", "dias"})

_UNARY_BUILDERS: dict[str, Callable[[Formula], Formula]] = {
    "box": Box,
    "dia": Dia,
    "boxs": BoxStar,
    "dias": DiaStar,
}


class ParseError(ValueError):
    """Syntax error carrying the byte offset and the expected token set."""

    def __init__(self, text: str, char_pos: int, expected: Iterable[str], found: str):
        self.offset = len(text[:char_pos].encode("utf-8"))
        self.expected = frozenset(expected)
        self.found = found
        wanted = ", ".join(sorted(self.expected))
        super().__init__(
            f"syntax error at byte {self.offset}: found {found}, expected one of: {wanted}"
        )


@dataclass(frozen=True, slots=True)
class Token:
    kind: str   # "ident" or the operator spelling itself; "end" at EOF
    text: str
    pos: int    # character position in the source


def tokenize(text: str) -> list[Token]:
    """Tokenize formula or sentence syntax.  Raises ParseError on junk."""
    tokens: list[Token] = []
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c in _UNICODE_ALIASES:
            alias = _UNICODE_ALIASES[c]
            kind = "ident" if alias.isalpha() else alias
            tokens.append(Token(kind, alias, i))
            i += 1
            continue
        if text.startswith("<->", i):
            tokens.append(Token("<->", "<->", i))
            i += 3
            continue
        if text.startswith("->", i):
            tokens.append(Token("->", "->", i))
            i += 2
            continue
        if c in "~&|()=!.":
            tokens.append(Token(c, c, i))
            i += 1
            continue
        if c.isalpha() or c == "_":
            j = i + 1
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(Token("ident", text[i:j], i))
            i = j
            continue
        raise ParseError(text, i, {"token"}, repr(c))
    tokens.append(Token("end", "", n))
    return tokens


_ATOM_EXPECTED = frozenset({"top", "bot", "variable", "(", "~", "box", "dia", "boxs", "dias"})


class _Parser:
    def __init__(self, text: str, tokens: list[Token]):
        self.text = text
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def fail(self, expected: Iterable[str]) -> ParseError:
        tok = self.peek()
        found = "end of input" if tok.kind == "end" else repr(tok.text)
        return ParseError(self.text, tok.pos, expected, found)

    def expect(self, kind: str) -> Token:
        if self.peek().kind != kind:
            raise self.fail({kind})
        return self.advance()

    def formula(self) -> Formula:
        return self.iff()

    def iff(self) -> Formula:
        left = self.imp()
        if self.peek().kind == "<->":
            self.advance()
            return Iff(left, self.iff())
        return left

    def imp(self) -> Formula:
        left = self.or_()
        if self.peek().kind == "->":
            self.advance()
            return Imp(left, self.imp())
        return left

    def or_(self) -> Formula:
        left = self.and_()
        while self.peek().kind == "|":
            self.advance()
            left = Or(left, self.and_())
        return left

    def and_(self) -> Formula:
        left = self.unary()
        while self.peek().kind == "&":
            self.advance()
            left = And(left, self.unary())
        return left

    def unary(self) -> Formula:
        tok = self.peek()
        if tok.kind == "~":
            self.advance()
            return Neg(self.unary())
        if tok.kind == "ident" and tok.text in _UNARY_BUILDERS:
            self.advance()
            return _UNARY_BUILDERS[tok.text](self.unary())
        return self.atom()

    def atom(self) -> Formula:
        tok = self.peek()
        if tok.kind == "(":
            self.advance()
            inner = self.formula()
            self.expect(")")
            return inner
        if tok.kind == "ident":
            if tok.text == "top":
                self.advance()
                return Top()
            if tok.text == "bot":
                self.advance()
                return Bot()
            if tok.text in _KEYWORDS:
                raise self.fail(_ATOM_EXPECTED)
            self.advance()
            return Var(tok.text)
        raise self.fail(_ATOM_EXPECTED)


def parse(text: str) -> Formula:
    """Parse a formula.  Raises ParseError with byte offset on bad input."""
    parser = _Parser(text, tokenize(text))
    out = parser.formula()
    if parser.peek().kind != "end":
        raise parser.fail({"end of input", "&", "|", "->", "<->"})
    return out


# Printer.  Emits canonical ASCII that reparses to the identical tree.

_PREC_IFF = 1
_PREC_IMP = 2
_PREC_OR = 3
_PREC_AND = 4
_PREC_UNARY = 5
_PREC_ATOM = 6


def _sugar(f: Formula):
    """Recognize the printable derived forms of a primitive tree.

    The negated-conjunction shape is shared by implication and
    disjunction; the disjunction reading is used only when the left
    conjunct is a plain negation, so that antecedents such as diamonds
    keep their implication form.
    """
    match f:
        case Neg(Top()):
            return ("bot",)
        case Neg(Box(Neg(x))):
            return ("dia", x)
        case Neg(And(Neg(x), Neg(Neg(Box(Neg(y)))))) if x == y:
            return ("dias", x)
        case Neg(And(left, Neg(right))):
            if isinstance(left, Neg) and _sugar(left) is None:
                return ("or", left.child, right)
            return ("imp", left, right)
        case And(Neg(And(x, Neg(y))), Neg(And(y2, Neg(x2)))) if x == x2 and y == y2:
            return ("iff", x, y)
        case And(x, Box(y)) if x == y:
            return ("boxs", x)
        case _:
            return None


def _fmt(f: Formula, min_prec: int) -> str:
    sugar = _sugar(f)
    if sugar is not None:
        kind = sugar[0]
        if kind == "bot":
            return "bot"
        if kind in ("dia", "dias", "boxs"):
            text = f"{kind} {_fmt(sugar[1], _PREC_UNARY)}"
            prec = _PREC_UNARY
        elif kind == "or":
            text = f"{_fmt(sugar[1], _PREC_OR)} | {_fmt(sugar[2], _PREC_OR + 1)}"
            prec = _PREC_OR
        elif kind == "imp":
            text = f"{_fmt(sugar[1], _PREC_IMP + 1)} -> {_fmt(sugar[2], _PREC_IMP)}"
            prec = _PREC_IMP
        else:  # iff
            text = f"{_fmt(sugar[1], _PREC_IFF + 1)} <-> {_fmt(sugar[2], _PREC_IFF)}"
            prec = _PREC_IFF
        return f"({text})" if prec < min_prec else text

    match f:
        case Var(name):
            return name
        case Top():
            return "top"
        case Neg(child):
            return f"~{_fmt(child, _PREC_UNARY)}"
        case Box(child):
            return f"box {_fmt(child, _PREC_UNARY)}"
        case And(left, right):
            text = f"{_fmt(left, _PREC_AND)} & {_fmt(right, _PREC_AND + 1)}"
            return f"({text})" if _PREC_AND < min_prec else text
    raise TypeError(f"not a formula: {f!r}")


def pretty(f: Formula) -> str:
    """Canonical text form; ``parse(pretty(f)) == f`` for every tree."""
    return _fmt(f, 0)
