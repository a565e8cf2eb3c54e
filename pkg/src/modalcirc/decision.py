"""Bounded theoremhood decision by countermodel search.

A logic is specified by the cycle-length bound ``n`` plus optional frame
conditions (seriality, reflexivity, connectedness, simple or degenerate
final clusters).  Deciding a formula searches the admissible finite
frames in a fixed order, smallest first; a falsifying frame yields a
sound non-theorem verdict, and exhausting every frame up to the
completeness bound yields a theorem verdict.  Anything short of that is
reported as unknown rather than guessed.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator

from . import formula as fm
from . import kripke
from ._sweep import DEFAULT_VALUATION_CAP, BudgetExceededError
from .kripke import Frame, Model

__all__ = [
    "EXTENSIONS",
    "LogicSpec",
    "Verdict",
    "InconsistentLogicError",
    "completeness_bound",
    "enumerate_frames",
    "decide",
    "separate_logics",
]

EXTENSIONS = ("d", "t", "three", "m", "e")

DEFAULT_MAX_WORLDS = 5
DEFAULT_MAX_FRAMES = 50_000


class InconsistentLogicError(ValueError):
    """The requested logic proves everything; no frames exist for it."""


@dataclass(frozen=True)
class LogicSpec:
    """Cycle bound plus extension axioms selecting a frame class."""

    n: int
    extensions: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("the cycle bound must be >= 0")
        exts = frozenset(str(e).lower() for e in self.extensions)
        unknown = exts - set(EXTENSIONS)
        if unknown:
            raise ValueError(
                f"unknown extensions {sorted(unknown)}; known: {', '.join(EXTENSIONS)}"
            )
        object.__setattr__(self, "extensions", exts)
        if "t" in exts and self.n == 0:
            raise InconsistentLogicError(
                "reflexivity with cycle bound 0 is the inconsistent logic"
            )

    def __str__(self) -> str:
        if not self.extensions:
            return f"n={self.n}"
        return f"n={self.n}+{','.join(sorted(self.extensions))}"


def completeness_bound(f: fm.Formula, spec: LogicSpec | None = None) -> int:
    """Frame size past which no new countermodels can appear: 2**k for k
    the size of the primitive subformula closure.

    With the simple-final-clusters extension the closure is the larger
    boxed one the corresponding filtration needs.
    """
    if spec is not None and "m" in spec.extensions:
        closure = fm.mckinsey_closure([f])
    else:
        closure = fm.subformula_closure([f])
    return 2 ** len(closure)


# --- enumeration of admissible frames, up to isomorphism ---------------------
#
# A finite transitive frame is determined by a strict partial order of
# clusters plus a size label per cluster: 0 for a degenerate cluster
# (one irreflexive world) or s >= 1 for a non-degenerate cluster of s
# mutually related reflexive worlds.  Frames are isomorphic exactly when
# their labeled cluster orders are, so enumeration works on canonical
# posets with labelings deduplicated under poset automorphisms.


def _poset_bits(rows: tuple[int, ...], perm) -> int:
    m = len(rows)
    bits = 0
    for x in range(m):
        row = rows[x]
        for y in range(m):
            if row >> y & 1:
                bits |= 1 << (perm[x] * m + perm[y])
    return bits


def _bit_indices(mask: int):
    out = []
    index = 0
    while mask:
        if mask & 1:
            out.append(index)
        mask >>= 1
        index += 1
    return out


def _refinement_classes(rows: tuple[int, ...]) -> list[list[int]]:
    """Partition elements by iterated up/down neighborhood structure.

    The partition is an isomorphism invariant, so isomorphisms map its
    classes onto each other; canonical labeling only needs to try the
    orderings that keep each class together.
    """
    m = len(rows)
    preds = [0] * m
    for x in range(m):
        for y in _bit_indices(rows[x]):
            preds[y] |= 1 << x
    # seed so that elements nearer the roots take smaller positions
    initial = [
        (bin(preds[x]).count("1"), m - bin(rows[x]).count("1")) for x in range(m)
    ]
    first_ranks = {sig: i for i, sig in enumerate(sorted(set(initial)))}
    colors = [first_ranks[sig] for sig in initial]
    while True:
        signatures = [
            (
                colors[x],
                tuple(sorted(colors[y] for y in _bit_indices(rows[x]))),
                tuple(sorted(colors[y] for y in _bit_indices(preds[x]))),
            )
            for x in range(m)
        ]
        ranks = {sig: i for i, sig in enumerate(sorted(set(signatures)))}
        refined = [ranks[sig] for sig in signatures]
        if refined == colors:
            break
        colors = refined
    classes: dict[int, list[int]] = {}
    for x in range(m):
        classes.setdefault(colors[x], []).append(x)
    return [classes[c] for c in sorted(classes)]


def _class_respecting_perms(rows: tuple[int, ...]):
    """Permutations that arrange each refinement class contiguously."""
    m = len(rows)
    groups = _refinement_classes(rows)
    for arrangement in itertools.product(
        *[itertools.permutations(group) for group in groups]
    ):
        perm = [0] * m
        position = 0
        for group in arrangement:
            for x in group:
                perm[x] = position
                position += 1
        yield tuple(perm)


@lru_cache(maxsize=None)
def _strict_posets(m: int) -> tuple[tuple[tuple[int, ...], tuple[tuple[int, ...], ...]], ...]:
    """Canonical strict posets on m elements with their automorphisms.

    Returns (rows, automorphisms) pairs sorted by canonical relation
    bits; rows[i] is the bitmask of elements strictly above i.
    """
    labeled: list[tuple[int, ...]] = [()]
    for k in range(m):
        extended = []
        for rows in labeled:
            for below in range(1 << k):
                # the set of old elements under the new one must be
                # closed downward: y < x and x in below implies y in below
                if any(
                    below >> x & 1 and rows[y] >> x & 1 and not below >> y & 1
                    for x in range(k)
                    for y in range(k)
                ):
                    continue
                for above in range(1 << k):
                    if above & below:
                        continue
                    # closed upward, and everything below must already
                    # sit under everything above (transitivity)
                    if any(above >> x & 1 and rows[x] & ~above for x in range(k)):
                        continue
                    if any(below >> x & 1 and above & ~rows[x] for x in range(k)):
                        continue
                    new_rows = [
                        rows[x] | (1 << k if below >> x & 1 else 0) for x in range(k)
                    ]
                    new_rows.append(above)
                    extended.append(tuple(new_rows))
        labeled = extended

    seen: dict[int, tuple[int, ...]] = {}
    for rows in labeled:
        best_bits = None
        best_perm = None
        for perm in _class_respecting_perms(rows):
            bits = _poset_bits(rows, perm)
            if best_bits is None or bits < best_bits:
                best_bits = bits
                best_perm = perm
        if best_bits not in seen:
            canon_rows = [0] * m
            for x in range(m):
                for y in _bit_indices(rows[x]):
                    canon_rows[best_perm[x]] |= 1 << best_perm[y]
            seen[best_bits] = tuple(canon_rows)
    out = []
    for canon in sorted(seen):
        rows = seen[canon]
        autos = tuple(
            perm
            for perm in _class_respecting_perms(rows)
            if _poset_bits(rows, perm) == canon
        )
        out.append((rows, autos))
    return tuple(out)


def _is_chain(rows: tuple[int, ...]) -> bool:
    m = len(rows)
    return all(
        rows[x] >> y & 1 or rows[y] >> x & 1 for x in range(m) for y in range(x + 1, m)
    )


def _labelings(
    poset_rows: tuple[int, ...],
    autos,
    total_worlds: int,
    spec: LogicSpec,
) -> Iterator[tuple[int, ...]]:
    """Size labels per cluster: 0 = degenerate, s >= 1 = cluster of s.

    Yields only labelings canonical under the poset automorphisms and
    compatible with the extension conditions on final clusters.
    """
    m = len(poset_rows)
    finals = [x for x in range(m) if not poset_rows[x]]
    options = list(range(0, spec.n + 1)) if "t" not in spec.extensions else list(
        range(1, spec.n + 1)
    )

    def weight(label: int) -> int:
        return 1 if label == 0 else label

    for labels in itertools.product(options, repeat=m):
        if sum(weight(l) for l in labels) != total_worlds:
            continue
        ok = True
        for x in finals:
            if "d" in spec.extensions and labels[x] == 0:
                ok = False
            if "m" in spec.extensions and labels[x] != 1:
                ok = False
            if "e" in spec.extensions and labels[x] != 0:
                ok = False
        if not ok:
            continue
        if len(autos) > 1:
            canon = min(tuple(labels[p[i]] for i in range(m)) for p in autos)
            if labels != canon:
                continue
        yield labels


def _build_frame(poset_rows: tuple[int, ...], labels: tuple[int, ...]) -> Frame:
    m = len(poset_rows)
    weights = [1 if l == 0 else l for l in labels]
    starts = [0] * m
    acc = 0
    for i in range(m):
        starts[i] = acc
        acc += weights[i]
    rows = [0] * acc
    for i in range(m):
        members = range(starts[i], starts[i] + weights[i])
        if labels[i] >= 1:
            block = 0
            for w in members:
                block |= 1 << w
            for w in members:
                rows[w] |= block
        for j in range(m):
            if poset_rows[i] >> j & 1:
                block = 0
                for w in range(starts[j], starts[j] + weights[j]):
                    block |= 1 << w
                for w in members:
                    rows[w] |= block
    return Frame.from_rows(rows)


def enumerate_frames(max_worlds: int, spec: LogicSpec) -> Iterator[Frame]:
    """All admissible frames with at most ``max_worlds`` worlds, up to
    isomorphism, in ascending world count then canonical order.

    With the connectedness extension only connected frames are emitted;
    they are complete for theoremhood and every one of them is
    admissible, but weakly connected disconnected frames are skipped.
    """
    if max_worlds < 0:
        raise ValueError("max_worlds must be >= 0")
    for total in range(1, max_worlds + 1):
        for m in range(1, total + 1):
            for poset_rows, autos in _strict_posets(m):
                if "three" in spec.extensions and not _is_chain(poset_rows):
                    continue
                for labels in _labelings(poset_rows, autos, total, spec):
                    yield _build_frame(poset_rows, labels)


@dataclass(frozen=True)
class Verdict:
    """Outcome of a bounded decision run.

    A non-theorem verdict always carries a countermodel that was
    re-checked against the frame class and the formula; a theorem
    verdict is only produced by an exhaustive run reaching the
    completeness bound.
    """

    kind: str                      # "theorem" | "non_theorem" | "unknown"
    countermodel: Model | None
    searched_bound: int
    exhaustive: bool

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "countermodel": None if self.countermodel is None else self.countermodel.to_json(),
            "searched_bound": self.searched_bound,
            "exhaustive": self.exhaustive,
        }


def decide(
    spec: LogicSpec,
    f: fm.Formula,
    max_worlds: int = DEFAULT_MAX_WORLDS,
    max_frames: int = DEFAULT_MAX_FRAMES,
    exhaustive: bool = False,
    valuation_cap: int = DEFAULT_VALUATION_CAP,
) -> Verdict:
    """Search admissible frames for a countermodel to ``f``.

    Returns the first falsifying model found (smallest frame first).
    In exhaustive mode a theorem verdict is returned once every frame up
    to the completeness bound has been checked; otherwise, or when any
    budget stops the search early, the verdict is unknown.
    """
    if max_worlds <= 0:
        raise ValueError("max_worlds budget must be positive")
    if max_frames <= 0:
        raise ValueError("max_frames budget must be positive")

    bound = completeness_bound(f, spec)
    limit = min(max_worlds, bound) if exhaustive else max_worlds

    checked = 0
    completed_size = 0
    truncated = False
    current_size = 0
    for frame in enumerate_frames(limit, spec):
        if frame.world_count != current_size:
            completed_size = current_size
            current_size = frame.world_count
        if checked >= max_frames:
            truncated = True
            break
        try:
            hit = kripke.find_countermodel(frame, f, valuation_cap)
        except BudgetExceededError:
            truncated = True
            break
        checked += 1
        if hit is not None:
            model, world = hit
            if not kripke.validates_logic(frame, spec):
                raise RuntimeError("enumerated frame fails its own frame class")
            if world in kripke.truth_set(model, f):
                raise RuntimeError("countermodel does not falsify the formula")
            return Verdict("non_theorem", model, frame.world_count, False)
    else:
        completed_size = current_size if not truncated else completed_size

    if truncated:
        return Verdict("unknown", None, completed_size, False)
    if exhaustive and limit >= bound:
        return Verdict("theorem", None, bound, True)
    return Verdict("unknown", None, limit, False)


def separate_logics(n: int, m: int) -> tuple[fm.Formula, Model]:
    """Witness that the bound-n logic is strictly stronger than bound-m.

    Returns the bound-n axiom instance and a falsifying model on a
    single cluster of n+1 worlds, whose frame is admissible at bound m.
    """
    if not 0 <= n < m:
        raise ValueError("need 0 <= n < m")
    f = fm.bounded_cycle_axiom(n, fm.scheme_variables(n))
    size = n + 1
    frame = Frame(size, [(i, j) for i in range(size) for j in range(size)])
    model = Model(frame, {f"p{i}": [i] for i in range(size)})
    if kripke.truth_set(model, f) == frozenset(range(size)):
        raise RuntimeError("separation model unexpectedly satisfies the axiom")
    if not kripke.validates_logic(frame, LogicSpec(m)):
        raise RuntimeError("separation frame is not admissible at the larger bound")
    return f, model
