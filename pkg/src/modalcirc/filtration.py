"""Quotients of finite models through subformula-closed formula sets,
and the cluster refinements that bound cycle length in the quotient.

The quotient identifies worlds agreeing on every formula of the given
set and relates classes by the standard transitive recipe.  Each
quotient cluster then gets a critical world whose visible core becomes
the only non-singleton cluster the refined relation keeps; the three
refinement variants differ in what happens to the leftover classes
(incomparable points, reflexive points, or a linear run-up).
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterable

from . import formula as fm
from . import kripke
from .kripke import Frame, Model, NotTransitiveError

__all__ = [
    "FiltrationResult",
    "ClusterRefinement",
    "PhiNotClosedError",
    "CoreTooLargeError",
    "filter_model",
    "critical_point",
    "refine",
    "class_formula",
]


class PhiNotClosedError(ValueError):
    """The formula set is not closed under immediate subformulas."""


class CoreTooLargeError(RuntimeError):
    """A cluster core exceeded the cycle bound; the source model does not
    satisfy the bounded-cycle axiom the construction assumes."""


class FiltrationResult:
    """The quotient model data: classes, their relation, and their truth.

    Classes are indexed in order of their smallest source world, so all
    derived serializations are deterministic.
    """

    __slots__ = ("source", "phi", "class_of", "classes", "r_phi", "_signatures")

    def __init__(self, source: Model, phi: fm.FormulaSet, class_of, classes, r_phi, signatures):
        self.source = source
        self.phi = phi
        self.class_of: tuple[int, ...] = class_of
        self.classes: tuple[tuple[int, ...], ...] = classes
        self.r_phi: Frame = r_phi
        self._signatures: tuple[frozenset[fm.Formula], ...] = signatures

    def class_truth(self, class_index: int, f: fm.Formula) -> bool:
        """Truth of a formula of the closed set at a class."""
        if f not in self.phi:
            raise ValueError(f"{fm.pretty(f)} is not in the filtration set")
        return f in self._signatures[class_index]

    def filtered_model(self) -> Model:
        """The quotient model itself, with classes as worlds."""
        valuation = {}
        for f in self.phi:
            if isinstance(f, fm.Var):
                mask = 0
                for idx, signature in enumerate(self._signatures):
                    if f in signature:
                        mask |= 1 << idx
                valuation[f.name] = mask
        return Model(self.r_phi, valuation)

    def to_json(self) -> dict:
        return {
            "classes": [list(c) for c in self.classes],
            "r_phi": [list(e) for e in self.r_phi.edges],
        }


def filter_model(model: Model, phi: Iterable[fm.Formula]) -> FiltrationResult:
    """Quotient ``model`` by agreement on the subformula-closed set ``phi``.

    Raises NotTransitiveError for non-transitive sources and
    PhiNotClosedError when ``phi`` misses an immediate subformula.
    """
    frame = model.frame
    if not kripke.check_property(frame, "transitive"):
        raise NotTransitiveError("filtration needs a transitive source model")
    phi_set = phi if isinstance(phi, fm.FormulaSet) else fm.FormulaSet(phi)
    for f in phi_set:
        for g in fm.immediate_subformulas(f):
            if g not in phi_set:
                raise PhiNotClosedError(
                    f"{fm.pretty(g)} is a subformula of {fm.pretty(f)} but missing"
                )

    memo: dict = {}
    truth = {f: kripke._truth_mask(model, f, memo) for f in phi_set}

    signature_of_world = []
    for x in range(frame.world_count):
        signature_of_world.append(frozenset(f for f in phi_set if truth[f] >> x & 1))

    class_of = [-1] * frame.world_count
    classes: list[list[int]] = []
    signatures: list[frozenset] = []
    index_by_signature: dict[frozenset, int] = {}
    for x in range(frame.world_count):
        signature = signature_of_world[x]
        idx = index_by_signature.get(signature)
        if idx is None:
            idx = len(classes)
            index_by_signature[signature] = idx
            classes.append([])
            signatures.append(signature)
        class_of[x] = idx
        classes[idx].append(x)

    box_pairs = [(f, f.child) for f in phi_set if isinstance(f, fm.Box)]
    count = len(classes)
    edges = []
    for a in range(count):
        for b in range(count):
            ok = True
            for boxed, child in box_pairs:
                if boxed in signatures[a] and not (
                    boxed in signatures[b] and child in signatures[b]
                ):
                    ok = False
                    break
            if ok:
                edges.append((a, b))
    r_phi = Frame(count, edges)

    result = FiltrationResult(
        source=model,
        phi=phi_set,
        class_of=tuple(class_of),
        classes=tuple(tuple(c) for c in classes),
        r_phi=r_phi,
        signatures=tuple(signatures),
    )

    # sanity: the quotient relation is transitive and covers the source
    if not kripke.check_property(r_phi, "transitive"):
        raise RuntimeError("quotient relation failed to be transitive")
    for x in range(frame.world_count):
        for y in frame.successors(x):
            if not r_phi.has_edge(class_of[x], class_of[y]):
                raise RuntimeError("quotient relation failed to cover the source relation")
    return result


def _sees_class(result: FiltrationResult, world: int, class_index: int) -> bool:
    rows = result.source.frame.rows
    return any(rows[world] >> y & 1 for y in result.classes[class_index])


def critical_point(
    result: FiltrationResult, cluster: Iterable[int], n: int
) -> tuple[int, frozenset[int]]:
    """Pick the cluster's critical world and its visible core.

    Among source worlds whose class lies in the cluster, the critical
    world minimizes the set of cluster classes it has a successor in;
    ties break on the smallest class representative, then the smallest
    world index.  The returned core is that minimal visible set.

    Raises CoreTooLargeError when the minimal core still has more than
    ``n`` classes, which signals that the source model violates the
    bounded-cycle assumption.
    """
    cluster = sorted(cluster)
    members = set(cluster)
    count = result.r_phi.world_count
    for a in cluster:
        if not 0 <= a < count:
            raise ValueError(f"class index {a} out of range")
        for b in cluster:
            if a != b and not (result.r_phi.has_edge(a, b) and result.r_phi.has_edge(b, a)):
                raise ValueError("the given classes do not form a cluster")

    best = None
    for idx in cluster:
        for world in result.classes[idx]:
            visible = frozenset(a for a in cluster if _sees_class(result, world, a))
            key = (len(visible), result.classes[idx][0], world)
            if best is None or key < best[0]:
                best = (key, world, visible)
    if best is None:
        raise ValueError("empty cluster")
    _, x_star, core = best

    # The chosen world's successors inside the cluster must land in the
    # core and see all of it; this is forced by minimality.
    rows = result.source.frame.rows
    for y in range(result.source.frame.world_count):
        if rows[x_star] >> y & 1 and result.class_of[y] in members:
            if result.class_of[y] not in core:
                raise RuntimeError("critical point check failed: successor outside core")
            for a in core:
                if not _sees_class(result, y, a):
                    raise RuntimeError("critical point check failed: core not mutually visible")

    if len(core) > n:
        raise CoreTooLargeError(
            f"cluster core has {len(core)} classes, exceeding the bound {n}"
        )
    return x_star, core


@dataclass(frozen=True)
class ClusterRefinement:
    """Record of one refinement run: the quotient clusters, the chosen
    critical worlds and cores, and the refined relation."""

    variant: str
    n: int
    clusters: tuple[tuple[int, ...], ...]
    critical_points: tuple[int, ...]
    cores: tuple[tuple[int, ...], ...]
    linear_orders: tuple[tuple[int, ...], ...] | None
    r_prime: Frame

    def trace_json(self, result: FiltrationResult) -> dict:
        data = result.to_json()
        data["clusters"] = [
            {"cluster": list(cluster), "x_star": x, "core": list(core)}
            for cluster, x, core in zip(self.clusters, self.critical_points, self.cores)
        ]
        data["r_prime"] = [list(e) for e in self.r_prime.edges]
        data["variant"] = self.variant
        return data


VARIANTS = ("base", "reflexive", "linear")


def refine(
    result: FiltrationResult,
    n: int,
    variant: str = "base",
    seed: int | None = None,
) -> tuple[ClusterRefinement, Model]:
    """Refine the quotient relation so every cycle has length at most ``n``.

    base:       leftover classes become incomparable irreflexive points.
    reflexive:  leftover classes keep their loops (needs a reflexive
                quotient and n >= 1).
    linear:     leftover classes form a strict chain before the core
                (needs a connected quotient); the chain follows ascending
                class order, or a seeded shuffle when ``seed`` is given.

    Returns the refinement record and the refined model, after verifying
    that truth of every formula of the filtration set is unchanged.
    """
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}; known: {', '.join(VARIANTS)}")
    r_phi = result.r_phi
    if variant == "reflexive":
        if n < 1:
            raise ValueError("the reflexive variant needs n >= 1")
        if not kripke.check_property(r_phi, "reflexive"):
            raise ValueError("the reflexive variant needs a reflexive quotient relation")
    if variant == "linear" and not kripke.check_property(r_phi, "connected"):
        raise ValueError("the linear variant needs a connected quotient relation")

    decomposition = kripke.clusters(r_phi)
    rng = random.Random(seed) if seed is not None else None

    rows = [0] * r_phi.world_count
    for a, b in r_phi.edges:
        if decomposition.cluster_of[a] != decomposition.cluster_of[b]:
            rows[a] |= 1 << b

    criticals = []
    cores = []
    orders: list[tuple[int, ...]] = []
    for cluster in decomposition.clusters:
        x_star, core = critical_point(result, cluster, n)
        criticals.append(x_star)
        cores.append(tuple(sorted(core)))
        core_mask = 0
        for a in core:
            core_mask |= 1 << a
        for a in cluster:
            rows[a] |= core_mask
        leftover = [a for a in cluster if a not in core]
        if variant == "reflexive":
            for a in leftover:
                rows[a] |= 1 << a
        if variant == "linear":
            if rng is not None:
                rng.shuffle(leftover)
            for i, a in enumerate(leftover):
                for b in leftover[i + 1 :]:
                    rows[a] |= 1 << b
            orders.append(tuple(leftover))
        else:
            orders.append(tuple(leftover))

    r_prime = Frame.from_rows(rows)
    refinement = ClusterRefinement(
        variant=variant,
        n=n,
        clusters=decomposition.clusters,
        critical_points=tuple(criticals),
        cores=tuple(cores),
        linear_orders=tuple(orders) if variant == "linear" else None,
        r_prime=r_prime,
    )

    _verify_refinement(result, refinement, n, variant)

    refined = Model(r_prime, result.filtered_model()._valuation)
    for f in result.phi:
        got = kripke._truth_mask(refined, f, {})
        want = 0
        for idx in range(r_phi.world_count):
            if result.class_truth(idx, f):
                want |= 1 << idx
        if got != want:
            raise RuntimeError(f"truth of {fm.pretty(f)} changed under refinement")
    return refinement, refined


def _verify_refinement(result, refinement, n, variant) -> None:
    r_phi = result.r_phi
    r_prime = refinement.r_prime
    for x in range(r_prime.world_count):
        if r_prime.rows[x] & ~r_phi.rows[x]:
            raise RuntimeError("refined relation is not a subrelation of the quotient")
    if not kripke.check_property(r_prime, "transitive"):
        raise RuntimeError("refined relation is not transitive")
    if kripke.circumference(r_prime) > n:
        raise RuntimeError("refined relation exceeds the cycle bound")
    if variant == "base" and n == 0 and not kripke.check_property(r_prime, "irreflexive"):
        raise RuntimeError("bound-0 refinement must be irreflexive")
    if variant == "reflexive" and not kripke.check_property(r_prime, "reflexive"):
        raise RuntimeError("reflexive refinement must be reflexive")
    if variant == "linear" and not kripke.check_property(r_prime, "connected"):
        raise RuntimeError("linear refinement must be connected")


def class_formula(result: FiltrationResult, class_index: int) -> fm.Formula:
    """Conjunction of the filtration set's truths and falsities at a class.

    Its truth set in the source model is exactly the class itself (or the
    whole frame when the filtration set is empty).
    """
    parts = []
    for f in result.phi:
        parts.append(f if result.class_truth(class_index, f) else fm.Neg(f))
    return fm._conjoin(parts)
