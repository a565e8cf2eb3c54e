"""Shared generators and independent oracles for the test suite.

The oracles here deliberately avoid the library's fast paths: cycle
lengths come from explicit path search, validity from per-valuation
model checking, and the derived-set semantics from punctured
neighborhoods, so that the optimized implementations are checked
against something that cannot share their bugs.
"""

from __future__ import annotations

import itertools
import random
from functools import lru_cache

from modalcirc import formula as fm
from modalcirc import kripke, topology
from modalcirc.kripke import Frame, Model


def transitive_closure_rows(rows: list[int]) -> list[int]:
    n = len(rows)
    out = list(rows)
    for k in range(n):
        for i in range(n):
            if out[i] >> k & 1:
                out[i] |= out[k]
    return out


def random_transitive_frame(
    rng: random.Random,
    max_worlds: int,
    n: int,
    *,
    reflexive: bool = False,
    connected: bool = False,
    serial: bool = False,
    final_simple: bool = False,
    final_degenerate: bool = False,
) -> Frame:
    """Random transitive frame with cycles bounded by ``n``.

    Built as a random strict order of clusters with random sizes, so the
    bound and the final-cluster shape hold by construction.
    """
    while True:
        m = rng.randint(1, max(1, max_worlds - 1))
        order = [[False] * m for _ in range(m)]
        for i in range(m):
            for j in range(i + 1, m):
                if connected or rng.random() < 0.5:
                    order[i][j] = True
        for k in range(m):
            for i in range(m):
                for j in range(m):
                    if order[i][k] and order[k][j]:
                        order[i][j] = True
        finals = [i for i in range(m) if not any(order[i])]

        labels = []
        for i in range(m):
            if i in finals and final_degenerate:
                labels.append(0)
            elif i in finals and final_simple:
                labels.append(1)
            elif i in finals and (serial or reflexive):
                labels.append(rng.randint(1, max(1, n)))
            elif reflexive:
                labels.append(rng.randint(1, max(1, n)))
            elif n == 0:
                labels.append(0)
            else:
                labels.append(rng.choice([0] + list(range(1, n + 1))))
        weights = [1 if l == 0 else l for l in labels]
        if sum(weights) > max_worlds:
            continue
        # bias away from tiny frames so the batteries stay interesting
        if sum(weights) < min(3, max_worlds) and rng.random() < 0.75:
            continue

        starts = []
        acc = 0
        for w in weights:
            starts.append(acc)
            acc += w
        rows = [0] * acc
        for i in range(m):
            members = range(starts[i], starts[i] + weights[i])
            if labels[i] >= 1:
                block = sum(1 << w for w in members)
                for w in members:
                    rows[w] |= block
            for j in range(m):
                if order[i][j]:
                    block = sum(1 << w for w in range(starts[j], starts[j] + weights[j]))
                    for w in members:
                        rows[w] |= block
        return Frame.from_rows(rows)


def random_model(rng: random.Random, frame: Frame, names=("p0", "p1")) -> Model:
    full = 1 << frame.world_count
    return Model(frame, {name: rng.randrange(full) for name in names})


def random_formula(rng: random.Random, names=("p0", "p1"), depth: int = 3) -> fm.Formula:
    if depth == 0 or rng.random() < 0.3:
        roll = rng.random()
        if roll < 0.7:
            return fm.Var(rng.choice(names))
        return fm.Top() if roll < 0.85 else fm.Bot()
    kind = rng.randrange(8)
    if kind == 0:
        return fm.Neg(random_formula(rng, names, depth - 1))
    if kind == 1:
        return fm.And(random_formula(rng, names, depth - 1), random_formula(rng, names, depth - 1))
    if kind == 2:
        return fm.Box(random_formula(rng, names, depth - 1))
    if kind == 3:
        return fm.Dia(random_formula(rng, names, depth - 1))
    if kind == 4:
        return fm.Or(random_formula(rng, names, depth - 1), random_formula(rng, names, depth - 1))
    if kind == 5:
        return fm.Imp(random_formula(rng, names, depth - 1), random_formula(rng, names, depth - 1))
    if kind == 6:
        return fm.BoxStar(random_formula(rng, names, depth - 1))
    return fm.DiaStar(random_formula(rng, names, depth - 1))


def random_closed_set(
    rng: random.Random, names=("p0", "p1"), max_size: int = 10
) -> fm.FormulaSet:
    """Random subformula-closed set of at most ``max_size`` formulas."""
    while True:
        seeds = [random_formula(rng, names, rng.randint(1, 3)) for _ in range(rng.randint(1, 2))]
        closed = fm.subformula_closure(seeds)
        if len(closed) <= max_size:
            return closed


def longest_cycle(frame: Frame) -> int:
    """Explicit search for the longest cycle, independent of clusters."""
    best = 0
    n = frame.world_count
    for length in range(1, n + 1):
        found = False
        for combo in itertools.permutations(range(n), length):
            if all(
                frame.has_edge(combo[i], combo[(i + 1) % length]) for i in range(length)
            ):
                found = True
                break
        if found:
            best = length
    return best


def naive_frame_valid(frame: Frame, f: fm.Formula) -> bool:
    """Frame validity by explicit per-valuation model checking."""
    names = fm.variables(f)
    everything = frozenset(range(frame.world_count))
    for masks in itertools.product(range(1 << frame.world_count), repeat=len(names)):
        model = Model(frame, dict(zip(names, masks)))
        if kripke.truth_set(model, f) != everything:
            return False
    return True


def punctured_truth_d(model: topology.SpaceModel, f: fm.Formula) -> frozenset[int]:
    """Derived-set semantics via punctured neighborhoods over the opens."""
    space = model.space
    full = (1 << space.point_count) - 1

    def go(g: fm.Formula) -> int:
        if isinstance(g, fm.Var):
            return model.var_mask(g.name)
        if isinstance(g, fm.Top):
            return full
        if isinstance(g, fm.Neg):
            return full ^ go(g.child)
        if isinstance(g, fm.And):
            return go(g.left) & go(g.right)
        if isinstance(g, fm.Box):
            child = go(g.child)
            out = 0
            for x in range(space.point_count):
                if any(
                    o >> x & 1 and not (o & ~(1 << x)) & ~child
                    for o in space.open_masks
                ):
                    out |= 1 << x
            return out
        raise TypeError(g)

    return frozenset(kripke._worlds_from_mask(go(f)))


@lru_cache(maxsize=None)
def all_frames_upto_iso(max_worlds: int) -> tuple[Frame, ...]:
    """Every frame (no structural restriction) up to isomorphism.

    Enumerates all labeled relations and keeps one representative per
    canonical form; sizes up to 3 run directly, size 4 uses a
    vectorized canonicalization.
    """
    frames: list[Frame] = []
    for w in range(1, max_worlds + 1):
        if w <= 3:
            perms = list(itertools.permutations(range(w)))
            seen = set()
            for bits in range(1 << (w * w)):
                frame = _frame_from_bits(w, bits)
                canon = min(kripke._relation_bits(frame, p) for p in perms)
                if canon not in seen:
                    seen.add(canon)
                    frames.append(_frame_from_bits(w, canon))
        else:
            import numpy as np

            total = 1 << (w * w)
            rels = np.arange(total, dtype=np.uint32)
            best = rels.copy()
            for perm in itertools.permutations(range(w)):
                mapped = np.zeros_like(rels)
                for b in range(w * w):
                    x, y = divmod(b, w)
                    nb = perm[x] * w + perm[y]
                    mapped |= ((rels >> np.uint32(b)) & np.uint32(1)) << np.uint32(nb)
                np.minimum(best, mapped, out=best)
            for bits in sorted(int(v) for v in np.unique(best)):
                frames.append(_frame_from_bits(w, bits))
    return tuple(frames)


def _frame_from_bits(w: int, bits: int) -> Frame:
    rows = []
    for x in range(w):
        row = 0
        for y in range(w):
            if bits >> (x * w + y) & 1:
                row |= 1 << y
        rows.append(row)
    return Frame.from_rows(rows)
