"""Finite frames and models: truth, clusters, circumference, validity.

Worlds are the integers 0..world_count-1 and every set of worlds is a
bitmask internally; the public API accepts and returns ordinary sets.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from . import formula as fm
from ._sweep import DEFAULT_VALUATION_CAP, BudgetExceededError, sweep_find_failure

__all__ = [
    "Frame",
    "Model",
    "ClusterDecomposition",
    "NotTransitiveError",
    "BudgetExceededError",
    "DEFAULT_VALUATION_CAP",
    "PROPERTIES",
    "check_property",
    "clusters",
    "circumference",
    "truth_set",
    "path_oracle",
    "frame_valid",
    "find_countermodel",
    "validates_logic",
    "canonical_form",
    "isomorphic",
]


class NotTransitiveError(ValueError):
    """An operation that needs a transitive frame got a non-transitive one."""


def _mask_from_worlds(worlds: Iterable[int] | int, world_count: int) -> int:
    if isinstance(worlds, int):
        mask = worlds
        if mask < 0 or mask >> world_count:
            raise ValueError(f"world mask {worlds:#x} out of range for {world_count} worlds")
        return mask
    mask = 0
    for w in worlds:
        if not 0 <= w < world_count:
            raise ValueError(f"world {w} out of range for {world_count} worlds")
        mask |= 1 << w
    return mask


def _worlds_from_mask(mask: int) -> tuple[int, ...]:
    out = []
    x = 0
    while mask:
        if mask & 1:
            out.append(x)
        mask >>= 1
        x += 1
    return tuple(out)


class Frame:
    """A directed graph on worlds 0..world_count-1.

    The relation is stored as one successor bitmask per world.  Frames
    are immutable; structural conditions such as transitivity are
    checked properties, never constructor constraints.
    """

    __slots__ = ("world_count", "rows")

    def __init__(self, world_count: int, edges: Iterable[tuple[int, int]] = ()):
        if world_count < 0:
            raise ValueError("world_count must be >= 0")
        rows = [0] * world_count
        for x, y in edges:
            if not (0 <= x < world_count and 0 <= y < world_count):
                raise ValueError(f"edge ({x}, {y}) out of range")
            rows[x] |= 1 << y
        self.world_count = world_count
        self.rows = tuple(rows)

    @classmethod
    def from_rows(cls, rows: Sequence[int]) -> "Frame":
        frame = object.__new__(cls)
        frame.world_count = len(rows)
        frame.rows = tuple(rows)
        return frame

    @property
    def edges(self) -> tuple[tuple[int, int], ...]:
        return tuple(
            (x, y)
            for x in range(self.world_count)
            for y in _worlds_from_mask(self.rows[x])
        )

    def successors(self, x: int) -> tuple[int, ...]:
        return _worlds_from_mask(self.rows[x])

    def has_edge(self, x: int, y: int) -> bool:
        return bool(self.rows[x] >> y & 1)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Frame):
            return NotImplemented
        return self.world_count == other.world_count and self.rows == other.rows

    def __hash__(self) -> int:
        return hash((self.world_count, self.rows))

    def __repr__(self) -> str:
        return f"Frame({self.world_count}, {list(self.edges)!r})"

    def to_json(self) -> dict:
        return {"worlds": self.world_count, "edges": [list(e) for e in self.edges]}

    @classmethod
    def from_json(cls, data: Mapping) -> "Frame":
        return cls(int(data["worlds"]), [tuple(e) for e in data["edges"]])


class Model:
    """A frame together with a valuation mapping variables to world sets."""

    __slots__ = ("frame", "_valuation")

    def __init__(self, frame: Frame, valuation: Mapping[str, Iterable[int] | int] = {}):
        self.frame = frame
        vals = {}
        for name in sorted(valuation):
            vals[name] = _mask_from_worlds(valuation[name], frame.world_count)
        self._valuation = vals

    def var_mask(self, name: str) -> int:
        return self._valuation.get(name, 0)

    @property
    def valuation(self) -> dict[str, frozenset[int]]:
        return {name: frozenset(_worlds_from_mask(m)) for name, m in self._valuation.items()}

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Model):
            return NotImplemented
        return self.frame == other.frame and self._valuation == other._valuation

    def __repr__(self) -> str:
        return f"Model({self.frame!r}, {self.valuation!r})"

    def to_json(self) -> dict:
        data = self.frame.to_json()
        data["valuation"] = {
            name: list(_worlds_from_mask(mask)) for name, mask in self._valuation.items()
        }
        return data

    @classmethod
    def from_json(cls, data: Mapping) -> "Model":
        frame = Frame.from_json(data)
        return cls(frame, {k: tuple(v) for k, v in data.get("valuation", {}).items()})


PROPERTIES = (
    "transitive",
    "weakly_transitive",
    "reflexive",
    "irreflexive",
    "serial",
    "antisymmetric",
    "weakly_connected",
    "connected",
    "point_generated",
)


def check_property(frame: Frame, prop: str) -> bool:
    """Decide a first-order frame condition by direct enumeration."""
    n = frame.world_count
    rows = frame.rows
    if prop == "transitive":
        for x in range(n):
            reach = 0
            succ = rows[x]
            for y in _worlds_from_mask(succ):
                reach |= rows[y]
            if reach & ~succ:
                return False
        return True
    if prop == "weakly_transitive":
        for x in range(n):
            succ = rows[x]
            for y in _worlds_from_mask(succ):
                # two-step targets must be successors or the point itself
                if rows[y] & ~(succ | 1 << x):
                    return False
        return True
    if prop == "reflexive":
        return all(rows[x] >> x & 1 for x in range(n))
    if prop == "irreflexive":
        return not any(rows[x] >> x & 1 for x in range(n))
    if prop == "serial":
        return all(rows[x] for x in range(n))
    if prop == "antisymmetric":
        for x in range(n):
            for y in _worlds_from_mask(rows[x]):
                if y != x and rows[y] >> x & 1:
                    return False
        return True
    if prop == "weakly_connected":
        for x in range(n):
            succ = _worlds_from_mask(rows[x])
            for y in succ:
                for z in succ:
                    if y != z and not (rows[y] >> z & 1 or rows[z] >> y & 1):
                        return False
        return True
    if prop == "connected":
        for y in range(n):
            for z in range(y + 1, n):
                if not (rows[y] >> z & 1 or rows[z] >> y & 1):
                    return False
        return True
    if prop == "point_generated":
        full = (1 << n) - 1 if n else 0
        return n == 0 or any(rows[x] | 1 << x == full for x in range(n))
    raise ValueError(f"unknown property {prop!r}; known: {', '.join(PROPERTIES)}")


@dataclass(frozen=True)
class ClusterDecomposition:
    """Partition of a transitive frame into mutual-reachability classes.

    ``order`` is the relation lifted to cluster indices; it carries a
    loop exactly at the non-singleton and reflexive-singleton clusters.
    """

    clusters: tuple[tuple[int, ...], ...]
    kinds: tuple[str, ...]              # degenerate | simple | non_degenerate
    cluster_of: tuple[int, ...]         # world -> cluster index
    order: frozenset[tuple[int, int]]
    final: tuple[bool, ...]

    def to_json(self) -> dict:
        return {
            "clusters": [list(c) for c in self.clusters],
            "kinds": list(self.kinds),
            "order": sorted(list(e) for e in self.order),
            "final": list(self.final),
        }


def _require_transitive(frame: Frame) -> None:
    if not check_property(frame, "transitive"):
        raise NotTransitiveError("frame is not transitive")


def clusters(frame: Frame) -> ClusterDecomposition:
    """Decompose a transitive frame into clusters with their order."""
    _require_transitive(frame)
    n = frame.world_count
    rows = frame.rows
    cluster_of = [-1] * n
    groups: list[tuple[int, ...]] = []
    for x in range(n):
        if cluster_of[x] >= 0:
            continue
        members = [x]
        for y in range(x + 1, n):
            if cluster_of[y] < 0 and rows[x] >> y & 1 and rows[y] >> x & 1:
                members.append(y)
        idx = len(groups)
        for y in members:
            cluster_of[y] = idx
        groups.append(tuple(members))

    kinds = []
    for members in groups:
        if len(members) > 1:
            kinds.append("non_degenerate")
        elif rows[members[0]] >> members[0] & 1:
            kinds.append("simple")
        else:
            kinds.append("degenerate")

    order = set()
    for i, members in enumerate(groups):
        seen = 0
        for x in members:
            seen |= rows[x]
        for j, other in enumerate(groups):
            if any(seen >> y & 1 for y in other):
                order.add((i, j))

    final = tuple(
        not any(i != j for (i2, j) in order if i2 == i)
        for i in range(len(groups))
    )
    return ClusterDecomposition(
        clusters=tuple(groups),
        kinds=tuple(kinds),
        cluster_of=tuple(cluster_of),
        order=frozenset(order),
        final=final,
    )


def circumference(frame: Frame) -> int:
    """Length of a longest cycle: the largest non-degenerate cluster size,
    or 0 when the (transitive) frame is irreflexive."""
    decomposition = clusters(frame)
    best = 0
    for members, kind in zip(decomposition.clusters, decomposition.kinds):
        if kind != "degenerate":
            best = max(best, len(members))
    return best


def _truth_mask(model: Model, f: fm.Formula, memo: dict) -> int:
    got = memo.get(f)
    if got is not None:
        return got
    frame = model.frame
    full = (1 << frame.world_count) - 1 if frame.world_count else 0
    if isinstance(f, fm.Var):
        out = model.var_mask(f.name)
    elif isinstance(f, fm.Top):
        out = full
    elif isinstance(f, fm.Neg):
        out = full ^ _truth_mask(model, f.child, memo)
    elif isinstance(f, fm.And):
        out = _truth_mask(model, f.left, memo) & _truth_mask(model, f.right, memo)
    elif isinstance(f, fm.Box):
        child = _truth_mask(model, f.child, memo)
        out = 0
        for x in range(frame.world_count):
            if not frame.rows[x] & ~child:
                out |= 1 << x
    else:
        raise TypeError(f"not a formula: {f!r}")
    memo[f] = out
    return out


def truth_set(model: Model, f: fm.Formula) -> frozenset[int]:
    """Worlds of the model at which the formula is true."""
    return frozenset(_worlds_from_mask(_truth_mask(model, f, {})))


def path_oracle(model: Model, n: int, args: Sequence[fm.Formula], world: int) -> bool:
    """Explicit path search replacing the nested-diamond evaluation.

    True iff some path world = x0 R x1 R ... R x_{n+1} satisfies args[i]
    at x_i for 1 <= i <= n and args[0] at x_{n+1}.
    """
    if len(args) != n + 1:
        raise ValueError(f"need {n + 1} argument formulas, got {len(args)}")
    frame = model.frame
    memo: dict = {}
    arg_masks = [_truth_mask(model, a, memo) for a in args]

    seen: set[tuple[int, int]] = set()

    def search(position: int, current: int) -> bool:
        # position is the index of the next path element to place
        if (position, current) in seen:
            return False
        seen.add((position, current))
        wanted = arg_masks[0] if position == n + 1 else arg_masks[position]
        for y in _worlds_from_mask(frame.rows[current] & wanted):
            if position == n + 1 or search(position + 1, y):
                return True
        return False

    return search(1, world)


def frame_valid(frame: Frame, f: fm.Formula, cap: int = DEFAULT_VALUATION_CAP) -> bool:
    """Whether the formula holds at every world under every valuation of
    its variables.  Raises BudgetExceededError past ``cap`` valuations."""
    return sweep_find_failure(frame.rows, frame.world_count, f, cap) is None


def find_countermodel(
    frame: Frame, f: fm.Formula, cap: int = DEFAULT_VALUATION_CAP
) -> tuple[Model, int] | None:
    """First falsifying (model, world) on this frame, or None if valid."""
    hit = sweep_find_failure(frame.rows, frame.world_count, f, cap)
    if hit is None:
        return None
    valuation, world = hit
    return Model(frame, valuation), world


def validates_logic(frame: Frame, spec) -> bool:
    """Whether the frame belongs to the finite-frame class of a logic.

    ``spec`` carries ``n`` (the cycle-length bound) and ``extensions``
    (a subset of {"d", "t", "three", "m", "e"}).  Non-transitive frames
    simply fail the check.
    """
    if not check_property(frame, "transitive"):
        return False
    if circumference(frame) > spec.n:
        return False
    extensions = spec.extensions
    if not extensions:
        return True
    decomposition = clusters(frame)
    final_kinds = [
        kind for kind, is_final in zip(decomposition.kinds, decomposition.final) if is_final
    ]
    if "d" in extensions and any(k == "degenerate" for k in final_kinds):
        return False
    if "t" in extensions and not check_property(frame, "reflexive"):
        return False
    if "m" in extensions and any(k != "simple" for k in final_kinds):
        return False
    if "e" in extensions and any(k != "degenerate" for k in final_kinds):
        return False
    if "three" in extensions:
        if not check_property(frame, "weakly_connected"):
            return False
        for x in range(frame.world_count):
            worlds = _worlds_from_mask(frame.rows[x] | 1 << x)
            relabel = {w: i for i, w in enumerate(worlds)}
            sub = Frame(
                len(worlds),
                [
                    (relabel[a], relabel[b])
                    for a in worlds
                    for b in worlds
                    if frame.rows[a] >> b & 1
                ],
            )
            if not check_property(sub, "connected"):
                return False
    return True


def _relation_bits(frame: Frame, perm: Sequence[int]) -> int:
    n = frame.world_count
    bits = 0
    for x in range(n):
        row = frame.rows[x]
        px = perm[x]
        for y in _worlds_from_mask(row):
            bits |= 1 << (px * n + perm[y])
    return bits


def canonical_form(frame: Frame) -> tuple[int, int]:
    """(world_count, relation bits) minimized over world permutations.

    Exponential in the world count; intended for small frames.
    """
    n = frame.world_count
    best = None
    for perm in itertools.permutations(range(n)):
        bits = _relation_bits(frame, perm)
        if best is None or bits < best:
            best = bits
    return (n, best if best is not None else 0)


def isomorphic(a: Frame, b: Frame) -> bool:
    """Brute-force isomorphism test for small frames."""
    if a.world_count != b.world_count:
        return False
    degrees_a = sorted((bin(r).count("1"), r >> x & 1) for x, r in enumerate(a.rows))
    degrees_b = sorted((bin(r).count("1"), r >> x & 1) for x, r in enumerate(b.rows))
    if degrees_a != degrees_b:
        return False
    target = _relation_bits(b, range(b.world_count))
    return any(
        _relation_bits(a, perm) == target
        for perm in itertools.permutations(range(a.world_count))
    )
