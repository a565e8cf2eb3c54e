"""Finite topological spaces with two modal semantics.

The closure semantics reads the modality as topological interior and
its dual as closure; the derived-set semantics reads the dual modality
as the set of limit points.  Both are evaluated from the open-set
family of an explicit finite space.  Resolvability and separation
checks are exhaustive over subsets, sized for desk-scale spaces.
"""

from __future__ import annotations

from typing import Iterable, Mapping

from . import formula as fm
from ._sweep import DEFAULT_VALUATION_CAP, BudgetExceededError, sweep_find_failure
from .kripke import Frame, _mask_from_worlds, _worlds_from_mask, check_property

__all__ = [
    "FiniteSpace",
    "SpaceModel",
    "NotQuasiOrderError",
    "EmptySubspaceError",
    "SEPARATION_PROPERTIES",
    "generate_topology",
    "closure",
    "interior",
    "derived_set",
    "alexandroff",
    "specialization",
    "truth_set_c",
    "truth_set_d",
    "valid_c",
    "valid_d",
    "is_n_resolvable",
    "is_hered_n_irresolvable",
    "separation",
]

DEFAULT_SUBSPACE_CAP = 12


class NotQuasiOrderError(ValueError):
    """The frame is not reflexive and transitive."""


class EmptySubspaceError(ValueError):
    """Resolvability is undefined on an empty subspace."""


class FiniteSpace:
    """A finite point set with an explicit family of open sets.

    The constructor verifies that the family contains the empty set and
    the full set and is closed under binary union and intersection; an
    incomplete family is rejected rather than completed.
    """

    __slots__ = ("point_count", "open_masks", "_min_nbhd")

    def __init__(self, point_count: int, opens: Iterable[Iterable[int] | int]):
        if point_count < 0:
            raise ValueError("point_count must be >= 0")
        full = (1 << point_count) - 1
        masks = set()
        for o in opens:
            masks.add(_mask_from_worlds(o, point_count))
        if 0 not in masks:
            raise ValueError("the empty set must be open")
        if full not in masks:
            raise ValueError("the full point set must be open")
        for a in masks:
            for b in masks:
                if a | b not in masks:
                    raise ValueError("opens are not closed under union")
                if a & b not in masks:
                    raise ValueError("opens are not closed under intersection")
        self.point_count = point_count
        self.open_masks = tuple(sorted(masks))
        self._min_nbhd: tuple[int, ...] | None = None

    @property
    def opens(self) -> tuple[tuple[int, ...], ...]:
        return tuple(sorted(_worlds_from_mask(m) for m in self.open_masks))

    def min_neighborhoods(self) -> tuple[int, ...]:
        """Smallest open set around each point (open in a finite space)."""
        if self._min_nbhd is None:
            out = []
            for x in range(self.point_count):
                acc = (1 << self.point_count) - 1
                for m in self.open_masks:
                    if m >> x & 1:
                        acc &= m
                out.append(acc)
            self._min_nbhd = tuple(out)
        return self._min_nbhd

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FiniteSpace):
            return NotImplemented
        return self.point_count == other.point_count and self.open_masks == other.open_masks

    def __hash__(self) -> int:
        return hash((self.point_count, self.open_masks))

    def __repr__(self) -> str:
        return f"FiniteSpace({self.point_count}, {[list(o) for o in self.opens]!r})"

    def to_json(self) -> dict:
        return {"points": self.point_count, "opens": [list(o) for o in self.opens]}

    @classmethod
    def from_json(cls, data: Mapping) -> "FiniteSpace":
        return cls(int(data["points"]), [tuple(o) for o in data["opens"]])


def generate_topology(point_count: int, subbasis: Iterable[Iterable[int] | int]) -> FiniteSpace:
    """Close a family of sets under union and intersection into a space."""
    full = (1 << point_count) - 1
    masks = {0, full}
    for s in subbasis:
        masks.add(_mask_from_worlds(s, point_count))
    changed = True
    while changed:
        changed = False
        current = list(masks)
        for i, a in enumerate(current):
            for b in current[i + 1 :]:
                for c in (a | b, a & b):
                    if c not in masks:
                        masks.add(c)
                        changed = True
    return FiniteSpace(point_count, masks)


class SpaceModel:
    """A space with a valuation of variables by point sets."""

    __slots__ = ("space", "_valuation")

    def __init__(self, space: FiniteSpace, valuation: Mapping[str, Iterable[int] | int] = {}):
        self.space = space
        vals = {}
        for name in sorted(valuation):
            vals[name] = _mask_from_worlds(valuation[name], space.point_count)
        self._valuation = vals

    def var_mask(self, name: str) -> int:
        return self._valuation.get(name, 0)

    @property
    def valuation(self) -> dict[str, frozenset[int]]:
        return {name: frozenset(_worlds_from_mask(m)) for name, m in self._valuation.items()}

    def to_json(self) -> dict:
        data = self.space.to_json()
        data["valuation"] = {
            name: list(_worlds_from_mask(m)) for name, m in self._valuation.items()
        }
        return data

    @classmethod
    def from_json(cls, data: Mapping) -> "SpaceModel":
        return cls(FiniteSpace.from_json(data), {k: tuple(v) for k, v in data.get("valuation", {}).items()})


def _closure_mask(space: FiniteSpace, y: int) -> int:
    # complement of the union of opens missing y
    out = 0
    for m in space.open_masks:
        if not m & y:
            out |= m
    return ((1 << space.point_count) - 1) ^ out


def _interior_mask(space: FiniteSpace, y: int) -> int:
    out = 0
    for m in space.open_masks:
        if not m & ~y:
            out |= m
    return out


def _derived_mask(space: FiniteSpace, y: int) -> int:
    out = 0
    for x in range(space.point_count):
        if _closure_mask(space, y & ~(1 << x)) >> x & 1:
            out |= 1 << x
    return out


def closure(space: FiniteSpace, points: Iterable[int] | int) -> frozenset[int]:
    """Smallest closed superset."""
    y = _mask_from_worlds(points, space.point_count)
    return frozenset(_worlds_from_mask(_closure_mask(space, y)))


def interior(space: FiniteSpace, points: Iterable[int] | int) -> frozenset[int]:
    """Largest open subset."""
    y = _mask_from_worlds(points, space.point_count)
    return frozenset(_worlds_from_mask(_interior_mask(space, y)))


def derived_set(space: FiniteSpace, points: Iterable[int] | int) -> frozenset[int]:
    """Limit points: the points lying in the closure of the set minus them."""
    y = _mask_from_worlds(points, space.point_count)
    return frozenset(_worlds_from_mask(_derived_mask(space, y)))


def alexandroff(frame: Frame) -> FiniteSpace:
    """The space whose opens are the up-sets of a quasi-order."""
    if not (check_property(frame, "reflexive") and check_property(frame, "transitive")):
        raise NotQuasiOrderError("the frame must be reflexive and transitive")
    n = frame.world_count
    opens = []
    for mask in range(1 << n):
        if all(not frame.rows[x] & ~mask for x in _worlds_from_mask(mask)):
            opens.append(mask)
    return FiniteSpace(n, opens)


def specialization(space: FiniteSpace) -> Frame:
    """The quasi-order relating each point to its minimal neighborhood.

    Inverse to the up-set construction: every finite space arises this way.
    """
    return Frame.from_rows(space.min_neighborhoods())


def _truth_mask_c(model: SpaceModel, f: fm.Formula, memo: dict) -> int:
    got = memo.get(f)
    if got is not None:
        return got
    space = model.space
    full = (1 << space.point_count) - 1
    if isinstance(f, fm.Var):
        out = model.var_mask(f.name)
    elif isinstance(f, fm.Top):
        out = full
    elif isinstance(f, fm.Neg):
        out = full ^ _truth_mask_c(model, f.child, memo)
    elif isinstance(f, fm.And):
        out = _truth_mask_c(model, f.left, memo) & _truth_mask_c(model, f.right, memo)
    elif isinstance(f, fm.Box):
        out = _interior_mask(space, _truth_mask_c(model, f.child, memo))
    else:
        raise TypeError(f"not a formula: {f!r}")
    memo[f] = out
    return out


def _truth_mask_d(model: SpaceModel, f: fm.Formula, memo: dict) -> int:
    got = memo.get(f)
    if got is not None:
        return got
    space = model.space
    full = (1 << space.point_count) - 1
    if isinstance(f, fm.Var):
        out = model.var_mask(f.name)
    elif isinstance(f, fm.Top):
        out = full
    elif isinstance(f, fm.Neg):
        out = full ^ _truth_mask_d(model, f.child, memo)
    elif isinstance(f, fm.And):
        out = _truth_mask_d(model, f.left, memo) & _truth_mask_d(model, f.right, memo)
    elif isinstance(f, fm.Box):
        # dual of the derived-set operator
        out = full ^ _derived_mask(space, full ^ _truth_mask_d(model, f.child, memo))
    else:
        raise TypeError(f"not a formula: {f!r}")
    memo[f] = out
    return out


def truth_set_c(model: SpaceModel, f: fm.Formula) -> frozenset[int]:
    """Truth set under the closure semantics."""
    return frozenset(_worlds_from_mask(_truth_mask_c(model, f, {})))


def truth_set_d(model: SpaceModel, f: fm.Formula) -> frozenset[int]:
    """Truth set under the derived-set semantics."""
    return frozenset(_worlds_from_mask(_truth_mask_d(model, f, {})))


def valid_c(space: FiniteSpace, f: fm.Formula, cap: int = DEFAULT_VALUATION_CAP) -> bool:
    """Truth at every point under every valuation, closure semantics."""
    rows = space.min_neighborhoods()
    return sweep_find_failure(rows, space.point_count, f, cap) is None


def valid_d(space: FiniteSpace, f: fm.Formula, cap: int = DEFAULT_VALUATION_CAP) -> bool:
    """Truth at every point under every valuation, derived-set semantics."""
    rows = [m & ~(1 << x) for x, m in enumerate(space.min_neighborhoods())]
    return sweep_find_failure(rows, space.point_count, f, cap) is None


def is_n_resolvable(
    space: FiniteSpace,
    subspace: Iterable[int] | int,
    n: int,
    cap: int = DEFAULT_SUBSPACE_CAP,
) -> bool:
    """Whether the subspace contains n pairwise disjoint dense subsets.

    Density is relative to the subspace: a part is dense when the
    subspace lies inside its ambient closure.  The search colors the
    subspace points with n part labels plus a spare, pruning any branch
    whose remaining points can no longer make every part dense.
    """
    s_mask = _mask_from_worlds(subspace, space.point_count)
    if s_mask == 0:
        raise EmptySubspaceError("resolvability needs a non-empty subspace")
    if n < 0:
        raise ValueError("n must be >= 0")
    if n == 0:
        return True
    points = _worlds_from_mask(s_mask)
    if len(points) > cap:
        raise BudgetExceededError(
            f"subspace of {len(points)} points exceeds the cap of {cap}"
        )
    if n > len(points):
        return False

    def dense(mask: int) -> bool:
        return not s_mask & ~_closure_mask(space, mask)

    def assign(i: int, parts: list[int], used: int) -> bool:
        if i == len(points):
            return all(dense(p) for p in parts)
        remaining = 0
        for q in points[i:]:
            remaining |= 1 << q
        for p in parts:
            if not dense(p | remaining):
                return False
        x = points[i]
        # part labels are interchangeable, so only the first unused one
        # is tried; the spare label comes last
        limit = min(n, used + 1)
        for c in range(limit, -1, -1):
            if c == 0:
                if assign(i + 1, parts, used):
                    return True
            else:
                parts[c - 1] |= 1 << x
                if assign(i + 1, parts, max(used, c)):
                    return True
                parts[c - 1] &= ~(1 << x)
        return False

    return assign(0, [0] * n, 0)


def is_hered_n_irresolvable(
    space: FiniteSpace, n: int, cap: int = DEFAULT_SUBSPACE_CAP
) -> bool:
    """No non-empty subspace is n-resolvable."""
    if space.point_count > cap:
        raise BudgetExceededError(
            f"{space.point_count} points exceed the subspace cap of {cap}"
        )
    for s_mask in range(1, 1 << space.point_count):
        if is_n_resolvable(space, s_mask, n, cap):
            return False
    return True


SEPARATION_PROPERTIES = ("t0", "td", "t1", "scattered", "weakly_scattered")


def separation(space: FiniteSpace, prop: str) -> bool:
    """Separation and isolation properties, by enumeration."""
    n = space.point_count
    if prop == "t0":
        for x in range(n):
            cx = _closure_mask(space, 1 << x)
            for y in range(x + 1, n):
                if cx >> y & 1 and _closure_mask(space, 1 << y) >> x & 1:
                    return False
        return True
    if prop == "td":
        for x in range(n):
            d = _derived_mask(space, 1 << x)
            if _closure_mask(space, d) != d:
                return False
        return True
    if prop == "t1":
        return all(_derived_mask(space, 1 << x) == 0 for x in range(n))
    if prop == "scattered":
        min_nbhd = space.min_neighborhoods()
        for s_mask in range(1, 1 << n):
            if not any(
                min_nbhd[x] & s_mask == 1 << x for x in _worlds_from_mask(s_mask)
            ):
                return False
        return True
    if prop == "weakly_scattered":
        isolated = 0
        min_nbhd = space.min_neighborhoods()
        for x in range(n):
            if min_nbhd[x] == 1 << x:
                isolated |= 1 << x
        return _closure_mask(space, isolated) == (1 << n) - 1
    raise ValueError(
        f"unknown property {prop!r}; known: {', '.join(SEPARATION_PROPERTIES)}"
    )
