"""Bit-parallel truth evaluation across every valuation at once.

A valuation of k variables over w points is a bit vector of k*w bits.
For a block of 2**s consecutive valuations, the truth of a formula at a
point is a 2**s-bit integer whose bit v says whether the formula holds
at that point under valuation v.  Boolean connectives become bitwise
operations on these integers and the modality becomes an AND over
successor rows, so one pass over the formula decides a whole block.

Blocks sweep the low ``_BLOCK_BITS`` valuation bits; any remaining
variable bits are pinned per block, which keeps the integers at around
128 KB however large the valuation space is.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Sequence

from .formula import And, Box, Formula, Neg, Top, Var, variables

DEFAULT_VALUATION_CAP = 1 << 24

_BLOCK_BITS = 20


class BudgetExceededError(RuntimeError):
    """Raised when a requested enumeration is larger than its cap."""


@lru_cache(maxsize=None)
def _periodic_mask(bit: int, size_log: int) -> int:
    """Bits v in [0, 2**size_log) with bit ``bit`` of v set."""
    if bit >= size_log:
        raise ValueError("bit outside block")
    width = 1 << (bit + 1)
    mask = ((1 << (1 << bit)) - 1) << (1 << bit)
    while width < (1 << size_log):
        mask |= mask << width
        width <<= 1
    return mask


def sweep_find_failure(
    rows: Sequence[int],
    world_count: int,
    formula: Formula,
    cap: int = DEFAULT_VALUATION_CAP,
):
    """Search all valuations of ``formula``'s variables for a failure.

    ``rows[x]`` is the successor bitmask interpreting the modality.
    Returns None when the formula holds at every point under every
    valuation, else a deterministic ``(valuation, point)`` witness: the
    first failing valuation block, then the lowest failing point, then
    the lowest valuation inside the block.

    Raises BudgetExceededError when the valuation count exceeds ``cap``.
    """
    if cap <= 0:
        raise ValueError("valuation cap must be positive")
    names = variables(formula)
    k = len(names)
    total_bits = k * world_count
    if total_bits >= cap.bit_length() and (1 << total_bits) > cap:
        raise BudgetExceededError(
            f"{1 << total_bits} valuations exceed the cap of {cap}"
        )

    sweep_bits = min(total_bits, _BLOCK_BITS)
    block = 1 << sweep_bits
    full = (1 << block) - 1
    successor_lists = [
        [y for y in range(world_count) if rows[x] >> y & 1] for x in range(world_count)
    ]

    swept = [_periodic_mask(b, sweep_bits) for b in range(sweep_bits)]

    for fixed in range(1 << (total_bits - sweep_bits)):

        def var_mask(bit: int) -> int:
            if bit < sweep_bits:
                return swept[bit]
            return full if fixed >> (bit - sweep_bits) & 1 else 0

        memo: dict[Formula, list[int]] = {}

        def ev(f: Formula) -> list[int]:
            got = memo.get(f)
            if got is not None:
                return got
            if isinstance(f, Var):
                i = names.index(f.name)
                out = [var_mask(i * world_count + x) for x in range(world_count)]
            elif isinstance(f, Top):
                out = [full] * world_count
            elif isinstance(f, Neg):
                out = [full ^ m for m in ev(f.child)]
            elif isinstance(f, And):
                left = ev(f.left)
                right = ev(f.right)
                out = [a & b for a, b in zip(left, right)]
            elif isinstance(f, Box):
                child = ev(f.child)
                by_row: dict[int, int] = {}
                out = []
                for x in range(world_count):
                    row = rows[x]
                    acc = by_row.get(row)
                    if acc is None:
                        acc = full
                        for y in successor_lists[x]:
                            acc &= child[y]
                            if not acc:
                                break
                        by_row[row] = acc
                    out.append(acc)
            else:
                raise TypeError(f"not a formula: {f!r}")
            memo[f] = out
            return out

        result = ev(formula)
        for x in range(world_count):
            m = result[x]
            if m != full:
                gap = m ^ full
                v = (gap & -gap).bit_length() - 1
                valuation = {}
                for i, name in enumerate(names):
                    world_bits = 0
                    for y in range(world_count):
                        bit = i * world_count + y
                        if bit < sweep_bits:
                            value = v >> bit & 1
                        else:
                            value = fixed >> (bit - sweep_bits) & 1
                        world_bits |= value << y
                    valuation[name] = world_bits
                return valuation, x
    return None
