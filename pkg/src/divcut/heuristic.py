"""Subset-sum DP heuristic with divisible items.

Each stock is filled by a bounded subset-sum table over the pending pool
(whole units plus residual pieces left by earlier divisions). A companion
table marks fill levels that can be topped up to exactly the stock length
by cutting one pending unit in two. The cheaper of the best plain pattern
and the best division pattern is committed, and the loop repeats until the
pool is empty.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional

import numba
import numpy as np

from .model import (
    CuttingPlan,
    Division,
    Instance,
    Params,
    PlacedResidual,
    StockPattern,
)


class NoCandidate(RuntimeError):
    pass


class CorruptArray(RuntimeError):
    pass


@dataclass(frozen=True)
class PoolEntry:
    """A pending kind: ``count`` whole units of an item, or one residual lot.

    Residual lots carry the ``unit_index`` of the divided unit they finish
    and are never divided again.
    """

    item_id: int
    length: int
    count: int
    unit_index: int = 0

    @property
    def is_residual(self) -> bool:
        return self.unit_index > 0


@dataclass(frozen=True)
class DpCell:
    item_index: int
    count: int


@dataclass(frozen=True)
class DivisionCandidate:
    item_index: int
    item_id: int
    fill: int
    piece_here: int
    residual: int


@dataclass
class PendingPool:
    whole: list[PoolEntry]
    lots: list[PoolEntry] = field(default_factory=list)
    consumed: dict[int, int] = field(default_factory=dict)

    @classmethod
    def from_instance(cls, instance: Instance) -> "PendingPool":
        items = sorted(instance.items, key=lambda it: (-it.length, it.id))
        return cls([PoolEntry(it.id, it.length, it.demand) for it in items])

    @classmethod
    def of(cls, pairs: Iterable[tuple[int, int]]) -> "PendingPool":
        """Pool of whole items in the given order, ids numbered from 1."""
        return cls([PoolEntry(k, w, v) for k, (w, v) in enumerate(pairs, start=1)])

    def kinds(self) -> list[PoolEntry]:
        return [e for e in self.whole if e.count > 0] + list(self.lots)

    def __bool__(self) -> bool:
        return bool(self.lots) or any(e.count > 0 for e in self.whole)

    def next_unit(self, item_id: int) -> int:
        return self.consumed.get(item_id, 0) + 1

    def commit(self, pattern: StockPattern) -> None:
        taken = dict(pattern.whole_items)
        for d in pattern.divisions:
            taken[d.item_id] = taken.get(d.item_id, 0) + 1
        for k, e in enumerate(self.whole):
            n = taken.pop(e.item_id, 0)
            if n:
                if n > e.count:
                    raise ValueError(f"pattern takes {n} units of item {e.item_id}, {e.count} pending")
                self.whole[k] = PoolEntry(e.item_id, e.length, e.count - n)
                self.consumed[e.item_id] = self.consumed.get(e.item_id, 0) + n
        if taken:
            raise ValueError(f"pattern takes unknown items {sorted(taken)}")
        used = {(r.item_id, r.unit_index) for r in pattern.placed_residuals}
        self.lots = [e for e in self.lots if (e.item_id, e.unit_index) not in used]
        for d in pattern.divisions:
            self.lots.append(PoolEntry(d.item_id, d.residual, 1, d.unit_index))


@numba.njit(cache=True)
def _fill_table(lengths, counts, cap, stop_when_full):
    kind = np.zeros(cap + 1, dtype=np.int32)
    count = np.zeros(cap + 1, dtype=np.int32)
    prefix = 0
    processed = 0
    for k in range(lengths.shape[0]):
        processed = k + 1
        w = lengths[k]
        v = counts[k]
        tag = k + 1
        prefix += w * v
        hi = min(cap, prefix)
        for s in range(w, hi + 1):
            if kind[s] != 0:
                continue
            t = s - w
            if t == 0:
                kind[s] = tag
                count[s] = 1
            elif kind[t] == tag:
                # a run of v copies of this kind cannot be extended
                if count[t] < v:
                    kind[s] = tag
                    count[s] = count[t] + 1
            elif kind[t] != 0:
                kind[s] = tag
                count[s] = 1
        if stop_when_full and kind[cap] != 0:
            break
    return kind, count, processed


@numba.njit(cache=True)
def _mark_divisions(kind, count, lengths, counts, order, cap, theta, best_only):
    marked = np.zeros(cap + 1, dtype=np.int32)
    for s in range(cap, 0, -1):
        if kind[s] == 0:
            continue
        gap = cap - s
        if gap < theta:
            continue
        need = gap + theta
        for k in order:
            if lengths[k] < need:
                continue
            used = 0
            t = s
            while t > 0:
                kk = kind[t] - 1
                if kk == k:
                    used += count[t]
                t -= count[t] * lengths[kk]
            if counts[k] - used >= 1:
                marked[s] = k + 1
                break
        if best_only and marked[s] != 0:
            break
    return marked


@numba.njit(cache=True)
def _top_fills(kind, limit):
    # largest reachable fill overall, and largest reachable fill <= limit
    top = 0
    below = 0
    for s in range(kind.shape[0] - 1, 0, -1):
        if kind[s] != 0:
            if top == 0:
                top = s
            if s <= limit:
                below = s
                break
    return top, below


class ArrayA:
    """Bounded subset-sum table over a pool's kinds.

    ``kind[s]`` is the 1-based index of the last kind used to reach fill
    ``s`` (0 when unreachable) and ``count[s]`` how many consecutive copies
    of it end the reconstruction. Index 0 is the empty fill.
    """

    def __init__(self, kinds: list[PoolEntry], cap: int, kind: np.ndarray, count: np.ndarray, complete: bool):
        self.kinds = kinds
        self.cap = cap
        self.kind = kind
        self.count = count
        self.complete = complete

    def __getitem__(self, s: int) -> Optional[DpCell]:
        k = int(self.kind[s])
        return DpCell(k, int(self.count[s])) if k else None

    def __len__(self) -> int:
        return self.cap + 1

    def filled(self) -> np.ndarray:
        """Fill levels s >= 1 that are reachable, ascending."""
        return np.flatnonzero(self.kind)

    def max_filled(self) -> int:
        nz = self.filled()
        return int(nz[-1]) if nz.size else 0


class ArrayB:
    def __init__(self, a: ArrayA, marked: np.ndarray):
        self.a = a
        self.marked = marked

    def __getitem__(self, s: int) -> Optional[DivisionCandidate]:
        k = int(self.marked[s])
        if not k:
            return None
        e = self.a.kinds[k - 1]
        piece = self.a.cap - s
        return DivisionCandidate(k, e.item_id, s, piece, e.length - piece)

    def __len__(self) -> int:
        return len(self.marked)

    def marked_levels(self) -> np.ndarray:
        return np.flatnonzero(self.marked)


def build_array_A(pool: PendingPool, cap: int, *, stop_when_full: bool = False) -> ArrayA:
    """Fill the subset-sum table for ``pool`` in kind order.

    With ``stop_when_full`` the fill stops after the first kind that reaches
    ``cap`` exactly; the table is then partial but its top cell is final.
    """
    kinds = pool.kinds()
    lengths = np.array([e.length for e in kinds], dtype=np.int64)
    counts = np.array([e.count for e in kinds], dtype=np.int64)
    kind, count, processed = _fill_table(lengths, counts, cap, stop_when_full)
    return ArrayA(kinds, cap, kind, count, processed == len(kinds))


def reconstruct_pattern(a: ArrayA, s: int) -> dict[int, int]:
    """Walk back from fill ``s``; returns ``{kind index: copies}``."""
    units: dict[int, int] = {}
    t = s
    while t > 0:
        k = int(a.kind[t])
        if k == 0:
            raise CorruptArray(f"walk from {s} hit empty cell {t}")
        p = int(a.count[t])
        units[k] = units.get(k, 0) + p
        t -= p * a.kinds[k - 1].length
    if t < 0:
        raise CorruptArray(f"walk from {s} overshot to {t}")
    return units


def build_array_B(a: ArrayA, params: Params, *, best_only: bool = False) -> ArrayB:
    """Mark fills that one divided unit can top up to exactly ``cap``.

    For each reachable fill ``s`` with gap ``g = cap - s >= theta`` the
    chosen kind is the whole item with the shortest length ``w >= g + theta``
    that still has a unit left after the reconstruction of ``s``. With
    ``best_only`` only the largest marked fill is computed.
    """
    order = sorted(
        (k for k, e in enumerate(a.kinds) if not e.is_residual),
        key=lambda k: (a.kinds[k].length, a.kinds[k].item_id),
    )
    lengths = np.array([e.length for e in a.kinds], dtype=np.int64)
    counts = np.array([e.count for e in a.kinds], dtype=np.int64)
    marked = _mark_divisions(
        a.kind, a.count, lengths, counts, np.array(order, dtype=np.int64), a.cap, params.theta, best_only
    )
    return ArrayB(a, marked)


def _pure_cost(gap: int, params: Params) -> Fraction:
    return Fraction(0) if params.usable(gap) else params.gamma * gap


def best_plain_fill(a: ArrayA, params: Params) -> tuple[int, Fraction]:
    """Cheapest plain fill, larger fill on ties."""
    cap = a.cap
    limit = cap - params.beta if params.beta <= cap else -1
    top, below = _top_fills(a.kind, int(limit))
    if top == 0:
        raise NoCandidate("no reachable fill level")
    cost = _pure_cost(cap - top, params)
    # below the top only a fill leaving a usable leftover can be cheaper
    if cost > 0 and below > 0:
        return below, Fraction(0)
    return top, cost


def select_pattern(
    a: ArrayA,
    b: Optional[ArrayB],
    pool: PendingPool,
    params: Params,
    stock_index: int = 1,
) -> StockPattern:
    """Pick the minimum-cost pattern from the two tables.

    Ties prefer fewer welds, then the larger fill.
    """
    s, cost = best_plain_fill(a, params)
    division = None
    if b is not None and cost > params.delta:
        levels = b.marked_levels()
        if levels.size:
            division = b[int(levels[-1])]
            s = division.fill

    units = reconstruct_pattern(a, s)
    whole: dict[int, int] = {}
    residuals = []
    for k, n in sorted(units.items()):
        e = a.kinds[k - 1]
        if e.is_residual:
            residuals.append(PlacedResidual(e.item_id, e.unit_index, e.length))
        else:
            whole[e.item_id] = whole.get(e.item_id, 0) + n

    divisions = ()
    trim = a.cap - s
    if division is not None:
        unit = pool.next_unit(division.item_id) + whole.get(division.item_id, 0)
        divisions = (Division(division.item_id, unit, division.piece_here, division.residual),)
        trim = 0
    return StockPattern(
        stock_index=stock_index,
        whole_items=tuple(sorted(whole.items())),
        divisions=divisions,
        placed_residuals=tuple(residuals),
        trim=trim,
        leftover_usable=params.usable(trim),
    )


def warm_up() -> None:
    """Load the compiled kernels so later timings measure only solving."""
    pool = PendingPool.of([(3, 2)])
    a = build_array_A(pool, 4)
    build_array_B(a, Params(beta=1, theta=1, gamma=1, delta=1))
    _top_fills(a.kind, 1)


def solve_heuristic(instance: Instance, params: Params, *, allow_division: bool = True) -> CuttingPlan:
    """Build a cutting plan stock by stock until every demand is met.

    ``allow_division=False`` runs the same loop with the division table
    forced empty.
    """
    c = instance.stock_length
    pool = PendingPool.from_instance(instance)
    patterns: list[StockPattern] = []
    while pool:
        a = build_array_A(pool, c, stop_when_full=True)
        b = None
        if allow_division and a.kind[c] == 0:
            b = build_array_B(a, params, best_only=True)
        pattern = select_pattern(a, b, pool, params, stock_index=len(patterns) + 1)
        pool.commit(pattern)
        patterns.append(pattern)
    return CuttingPlan(instance, params, tuple(patterns))
