"""Domain types, instance validation, plan feasibility, costing and statistics.

Lengths are integer millimetres throughout. Costs are exact fractions.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Union


class InstanceError(ValueError):
    """Raised when an instance fails validation.

    ``problems`` holds every ``(code, message)`` pair found, not just the first.
    """

    def __init__(self, problems: list[tuple[str, str]]):
        self.problems = problems
        super().__init__("; ".join(f"{code}: {msg}" for code, msg in problems))

    @property
    def codes(self) -> list[str]:
        return [code for code, _ in self.problems]


@dataclass(frozen=True)
class Item:
    id: int
    length: int
    demand: int


@dataclass(frozen=True)
class Instance:
    stock_length: int
    items: tuple[Item, ...]

    def __post_init__(self):
        object.__setattr__(self, "items", tuple(self.items))

    def item(self, item_id: int) -> Item:
        # ids are contiguous from 1 after validation
        if 1 <= item_id <= len(self.items) and self.items[item_id - 1].id == item_id:
            return self.items[item_id - 1]
        for it in self.items:
            if it.id == item_id:
                return it
        raise KeyError(item_id)

    @property
    def total_units(self) -> int:
        return sum(it.demand for it in self.items)

    @property
    def total_length(self) -> int:
        return sum(it.length * it.demand for it in self.items)


def _fraction(value) -> Fraction:
    if isinstance(value, float):
        return Fraction(str(value))
    return Fraction(value)


@dataclass(frozen=True)
class Params:
    """Solver tunables.

    ``beta`` is the minimum leftover that counts as usable stock (``math.inf``
    disables banking), ``theta`` the minimum length of either piece of a
    welded item, ``gamma`` the cost per mm of counted trim and ``delta`` the
    cost of one weld.
    """

    beta: Union[int, float] = 1000
    theta: int = 1000
    gamma: Fraction = Fraction(1)
    delta: Fraction = Fraction(500)

    def __post_init__(self):
        object.__setattr__(self, "gamma", _fraction(self.gamma))
        object.__setattr__(self, "delta", _fraction(self.delta))
        if self.theta < 1:
            raise ValueError(f"theta must be >= 1, got {self.theta}")
        if self.beta < 0:
            raise ValueError(f"beta must be >= 0, got {self.beta}")
        if self.beta != math.inf and int(self.beta) != self.beta:
            raise ValueError(f"beta must be an integer or inf, got {self.beta}")
        if self.gamma < 0 or self.delta < 0:
            raise ValueError("gamma and delta must be nonnegative")

    def divisible(self, length: int) -> bool:
        return length >= 2 * self.theta

    def usable(self, trim: int) -> bool:
        return trim >= self.beta


@dataclass(frozen=True)
class Division:
    """One demanded unit cut in two: ``piece_here`` in this stock, ``residual`` elsewhere."""

    item_id: int
    unit_index: int
    piece_here: int
    residual: int


@dataclass(frozen=True)
class PlacedResidual:
    item_id: int
    unit_index: int
    length: int


@dataclass(frozen=True)
class StockPattern:
    stock_index: int
    whole_items: tuple[tuple[int, int], ...]
    divisions: tuple[Division, ...] = ()
    placed_residuals: tuple[PlacedResidual, ...] = ()
    trim: int = 0
    leftover_usable: bool = False

    def __post_init__(self):
        object.__setattr__(self, "whole_items", tuple(tuple(p) for p in self.whole_items))
        object.__setattr__(self, "divisions", tuple(self.divisions))
        object.__setattr__(self, "placed_residuals", tuple(self.placed_residuals))

    @property
    def new_division(self) -> Optional[Division]:
        return self.divisions[0] if self.divisions else None

    def load(self, instance: Instance) -> int:
        total = sum(instance.item(i).length * n for i, n in self.whole_items)
        total += sum(d.piece_here for d in self.divisions)
        total += sum(r.length for r in self.placed_residuals)
        return total


@dataclass(frozen=True)
class CuttingPlan:
    instance: Instance
    params: Params
    patterns: tuple[StockPattern, ...]

    def __post_init__(self):
        object.__setattr__(self, "patterns", tuple(self.patterns))

    @property
    def divisions(self) -> list[Division]:
        return [d for p in self.patterns for d in p.divisions]

    @property
    def weld_count(self) -> int:
        return sum(len(p.divisions) for p in self.patterns)

    @property
    def counted_trim(self) -> int:
        return sum(p.trim for p in self.patterns if not p.leftover_usable)


@dataclass(frozen=True)
class Violation:
    constraint: int
    stock: Optional[int]
    message: str
    quantity: Optional[int] = None

    def __str__(self):
        where = f"stock {self.stock}" if self.stock is not None else "plan"
        return f"({self.constraint}) {where}: {self.message}"


@dataclass(frozen=True)
class PlanStats:
    stocks_used: int
    total_trim_loss: int
    trim_percentage: float
    weld_count: int
    usable_leftovers: tuple[int, ...]
    elapsed: float = 0.0


def validate_instance(instance: Instance) -> Instance:
    """Check an instance and merge items of equal length.

    Returns a new instance whose item ids run 1..n in order of first
    appearance. Raises InstanceError listing every problem found.
    """
    problems: list[tuple[str, str]] = []
    c = instance.stock_length
    if c < 1:
        problems.append(("NonPositiveLength", f"stock length {c} must be positive"))
    if not instance.items:
        problems.append(("EmptyInstance", "instance has no items"))
    for it in instance.items:
        if it.length < 1:
            problems.append(("NonPositiveLength", f"item {it.id}: length {it.length} must be positive"))
        elif c >= 1 and it.length > c:
            problems.append(("ItemExceedsStock", f"item {it.id}: length {it.length} exceeds stock length {c}"))
        if it.demand < 1:
            problems.append(("NonPositiveDemand", f"item {it.id}: demand {it.demand} must be positive"))
    if problems:
        raise InstanceError(problems)

    merged: dict[int, int] = {}
    for it in instance.items:
        merged[it.length] = merged.get(it.length, 0) + it.demand
    items = tuple(Item(k, w, v) for k, (w, v) in enumerate(merged.items(), start=1))
    return Instance(c, items)


def make_instance(stock_length: int, pairs: Iterable[tuple[int, int]]) -> Instance:
    """Build and validate an instance from ``(length, demand)`` pairs."""
    items = tuple(Item(k, w, v) for k, (w, v) in enumerate(pairs, start=1))
    return validate_instance(Instance(stock_length, items))


def check_plan_feasibility(plan: CuttingPlan) -> list[Violation]:
    """Return every constraint violation in ``plan``; empty means feasible.

    Each violation carries the model constraint number it breaks:
    (3) length conservation per stock, including the rule that a residual
    never sits in the stock where its unit was divided; (4) demand
    exactness; (5) every division's residual placed exactly once; (6) at
    most one division per stock; (7)/(8) both pieces at least theta;
    (9) leftover classification against beta.
    """
    inst, params = plan.instance, plan.params
    c = inst.stock_length
    lengths = {it.id: it.length for it in inst.items}
    out: list[Violation] = []

    for pos, pat in enumerate(plan.patterns, start=1):
        j = pat.stock_index
        if j != pos:
            out.append(Violation(3, j, f"stock index {j} out of sequence (expected {pos})", j))
        load = 0
        for item_id, count in pat.whole_items:
            if item_id not in lengths:
                out.append(Violation(4, j, f"unknown item {item_id}", item_id))
                continue
            if count < 1:
                out.append(Violation(4, j, f"item {item_id} listed with count {count}", count))
            load += lengths[item_id] * count
        if len(pat.divisions) > 1:
            out.append(Violation(6, j, f"{len(pat.divisions)} divisions in one stock", len(pat.divisions)))
        for d in pat.divisions:
            load += d.piece_here
            w = lengths.get(d.item_id)
            if w is None:
                out.append(Violation(4, j, f"division of unknown item {d.item_id}", d.item_id))
                continue
            if d.piece_here + d.residual != w:
                out.append(Violation(
                    3, j,
                    f"item {d.item_id} unit {d.unit_index}: piece {d.piece_here} + residual {d.residual} != {w}",
                    d.piece_here + d.residual))
            if d.residual < params.theta:
                out.append(Violation(7, j, f"item {d.item_id} unit {d.unit_index}: residual {d.residual} < theta {params.theta}", d.residual))
            if d.piece_here < params.theta:
                out.append(Violation(8, j, f"item {d.item_id} unit {d.unit_index}: piece {d.piece_here} < theta {params.theta}", d.piece_here))
        load += sum(r.length for r in pat.placed_residuals)
        if pat.trim < 0:
            out.append(Violation(3, j, f"negative trim {pat.trim}", pat.trim))
        if load + pat.trim != c:
            out.append(Violation(3, j, f"load {load} + trim {pat.trim} != stock length {c}", load + pat.trim))
        if pat.leftover_usable != params.usable(pat.trim):
            out.append(Violation(9, j, f"trim {pat.trim} marked usable={int(pat.leftover_usable)} with beta {params.beta}", pat.trim))

    # demand exactness and unit bookkeeping
    whole = Counter()
    for pat in plan.patterns:
        for item_id, count in pat.whole_items:
            whole[item_id] += count
    divided: dict[tuple[int, int], tuple[int, Division]] = {}
    div_count = Counter()
    for pat in plan.patterns:
        for d in pat.divisions:
            div_count[d.item_id] += 1
            key = (d.item_id, d.unit_index)
            it_len = lengths.get(d.item_id)
            if it_len is None:
                continue
            demand = inst.item(d.item_id).demand
            if not 1 <= d.unit_index <= demand:
                out.append(Violation(4, pat.stock_index, f"item {d.item_id}: unit index {d.unit_index} outside 1..{demand}", d.unit_index))
            if key in divided:
                out.append(Violation(4, pat.stock_index, f"item {d.item_id} unit {d.unit_index} divided twice", d.unit_index))
            else:
                divided[key] = (pat.stock_index, d)
    for it in inst.items:
        got = whole[it.id] + div_count[it.id]
        if got != it.demand:
            out.append(Violation(4, None, f"item {it.id}: {whole[it.id]} whole + {div_count[it.id]} divided = {got}, demand {it.demand}", got))

    # residual placement
    placed: dict[tuple[int, int], list[tuple[int, PlacedResidual]]] = {}
    for pat in plan.patterns:
        for r in pat.placed_residuals:
            placed.setdefault((r.item_id, r.unit_index), []).append((pat.stock_index, r))
    for key, (j, d) in divided.items():
        spots = placed.get(key, [])
        if len(spots) != 1:
            out.append(Violation(5, j, f"residual of item {key[0]} unit {key[1]} placed {len(spots)} times", len(spots)))
        for l, r in spots:
            if l == j:
                out.append(Violation(3, l, f"residual of item {key[0]} unit {key[1]} placed in its own dividing stock", r.length))
            if r.length != d.residual:
                out.append(Violation(5, l, f"residual of item {key[0]} unit {key[1]} has length {r.length}, division left {d.residual}", r.length))
    for key, spots in placed.items():
        if key not in divided:
            for l, r in spots:
                out.append(Violation(5, l, f"residual of item {key[0]} unit {key[1]} has no matching division", r.length))
    return out


def plan_cost(plan: CuttingPlan) -> Fraction:
    """Weighted cost: gamma per mm of non-usable trim plus delta per weld."""
    return plan.params.gamma * plan.counted_trim + plan.params.delta * plan.weld_count


def trim_percentage(stocks: int, stock_length: int, trim: int, leftovers: Sequence[int]) -> float:
    denom = stocks * stock_length - sum(leftovers)
    if denom <= 0:
        return 0.0
    return 100.0 * trim / denom


def compute_stats(plan: CuttingPlan, elapsed: float = 0.0) -> PlanStats:
    leftovers = tuple(sorted(p.trim for p in plan.patterns if p.leftover_usable))
    trim = plan.counted_trim
    stocks = len(plan.patterns)
    return PlanStats(
        stocks_used=stocks,
        total_trim_loss=trim,
        trim_percentage=trim_percentage(stocks, plan.instance.stock_length, trim, leftovers),
        weld_count=plan.weld_count,
        usable_leftovers=leftovers,
        elapsed=elapsed,
    )
