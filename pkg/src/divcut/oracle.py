"""Exhaustive exact solvers for desk-sized instances.

Plans are built one closed stock at a time. A state is the vector of
remaining whole units per item plus the multiset of pending pieces (the
other half of a unit divided in an already closed stock), so stock order
and swaps of identical units collapse into one memoized state.

Split points are not tried one millimetre at a time. For a fixed plan
structure (which pieces share which stock) the split lengths are the
variables of a linear program whose constraint matrix is a directed
incidence matrix, hence totally unimodular. Some optimal vertex therefore
has every split either at a bound (piece ``theta`` or ``w - theta``) or
forming a forest of free splits in which every stock but one per tree is
tight, meaning its load is ``c``, ``c - beta`` or ``c - beta + 1``.
Closing stocks leaf-first, a free split is only ever needed as the last
piece of a stock that it makes tight, and the search enumerates exactly
those choices.
"""

from __future__ import annotations

import math
import time
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Union

import numpy as np

from .heuristic import PendingPool, solve_heuristic
from .model import (
    CuttingPlan,
    Division,
    Instance,
    Params,
    PlacedResidual,
    StockPattern,
    check_plan_feasibility,
    plan_cost,
)

class LimitExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class OracleLimits:
    max_total_units: int = 8
    max_stock_length: int = 64
    time_budget: float = 10.0
    max_combinations: int = 2_000_000


def subset_sum_oracle(
    pool: Union[PendingPool, Iterable[tuple[int, int]]],
    cap: int,
    limits: OracleLimits = OracleLimits(),
) -> int:
    """Largest sum <= ``cap`` over every bounded sub-multiset of the pool.

    Enumerates all prod(v_i + 1) multiplicity vectors explicitly.
    """
    if isinstance(pool, PendingPool):
        pairs = [(e.length, e.count) for e in pool.kinds()]
    else:
        pairs = list(pool)
    combos = math.prod(v + 1 for _, v in pairs)
    if combos > limits.max_combinations:
        raise LimitExceeded(f"{combos} multiplicity vectors > {limits.max_combinations}")
    sums = np.zeros(1, dtype=np.int64)
    for w, v in pairs:
        sums = (sums[:, None] + w * np.arange(v + 1, dtype=np.int64)).ravel()
    fits = sums[sums <= cap]
    return int(fits.max()) if fits.size else 0


def _check_limits(instance: Instance, limits: OracleLimits) -> None:
    units = instance.total_units
    c = instance.stock_length
    if units > limits.max_total_units or c > limits.max_stock_length:
        raise LimitExceeded(
            f"instance has {units} units and stock length {c}; "
            f"limits are {limits.max_total_units} units and length {limits.max_stock_length}"
        )


def _add(a, b):
    return tuple(x + y for x, y in zip(a, b))


def _sub(a, b):
    return tuple(x - y for x, y in zip(a, b))


class _Search:
    """Memoized stock-by-stock search; see the module docstring."""

    def __init__(self, instance: Instance, params: Params, divisible: bool, limits: OracleLimits):
        self.instance = instance
        self.params = params
        self.divisible = divisible
        self.c = instance.stock_length
        self.lengths = tuple(it.length for it in instance.items)
        self.theta = params.theta
        beta = params.beta
        tight = {self.c}
        if beta <= self.c:
            tight.update((self.c - beta, self.c - beta + 1))
        self.targets = sorted(int(t) for t in tight if 1 <= t <= self.c)
        # integer costs: scale gamma and delta by a common denominator
        self.scale = math.lcm(params.gamma.denominator, params.delta.denominator)
        self.gamma = int(params.gamma * self.scale)
        self.delta = int(params.delta * self.scale)
        self.memo: dict = {}
        self.moves: dict = {}
        self.cache: dict = {}
        self.deadline = time.monotonic() + limits.time_budget
        self.budget = limits.time_budget

    def stock_cost(self, load: int) -> int:
        trim = self.c - load
        return 0 if self.params.usable(trim) else self.gamma * trim

    def _wholes(self, rem, k=0, cap=None):
        if cap is None:
            cap = self.c
        if k == len(rem):
            yield (), 0
            return
        w = self.lengths[k]
        for n in range(min(rem[k], cap // w) + 1):
            for rest, load in self._wholes(rem, k + 1, cap - n * w):
                yield (n,) + rest, n * w + load

    def _pending(self, kinds, k, cap, host_free):
        if k == len(kinds):
            yield (), 0, False
            return
        (item, length, needs_host), mult = kinds[k]
        top = min(mult, cap // length)
        if needs_host:
            top = min(top, 1 if host_free else 0)
        for n in range(top + 1):
            for rest, load, host in self._pending(kinds, k + 1, cap - n * length, host_free and not (needs_host and n)):
                yield (n,) + rest, n * length + load, host or (needs_host and n > 0)

    def _bound_starts(self, avail, k, cap, host_free):
        # (item, piece_here, hosts_here) for splits with a piece at a theta bound
        if not self.divisible or k == len(avail):
            yield (), 0, False
            return
        w, th = self.lengths[k], self.theta
        if avail[k] == 0 or w < 2 * th:
            yield from self._bound_starts(avail, k + 1, cap, host_free)
            return
        pieces = sorted({th, w - th})
        options = [(p, False) for p in pieces] + ([(p, True) for p in pieces] if host_free else [])
        yield from self._starts_of_item(avail, k, cap, host_free, options, 0, avail[k], ())

    def _starts_of_item(self, avail, k, cap, host_free, options, o, left, acc):
        if o == len(options):
            for rest, load, host in self._bound_starts(avail, k + 1, cap, host_free):
                yield acc + rest, sum(p for _, p, _ in acc) + load, host or any(h for _, _, h in acc)
            return
        piece, hosts = options[o]
        top = min(left, cap // piece)
        if hosts:
            top = min(top, 1)
        for n in range(top + 1):
            if hosts and n and any(h for _, _, h in acc):
                break
            yield from self._starts_of_item(
                avail, k, cap - n * piece, host_free and not (hosts and n), options, o + 1, left - n,
                acc + ((k, piece, hosts),) * n,
            )

    def _cached(self, name, gen, *args):
        key = (name,) + args
        out = self.cache.get(key)
        if out is None:
            out = self.cache[key] = list(gen(*args))
        return out

    def stocks(self, rem, pend):
        """Every closable stock from this state: (load, wholes, pending taken, starts)."""
        kinds = tuple(sorted(Counter(pend).items()))
        for take, wload in self._cached("w", self._wholes, rem):
            for ptake, pload, phost in self._cached("p", self._pending, kinds, 0, self.c - wload, True):
                used = tuple(key for (key, _), n in zip(kinds, ptake) for _ in range(n))
                load0 = wload + pload
                avail = tuple(r - t for r, t in zip(rem, take))
                for starts, sload, shost in self._cached("s", self._bound_starts, avail, 0, self.c - load0, not phost):
                    load1 = load0 + sload
                    # a stock with a free host slot hosts one of the splits it starts
                    hosted = phost or shost
                    if load1 > 0 and (hosted or not starts):
                        yield load1, take, used, starts
                    if not self.divisible:
                        continue
                    left = list(avail)
                    for item, _, _ in starts:
                        left[item] -= 1
                    for item, w in enumerate(self.lengths):
                        if left[item] == 0 or w < 2 * self.theta:
                            continue
                        for t in self.targets:
                            piece = t - load1
                            if self.theta <= piece <= w - self.theta:
                                yield t, take, used, starts + ((item, piece, not hosted),)

    def lower_bound(self, rem, pend) -> tuple:
        """Lexicographic lower bound on ``(cost, welds, stocks)`` still to pay."""
        key = ("lb", rem, pend)
        out = self.cache.get(key)
        if out is None:
            out = self.cache[key] = self._lower_bound(rem, pend)
        return out

    def _lower_bound(self, rem, pend) -> tuple:
        c, gamma, delta = self.c, self.gamma, self.delta
        rest = sum(r * w for r, w in zip(rem, self.lengths)) + sum(length for _, length, _ in pend)
        fewest = -(-rest // c)
        room = c - self.params.beta if self.params.beta <= c else -1
        splittable = [self.divisible and w >= 2 * self.theta for w in self.lengths]

        # units longer than c/2 that cannot bank a leftover need a counted
        # stock each unless they are split
        def big(length):
            return 2 * length > c and length > room

        fixed = sum(1 for _, length, _ in pend if big(length))
        fixed += sum(r for r, w, sp in zip(rem, self.lengths, splittable) if big(w) and not sp)
        loose = sum(r for r, w, sp in zip(rem, self.lengths, splittable) if big(w) and sp)
        # a banked leftover needs a short load, either already pending or cut fresh
        short = any(length <= room for _, length, _ in pend) or any(
            r and w <= room for r, w in zip(rem, self.lengths)
        )
        cut_short = any(r and sp and self.theta <= room for r, sp in zip(rem, splittable))

        best = None
        for welds in range(loose + 1):
            k = fixed + loose - welds
            stocks = max(fewest, k)
            counted = (stocks * c - rest, welds)
            banked = (max(0, k * c - rest), welds)
            if room < 0:
                options = [counted]
            elif short:
                options = [banked]
            elif welds or not cut_short:
                options = [banked if welds and cut_short else counted]
            else:
                options = [counted, (banked[0], 1)]
            for trim, w in options:
                value = (gamma * trim + delta * w, w, stocks)
                if best is None or value < best:
                    best = value
        return best

    def _moves(self, rem, pend) -> list:
        moves = {}
        for load, take, used, starts in self.stocks(rem, pend):
            nrem = [r - t for r, t in zip(rem, take)]
            npend = list(pend)
            for piece in used:
                npend.remove(piece)
            for item, here, hosts in starts:
                nrem[item] -= 1
                npend.append((item, self.lengths[item] - here, not hosts))
            nrem, npend = tuple(nrem), tuple(sorted(npend))
            # the future depends only on the next state, so keep its cheapest step
            step = (self.stock_cost(load) + self.delta * len(starts), len(starts), 1)
            old = moves.get((nrem, npend))
            if old is None or (step, -load) < (old[2], old[1]):
                moves[nrem, npend] = (None, -load, step, (load, take, used, starts, nrem, npend))
        moves = sorted(
            ((_add(m[2], self.lower_bound(*key)),) + m[1:] for key, m in moves.items()),
            key=lambda m: m[:2],
        )
        return moves

    def best(self, rem, pend, budget=None):
        """Optimal ``(cost, welds, stocks)`` from this state.

        Returns ``(value, True)`` when the optimum is lexicographically
        below ``budget`` (or no budget is given), else ``(bound, False)``
        with ``bound >= budget``.
        """
        key = (rem, pend)
        hit = self.memo.get(key)
        if hit is not None:
            value, exact = hit[0], hit[2]
            if exact or (budget is not None and value >= budget):
                return value, exact
        if not pend and not any(rem):
            return (0, 0, 0), True
        if time.monotonic() > self.deadline:
            raise LimitExceeded(f"time budget of {self.budget}s exhausted")

        moves = self.moves.get(key)
        if moves is None:
            moves = self.moves[key] = self._moves(rem, pend)

        best = choice = None
        floor = None
        for bound, _, step, move in moves:
            if budget is not None and bound >= budget:
                floor = bound if floor is None else min(floor, bound)
                break
            sub, exact = self.best(move[4], move[5], None if budget is None else _sub(budget, step))
            val = _add(step, sub)
            if not exact:
                floor = val if floor is None else min(floor, val)
                continue
            if best is None or val < best:
                best, choice, budget = val, move, val
        if best is not None:
            self.memo[key] = (best, choice, True)
            self.moves.pop(key, None)
            return best, True
        if floor is None:
            raise AssertionError(f"dead end at state {key}")
        self.memo[key] = (floor, None, False)
        return floor, False

    def solve(self, incumbent=None) -> CuttingPlan:
        """``incumbent`` is the value of any feasible plan; it only prunes."""
        rem = tuple(it.demand for it in self.instance.items)
        budget = None if incumbent is None else (incumbent[0], incumbent[1], incumbent[2] + 1)
        _, exact = self.best(rem, (), budget)
        if not exact:
            raise AssertionError("incumbent is not achievable")
        return self._replay(rem, ())

    def value(self) -> tuple:
        rem = tuple(it.demand for it in self.instance.items)
        return self.memo[(rem, ())][0]

    def _replay(self, rem, pend) -> CuttingPlan:
        items = self.instance.items
        queues: dict = {}
        unit_no: Counter = Counter()
        patterns = []
        while pend or any(rem):
            load, take, used, starts, rem, pend = self.memo[(rem, pend)][1]
            whole = tuple((items[k].id, n) for k, n in enumerate(take) if n)
            divisions, residuals = [], []
            for key in used:
                item, length, needs_host = key
                unit, other = queues[key].pop(0)
                if needs_host:
                    divisions.append(Division(items[item].id, unit, length, other))
                else:
                    residuals.append(PlacedResidual(items[item].id, unit, length))
            for item, here, hosts in starts:
                unit_no[item] += 1
                unit = unit_no[item]
                other = self.lengths[item] - here
                if hosts:
                    divisions.append(Division(items[item].id, unit, here, other))
                else:
                    residuals.append(PlacedResidual(items[item].id, unit, here))
                queues.setdefault((item, other, not hosts), []).append((unit, here))
            trim = self.c - load
            patterns.append(StockPattern(
                stock_index=len(patterns) + 1,
                whole_items=whole,
                divisions=tuple(divisions),
                placed_residuals=tuple(residuals),
                trim=trim,
                leftover_usable=self.params.usable(trim),
            ))
        return CuttingPlan(self.instance, self.params, tuple(patterns))


def _certify(plan: CuttingPlan) -> CuttingPlan:
    problems = check_plan_feasibility(plan)
    if problems:
        raise AssertionError("oracle produced an infeasible plan: " + "; ".join(map(str, problems)))
    return plan


def exact_solve_classical(
    instance: Instance, beta: Union[int, float], limits: OracleLimits = OracleLimits()
) -> CuttingPlan:
    """Minimum counted trim without divisions; fewer stocks on ties."""
    _check_limits(instance, limits)
    params = Params(beta=beta, theta=1, gamma=1, delta=0)
    return _certify(_Search(instance, params, False, limits).solve())


def exact_solve_divisible(
    instance: Instance, params: Params, limits: OracleLimits = OracleLimits()
) -> CuttingPlan:
    """Minimum ``gamma * counted trim + delta * welds`` over all feasible plans.

    Ties prefer fewer welds, then fewer stocks.
    """
    _check_limits(instance, limits)
    start = time.monotonic()
    # the best plan without divisions is feasible here too and seeds the bound
    plain = _Search(instance, params, False, limits)
    plain.solve()
    incumbent = plain.value()
    # so is the heuristic plan, which is often much closer when divisions pay
    guess = solve_heuristic(instance, params)
    if not check_plan_feasibility(guess):
        cost = plan_cost(guess) * plain.scale
        incumbent = min(incumbent, (int(cost), guess.weld_count, len(guess.patterns)))
    rest = OracleLimits(limits.max_total_units, limits.max_stock_length,
                        max(0.0, limits.time_budget - (time.monotonic() - start)), limits.max_combinations)
    return _certify(_Search(instance, params, True, rest).solve(incumbent=incumbent))


def optimal_cost(instance: Instance, params: Params, limits: OracleLimits = OracleLimits()) -> Fraction:
    return plan_cost(exact_solve_divisible(instance, params, limits))
