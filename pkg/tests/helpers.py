"""Shared generators for the test suite: small instances and plan mutations."""

from __future__ import annotations

import dataclasses
import math
import random
from fractions import Fraction
from typing import Callable, Optional

from divcut import CuttingPlan, Division, Instance, Params, PlacedResidual, make_instance


def small_case(rng: random.Random) -> tuple[Instance, Params]:
    """An instance the exact oracle solves well inside its default limits."""
    c = rng.randint(6, 24)
    units = rng.randint(1, 6)
    n = rng.randint(1, min(4, units))
    lengths = rng.sample(range(1, c + 1), n)
    demand = [1] * n
    for _ in range(units - n):
        demand[rng.randrange(n)] += 1
    instance = make_instance(c, list(zip(lengths, demand)))
    theta = rng.randint(2, max(2, c // 3))
    beta = rng.choice([math.inf, rng.randint(theta, c)])
    delta = rng.choice([0, 1, 2, 5, c])
    return instance, Params(beta=beta, theta=theta, gamma=1, delta=delta)


def oracle_cases(seed: int = 0, count: int = 200) -> list[tuple[Instance, Params]]:
    rng = random.Random(seed)
    return [small_case(rng) for _ in range(count)]


def huge_delta(instance: Instance, params: Params) -> Params:
    """A weld price no division can ever beat."""
    delta = params.gamma * instance.stock_length * instance.total_units + 1
    return dataclasses.replace(params, delta=Fraction(delta))


def random_instance(rng: random.Random, c_max: int = 12000, n_max: int = 41, v_max: int = 30) -> Instance:
    c = rng.randint(2, c_max)
    n = rng.randint(1, min(n_max, c))
    lengths = rng.sample(range(1, c + 1), n)
    return make_instance(c, [(w, rng.randint(1, v_max)) for w in lengths])


def random_params(rng: random.Random, c: int) -> Params:
    theta = rng.randint(1, max(1, c // 3))
    beta = rng.choice([math.inf, rng.randint(1, c)])
    return Params(beta=beta, theta=theta, gamma=rng.choice([1, 2]), delta=rng.choice([0, 1, 10, 500, c]))


# --- mutations -----------------------------------------------------------
#
# Each operator returns a copy of the plan with one edit that breaks the
# named constraint, or None when the plan offers nothing to edit.

def _with(plan: CuttingPlan, k: int, **changes) -> list:
    patterns = list(plan.patterns)
    patterns[k] = dataclasses.replace(patterns[k], **changes)
    return patterns


def _rebuilt(plan: CuttingPlan, patterns) -> CuttingPlan:
    return CuttingPlan(plan.instance, plan.params, tuple(patterns))


def break_conservation(plan, rng):
    k = rng.randrange(len(plan.patterns))
    pat = plan.patterns[k]
    delta = rng.choice([-1, 1]) * rng.randint(1, 5)
    trim = pat.trim + delta
    return _rebuilt(plan, _with(plan, k, trim=trim, leftover_usable=plan.params.usable(trim)))


def residual_home(plan, rng):
    # move a residual into the stock that divided its unit
    moves = []
    for k, pat in enumerate(plan.patterns):
        for r in pat.placed_residuals:
            for h, host in enumerate(plan.patterns):
                if any((d.item_id, d.unit_index) == (r.item_id, r.unit_index) for d in host.divisions):
                    moves.append((k, h, r))
    if not moves:
        return None
    k, h, r = rng.choice(moves)
    patterns = list(plan.patterns)
    src, dst = patterns[k], patterns[h]
    patterns[k] = dataclasses.replace(
        src, placed_residuals=tuple(x for x in src.placed_residuals if x != r), trim=src.trim + r.length
    )
    patterns[h] = dataclasses.replace(dst, placed_residuals=dst.placed_residuals + (r,), trim=dst.trim - r.length)
    return _rebuilt(plan, patterns)


def break_demand(plan, rng):
    spots = [(k, i) for k, pat in enumerate(plan.patterns) for i, _ in enumerate(pat.whole_items)]
    if not spots:
        return None
    k, i = rng.choice(spots)
    pat = plan.patterns[k]
    item_id, count = pat.whole_items[i]
    w = plan.instance.item(item_id).length
    whole = list(pat.whole_items)
    if count > 1:
        whole[i] = (item_id, count - 1)
    else:
        del whole[i]
    # keep the stock balanced so only the demand count is off
    trim = pat.trim + w
    return _rebuilt(plan, _with(plan, k, whole_items=tuple(whole), trim=trim, leftover_usable=plan.params.usable(trim)))


def drop_residual(plan, rng):
    spots = [(k, r) for k, pat in enumerate(plan.patterns) for r in pat.placed_residuals]
    if not spots:
        return None
    k, r = rng.choice(spots)
    pat = plan.patterns[k]
    trim = pat.trim + r.length
    return _rebuilt(plan, _with(
        plan, k,
        placed_residuals=tuple(x for x in pat.placed_residuals if x != r),
        trim=trim,
        leftover_usable=plan.params.usable(trim),
    ))


def second_division(plan, rng):
    # turn a whole unit into a division inside a stock that already divides
    spots = []
    for k, pat in enumerate(plan.patterns):
        if not pat.divisions:
            continue
        for item_id, count in pat.whole_items:
            w = plan.instance.item(item_id).length
            if w >= 2 * plan.params.theta:
                spots.append((k, item_id, count, w))
    if not spots:
        return None
    k, item_id, count, w = rng.choice(spots)
    pat = plan.patterns[k]
    whole = tuple((i, n - (i == item_id)) for i, n in pat.whole_items if not (i == item_id and n == 1))
    taken = {d.unit_index for p in plan.patterns for d in p.divisions if d.item_id == item_id}
    unit = max(taken | {0}) + 1
    theta = plan.params.theta
    division = Division(item_id, unit, w - theta, theta)
    # the residual goes to a new stock of its own
    patterns = list(plan.patterns)
    patterns[k] = dataclasses.replace(
        pat, whole_items=whole, divisions=pat.divisions + (division,), trim=pat.trim + theta,
        leftover_usable=plan.params.usable(pat.trim + theta),
    )
    c = plan.instance.stock_length
    patterns.append(dataclasses.replace(
        pat, stock_index=len(patterns) + 1, whole_items=(), divisions=(),
        placed_residuals=(PlacedResidual(item_id, unit, theta),), trim=c - theta,
        leftover_usable=plan.params.usable(c - theta),
    ))
    return _rebuilt(plan, patterns)


def _resplit(plan, rng, piece_short: bool):
    spots = [(k, d) for k, pat in enumerate(plan.patterns) for d in pat.divisions]
    if not spots:
        return None
    k, d = rng.choice(spots)
    w = plan.instance.item(d.item_id).length
    small = rng.randint(0, plan.params.theta - 1)
    piece, residual = (small, w - small) if piece_short else (w - small, small)
    shift = piece - d.piece_here
    patterns = list(plan.patterns)
    pat = patterns[k]
    new = Division(d.item_id, d.unit_index, piece, residual)
    patterns[k] = dataclasses.replace(
        pat, divisions=tuple(new if x == d else x for x in pat.divisions), trim=pat.trim - shift,
        leftover_usable=plan.params.usable(pat.trim - shift),
    )
    for h, other in enumerate(patterns):
        for r in other.placed_residuals:
            if (r.item_id, r.unit_index) == (d.item_id, d.unit_index):
                patterns[h] = dataclasses.replace(
                    other,
                    placed_residuals=tuple(
                        PlacedResidual(r.item_id, r.unit_index, residual) if x == r else x
                        for x in other.placed_residuals
                    ),
                    trim=other.trim + shift,
                    leftover_usable=plan.params.usable(other.trim + shift),
                )
    return _rebuilt(plan, patterns)


def short_residual(plan, rng):
    return _resplit(plan, rng, piece_short=False)


def short_piece(plan, rng):
    return _resplit(plan, rng, piece_short=True)


def flip_usable(plan, rng):
    k = rng.randrange(len(plan.patterns))
    pat = plan.patterns[k]
    return _rebuilt(plan, _with(plan, k, leftover_usable=not pat.leftover_usable))


MUTATIONS: dict[str, tuple[int, Callable]] = {
    "conservation": (3, break_conservation),
    "residual_home": (3, residual_home),
    "demand": (4, break_demand),
    "residual_dropped": (5, drop_residual),
    "second_division": (6, second_division),
    "short_residual": (7, short_residual),
    "short_piece": (8, short_piece),
    "usable_flag": (9, flip_usable),
}


def mutate(plan: CuttingPlan, name: str, rng: random.Random) -> Optional[CuttingPlan]:
    return MUTATIONS[name][1](plan, rng)
