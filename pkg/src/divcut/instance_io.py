"""Text formats for instances and plans, and a seeded instance generator.

Instance file::

    # comment
    c 12000
    4500 12
    3100 7

Plan file::

    stocks 2 c 10
    stock 1: 6×1 div item=1 piece=4 residual=2 trim=0 usable=0
    stock 2: 6×1 res item=1 len=2 trim=2 usable=0
    trim=2 welds=1 leftovers=[] stocks=2 percentage=10.0000

Plans do not store unit indices; the parser numbers divided units per item
in stock order and pairs every residual with a division of the same item
and residual length, preferring a division in another stock.
"""

from __future__ import annotations

import random
import re
from collections import Counter
from typing import Optional

from .model import (
    CuttingPlan,
    Division,
    Instance,
    Item,
    Params,
    PlacedResidual,
    PlanStats,
    StockPattern,
    compute_stats,
    validate_instance,
)


class ParseError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class InvalidRange(ValueError):
    pass


def _data_lines(text: str):
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line and not line.startswith("#"):
            yield no, line


def _int(token: str, no: int) -> int:
    if not re.fullmatch(r"[+-]?\d+", token):
        raise ParseError(no, f"expected an integer, got {token!r}")
    return int(token)


def parse_instance(text: str) -> Instance:
    """Read an instance file; equal lengths are merged by validation."""
    stock = None
    items = []
    for no, line in _data_lines(text):
        parts = line.split()
        if stock is None:
            if len(parts) != 2 or parts[0] != "c":
                raise ParseError(no, "first data line must be 'c <stock length>'")
            stock = _int(parts[1], no)
            continue
        if len(parts) != 2:
            raise ParseError(no, "expected '<length> <demand>'")
        w, v = (_int(p, no) for p in parts)
        items.append(Item(len(items) + 1, w, v))
    if stock is None:
        raise ParseError(0, "missing 'c <stock length>' line")
    return validate_instance(Instance(stock, tuple(items)))


def write_instance(instance: Instance) -> str:
    lines = [f"c {instance.stock_length}"]
    lines += [f"{it.length} {it.demand}" for it in instance.items]
    return "\n".join(lines) + "\n"


def _leftover_tokens(leftovers) -> str:
    counts = sorted(Counter(leftovers).items())
    return "[" + " ".join(f"{length}*{n}" for length, n in counts) + "]"


def write_plan(plan: CuttingPlan, stats: Optional[PlanStats] = None) -> str:
    if stats is None:
        stats = compute_stats(plan)
    inst = plan.instance
    lines = [f"stocks {len(plan.patterns)} c {inst.stock_length}"]
    for pat in plan.patterns:
        parts = [f"stock {pat.stock_index}:"]
        parts += [f"{inst.item(i).length}×{n}" for i, n in pat.whole_items]
        parts += [f"div item={d.item_id} piece={d.piece_here} residual={d.residual}" for d in pat.divisions]
        parts += [f"res item={r.item_id} len={r.length}" for r in pat.placed_residuals]
        parts.append(f"trim={pat.trim} usable={int(pat.leftover_usable)}")
        lines.append(" ".join(parts))
    lines.append(
        f"trim={stats.total_trim_loss} welds={stats.weld_count} "
        f"leftovers={_leftover_tokens(stats.usable_leftovers)} "
        f"stocks={stats.stocks_used} percentage={stats.trim_percentage:.4f}"
    )
    return "\n".join(lines) + "\n"


_STOCK = re.compile(r"stock\s+(\d+):(.*)")
_WHOLE = re.compile(r"(\d+)[×x](\d+)")
_DIV = re.compile(r"div item=(-?\d+) piece=(-?\d+) residual=(-?\d+)")
_RES = re.compile(r"res item=(-?\d+) len=(-?\d+)")
_TAIL = re.compile(r"trim=(-?\d+) usable=([01])")
_FOOTER = re.compile(r"trim=(-?\d+) welds=(\d+) leftovers=\[([^\]]*)\](.*)")


def _match(divs, ress):
    """Pair residual slots with division slots; different stocks first.

    ``divs`` and ``ress`` are lists of stock numbers. Returns
    ``{residual slot: division slot}``.
    """
    owner: dict[int, int] = {}

    def augment(r, seen, strict):
        for d, stock in enumerate(divs):
            if d in seen or (strict and stock == ress[r]):
                continue
            seen.add(d)
            if d not in owner or augment(owner[d], seen, strict):
                owner[d] = r
                return True
        return False

    for r in range(len(ress)):
        augment(r, set(), True)
    matched = set(owner.values())
    for r in range(len(ress)):
        if r not in matched:
            augment(r, set(), False)
    return {r: d for d, r in owner.items()}


def parse_plan(text: str, instance: Instance, params: Params) -> CuttingPlan:
    """Rebuild a CuttingPlan from plan text for independent checking.

    Only the syntax is enforced here; whether the plan is feasible is left
    to ``check_plan_feasibility``.
    """
    by_length = {it.length: it.id for it in instance.items}
    lines = list(_data_lines(text))
    if not lines:
        raise ParseError(0, "empty plan")
    no, head = lines[0]
    m = re.fullmatch(r"stocks\s+(\d+)\s+c\s+(\d+)", head)
    if not m:
        raise ParseError(no, "header must be 'stocks <n> c <length>'")
    count, c = int(m.group(1)), int(m.group(2))
    if c != instance.stock_length:
        raise ParseError(no, f"plan is for stock length {c}, instance has {instance.stock_length}")

    raw = []
    for no, line in lines[1:]:
        m = _STOCK.fullmatch(line)
        if not m:
            if _FOOTER.fullmatch(line):
                continue
            raise ParseError(no, "expected a stock line or the footer")
        body = m.group(2).strip()
        tail = _TAIL.search(body)
        if not tail or body[tail.end():].strip():
            raise ParseError(no, "stock line must end with 'trim=<t> usable=<0|1>'")
        rest = body[: tail.start()]
        whole, divs, ress = [], [], []
        for pat, sink in ((_DIV, divs), (_RES, ress), (_WHOLE, whole)):
            sink.extend(tuple(int(g) for g in x.groups()) for x in pat.finditer(rest))
            rest = pat.sub(" ", rest)
        if rest.strip():
            raise ParseError(no, f"unexpected text {rest.strip()!r}")
        raw.append((int(m.group(1)), whole, divs, ress, int(tail.group(1)), tail.group(2) == "1"))
    if len(raw) != count:
        raise ParseError(lines[0][0], f"header announces {count} stocks, found {len(raw)}")

    # number divided units per item after that item's whole units
    whole_total = Counter()
    for _, whole, _, _, _, _ in raw:
        for w, n in whole:
            whole_total[by_length.get(w, 0)] += n
    next_unit = Counter()
    div_slots: dict[tuple[int, int], list] = {}
    for j, _, divs, _, _, _ in raw:
        for item, piece, residual in divs:
            next_unit[item] += 1
            unit = whole_total[item] + next_unit[item]
            div_slots.setdefault((item, residual), []).append((j, unit))
    res_slots: dict[tuple[int, int], list] = {}
    for pos, (j, _, _, ress, _, _) in enumerate(raw):
        for k, (item, length) in enumerate(ress):
            res_slots.setdefault((item, length), []).append((j, pos, k))

    res_units: dict[tuple[int, int], int] = {}
    for key, slots in res_slots.items():
        dslots = div_slots.get(key, [])
        pairs = _match([j for j, _ in dslots], [j for j, _, _ in slots])
        for r, (_, pos, k) in enumerate(slots):
            # an unpaired residual gets a unit no division owns
            res_units[pos, k] = dslots[pairs[r]][1] if r in pairs else 0

    allotted = {key: list(slots) for key, slots in div_slots.items()}
    out = []
    for pos, (j, whole, divs, ress, trim, usable) in enumerate(raw):
        divisions = []
        for item, piece, residual in divs:
            slots = allotted[item, residual]
            k = next(i for i, (s, _) in enumerate(slots) if s == j)
            divisions.append(Division(item, slots.pop(k)[1], piece, residual))
        out.append(StockPattern(
            stock_index=j,
            whole_items=tuple((by_length.get(w, 0), n) for w, n in whole),
            divisions=tuple(divisions),
            placed_residuals=tuple(
                PlacedResidual(item, res_units[pos, k], length) for k, (item, length) in enumerate(ress)
            ),
            trim=trim,
            leftover_usable=usable,
        ))
    return CuttingPlan(instance, params, tuple(out))


def plan_footer(text: str) -> dict:
    """The summary values a plan file claims about itself."""
    for no, line in _data_lines(text):
        m = _FOOTER.fullmatch(line)
        if not m:
            continue
        out = {"trim": int(m.group(1)), "welds": int(m.group(2)), "leftovers": []}
        for tok in m.group(3).split():
            length, n = tok.split("*")
            out["leftovers"] += [int(length)] * int(n)
        for key, value in re.findall(r"(\w+)=(\S+)", m.group(4)):
            out[key] = float(value) if "." in value else int(value)
        return out
    raise ParseError(0, "plan has no footer line")


def gen_instance(
    seed: int,
    n: int,
    c: int,
    w_range: tuple[int, int],
    v_range: tuple[int, int],
) -> Instance:
    """``n`` distinct lengths drawn uniformly from ``w_range``, demands from ``v_range``."""
    wmin, wmax = w_range
    vmin, vmax = v_range
    if n < 1:
        raise InvalidRange(f"n must be at least 1, got {n}")
    if not 1 <= wmin <= wmax <= c:
        raise InvalidRange(f"length range [{wmin}, {wmax}] must lie within [1, {c}]")
    if n > wmax - wmin + 1:
        raise InvalidRange(f"cannot draw {n} distinct lengths from [{wmin}, {wmax}]")
    if not 1 <= vmin <= vmax:
        raise InvalidRange(f"demand range [{vmin}, {vmax}] must satisfy 1 <= min <= max")
    rng = random.Random(seed)
    lengths = rng.sample(range(wmin, wmax + 1), n)
    items = tuple(Item(k, w, rng.randint(vmin, vmax)) for k, w in enumerate(lengths, start=1))
    return validate_instance(Instance(c, items))
