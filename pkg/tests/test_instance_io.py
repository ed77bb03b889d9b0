import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from divcut import InstanceError, Params, check_plan_feasibility, compute_stats, make_instance, solve_heuristic
from divcut.instance_io import (
    InvalidRange,
    ParseError,
    gen_instance,
    parse_instance,
    parse_plan,
    plan_footer,
    write_instance,
    write_plan,
)

from helpers import random_instance, random_params


class TestParseInstance:
    def test_plain(self):
        inst = parse_instance("c 10\n5 2\n")
        assert inst.stock_length == 10
        assert [(it.length, it.demand) for it in inst.items] == [(5, 2)]

    def test_comments_skipped(self):
        inst = parse_instance("# demo\nc 12000\n12000 1\n")
        assert [(it.length, it.demand) for it in inst.items] == [(12000, 1)]

    def test_syntax_error_has_line(self):
        with pytest.raises(ParseError) as err:
            parse_instance("c 10\n5 2\nbogus\n")
        assert err.value.line == 3

    def test_non_integer(self):
        with pytest.raises(ParseError) as err:
            parse_instance("c 10\n5 two\n")
        assert err.value.line == 2

    def test_validation_errors_propagate(self):
        with pytest.raises(InstanceError):
            parse_instance("c 10\n11 1\n")

    def test_duplicates_merge(self):
        inst = parse_instance("c 10\n5 2\n3 1\n5 1\n")
        assert [(it.length, it.demand) for it in inst.items] == [(5, 3), (3, 1)]


class TestWritePlan:
    def test_six_three_footer(self):
        plan = solve_heuristic(make_instance(10, [(6, 3)]), Params(beta=math.inf, theta=2, gamma=1, delta=1))
        text = write_plan(plan, compute_stats(plan))
        footer = text.strip().splitlines()[-1]
        assert footer.startswith("trim=2 welds=1 leftovers=[]")
        assert text.splitlines()[0] == "stocks 2 c 10"
        assert plan_footer(text)["percentage"] == pytest.approx(10.0)

    def test_leftover_token(self):
        plan = solve_heuristic(make_instance(12000, [(4209, 1)]), Params())
        text = write_plan(plan)
        assert "leftovers=[7791*1]" in text

    def test_output_is_stable(self):
        inst = make_instance(12000, [(4500, 7), (3100, 5), (2750, 9)])
        plan = solve_heuristic(inst, Params())
        assert write_plan(plan) == write_plan(solve_heuristic(inst, Params()))

    def test_ascii_times_accepted(self):
        inst = make_instance(10, [(6, 3)])
        params = Params(beta=math.inf, theta=2, gamma=1, delta=1)
        text = write_plan(solve_heuristic(inst, params)).replace("×", "x")
        assert check_plan_feasibility(parse_plan(text, inst, params)) == []

    def test_malformed_stock_line(self):
        inst = make_instance(10, [(6, 3)])
        with pytest.raises(ParseError) as err:
            parse_plan("stocks 1 c 10\nstock 1: 6×1 wibble trim=4 usable=0\n", inst, Params())
        assert err.value.line == 2

    def test_unpaired_residual_is_caught(self):
        inst = make_instance(10, [(6, 2)])
        params = Params(beta=math.inf, theta=2, gamma=1, delta=1)
        text = "stocks 2 c 10\nstock 1: 6×1 trim=4 usable=0\nstock 2: 6×1 res item=1 len=2 trim=2 usable=0\n"
        assert 5 in {v.constraint for v in check_plan_feasibility(parse_plan(text, inst, params))}


class TestGenerator:
    def test_deterministic(self):
        a = gen_instance(42, 8, 12000, (1000, 6000), (1, 20))
        assert len(a.items) == 8
        assert write_instance(a) == write_instance(gen_instance(42, 8, 12000, (1000, 6000), (1, 20)))

    @pytest.mark.parametrize(
        "n, w_range, v_range",
        [(0, (1000, 6000), (1, 20)), (8, (13000, 14000), (1, 20)), (8, (1, 5), (1, 2)), (3, (10, 20), (0, 2))],
    )
    def test_invalid_ranges(self, n, w_range, v_range):
        with pytest.raises(InvalidRange):
            gen_instance(1, n, 12000, w_range, v_range)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 41))
def test_instance_round_trip(seed, n):
    inst = gen_instance(seed, n, 12000, (1, 12000), (1, 30))
    assert parse_instance(write_instance(inst)) == inst


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_plan_round_trip_keeps_stats(seed):
    rng = random.Random(seed)
    inst = random_instance(rng, c_max=200, n_max=8, v_max=6)
    params = random_params(rng, inst.stock_length)
    plan = solve_heuristic(inst, params)
    again = parse_plan(write_plan(plan), inst, params)
    assert check_plan_feasibility(again) == []
    assert compute_stats(again) == compute_stats(plan)
    assert len(again.patterns) == len(plan.patterns)
