"""Lyapunov values, deficiency, and the difference identity tying them."""

import random
from itertools import product

from hypothesis import given, strategies as st

from conftest import random_multi_instance, random_unit_instance
from walras import (Instance, LyapunovOracle, deficiency, lyapunov,
                    lyapunov_step, max_total_value)


class TestValues:
    def test_worked_example(self, ex21):
        assert lyapunov((0, 0, 0), ex21) == 6
        assert lyapunov((1, 1, 1), ex21) == 3

    def test_no_bidders_leaves_revenue_only(self):
        unit = Instance(model="unit", n=2, u=(1, 1), valuations=())
        multi = Instance(model="multi", n=2, u=(2, 3), valuations=())
        for p in product(range(3), repeat=2):
            assert lyapunov(p, unit) == sum(p)
            assert lyapunov(p, multi) == 2 * p[0] + 3 * p[1]

    def test_two_bidder_multi_values(self, two_bidder_multi):
        assert [lyapunov((k,), two_bidder_multi) for k in range(5)] == \
            [10, 8, 6, 6, 8]

    def test_dominates_revenue(self, ex21, two_bidder_multi):
        for p in product(range(2), repeat=3):
            assert lyapunov(p, ex21) >= sum(p)
        for k in range(6):
            assert lyapunov((k,), two_bidder_multi) >= 2 * k

    def test_increasing_beyond_the_value_ceiling(self, ex21, two_bidder_multi):
        for inst in (ex21, two_bidder_multi):
            cap = max_total_value(inst)
            p = (cap,) * inst.n
            ly = LyapunovOracle(inst)
            for j in range(inst.n):
                q = list(p)
                q[j] += 1
                r = list(q)
                r[j] += 1
                assert ly.value(tuple(q)) < ly.value(tuple(r))


class TestDeficiency:
    def test_worked_example(self, ex21):
        p = (0, 0, 0)
        assert deficiency({1, 2, 3}, p, ex21) == 3
        assert deficiency({2}, p, ex21) == -1

    def test_two_bidder_multi(self, two_bidder_multi):
        assert deficiency({1}, (0,), two_bidder_multi) == 2


class TestStep:
    def test_worked_example(self, ex21):
        assert lyapunov_step({1}, (0, 0, 0), ex21) == -1
        assert lyapunov_step(frozenset(), (0, 0, 0), ex21) == 0

    def test_two_bidder_multi(self, two_bidder_multi):
        assert lyapunov_step({1}, (0,), two_bidder_multi) == -2


def _assert_identity_on_box(inst, cap):
    ly = LyapunovOracle(inst)
    size = 1 << inst.n
    for p in product(range(cap + 1), repeat=inst.n):
        table = ly.demand.deficiency_table(p)
        for mask in range(size):
            assert ly.step_mask(mask, p) == -table[mask], (p, mask)


class TestDifferenceIdentity:
    def test_worked_example_box(self, ex21):
        _assert_identity_on_box(ex21, 2)

    def test_two_bidder_multi_box(self, two_bidder_multi):
        _assert_identity_on_box(two_bidder_multi, 6)

    @given(st.integers(0, 2**32 - 1))
    def test_random_unit(self, seed):
        rng = random.Random(seed)
        inst = random_unit_instance(rng, n_max=3, m_max=4, value_max=3)
        _assert_identity_on_box(inst, 4)

    @given(st.integers(0, 2**32 - 1))
    def test_random_multi(self, seed):
        rng = random.Random(seed)
        inst = random_multi_instance(rng, n_max=2, u_max=2, m_max=2, value_max=3)
        _assert_identity_on_box(inst, max_total_value(inst) + 1)


class TestSubmodularity:
    @given(st.integers(0, 2**32 - 1))
    def test_lattice_inequality(self, seed):
        rng = random.Random(seed)
        if rng.random() < 0.5:
            inst = random_unit_instance(rng, n_max=3, m_max=4, value_max=3)
            cap = 4
        else:
            inst = random_multi_instance(rng, n_max=2, u_max=2, m_max=2, value_max=3)
            cap = max_total_value(inst) + 1
        ly = LyapunovOracle(inst)
        for _ in range(20):
            p = tuple(rng.randint(0, cap) for _ in range(inst.n))
            q = tuple(rng.randint(0, cap) for _ in range(inst.n))
            meet = tuple(map(min, p, q))
            join = tuple(map(max, p, q))
            assert ly.value(p) + ly.value(q) >= ly.value(meet) + ly.value(join)


class TestMemo:
    def test_value_is_stable_across_calls(self, ex21):
        ly = LyapunovOracle(ex21)
        assert ly.value((1, 0, 1)) == ly.value((1, 0, 1))

    def test_oracle_adapter_blocks_out_of_box_queries(self, ex21):
        g = LyapunovOracle(ex21).function_oracle()
        assert g((0, 0, 0)) == 6
        assert g((-1, 0, 0)) is None
        hi = g.box[1]
        assert g((hi[0] + 1, 0, 0)) is None
