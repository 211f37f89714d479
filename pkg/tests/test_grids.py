import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import domconv as dc


def grid_of(*points):
    return dc.Grid(np.array(points, dtype=float))


G3 = dc.Grid(np.array([0.0, 0.5, 1.0]))


def f3(*values):
    return dc.sampled(G3, values)


class TestGridValidation:
    def test_accepts_sorted_points(self):
        g = grid_of(0.0, 0.25, 1.0)
        assert g.size == 3
        assert g.span == 1.0

    def test_rejects_unsorted(self):
        with pytest.raises(dc.ValidationError):
            grid_of(0.0, 0.5, 0.5)

    def test_rejects_out_of_range(self):
        with pytest.raises(dc.ValidationError):
            grid_of(-0.1, 0.5)
        with pytest.raises(dc.ValidationError):
            grid_of(0.5, 1.1)

    def test_rejects_single_point(self):
        with pytest.raises(dc.ValidationError):
            dc.Grid(np.array([0.5]))

    def test_metric(self):
        g = grid_of(0.0, 0.25, 1.0)
        assert g.distance(0, 2) == 1.0
        assert g.distance(2, 0) == 1.0
        assert g.distance(1, 1) == 0.0

    def test_immutable(self):
        g = grid_of(0.0, 1.0)
        with pytest.raises(ValueError):
            g.points[0] = 0.5


class TestSampledFunction:
    def test_length_mismatch_rejected(self):
        with pytest.raises(dc.ValidationError):
            dc.sampled(G3, [1.0, 2.0])

    def test_nonfinite_rejected(self):
        with pytest.raises(dc.ValidationError):
            dc.sampled(G3, [0.0, np.nan, 1.0])

    def test_json_round_trip(self):
        f = f3(0.5, -0.25, 0.75)
        back = dc.SampledFunction.from_json(f.to_json())
        assert back.grid == f.grid
        assert np.array_equal(back.values, f.values)


class TestLatticeOps:
    def test_join_by_inspection(self):
        assert np.array_equal(
            dc.lattice_join(f3(1, 0, 2), f3(0, 1, 1)).values, [1, 1, 2]
        )

    def test_meet_by_inspection(self):
        assert np.array_equal(
            dc.lattice_meet(f3(1, 0, 2), f3(0, 1, 1)).values, [0, 0, 1]
        )

    def test_idempotence(self):
        g2 = grid_of(0.0, 1.0)
        f = dc.sampled(g2, [3.0, 3.0])
        assert np.array_equal(dc.lattice_join(f, f).values, [3, 3])
        assert np.array_equal(dc.lattice_meet(f, f).values, [3, 3])

    def test_join_meet_with_zero_split_signs(self):
        f = f3(-1, 5, 0)
        zero = f3(0, 0, 0)
        assert np.array_equal(dc.lattice_join(f, zero).values, [0, 5, 0])
        assert np.array_equal(dc.lattice_meet(f, zero).values, [-1, 0, 0])

    def test_grid_mismatch_rejected(self):
        other = dc.sampled(grid_of(0.0, 0.3, 1.0), [1, 2, 3])
        with pytest.raises(dc.GridMismatchError):
            dc.lattice_join(f3(1, 2, 3), other)
        with pytest.raises(dc.GridMismatchError):
            dc.lattice_meet(f3(1, 2, 3), other)

    @given(st.lists(st.tuples(finite := st.floats(-1e6, 1e6), finite), min_size=2, max_size=40))
    @settings(max_examples=200)
    def test_lattice_identity_exact(self, pairs):
        g = np.array([p[0] for p in pairs])
        h = np.array([p[1] for p in pairs])
        grid = dc.Grid.uniform(len(pairs))
        fg, fh = dc.sampled(grid, g), dc.sampled(grid, h)
        join = dc.lattice_join(fg, fh).values
        meet = dc.lattice_meet(fg, fh).values
        # Exact: per coordinate the pair (join, meet) is a permutation of (g, h).
        assert np.array_equal(join + meet, g + h)

    @given(
        st.integers(2, 30),
        st.integers(0, 2**32 - 1),
    )
    @settings(max_examples=100)
    def test_join_dominates_meet_dominated(self, size, seed):
        rng = np.random.default_rng(seed)
        grid = dc.Grid.uniform(size)
        a = dc.sampled(grid, rng.normal(size=size))
        b = dc.sampled(grid, rng.normal(size=size))
        join, meet = dc.lattice_join(a, b), dc.lattice_meet(a, b)
        assert np.all(join.values >= a.values) and np.all(join.values >= b.values)
        assert np.all(meet.values <= a.values) and np.all(meet.values <= b.values)
        # commutativity
        assert np.array_equal(join.values, dc.lattice_join(b, a).values)
        assert np.array_equal(meet.values, dc.lattice_meet(b, a).values)

    def test_associativity(self):
        rng = np.random.default_rng(7)
        grid = dc.Grid.uniform(17)
        a, b, c = (dc.sampled(grid, rng.normal(size=17)) for _ in range(3))
        left = dc.lattice_join(dc.lattice_join(a, b), c)
        right = dc.lattice_join(a, dc.lattice_join(b, c))
        assert np.array_equal(left.values, right.values)


class TestSupNorm:
    def test_zero_function(self):
        assert dc.sup_norm(f3(0, 0, 0)) == 0.0

    def test_absolute_value(self):
        g2 = grid_of(0.0, 1.0)
        assert dc.sup_norm(dc.sampled(g2, [-2.0, 1.0])) == 2.0

    def test_by_inspection(self):
        assert dc.sup_norm(f3(0.5, -0.25, 0.75)) == 0.75

    def test_zero_iff_identically_zero(self):
        assert dc.sup_norm(f3(0, 1e-300, 0)) > 0.0


class TestRunningMeet:
    def test_direct_pointwise_minima(self):
        g2 = grid_of(0.0, 1.0)
        gs = [dc.sampled(g2, v) for v in ([2, 2], [1, 3], [3, 0])]
        out = dc.running_meet(gs)
        expected = [[2, 2], [1, 2], [1, 0]]
        for got, want in zip(out, expected):
            assert np.array_equal(got.values, want)

    def test_singleton(self):
        out = dc.running_meet([f3(1, 2, 3)])
        assert len(out) == 1 and np.array_equal(out[0].values, [1, 2, 3])

    def test_empty_rejected(self):
        with pytest.raises(dc.ValidationError):
            dc.running_meet([])

    def test_matches_direct_fold_and_monotone(self):
        rng = np.random.default_rng(42)
        grid = dc.Grid.uniform(128)
        gs = [dc.sampled(grid, rng.uniform(0, 1, 128)) for _ in range(50)]
        out = dc.running_meet(gs)
        acc = gs[0].values
        for k in range(50):
            if k:
                acc = np.minimum(acc, gs[k].values)
            assert np.array_equal(out[k].values, acc)
            if k:
                assert np.all(out[k].values <= out[k - 1].values)


class TestFunctionSequence:
    def test_bound_enforced(self):
        with pytest.raises(dc.ValidationError):
            dc.FunctionSequence((f3(0, 2, 0),), bound=1.0)

    def test_shared_grid_enforced(self):
        other = dc.sampled(grid_of(0.0, 0.3, 1.0), [0, 0, 0])
        with pytest.raises(dc.GridMismatchError):
            dc.FunctionSequence((f3(0, 0, 0), other), bound=1.0)

    def test_one_based_indexing(self):
        seq = dc.FunctionSequence((f3(1, 0, 0), f3(0, 1, 0)), bound=1.0)
        assert np.array_equal(seq.term(1).values, [1, 0, 0])
        with pytest.raises(dc.ValidationError):
            seq.term(0)
        with pytest.raises(dc.ValidationError):
            seq.term(3)

    def test_json_round_trip(self):
        seq = dc.FunctionSequence((f3(1, 0, 0), f3(0, 0.5, 0)), bound=1.0)
        back = dc.FunctionSequence.from_json(seq.to_json())
        assert back.bound == seq.bound
        assert len(back) == 2
        assert np.array_equal(back.term(2).values, seq.term(2).values)


class TestTailSupEnvelope:
    def test_join_of_two_terms(self):
        g2 = grid_of(0.0, 1.0)
        seq = dc.FunctionSequence(
            (dc.sampled(g2, [1, 0]), dc.sampled(g2, [0, 1])), bound=1.0
        )
        env = dc.tail_sup_envelope(seq, 1, 2)
        assert np.array_equal(env.values, [1, 1])

    def test_single_term_envelope(self):
        g2 = grid_of(0.0, 1.0)
        seq = dc.FunctionSequence(
            (dc.sampled(g2, [1, 0]), dc.sampled(g2, [0, 1])), bound=1.0
        )
        assert np.array_equal(dc.tail_sup_envelope(seq, 2, 2).values, [0, 1])

    def test_out_of_range_rejected(self):
        g2 = grid_of(0.0, 1.0)
        seq = dc.FunctionSequence((dc.sampled(g2, [1, 0]),), bound=1.0)
        with pytest.raises(dc.ValidationError):
            dc.tail_sup_envelope(seq, 1, 2)
        with pytest.raises(dc.ValidationError):
            dc.tail_sup_envelope(seq, 0, 1)

    def test_power_gap_matches_brute_force_max(self):
        grid = dc.Grid.uniform(1025)
        x = grid.points
        terms = tuple(
            dc.sampled(grid, x**k - x ** (2 * k)) for k in range(1, 201)
        )
        seq = dc.FunctionSequence(terms, bound=0.25)
        env = dc.tail_sup_envelope(seq, 3, 200)
        brute = np.max(
            np.stack([x**k - x ** (2 * k) for k in range(3, 201)]), axis=0
        )
        assert np.array_equal(env.values, brute)
        # dominates every included term
        for k in range(3, 201):
            assert np.all(env.values >= seq.term(k).values)

    def test_envelopes_nonincreasing_in_start(self):
        rng = np.random.default_rng(3)
        grid = dc.Grid.uniform(32)
        seq = dc.FunctionSequence(
            tuple(dc.sampled(grid, rng.uniform(0, 1, 32)) for _ in range(12)),
            bound=1.0,
        )
        envs = dc.tail_sup_envelopes(seq, 12)
        for a, b in zip(envs, envs[1:]):
            assert np.all(a.values >= b.values)
        for n in range(1, 13):
            assert np.array_equal(
                envs[n - 1].values, dc.tail_sup_envelope(seq, n, 12).values
            )


class TestCombine:
    def test_linear_combination(self):
        f = dc.combine([f3(1, 0, 2), f3(0, 2, 0)], [0.25, 0.75])
        assert np.allclose(f.values, [0.25, 1.5, 0.5])

    def test_weight_shape_checked(self):
        with pytest.raises(dc.ValidationError):
            dc.combine([f3(1, 0, 2)], [0.5, 0.5])
