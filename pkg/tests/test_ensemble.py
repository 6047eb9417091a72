import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from compmine.core import Dataset, sentence_from_tokens
from compmine.ensemble import (
    BootstrapEnsemble,
    EnsembleWeights,
    bootstrap_predict,
    bootstrap_train,
    combine_weighted,
    make_folds,
)
from compmine.errors import ShapeMismatch, TooFewSamples, WeightCountMismatch


def toy_dataset(n):
    return Dataset(tuple(sentence_from_tokens(f"s{i}", ["w"]) for i in range(n)))


class TestCombineWeighted:
    def test_published_weight_triplet(self):
        y_a = np.array([1.0, 0.0, 0.0])
        y_b = np.array([0.0, 1.0, 0.0])
        y_c = np.array([0.0, 1.0, 0.0])
        out = combine_weighted([y_a, y_b, y_c], (0.2, 0.3, 0.5))
        np.testing.assert_allclose(out, [0.2, 0.8, 0.0])

    def test_convexity_identity(self):
        y = np.arange(12, dtype=float).reshape(4, 3)
        out = combine_weighted([y, y, y], (0.2, 0.3, 0.5))
        np.testing.assert_allclose(out, y)

    def test_single_member_passthrough(self):
        y = np.array([[3.0, -1.0]])
        out = combine_weighted([y, np.zeros_like(y), np.zeros_like(y)], (1.0, 0.0, 0.0))
        np.testing.assert_array_equal(out, y)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatch):
            combine_weighted([np.zeros(3), np.zeros(4)], (0.5, 0.5))

    def test_weight_count_mismatch(self):
        with pytest.raises(WeightCountMismatch):
            combine_weighted([np.zeros(3)], (0.5, 0.5))

    def test_no_normalization(self):
        out = combine_weighted([np.ones(2), np.ones(2)], (2.0, 3.0))
        np.testing.assert_array_equal(out, [5.0, 5.0])

    @given(st.integers(0, 2 ** 31 - 1))
    @settings(max_examples=25)
    def test_linearity_and_argmax_scaling(self, seed):
        rng = np.random.default_rng(seed)
        tensors = [rng.normal(size=(3, 9)) for _ in range(3)]
        w = tuple(rng.uniform(0.01, 2.0, size=3))
        base = combine_weighted(tensors, w)
        doubled = combine_weighted([2 * t for t in tensors], w)
        np.testing.assert_allclose(doubled, 2 * base, atol=1e-12)
        c = float(rng.uniform(0.1, 10))
        scaled = combine_weighted(tensors, tuple(c * x for x in w))
        assert (scaled.argmax(axis=1) == base.argmax(axis=1)).all()

    def test_weight_validation(self):
        with pytest.raises(ValueError):
            EnsembleWeights((-0.1, 0.5))
        with pytest.raises(ValueError):
            EnsembleWeights((0.0, 0.0))


class TestMakeFolds:
    def test_nine_into_three(self):
        plan = make_folds(toy_dataset(9), k=3, seed=1)
        assert sorted(plan.sizes()) == [3, 3, 3]
        assert set(plan.assignment) == {f"s{i}" for i in range(9)}

    def test_remainder_rule(self):
        plan = make_folds(toy_dataset(10), k=3, seed=1)
        assert sorted(plan.sizes()) == [3, 3, 4]

    def test_deterministic(self):
        a = make_folds(toy_dataset(20), k=3, seed=5)
        b = make_folds(toy_dataset(20), k=3, seed=5)
        assert a == b
        c = make_folds(toy_dataset(20), k=3, seed=6)
        assert a != c

    def test_too_few(self):
        with pytest.raises(TooFewSamples):
            make_folds(toy_dataset(2), k=3)
        with pytest.raises(ValueError):
            make_folds(toy_dataset(5), k=1)

    @given(st.integers(3, 200), st.integers(2, 5), st.integers(0, 1000))
    @settings(max_examples=50)
    def test_partition_property(self, n, k, seed):
        if n < k:
            return
        plan = make_folds(toy_dataset(n), k=k, seed=seed)
        sizes = plan.sizes()
        assert sum(sizes) == n
        assert max(sizes) - min(sizes) <= 1
        assert set(plan.assignment.values()) <= set(range(k))


class _StubModel:
    def __init__(self, ids):
        self.train_ids = frozenset(ids)

    def logits(self, x):
        return np.asarray(x, dtype=float)


def _stub_train(task, dataset, config, seed_offset):
    return _StubModel([s.id for s in dataset])


class TestBootstrap:
    def test_each_sample_trains_twice_validates_once(self):
        ds = toy_dataset(11)
        plan = make_folds(ds, k=3, seed=2)
        ens = bootstrap_train("sentence", ds, plan, None, _stub_train)
        assert len(ens.members) == 3
        for s in ds:
            train_count = sum(s.id in m.train_ids for m in ens.members)
            assert train_count == 2
        # validation = the one member whose training set misses the sample
        for s in ds:
            holders = [i for i, m in enumerate(ens.members) if s.id not in m.train_ids]
            assert holders == [plan.assignment[s.id]]

    def test_member_training_sizes(self):
        ds = toy_dataset(9)
        plan = make_folds(ds, k=3, seed=0)
        ens = bootstrap_train("sentence", ds, plan, None, _stub_train)
        assert [len(m.train_ids) for m in ens.members] == [6, 6, 6]

    def test_k2_on_four(self):
        ds = toy_dataset(4)
        plan = make_folds(ds, k=2, seed=0)
        ens = bootstrap_train("sentence", ds, plan, None, _stub_train)
        assert [len(m.train_ids) for m in ens.members] == [2, 2]

    def test_errors_carry_member_index(self):
        def boom(task, dataset, config, seed_offset):
            raise RuntimeError("nope")

        ds = toy_dataset(6)
        plan = make_folds(ds, k=3, seed=0)
        with pytest.raises(RuntimeError, match="member 0"):
            bootstrap_train("sentence", ds, plan, None, boom)

    def test_predict_is_member_mean(self):
        class Fixed:
            def __init__(self, out):
                self.out = np.asarray(out, dtype=float)

            def logits(self, x):
                return self.out

        members = (Fixed([2.0, 0.0]), Fixed([0.0, 2.0]), Fixed([1.0, 1.0]))
        ens = BootstrapEnsemble("sentence", members, (0.0,) * 3, None)
        np.testing.assert_array_equal(bootstrap_predict(ens, None), [1.0, 1.0])

    def test_single_member_passthrough(self):
        ens = [_StubModel([])]
        out = bootstrap_predict(ens, [4.0, 5.0])
        np.testing.assert_allclose(out, [4.0, 5.0])

    def test_equals_combine_weighted_exactly(self):
        rng = np.random.default_rng(3)
        outs = [rng.normal(size=7) for _ in range(3)]

        class Fixed:
            def __init__(self, o):
                self.o = o

            def logits(self, x):
                return self.o

        members = [Fixed(o) for o in outs]
        got = bootstrap_predict(members, None)
        expected = combine_weighted(outs, EnsembleWeights.uniform(3))
        np.testing.assert_array_equal(got, expected)
