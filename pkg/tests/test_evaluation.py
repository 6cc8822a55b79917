#!/usr/bin/env python3
"""
Node classification harness tests: splits, logistic regression, Micro-F1
and the repeated-trial evaluation
"""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sentgraph.errors import ParseError, PreconditionError
from sentgraph.evaluation import (EvalReport, EvalRow, LabeledSet, evaluate, fit_logreg, load_labels,
                                  logreg_objective, micro_f1, split, standardize)
from tests.conftest import write_lines


def _labeled(labels):
    labels = np.asarray(labels, dtype=np.int64)
    names = tuple(f"label{i}" for i in range(int(labels.max()) + 1))
    return LabeledSet(node_keys=tuple(f"n{i}" for i in range(len(labels))), labels=labels, label_names=names)


def _clustered_embeddings(n_per_class=20, classes=2, spread=0.3, seed=0):
    rng = np.random.default_rng(seed)
    centers = rng.normal(scale=5.0, size=(classes, 4))
    embeddings, labels = {}, []
    for c in range(classes):
        for j in range(n_per_class):
            key = f"n{c * n_per_class + j}"
            embeddings[key] = centers[c] + rng.normal(scale=spread, size=4)
            labels.append(c)
    return embeddings, _labeled(labels)


class TestLabels:
    """Test cases for LabeledSet and load_labels"""

    def test_load_labels(self, tmp_path):
        path = write_lines(tmp_path / 'l.tsv', ['a\tx', 'b\ty', '# note', 'c\tx'])
        labeled = load_labels(path)
        assert labeled.node_keys == ('a', 'b', 'c')
        assert list(labeled.labels) == [0, 1, 0]
        assert labeled.label_names == ('x', 'y')

    def test_node_labeled_twice(self, tmp_path):
        path = write_lines(tmp_path / 'l.tsv', ['a\tx', 'a\ty'])
        with pytest.raises(ParseError):
            load_labels(path)

    def test_single_label_rejected(self):
        with pytest.raises(PreconditionError):
            _labeled([0, 0, 0])


class TestSplit:
    """Test cases for split"""

    def test_sizes_and_coverage(self):
        labeled = _labeled([0, 1] * 5)
        train, test = split(np.random.default_rng(0), labeled, 0.5)
        assert len(train) == 5 and len(test) == 5
        assert set(train) | set(test) == set(range(10))
        assert not set(train) & set(test)
        assert set(labeled.labels[train]) == {0, 1}

    def test_rounding(self):
        labeled = _labeled([0, 1, 0, 1, 2, 2, 0])
        train, _ = split(np.random.default_rng(1), labeled, 0.5)
        assert len(train) == 4

    def test_empty_side_rejected(self):
        with pytest.raises(PreconditionError):
            split(np.random.default_rng(0), _labeled([0, 1, 0, 1]), 0.1)

    def test_impossible_label_coverage(self):
        labeled = _labeled([0, 1, 2, 3, 4, 5])
        with pytest.raises(PreconditionError):
            split(np.random.default_rng(0), labeled, 0.5)


class TestLogisticRegression:
    """Test cases for fit_logreg and its objective"""

    def test_separable_data_fits_perfectly(self):
        embeddings, labeled = _clustered_embeddings(classes=3)
        features = np.vstack([embeddings[key] for key in labeled.node_keys])
        model = fit_logreg(features, labeled.labels)
        assert micro_f1(model.predict(features), labeled.labels) == 1.0

    def test_objective_never_increases(self):
        embeddings, labeled = _clustered_embeddings(spread=3.0)
        features = np.vstack([embeddings[key] for key in labeled.node_keys])
        history = fit_logreg(features, labeled.labels, iters=100).history
        assert all(b <= a for a, b in zip(history, history[1:]))

    def test_heavy_regularization_predicts_majority(self):
        rng = np.random.default_rng(2)
        features = rng.normal(size=(30, 5))
        labels = np.array([0] * 20 + [1] * 10)
        model = fit_logreg(features, labels, lam=1e6)
        assert np.all(model.predict(rng.normal(size=(50, 5))) == 0)

    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(3)
        features = rng.normal(size=(12, 4))
        labels = rng.integers(0, 3, size=12)
        weights, bias = rng.normal(size=(3, 4)), rng.normal(size=3)
        _, grad_w, grad_b = logreg_objective(weights, bias, features, labels, 0.7)
        eps = 1e-6
        for index in np.ndindex(weights.shape):
            shifted = weights.copy()
            shifted[index] += eps
            plus = logreg_objective(shifted, bias, features, labels, 0.7)[0]
            shifted[index] -= 2 * eps
            minus = logreg_objective(shifted, bias, features, labels, 0.7)[0]
            assert (plus - minus) / (2 * eps) == pytest.approx(grad_w[index], abs=1e-7)
        for i in range(3):
            shifted = bias.copy()
            shifted[i] += eps
            plus = logreg_objective(weights, shifted, features, labels, 0.7)[0]
            shifted[i] -= 2 * eps
            minus = logreg_objective(weights, shifted, features, labels, 0.7)[0]
            assert (plus - minus) / (2 * eps) == pytest.approx(grad_b[i], abs=1e-7)

    def test_non_finite_features_rejected(self):
        with pytest.raises(PreconditionError):
            fit_logreg(np.array([[np.nan], [1.0]]), np.array([0, 1]))


class TestMicroF1:
    """Test cases for micro_f1"""

    def test_example(self):
        assert micro_f1([0, 0, 1, 2], [0, 1, 1, 1]) == 0.5

    def test_against_per_label_counts(self):
        """1000 random cases checked against explicit TP/FP/FN counting"""
        print("\n🧮 Micro-F1 against a brute-force count")
        rng = np.random.default_rng(0)
        for _ in range(1000):
            n = int(rng.integers(1, 30))
            k = int(rng.integers(2, 6))
            predictions = rng.integers(0, k, size=n)
            gold = rng.integers(0, k, size=n)
            tp = fp = fn = 0
            for label in range(k):
                tp += int(np.sum((predictions == label) & (gold == label)))
                fp += int(np.sum((predictions == label) & (gold != label)))
                fn += int(np.sum((predictions != label) & (gold == label)))
            assert micro_f1(predictions, gold) == pytest.approx(2 * tp / (2 * tp + fp + fn))
        print("✅ 1000 cases agree")

    @settings(max_examples=200, deadline=None)
    @given(st.lists(st.tuples(st.integers(0, 4), st.integers(0, 4)), min_size=1, max_size=50))
    def test_equals_accuracy(self, pairs):
        predictions = [p for p, _ in pairs]
        gold = [g for _, g in pairs]
        accuracy = sum(p == g for p, g in pairs) / len(pairs)
        assert micro_f1(predictions, gold) == pytest.approx(accuracy)

    def test_length_mismatch(self):
        with pytest.raises(PreconditionError):
            micro_f1([0, 1], [0])


class TestStandardize:
    """Test cases for standardize"""

    def test_train_statistics(self):
        rng = np.random.default_rng(0)
        train, test = standardize(rng.normal(3.0, 2.0, size=(50, 3)), rng.normal(size=(10, 3)))
        assert np.allclose(train.mean(axis=0), 0.0)
        assert np.allclose(train.std(axis=0), 1.0)
        assert test.shape == (10, 3)

    def test_constant_column(self):
        train, test = standardize(np.ones((4, 2)), np.ones((2, 2)))
        assert np.isfinite(train).all() and np.isfinite(test).all()


class TestEvaluate:
    """Test cases for the repeated-trial evaluation"""

    def test_separable_embeddings_score_one(self):
        embeddings, labeled = _clustered_embeddings()
        report = evaluate(embeddings, labeled, ratios=[0.5], trials=5)
        row = report.row_for(0.5)
        assert row.mean_micro_f1 == 1.0
        assert row.std == 0.0
        assert row.trials == 5 and len(row.scores) == 5

    def test_deterministic_and_worker_independent(self):
        embeddings, labeled = _clustered_embeddings(spread=4.0)
        first = evaluate(embeddings, labeled, ratios=[0.3, 0.7], trials=6, seed=5)
        second = evaluate(embeddings, labeled, ratios=[0.3, 0.7], trials=6, seed=5, workers=3)
        assert first.to_csv() == second.to_csv()
        assert [row.scores for row in first.rows] == [row.scores for row in second.rows]

    def test_label_permutation_invariance(self):
        embeddings, labeled = _clustered_embeddings(classes=3, spread=4.0)
        permutation = np.array([2, 0, 1])
        permuted = LabeledSet(node_keys=labeled.node_keys, labels=permutation[labeled.labels],
                              label_names=labeled.label_names)
        original = evaluate(embeddings, labeled, ratios=[0.5], trials=8).rows[0]
        relabeled = evaluate(embeddings, permuted, ratios=[0.5], trials=8).rows[0]
        assert relabeled.mean_micro_f1 == pytest.approx(original.mean_micro_f1, abs=0.01)

    def test_scale_invariance(self):
        embeddings, labeled = _clustered_embeddings(spread=4.0)
        scaled = {key: 4.0 * vector for key, vector in embeddings.items()}
        original = evaluate(embeddings, labeled, ratios=[0.5], trials=8).rows[0]
        rescaled = evaluate(scaled, labeled, ratios=[0.5], trials=8).rows[0]
        assert rescaled.mean_micro_f1 == pytest.approx(original.mean_micro_f1, abs=0.01)

    def test_missing_node_named(self):
        embeddings, labeled = _clustered_embeddings()
        del embeddings['n3']
        with pytest.raises(PreconditionError, match="'n3'"):
            evaluate(embeddings, labeled, ratios=[0.5], trials=1)

    def test_csv_format(self):
        report = EvalReport(rows=[EvalRow(ratio=0.1, mean_micro_f1=0.5, std=0.25, trials=40)])
        assert report.to_csv() == 'ratio,mean_micro_f1,std,trials\n0.1,0.500000,0.250000,40\n'
