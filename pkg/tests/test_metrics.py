"""
Test metrics module functionality.
"""

import json
from unittest import TestCase

import numpy as np
from lexxfer.errors import LexXferValueError
from lexxfer.metrics import (
    ConfusionMatrix,
    EvalReport,
    auc,
    bootstrap_intervals,
    compare,
    comparison_row,
    confusion,
    evaluate,
    format_comparison_table,
    mcc,
    prf,
)
from lexxfer.utils import to_json
from sklearn.metrics import (
    matthews_corrcoef,
    precision_recall_fscore_support,
    roc_auc_score,
)


def report(task: str = "HateTask", threshold: float = 0.5, **metrics) -> EvalReport:
    values = {"precision": 0.5, "recall": 0.5, "f1": 0.5, "mcc": 0.0, "auc": 0.5}
    values.update(metrics)
    return EvalReport(task=task, dataset="ETHOS", subset="all", threshold=threshold, n=10,
                      **values)  # fmt: skip


def random_instances(count: int, seed: int):
    """Random scored test sets with both classes present and frequent ties."""
    rng = np.random.default_rng(seed)
    made = 0
    while made < count:
        n = int(rng.integers(2, 51))
        labels = rng.integers(0, 2, size=n)
        if labels.min() == labels.max():
            continue
        scores = rng.integers(0, 10, size=n) / 10.0
        made += 1
        yield scores, labels


def brute_force_auc(scores, labels) -> float:
    pos = [s for s, y in zip(scores, labels, strict=True) if y == 1]
    neg = [s for s, y in zip(scores, labels, strict=True) if y == 0]
    wins = sum(1.0 if p > q else 0.5 if p == q else 0.0 for p in pos for q in neg)
    return wins / (len(pos) * len(neg))


class TestConfusion(TestCase):
    def test_examples(self):
        self.assertEqual(ConfusionMatrix(tp=1, tn=1), confusion([0.9, 0.2], [1, 0], 0.5))
        self.assertEqual(ConfusionMatrix(tp=1), confusion([0.5], [1], 0.5))
        self.assertEqual(
            ConfusionMatrix(tp=1, fp=1, fn=1, tn=0), confusion([0.6, 0.6, 0.4], [1, 0, 1], 0.5)
        )

    def test_invalid_inputs(self):
        with self.assertRaises(LexXferValueError):
            confusion([0.1, 0.2], [1])
        with self.assertRaises(LexXferValueError):
            confusion([], [])
        with self.assertRaises(LexXferValueError):
            confusion([0.1], [2])


class TestPrfMcc(TestCase):
    def test_prf(self):
        precision, recall, f1 = prf(ConfusionMatrix(tp=2, fp=1, fn=1, tn=2))
        self.assertAlmostEqual(2 / 3, precision)
        self.assertAlmostEqual(2 / 3, recall)
        self.assertAlmostEqual(2 / 3, f1)
        self.assertEqual((1.0, 1.0, 1.0), prf(ConfusionMatrix(tp=3, tn=4)))
        self.assertEqual((None, 0.0, None), prf(ConfusionMatrix(fn=2, tn=1)))
        self.assertEqual((None, None, None), prf(ConfusionMatrix(tn=5)))

    def test_mcc(self):
        self.assertAlmostEqual(3 / 9, mcc(ConfusionMatrix(tp=2, fp=1, fn=1, tn=2)))
        self.assertEqual(1.0, mcc(ConfusionMatrix(tp=3, tn=2)))
        self.assertEqual(-1.0, mcc(ConfusionMatrix(fp=2, fn=2)))
        self.assertEqual(0.0, mcc(ConfusionMatrix(tp=3, fp=2)))

    def test_mcc_class_swap(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            tp, fp, fn, tn = (int(v) for v in rng.integers(0, 20, size=4))
            cm = ConfusionMatrix(tp=tp, fp=fp, fn=fn, tn=tn)
            swapped = ConfusionMatrix(tp=tn, fp=fn, fn=fp, tn=tp)
            self.assertAlmostEqual(mcc(cm), mcc(swapped), places=12)

    def test_sklearn_oracle(self):
        for scores, labels in random_instances(100, seed=2):
            predicted = (scores >= 0.5).astype(int)
            cm = confusion(scores, labels, 0.5)
            precision, recall, f1 = prf(cm)
            p, r, f, _ = precision_recall_fscore_support(
                labels, predicted, average="binary", zero_division=0
            )
            self.assertAlmostEqual(p, precision or 0.0, places=12)
            self.assertAlmostEqual(r, recall or 0.0, places=12)
            self.assertAlmostEqual(f, f1 or 0.0, places=12)
            self.assertAlmostEqual(matthews_corrcoef(labels, predicted), mcc(cm), places=12)


class TestAuc(TestCase):
    def test_examples(self):
        self.assertEqual(1.0, auc([0.9, 0.8, 0.4, 0.3], [1, 1, 0, 0]))
        self.assertEqual(0.5, auc([0.7, 0.7, 0.7], [1, 0, 1]))
        self.assertEqual(0.75, auc([0.8, 0.4, 0.6, 0.2], [1, 1, 0, 0]))

    def test_single_class_raises(self):
        with self.assertRaises(LexXferValueError):
            auc([0.1, 0.9], [1, 1])

    def test_oracles(self):
        for scores, labels in random_instances(200, seed=3):
            value = auc(scores, labels)
            self.assertAlmostEqual(brute_force_auc(scores, labels), value, delta=1e-12)
            self.assertAlmostEqual(roc_auc_score(labels, scores), value, delta=1e-12)

    def test_monotone_transform(self):
        for scores, labels in random_instances(50, seed=4):
            transformed = np.exp(3.0 * scores) - 7.0
            self.assertAlmostEqual(auc(scores, labels), auc(transformed, labels), delta=1e-12)

    def test_threshold_sweep_area(self):
        """The ROC built from confusion matrices at each distinct score has area auc."""
        for scores, labels in random_instances(100, seed=5):
            points = [(0.0, 0.0)]
            for t in sorted(set(scores.tolist()), reverse=True):
                cm = confusion(scores, labels, t)
                _, recall, _ = prf(cm)
                points.append((cm.fp / (cm.fp + cm.tn), recall))
            area = sum(
                (x1 - x0) * (y0 + y1) / 2.0
                for (x0, y0), (x1, y1) in zip(points, points[1:], strict=False)
            )
            self.assertEqual((1.0, 1.0), points[-1])
            self.assertAlmostEqual(auc(scores, labels), area, delta=1e-9)


class TestEvaluate(TestCase):
    def test_report(self):
        result = evaluate([0.9, 0.6, 0.4, 0.1], [1, 0, 1, 0], task="HateTask", dataset="ETHOS")
        self.assertEqual(4, result.n)
        self.assertEqual(ConfusionMatrix(tp=1, fp=1, fn=1, tn=1), result.confusion)
        self.assertEqual(0.5, result.f1)
        self.assertEqual(0.75, result.auc)
        self.assertEqual("hashed-ngram-logistic-sgd", result.model)

    def test_single_class_subset(self):
        warnings = []
        result = evaluate(
            [0.2, 0.7], [0, 0], task="HateTask", dataset="ImplicitHateCorpus",
            subset="implicit_only", warnings=warnings,
        )  # fmt: skip
        self.assertIsNone(result.auc)
        self.assertIsNone(result.recall)
        self.assertEqual(1, len(warnings))
        self.assertIn("implicit_only", warnings[0])

    def test_undefined_serialises_as_null(self):
        result = evaluate([0.1, 0.2], [1, 0], task="HateTask", dataset="ETHOS")
        content = json.loads(to_json(result.to_dict()))
        self.assertIsNone(content["precision"])
        self.assertIsNone(content["f1"])
        self.assertEqual(0.0, content["recall"])

    def test_confidence_intervals(self):
        rng = np.random.default_rng(6)
        labels = rng.integers(0, 2, size=60)
        scores = np.clip(labels * 0.4 + rng.uniform(0, 0.6, size=60), 0, 1)
        first = evaluate(scores, labels, "HateTask", "ETHOS", confidence_iterations=50, seed=3)
        second = evaluate(scores, labels, "HateTask", "ETHOS", confidence_iterations=50, seed=3)
        self.assertEqual(first.intervals, second.intervals)
        for name in ("precision", "recall", "f1", "mcc", "auc"):
            lo, hi = first.intervals[name]
            self.assertLessEqual(lo, hi)
        self.assertIn("intervals", first.to_dict())
        self.assertNotIn("intervals", evaluate(scores, labels, "HateTask", "ETHOS").to_dict())

    def test_intervals_never_defined(self):
        intervals = bootstrap_intervals([0.1, 0.2, 0.3], [0, 0, 0], iterations=5)
        self.assertIsNone(intervals["auc"])
        self.assertIsNone(intervals["precision"])
        self.assertEqual((0.0, 0.0), intervals["mcc"])


class TestCompare(TestCase):
    def test_percentage_points(self):
        delta = compare(report(recall=0.769, f1=0.756), report(recall=0.866, f1=0.816))
        self.assertAlmostEqual(9.7, delta.change["recall"], places=9)
        self.assertAlmostEqual(6.0, delta.change["f1"], places=9)

    def test_identical(self):
        r = report(precision=0.7, recall=0.6, f1=0.65, mcc=0.3, auc=0.8)
        self.assertEqual({m: 0.0 for m in delta_metrics()}, compare(r, r).change)

    def test_undefined_side(self):
        delta = compare(report(precision=None), report(precision=0.9))
        self.assertIsNone(delta.change["precision"])
        self.assertIn("precision,,0.9,\n", delta.to_csv())

    def test_mismatch_raises(self):
        with self.assertRaises(LexXferValueError):
            compare(report(task="HateTask"), report(task="SarcasmTask"))
        with self.assertRaises(LexXferValueError):
            compare(report(threshold=0.5), report(threshold=0.6))

    def test_csv_layout(self):
        lines = compare(report(), report(auc=0.75)).to_csv().splitlines()
        self.assertEqual("metric,baseline,treatment,change", lines[0])
        self.assertEqual(["precision", "recall", "f1", "mcc", "auc"],
                         [line.split(",")[0] for line in lines[1:]])  # fmt: skip
        self.assertEqual("auc,0.5,0.75,25.0", lines[-1])

    def test_comparison_table(self):
        row = comparison_row(report(f1=0.75), train_size=399)
        text = format_comparison_table([row])
        self.assertEqual(
            "model,task,train_size,dataset,f1_percent\n"
            "hashed-ngram-logistic-sgd,HateTask,399,ETHOS,75.0\n",
            text,
        )


def delta_metrics():
    return ("precision", "recall", "f1", "mcc", "auc")
