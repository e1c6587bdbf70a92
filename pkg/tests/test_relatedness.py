"""
Test relatedness module functionality: Jaccard, JSD and the bootstrap protocol.
"""

import math
import random
from unittest import TestCase

import numpy as np
from lexxfer.constants import CanonicalClass, JsdVariant, SimilarityMetric, Source
from lexxfer.corpus import Corpus, Document
from lexxfer.errors import LexXferValueError
from lexxfer.ngrams import UnigramDistribution
from lexxfer.relatedness import (
    BootstrapSpec,
    bootstrap_similarity,
    iteration_top_k_sets,
    jaccard,
    jsd,
    overlap_counts,
    overlap_csv,
    reports_to_csv,
    summarize,
)


def make_corpus(source: Source, vocab: list[str], n: int, seed: int) -> Corpus:
    rng = random.Random(seed)
    return Corpus(
        documents=tuple(
            Document(
                id=f"{source.value}:{i}",
                text=" ".join(rng.choices(vocab, k=rng.randint(3, 12))),
                canonical_class=CanonicalClass.NEUTRAL,
                raw_label="0",
            )
            for i in range(n)
        ),
        source=source,
    )


def dist(probs: dict[str, float]) -> UnigramDistribution:
    return UnigramDistribution(probs=probs)


def random_dist(rng: random.Random, support: list[str]) -> UnigramDistribution:
    tokens = rng.sample(support, rng.randint(1, len(support)))
    raw = [rng.random() + 1e-3 for _ in tokens]
    total = sum(raw)
    return dist({t: r / total for t, r in zip(tokens, raw, strict=True)})


def direct_jsd(p: UnigramDistribution, q: UnigramDistribution) -> float:
    support = set(p.probs) | set(q.probs)

    def h(values):
        return -sum(v * math.log2(v) for v in values if v > 0)

    m = [(p.probs.get(t, 0.0) + q.probs.get(t, 0.0)) / 2 for t in support]
    return h(m) - h(p.probs.values()) / 2 - h(q.probs.values()) / 2


class TestJaccard(TestCase):
    def test_examples(self):
        self.assertEqual(0.5, jaccard({"a", "b", "c"}, {"b", "c", "d"}))
        self.assertEqual(1.0, jaccard({"a", "b"}, {"b", "a"}))
        self.assertEqual(0.0, jaccard({"a"}, {"b"}))
        self.assertEqual(1.0, jaccard(set(), set()))

    def test_brute_force_oracle(self):
        rng = random.Random(7)
        universe = list(range(30))
        for _ in range(200):
            a = set(rng.sample(universe, rng.randint(0, 20)))
            b = set(rng.sample(universe, rng.randint(0, 20)))
            inter = sum(1 for x in universe if x in a and x in b)
            union = sum(1 for x in universe if x in a or x in b)
            expected = 1.0 if union == 0 else inter / union
            self.assertEqual(expected, jaccard(a, b))
            self.assertEqual(jaccard(a, b), jaccard(b, a))
            self.assertTrue(0.0 <= jaccard(a, b) <= 1.0)


class TestJsd(TestCase):
    def test_examples(self):
        p = dist({"x": 1.0})
        q = dist({"x": 0.5, "y": 0.5})
        self.assertAlmostEqual(0.31128, jsd(p, q), delta=1e-4)
        self.assertEqual(0.0, jsd(q, q))
        self.assertAlmostEqual(1.0, jsd(dist({"a": 1.0}), dist({"b": 1.0})), places=12)

    def test_distance_variant(self):
        value = jsd(dist({"a": 1.0}), dist({"b": 1.0}), JsdVariant.DISTANCE_BASE_E)
        self.assertAlmostEqual(math.sqrt(math.log(2)), value, places=12)

    def test_unnormalised_raises(self):
        with self.assertRaises(LexXferValueError):
            jsd(dist({"a": 0.5}), dist({"a": 1.0}))

    def test_oracle_symmetry_bounds(self):
        rng = random.Random(11)
        support = [f"t{i}" for i in range(10)]
        for _ in range(200):
            p, q = random_dist(rng, support), random_dist(rng, support)
            value = jsd(p, q)
            self.assertAlmostEqual(direct_jsd(p, q), value, delta=1e-9)
            self.assertAlmostEqual(value, jsd(q, p), delta=1e-12)
            self.assertTrue(0.0 <= value <= 1.0)
            self.assertEqual(0.0, jsd(p, p))


class TestOverlap(TestCase):
    def test_counts(self):
        self.assertEqual((1, 1, 2), astuple(overlap_counts({"a", "b"}, {"b", "c", "d"})))
        self.assertEqual((3, 0, 0), astuple(overlap_counts({1, 2, 3}, {3, 2, 1})))

    def test_top_thousand_sets(self):
        a = set(range(1000))
        b = set(range(458, 1458))
        counts = overlap_counts(a, b)
        self.assertEqual((542, 458, 458), astuple(counts))
        self.assertEqual(len(a), counts.shared + counts.unique_a)
        self.assertEqual(len(b), counts.shared + counts.unique_b)

    def test_csv(self):
        text = overlap_csv({("a",), ("a", "b")}, {("a",), ("c",)})
        self.assertEqual(
            "section,ngram\nshared,a\nunique_a,a b\nunique_b,c\n", text
        )


def astuple(counts) -> tuple[int, int, int]:
    return counts.shared, counts.unique_a, counts.unique_b


class TestBootstrap(TestCase):
    @classmethod
    def setUpClass(cls):
        vocab_a = [f"w{i}" for i in range(60)]
        vocab_b = [f"w{i}" for i in range(30, 90)]
        cls.a = make_corpus(Source.SARC, vocab_a, 120, seed=1)
        cls.b = make_corpus(Source.IMPLICIT_HATE_CORPUS, vocab_b, 80, seed=2)

    def spec(self, metric=SimilarityMetric.JACCARD, **kwargs) -> BootstrapSpec:
        params = {"iterations": 8, "sample_size": 40, "seed": 123, "metric": metric,
                  "top_k": 25}  # fmt: skip
        params.update(kwargs)
        return BootstrapSpec(**params)

    def test_deterministic(self):
        for metric in SimilarityMetric:
            with self.subTest(metric=metric):
                first = bootstrap_similarity(self.a, self.b, self.spec(metric))
                second = bootstrap_similarity(self.a, self.b, self.spec(metric))
                self.assertEqual(first.per_iteration, second.per_iteration)

    def test_threads_match_sequential(self):
        sequential = bootstrap_similarity(self.a, self.b, self.spec(SimilarityMetric.JSD))
        threaded = bootstrap_similarity(
            self.a, self.b, self.spec(SimilarityMetric.JSD), threads=4
        )
        self.assertEqual(sequential, threaded)

    def test_summary_consistent(self):
        report = bootstrap_similarity(self.a, self.b, self.spec())
        self.assertEqual(
            (report.mean, report.std, report.min, report.max), summarize(report.per_iteration)
        )
        self.assertTrue(report.min <= report.mean <= report.max)
        self.assertGreaterEqual(report.std, 0.0)
        self.assertEqual(("SARC", "ImplicitHateCorpus"), report.pair)
        self.assertEqual(8, report.iterations)

    def test_self_comparison(self):
        spec_kwargs = {"sample_size": len(self.a)}
        jac = bootstrap_similarity(self.a, self.a, self.spec(**spec_kwargs))
        div = bootstrap_similarity(
            self.a, self.a, self.spec(SimilarityMetric.JSD, **spec_kwargs)
        )
        self.assertEqual((1.0,) * 8, jac.per_iteration)
        self.assertEqual((0.0,) * 8, div.per_iteration)

    def test_seed_changes_values(self):
        first = bootstrap_similarity(self.a, self.b, self.spec(seed=1))
        second = bootstrap_similarity(self.a, self.b, self.spec(seed=2))
        self.assertNotEqual(first.per_iteration, second.per_iteration)

    def test_sample_size_too_large(self):
        with self.assertRaises(LexXferValueError) as err:
            bootstrap_similarity(self.a, self.b, self.spec(sample_size=100))
        self.assertIn("ImplicitHateCorpus", str(err.exception))

    def test_with_replacement_allows_large_samples(self):
        report = bootstrap_similarity(self.a, self.b, self.spec(sample_size=500, replace=True))
        self.assertEqual(8, len(report.per_iteration))

    def test_empty_corpus(self):
        empty = Corpus(documents=(), source=Source.ETHOS)
        with self.assertRaises(LexXferValueError):
            bootstrap_similarity(self.a, empty, self.spec(replace=True))

    def punctuation_corpus(self, texts: tuple[str, ...]) -> Corpus:
        return Corpus(
            documents=tuple(
                Document(
                    id=f"e{i}", text=t, canonical_class=CanonicalClass.NEUTRAL, raw_label="0"
                )
                for i, t in enumerate(texts)
            ),
            source=Source.ETHOS,
        )

    def test_corpus_without_tokens(self):
        corpus = self.punctuation_corpus(("!!!", "...", "?"))
        with self.assertRaises(LexXferValueError) as err:
            bootstrap_similarity(self.a, corpus, self.spec(SimilarityMetric.JSD, sample_size=1))
        self.assertIn("ETHOS corpus has any tokens", str(err.exception))

    def test_jsd_sample_without_tokens(self):
        """Should name the corpus and iteration when a sample has nothing to compare."""
        corpus = self.punctuation_corpus(("!!!", "...", "hello world", "?"))
        spec = self.spec(SimilarityMetric.JSD, sample_size=1, iterations=50)
        with self.assertRaises(LexXferValueError) as err:
            bootstrap_similarity(self.a, corpus, spec)
        message = str(err.exception)
        self.assertIn("Bootstrap iteration", message)
        self.assertIn("of the ETHOS corpus without any tokens", message)

    def test_venn_sets_match_iteration(self):
        spec = self.spec()
        report = bootstrap_similarity(self.a, self.b, spec)
        for i in (0, 5):
            set_a, set_b = iteration_top_k_sets(self.a, self.b, spec, i)
            self.assertEqual(25, len(set_a))
            self.assertEqual(report.per_iteration[i], jaccard(set_a, set_b))
        with self.assertRaises(LexXferValueError):
            iteration_top_k_sets(self.a, self.b, spec, 8)

    def test_invalid_spec(self):
        with self.assertRaises(LexXferValueError):
            self.spec(iterations=0)
        with self.assertRaises(LexXferValueError):
            self.spec(sample_size=0)

    def test_summary_csv(self):
        report = bootstrap_similarity(self.a, self.b, self.spec(iterations=1))
        lines = reports_to_csv([report]).splitlines()
        self.assertEqual("pair,metric,mean,std,min,max", lines[0])
        self.assertTrue(lines[1].startswith("SARC vs. ImplicitHateCorpus,Jaccard,"))

    def test_population_std(self):
        mean, std, lo, hi = summarize([0.0, 1.0])
        self.assertEqual((0.5, 0.5, 0.0, 1.0), (mean, std, lo, hi))
        self.assertEqual(float(np.std([0.2, 0.4, 0.9])), summarize([0.2, 0.4, 0.9])[1])
