"""
Test config module functionality.
"""

from dataclasses import replace
from pathlib import Path
from unittest import TestCase

from lexxfer import constants as const
from lexxfer.config import RunConfig, check_ablation_arms
from lexxfer.constants import Experiment, SimilarityMetric, Source
from lexxfer.corpus import SplitSpec
from lexxfer.errors import ConfigError

from tests import synthetic, utils


def minimal(experiment: str = "sequential", **overrides) -> dict:
    content = {
        "experiment": experiment,
        "datasets": {
            "sarc": {"path": "sarc.csv", **utils.SARC_ADAPTER},
            "implicit_hate": {"path": "implicit_hate.tsv", **utils.IMPLICIT_HATE_ADAPTER},
            "ethos": {"path": "ethos.csv", **utils.ETHOS_ADAPTER},
        },
    }
    content.update(overrides)
    return content


class TestRunConfig(TestCase):
    def test_defaults(self):
        config = RunConfig.from_dict(minimal())
        self.assertIs(Experiment.SEQUENTIAL, config.experiment)
        self.assertEqual(0, config.seed)
        self.assertEqual(
            list(const.SEQUENTIAL_STAGES), [s.name for s in config.stages]
        )
        self.assertEqual(0.4, config.stage("ethos").split.train_fraction)
        self.assertEqual(0.8, config.stage("sarcasm").split.train_fraction)
        self.assertEqual(2**18, config.features.hash_dims)
        self.assertEqual(0.33, config.preprocessing.ethos_threshold)
        self.assertEqual(0.5, config.evaluation.threshold)

    def test_default_comparisons(self):
        config = RunConfig.from_dict(minimal("similarity"))
        pairs = {c.pair: c.sample_size for c in config.similarity.comparisons}
        self.assertEqual({("sarc", "implicit_hate"): 5000, ("sarc", "ethos"): 500}, pairs)
        for comparison in config.similarity.comparisons:
            self.assertEqual(1000, comparison.iterations)
            self.assertEqual(1000, comparison.top_k)
            self.assertEqual(
                (SimilarityMetric.JACCARD, SimilarityMetric.JSD), comparison.metrics
            )

    def test_baseline_comparison_added(self):
        """Listed comparisons still get SARC vs. Sarcasm V2 when both are configured."""
        content = minimal(
            "similarity",
            similarity={
                "comparisons": [
                    {"pair": ["sarc", "ethos"], "sample_size": 50, "metrics": "JSD",
                     "iterations": 20}
                ]
            },
        )  # fmt: skip
        content["datasets"]["sarcasm_v2"] = {"path": "v2.csv", **utils.SARCASM_V2_ADAPTER}
        config = RunConfig.from_dict(content)
        self.assertEqual(
            [("sarc", "ethos"), ("sarc", "sarcasm_v2")],
            [c.pair for c in config.similarity.comparisons],
        )
        baseline = config.similarity.comparisons[1]
        self.assertEqual((SimilarityMetric.JSD,), baseline.metrics)
        self.assertEqual(20, baseline.iterations)
        self.assertEqual(1000, baseline.sample_size)
        rebuilt = RunConfig.from_dict(config.to_dict())
        self.assertEqual(config.similarity, rebuilt.similarity)

    def test_baseline_comparison_needs_both_corpora(self):
        content = minimal(
            "similarity",
            similarity={"comparisons": [{"pair": ["sarc", "ethos"], "sample_size": 50}]},
        )
        config = RunConfig.from_dict(content)
        self.assertEqual([("sarc", "ethos")], [c.pair for c in config.similarity.comparisons])
        self.assertEqual(
            ["Datasets not used by the Similarity experiment: implicit_hate"],
            config.validate(check_paths=False),
        )

    def test_wrongly_typed_values(self):
        cases = (
            (minimal(seed="abc"), "'seed'"),
            (minimal(stages={"sarcasm": {"train": {"epochs": "five"}}}), "section 'stages'"),
            (minimal(preprocessing={"min_ups": None}), "section 'preprocessing'"),
            (minimal(features={"hash_dims": "wide"}), "section 'features'"),
            (minimal(output_dir=7), "'output_dir'"),
        )
        for content, where in cases:
            with self.subTest(where=where):
                with self.assertRaises(ConfigError) as err:
                    RunConfig.from_dict(content)
                self.assertIn(f"Invalid value in {where}", str(err.exception))
        content = minimal()
        content["datasets"]["ethos"]["path"] = 5
        with self.assertRaises(ConfigError) as err:
            RunConfig.from_dict(content)
        self.assertIn("dataset 'ethos'", str(err.exception))

    def test_snapshot_round_trip(self):
        """Should rebuild an equal config from the snapshot embedded in reports."""
        content = minimal(
            seed=99,
            stages=[{"name": "implicit_hate", "train": {"epochs": 3, "l1_lambda": 0.01}}],
            single_step={"caps": {"ethos": 100}},
            evaluation={"confidence_iterations": 20},
        )
        config = RunConfig.from_dict(content)
        snapshot = config.to_dict()
        rebuilt = RunConfig.from_dict(snapshot)
        self.assertEqual(config, rebuilt)
        self.assertEqual(snapshot, rebuilt.to_dict())
        self.assertEqual({Source.ETHOS: 100}, rebuilt.single_step.caps)

    def test_seed_override_propagates(self):
        config = RunConfig.from_dict(minimal(seed=3), seed=12)
        self.assertEqual(12, config.seed)
        self.assertEqual(12, config.stage("ethos").split.seed)
        self.assertEqual(12, config.stage("sarcasm").train.seed)

    def test_explicit_stage_seed_kept(self):
        content = minimal(stages={"ethos": {"split": {"seed": 5}}})
        config = RunConfig.from_dict(content, seed=12)
        self.assertEqual(5, config.stage("ethos").split.seed)

    def test_missing_experiment(self):
        with self.assertRaises(ConfigError):
            RunConfig.from_dict({"datasets": {}})

    def test_unknown_experiment(self):
        with self.assertRaises(ConfigError):
            RunConfig.from_dict(minimal("transfer-everything"))

    def test_unknown_dataset(self):
        content = minimal()
        content["datasets"]["reddit"] = {"path": "x.csv", "columns": {"text": "t"}}
        with self.assertRaises(ConfigError):
            RunConfig.from_dict(content)

    def test_duplicate_stage_names(self):
        content = minimal(stages=[{"name": "sarcasm"}, {"name": "sarcasm"}])
        with self.assertRaises(ConfigError) as err:
            RunConfig.from_dict(content)
        self.assertIn("duplicated: sarcasm", str(err.exception))

    def test_stage_order(self):
        content = minimal(stages=[{"name": "ethos"}, {"name": "sarcasm"}])
        with self.assertRaises(ConfigError):
            RunConfig.from_dict(content)

    def test_invalid_train_fraction(self):
        content = minimal(stages={"ethos": {"split": {"train_fraction": 1.5}}})
        with self.assertRaises(ConfigError):
            RunConfig.from_dict(content)

    def test_from_file_resolves_relative_paths(self):
        with utils.get_temp_dir() as temp_dir:
            path = utils.write_config(temp_dir, minimal())
            config = RunConfig.from_file(path)
            self.assertEqual(Path(temp_dir) / "sarc.csv", config.datasets["sarc"].path)
            self.assertEqual(Path(temp_dir) / "lexxfer-out", config.output_dir)
            override = RunConfig.from_file(path, output_dir="elsewhere")
            self.assertEqual(Path("elsewhere"), override.output_dir)

    def test_from_file_errors(self):
        with self.assertRaises(ConfigError):
            RunConfig.from_file("/nonexistent/lexxfer/run.json")
        with utils.get_temp_dir() as temp_dir:
            path = Path(temp_dir) / "broken.json"
            path.write_text("{not json", encoding="utf-8")
            with self.assertRaises(ConfigError):
                RunConfig.from_file(path)


class TestValidate(TestCase):
    def config(self, experiment: str, **overrides) -> RunConfig:
        return RunConfig.from_dict(minimal(experiment, **overrides))

    def test_valid_without_paths(self):
        self.assertEqual([], self.config("ablation").validate(check_paths=False))

    def test_missing_paths(self):
        with self.assertRaises(ConfigError) as err:
            self.config("sequential").validate()
        self.assertIn("path does not exist", str(err.exception))

    def test_synthetic_paths_exist(self):
        with utils.get_temp_dir() as temp_dir:
            path = utils.write_config(temp_dir, synthetic.config(temp_dir, "Ablation"))
            self.assertEqual(
                ["Datasets not used by the Ablation experiment: sarcasm_v2"],
                RunConfig.from_file(path).validate(),
            )

    def test_feature_mismatch(self):
        config = self.config(
            "sequential", stages={"implicit_hate": {"features": {"hash_dims": 2**12}}}
        )
        with self.assertRaises(ConfigError) as err:
            config.validate(check_paths=False)
        self.assertIn("implicit_hate", str(err.exception))

    def test_similarity_needs_two_datasets(self):
        content = minimal("similarity")
        content["datasets"] = {"sarc": content["datasets"]["sarc"]}
        with self.assertRaises(ConfigError):
            RunConfig.from_dict(content).validate(check_paths=False)

    def test_venn_iteration_in_range(self):
        config = self.config("similarity", similarity={"venn_iteration": 1000})
        with self.assertRaises(ConfigError):
            config.validate(check_paths=False)

    def test_sequential_needs_a_stage(self):
        stages = {name: {"enabled": False} for name in const.SEQUENTIAL_STAGES}
        with self.assertRaises(ConfigError):
            self.config("sequential", stages=stages).validate(check_paths=False)

    def test_required_dataset_missing(self):
        content = minimal("single_step")
        del content["datasets"]["ethos"]
        with self.assertRaises(ConfigError) as err:
            RunConfig.from_dict(content).validate(check_paths=False)
        self.assertIn("'ethos'", str(err.exception))

    def test_vote_filter_needs_columns(self):
        content = minimal()
        content["datasets"]["sarc"] = {
            "path": "sarc.csv",
            "columns": {"text": "comment", "label": "label"},
        }
        with self.assertRaises(ConfigError):
            RunConfig.from_dict(content).validate(check_paths=False)
        content["preprocessing"] = {"filter_votes": False}
        RunConfig.from_dict(content).validate(check_paths=False)

    def test_ablation_arms_must_match(self):
        config = self.config("ablation")
        with_arm = config.with_sarcasm_stage(True)
        without_arm = config.with_sarcasm_stage(False)
        check_ablation_arms(with_arm, without_arm)
        ethos = without_arm.stage("ethos")
        stages = tuple(
            replace(s, split=SplitSpec(train_fraction=0.4, seed=1)) if s is ethos else s
            for s in without_arm.stages
        )
        with self.assertRaises(ConfigError):
            check_ablation_arms(with_arm, replace(without_arm, stages=stages))
        self.assertFalse(without_arm.stage("sarcasm").enabled)
        self.assertTrue(with_arm.stage("sarcasm").enabled)
