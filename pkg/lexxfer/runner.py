"""
Experiments: corpus similarity, the single-step strategy, the sequential transfer
strategy, and the with / without sarcasm pre-training ablation.

Each experiment returns an ExperimentReport and writes it under the output
directory:

  reports/  <experiment>_seed<seed>.json plus CSV tables
  models/   <experiment>_seed<seed>_[<arm>_]<stage>.json
  ingest/   <dataset>_seed<seed>.json, and .jsonl corpus caches
"""

import logging
import time
from collections import Counter
from collections.abc import Iterator, Mapping, Sequence
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path

from lexxfer import constants as const
from lexxfer.config import Comparison, DatasetConfig, Preprocessing, RunConfig, StageConfig
from lexxfer.constants import CanonicalClass, EvalSubset, Experiment, SimilarityMetric
from lexxfer.corpus import (
    HATE_TASK,
    SARCASM_TASK,
    BinaryTask,
    Corpus,
    project_labels,
    read_jsonl,
    split,
    write_jsonl,
)
from lexxfer.errors import ConfigError, IngestError, LexXferValueError
from lexxfer.ingest import (
    combine,
    filter_sarcasm_votes,
    load_ethos,
    load_implicit_hate,
    load_sarc,
    load_sarcasm_v2,
)
from lexxfer.metrics import (
    DeltaReport,
    EvalReport,
    comparison_row,
    compare,
    eval_reports_to_csv,
    evaluate,
    format_comparison_table,
)
from lexxfer.model import LinearModel, predict_scores, save_model, train, transfer
from lexxfer.ngrams import NgramTable, corpus_ngram_table, top_k
from lexxfer.relatedness import (
    OverlapCount,
    SimilarityReport,
    bootstrap_similarity,
    iteration_top_k_sets,
    overlap_counts,
    overlap_csv,
    reports_to_csv,
)
from lexxfer.utils import get_pyobj_from_json, to_json, write_json, write_text

logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())

FILE_STEMS = {
    Experiment.SIMILARITY: "similarity",
    Experiment.SINGLE_STEP: "single_step",
    Experiment.SEQUENTIAL: "sequential",
    Experiment.ABLATION: "ablation",
}
ARM_PRETRAINING = "pretraining"
ARM_NO_PRETRAINING = "no_pretraining"
IMPLICIT_ONLY_CLASSES = frozenset({CanonicalClass.NEUTRAL, CanonicalClass.IMPLICIT_HATE})


def _file_stem(config: RunConfig) -> str:
    return f"{FILE_STEMS[config.experiment]}_seed{config.seed}"


def _eval_name(stage: str, subset: EvalSubset | None = None) -> str:
    return stage if subset is None else f"{stage}/{subset.value}"


@dataclass
class ExperimentReport:
    """
    Everything one experiment produced.

    `models` and `inits` hold the trained models and the initialisation each stage
    started from; they are written to separate files, not into the report JSON.
    """

    experiment: Experiment
    seed: int
    config: dict
    ingest: dict[str, dict] = field(default_factory=dict)
    evaluations: dict[str, EvalReport] = field(default_factory=dict)
    deltas: list[DeltaReport] = field(default_factory=list)
    similarity: list[SimilarityReport] = field(default_factory=list)
    overlaps: dict[str, OverlapCount] = field(default_factory=dict)
    lineage: dict[str, list[str]] = field(default_factory=dict)
    test_ids: dict[str, list[str]] = field(default_factory=dict)
    train_sizes: dict[str, int] = field(default_factory=dict)
    arms: dict[str, dict] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)
    timings: dict[str, float] = field(default_factory=dict)
    models: dict[str, LinearModel] = field(default_factory=dict, repr=False)
    inits: dict[str, LinearModel] = field(default_factory=dict, repr=False)

    def to_dict(self, include_timings: bool = True) -> dict:
        content = {
            "experiment": self.experiment.value,
            "seed": self.seed,
            "model": const.MODEL_IDENTITY,
            "schema_version": const.SCHEMA_VERSION,
            "config": self.config,
            "ingest": self.ingest,
            "evaluations": {k: v.to_dict() for k, v in self.evaluations.items()},
            "deltas": [d.to_dict() for d in self.deltas],
            "similarity": [r.to_dict() for r in self.similarity],
            "overlaps": {k: v.to_dict() for k, v in self.overlaps.items()},
            "lineage": self.lineage,
            "test_ids": self.test_ids,
            "train_sizes": self.train_sizes,
            "arms": self.arms,
            "warnings": self.warnings,
        }
        if include_timings:
            content["timings"] = self.timings
        return content

    def to_json(self, include_timings: bool = True) -> str:
        return to_json(self.to_dict(include_timings=include_timings))


@contextmanager
def _stage(name: str, timings: dict[str, float]) -> Iterator[None]:
    """Time a stage and name it in any failure."""
    logger.info("Stage '%s' started.", name)
    start = time.perf_counter()
    try:
        yield
    except LexXferValueError as err:
        raise LexXferValueError(f"Stage '{name}' failed: {err}") from err
    timings[name] = time.perf_counter() - start
    logger.info("Stage '%s' finished in %.2fs.", name, timings[name])


def load_dataset(
    key: str, dataset: DatasetConfig, preprocessing: Preprocessing
) -> tuple[Corpus, dict]:
    """
    Load one configured dataset and apply its preprocessing.

    :return: The corpus and its ingest report, with the post-filter document count.
    """
    if key == const.DATASET_SARC:
        raw = load_sarc(dataset.path, dataset.adapter)
        corpus = raw
        if preprocessing.filter_votes:
            corpus = filter_sarcasm_votes(raw, preprocessing.min_ups, preprocessing.max_downs)
    elif key == const.DATASET_IMPLICIT_HATE:
        raw = corpus = load_implicit_hate(dataset.path, dataset.adapter)
    elif key == const.DATASET_ETHOS:
        raw = corpus = load_ethos(dataset.path, dataset.adapter, preprocessing.ethos_threshold)
    elif key == const.DATASET_SARCASM_V2:
        raw = corpus = load_sarcasm_v2(dataset.path, dataset.adapter)
    else:
        raise LexXferValueError(f"No loader for dataset '{key}'.")
    report = raw.ingest_report.to_dict()
    report["documents"] = len(corpus)
    report["filtered_out"] = len(raw) - len(corpus)
    report["classes"] = {c.value: n for c, n in corpus.class_histogram().items()}
    return corpus, report


def _cache_key(dataset: DatasetConfig, preprocessing: Preprocessing) -> dict:
    """What a cached corpus was loaded from; a cache is reused only while this matches."""
    settings = preprocessing.to_dict()
    del settings["write_cache"], settings["read_cache"]
    return {"path": str(dataset.path), "preprocessing": settings}


def _read_cached(key: str, config: RunConfig) -> tuple[Corpus, dict] | None:
    ingest_dir = config.output_dir / const.DIR_INGEST
    cache_path = ingest_dir / f"{key}_seed{config.seed}.jsonl"
    report_path = ingest_dir / f"{key}_seed{config.seed}.json"
    if not (cache_path.is_file() and report_path.is_file()):
        return None
    try:
        ingest = get_pyobj_from_json(report_path)
        if not isinstance(ingest, dict) or ingest.get("cache_key") != _cache_key(
            config.datasets[key], config.preprocessing
        ):
            logger.info("Corpus cache for %s is stale, reloading the dataset.", key)
            return None
        corpus = read_jsonl(cache_path)
    except (ConfigError, IngestError) as err:
        logger.warning("Ignoring the corpus cache for %s: %s", key, err)
        return None
    logger.info("Read %s from the corpus cache %s", key, cache_path)
    return corpus, ingest


def load_datasets(
    config: RunConfig,
    keys: Sequence[str],
    report: ExperimentReport | None = None,
) -> dict[str, Corpus]:
    """
    Load datasets, one thread per file; write their ingest reports (and optional caches).

    With `preprocessing.read_cache`, a corpus cached by an earlier run with the same
    seed, dataset path and preprocessing is read instead of the dataset file.
    """

    def run(key: str) -> tuple[Corpus, dict]:
        if config.preprocessing.read_cache:
            cached = _read_cached(key, config)
            if cached is not None:
                return cached
        corpus, ingest = load_dataset(key, config.datasets[key], config.preprocessing)
        ingest["cache_key"] = _cache_key(config.datasets[key], config.preprocessing)
        return corpus, ingest

    with ThreadPoolExecutor(max_workers=max(1, len(keys))) as executor:
        results = list(executor.map(run, keys))
    ingest_dir = config.output_dir / const.DIR_INGEST
    corpora = {}
    for key, (corpus, ingest) in zip(keys, results, strict=True):
        corpora[key] = corpus
        path = write_json(ingest_dir / f"{key}_seed{config.seed}.json", ingest)
        logger.info("Ingest report for %s: %s", key, path)
        if config.preprocessing.write_cache:
            write_jsonl(corpus, ingest_dir / f"{key}_seed{config.seed}.jsonl")
        if report is not None:
            report.ingest[key] = ingest
            if len(corpus) == 0:
                report.warnings.append(f"Dataset '{key}' has no documents after preprocessing.")
    return corpora


def _new_report(config: RunConfig) -> ExperimentReport:
    warnings = config.validate()
    for w in warnings:
        logger.warning(w)
    return ExperimentReport(
        experiment=config.experiment,
        seed=config.seed,
        config=config.to_dict(),
        warnings=list(warnings),
    )


def _ngram_export(table: NgramTable, k: int) -> NgramTable:
    return NgramTable(counts={g: table.counts[g] for g in top_k(table, k)})


def comparison_keys(comparisons: Sequence[Comparison]) -> list[str]:
    """Output key per comparison: the pair, suffixed with its position if the pair repeats."""
    pairs = Counter(c.pair for c in comparisons)
    return [
        f"{c.pair[0]}_{c.pair[1]}" if pairs[c.pair] == 1 else f"{c.pair[0]}_{c.pair[1]}_{i}"
        for i, c in enumerate(comparisons)
    ]


def run_similarity(config: RunConfig, threads: int = 1) -> ExperimentReport:
    """
    Bootstrap every configured comparison with each of its metrics.

    For Jaccard comparisons, the top-k sets of `similarity.venn_iteration` are
    exported as an overlap CSV and summarised as overlap counts.
    """
    report = _new_report(config)
    stem = _file_stem(config)
    reports_dir = config.output_dir / const.DIR_REPORTS
    with _stage("ingest", report.timings):
        corpora = load_datasets(config, config.required_datasets(), report)
    max_k = max(c.top_k for c in config.similarity.comparisons)
    for key, corpus in corpora.items():
        table = _ngram_export(corpus_ngram_table(corpus.documents), max_k)
        write_text(reports_dir / f"{stem}_ngrams_{key}.csv", table.to_csv())
    comparisons = config.similarity.comparisons
    for comparison, pair_key in zip(comparisons, comparison_keys(comparisons), strict=True):
        key_a, key_b = comparison.pair
        a, b = corpora[key_a], corpora[key_b]
        for spec in comparison.bootstrap_specs():
            name = f"{pair_key}_{spec.metric.value.lower()}"
            with _stage(name, report.timings):
                report.similarity.append(
                    bootstrap_similarity(
                        a,
                        b,
                        spec,
                        threads=threads,
                        keep_per_iteration=config.similarity.keep_per_iteration,
                    )
                )
            if spec.metric is SimilarityMetric.JACCARD:
                set_a, set_b = iteration_top_k_sets(a, b, spec, config.similarity.venn_iteration)
                report.overlaps[pair_key] = overlap_counts(set_a, set_b)
                write_text(
                    reports_dir / f"{stem}_overlap_{pair_key}.csv",
                    overlap_csv(set_a, set_b),
                )
    write_text(reports_dir / f"{stem}.csv", reports_to_csv(report.similarity))
    _write_report(report, config)
    return report


def _evaluate(
    model: LinearModel,
    corpus: Corpus,
    task: BinaryTask,
    subset: EvalSubset,
    config: RunConfig,
    warnings: list[str],
) -> EvalReport:
    view = project_labels(corpus, task)
    evaluation = config.evaluation
    return evaluate(
        scores=predict_scores(model, view.documents),
        labels=view.labels,
        task=task.name.value,
        dataset=corpus.name,
        subset=subset.value,
        threshold=evaluation.threshold,
        warnings=warnings,
        confidence_iterations=evaluation.confidence_iterations,
        confidence_level=evaluation.confidence_level,
        seed=config.seed,
    )


def implicit_only(corpus: Corpus) -> Corpus:
    """Keep the Neutral and ImplicitHate documents; explicit hate is removed."""
    return corpus.derive(d for d in corpus.documents if d.canonical_class in IMPLICIT_ONLY_CLASSES)


def run_single_step(config: RunConfig, threads: int = 1) -> ExperimentReport:
    """
    Train once on the sarcasm labels of the combined corpus, then evaluate the same
    model on the same test documents under the sarcasm and then the hate labels.
    """
    report = _new_report(config)
    stem = _file_stem(config)
    single = config.single_step
    with _stage("ingest", report.timings):
        corpora = load_datasets(config, config.required_datasets(), report)
    with _stage(const.SINGLE_STEP_STAGE, report.timings):
        combined = combine(
            [corpora[k] for k in config.required_datasets()],
            seed=config.seed,
            caps=single.caps,
        )
        train_corpus, test_corpus = split(combined, single.split)
        model = train(
            list(project_labels(train_corpus, SARCASM_TASK)),
            single.train,
            config.features,
            stage=const.SINGLE_STEP_STAGE,
        )
        for name, task in (("sarcasm", SARCASM_TASK), ("hate", HATE_TASK)):
            report.evaluations[name] = _evaluate(
                model, test_corpus, task, EvalSubset.ALL, config, report.warnings
            )
            report.test_ids[name] = [d.id for d in project_labels(test_corpus, task).documents]
            report.train_sizes[name] = len(train_corpus)
    report.models[const.SINGLE_STEP_STAGE] = model
    report.lineage[const.SINGLE_STEP_STAGE] = list(model.lineage)
    model_path = config.output_dir / const.DIR_MODELS / f"{stem}_{const.SINGLE_STEP_STAGE}.json"
    save_model(model, model_path)
    _write_report(report, config)
    return report


@dataclass
class ArmResult:
    """The outcome of one pass over the sequential stages."""

    evaluations: dict[str, EvalReport] = field(default_factory=dict)
    lineage: dict[str, list[str]] = field(default_factory=dict)
    train_sizes: dict[str, int] = field(default_factory=dict)
    test_ids: dict[str, list[str]] = field(default_factory=dict)
    models: dict[str, LinearModel] = field(default_factory=dict)
    inits: dict[str, LinearModel] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "evaluations": {k: v.to_dict() for k, v in self.evaluations.items()},
            "lineage": self.lineage,
            "train_sizes": self.train_sizes,
        }


def _stage_task(stage: StageConfig) -> BinaryTask:
    return SARCASM_TASK if stage.name == const.STAGE_SARCASM else HATE_TASK


def run_stages(
    config: RunConfig,
    corpora: Mapping[str, Corpus],
    report: ExperimentReport,
    implicit_only_eval: bool,
    model_prefix: str,
) -> ArmResult:
    """
    Train the enabled stages in order, each starting from a transfer of the previous
    stage's model, or from zero weights for the first enabled stage.
    """
    result = ArmResult()
    previous: LinearModel | None = None
    for stage in config.stages:
        if not stage.enabled:
            logger.info("Stage '%s' is disabled, skipping.", stage.name)
            continue
        task = _stage_task(stage)
        timing_name = "/".join(p for p in (model_prefix, stage.name) if p)
        with _stage(timing_name, report.timings):
            train_corpus, test_corpus = split(corpora[stage.dataset], stage.split)
            if previous is None:
                init = LinearModel.zeros(config.features)
            else:
                init = transfer(previous, stage.name)
            result.inits[stage.name] = init
            model = train(
                list(project_labels(train_corpus, task)),
                stage.train,
                config.features,
                init=init,
                stage=stage.name,
            )
            subset = EvalSubset.ALL if task is SARCASM_TASK else EvalSubset.ALL_HATE
            result.evaluations[_eval_name(stage.name)] = _evaluate(
                model, test_corpus, task, subset, config, report.warnings
            )
            result.test_ids[stage.name] = list(test_corpus.ids)
            if implicit_only_eval and stage.name == const.STAGE_IMPLICIT_HATE:
                subset_corpus = implicit_only(test_corpus)
                if len(subset_corpus) == 0:
                    report.warnings.append(
                        f"No implicit-only test documents for stage '{stage.name}'."
                    )
                else:
                    result.evaluations[_eval_name(stage.name, EvalSubset.IMPLICIT_ONLY)] = (
                        _evaluate(
                            model,
                            subset_corpus,
                            task,
                            EvalSubset.IMPLICIT_ONLY,
                            config,
                            report.warnings,
                        )
                    )
        result.models[stage.name] = model
        result.lineage[stage.name] = list(model.lineage)
        result.train_sizes[stage.name] = len(train_corpus)
        name = "_".join(p for p in (_file_stem(config), model_prefix, stage.name) if p)
        save_model(model, config.output_dir / const.DIR_MODELS / f"{name}.json")
        previous = model
    return result


def run_sequential(config: RunConfig, threads: int = 1) -> ExperimentReport:
    """
    Sarcasm (SARC), then hate (Implicit Hate Corpus), then hate (ETHOS), carrying
    the weights from each stage to the next. Disabling the sarcasm stage gives the
    no pre-training baseline.
    """
    report = _new_report(config)
    with _stage("ingest", report.timings):
        corpora = load_datasets(config, config.required_datasets(), report)
    result = run_stages(
        config,
        corpora,
        report,
        implicit_only_eval=config.evaluation.implicit_only,
        model_prefix="",
    )
    report.evaluations = result.evaluations
    report.lineage = result.lineage
    report.train_sizes = result.train_sizes
    report.test_ids = result.test_ids
    report.models = result.models
    report.inits = result.inits
    _write_report(report, config)
    return report


def ablation_deltas(pretrained: ArmResult, baseline: ArmResult) -> list[DeltaReport]:
    """
    The comparison grid: Implicit Hate Corpus (all hate, then implicit only) and ETHOS
    without -> with pre-training, and, with pre-training, implicit only -> all hate.
    """
    all_hate = _eval_name(const.STAGE_IMPLICIT_HATE)
    implicit = _eval_name(const.STAGE_IMPLICIT_HATE, EvalSubset.IMPLICIT_ONLY)
    ethos = _eval_name(const.STAGE_ETHOS)
    for arm in (pretrained, baseline):
        missing = [n for n in (all_hate, implicit, ethos) if n not in arm.evaluations]
        if missing:
            raise LexXferValueError(f"Ablation arm lacks evaluations: {', '.join(missing)}")
    return [
        compare(
            baseline.evaluations[all_hate],
            pretrained.evaluations[all_hate],
            name="implicit_hate_all_hate",
        ),
        compare(baseline.evaluations[ethos], pretrained.evaluations[ethos], name="ethos"),
        compare(
            baseline.evaluations[implicit],
            pretrained.evaluations[implicit],
            name="implicit_hate_implicit_only",
        ),
        compare(
            pretrained.evaluations[implicit],
            pretrained.evaluations[all_hate],
            name="pretraining_implicit_only_vs_all_hate",
        ),
    ]


def run_ablation(config: RunConfig, threads: int = 1) -> ExperimentReport:
    """
    Run the sequential stages with and without the sarcasm stage, holding every
    downstream split and train config fixed, and report the deltas.
    """
    report = _new_report(config)
    with_arm = config.with_sarcasm_stage(True)
    without_arm = config.with_sarcasm_stage(False)
    with _stage("ingest", report.timings):
        corpora = load_datasets(config, config.required_datasets(), report)
    arms = {}
    for arm_name, arm_config in ((ARM_PRETRAINING, with_arm), (ARM_NO_PRETRAINING, without_arm)):
        result = run_stages(
            arm_config, corpora, report, implicit_only_eval=True, model_prefix=arm_name
        )
        arms[arm_name] = result
        report.arms[arm_name] = {"config": arm_config.to_dict(), **result.to_dict()}
        for stage, model in result.models.items():
            report.models[f"{arm_name}/{stage}"] = model
            report.inits[f"{arm_name}/{stage}"] = result.inits[stage]
        for stage, ids in result.test_ids.items():
            report.test_ids[f"{arm_name}/{stage}"] = ids
        for name, evaluation in result.evaluations.items():
            report.evaluations[f"{arm_name}/{name}"] = evaluation
        for stage, lineage in result.lineage.items():
            report.lineage[f"{arm_name}/{stage}"] = lineage
        for stage, size in result.train_sizes.items():
            report.train_sizes[f"{arm_name}/{stage}"] = size
    report.deltas = ablation_deltas(arms[ARM_PRETRAINING], arms[ARM_NO_PRETRAINING])
    _write_report(report, config)
    return report


def _train_size(report: ExperimentReport, name: str) -> int:
    return report.train_sizes.get(name.removesuffix(f"/{EvalSubset.IMPLICIT_ONLY.value}"), 0)


def _write_report(report: ExperimentReport, config: RunConfig) -> Path:
    reports_dir = config.output_dir / const.DIR_REPORTS
    stem = _file_stem(config)
    if report.evaluations:
        write_text(reports_dir / f"{stem}.csv", eval_reports_to_csv(report.evaluations))
        rows = (
            comparison_row(evaluation, _train_size(report, name))
            for name, evaluation in report.evaluations.items()
        )
        write_text(reports_dir / f"{stem}_comparison.csv", format_comparison_table(rows))
    for delta in report.deltas:
        write_text(reports_dir / f"{stem}_delta_{delta.name}.csv", delta.to_csv())
    path = write_json(reports_dir / f"{stem}.json", report.to_dict())
    logger.info("Report written to %s", path)
    return path


RUNNERS = {
    Experiment.SIMILARITY: run_similarity,
    Experiment.SINGLE_STEP: run_single_step,
    Experiment.SEQUENTIAL: run_sequential,
    Experiment.ABLATION: run_ablation,
}


def run_experiment(config: RunConfig, threads: int = 1) -> ExperimentReport:
    return RUNNERS[config.experiment](config, threads=threads)
