"""
The run configuration: one JSON document per experiment.

Every default is materialised by `RunConfig.to_dict`, and the result is embedded in
each report as the config snapshot; `RunConfig.from_dict(snapshot)` rebuilds the
same configuration.
"""

import logging
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass, field, replace
from os import PathLike
from pathlib import Path
from typing import Any, TypeVar

from lexxfer import aliases
from lexxfer import constants as const
from lexxfer.constants import Experiment, JsdVariant, SimilarityMetric, Source
from lexxfer.corpus import SplitSpec
from lexxfer.errors import ConfigError, LexXferValueError
from lexxfer.ingest import ColumnAdapter, check_ethos_threshold
from lexxfer.model import FeatureSpec, TrainConfig
from lexxfer.relatedness import BootstrapSpec
from lexxfer.utils import get_pyobj_from_json

logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())

DEFAULT_OUTPUT_DIR = "lexxfer-out"
DEFAULT_ITERATIONS = 1000
DEFAULT_TOP_K = 1000
# Per-side sample sizes of the default comparisons against SARC.
DEFAULT_SAMPLE_SIZES = {
    const.DATASET_IMPLICIT_HATE: 5000,
    const.DATASET_ETHOS: 500,
    const.DATASET_SARCASM_V2: 1000,
}
DEFAULT_TRAIN_FRACTIONS = {
    const.STAGE_SARCASM: 0.8,
    const.STAGE_IMPLICIT_HATE: 0.8,
    const.STAGE_ETHOS: 0.4,
}
STAGE_DATASETS = {
    const.STAGE_SARCASM: const.DATASET_SARC,
    const.STAGE_IMPLICIT_HATE: const.DATASET_IMPLICIT_HATE,
    const.STAGE_ETHOS: const.DATASET_ETHOS,
}
SINGLE_STEP_DATASETS = (const.DATASET_SARC, const.DATASET_IMPLICIT_HATE, const.DATASET_ETHOS)

T = TypeVar("T")


def _section(d: Mapping[str, Any], key: str) -> Mapping[str, Any]:
    value = d.get(key) or {}
    if not isinstance(value, Mapping):
        raise ConfigError(f"Config section '{key}' must be an object.")
    return value


def _checked(where: str, build: Callable[..., T], *args: Any) -> T:
    """Run a config parser; values of the wrong type or form become a ConfigError."""
    try:
        return build(*args)
    except ConfigError:
        raise
    except (TypeError, ValueError) as err:
        raise ConfigError(f"Invalid value in {where}: {err}") from err


def _resolve(path: str | PathLike[str], base_dir: Path | None) -> Path:
    path = Path(path)
    if base_dir is not None and not path.is_absolute():
        return base_dir / path
    return path


@dataclass(frozen=True)
class DatasetConfig:
    path: Path
    adapter: ColumnAdapter

    @classmethod
    def from_dict(cls, key: str, d: Mapping[str, Any], base_dir: Path | None) -> "DatasetConfig":
        if not isinstance(d, Mapping) or "path" not in d:
            raise ConfigError(f"Dataset '{key}' needs a 'path'.")
        return cls(path=_resolve(d["path"], base_dir), adapter=ColumnAdapter.from_dict(d))

    def to_dict(self) -> dict:
        return {"path": str(self.path), **self.adapter.to_dict()}


@dataclass(frozen=True)
class Preprocessing:
    ethos_threshold: float = const.DEFAULT_ETHOS_THRESHOLD
    filter_votes: bool = True
    min_ups: int = const.DEFAULT_MIN_UPS
    max_downs: int = const.DEFAULT_MAX_DOWNS
    write_cache: bool = False
    read_cache: bool = False

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "Preprocessing":
        return cls(
            ethos_threshold=check_ethos_threshold(
                d.get("ethos_threshold", const.DEFAULT_ETHOS_THRESHOLD)
            ),
            filter_votes=bool(d.get("filter_votes", True)),
            min_ups=int(d.get("min_ups", const.DEFAULT_MIN_UPS)),
            max_downs=int(d.get("max_downs", const.DEFAULT_MAX_DOWNS)),
            write_cache=bool(d.get("write_cache", False)),
            read_cache=bool(d.get("read_cache", False)),
        )

    def to_dict(self) -> dict:
        return {
            "ethos_threshold": self.ethos_threshold,
            "filter_votes": self.filter_votes,
            "min_ups": self.min_ups,
            "max_downs": self.max_downs,
            "write_cache": self.write_cache,
            "read_cache": self.read_cache,
        }


@dataclass(frozen=True)
class StageConfig:
    """
    One stage of the sequential strategy.

    :param features: Per-stage feature override; it must equal the global features,
      since weights are carried between stages.
    """

    name: str
    enabled: bool
    train: TrainConfig
    split: SplitSpec
    features: FeatureSpec | None = None

    @property
    def dataset(self) -> str:
        return STAGE_DATASETS[self.name]

    @classmethod
    def from_dict(cls, name: str, d: Mapping[str, Any], seed: int) -> "StageConfig":
        split = dict(_section(d, "split"))
        split.setdefault("train_fraction", DEFAULT_TRAIN_FRACTIONS.get(name, 0.8))
        features = d.get("features")
        try:
            return cls(
                name=name,
                enabled=bool(d.get("enabled", True)),
                train=TrainConfig.from_dict(_section(d, "train"), seed=seed),
                split=SplitSpec.from_dict(split, seed=seed),
                features=None if features is None else FeatureSpec.from_dict(features),
            )
        except LexXferValueError as err:
            raise ConfigError(f"Stage '{name}': {err}") from err

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "enabled": self.enabled,
            "train": self.train.to_dict(),
            "split": self.split.to_dict(),
            "features": None if self.features is None else self.features.to_dict(),
        }


@dataclass(frozen=True)
class SingleStepConfig:
    train: TrainConfig
    split: SplitSpec
    caps: Mapping[Source, int | None] = field(default_factory=dict)

    @classmethod
    def from_dict(cls, d: Mapping[str, Any], seed: int) -> "SingleStepConfig":
        caps = {}
        for key, value in _section(d, "caps").items():
            source = Source.parse(key, aliases.source)
            if value is None:
                continue
            if int(value) < 1:
                raise ConfigError(f"Single-step cap for {source.value} must be >= 1: {value}")
            caps[source] = int(value)
        try:
            return cls(
                train=TrainConfig.from_dict(_section(d, "train"), seed=seed),
                split=SplitSpec.from_dict(_section(d, "split"), seed=seed),
                caps=caps,
            )
        except LexXferValueError as err:
            raise ConfigError(f"Single-step: {err}") from err

    def to_dict(self) -> dict:
        caps = {
            s.value: self.caps.get(s)
            for s in (Source.SARC, Source.IMPLICIT_HATE_CORPUS, Source.ETHOS)
        }
        return {"train": self.train.to_dict(), "split": self.split.to_dict(), "caps": caps}


@dataclass(frozen=True)
class Comparison:
    """A dataset pair and the bootstrap parameters it is compared with."""

    pair: tuple[str, str]
    metrics: tuple[SimilarityMetric, ...]
    iterations: int
    sample_size: int
    seed: int
    top_k: int = DEFAULT_TOP_K
    replace: bool = False
    orders: tuple[int, ...] = (1, 2)
    jsd_variant: JsdVariant = JsdVariant.DIVERGENCE_BASE2

    @classmethod
    def from_dict(cls, d: Mapping[str, Any], seed: int) -> "Comparison":
        pair = d.get("pair")
        if not isinstance(pair, Sequence) or isinstance(pair, str) or len(pair) != 2:
            raise ConfigError(f"A similarity comparison needs a 'pair' of two datasets: {pair}")
        metrics = d.get("metrics") or SimilarityMetric.value_list()
        if isinstance(metrics, str):
            metrics = [metrics]
        if "sample_size" not in d:
            raise ConfigError(f"Similarity comparison {list(pair)} needs a 'sample_size'.")
        return cls(
            pair=(str(pair[0]), str(pair[1])),
            metrics=tuple(SimilarityMetric.parse(m, aliases.metric) for m in metrics),
            iterations=int(d.get("iterations", DEFAULT_ITERATIONS)),
            sample_size=int(d["sample_size"]),
            seed=int(d.get("seed", seed)),
            top_k=int(d.get("top_k", DEFAULT_TOP_K)),
            replace=bool(d.get("replace", False)),
            orders=tuple(sorted(int(o) for o in d.get("orders", (1, 2)))),
            jsd_variant=JsdVariant.parse(
                d.get("jsd_variant", JsdVariant.DIVERGENCE_BASE2), aliases.jsd_variant
            ),
        )

    def to_dict(self) -> dict:
        return {
            "pair": list(self.pair),
            "metrics": [m.value for m in self.metrics],
            "iterations": self.iterations,
            "sample_size": self.sample_size,
            "seed": self.seed,
            "top_k": self.top_k,
            "replace": self.replace,
            "orders": list(self.orders),
            "jsd_variant": self.jsd_variant.value,
        }

    def bootstrap_specs(self) -> list[BootstrapSpec]:
        try:
            return [
                BootstrapSpec(
                    iterations=self.iterations,
                    sample_size=self.sample_size,
                    seed=self.seed,
                    metric=metric,
                    top_k=self.top_k,
                    replace=self.replace,
                    orders=self.orders,
                    jsd_variant=self.jsd_variant,
                )
                for metric in self.metrics
            ]
        except LexXferValueError as err:
            raise ConfigError(f"Similarity comparison {list(self.pair)}: {err}") from err


def default_comparisons(datasets: Mapping[str, Any], seed: int) -> list[Comparison]:
    """SARC against each other configured corpus, both metrics, at the default sizes."""
    if const.DATASET_SARC not in datasets:
        return []
    return [
        Comparison(
            pair=(const.DATASET_SARC, other),
            metrics=(SimilarityMetric.JACCARD, SimilarityMetric.JSD),
            iterations=DEFAULT_ITERATIONS,
            sample_size=size,
            seed=seed,
        )
        for other, size in DEFAULT_SAMPLE_SIZES.items()
        if other in datasets
    ]


def baseline_comparison(
    comparisons: Sequence[Comparison], datasets: Mapping[str, Any], seed: int
) -> Comparison | None:
    """
    SARC against Sarcasm V2, when both are configured and no listed comparison has them.

    The bootstrap settings follow the first listed comparison, at the default
    Sarcasm V2 sample size.
    """
    pair = (const.DATASET_SARC, const.DATASET_SARCASM_V2)
    if not all(key in datasets for key in pair):
        return None
    if any(set(c.pair) == set(pair) for c in comparisons):
        return None
    if not comparisons:
        return default_comparisons({key: None for key in pair}, seed)[0]
    return replace(
        comparisons[0],
        pair=pair,
        sample_size=DEFAULT_SAMPLE_SIZES[const.DATASET_SARCASM_V2],
    )


@dataclass(frozen=True)
class SimilarityConfig:
    comparisons: tuple[Comparison, ...]
    venn_iteration: int = 0
    keep_per_iteration: bool = True

    @classmethod
    def from_dict(
        cls, d: Mapping[str, Any], seed: int, datasets: Mapping[str, Any]
    ) -> "SimilarityConfig":
        raw = d.get("comparisons")
        if raw is None:
            comparisons = default_comparisons(datasets, seed)
        else:
            comparisons = [Comparison.from_dict(c, seed) for c in raw]
            baseline = baseline_comparison(comparisons, datasets, seed)
            if baseline is not None:
                comparisons.append(baseline)
        return cls(
            comparisons=tuple(comparisons),
            venn_iteration=int(d.get("venn_iteration", 0)),
            keep_per_iteration=bool(d.get("keep_per_iteration", True)),
        )

    def to_dict(self) -> dict:
        return {
            "comparisons": [c.to_dict() for c in self.comparisons],
            "venn_iteration": self.venn_iteration,
            "keep_per_iteration": self.keep_per_iteration,
        }


@dataclass(frozen=True)
class EvaluationConfig:
    threshold: float = 0.5
    implicit_only: bool = True
    confidence_iterations: int = 0
    confidence_level: float = 0.95

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "EvaluationConfig":
        config = cls(
            threshold=float(d.get("threshold", 0.5)),
            implicit_only=bool(d.get("implicit_only", True)),
            confidence_iterations=int(d.get("confidence_iterations", 0)),
            confidence_level=float(d.get("confidence_level", 0.95)),
        )
        if config.confidence_iterations < 0:
            raise ConfigError("confidence_iterations must be >= 0.")
        if not 0.0 < config.confidence_level < 1.0:
            raise ConfigError(
                f"confidence_level must be in (0, 1), got {config.confidence_level}."
            )
        return config

    def to_dict(self) -> dict:
        return {
            "threshold": self.threshold,
            "implicit_only": self.implicit_only,
            "confidence_iterations": self.confidence_iterations,
            "confidence_level": self.confidence_level,
        }


def _parse_stages(raw: Any, seed: int) -> tuple[StageConfig, ...]:
    """
    Stages may be given as a list of objects with a 'name', or as an object keyed by
    stage name. Missing stages get their defaults.
    """
    if raw is None:
        raw = []
    if isinstance(raw, Mapping):
        raw = [{"name": k, **(v or {})} for k, v in raw.items()]
    if not isinstance(raw, list):
        raise ConfigError("Config section 'stages' must be a list or an object.")
    if not all(isinstance(s, Mapping) for s in raw):
        raise ConfigError("Each entry of config section 'stages' must be an object.")
    names =[str(s.get("name", "")) for s in raw]
    duplicates = sorted({n for n in names if names.count(n) > 1})
    if duplicates:
        raise ConfigError(f"Stage names must be unique, duplicated: {', '.join(duplicates)}")
    unknown = [n for n in names if n not in const.SEQUENTIAL_STAGES]
    if unknown:
        raise ConfigError(
            f"Unknown stage names: {', '.join(unknown)}. "
            f"Must be among: {', '.join(const.SEQUENTIAL_STAGES)}"
        )
    expected_order = [n for n in const.SEQUENTIAL_STAGES if n in names]
    if names != expected_order:
        raise ConfigError(
            f"Stages must be in the order {', '.join(const.SEQUENTIAL_STAGES)}, "
            f"got {', '.join(names)}."
        )
    given = dict(zip(names, raw, strict=True))
    return tuple(
        StageConfig.from_dict(name, given.get(name, {}), seed)
        for name in const.SEQUENTIAL_STAGES
    )


@dataclass(frozen=True)
class RunConfig:
    experiment: Experiment
    seed: int
    output_dir: Path
    datasets: Mapping[str, DatasetConfig]
    preprocessing: Preprocessing
    features: FeatureSpec
    stages: tuple[StageConfig, ...]
    single_step: SingleStepConfig
    similarity: SimilarityConfig
    evaluation: EvaluationConfig

    @classmethod
    def from_dict(
        cls,
        d: Mapping[str, Any],
        base_dir: Path | None = None,
        seed: int | None = None,
        output_dir: str | PathLike[str] | None = None,
    ) -> "RunConfig":
        """
        Build and check a config.

        :param base_dir: Relative dataset and output paths are resolved against it.
        :param seed: Overrides the document's seed; stage, split and bootstrap seeds
          that the document does not set follow it.
        :param output_dir: Overrides the document's output directory.
        """
        if not isinstance(d, Mapping):
            raise ConfigError("The run config must be a JSON object.")
        if "experiment" not in d:
            raise ConfigError(
                f"The run config needs an 'experiment': {', '.join(Experiment.value_list())}"
            )
        seed = _checked("'seed'", int, d.get("seed", 0) if seed is None else seed)
        if not 0 <= seed < 2**64:
            raise ConfigError(f"seed must be an unsigned 64-bit integer: {seed}")
        datasets = {}
        for key, value in _section(d, "datasets").items():
            if key not in const.DATASET_SOURCES:
                raise ConfigError(
                    f"Unknown dataset '{key}'. Must be among: "
                    f"{', '.join(const.DATASET_SOURCES)}"
                )
            datasets[key] = _checked(
                f"dataset '{key}'", DatasetConfig.from_dict, key, value, base_dir
            )
        if output_dir is None:
            output_dir = d.get("output_dir", DEFAULT_OUTPUT_DIR)
            output_dir = _checked("'output_dir'", _resolve, output_dir, base_dir)
        return cls(
            experiment=Experiment.parse(d["experiment"], aliases.experiment),
            seed=seed,
            output_dir=_checked("'output_dir'", Path, output_dir),
            datasets=datasets,
            preprocessing=_checked(
                "section 'preprocessing'", Preprocessing.from_dict, _section(d, "preprocessing")
            ),
            features=_checked(
                "section 'features'", FeatureSpec.from_dict, _section(d, "features")
            ),
            stages=_checked("section 'stages'", _parse_stages, d.get("stages"), seed),
            single_step=_checked(
                "section 'single_step'",
                SingleStepConfig.from_dict,
                _section(d, "single_step"),
                seed,
            ),
            similarity=_checked(
                "section 'similarity'",
                SimilarityConfig.from_dict,
                _section(d, "similarity"),
                seed,
                datasets,
            ),
            evaluation=_checked(
                "section 'evaluation'", EvaluationConfig.from_dict, _section(d, "evaluation")
            ),
        )

    @classmethod
    def from_file(
        cls,
        file_path: str | PathLike[str],
        seed: int | None = None,
        output_dir: str | PathLike[str] | None = None,
    ) -> "RunConfig":
        path = Path(file_path)
        if not path.is_file():
            raise ConfigError(f"Config file does not exist: {path}")
        content = get_pyobj_from_json(path)
        logger.debug("Read run config from %s", path)
        return cls.from_dict(content, base_dir=path.parent, seed=seed, output_dir=output_dir)

    def to_dict(self) -> dict:
        """The fully resolved config snapshot."""
        return {
            "experiment": self.experiment.value,
            "seed": self.seed,
            "output_dir": str(self.output_dir),
            "datasets": {k: v.to_dict() for k, v in sorted(self.datasets.items())},
            "preprocessing": self.preprocessing.to_dict(),
            "features": self.features.to_dict(),
            "stages": [s.to_dict() for s in self.stages],
            "single_step": self.single_step.to_dict(),
            "similarity": self.similarity.to_dict(),
            "evaluation": self.evaluation.to_dict(),
        }

    def stage(self, name: str) -> StageConfig:
        for stage in self.stages:
            if stage.name == name:
                return stage
        raise ConfigError(f"No stage named '{name}'.")

    def with_sarcasm_stage(self, enabled: bool) -> "RunConfig":
        """A copy with the sarcasm pre-training stage switched on or off."""
        stages = tuple(
            replace(s, enabled=enabled) if s.name == const.STAGE_SARCASM else s
            for s in self.stages
        )
        return replace(self, stages=stages)

    def required_datasets(self) -> list[str]:
        if self.experiment is Experiment.SIMILARITY:
            keys = {k for c in self.similarity.comparisons for k in c.pair}
            return sorted(keys)
        if self.experiment is Experiment.SINGLE_STEP:
            return list(SINGLE_STEP_DATASETS)
        if self.experiment is Experiment.ABLATION:
            return [STAGE_DATASETS[s] for s in const.SEQUENTIAL_STAGES]
        return [s.dataset for s in self.stages if s.enabled]

    def validate(self, check_paths: bool = True) -> list[str]:
        """
        Check the config without reading any dataset.

        :return: Non-fatal warnings.
        """
        warnings = []
        if self.experiment is Experiment.SIMILARITY:
            if len(self.datasets) < 2:
                raise ConfigError("A similarity run needs at least 2 datasets configured.")
            if not self.similarity.comparisons:
                raise ConfigError("A similarity run needs at least one comparison.")
            for comparison in self.similarity.comparisons:
                comparison.bootstrap_specs()
                if not 0 <= self.similarity.venn_iteration < comparison.iterations:
                    raise ConfigError(
                        f"venn_iteration {self.similarity.venn_iteration} is outside the "
                        f"{comparison.iterations} iterations of {list(comparison.pair)}."
                    )
        if self.experiment is Experiment.SEQUENTIAL:
            enabled = [s.name for s in self.stages if s.enabled]
            if not enabled:
                raise ConfigError("At least one sequential stage must be enabled.")
        for key in self.required_datasets():
            if key not in self.datasets:
                raise ConfigError(
                    f"The {self.experiment.value} experiment needs the '{key}' dataset."
                )
        if check_paths:
            for key, dataset in self.datasets.items():
                if not dataset.path.is_file():
                    raise ConfigError(f"Dataset '{key}' path does not exist: {dataset.path}")
        for stage in self.stages:
            if stage.features is not None and stage.features != self.features:
                raise ConfigError(
                    f"Stage '{stage.name}' features {stage.features.to_dict()} differ from "
                    f"the global features {self.features.to_dict()}; weights cannot be "
                    f"transferred between them."
                )
        sarc = self.datasets.get(const.DATASET_SARC)
        if sarc is not None and self.preprocessing.filter_votes:
            missing = [c for c in (const.COL_UPS, const.COL_DOWNS) if c not in sarc.adapter.columns]
            if missing:
                raise ConfigError(
                    f"The SARC vote filter needs the adapter columns: {', '.join(missing)}. "
                    f"Map them or set preprocessing.filter_votes to false."
                )
        if self.experiment is Experiment.ABLATION:
            check_ablation_arms(self.with_sarcasm_stage(True), self.with_sarcasm_stage(False))
        unused = sorted(set(self.datasets) - set(self.required_datasets()))
        if unused:
            warnings.append(
                f"Datasets not used by the {self.experiment.value} experiment: "
                f"{', '.join(unused)}"
            )
        return warnings


def check_ablation_arms(with_pretraining: RunConfig, without_pretraining: RunConfig) -> None:
    """Both arms must share every downstream stage split, train config, and the features."""
    if with_pretraining.features != without_pretraining.features:
        raise ConfigError("Ablation arms use different features.")
    if with_pretraining.seed != without_pretraining.seed:
        raise ConfigError("Ablation arms use different seeds.")
    for name in const.SEQUENTIAL_STAGES[1:]:
        a, b = with_pretraining.stage(name), without_pretraining.stage(name)
        if a.split != b.split:
            raise ConfigError(f"Ablation arms split the '{name}' stage differently.")
        if a.train != b.train:
            raise ConfigError(f"Ablation arms train the '{name}' stage differently.")
        if not (a.enabled and b.enabled):
            raise ConfigError(f"Ablation arms must both run the '{name}' stage.")
    if not with_pretraining.stage(const.STAGE_SARCASM).enabled:
        raise ConfigError("The pre-training ablation arm must run the sarcasm stage.")
