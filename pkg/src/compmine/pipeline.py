"""Three-stage orchestration: gate, extract, classify-and-emit.

Stage 1 decides whether a sentence is comparative, either with a binary
classifier or derived from the tagger (any extracted span means
comparative). Stage 2 combines member tagger logits with configured weights
and decodes element sets. Stage 3 classifies every candidate quadruple into
a comparison type or rejects it, and surviving candidates become quintuples.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path

from .backends import (
    EnsembleBackend,
    NativeBackend,
    TrainConfig,
    bootstrap_backend,
    classify_quadruple,
    classify_sentence,
    connect_external,
    load_model,
    native_score,
    native_train_fn,
    save_model,
    tag_tokens,
)
from .backends.external import (
    BackendDescriptor,
    ChildProcessTransport,
    TcpTransport,
)
from .core import (
    NONE_LABEL,
    STAGE_LABELS,
    Dataset,
    Quintuple,
    Sentence,
)
from .ensemble import (
    EnsembleWeights,
    bootstrap_train,
    combine_weighted,
    make_folds,
    read_manifest,
    write_manifest,
)
from .errors import BackendUnavailable, MissingDatasetVersion
from .evaluate import EvalReport, e_t5_macro, stage_metrics
from .ingest import export_dataset, import_dataset
from .protocol import CAPABILITY_FOR_TASK
from .spans import (
    DEFAULT_QUADRUPLE_CAP,
    ElementSets,
    decode_spans,
    element_sets_of,
    generate_quadruples,
)

__all__ = [
    "DEFAULT_STAGE2_WEIGHTS",
    "ElementSets",
    "ExperimentPreset",
    "PRESETS",
    "PipelineBackends",
    "PipelineConfig",
    "RunReport",
    "decode_spans",
    "element_sets_of",
    "generate_quadruples",
    "load_backends",
    "predict_sentence",
    "run_experiment",
    "run_pipeline",
]

STAGE1_MODES = ("binary", "tagger-derived")

# Hand-tuned member weights for the span extractor ensemble; configuration,
# not a constant of the method.
DEFAULT_STAGE2_WEIGHTS = (0.2, 0.3, 0.5)


@dataclass(frozen=True)
class PipelineConfig:
    """Declarative pipeline wiring; backend specs resolve to model files."""

    stage1_mode: str = "binary"
    stage1: dict | None = None
    stage2: tuple[dict, ...] = ()
    stage2_weights: tuple[float, ...] = DEFAULT_STAGE2_WEIGHTS
    stage3: dict | None = None
    max_quadruples: int = DEFAULT_QUADRUPLE_CAP
    decode_policy: str = "lenient"

    def __post_init__(self) -> None:
        if self.stage1_mode not in STAGE1_MODES:
            raise ValueError(f"stage1 mode must be one of {STAGE1_MODES}")
        if self.stage1_mode == "binary" and self.stage1 is None:
            raise ValueError("binary stage-1 needs a backend spec")
        if not self.stage2:
            raise ValueError("stage-2 needs at least one member backend")
        if len(self.stage2_weights) != len(self.stage2):
            raise ValueError("one stage-2 weight per member required")
        EnsembleWeights(self.stage2_weights)
        if self.stage3 is None:
            raise ValueError("stage-3 needs a backend spec")
        if self.max_quadruples < 1:
            raise ValueError("max_quadruples must be >= 1")
        if self.decode_policy != "lenient":
            raise ValueError("only the lenient decode policy is implemented")

    def to_json(self) -> dict:
        return {
            "stage1": {"mode": self.stage1_mode, "backend": self.stage1},
            "stage2": {"members": list(self.stage2), "weights": list(self.stage2_weights)},
            "stage3": {"backend": self.stage3},
            "max_quadruples": self.max_quadruples,
            "decode_policy": self.decode_policy,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "PipelineConfig":
        stage1 = doc.get("stage1", {})
        stage2 = doc.get("stage2", {})
        return cls(
            stage1_mode=stage1.get("mode", "binary"),
            stage1=stage1.get("backend"),
            stage2=tuple(stage2.get("members", ())),
            stage2_weights=tuple(stage2.get("weights", DEFAULT_STAGE2_WEIGHTS)),
            stage3=doc.get("stage3", {}).get("backend"),
            max_quadruples=doc.get("max_quadruples", DEFAULT_QUADRUPLE_CAP),
            decode_policy=doc.get("decode_policy", "lenient"),
        )

    @classmethod
    def load(cls, path) -> "PipelineConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))


@dataclass
class PipelineBackends:
    """Resolved live backends for the three stages."""

    stage1: object | None
    stage2: tuple
    stage3: object


def _load_backend_spec(spec: dict, base_dir: Path):
    """Resolve one backend spec object to a live backend.

    Shapes: {"native": path}, {"ensemble": manifest-path},
    {"external": {"argv": [...]}} or {"external": {"tcp": "host:port"},
    "capabilities": [...]}.
    """
    if "native" in spec:
        return NativeBackend(load_model(base_dir / spec["native"]))
    if "ensemble" in spec:
        manifest = read_manifest(base_dir / spec["ensemble"])
        members = [
            NativeBackend(load_model(base_dir / member))
            for member in manifest["members"]
        ]
        return EnsembleBackend(members, EnsembleWeights(tuple(manifest["weights"])))
    if "external" in spec:
        ext = spec["external"]
        caps = frozenset(spec.get("capabilities") or CAPABILITY_FOR_TASK.values())
        if "argv" in ext:
            transport = ChildProcessTransport(tuple(ext["argv"]))
        elif "tcp" in ext:
            host, _, port = str(ext["tcp"]).rpartition(":")
            transport = TcpTransport(host, int(port))
        else:
            raise ValueError("external spec needs argv or tcp")
        descriptor = BackendDescriptor(
            name=spec.get("name", "external"), capabilities=caps,
            kind="external", transport=transport,
        )
        return connect_external(descriptor, timeout=float(ext.get("timeout", 30.0)))
    raise ValueError(f"unrecognized backend spec {spec!r}")


def load_backends(config: PipelineConfig, base_dir) -> PipelineBackends:
    base = Path(base_dir)
    stage1 = _load_backend_spec(config.stage1, base) if config.stage1 else None
    stage2 = tuple(_load_backend_spec(s, base) for s in config.stage2)
    stage3 = _load_backend_spec(config.stage3, base)
    return PipelineBackends(stage1, stage2, stage3)


@dataclass
class RunReport:
    """Aggregate counters and stage timings for one pipeline run."""

    sentences: int = 0
    predicted_comparative: int = 0
    emitted_quintuples: int = 0
    demotions: int = 0
    truncations: int = 0
    timings: dict[str, float] = field(default_factory=lambda: {
        "stage1": 0.0, "stage2": 0.0, "stage3": 0.0,
    })
    traces: dict[str, dict] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "sentences": self.sentences,
            "predicted_comparative": self.predicted_comparative,
            "emitted_quintuples": self.emitted_quintuples,
            "demotions": self.demotions,
            "truncations": self.truncations,
            "timings_seconds": {k: round(v, 6) for k, v in self.timings.items()},
        }


def predict_sentence(
    sentence: Sentence, config: PipelineConfig, backends: PipelineBackends,
    report: RunReport | None = None,
) -> tuple[list[Quintuple], dict]:
    """Run the three stages on one sentence.

    Ties at the stage-1 gate go to non-comparative. A gated-comparative
    sentence whose candidates all classify NONE is demoted to non-comparative
    and counted, not errored.
    """
    report = report if report is not None else RunReport()
    sets: ElementSets | None = None

    def stage2_sets() -> ElementSets:
        nonlocal sets
        if sets is None:
            t0 = time.perf_counter()
            member_logits = [tag_tokens(b, [sentence])[0] for b in backends.stage2]
            combined = combine_weighted(member_logits, config.stage2_weights)
            sets = decode_spans(combined)
            report.timings["stage2"] += time.perf_counter() - t0
        return sets

    t0 = time.perf_counter()
    if config.stage1_mode == "binary":
        logits = classify_sentence(backends.stage1, [sentence])[0]
        comparative = bool(logits[1] > logits[0])
        report.timings["stage1"] += time.perf_counter() - t0
    else:
        comparative = stage2_sets().any_present()
        report.timings["stage1"] += 0.0

    trace = {"comparative": comparative, "sets": ElementSets(),
             "demoted": False, "truncated": False}
    if not comparative:
        return [], trace

    extracted = stage2_sets()
    trace["sets"] = extracted
    if not extracted.any_present():
        trace["demoted"] = True
        report.demotions += 1
        return [], trace

    quads, truncated = generate_quadruples(extracted, config.max_quadruples)
    if truncated:
        trace["truncated"] = True
        report.truncations += 1

    t0 = time.perf_counter()
    kept: list[Quintuple] = []
    seen = set()
    for quad in quads:
        logits = classify_quadruple(backends.stage3, sentence, quad)
        label = STAGE_LABELS[int(logits.argmax())]
        if label == NONE_LABEL:
            continue
        q = Quintuple(quad[0], quad[1], quad[2], quad[3], label)
        if q not in seen:
            seen.add(q)
            kept.append(q)
    report.timings["stage3"] += time.perf_counter() - t0

    if not kept:
        trace["demoted"] = True
        report.demotions += 1
    return kept, trace


def run_pipeline(
    dataset: Dataset, config: PipelineConfig, backends: PipelineBackends,
    partial_path=None,
) -> tuple[Dataset, RunReport]:
    """Predict every sentence; fail fast on backend loss.

    When a backend dies mid-run and partial_path is given, the predictions
    finished so far are written there before the error propagates.
    """
    report = RunReport()
    predicted: list[Sentence] = []
    for sentence in dataset:
        try:
            quintuples, trace = predict_sentence(sentence, config, backends, report)
        except BackendUnavailable:
            if partial_path is not None:
                export_dataset(Dataset(tuple(predicted), provenance="partial"),
                               partial_path)
            raise
        report.sentences += 1
        if trace["comparative"]:
            report.predicted_comparative += 1
        report.emitted_quintuples += len(quintuples)
        report.traces[sentence.id] = trace
        predicted.append(
            Sentence(sentence.id, sentence.text, sentence.tokens, tuple(quintuples))
        )
    return Dataset(tuple(predicted), provenance="pipeline"), report


# -- experiment presets ---------------------------------------------------


@dataclass(frozen=True)
class ExperimentPreset:
    """One of the five experiment configurations."""

    name: str
    dataset_version: str  # "v2" | "v3"
    bootstrap: bool
    stage1_mode: str      # "binary" | "tagger-derived"

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "dataset_version": self.dataset_version,
            "bootstrap": self.bootstrap,
            "stage1_mode": self.stage1_mode,
        }


PRESETS = {
    "E1": ExperimentPreset("E1", "v2", True, "tagger-derived"),
    "E2": ExperimentPreset("E2", "v2", False, "binary"),
    "E3": ExperimentPreset("E3", "v2", True, "binary"),
    "E4": ExperimentPreset("E4", "v3", False, "tagger-derived"),
    "E5": ExperimentPreset("E5", "v3", True, "tagger-derived"),
}


@dataclass
class ExperimentResult:
    preset: ExperimentPreset
    eval_report: EvalReport
    run_report: RunReport
    out_dir: Path


def _train_single(task, dataset, config, out_dir, name):
    model = native_train_fn(task, dataset, config)
    path = out_dir / f"{name}.model"
    save_model(model, path)
    return NativeBackend(model), {"native": f"models/{name}.model"}, [path]


def _train_bootstrap(task, dataset, config, out_dir, name, k=3):
    plan = make_folds(dataset, k=k, seed=config.seed)
    ensemble = bootstrap_train(task, dataset, plan, config, native_train_fn,
                               native_score)
    paths = []
    for i, member in enumerate(ensemble.members):
        path = out_dir / f"{name}-fold{i}.model"
        save_model(member, path)
        paths.append(path)
    manifest = out_dir / f"{name}.ensemble.json"
    write_manifest(manifest, task, ensemble.members[0].alphabet,
                   [f"models/{p.name}" for p in paths])
    return bootstrap_backend(ensemble), {"ensemble": f"models/{name}.ensemble.json"}, paths


def run_experiment(
    preset: ExperimentPreset,
    data_dir,
    out_dir,
    train_config: TrainConfig | None = None,
    holdout_fraction: float = 0.2,
    seed: int = 0,
) -> ExperimentResult:
    """Train per-preset stage models, predict a held-out split, evaluate.

    The preset fixes the dataset version, the bootstrap flag (stages 1 and
    3), and the stage-1 mode; training hyperparameters come from
    train_config.
    """
    data_dir = Path(data_dir)
    out_dir = Path(out_dir)
    dataset_path = data_dir / f"{preset.dataset_version}.jsonl"
    if not dataset_path.exists():
        raise MissingDatasetVersion(
            f"dataset version file {dataset_path} not found; build it with the "
            "augment command first"
        )
    config = train_config or TrainConfig()
    dataset = import_dataset(dataset_path)

    import random as _random

    order = list(dataset.sentences)
    _random.Random(seed).shuffle(order)
    cut = max(1, int(len(order) * (1 - holdout_fraction)))
    train = Dataset(tuple(order[:cut]), provenance="experiment-train")
    held = Dataset(tuple(order[cut:]), provenance="experiment-heldout")

    models_dir = out_dir / "models"
    models_dir.mkdir(parents=True, exist_ok=True)

    # Stage 2: three sibling taggers with distinct seeds, weighted combination.
    stage2_members = []
    stage2_specs = []
    train_comparative = Dataset(tuple(train.comparative()))
    for i in range(3):
        member_config = TrainConfig(**{**config.to_json(), "seed": config.seed + 100 + i})
        backend, spec, _ = _train_single("tag", train_comparative, member_config,
                                         models_dir, f"tagger-{i}")
        stage2_members.append(backend)
        stage2_specs.append(spec)

    # Stage 1: only the binary mode trains its own model.
    stage1_backend = None
    stage1_spec = None
    if preset.stage1_mode == "binary":
        if preset.bootstrap:
            stage1_backend, stage1_spec, _ = _train_bootstrap(
                "sentence", train, config, models_dir, "gate")
        else:
            stage1_backend, stage1_spec, _ = _train_single(
                "sentence", train, config, models_dir, "gate")

    # Stage 3: quadruple classifier, bootstrap per preset flag.
    if preset.bootstrap:
        stage3_backend, stage3_spec, _ = _train_bootstrap(
            "quadruple", train_comparative, config, models_dir, "typer")
    else:
        stage3_backend, stage3_spec, _ = _train_single(
            "quadruple", train_comparative, config, models_dir, "typer")

    pipeline_config = PipelineConfig(
        stage1_mode=preset.stage1_mode,
        stage1=stage1_spec,
        stage2=tuple(stage2_specs),
        stage2_weights=DEFAULT_STAGE2_WEIGHTS,
        stage3=stage3_spec,
    )
    with open(out_dir / "pipeline.json", "w", encoding="utf-8") as fh:
        json.dump(pipeline_config.to_json(), fh, ensure_ascii=False, indent=2)
        fh.write("\n")
    with open(out_dir / "experiment.json", "w", encoding="utf-8") as fh:
        json.dump(
            {"preset": preset.to_json(), "train_config": config.to_json(),
             "seed": seed, "holdout_fraction": holdout_fraction},
            fh, ensure_ascii=False, indent=2)
        fh.write("\n")

    backends = PipelineBackends(stage1_backend, tuple(stage2_members), stage3_backend)
    predictions, run_report = run_pipeline(held, pipeline_config, backends)
    export_dataset(predictions, out_dir / "predictions.jsonl")

    eval_report = e_t5_macro(held, predictions)
    stage1_score, stage2_scores = stage_metrics(held, run_report.traces)
    eval_report = EvalReport(
        per_label=eval_report.per_label,
        macro_precision=eval_report.macro_precision,
        macro_recall=eval_report.macro_recall,
        macro_f1=eval_report.macro_f1,
        average_mode=eval_report.average_mode,
        included_labels=eval_report.included_labels,
        stage1=stage1_score,
        stage2=stage2_scores,
    )
    with open(out_dir / "report.json", "w", encoding="utf-8") as fh:
        json.dump({"eval": eval_report.to_json(), "run": run_report.to_json()},
                  fh, ensure_ascii=False, indent=2)
        fh.write("\n")
    return ExperimentResult(preset, eval_report, run_report, out_dir)
