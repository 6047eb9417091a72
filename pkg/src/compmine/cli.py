"""Command-line entry point.

One binary, subcommand style: clean/import, stats, lint, augment, train,
predict, eval, and experiment-preset runs. JSON everywhere for machines,
aligned tables for humans, optional matplotlib figures next to report
output. Exit codes: 0 success, 1 findings or eval mismatch, 2 usage error,
3 runtime failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from pathlib import Path

from . import __version__
from .augment import (
    AugmentSpec,
    build_dictionaries,
    generate_dataset,
    load_wordlist,
    merge_wordlist,
    version_spec,
)
from .backends import TrainConfig, save_model, train_native
from .core import COMPARISON_LABELS
from .ensemble import bootstrap_train, make_folds, write_manifest
from .errors import CompmineError
from .evaluate import e_t5_macro
from .ingest import (
    LintConfig,
    dataset_stats,
    export_dataset,
    import_dataset,
    import_dataset_lenient,
    lint_dataset,
)
from .pipeline import (
    PRESETS,
    PipelineConfig,
    load_backends,
    run_experiment,
    run_pipeline,
)

CONFIG_ENV_VAR = "COMPMINE_CONFIG"

WORDLIST_SLOTS = ("subject", "object", "aspect")


def _load_file_config(path: str | None) -> dict:
    if not path:
        return {}
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict):
        raise ValueError("config file must hold a JSON object")
    return doc


class Cli:
    """Effective configuration: flags override config-file values."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.file_config = _load_file_config(
            args.config or os.environ.get(CONFIG_ENV_VAR)
        )

    def get(self, name: str, default=None):
        value = getattr(self.args, name, None)
        if value is not None:
            return value
        return self.file_config.get(name.replace("_", "-"),
                                    self.file_config.get(name, default))

    def provenance(self) -> dict:
        effective = {
            k: v for k, v in sorted(vars(self.args).items())
            if k not in ("func",) and v is not None
        }
        effective.update({f"config:{k}": v for k, v in sorted(self.file_config.items())})
        digest = hashlib.sha256(
            json.dumps(effective, sort_keys=True, default=str).encode("utf-8")
        ).hexdigest()
        return {
            "tool": "compmine",
            "version": __version__,
            "seed": self.get("seed", 0),
            "config_hash": digest[:16],
        }

    def write_json(self, path, payload: dict) -> None:
        doc = {"provenance": self.provenance()} | payload
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, ensure_ascii=False, indent=2)
            fh.write("\n")


def _cmd_clean(cli: Cli) -> int:
    args = cli.args
    dataset, issues = import_dataset_lenient(args.input, format=args.format)
    for lineno, reason in issues:
        print(f"warning: line {lineno}: {reason}", file=sys.stderr)
    export_dataset(dataset, args.output)
    cli.write_json(str(args.output) + ".meta.json", {
        "sentences": len(dataset),
        "skipped_records": len(issues),
        "source": str(args.input),
        "format": args.format,
    })
    print(f"wrote {len(dataset)} sentences to {args.output}"
          + (f" ({len(issues)} records skipped)" if issues else ""))
    return 0


def _cmd_stats(cli: Cli) -> int:
    args = cli.args
    report = dataset_stats(import_dataset(args.input))
    if args.json:
        print(json.dumps({"provenance": cli.provenance()} | report.to_json(),
                         ensure_ascii=False, indent=2))
    else:
        print(report.to_text(), end="")
    if args.out:
        cli.write_json(args.out, report.to_json())
    figures_dir = cli.get("figures")
    if figures_dir:
        from .figures import render_stats_figures

        for path in render_stats_figures(report, figures_dir):
            print(f"figure: {path}", file=sys.stderr)
    return 0


def _cmd_lint(cli: Cli) -> int:
    args = cli.args
    config = LintConfig(max_predicate_tokens=cli.get("max_predicate_tokens", 10))
    report = lint_dataset(import_dataset(args.input), config)
    if args.json:
        print(json.dumps({"provenance": cli.provenance(),
                          "findings": report.to_json()},
                         ensure_ascii=False, indent=2))
    else:
        print(report.to_text(), end="")
    return 1 if report else 0


def _load_dictionaries(dataset, wordlists_dir: str | None):
    dicts = build_dictionaries(dataset)
    for warning in dicts.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    if not wordlists_dir:
        return dicts
    base = Path(wordlists_dir)
    for slot in WORDLIST_SLOTS:
        path = base / f"{slot}.txt"
        if path.exists():
            dicts = merge_wordlist(dicts, slot, load_wordlist(path))
    for label in COMPARISON_LABELS:
        path = base / f"predicate.{label}.txt"
        if path.exists():
            dicts = merge_wordlist(dicts, "predicate", load_wordlist(path), label=label)
    return dicts


def _cmd_augment(cli: Cli) -> int:
    args = cli.args
    dataset = import_dataset(args.input)
    dicts = _load_dictionaries(dataset, cli.get("wordlists"))
    seed = cli.get("seed", 0)
    if args.spec:
        spec = AugmentSpec.load(args.spec)
        if args.seed is not None:
            spec = AugmentSpec(spec.targets, seed=seed, max_attempts=spec.max_attempts)
    elif args.version:
        spec = version_spec(args.version, dataset, seed=seed)
    else:
        print("error: augment needs --spec or --version", file=sys.stderr)
        return 2
    out = generate_dataset(dataset, dicts, spec)
    export_dataset(out, args.output)
    synthetic = sum(1 for s in out if s.id.startswith("syn-"))
    cli.write_json(str(args.output) + ".meta.json", {
        "sentences": len(out),
        "synthetic_sentences": synthetic,
        "targets": spec.targets,
        "spec_seed": spec.seed,
    })
    print(f"wrote {len(out)} sentences ({synthetic} synthetic) to {args.output}")
    return 0


def _cmd_train(cli: Cli) -> int:
    args = cli.args
    dataset = import_dataset(args.input)
    config = TrainConfig.from_json(_load_file_config(args.train_config)) \
        if args.train_config else TrainConfig()
    if args.seed is not None:
        config = TrainConfig(**{**config.to_json(), "seed": args.seed})
    out = Path(args.output)
    if args.bootstrap:
        from .backends import native_score, native_train_fn

        relevant = dataset if args.task == "sentence" else \
            type(dataset)(tuple(dataset.comparative()))
        plan = make_folds(relevant, k=args.folds, seed=config.seed)
        ensemble = bootstrap_train(args.task, relevant, plan, config,
                                   native_train_fn, native_score)
        member_paths = []
        for i, member in enumerate(ensemble.members):
            member_path = out.with_suffix(f".fold{i}.model")
            save_model(member, member_path)
            member_paths.append(member_path.name)
        write_manifest(out, args.task, ensemble.members[0].alphabet, member_paths)
        scores = ", ".join(f"{s:.4f}" for s in ensemble.validation_scores)
        print(f"wrote {len(member_paths)}-member ensemble to {out} "
              f"(fold scores: {scores})")
    else:
        model = train_native(args.task, dataset, config)
        save_model(model, out)
        print(f"wrote model to {out}")
    return 0


def _cmd_predict(cli: Cli) -> int:
    args = cli.args
    dataset = import_dataset(args.input)
    config = PipelineConfig.load(args.pipeline)
    base_dir = args.base_dir or Path(args.pipeline).parent
    backends = load_backends(config, base_dir)
    predictions, report = run_pipeline(
        dataset, config, backends,
        partial_path=str(args.output) + ".partial.jsonl",
    )
    export_dataset(predictions, args.output)
    cli.write_json(str(args.output) + ".report.json", report.to_json())
    print(f"predicted {report.emitted_quintuples} quintuples over "
          f"{report.sentences} sentences -> {args.output}")
    return 0


def _cmd_eval(cli: Cli) -> int:
    args = cli.args
    gold = import_dataset(args.gold)
    pred = import_dataset(args.pred)
    report = e_t5_macro(gold, pred, average=cli.get("average", "present"))
    if args.json:
        print(json.dumps({"provenance": cli.provenance()} | report.to_json(),
                         ensure_ascii=False, indent=2))
    else:
        print(report.to_text(), end="")
    if args.out:
        cli.write_json(args.out, report.to_json())
    figures_dir = cli.get("figures")
    if figures_dir:
        from .figures import render_eval_figures

        for path in render_eval_figures(report, figures_dir):
            print(f"figure: {path}", file=sys.stderr)
    return 0 if report.macro_f1 >= 1.0 else 1


def _cmd_experiment(cli: Cli) -> int:
    args = cli.args
    preset = PRESETS[args.preset]
    train_config = TrainConfig.from_json(_load_file_config(args.train_config)) \
        if args.train_config else None
    result = run_experiment(
        preset, args.data, args.output,
        train_config=train_config,
        holdout_fraction=cli.get("holdout", 0.2),
        seed=cli.get("seed", 0),
    )
    from .figures import render_eval_figures

    for path in render_eval_figures(result.eval_report, Path(args.output) / "figures"):
        print(f"figure: {path}", file=sys.stderr)
    cli.write_json(Path(args.output) / "provenance.json", {"preset": preset.to_json()})
    r = result.eval_report
    print(f"{preset.name}: macro-P={r.macro_precision:.4f} "
          f"macro-R={r.macro_recall:.4f} macro-F1={r.macro_f1:.4f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="compmine",
        description="Comparative opinion mining: quintuple extraction pipeline",
    )
    parser.add_argument("--version", action="version", version=f"compmine {__version__}")
    parser.add_argument("--config", help=f"global JSON config (or ${CONFIG_ENV_VAR})")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("clean", help="normalize a dataset into canonical JSONL")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--format", choices=["canonical-jsonl", "vlsp-raw"],
                   default="canonical-jsonl")
    p.set_defaults(func=_cmd_clean)

    p = sub.add_parser("stats", help="dataset summary counts and percentages")
    p.add_argument("input")
    p.add_argument("--json", action="store_true")
    p.add_argument("-o", "--out", help="also write the JSON report here")
    p.add_argument("--figures", help="directory for rendered charts")
    p.set_defaults(func=_cmd_stats)

    p = sub.add_parser("lint", help="flag suspicious annotations (exit 1 if any)")
    p.add_argument("input")
    p.add_argument("--max-predicate-tokens", type=int, default=None)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_lint)

    p = sub.add_parser("augment", help="synthesize sentences to per-label targets")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--spec", help="AugmentSpec JSON file")
    p.add_argument("--version", dest="version", choices=["v2", "v3"],
                   help="target a published dataset version instead of --spec")
    p.add_argument("--wordlists", help="directory of slot wordlist files")
    p.set_defaults(func=_cmd_augment)

    p = sub.add_parser("train", help="train a native model or bootstrap ensemble")
    p.add_argument("task", choices=["sentence", "tag", "quadruple"])
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--train-config", dest="train_config", help="TrainConfig JSON file")
    p.add_argument("--bootstrap", action="store_true")
    p.add_argument("--folds", type=int, default=3)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("predict", help="run the three-stage pipeline")
    p.add_argument("input")
    p.add_argument("--pipeline", required=True, help="PipelineConfig JSON file")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--base-dir", help="base for model paths (default: config dir)")
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("eval", help="exact-quintuple macro scoring")
    p.add_argument("gold")
    p.add_argument("pred")
    p.add_argument("--average", choices=["present", "fixed8"], default=None)
    p.add_argument("--json", action="store_true")
    p.add_argument("-o", "--out", help="also write the JSON report here")
    p.add_argument("--figures", help="directory for rendered charts")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("experiment", help="run one of the presets E1-E5")
    p.add_argument("preset", choices=sorted(PRESETS))
    p.add_argument("--data", required=True, help="directory with v2.jsonl / v3.jsonl")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--train-config", dest="train_config")
    p.add_argument("--holdout", type=float, default=None)
    p.set_defaults(func=_cmd_experiment)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cli = Cli(args)
        return args.func(cli)
    except CompmineError as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return 3
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
