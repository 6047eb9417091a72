"""Command-line entry point: fine-tune artifacts and serve them."""

from __future__ import annotations

import argparse
import json
import sys

from .finetune import TASKS, TrainSettings, finetune
from .model import AGGREGATIONS, EncoderSpec
from .serve import AdapterServer, load_artifacts


def _cmd_finetune(args) -> int:
    settings = TrainSettings()
    if args.settings:
        with open(args.settings, encoding="utf-8") as fh:
            settings = TrainSettings.from_json(json.load(fh))
    if args.seed is not None:
        settings = TrainSettings.from_json({**settings.to_json(), "seed": args.seed})
    encoder = EncoderSpec(
        hidden_size=args.hidden_size,
        num_hidden_layers=args.layers,
        num_attention_heads=args.heads,
        intermediate_size=args.hidden_size * 2,
        checkpoint=args.checkpoint,
    )
    artifact = finetune(args.task, args.data, settings, encoder)
    out = artifact.save(args.output)
    print(f"wrote {args.task} artifact to {out}")
    return 0


def _cmd_serve(args) -> int:
    artifacts = load_artifacts({
        "sentence": args.sentence_model,
        "tag": args.tag_model,
        "quadruple": args.quadruple_model,
    })
    if args.aggregate:
        for artifact in artifacts.values():
            artifact.aggregation = args.aggregate
    server = AdapterServer(artifacts)
    if args.tcp:
        host, _, port = args.tcp.rpartition(":")
        server.serve_tcp(host or "127.0.0.1", int(port))
    else:
        server.serve_stdio()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="comadapter", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("finetune", help="fine-tune one capability model")
    p.add_argument("task", choices=TASKS)
    p.add_argument("data", help="canonical JSONL dataset")
    p.add_argument("-o", "--output", required=True, help="artifact directory")
    p.add_argument("--settings", help="TrainSettings JSON file")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--checkpoint", help="pretrained encoder id or local path")
    p.add_argument("--hidden-size", type=int, default=64)
    p.add_argument("--layers", type=int, default=2)
    p.add_argument("--heads", type=int, default=2)
    p.set_defaults(func=_cmd_finetune)

    p = sub.add_parser("serve", help="answer protocol requests over stdio or TCP")
    p.add_argument("--sentence-model")
    p.add_argument("--tag-model")
    p.add_argument("--quadruple-model")
    p.add_argument("--tcp", help="host:port to listen on (default: stdio)")
    p.add_argument("--aggregate", choices=AGGREGATIONS,
                   help="sub-token to word aggregation override")
    p.set_defaults(func=_cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ValueError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
