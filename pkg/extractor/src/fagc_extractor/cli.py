"""Command-line wrapper: extract features or export the regression head."""

from __future__ import annotations

import argparse
import os
import sys

from .adapter import ExtractorError, build_model, export_head, extract, finetune, load_manifest


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="fagc-extract",
        description="Export CNN image features into fagc's CSV/JSON formats",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="write features.csv / patches.csv")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", default=".")

    p = sub.add_parser("export-head", help="write head.json")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", default=".")
    p.add_argument("--finetune-epochs", type=int, default=0,
                   help="fine-tune on labeled manifest images first")

    args = parser.parse_args(argv)
    try:
        manifest = load_manifest(args.manifest)
        if args.command == "extract":
            outputs = extract(manifest, args.out)
            for name, path in outputs.items():
                print(f"wrote {name}: {path}", file=sys.stderr)
        else:
            model = build_model(manifest)
            if args.finetune_epochs > 0:
                model = finetune(manifest, model, epochs=args.finetune_epochs)
            os.makedirs(args.out, exist_ok=True)
            path = export_head(model, os.path.join(args.out, "head.json"))
            print(f"wrote head: {path}", file=sys.stderr)
    except ExtractorError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def entry() -> None:
    sys.exit(main())
