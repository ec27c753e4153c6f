"""Command-line front end.

    embexport export --manifest recordings.csv --out emb/ \
        --mode seg30 --encoder openai/whisper-small

Exit codes: 0 on success, 1 on a domain failure (message on stderr),
2 for usage errors (argparse).
"""

import argparse
import sys

from .errors import ExportError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="embexport",
        description="export pretrained speech-encoder embeddings to EMB1 files",
    )
    subs = parser.add_subparsers(dest="command", required=True)
    s = subs.add_parser("export", help="run an encoder over a recording manifest")
    s.add_argument("--manifest", required=True, help="recordings table (csv)")
    s.add_argument("--out", required=True, help="output directory for .emb files")
    s.add_argument("--mode", required=True, choices=("seg30", "chunk16"))
    s.add_argument("--encoder", required=True, help="model id or local model directory")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    from .encoder import load_encoder
    from .export import export_recordings

    try:
        enc = load_encoder(args.encoder)
        written = export_recordings(args.manifest, args.out, args.mode, enc)
    except ExportError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    for name in written:
        print(f"wrote {name}")
    print(f"{len(written)} files -> {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
