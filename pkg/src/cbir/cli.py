"""Command-line entry point: ``cbir index | query | eval``.

Exit codes: 0 success, 1 usage error, 2 data error (decode/format), 3 I/O error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from . import evaluation
from .errors import CbirError, InvalidParameter
from .features import ExtractionParams
from .index import build_index, find_images, query, read_index, signature_for_file, write_index

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_IO = 0, 1, 2, 3

log = logging.getLogger("cbir")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cbir", description="Sub-block region-matching image retrieval")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("index", help="extract features for a directory of images")
    p.add_argument("--images", required=True, help="directory searched recursively for images")
    p.add_argument("--db", required=True, help="index file to write")
    defaults = ExtractionParams()
    p.add_argument("--tau-s", type=float, default=defaults.tau_s, help="relative Sobel threshold in (0,1)")
    p.add_argument("--tau-r", type=float, default=defaults.tau_r, help="ROI density fraction in (0,1]")
    p.add_argument("--levels", type=int, default=defaults.levels, help="GLCM gray levels")
    p.add_argument("--t-edge", type=float, default=defaults.t_edge, help="edge histogram threshold")
    p.add_argument("--labels", help="CSV of image,category pairs")

    p = sub.add_parser("query", help="rank indexed images against a query image")
    p.add_argument("--db", required=True)
    p.add_argument("--image", required=True)
    p.add_argument("--k", type=_positive_int, required=True)
    p.add_argument("--html", help="write a contact sheet of the results here")

    p = sub.add_parser("eval", help="precision@k of every indexed image against the index")
    p.add_argument("--db", required=True)
    p.add_argument("--k", type=_positive_int, required=True)
    p.add_argument("--report", help="write a JSON report here")
    return parser


def _cmd_index(args) -> int:
    try:
        params = ExtractionParams(tau_s=args.tau_s, tau_r=args.tau_r, levels=args.levels, t_edge=args.t_edge)
    except InvalidParameter as exc:
        print(f"cbir: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if not os.path.isdir(args.images):
        print(f"cbir: not a directory: {args.images}", file=sys.stderr)
        return EXIT_IO
    labels = evaluation.load_labels(args.labels) if args.labels else None
    paths = find_images(args.images)

    def progress(n, total):
        if n % 100 == 0 or n == total:
            print(f"indexed {n}/{total}", file=sys.stderr)

    index = build_index(
        paths,
        params,
        root=args.images,
        categorize=lambda p: evaluation.infer_category(p, labels, args.images),
        progress=progress,
    )
    write_index(index, args.db)
    print(f"wrote {len(index)} signatures to {args.db}")
    return EXIT_OK


def _cmd_query(args) -> int:
    index = read_index(args.db)
    sig = signature_for_file(args.image, index.params, image_id=os.path.basename(args.image))
    hits = query(index, sig, args.k)
    for rank, h in enumerate(hits, start=1):
        cat = "-" if h.category is None else h.category
        print(f"{rank}\t{h.distance:.6f}\t{cat}\t{h.path}")
    if args.html:
        evaluation.emit_html_sheet(hits, args.image, args.html)
    return EXIT_OK


def _cmd_eval(args) -> int:
    index = read_index(args.db)
    report = evaluation.evaluate(index, args.k)
    print(report.table())
    if args.report:
        evaluation.write_report(report, args.report)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    handler = {"index": _cmd_index, "query": _cmd_query, "eval": _cmd_eval}[args.command]
    try:
        return handler(args)
    except OSError as exc:
        print(f"cbir: {exc}", file=sys.stderr)
        return EXIT_IO
    except CbirError as exc:
        print(f"cbir: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
