"""Precision@k evaluation, category labels and the HTML result sheet."""

from __future__ import annotations

import csv
import html
import json
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import EmptyIndex, InsufficientResults, InvalidParameter, MissingCategory, UnlabeledImage
from .index import FeatureIndex, Hit, ranking

COREL_NAMES = (
    "Africa", "Beaches", "Buildings", "Bus", "Dinosaur",
    "Elephant", "Flowers", "Horse", "Mountains", "Food",
)


def load_labels(path: str | os.PathLike) -> dict[str, str]:
    """Two-column CSV (image, category); a header row is skipped if present."""
    labels = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for n, row in enumerate(csv.reader(fh)):
            if len(row) < 2 or not row[0].strip():
                continue
            if n == 0 and row[0].strip().lower() in ("image", "path", "file", "filename"):
                continue
            labels[row[0].strip()] = row[1].strip()
    return labels


def infer_category(
    path: str | os.PathLike,
    labels: Mapping[str, str] | None = None,
    root: str | os.PathLike | None = None,
) -> int | str | None:
    """Category of an image file, or ``None`` when nothing identifies one.

    An integer file stem ``n`` gives category ``n // 100`` (Corel numbering);
    otherwise the labels mapping is consulted (by path relative to ``root``,
    file name, then stem); otherwise the parent directory name, unless the
    file sits directly in ``root``.
    """
    p = Path(path)
    try:
        return int(p.stem) // 100
    except ValueError:
        pass
    if labels:
        keys = [p.name, p.stem]
        if root is not None:
            keys.insert(0, os.path.relpath(p, root).replace(os.sep, "/"))
        for key in keys:
            if key in labels:
                return labels[key]
    parent = p.parent
    if root is not None and os.path.abspath(parent) == os.path.abspath(root):
        return None
    if parent.name in ("", ".", ".."):
        return None
    return parent.name


def precision_at_k(hits: Sequence[Hit], query_category, k: int) -> float:
    """Share of the first ``k`` hits in the query's category; the query itself counts."""
    if k < 1:
        raise InvalidParameter(f"k must be >= 1, got {k}")
    if len(hits) < k:
        raise InsufficientResults(f"need {k} results, have {len(hits)}")
    return sum(1 for h in hits[:k] if h.category == query_category) / k


def _category_key(c):
    return (0, c, "") if isinstance(c, int) else (1, 0, str(c))


def category_name(c) -> str:
    if isinstance(c, int) and 0 <= c < len(COREL_NAMES):
        return COREL_NAMES[c]
    return str(c)


@dataclass(frozen=True)
class EvalReport:
    k: int
    per_category: tuple[tuple[int | str, float], ...]
    overall: float
    per_query: tuple[tuple[str, float], ...] = ()

    def table(self) -> str:
        rows = [(category_name(c), f"{100.0 * p:.2f}") for c, p in self.per_category]
        rows.append(("Average", f"{100.0 * self.overall:.2f}"))
        head = ("Category", f"% Precision (k={self.k})")
        w0 = max(len(head[0]), *(len(r[0]) for r in rows))
        w1 = max(len(head[1]), *(len(r[1]) for r in rows))
        lines = [f"{head[0]:<{w0}}  {head[1]:>{w1}}", f"{'-' * w0}  {'-' * w1}"]
        lines += [f"{a:<{w0}}  {b:>{w1}}" for a, b in rows]
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "categories": [
                {"category": c, "name": category_name(c), "precision_pct": 100.0 * p}
                for c, p in self.per_category
            ],
            "average_pct": 100.0 * self.overall,
        }


def evaluate(index: FeatureIndex, k: int, backend_name: str | None = None) -> EvalReport:
    """Query the index with each of its own images and average precision@k.

    Per-category means are over the images of that category; the overall
    figure is the unweighted mean of the category means.
    """
    if not index.entries:
        raise EmptyIndex("the index holds no images")
    if k < 1:
        raise InvalidParameter(f"k must be >= 1, got {k}")
    if k > len(index):
        raise InsufficientResults(f"k={k} exceeds the index size {len(index)}")
    for e in index.entries:
        if e.category is None:
            raise UnlabeledImage(f"{e.path}: no category from file name, labels or directory")

    cats = [e.category for e in index.entries]
    by_cat: dict = {}
    per_query = []
    for e in index.entries:
        order, _ = ranking(index, e.signature, backend_name)
        top = order[:k]
        p = sum(1 for i in top if cats[i] == e.category) / k
        by_cat.setdefault(e.category, []).append(p)
        per_query.append((e.image_id, p))

    per_category = tuple(
        (c, float(np.mean(by_cat[c]))) for c in sorted(by_cat, key=_category_key)
    )
    overall = float(np.mean([p for _, p in per_category]))
    return EvalReport(k, per_category, overall, tuple(per_query))


def write_report(report: EvalReport, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report.to_dict(), fh, indent=2, ensure_ascii=False)
        fh.write("\n")


_SHEET_HEAD = """<!DOCTYPE html>
<html>
<head>
<meta charset="utf-8">
<title>Query results</title>
<style>
body {{ font-family: sans-serif; }}
.grid {{ display: flex; flex-wrap: wrap; gap: 8px; }}
figure {{ margin: 0; width: 200px; }}
figure img {{ width: 200px; height: auto; }}
figure.query {{ outline: 3px solid #c00; }}
figcaption {{ font-size: 12px; }}
</style>
</head>
<body>
<h1>Results for {query}</h1>
<div class="grid">
"""


def emit_html_sheet(hits: Sequence[Hit], query_path: str, out_path: str | os.PathLike) -> None:
    """Static contact sheet: the query first, then hits in rank order."""
    esc = html.escape
    parts = [_SHEET_HEAD.format(query=esc(str(query_path)))]
    parts.append(
        f'<figure class="query"><img src="{esc(str(query_path))}" alt="query">'
        f"<figcaption>query</figcaption></figure>\n"
    )
    if not hits:
        parts.append('<p class="empty">no results</p>\n')
    for rank, h in enumerate(hits, start=1):
        parts.append(
            f'<figure><img src="{esc(h.path)}" alt="{esc(h.image_id)}">'
            f"<figcaption>#{rank} {esc(h.image_id)}<br>distance {h.distance:.6f}"
            f"<br>category {esc(category_name(h.category) if h.category is not None else '-')}"
            "</figcaption></figure>\n"
        )
    parts.append("</div>\n</body>\n</html>\n")
    with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("".join(parts))
