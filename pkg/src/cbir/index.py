"""Feature index persistence and ranked k-nearest queries.

File layout (UTF-8, newline-delimited JSON): the first line is the manifest,
every following line one image record::

    {"kind": "cbir-index", "format_version": 1, "fingerprint": ..., "params": {...}, ...}
    {"image_id": ..., "path": ..., "category": ..., "fingerprint": ...,
     "grid": [[cell, significance, [41 floats]], ...], "h": [...], "v": [...],
     "central": [41 floats], "global_color": [24 floats], "global_shape": [80 floats]}

Every float is written as the shortest decimal that parses back to the same
64-bit value, so a write/read cycle is bit-exact.
"""

from __future__ import annotations

import json
import logging
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from functools import cached_property
from typing import Callable, Iterable, NamedTuple, Sequence

import numpy as np

from . import imaging
from .errors import (
    CorruptRecord,
    EmptyIndex,
    FormatVersionMismatch,
    InvalidParameter,
    ParameterMismatch,
)
from .features import (
    COLOR_DIM,
    EHD_DIM,
    FORMAT_VERSION,
    REGION_DIM,
    ExtractionParams,
    ImageSignature,
    RegionDescriptor,
    build_signature,
)
from .matching import PackedSignatures, scan_distances

log = logging.getLogger(__name__)

INDEX_KIND = "cbir-index"
IMAGE_EXTENSIONS = (".jpg", ".jpeg", ".png", ".bmp", ".gif", ".tif", ".tiff")


@dataclass
class IndexEntry:
    signature: ImageSignature
    path: str
    category: int | str | None = None

    @property
    def image_id(self) -> str:
        return self.signature.image_id


@dataclass(eq=False)
class FeatureIndex:
    params: ExtractionParams
    entries: list[IndexEntry] = field(default_factory=list)
    created: str = ""

    def __post_init__(self):
        if not self.created:
            self.created = datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
        seen = set()
        for e in self.entries:
            if e.signature.fingerprint != self.fingerprint:
                raise ParameterMismatch(f"{e.image_id}: fingerprint does not match the index")
            if e.image_id in seen:
                raise InvalidParameter(f"duplicate image_id {e.image_id!r}")
            seen.add(e.image_id)

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def fingerprint(self) -> str:
        return self.params.fingerprint()

    def manifest(self) -> dict:
        return {
            "kind": INDEX_KIND,
            "format_version": FORMAT_VERSION,
            "fingerprint": self.fingerprint,
            "params": self.params.to_dict(),
            "created": self.created,
            "count": len(self.entries),
        }

    @cached_property
    def packed(self) -> PackedSignatures:
        return PackedSignatures.from_signatures([e.signature for e in self.entries])

    @cached_property
    def id_rank(self) -> np.ndarray:
        order = sorted(range(len(self.entries)), key=lambda i: self.entries[i].image_id)
        rank = np.empty(len(self.entries), dtype=np.int64)
        rank[order] = np.arange(len(self.entries))
        return rank


# -- serialization ----------------------------------------------------------

def _floats(a: np.ndarray) -> str:
    # repr of a float64 is the shortest string that parses back to the same bits
    return "[" + ",".join(repr(float(v)) for v in a) + "]"


def _regions(regs: Sequence[RegionDescriptor]) -> str:
    return "[" + ",".join(
        f"[{r.cell_index},{json.dumps(r.significance)},{_floats(r.feature)}]" for r in regs
    ) + "]"


def _record(entry: IndexEntry) -> str:
    s = entry.signature
    return (
        "{"
        f'"image_id":{json.dumps(s.image_id, ensure_ascii=False)},'
        f'"path":{json.dumps(entry.path, ensure_ascii=False)},'
        f'"category":{json.dumps(entry.category, ensure_ascii=False)},'
        f'"fingerprint":{json.dumps(s.fingerprint)},'
        f'"grid":{_regions(s.grid)},"h":{_regions(s.h)},"v":{_regions(s.v)},'
        f'"central":{_floats(s.central)},'
        f'"global_color":{_floats(s.global_color)},'
        f'"global_shape":{_floats(s.global_shape)}'
        "}"
    )


def write_index(index: FeatureIndex, path: str | os.PathLike) -> None:
    """Write atomically: a temp file in the destination directory, then rename."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".cbir-", suffix=".tmp", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(json.dumps(index.manifest(), sort_keys=True) + "\n")
            for entry in index.entries:
                fh.write(_record(entry) + "\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _vector(values, width: int, what: str, line: int) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.shape != (width,):
        raise CorruptRecord(line, f"{what} has {arr.size} values, expected {width}")
    return arr


def _parse_regions(raw, what: str, line: int) -> tuple[RegionDescriptor, ...]:
    if not isinstance(raw, list) or not raw:
        raise CorruptRecord(line, f"{what} must be a nonempty list")
    out = []
    for item in raw:
        if not isinstance(item, list) or len(item) != 3:
            raise CorruptRecord(line, f"malformed {what} region")
        cell, sig, feat = item
        out.append(RegionDescriptor(_vector(feat, REGION_DIM, what, line), float(sig), int(cell)))
    return tuple(out)


def _parse_record(text: str, line: int, fingerprint: str) -> IndexEntry:
    try:
        rec = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CorruptRecord(line, f"invalid JSON ({exc.msg})") from None
    if not isinstance(rec, dict):
        raise CorruptRecord(line, "record is not an object")
    try:
        if rec["fingerprint"] != fingerprint:
            raise CorruptRecord(line, "record fingerprint differs from the manifest")
        sig = ImageSignature(
            image_id=str(rec["image_id"]),
            grid=_parse_regions(rec["grid"], "grid", line),
            h=_parse_regions(rec["h"], "h", line),
            v=_parse_regions(rec["v"], "v", line),
            central=_vector(rec["central"], REGION_DIM, "central", line),
            global_color=_vector(rec["global_color"], COLOR_DIM, "global_color", line),
            global_shape=_vector(rec["global_shape"], EHD_DIM, "global_shape", line),
            fingerprint=rec["fingerprint"],
        )
        return IndexEntry(sig, str(rec["path"]), rec.get("category"))
    except KeyError as exc:
        raise CorruptRecord(line, f"missing field {exc.args[0]!r}") from None
    except (TypeError, ValueError) as exc:
        raise CorruptRecord(line, str(exc)) from None


def read_index(path: str | os.PathLike) -> FeatureIndex:
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise CorruptRecord(1, "missing manifest")
    try:
        manifest = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise CorruptRecord(1, f"invalid manifest ({exc.msg})") from None
    if not isinstance(manifest, dict) or manifest.get("kind") != INDEX_KIND:
        raise CorruptRecord(1, "not a feature index manifest")
    if manifest.get("format_version") != FORMAT_VERSION:
        raise FormatVersionMismatch(
            f"index format {manifest.get('format_version')!r}, this build reads {FORMAT_VERSION}"
        )
    try:
        params = ExtractionParams.from_dict(manifest["params"])
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptRecord(1, f"bad parameters: {exc}") from None
    if params.fingerprint() != manifest.get("fingerprint"):
        raise CorruptRecord(1, "manifest fingerprint does not match its parameters")

    entries = [_parse_record(text, n, params.fingerprint()) for n, text in enumerate(lines[1:], start=2)]
    ids = set()
    for n, e in enumerate(entries, start=2):
        if e.image_id in ids:
            raise CorruptRecord(n, f"duplicate image_id {e.image_id!r}")
        ids.add(e.image_id)
    return FeatureIndex(params, entries, created=str(manifest.get("created", "")))


# -- querying ---------------------------------------------------------------

class Hit(NamedTuple):
    image_id: str
    path: str
    category: int | str | None
    distance: float


def ranking(index: FeatureIndex, q: ImageSignature, backend_name: str | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Entry order by ascending distance (ties by image_id) and the raw distances."""
    if not index.entries:
        raise EmptyIndex("the index holds no images")
    if q.fingerprint != index.fingerprint:
        raise ParameterMismatch("query signature was built with different parameters than the index")
    dist = scan_distances(q, index.packed, backend_name)
    return np.lexsort((index.id_rank, dist)), dist


def query(index: FeatureIndex, q: ImageSignature, k: int, backend_name: str | None = None) -> list[Hit]:
    if k < 1:
        raise InvalidParameter(f"k must be >= 1, got {k}")
    order, dist = ranking(index, q, backend_name)
    hits = []
    for i in order[:k]:
        e = index.entries[i]
        hits.append(Hit(e.image_id, e.path, e.category, float(dist[i])))
    return hits


# -- building ---------------------------------------------------------------

def find_images(root: str | os.PathLike) -> list[str]:
    """Image files under ``root``, recursively, in sorted relative-path order."""
    root = os.fspath(root)
    found = []
    for dirpath, dirnames, filenames in os.walk(root):
        dirnames.sort()
        for name in filenames:
            if name.lower().endswith(IMAGE_EXTENSIONS):
                found.append(os.path.join(dirpath, name))
    return sorted(found, key=lambda p: os.path.relpath(p, root).replace(os.sep, "/"))


def signature_for_file(path: str, params: ExtractionParams, image_id: str = "") -> ImageSignature:
    return build_signature(imaging.decode_image(path), params, image_id=image_id)


def _extract(job):
    path, params, image_id = job
    return signature_for_file(path, params, image_id)


def build_index(
    paths: Iterable[str],
    params: ExtractionParams | None = None,
    root: str | None = None,
    categorize: Callable[[str], int | str | None] | None = None,
    workers: int | None = None,
    progress: Callable[[int, int], None] | None = None,
) -> FeatureIndex:
    """Extract signatures for ``paths`` (in parallel when ``workers > 1``).

    Image ids are paths relative to ``root`` with forward slashes.
    """
    params = params or ExtractionParams()
    paths = list(paths)
    ids = [
        os.path.relpath(p, root).replace(os.sep, "/") if root else os.path.basename(p)
        for p in paths
    ]
    jobs = [(p, params, i) for p, i in zip(paths, ids)]
    if workers is None:
        workers = min(os.cpu_count() or 1, 8)

    sigs: list[ImageSignature] = []
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for n, sig in enumerate(pool.map(_extract, jobs, chunksize=8), start=1):
                sigs.append(sig)
                if progress:
                    progress(n, len(jobs))
    else:
        for n, job in enumerate(jobs, start=1):
            sigs.append(_extract(job))
            if progress:
                progress(n, len(jobs))

    entries = [
        IndexEntry(sig, path, categorize(path) if categorize else None)
        for sig, path in zip(sigs, paths)
    ]
    return FeatureIndex(params, entries)
