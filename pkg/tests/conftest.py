import colorsys
import os

import numpy as np
import pytest
from PIL import Image

from cbir.features import ExtractionParams, build_signature
from cbir.index import FeatureIndex, IndexEntry

# hue-bin centres (degrees / 360), far from the 20-degree bin edges
HUES = (30 / 360, 110 / 360, 170 / 360, 230 / 360, 290 / 360)


def hue_family_image(rng, hue, width=96, height=64):
    """A noisy field of one hue family with a darker blob of the same hue."""
    sat = rng.uniform(0.75, 0.9)
    val = rng.uniform(0.75, 0.9)
    base = np.array(colorsys.hsv_to_rgb(hue + rng.uniform(-0.01, 0.01), sat, val)) * 255
    img = np.empty((height, width, 3))
    img[:] = base
    cy, cx = rng.integers(height // 4, 3 * height // 4), rng.integers(width // 4, 3 * width // 4)
    ry, rx = rng.integers(6, height // 4), rng.integers(6, width // 4)
    yy, xx = np.mgrid[:height, :width]
    blob = ((yy - cy) / ry) ** 2 + ((xx - cx) / rx) ** 2 <= 1.0
    img[blob] = np.array(colorsys.hsv_to_rgb(hue, min(1.0, sat + 0.1), val * 0.55)) * 255
    img += rng.normal(0.0, 8.0, img.shape)
    return np.clip(np.rint(img), 0, 255).astype(np.uint8)


def synthetic_corpus(seed=7, per_family=12, hues=HUES):
    rng = np.random.default_rng(seed)
    out = []
    for c, hue in enumerate(hues):
        for n in range(per_family):
            out.append((f"fam{c}/img{n:02d}.png", f"fam{c}", hue_family_image(rng, hue)))
    return out


@pytest.fixture(scope="session")
def corpus():
    return synthetic_corpus()


@pytest.fixture(scope="session")
def corpus_dir(tmp_path_factory, corpus):
    root = tmp_path_factory.mktemp("corpus")
    for rel, _, img in corpus:
        path = root / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        Image.fromarray(img).save(path)
    return root


@pytest.fixture(scope="session")
def synthetic_index(corpus):
    params = ExtractionParams()
    entries = [
        IndexEntry(build_signature(img, params, image_id=rel), rel, cat)
        for rel, cat, img in corpus
    ]
    return FeatureIndex(params, entries)


def save_png(path, arr):
    os.makedirs(os.path.dirname(path), exist_ok=True)
    Image.fromarray(arr).save(path)
