"""Compare the compiled and pure-Python matching backends.

Times single region-matching calls, one full index scan and a complete
leave-in evaluation (every entry queried against all entries), plus the
per-image extraction cost, which does not depend on the backend.

    python benchmarks/bench_matching.py --entries 1000
"""

import argparse
import dataclasses
import time

import numpy as np

from cbir import matching
from cbir.features import ExtractionParams, RegionDescriptor, build_signature
from cbir.index import FeatureIndex, IndexEntry, ranking


def random_image(rng, width, height):
    """Blocky colour field with noise, enough to give varied regions and edges."""
    coarse = rng.integers(0, 256, (height // 16 + 1, width // 16 + 1, 3))
    img = np.repeat(np.repeat(coarse, 16, axis=0), 16, axis=1)[:height, :width]
    img = img + rng.normal(0, 10, img.shape)
    return np.clip(img, 0, 255).astype(np.uint8)


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--entries", type=int, default=1000, help="index size")
    ap.add_argument("--distinct", type=int, default=100, help="distinct images behind the index")
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    rng = np.random.default_rng(args.seed)
    params = ExtractionParams()

    t0 = time.perf_counter()
    probe = [build_signature(random_image(rng, 384, 256), params) for _ in range(5)]
    per_image = (time.perf_counter() - t0) / len(probe)

    base = [build_signature(random_image(rng, 128, 96), params) for _ in range(args.distinct)]
    entries = []
    for n in range(args.entries):
        sig = dataclasses.replace(base[n % len(base)], image_id=f"img{n:05d}")
        entries.append(IndexEntry(sig, sig.image_id, n % 10))
    index = FeatureIndex(params, entries)
    packed = index.packed

    f1, f2 = rng.random((5, 41)), rng.random((5, 41))
    s1, s2 = rng.random(5), rng.random(5)
    r1 = [RegionDescriptor(f, s / s1.sum(), i) for i, (f, s) in enumerate(zip(f1, s1))]
    r2 = [RegionDescriptor(f, s / s2.sum(), i) for i, (f, s) in enumerate(zip(f2, s2))]

    print(f"extraction: {1000 * per_image:.1f} ms per 384x256 image "
          f"(~{per_image * 1000:.0f} s for 1000 images on one core)")
    print(f"{'backend':<8} {'irm 5x5 (us)':>13} {'scan (ms)':>10} {'full eval (s)':>14}")
    results = {}
    for name in matching.available_backends():
        irm_t = best_of(lambda: [matching.irm_distance(r1, r2, name) for _ in range(1000)], args.repeat) / 1000
        q = entries[0].signature
        matching.scan_distances(q, packed, name)  # warm caches
        scan_t = best_of(lambda: matching.scan_distances(q, packed, name), args.repeat)
        t0 = time.perf_counter()
        for e in entries:
            ranking(index, e.signature, name)
        eval_t = time.perf_counter() - t0
        results[name] = scan_t
        print(f"{name:<8} {1e6 * irm_t:13.1f} {1e3 * scan_t:10.2f} {eval_t:14.2f}")
    if len(results) == 2:
        print(f"scan speedup cython/python: {results['python'] / results['cython']:.1f}x")


if __name__ == "__main__":
    main()
