import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from PIL import Image

from cbir import imaging
from cbir.errors import CorruptImage, InvalidParameter, UnsupportedFormat
from cbir.imaging import Point


def step_image(h=16, w=16, at=8):
    img = np.zeros((h, w), dtype=np.uint8)
    img[:, at:] = 255
    return img


masks16 = arrays(np.bool_, (16, 16))


class TestDecode:
    def test_png_round_trip(self, tmp_path):
        path = tmp_path / "red.png"
        Image.fromarray(np.full((2, 2, 3), (255, 0, 0), dtype=np.uint8)).save(path)
        img = imaging.decode_image(path)
        assert img.shape == (2, 2, 3)
        assert (img == [255, 0, 0]).all()

    def test_grayscale_source_is_replicated(self, tmp_path):
        path = tmp_path / "g.png"
        Image.fromarray(np.array([[10, 200]], dtype=np.uint8), mode="L").save(path)
        img = imaging.decode_image(path)
        assert img.tolist() == [[[10, 10, 10], [200, 200, 200]]]

    def test_jpeg_dimensions(self, tmp_path):
        path = tmp_path / "x.jpg"
        Image.fromarray(np.zeros((256, 384, 3), dtype=np.uint8)).save(path, quality=90)
        img = imaging.decode_image(path)
        assert (img.shape[1], img.shape[0]) == (384, 256)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            imaging.decode_image(tmp_path / "nope.png")

    def test_unsupported(self, tmp_path):
        path = tmp_path / "notes.png"
        path.write_text("definitely not an image")
        with pytest.raises(UnsupportedFormat):
            imaging.decode_image(path)

    def test_truncated_jpeg(self, tmp_path):
        path = tmp_path / "t.jpg"
        rng = np.random.default_rng(0)
        Image.fromarray(rng.integers(0, 256, (64, 64, 3), dtype=np.uint8)).save(path)
        data = path.read_bytes()
        path.write_bytes(data[: len(data) // 2])
        with pytest.raises(CorruptImage):
            imaging.decode_image(path)


class TestGrayscale:
    @pytest.mark.parametrize("rgb,expected", [((100, 100, 100), 100), ((255, 0, 0), 76), ((0, 255, 0), 150)])
    def test_luma(self, rgb, expected):
        assert imaging.to_grayscale(np.array([[rgb]], dtype=np.uint8))[0, 0] == expected

    def test_achromatic_fixed_points(self):
        g = np.arange(256, dtype=np.uint8)
        rgb = np.repeat(g[None, :, None], 3, axis=2)
        assert np.array_equal(imaging.to_grayscale(rgb)[0], g)


class TestBlur:
    def test_constant_preserved(self):
        img = np.full((20, 30), 77, dtype=np.uint8)
        for sigma in (0.5, 1.0, 2.0, 5.0):
            assert (imaging.gaussian_blur(img, sigma) == 77).all()

    def test_impulse_matches_direct_kernel(self):
        img = np.zeros((15, 15), dtype=np.uint8)
        img[7, 7] = 255
        weights = [math.exp(-x * x / 2.0) for x in range(-3, 4)]
        k0 = weights[3] / sum(weights)
        expected = round(255 * k0 * k0)
        assert expected == 41
        assert imaging.gaussian_blur(img, 1.0)[7, 7] == expected

    @pytest.mark.parametrize("sigma", [0, -1.0])
    def test_invalid_sigma(self, sigma):
        with pytest.raises(InvalidParameter):
            imaging.gaussian_blur(np.zeros((4, 4), dtype=np.uint8), sigma)


class TestSobel:
    def test_constant_is_empty(self):
        assert not imaging.sobel_edges(np.full((8, 8), 9, dtype=np.uint8), 0.1).any()

    def test_step(self):
        mask = imaging.sobel_edges(step_image(), 0.1)
        assert mask[:, 7].all() and mask[:, 8].all()
        mask[:, 7:9] = False
        assert not mask.any()

    @pytest.mark.parametrize("tau", [0.0, 1.0, 1.5])
    def test_threshold_bounds(self, tau):
        with pytest.raises(InvalidParameter):
            imaging.sobel_edges(step_image(), tau)

    @settings(max_examples=30, deadline=None)
    @given(arrays(np.uint8, (12, 12)), st.floats(0.01, 0.98), st.floats(0.01, 0.98))
    def test_monotone_in_threshold(self, img, t1, t2):
        lo, hi = sorted((t1, t2))
        assert not (imaging.sobel_edges(img, hi) & ~imaging.sobel_edges(img, lo)).any()


class TestCanny:
    def test_constant_is_empty(self):
        assert not imaging.canny_edges(np.full((32, 32), 120, dtype=np.uint8)).any()

    def test_step_gives_single_column(self):
        img = step_image(40, 40, 20)
        mask = imaging.canny_edges(img, sigma=2.0)
        cols = np.nonzero(mask.any(axis=0))[0]
        assert len(cols) == 1 and abs(cols[0] - 19.5) <= 1
        # one pixel wide and connected over the full height
        assert mask.sum(axis=1).tolist() == [1] * 40

    @pytest.mark.parametrize("kw", [{"low_ratio": 0.0}, {"low_ratio": 1.0}, {"high_pct": 0.0}, {"high_pct": 100.0}])
    def test_invalid(self, kw):
        with pytest.raises(InvalidParameter):
            imaging.canny_edges(step_image(), **kw)


class TestDilate:
    def test_empty(self):
        assert not imaging.dilate_line_se(np.zeros((11, 11), bool)).any()

    def test_single_pixel(self):
        m = np.zeros((11, 11), bool)
        m[5, 5] = True
        got = {tuple(p) for p in np.argwhere(imaging.dilate_line_se(m))}
        assert got == {(r, c) for r in (4, 5, 6) for c in (4, 5, 6)}

    def test_full(self):
        assert imaging.dilate_line_se(np.ones((7, 5), bool)).all()

    def test_corner_pixel_clips(self):
        m = np.zeros((5, 5), bool)
        m[0, 0] = True
        got = {tuple(p) for p in np.argwhere(imaging.dilate_line_se(m))}
        assert got == {(0, 0), (0, 1), (1, 0), (1, 1)}

    @given(masks16, masks16)
    def test_extensive_and_monotone(self, a, b):
        da = imaging.dilate_line_se(a)
        assert not (a & ~da).any()
        small, big = a & b, a
        assert not (imaging.dilate_line_se(small) & ~imaging.dilate_line_se(big)).any()


class TestFillHoles:
    def ring(self, gap=False):
        m = np.zeros((7, 7), bool)
        m[1, 1:6] = m[5, 1:6] = m[1:6, 1] = m[1:6, 5] = True
        if gap:
            m[1, 3] = False
        return m

    def test_closed_ring_fills(self):
        out = imaging.fill_holes(self.ring())
        assert out[1:6, 1:6].all()
        assert out.sum() == 25

    def test_ring_with_gap_unchanged(self):
        m = self.ring(gap=True)
        assert np.array_equal(imaging.fill_holes(m), m)

    def test_diagonal_leak_is_closed(self):
        # background touching only diagonally is a hole under 4-connectivity
        m = np.ones((5, 5), bool)
        m[2, 2] = False
        m[1, 1] = False
        m[0, 0] = False
        assert imaging.fill_holes(m)[1:4, 1:4].all()

    def test_empty(self):
        assert not imaging.fill_holes(np.zeros((6, 6), bool)).any()

    @given(masks16)
    def test_idempotent_and_extensive(self, m):
        f = imaging.fill_holes(m)
        assert np.array_equal(imaging.fill_holes(f), f)
        assert not (m & ~f).any()


class TestCentroid:
    def test_single(self):
        m = np.zeros((30, 30), bool)
        m[20, 10] = True
        assert imaging.centroid(m) == Point(10.0, 20.0)

    def test_midpoint(self):
        m = np.zeros((5, 11), bool)
        m[0, 0] = m[0, 10] = True
        assert imaging.centroid(m) == Point(5.0, 0.0)

    def test_empty(self):
        assert imaging.centroid(np.zeros((4, 4), bool)) is None

    @given(arrays(np.bool_, (9, 14)))
    def test_point_symmetric_mask(self, half):
        m = half | half[::-1, ::-1]
        c = imaging.centroid(m)
        if m.any():
            assert abs(c.x - 6.5) < 1e-9 and abs(c.y - 4.0) < 1e-9
