"""File format semantics: 16-bit PNG depth, PFM, masks, edges, RGB."""

import numpy as np
import pytest
from PIL import Image

from sidebench.config import MetricConfig
from sidebench.core import CameraIntrinsics, EdgeMap, SemanticMask
from sidebench.io import (
    load_depth,
    load_edges,
    load_intrinsics,
    load_mask,
    load_rgb,
    save_depth,
    save_edges,
    save_intrinsics,
    save_mask,
    save_rgb,
)

from conftest import make_depth

CFG = MetricConfig()  # max_depth 50


def write_raw_png(path, raw: np.ndarray):
    Image.fromarray(raw.astype(np.uint16)).save(path)


class TestDepthPng:
    def test_full_scale_decodes_to_max_depth(self, tmp_path):
        p = tmp_path / "d.png"
        write_raw_png(p, np.full((2, 2), 65535))
        d = load_depth(p, CFG)
        assert np.all(d.values == 50.0)

    def test_raw_zero_is_invalid(self, tmp_path):
        p = tmp_path / "d.png"
        write_raw_png(p, np.array([[0, 100]]))
        d = load_depth(p, CFG)
        assert not d.valid[0, 0] and d.valid[0, 1]

    def test_hand_computed_value(self, tmp_path):
        # 13107 / 65535 * 50 = 10.0
        p = tmp_path / "d.png"
        write_raw_png(p, np.array([[13107]]))
        assert load_depth(p, CFG).values[0, 0] == 10.0

    def test_round_trip_error_bound(self, tmp_path):
        # encode -> decode changes valid values by at most max_depth/65535/2
        rng = np.random.default_rng(3)
        step = CFG.max_depth / 65535
        values = rng.uniform(step, CFG.max_depth, size=(16, 16))
        d = make_depth(values)
        p = tmp_path / "d.png"
        save_depth(d, p, CFG)
        back = load_depth(p, CFG)
        assert back.valid.all()
        assert np.abs(back.values - values).max() <= step / 2 + 1e-12

    def test_validity_survives_round_trip(self, tmp_path):
        vals = np.array([[1.0, 0.0], [25.0, 50.0]])
        d = make_depth(vals)
        p = tmp_path / "d.png"
        save_depth(d, p, CFG)
        back = load_depth(p, CFG)
        assert back.valid.tolist() == [[True, False], [True, True]]

    def test_save_rejects_values_beyond_max_depth(self, tmp_path):
        with pytest.raises(ValueError):
            save_depth(make_depth([[60.0]]), tmp_path / "d.png", CFG)

    def test_wrong_bit_depth_rejected(self, tmp_path):
        p = tmp_path / "d.png"
        Image.fromarray(np.zeros((2, 2), dtype=np.uint8)).save(p)
        with pytest.raises(ValueError, match="16-bit"):
            load_depth(p, CFG)

    def test_unreadable_file(self, tmp_path):
        with pytest.raises(Exception):
            load_depth(tmp_path / "nope.png", CFG)

    def test_unknown_extension(self, tmp_path):
        with pytest.raises(ValueError):
            load_depth(tmp_path / "d.exr", CFG)


class TestDepthPfm:
    def test_round_trip_verbatim_float32(self, tmp_path):
        values = np.array([[1.5, 2.25], [10.0, 0.125]])
        p = tmp_path / "d.pfm"
        save_depth(make_depth(values), p, CFG)
        back = load_depth(p, CFG)
        assert np.array_equal(back.values, values)

    def test_nonpositive_and_nonfinite_become_invalid(self, tmp_path):
        p = tmp_path / "d.pfm"
        payload = np.array([[1.0, 0.0], [-3.0, np.inf]], dtype=np.float32)
        with open(p, "wb") as f:
            f.write(b"Pf\n2 2\n-1.0\n")
            f.write(np.flipud(payload).astype("<f4").tobytes())
        back = load_depth(p, CFG)
        assert back.valid.tolist() == [[True, False], [False, False]]

    def test_rejects_color_pfm(self, tmp_path):
        p = tmp_path / "d.pfm"
        with open(p, "wb") as f:
            f.write(b"PF\n1 1\n-1.0\n" + b"\0" * 12)
        with pytest.raises(ValueError):
            load_depth(p, CFG)


class TestMasksAndEdges:
    def test_all_zero_png_is_empty_mask(self, tmp_path):
        p = tmp_path / "m.png"
        Image.fromarray(np.zeros((4, 4), dtype=np.uint8)).save(p)
        assert load_mask(p, "wall").bits.sum() == 0

    def test_all_255_png_is_full_mask(self, tmp_path):
        p = tmp_path / "m.png"
        Image.fromarray(np.full((4, 4), 255, dtype=np.uint8)).save(p)
        assert load_mask(p, "wall").bits.all()

    def test_checkerboard_count(self, tmp_path):
        h, w = 5, 7
        board = (np.indices((h, w)).sum(axis=0) % 2 == 0).astype(np.uint8) * 255
        p = tmp_path / "m.png"
        Image.fromarray(board).save(p)
        assert load_mask(p, "floor").bits.sum() == int(np.ceil(h * w / 2))

    def test_edges_round_trip(self, tmp_path):
        bits = np.random.default_rng(5).random((8, 8)) < 0.3
        p = tmp_path / "e.png"
        save_edges(EdgeMap(bits), p)
        assert np.array_equal(load_edges(p).bits, bits)

    def test_mask_round_trip(self, tmp_path):
        bits = np.random.default_rng(6).random((8, 8)) < 0.5
        p = tmp_path / "m.png"
        save_mask(SemanticMask("table", 3, bits), p)
        assert np.array_equal(load_mask(p, "table", 3).bits, bits)


class TestRgb:
    def test_round_trip_bit_exact(self, tmp_path):
        raw = np.random.default_rng(7).integers(0, 256, size=(6, 6, 3), dtype=np.uint8)
        p = tmp_path / "img.png"
        Image.fromarray(raw).save(p)
        img = load_rgb(p)
        save_rgb(img, tmp_path / "img2.png")
        assert np.array_equal(np.asarray(Image.open(tmp_path / "img2.png")), raw)


class TestIntrinsics:
    def test_round_trip(self, tmp_path):
        k = CameraIntrinsics(fx=123.5, fy=99.25, cx=31.5, cy=23.5)
        p = tmp_path / "intrinsics.txt"
        save_intrinsics(k, p)
        assert load_intrinsics(p) == k

    def test_missing_key(self, tmp_path):
        p = tmp_path / "intrinsics.txt"
        p.write_text("fx=1\nfy=2\ncx=3\n")
        with pytest.raises(ValueError):
            load_intrinsics(p)
