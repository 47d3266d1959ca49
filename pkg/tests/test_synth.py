"""Analytic renderer and perturbations.

The off-axis render check solves the ray-plane intersection as a 3x3 linear
system built from three points on the plane, independent of the closed-form
expression the renderer uses.
"""

import json
import math

import numpy as np
import pytest

from sidebench.config import MetricConfig
from sidebench.core import CameraIntrinsics
from sidebench.geometry import Plane, backproject, fit_plane
from sidebench.synth import (
    Region,
    SceneSpec,
    Surface,
    additive_offset,
    fronto_parallel_scene,
    load_scene,
    render,
    side_flip_about,
    sinusoidal_ripple,
    uniform_scale,
    write_scene,
)

CFG = MetricConfig()


def tilted_plane(degrees, offset=3.0, axis="x"):
    t = math.radians(degrees)
    c, s = math.cos(t), math.sin(t)
    if axis == "x":
        normal = np.array([0.0, -s, -c])
    else:
        normal = np.array([-s, 0.0, -c])
    return Plane.from_normal_offset(normal, offset)


class TestRender:
    def test_fronto_parallel_constant_depth(self):
        scene = render(fronto_parallel_scene(3.0, 16, 12))
        assert np.all(scene.depth.values == 3.0)
        assert not scene.edges.bits.any()

    def test_principal_pixel_depth_equals_distance(self):
        k = CameraIntrinsics(fx=40, fy=40, cx=8, cy=6)
        spec = SceneSpec(k, 17, 13, (Surface(tilted_plane(25.0), Region("all")),))
        scene = render(spec)
        # the principal ray hits the plane at z = offset / cos-term = 3/cos25 nope:
        # ray (0,0,1): z = -d / (eta . (0,0,1))
        plane = spec.surfaces[0].plane
        expected = -plane.offset / plane.normal[2]
        assert scene.depth.values[6, 8] == pytest.approx(expected, abs=1e-12)

    def test_off_axis_matches_linear_system_solver(self):
        k = CameraIntrinsics(fx=30, fy=30, cx=7.5, cy=5.5)
        plane = tilted_plane(18.0, offset=2.5, axis="y")
        scene = render(SceneSpec(k, 16, 12, (Surface(plane, Region("all")),)))

        # three non-collinear points on the plane
        eta, d = plane.normal, plane.offset
        basis = np.eye(3)[np.argsort(np.abs(eta))[:2]]
        u1 = np.cross(eta, basis[0])
        u2 = np.cross(eta, basis[1])
        p0 = -d * eta  # foot point
        a, b, c = p0, p0 + u1, p0 + u2

        rng = np.random.default_rng(0)
        for _ in range(20):
            u, v = rng.integers(0, 16), rng.integers(0, 12)
            ray = np.array([(u - k.cx) / k.fx, (v - k.cy) / k.fy, 1.0])
            # solve  t*ray = a + beta*(b-a) + gamma*(c-a)
            m = np.column_stack([ray, a - b, a - c])
            t, _, _ = np.linalg.solve(m, a)
            assert scene.depth.values[v, u] == pytest.approx(t, rel=1e-12)

    def test_two_half_frames_edge_at_boundary(self):
        k = CameraIntrinsics(fx=20, fy=20, cx=9.5, cy=5.5)
        c = 10
        near = Surface(Plane.from_normal_offset([0, 0, -1], 1.0),
                       Region("rect", x0=0, x1=c, y0=0, y1=12))
        far = Surface(Plane.from_normal_offset([0, 0, -1], 3.0), Region("rest"))
        scene = render(SceneSpec(k, 20, 12, (near, far)))
        cols = sorted(set(np.nonzero(scene.edges.bits)[1].tolist()))
        assert cols == [c - 1, c]  # both sides of the step

    def test_sub_threshold_step_produces_no_edge(self):
        k = CameraIntrinsics(fx=20, fy=20, cx=9.5, cy=5.5)
        near = Surface(Plane.from_normal_offset([0, 0, -1], 3.0),
                       Region("rect", x0=0, x1=10, y0=0, y1=12))
        far = Surface(Plane.from_normal_offset([0, 0, -1], 3.0 + 1e-9), Region("rest"))
        scene = render(SceneSpec(k, 20, 12, (near, far)))
        assert not scene.edges.bits.any()

    def test_masks_mark_surface_regions(self):
        k = CameraIntrinsics(fx=20, fy=20, cx=9.5, cy=5.5)
        near = Surface(Plane.from_normal_offset([0, 0, -1], 1.0),
                       Region("rect", x0=0, x1=10, y0=0, y1=12), label="table")
        far = Surface(Plane.from_normal_offset([0, 0, -1], 3.0), Region("rest"),
                      label="wall")
        scene = render(SceneSpec(k, 20, 12, (near, far)))
        by_label = {m.label: m for m in scene.masks}
        assert by_label["table"].bits.sum() == 120
        assert by_label["wall"].bits.sum() == 120

    def test_render_backproject_fit_recovers_plane(self):
        k = CameraIntrinsics(fx=128, fy=128, cx=15.5, cy=11.5)
        for degrees in (0.0, 10.0, 35.0):
            plane = tilted_plane(degrees)
            scene = render(SceneSpec(k, 32, 24, (Surface(plane, Region("all")),)))
            cloud = backproject(scene.depth, k, np.ones((24, 32), bool))
            fitted, _ = fit_plane(cloud, CFG)
            angle = math.degrees(math.acos(
                np.clip(abs(fitted.normal @ plane.normal), -1, 1)))
            assert angle < 1e-6
            assert abs(fitted.offset - plane.offset) < 1e-9

    def test_coverage_validation(self):
        k = CameraIntrinsics(fx=20, fy=20, cx=4.5, cy=4.5)
        partial = Surface(Plane.from_normal_offset([0, 0, -1], 2.0),
                          Region("rect", x0=0, x1=5, y0=0, y1=10))
        with pytest.raises(ValueError, match="exactly one"):
            render(SceneSpec(k, 10, 10, (partial,)))
        overlapping = Surface(Plane.from_normal_offset([0, 0, -1], 3.0), Region("all"))
        with pytest.raises(ValueError, match="exactly one"):
            render(SceneSpec(k, 10, 10, (partial, overlapping)))

    def test_plane_behind_camera_rejected(self):
        k = CameraIntrinsics(fx=20, fy=20, cx=4.5, cy=4.5)
        behind = Surface(Plane.from_normal_offset([0, 0, 1], 3.0), Region("all"))
        with pytest.raises(ValueError, match="behind"):
            render(SceneSpec(k, 10, 10, (behind,)))


class TestPerturbations:
    def test_uniform_scale_then_median_scale_recovers(self):
        from sidebench.geometry import median_scale

        depth = render(fronto_parallel_scene(3.0, 8, 8)).depth
        doubled = uniform_scale(depth, 2.0)
        scale, recovered = median_scale(doubled, depth, depth.valid)
        assert scale == 0.5
        assert np.array_equal(recovered.values, depth.values)

    def test_additive_offset_gives_exact_rms(self):
        from sidebench.metrics.standard import rms

        depth = render(fronto_parallel_scene(3.0, 8, 8)).depth
        shifted = additive_offset(depth, 0.5)
        assert rms(shifted, depth, depth.valid) == 0.5

    def test_additive_offset_rejects_nonpositive(self):
        depth = render(fronto_parallel_scene(1.0, 4, 4)).depth
        with pytest.raises(ValueError):
            additive_offset(depth, -1.0)

    def test_side_flip_exact_fraction(self):
        depth = render(fronto_parallel_scene(2.0, 20, 10)).depth  # 200 px
        flipped = side_flip_about(depth, 3.0, fraction=0.25, seed=5)
        changed = flipped.values != depth.values
        assert changed.sum() == 50
        assert np.all(flipped.values[changed] == 4.0)  # 2*3 - 2

    def test_side_flip_deterministic(self):
        depth = render(fronto_parallel_scene(2.0, 10, 10)).depth
        a = side_flip_about(depth, 3.0, 0.3, seed=8)
        b = side_flip_about(depth, 3.0, 0.3, seed=8)
        assert np.array_equal(a.values, b.values)

    def test_ripple_values_match_formula(self):
        depth = render(fronto_parallel_scene(3.0, 12, 4)).depth
        out = sinusoidal_ripple(depth, amplitude=0.1, wavelength=6.0)
        u = np.arange(12)
        expected = 3.0 + 0.1 * np.sin(2 * np.pi * u / 6.0)
        np.testing.assert_allclose(out.values[0], expected, atol=1e-12)


class TestSceneFiles:
    def test_json_round_trip(self, tmp_path):
        doc = {
            "width": 12, "height": 8,
            "intrinsics": {"fx": 24.0, "fy": 24.0, "cx": 5.5, "cy": 3.5},
            "surfaces": [
                {"normal": [0, 0, -1], "offset": 2.0,
                 "region": {"kind": "rect", "x0": 0, "x1": 6, "y0": 0, "y1": 8},
                 "label": "wall"},
                {"normal": [0, 0, -1], "offset": 4.0, "region": {"kind": "rest"}},
            ],
        }
        path = tmp_path / "scene.json"
        path.write_text(json.dumps(doc))
        spec = load_scene(path)
        assert spec.width == 12 and spec.height == 8
        assert spec.surfaces[0].label == "wall"
        assert spec.surfaces[1].region.kind == "rest"
        render(spec)  # must be renderable

    def test_write_scene_layout(self, tmp_path):
        spec = fronto_parallel_scene(3.0, 10, 8, label="wall")
        write_scene("s1", spec, tmp_path, CFG)
        assert (tmp_path / "depth" / "s1.png").is_file()
        assert (tmp_path / "rgb" / "s1.png").is_file()
        assert (tmp_path / "edges" / "s1.png").is_file()
        assert (tmp_path / "masks" / "wall" / "s1_0.png").is_file()
        assert (tmp_path / "intrinsics.txt").is_file()

    def test_unknown_region_kind(self):
        with pytest.raises(ValueError):
            Region("sphere")
