"""Command line interface: `sidebench run | augment | synth`."""

from __future__ import annotations

import argparse
import dataclasses
import sys
import zlib
from pathlib import Path

from .augment import (
    apply,
    paired_edges_transform,
    paired_gt_transform,
    paired_mask_transform,
    resolve_preset,
)
from .config import MetricConfig, load_config
from .core import CameraIntrinsics, PLANE_LABELS
from .io import (
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
from .report import emit, list_scenes, run_evaluation
from .synth import load_scene, write_scene


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    return args.handler(args)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sidebench",
        description="Evaluate predicted depth maps against ground truth.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="evaluate a prediction tree against a dataset")
    run.add_argument("--gt", required=True, type=Path, help="dataset directory")
    run.add_argument("--pred", required=True, type=Path, help="prediction directory")
    run.add_argument("--config", type=Path, help="key=value metric config file")
    run.add_argument("--out", required=True, type=Path, help="report output directory")
    run.set_defaults(handler=_cmd_run)

    aug = sub.add_parser("augment", help="write augmented copies of a dataset")
    aug.add_argument("--gt", required=True, type=Path, help="dataset directory")
    aug.add_argument("--preset", required=True, help="augmentation preset name")
    aug.add_argument("--seed", type=int, default=0, help="base seed for stochastic kinds")
    aug.add_argument("--out", required=True, type=Path, help="output directory")
    aug.set_defaults(handler=_cmd_augment)

    synth = sub.add_parser("synth", help="render a synthetic scene into a dataset")
    synth.add_argument("--scene", required=True, type=Path, help="JSON scene file")
    synth.add_argument("--scene-id", help="scene name (default: scene file stem)")
    synth.add_argument("--config", type=Path, help="key=value metric config file")
    synth.add_argument("--out", required=True, type=Path, help="dataset directory")
    synth.set_defaults(handler=_cmd_synth)
    return parser


def _load_cfg(path: Path | None) -> MetricConfig:
    return load_config(path) if path else MetricConfig()


def _cmd_run(args) -> int:
    report = run_evaluation(args.gt, args.pred, _load_cfg(args.config))
    paths = emit(report, args.out)
    for record in report.records:
        status = f"ERROR: {record.error}" if record.error else "ok"
        print(f"{record.scene_id}: {status}")
    print(f"wrote {paths['report']}, {paths['summary']}, {paths['errorband']}")
    if report.failed_scenes:
        print(f"{len(report.failed_scenes)} scene(s) failed", file=sys.stderr)
        return 1
    return 0


def _scene_seed(base: int, scene_id: str) -> int:
    # stable per-scene seed; hash() is randomized per process, crc32 is not
    return (base * 1000003 + zlib.crc32(scene_id.encode())) % 2 ** 63


def _cmd_augment(args) -> int:
    dataset = args.gt
    scene_ids = list_scenes(dataset)
    config = MetricConfig()
    variants = resolve_preset(args.preset, seed=args.seed)

    intrinsics = None
    if (dataset / "intrinsics.txt").is_file():
        intrinsics = load_intrinsics(dataset / "intrinsics.txt")

    for variant_name, base_aug in variants:
        out_root = args.out / variant_name
        for sub in ("rgb", "depth", "edges"):
            (out_root / sub).mkdir(parents=True, exist_ok=True)
        for scene_id in scene_ids:
            aug = dataclasses.replace(
                base_aug, seed=_scene_seed(base_aug.seed, scene_id))
            rgb_path = dataset / "rgb" / f"{scene_id}.png"
            if rgb_path.is_file():
                save_rgb(apply(load_rgb(rgb_path), aug),
                         out_root / "rgb" / f"{scene_id}.png")
            depth = load_depth(dataset / "depth" / f"{scene_id}.png", config)
            save_depth(paired_gt_transform(depth, aug),
                       out_root / "depth" / f"{scene_id}.png", config)
            edges_path = dataset / "edges" / f"{scene_id}.png"
            if edges_path.is_file():
                save_edges(paired_edges_transform(load_edges(edges_path), aug),
                           out_root / "edges" / f"{scene_id}.png")
            _copy_masks(dataset, out_root, scene_id, aug)
            if intrinsics is not None:
                save_intrinsics(_paired_intrinsics(intrinsics, aug, depth.shape),
                                out_root / "intrinsics.txt")
        print(f"wrote {out_root}")
    return 0


def _copy_masks(dataset: Path, out_root: Path, scene_id: str, aug) -> None:
    for label in ("invalid", "transparent"):
        path = dataset / "masks" / label / f"{scene_id}.png"
        if path.is_file():
            out_dir = out_root / "masks" / label
            out_dir.mkdir(parents=True, exist_ok=True)
            save_mask(paired_mask_transform(load_mask(path, label), aug),
                      out_dir / f"{scene_id}.png")
    for label in PLANE_LABELS:
        label_dir = dataset / "masks" / label
        if not label_dir.is_dir():
            continue
        for path in sorted(label_dir.glob(f"{scene_id}_*.png")):
            instance = int(path.stem[len(scene_id) + 1:])
            out_dir = out_root / "masks" / label
            out_dir.mkdir(parents=True, exist_ok=True)
            save_mask(paired_mask_transform(load_mask(path, label, instance), aug),
                      out_dir / path.name)


def _paired_intrinsics(intrinsics: CameraIntrinsics, aug,
                       shape: tuple[int, int]) -> CameraIntrinsics:
    """Mirror the principal point alongside a flipped image."""
    h, w = shape
    if aug.kind == "flip_h":
        return CameraIntrinsics(intrinsics.fx, intrinsics.fy,
                                (w - 1) - intrinsics.cx, intrinsics.cy)
    if aug.kind == "flip_v":
        return CameraIntrinsics(intrinsics.fx, intrinsics.fy,
                                intrinsics.cx, (h - 1) - intrinsics.cy)
    return intrinsics


def _cmd_synth(args) -> int:
    spec = load_scene(args.scene)
    scene_id = args.scene_id or args.scene.stem
    write_scene(scene_id, spec, args.out, _load_cfg(args.config))
    print(f"rendered scene {scene_id} into {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
