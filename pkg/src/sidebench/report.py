"""Batch evaluation: dataset ingestion, metric orchestration, report emission.

The dataset directory follows the layout ``rgb/<scene>.png``,
``depth/<scene>.png``, ``edges/<scene>.png``,
``masks/{invalid,transparent}/<scene>.png`` and
``masks/{wall,floor,table}/<scene>_<instance>.png``. The prediction directory
holds either flat ``<scene>.png`` depth maps or a dataset-style tree with
``depth/`` and optional ``edges/`` subdirectories; when a predicted edge map
is present it is used for the boundary metric, otherwise edges are extracted
from the predicted depth with the built-in detector.

Emitted files are deterministic: scenes are ordered by id, floats are
rendered with Python's shortest round-trip repr, and JSON keys are sorted, so
two runs over identical inputs produce byte-identical reports.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .config import MetricConfig
from .core import CameraIntrinsics, PLANE_LABELS, SemanticMask, valid_pixels
from .geometry import DegenerateGeometryError
from .io import load_depth, load_edges, load_intrinsics, load_mask
from .metrics.boundary import DbeResult, dbe, extract_depth_edges
from .metrics.dde import DdeResult, dde
from .metrics.planarity import PlanarityResult, aggregate_planarity, planarity_error
from .metrics.standard import BinnedErrors, GlobalMetrics, binned_errors, global_metrics

SUMMARY_COLUMNS = (
    "scene", "rel", "log10", "rms", "sigma1", "sigma2", "sigma3",
    "pe_plan", "pe_orie", "dbe_acc", "dbe_comp", "dde_0", "dde_minus", "dde_plus",
)
ERRORBAND_COLUMNS = ("bin_center", "count", "mean_rel", "std_rel", "rms")


@dataclass
class SceneRecord:
    scene_id: str
    error: str | None = None
    flags: list[str] = field(default_factory=list)
    metrics: GlobalMetrics | None = None
    binned: BinnedErrors | None = None
    planarity: list[PlanarityResult] = field(default_factory=list)
    dbe: DbeResult | None = None
    dde: DdeResult | None = None

    def summary_values(self) -> dict[str, float | None]:
        """Per-scene values for the summary columns."""
        out: dict[str, float | None] = dict.fromkeys(SUMMARY_COLUMNS[1:])
        if self.metrics is not None:
            out["rel"] = self.metrics.rel
            out["log10"] = self.metrics.log_rms
            out["rms"] = self.metrics.rms
            out["sigma1"], out["sigma2"], out["sigma3"] = self.metrics.delta
        if self.planarity:
            agg = aggregate_planarity(self.planarity)
            out["pe_plan"] = agg.combined_plan
            out["pe_orie"] = agg.combined_orie
        if self.dbe is not None:
            out["dbe_acc"] = self.dbe.eps_acc
            out["dbe_comp"] = self.dbe.eps_comp
        if self.dde is not None:
            out["dde_0"] = self.dde.eps0
            out["dde_minus"] = self.dde.eps_minus
            out["dde_plus"] = self.dde.eps_plus
        return out


@dataclass
class MetricReport:
    version: str
    config: MetricConfig
    records: list[SceneRecord]

    @property
    def failed_scenes(self) -> list[str]:
        return [r.scene_id for r in self.records if r.error is not None]

    def aggregate(self) -> dict:
        """Recompute the aggregate block from the per-scene records."""
        means: dict[str, float | None] = {}
        for column in SUMMARY_COLUMNS[1:]:
            values = [r.summary_values()[column] for r in self.records]
            present = [v for v in values if v is not None]
            means[column] = float(np.mean(present)) if present else None
        srel_values = [r.metrics.srel for r in self.records if r.metrics is not None]
        means["srel"] = float(np.mean(srel_values)) if srel_values else None

        all_instances = [p for r in self.records for p in r.planarity]
        per_label = {}
        if all_instances:
            agg = aggregate_planarity(all_instances)
            per_label = {label: {"plan": plan, "orie": orie}
                         for label, (plan, orie) in agg.per_label.items()}

        return {
            "scene_count": len(self.records),
            "failed_scenes": self.failed_scenes,
            "means": means,
            "planarity_per_label": per_label,
            "errorband": combine_errorbands(
                [r.binned for r in self.records if r.binned is not None]),
        }


def combine_errorbands(binned: list[BinnedErrors]) -> list[dict]:
    """Merge per-scene depth-bin statistics into dataset-level rows.

    Means combine count-weighted; standard deviations recombine through the
    second moment, so the merged rows equal a recomputation over the union of
    pixels.
    """
    if not binned:
        return []
    width = binned[0].bin_width
    n_bins = max(len(b.bins) for b in binned)
    rows = []
    for i in range(n_bins):
        count = 0
        sum_rel = 0.0
        sum_rel_sq = 0.0
        sum_sq = 0.0
        for b in binned:
            if i >= len(b.bins) or b.bins[i].count == 0:
                continue
            s = b.bins[i]
            count += s.count
            sum_rel += s.count * s.mean_rel
            sum_rel_sq += s.count * (s.std_rel ** 2 + s.mean_rel ** 2)
            sum_sq += s.count * s.rms ** 2
        if count == 0:
            rows.append({"bin_center": (i + 0.5) * width, "count": 0,
                         "mean_rel": None, "std_rel": None, "rms": None})
            continue
        mean_rel = sum_rel / count
        rows.append({
            "bin_center": (i + 0.5) * width,
            "count": count,
            "mean_rel": mean_rel,
            "std_rel": float(np.sqrt(max(sum_rel_sq / count - mean_rel ** 2, 0.0))),
            "rms": float(np.sqrt(sum_sq / count)),
        })
    return rows


# ---------------------------------------------------------------------------
# dataset scanning and per-scene evaluation
# ---------------------------------------------------------------------------

def list_scenes(dataset_dir: Path) -> list[str]:
    depth_dir = dataset_dir / "depth"
    if not depth_dir.is_dir():
        raise FileNotFoundError(f"no depth/ directory under {dataset_dir}")
    return sorted({p.stem for p in depth_dir.iterdir()
                   if p.suffix.lower() in (".png", ".pfm")})


def _find_depth(directory: Path, scene_id: str) -> Path | None:
    for suffix in (".png", ".pfm"):
        candidate = directory / f"{scene_id}{suffix}"
        if candidate.is_file():
            return candidate
    return None


def _load_exclusion(dataset_dir: Path, scene_id: str) -> SemanticMask | None:
    bits = None
    for label in ("invalid", "transparent"):
        path = dataset_dir / "masks" / label / f"{scene_id}.png"
        if path.is_file():
            mask = load_mask(path, label)
            bits = mask.bits if bits is None else (bits | mask.bits)
    return None if bits is None else SemanticMask("invalid", 0, bits)


def _load_plane_masks(dataset_dir: Path, scene_id: str) -> list[SemanticMask]:
    masks = []
    for label in PLANE_LABELS:
        label_dir = dataset_dir / "masks" / label
        if not label_dir.is_dir():
            continue
        for path in sorted(label_dir.glob(f"{scene_id}_*.png")):
            suffix = path.stem[len(scene_id) + 1:]
            if not suffix.isdigit():  # mask of another scene sharing the prefix
                continue
            masks.append(load_mask(path, label, int(suffix)))
    return masks


def evaluate_scene(dataset_dir: Path, pred_dir: Path, scene_id: str,
                   config: MetricConfig) -> SceneRecord:
    record = SceneRecord(scene_id=scene_id)
    try:
        gt = load_depth(_find_depth(dataset_dir / "depth", scene_id), config)
        pred_path = _find_depth(pred_dir, scene_id) or _find_depth(
            pred_dir / "depth", scene_id)
        if pred_path is None:
            raise FileNotFoundError(f"missing prediction for scene {scene_id}")
        pred = load_depth(pred_path, config)

        exclusion = _load_exclusion(dataset_dir, scene_id)
        valid = valid_pixels(pred, gt, exclusion)
        if not valid.any():
            raise ValueError("no jointly valid pixels")

        record.metrics = global_metrics(pred, gt, valid, config)
        record.binned = binned_errors(pred, gt, valid, config)
        record.dde = dde(pred, gt, valid, config)

        plane_masks = _load_plane_masks(dataset_dir, scene_id)
        if not plane_masks:
            record.flags.append("planarity skipped: no plane masks")
        intrinsics_path = dataset_dir / "intrinsics.txt"
        if intrinsics_path.is_file():
            intrinsics = load_intrinsics(intrinsics_path)
        else:
            intrinsics = _default_intrinsics(*gt.shape)
        for mask in plane_masks:
            try:
                record.planarity.append(
                    planarity_error(pred, gt, mask, intrinsics, config))
            except DegenerateGeometryError as exc:
                record.flags.append(
                    f"planarity skipped for {mask.label}/{mask.instance_id}: {exc}")

        gt_edges_path = dataset_dir / "edges" / f"{scene_id}.png"
        if not gt_edges_path.is_file():
            record.flags.append("dbe skipped: no ground truth edge map")
        else:
            gt_edges = load_edges(gt_edges_path)
            pred_edges_path = pred_dir / "edges" / f"{scene_id}.png"
            if pred_edges_path.is_file():
                pred_edges = load_edges(pred_edges_path)
            else:
                pred_edges = extract_depth_edges(
                    pred, config.edge_high_thresh, config.edge_low_thresh)
            if not pred_edges.bits.any():
                record.flags.append("dbe skipped: empty predicted edge map")
            elif not gt_edges.bits.any():
                record.flags.append("dbe skipped: empty ground truth edge map")
            else:
                record.dbe = dbe(pred_edges, gt_edges, config)
    except Exception as exc:  # per-scene failure; the run continues
        record.error = f"{type(exc).__name__}: {exc}"
    return record


def _default_intrinsics(height: int, width: int) -> CameraIntrinsics:
    """Pinhole model used when the dataset carries no calibration file."""
    return CameraIntrinsics(fx=float(width), fy=float(width),
                            cx=(width - 1) / 2.0, cy=(height - 1) / 2.0)


def _thread_count() -> int:
    cap = os.environ.get("SIDEBENCH_THREADS")
    if cap is not None:
        return max(1, int(cap))
    return max(1, os.cpu_count() or 1)


def run_evaluation(dataset_dir: str | Path, pred_dir: str | Path,
                   config: MetricConfig | None = None) -> MetricReport:
    """Evaluate every scene of a dataset against its predictions.

    Scenes are processed independently (possibly concurrently, capped by the
    SIDEBENCH_THREADS environment variable); per-scene failures are recorded
    and do not abort the run. Output ordering is by scene id regardless of
    scheduling.
    """
    dataset_dir, pred_dir = Path(dataset_dir), Path(pred_dir)
    config = config or MetricConfig()
    scene_ids = list_scenes(dataset_dir)
    threads = _thread_count()
    if threads == 1 or len(scene_ids) <= 1:
        records = [evaluate_scene(dataset_dir, pred_dir, sid, config)
                   for sid in scene_ids]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(
                lambda sid: evaluate_scene(dataset_dir, pred_dir, sid, config),
                scene_ids))
    records.sort(key=lambda r: r.scene_id)
    return MetricReport(version=__version__, config=config, records=records)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value)
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def report_to_jsonable(report: MetricReport) -> dict:
    scenes = []
    for r in report.records:
        scenes.append({
            "scene_id": r.scene_id,
            "error": r.error,
            "flags": list(r.flags),
            "global": None if r.metrics is None else {
                "rel": r.metrics.rel,
                "srel": r.metrics.srel,
                "rms": r.metrics.rms,
                "log_rms": r.metrics.log_rms,
                "delta": list(r.metrics.delta),
            },
            "binned": None if r.binned is None else {
                "bin_width": r.binned.bin_width,
                "bins": [{"count": b.count, "mean_rel": b.mean_rel,
                          "std_rel": b.std_rel, "mean_abs": b.mean_abs,
                          "rms": b.rms} for b in r.binned.bins],
            },
            "planarity": [{
                "label": p.label,
                "instance_id": p.instance_id,
                "eps_plan": p.eps_plan,
                "eps_orie": p.eps_orie,
                "point_count": p.point_count,
                "pred_plane": {"normal": p.pred_plane.normal.tolist(),
                               "offset": p.pred_plane.offset},
                "gt_plane": {"normal": p.gt_plane.normal.tolist(),
                             "offset": p.gt_plane.offset},
            } for p in r.planarity],
            "dbe": None if r.dbe is None else {
                "eps_acc": r.dbe.eps_acc,
                "eps_comp": r.dbe.eps_comp,
                "counted_pred_edges": r.dbe.counted_pred_edges,
                "counted_gt_edges": r.dbe.counted_gt_edges,
                "acc_all_truncated": r.dbe.acc_all_truncated,
                "comp_all_truncated": r.dbe.comp_all_truncated,
            },
            "dde": None if r.dde is None else {
                "eps0": r.dde.eps0,
                "eps_plus": r.dde.eps_plus,
                "eps_minus": r.dde.eps_minus,
                "ref_depth": r.dde.ref_depth,
                "n_plus": r.dde.n_plus,
                "n_minus": r.dde.n_minus,
                "total": r.dde.total,
            },
        })
    return {
        "version": report.version,
        "config": report.config.as_dict(),
        "scenes": scenes,
        "aggregate": report.aggregate(),
    }


def dump_json(data: dict) -> str:
    """Canonical JSON: sorted keys, two-space indent, shortest-repr floats."""
    return json.dumps(data, sort_keys=True, indent=2, allow_nan=False) + "\n"


def emit(report: MetricReport, out_dir: str | Path) -> dict[str, Path]:
    """Write report.json, summary.csv and errorband.csv into out_dir."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {
        "report": out_dir / "report.json",
        "summary": out_dir / "summary.csv",
        "errorband": out_dir / "errorband.csv",
    }

    paths["report"].write_text(dump_json(report_to_jsonable(report)))

    lines = [",".join(SUMMARY_COLUMNS)]
    for r in report.records:
        values = r.summary_values()
        lines.append(",".join(
            [r.scene_id] + [_fmt(values[c]) for c in SUMMARY_COLUMNS[1:]]))
    paths["summary"].write_text("\n".join(lines) + "\n")

    lines = [",".join(ERRORBAND_COLUMNS)]
    for row in report.aggregate()["errorband"]:
        lines.append(",".join(_fmt(row[c]) for c in ERRORBAND_COLUMNS))
    paths["errorband"].write_text("\n".join(lines) + "\n")
    return paths
