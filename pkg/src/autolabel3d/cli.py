"""Command-line interface.

Subcommands: annotate, eval, eval-rel, synth, serve, iou.  Verbosity is
controlled by the LOG_LEVEL environment variable.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from .geometry import Box3D
from .metrics import (
    Detection,
    EvalResult,
    GroundTruth,
    ScaleGrid,
    evaluate_ap,
    evaluate_relative,
    iou3d,
)
from .pipeline import (
    AnnotateConfig,
    annotate_image,
    load_annotations,
    load_manifest,
    save_annotations,
    serve_review,
)
from .pipeline.synthetic import SynthConfig, generate_synthetic_scene, write_scene

log = logging.getLogger("autolabel3d")


def _parse_thresholds(text: str) -> tuple[float, ...]:
    """start:step:stop, inclusive of stop within half a step."""
    start, step, stop = (float(x) for x in text.split(":"))
    values = np.arange(start, stop + step / 2.0, step)
    return tuple(np.round(values, 6).tolist())


def _parse_grid(text: str) -> ScaleGrid:
    s_min, s_max, n = text.split(":")
    return ScaleGrid(float(s_min), float(s_max), int(n))


def _load_detections(path) -> list[Detection]:
    aset = load_annotations(path)
    return [
        Detection(box=r.box, category=r.category, score=r.score, image_id=r.image_id)
        for r in aset.records
        if r.box is not None and r.provenance != "rejected"
    ]


def _load_ground_truths(path) -> list[GroundTruth]:
    aset = load_annotations(path)
    return [
        GroundTruth(box=r.box, category=r.category, image_id=r.image_id,
                    ignore=r.ignore or r.provenance == "rejected")
        for r in aset.records
        if r.box is not None
    ]


def _format_table(rows: list[list[str]], header: list[str]) -> str:
    table = [header] + rows
    widths = [max(len(r[i]) for r in table) for i in range(len(header))]
    lines = []
    for ri, row in enumerate(table):
        lines.append("  ".join(cell.ljust(widths[ci]) for ci, cell in enumerate(row)))
        if ri == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines)


def _print_eval(result: EvalResult, label: str) -> None:
    print(f"== {label} ==")
    rows = [
        [cat, f"{v['ap']:.2f}", f"{v['ar']:.2f}"]
        for cat, v in sorted(result.per_category.items())
    ]
    rows.append(["mean", f"{result.ap:.2f}", f"{result.ar:.2f}"])
    print(_format_table(rows, ["category", "AP3D", "AR3D"]))
    thr_rows = [
        [f"{t:.2f}", f"{v['ap']:.2f}", f"{v['ar']:.2f}"]
        for t, v in sorted(result.per_threshold.items())
    ]
    print()
    print(_format_table(thr_rows, ["IoU thr", "AP3D", "AR3D"]))


def cmd_annotate(args) -> int:
    manifest = load_manifest(args.manifest)
    result = annotate_image(manifest, AnnotateConfig(seed=args.seed))
    save_annotations(args.output, result.annotation_set())
    n_auto = sum(1 for r in result.records if r.provenance == "auto")
    n_rej = sum(1 for r in result.records if r.provenance == "rejected")
    print(f"annotated {manifest.image_id}: {n_auto} boxes, {n_rej} rejected -> {args.output}")
    if args.scenes_dir and result.scene_points is not None:
        scenes = Path(args.scenes_dir)
        scenes.mkdir(parents=True, exist_ok=True)
        pts = result.scene_points.valid_points().astype(np.float32)
        np.savez_compressed(scenes / f"{manifest.image_id}.npz", points=pts)
        print(f"wrote scene point map ({len(pts)} points) to {args.scenes_dir}")
    return 0


def cmd_eval(args) -> int:
    dets = _load_detections(args.detections)
    gts = _load_ground_truths(args.ground_truth)
    thresholds = _parse_thresholds(args.thresholds)
    result = evaluate_ap(dets, gts, thresholds)
    _print_eval(result, "AP3D / AR3D")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(result.to_dict(), fh, indent=1)
    return 0


def cmd_eval_rel(args) -> int:
    dets = _load_detections(args.detections)
    gts = _load_ground_truths(args.ground_truth)
    thresholds = _parse_thresholds(args.thresholds)
    result = evaluate_relative(dets, gts, _parse_grid(args.grid), thresholds)
    _print_eval(result, "Relative-layout AP3D / AR3D")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(result.to_dict(), fh, indent=1)
    return 0


def cmd_synth(args) -> int:
    cfg = SynthConfig(
        n_objects=args.objects,
        noise_px=args.noise_px,
        outlier_rate=args.outlier_rate,
    )
    scene = generate_synthetic_scene(args.seed, cfg)
    manifest_path = write_scene(scene, args.output)
    print(f"synthetic scene with {len(scene.objects)} objects -> {manifest_path}")
    return 0


def cmd_serve(args) -> int:
    serve_review(args.annotations, args.scenes, args.addr, args.frontend)
    return 0


def _load_box(path) -> Box3D:
    with open(path) as fh:
        d = json.load(fh)
    return Box3D(
        center=np.asarray(d["center_cam"], dtype=np.float64),
        dims=np.asarray(d["dims"], dtype=np.float64),
        rotation=np.asarray(d["R"], dtype=np.float64).reshape(3, 3),
    )


def cmd_iou(args) -> int:
    value = iou3d(_load_box(args.box_a), _load_box(args.box_b))
    print(f"{value:.6f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="autolabel3d")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("annotate", help="run the annotation pipeline on a manifest")
    p.add_argument("manifest")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--scenes-dir", default=None,
                   help="directory for per-image scene point maps (.npz)")
    p.set_defaults(fn=cmd_annotate)

    p = sub.add_parser("eval", help="AP3D/AR3D of detections against ground truth")
    p.add_argument("detections")
    p.add_argument("ground_truth")
    p.add_argument("--thresholds", default="0.05:0.05:0.50")
    p.add_argument("--json", default=None, help="also write results as JSON")
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("eval-rel", help="scale-normalized relative-layout AP3D/AR3D")
    p.add_argument("detections")
    p.add_argument("ground_truth")
    p.add_argument("--grid", default="0.1:10:201", help="s_min:s_max:n_points")
    p.add_argument("--thresholds", default="0.05:0.05:0.50")
    p.add_argument("--json", default=None)
    p.set_defaults(fn=cmd_eval_rel)

    p = sub.add_parser("synth", help="generate a synthetic verification scene")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--objects", type=int, default=5)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--noise-px", type=float, default=0.0)
    p.add_argument("--outlier-rate", type=float, default=0.0)
    p.set_defaults(fn=cmd_synth)

    p = sub.add_parser("serve", help="run the human-review HTTP service")
    p.add_argument("--annotations", required=True)
    p.add_argument("--scenes", default=None)
    p.add_argument("--addr", default="127.0.0.1:8731")
    p.add_argument("--frontend", default=None, help="static frontend bundle to mount at /ui")
    p.set_defaults(fn=cmd_serve)

    p = sub.add_parser("iou", help="exact IoU of two boxes stored as JSON")
    p.add_argument("box_a")
    p.add_argument("box_b")
    p.set_defaults(fn=cmd_iou)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("LOG_LEVEL", "WARNING").upper())
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
