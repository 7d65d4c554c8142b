import json

import numpy as np

from autolabel3d.cli import _parse_grid, _parse_thresholds, main
from autolabel3d.pipeline import AnnotationRecord, AnnotationSet, ImageInfo, save_annotations
from conftest import random_box


def test_parse_thresholds():
    assert _parse_thresholds("0.05:0.05:0.50") == tuple(
        np.round(np.arange(0.05, 0.501, 0.05), 6).tolist()
    )
    assert _parse_thresholds("0.25:0.25:0.5") == (0.25, 0.5)


def test_parse_grid():
    g = _parse_grid("0.1:10:201")
    assert (g.s_min, g.s_max, g.n_points) == (0.1, 10.0, 201)


def test_synth_and_annotate_commands(tmp_path, capsys):
    out = tmp_path / "scene"
    assert main(["synth", "--seed", "1", "--objects", "2", "-o", str(out)]) == 0
    assert (out / "manifest.json").exists()
    scenes = tmp_path / "scenes"
    assert main([
        "annotate", str(out / "manifest.json"),
        "-o", str(out / "ann.json"), "--scenes-dir", str(scenes),
    ]) == 0
    assert (out / "ann.json").exists()
    assert (scenes / "synth1.npz").exists()
    captured = capsys.readouterr().out
    assert "annotated synth1" in captured


def test_eval_commands(tmp_path, capsys):
    rng = np.random.default_rng(0)
    from autolabel3d.geometry import CameraIntrinsics

    K = CameraIntrinsics(500, 500, 320, 240, 640, 480)
    boxes = [random_box(rng, center_span=3.0) for _ in range(6)]
    aset = AnnotationSet(
        images=[ImageInfo("im0", 640, 480, K)],
        records=[
            AnnotationRecord(f"im0/{i}", "im0", "chair", b, 1.0) for i, b in enumerate(boxes)
        ],
    )
    gt_path, det_path = tmp_path / "gt.json", tmp_path / "det.json"
    save_annotations(gt_path, aset)
    save_annotations(det_path, aset)

    json_out = tmp_path / "result.json"
    assert main(["eval", str(det_path), str(gt_path), "--json", str(json_out)]) == 0
    out = capsys.readouterr().out
    assert "mean" in out and "100.00" in out
    result = json.loads(json_out.read_text())
    assert result["ap"] == 100.0

    assert main(["eval-rel", str(det_path), str(gt_path), "--grid", "0.5:2:21"]) == 0
    assert "100.00" in capsys.readouterr().out


def test_iou_command(tmp_path, capsys):
    a = {"center_cam": [0, 0, 0], "dims": [1, 1, 1], "R": list(np.eye(3).ravel())}
    b = {"center_cam": [0.5, 0, 0], "dims": [1, 1, 1], "R": list(np.eye(3).ravel())}
    pa, pb = tmp_path / "a.json", tmp_path / "b.json"
    pa.write_text(json.dumps(a))
    pb.write_text(json.dumps(b))
    assert main(["iou", str(pa), str(pb)]) == 0
    assert capsys.readouterr().out.strip() == f"{1/3:.6f}"
