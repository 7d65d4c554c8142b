"""Detection evaluation: AP/AR over 3D-IoU thresholds and the
scale-normalized relative-layout variant.

Matching is COCO-style greedy per image and category: detections in
descending score order each claim the unmatched ground truth of highest
IoU above the threshold.  AP uses the 101-point interpolated
precision-recall integral; AR is the mean maximum recall.  Reported
values are percentages.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from ..errors import EmptyPairs
from ..geometry import Box3D
from .iou import iou3d, scale_box

DEFAULT_THRESHOLDS = tuple(np.round(np.arange(0.05, 0.501, 0.05), 2).tolist())
RECALL_POINTS = np.linspace(0.0, 1.0, 101)


@dataclass(frozen=True)
class Detection:
    box: Box3D
    category: str
    score: float
    image_id: str

    def __post_init__(self):
        if not 0.0 <= self.score <= 1.0:
            raise ValueError("score must be in [0, 1]")


@dataclass(frozen=True)
class GroundTruth:
    box: Box3D
    category: str
    image_id: str
    ignore: bool = False


@dataclass(frozen=True)
class EvalResult:
    ap: float
    ar: float
    per_category: dict[str, dict[str, float]]
    per_threshold: dict[float, dict[str, float]]
    thresholds: tuple[float, ...]
    empty: bool = False

    def ap_at(self, threshold: float) -> float:
        return self.per_threshold[threshold]["ap"]

    def to_dict(self) -> dict:
        return {
            "ap": self.ap,
            "ar": self.ar,
            "per_category": self.per_category,
            "per_threshold": {str(t): v for t, v in self.per_threshold.items()},
            "thresholds": list(self.thresholds),
            "empty": self.empty,
        }


@dataclass(frozen=True)
class ScaleGrid:
    """Log-uniform search grid for the global scale factor."""

    s_min: float = 0.1
    s_max: float = 10.0
    n_points: int = 201

    def __post_init__(self):
        if self.s_min <= 0 or self.s_max < self.s_min or self.n_points < 1:
            raise ValueError("invalid scale grid")

    def values(self) -> np.ndarray:
        return np.logspace(np.log10(self.s_min), np.log10(self.s_max), self.n_points)


def _greedy_match(ious: np.ndarray, gt_ignore: np.ndarray, threshold: float):
    """Label each detection row of an (n_det, n_gt) IoU matrix.

    Returns per-detection flags: 1 = TP, 0 = FP, -1 = matched to an
    ignored ground truth (excluded from the PR curve).
    """
    n_det, n_gt = ious.shape
    taken = np.zeros(n_gt, dtype=bool)
    labels = np.zeros(n_det, dtype=np.int8)
    for d in range(n_det):
        best_j = -1
        best_iou = threshold
        for j in range(n_gt):
            if taken[j] or gt_ignore[j]:
                continue
            if ious[d, j] >= best_iou:
                best_iou = ious[d, j]
                best_j = j
        if best_j >= 0:
            taken[best_j] = True
            labels[d] = 1
            continue
        ignore_hit = any(
            gt_ignore[j] and ious[d, j] >= threshold for j in range(n_gt)
        )
        labels[d] = -1 if ignore_hit else 0
    return labels


def _interpolated_ap(recall: np.ndarray, precision: np.ndarray) -> float:
    """101-point interpolated AP in [0, 1]."""
    if recall.size == 0:
        return 0.0
    # monotone precision envelope from the right
    env = np.maximum.accumulate(precision[::-1])[::-1]
    idx = np.searchsorted(recall, RECALL_POINTS, side="left")
    q = np.where(idx < len(env), env[np.minimum(idx, len(env) - 1)], 0.0)
    return float(q.mean())


def evaluate_ap(
    dets: list[Detection],
    gts: list[GroundTruth],
    thresholds=DEFAULT_THRESHOLDS,
) -> EvalResult:
    """AP/AR per category and IoU threshold, averaged and scaled to [0, 100]."""
    thresholds = tuple(thresholds)
    categories = sorted({g.category for g in gts if not g.ignore})
    if not categories or not thresholds:
        zero = {t: {"ap": 0.0, "ar": 0.0} for t in thresholds}
        return EvalResult(0.0, 0.0, {}, zero, thresholds, empty=True)

    gts_by_key = defaultdict(list)
    for g in gts:
        gts_by_key[(g.category, g.image_id)].append(g)
    dets_by_cat = defaultdict(list)
    for i, d in enumerate(dets):
        dets_by_cat[d.category].append((i, d))

    per_category = {}
    ap_matrix = np.zeros((len(categories), len(thresholds)))
    ar_matrix = np.zeros((len(categories), len(thresholds)))
    for ci, cat in enumerate(categories):
        cat_dets = dets_by_cat.get(cat, [])
        n_pos = sum(
            1 for key, gs in gts_by_key.items() if key[0] == cat
            for g in gs if not g.ignore
        )
        # per-image greedy matching over a shared IoU matrix
        by_image = defaultdict(list)
        for orig_idx, d in cat_dets:
            by_image[d.image_id].append((orig_idx, d))
        labels = {t: {} for t in thresholds}  # orig det index -> flag
        for image_id, group in by_image.items():
            group.sort(key=lambda item: (-item[1].score, item[0]))
            img_gts = gts_by_key.get((cat, image_id), [])
            ious = np.array(
                [[iou3d(d.box, g.box) for g in img_gts] for _, d in group]
            ).reshape(len(group), len(img_gts))
            gt_ignore = np.array([g.ignore for g in img_gts], dtype=bool)
            for t in thresholds:
                flags = _greedy_match(ious, gt_ignore, t)
                for (orig_idx, _), flag in zip(group, flags):
                    labels[t][orig_idx] = flag

        order = sorted(cat_dets, key=lambda item: (-item[1].score, item[0]))
        cat_result = {}
        for ti, t in enumerate(thresholds):
            flags = np.array([labels[t][i] for i, _ in order], dtype=np.int8)
            flags = flags[flags != -1]
            tp = np.cumsum(flags == 1)
            fp = np.cumsum(flags == 0)
            if n_pos == 0:
                ap = ar = 0.0
            else:
                recall = tp / n_pos
                precision = tp / np.maximum(tp + fp, 1)
                ap = _interpolated_ap(recall, precision)
                ar = float(recall[-1]) if recall.size else 0.0
            ap_matrix[ci, ti] = ap
            ar_matrix[ci, ti] = ar
        per_category[cat] = {
            "ap": float(ap_matrix[ci].mean() * 100.0),
            "ar": float(ar_matrix[ci].mean() * 100.0),
        }

    per_threshold = {
        t: {
            "ap": float(ap_matrix[:, ti].mean() * 100.0),
            "ar": float(ar_matrix[:, ti].mean() * 100.0),
        }
        for ti, t in enumerate(thresholds)
    }
    return EvalResult(
        ap=float(ap_matrix.mean() * 100.0),
        ar=float(ar_matrix.mean() * 100.0),
        per_category=per_category,
        per_threshold=per_threshold,
        thresholds=thresholds,
    )


def fit_global_scale(
    pairs: list[tuple[Box3D, Box3D]], grid: ScaleGrid | None = None
) -> float:
    """Grid-search the scale maximizing mean IoU of (scaled pred, gt) pairs.

    The grid is log-uniform; ties resolve to the smaller scale.
    """
    grid = grid or ScaleGrid()
    if not pairs:
        raise EmptyPairs("need at least one box pair")
    best_s = None
    best_mean = -1.0
    for s in grid.values():
        total = 0.0
        for pred, gt in pairs:
            total += iou3d(scale_box(pred, float(s)), gt)
        mean = total / len(pairs)
        if mean > best_mean:
            best_mean = mean
            best_s = float(s)
    return best_s


def _match_pairs_by_center(dets: list[Detection], gts: list[GroundTruth]):
    """Greedy one-to-one det/gt pairing per image and category on center
    distance normalized by the GT box diagonal."""
    pairs = []
    groups = defaultdict(lambda: ([], []))
    for d in dets:
        groups[(d.image_id, d.category)][0].append(d)
    for g in gts:
        if not g.ignore:
            groups[(g.image_id, g.category)][1].append(g)
    for (image_id, cat), (ds, gs) in sorted(groups.items()):
        if not ds or not gs:
            continue
        dist = np.empty((len(ds), len(gs)))
        for i, d in enumerate(ds):
            for j, g in enumerate(gs):
                diag = float(np.linalg.norm(g.box.dims))
                dist[i, j] = np.linalg.norm(d.box.center - g.box.center) / max(diag, 1e-12)
        used_d = set()
        used_g = set()
        flat = [(dist[i, j], i, j) for i in range(len(ds)) for j in range(len(gs))]
        for _, i, j in sorted(flat):
            if i in used_d or j in used_g:
                continue
            used_d.add(i)
            used_g.add(j)
            pairs.append((ds[i].box, gs[j].box))
    return pairs


def evaluate_relative(
    dets: list[Detection],
    gts: list[GroundTruth],
    grid: ScaleGrid | None = None,
    thresholds=DEFAULT_THRESHOLDS,
) -> EvalResult:
    """AP/AR after removing a single global scale from all detections.

    Detections are paired with ground truth by normalized center distance,
    one joint scale is fit over all pairs, applied to every detection, and
    standard AP evaluation runs on the result.
    """
    grid = grid or ScaleGrid()
    pairs = _match_pairs_by_center(dets, gts)
    s_star = fit_global_scale(pairs, grid) if pairs else 1.0
    scaled = [
        Detection(scale_box(d.box, s_star), d.category, d.score, d.image_id)
        for d in dets
    ]
    return evaluate_ap(scaled, gts, thresholds)
