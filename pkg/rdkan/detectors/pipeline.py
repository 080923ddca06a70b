""" Segment detection pipeline: sweep -> classify -> recenter -> IoU suppression
"""
# ----------------------------------------------------------------------------------------
#  Imports
# ----------------------------------------------------------------------------------------
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
import pandas as pd
from scipy import ndimage

from ..common import write_json
from ..exceptions import ConfigError
from ..radar_sim import BinBox
from ..rdmap import SEGMENT_SHAPE, histogram_features_batch, interior_limits, segment_windows
from .kan_model import KanModel, forward
from .symbolic import DecisionRule, eval_rule

# ----------------------------------------------------------------------------------------
#  Some PreDefined Static Entries
# ----------------------------------------------------------------------------------------
NMS_THRESHOLD = 0.40
RECENTER_ITERATIONS = 5
MERGE_LEVEL_DB = 20.0               # cells this close to a peak count as its response
ROWS_PER_CHUNK = 16

# ----------------------------------------------------------------------------------------
#  Detection
# ----------------------------------------------------------------------------------------
@dataclass(frozen=True)
class SegmentDetection():
	center: tuple                   # (range_bin, doppler_bin)
	bbox: BinBox
	peak_power: float
	margin: float
	range_m: float = float('nan')
	velocity_mps: float = float('nan')

	def to_dict(self):
		return {
			'range_m': self.range_m,
			'velocity_mps': self.velocity_mps,
			'center_range_bin': int(self.center[0]),
			'center_doppler_bin': int(self.center[1]),
			'bbox': self.bbox.to_list(),
			'margin': float(self.margin),
			'peak_power': float(self.peak_power),
		}


def _power(rd_map):
	return rd_map.power if hasattr(rd_map, 'power') else np.asarray(rd_map)

def _detection(rd_map, center, margin, segment_shape):
	power = _power(rd_map)
	r, d = int(center[0]), int(center[1])
	rng_m, vel = (rd_map.cell_position(r, d) if hasattr(rd_map, 'cell_position') else (float('nan'), float('nan')))
	return SegmentDetection((r, d), BinBox.from_center((r, d), segment_shape), float(power[r, d]), float(margin), rng_m, vel)

# hypothesis and margin of a (B, M) batch from a decision rule or a KAN model
def classify_features(classifier, x):
	if isinstance(classifier, DecisionRule):
		return eval_rule(classifier, x)
	if isinstance(classifier, KanModel):
		logits = forward(classifier, x)
		margin = logits[:, 1] - logits[:, 0]
		return (margin > 0).astype(np.int64), margin
	return classifier(x)

def _m_bins(classifier, m_bins):
	if m_bins is not None: return m_bins
	return getattr(classifier, 'm_bins')

# ----------------------------------------------------------------------------------------
#  Pipeline stages
# ----------------------------------------------------------------------------------------

def sweep_margins(rd_map, rule, m_bins=None, stride=1, segment_shape=SEGMENT_SHAPE, rows_per_chunk=ROWS_PER_CHUNK):
	"""Yield ( centres, hypothesis, margin ) per chunk of swept segment centres ( every `stride` cells ).

	Degenerate ( constant ) segments are H0 with margin -inf.
	"""
	m_bins = _m_bins(rule, m_bins)
	windows = segment_windows(rd_map, segment_shape)
	hr, hd = segment_shape[0] // 2, segment_shape[1] // 2
	rows = np.arange(0, windows.shape[0], stride)
	cols = np.arange(0, windows.shape[1], stride)
	for k in range(0, len(rows), rows_per_chunk):
		r_sel = rows[k:k + rows_per_chunk]
		blocks = windows[r_sel][:, cols]                               # (nr, nd, 17, 7)
		x, degenerate = histogram_features_batch(blocks.reshape(-1, segment_shape[0] * segment_shape[1]), m_bins)
		hypothesis, margin = classify_features(rule, x)
		hypothesis = np.where(degenerate, 0, np.asarray(hypothesis))
		margin = np.where(degenerate, -np.inf, np.asarray(margin, dtype=float))
		centers = np.stack(np.meshgrid(r_sel + hr, cols + hd, indexing='ij'), axis=-1).reshape(-1, 2)
		yield centers, hypothesis, margin

def sweep_classify(rd_map, rule, m_bins=None, stride=1, segment_shape=SEGMENT_SHAPE, rows_per_chunk=ROWS_PER_CHUNK):
	"""Featurise every interior segment centre ( every `stride` cells ) and keep the H1 ones."""
	detections = []
	for centers, hypothesis, margin in sweep_margins(rd_map, rule, m_bins, stride, segment_shape, rows_per_chunk):
		for h in np.flatnonzero(hypothesis == 1):
			detections.append(_detection(rd_map, centers[h], margin[h], segment_shape))
	return detections

def recenter(rd_map, det, segment_shape=SEGMENT_SHAPE, max_iter=RECENTER_ITERATIONS):
	"""Move the centre to the maximum of its block until it holds that maximum.

	Ties keep the current centre, otherwise the first maximum in row-major order wins.
	"""
	power = _power(rd_map)
	(r_lo, r_hi), (d_lo, d_hi) = interior_limits(power.shape, segment_shape)
	hr, hd = segment_shape[0] // 2, segment_shape[1] // 2
	r, d = det.center
	for _ in range(max_iter):
		block = power[r - hr:r + hr + 1, d - hd:d + hd + 1]
		if power[r, d] >= block.max():
			break
		i, j = np.unravel_index(np.argmax(block), block.shape)
		nr = int(np.clip(r - hr + i, r_lo, r_hi))
		nd = int(np.clip(d - hd + j, d_lo, d_hi))
		if (nr, nd) == (r, d) or power[nr, nd] <= power[r, d]:
			break
		r, d = nr, nd
	if (r, d) == tuple(det.center):
		return det
	return _detection(rd_map, (r, d), det.margin, segment_shape)

# intersection over union in bins
def iou(a, b):
	inter = a.intersection_area(b)
	union = a.area + b.area - inter
	return inter / union if union > 0 else 0.0

def nms(dets, threshold=NMS_THRESHOLD):
	ordered = sorted(dets, key=lambda t: (-t.peak_power, t.center))
	kept = []
	for det in ordered:
		if all(iou(det.bbox, k.bbox) <= threshold for k in kept):
			kept.append(det)
	return kept

# cells of the union of both boxes, as a view plus its ( r0, d0 ) origin
def _union_block(power, a, b):
	r0, d0 = max(min(a.r0, b.r0), 0), max(min(a.d0, b.d0), 0)
	r1, d1 = min(max(a.r1, b.r1), power.shape[0] - 1), min(max(a.d1, b.d1), power.shape[1] - 1)
	return power[r0:r1 + 1, d0:d1 + 1], (r0, d0)

def same_response(rd_map, strong, weak, level_db=MERGE_LEVEL_DB):
	"""True when weak belongs to the target response peaking at strong.

	The boxes must overlap; then either the weak peak is more than level_db below the strong one,
	or both peaks lie in one 8-connected region of cells within level_db of the strong peak.
	"""
	if not strong.bbox.intersection_area(weak.bbox):
		return False
	floor = strong.peak_power * 10 ** (-level_db / 10)
	if weak.peak_power < floor:
		return True
	block, (r0, d0) = _union_block(_power(rd_map), strong.bbox, weak.bbox)
	labels, _ = ndimage.label(block >= floor, structure=np.ones((3, 3), dtype=int))
	a = labels[strong.center[0] - r0, strong.center[1] - d0]
	return a > 0 and a == labels[weak.center[0] - r0, weak.center[1] - d0]

# strongest first; a detection joins an already kept one when both sit on the same response
def merge_responses(rd_map, dets, level_db=MERGE_LEVEL_DB):
	ordered = sorted(dets, key=lambda t: (-t.peak_power, t.center))
	kept = []
	for det in ordered:
		if not any(same_response(rd_map, k, det, level_db) for k in kept):
			kept.append(det)
	return kept

def detect(rd_map, rule, m_bins=None, stride=1, segment_shape=SEGMENT_SHAPE, nms_threshold=NMS_THRESHOLD,
		   merge_level_db=MERGE_LEVEL_DB):
	"""sweep -> recenter -> IoU suppression -> merge of detections split over one target response.

	merge_level_db=None skips the merge stage.
	"""
	candidates = sweep_classify(rd_map, rule, m_bins, stride, segment_shape)
	recentred = {}
	for det in candidates:
		moved = recenter(rd_map, det, segment_shape)
		best = recentred.get(moved.center)
		if best is None or moved.margin > best.margin:
			recentred[moved.center] = moved
	kept = nms(list(recentred.values()), nms_threshold)
	if merge_level_db is None:
		return kept
	return merge_responses(rd_map, kept, merge_level_db)

# ------------------------ [ OPERATING POINT ] ------------------------ #

# largest non-degenerate segment margin of one map, -inf when every segment is degenerate
def max_map_margin(rd_map, rule, m_bins=None, stride=1, segment_shape=SEGMENT_SHAPE):
	top = -np.inf
	for _, _, margin in sweep_margins(rd_map, rule, m_bins, stride, segment_shape):
		finite = margin[np.isfinite(margin)]
		if finite.size: top = max(top, float(finite.max()))
	return top

def calibrate_operating_point(rule, noise_maps, map_pfa, stride=1, segment_shape=SEGMENT_SHAPE):
	"""Rule with its bias set so that at most map_pfa of the noise-only maps hold any H1 segment.

	Every H1 segment survives the pipeline as at least one detection, so a map whose largest margin
	stays at or below the bias yields no detection.
	"""
	if not 0.0 < map_pfa < 1.0:
		raise ConfigError(f"map_pfa must lie in (0, 1), got {map_pfa}")
	if not isinstance(rule, DecisionRule):
		raise ConfigError(f"only decision rules carry an operating point, got {type(rule).__name__}")
	plain = replace(rule, bias=0.0)
	tops = np.array([max_map_margin(m, plain, None, stride, segment_shape) for m in noise_maps], dtype=float)
	if not len(tops):
		raise ConfigError("calibration needs noise-only maps")
	ranked = np.sort(tops)[::-1]
	bias = float(ranked[min(int(np.floor(map_pfa * len(ranked))), len(ranked) - 1)])
	return replace(rule, bias=bias if np.isfinite(bias) else 0.0)

# ------------------------ [ WRITE / OUTPUT ] ------------------------ #

def detections_frame(dets):
	cols = ['range_m', 'velocity_mps', 'center_range_bin', 'center_doppler_bin', 'bbox', 'margin', 'peak_power']
	return pd.DataFrame([d.to_dict() for d in dets], columns=cols)

# csv, or json when the file name ends in .json
def write_detections(dets, file):
	if Path(file).suffix.lower() == '.json':
		write_json({'detections': [d.to_dict() for d in dets]}, file)
	else:
		detections_frame(dets).to_csv(file, index=False)

# ----------------------------------------------------------------------------------------
#  main
# ----------------------------------------------------------------------------------------
if __name__ == "__main__":
	pass
# ----------------------------------------------------------------------------------------
