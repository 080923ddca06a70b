""" Per-trial scoring of detections against ground-truth boxes
"""
# ----------------------------------------------------------------------------------------
#  Imports
# ----------------------------------------------------------------------------------------
from dataclasses import dataclass, field

import numpy as np

# ----------------------------------------------------------------------------------------
#  Some PreDefined Static Entries
# ----------------------------------------------------------------------------------------
COVERAGE_THRESHOLD = 0.5            # share of ground-truth cells a KAN trial must cover

# ----------------------------------------------------------------------------------------
#  Trial result
# ----------------------------------------------------------------------------------------
@dataclass
class TrialResult():
	snr_db: float
	detector: str
	trial: int
	n_targets: int = 0
	n_detected: int = 0              # targets counted as detected
	fa_count: int = 0                # detections with no target response
	n_tested: int = 0                # segments or CUTs tested
	n_detections: int = 0
	runtime_ns: int = 0
	ground_truth: list = field(default_factory=list)
	excluded: bool = False
	error: str = ''

	@property
	def pd_contrib(self):
		return self.n_detected / self.n_targets if self.n_targets else float('nan')

	def to_dict(self):
		return {
			'snr_db': self.snr_db,
			'detector': self.detector,
			'trial': self.trial,
			'n_targets': self.n_targets,
			'n_detected': self.n_detected,
			'pd_contrib': self.pd_contrib,
			'fa_count': self.fa_count,
			'n_tested': self.n_tested,
			'n_detections': self.n_detections,
			'runtime_ns': self.runtime_ns,
			'ground_truth': [b.to_list() for b in self.ground_truth],
			'excluded': self.excluded,
			'error': self.error,
		}


# ----------------------------------------------------------------------------------------
#  Scoring
# ----------------------------------------------------------------------------------------

def _overlaps_any(box, gt_boxes):
	return any(box.intersection_area(g) > 0 for g in gt_boxes)

# ( per-target detected flags, false-alarm count ) for accepted segment detections
def score_kan_trial(detections, gt_boxes, shape, coverage=COVERAGE_THRESHOLD):
	covered = np.zeros(shape, dtype=bool)
	for det in detections:
		covered |= det.bbox.mask(shape)
	detected = []
	for g in gt_boxes:
		gt_mask = g.mask(shape)
		n_gt = gt_mask.sum()
		detected.append(bool(n_gt and (covered & gt_mask).sum() / n_gt >= coverage))
	fa = sum(1 for det in detections if not _overlaps_any(det.bbox, gt_boxes))
	return detected, fa

# a target counts when any CUT falls inside its box; CUTs outside every box are false alarms
def score_cfar_trial(cuts, gt_boxes):
	detected = [any(g.contains(c.range_bin, c.doppler_bin) for c in cuts) for g in gt_boxes]
	fa = sum(1 for c in cuts if not any(g.contains(c.range_bin, c.doppler_bin) for g in gt_boxes))
	return detected, fa

# ----------------------------------------------------------------------------------------
#  main
# ----------------------------------------------------------------------------------------
if __name__ == "__main__":
	pass
# ----------------------------------------------------------------------------------------
