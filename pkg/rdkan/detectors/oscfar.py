""" 2-D ordered-statistics CFAR over an RD map
"""
# ----------------------------------------------------------------------------------------
#  Imports
# ----------------------------------------------------------------------------------------
from dataclasses import dataclass
import math

import attrs
import numpy as np
import pandas as pd
from numpy.lib.stride_tricks import sliding_window_view
from scipy.optimize import bisect

from ..common import odd_shape, open_probability
from ..exceptions import ConfigError

# ----------------------------------------------------------------------------------------
#  Some PreDefined Static Entries
# ----------------------------------------------------------------------------------------
DEFAULT_RANK_FRACTION = 0.75
ROWS_PER_CHUNK = 32

# ----------------------------------------------------------------------------------------
#  Design: threshold multiplier against exponential noise
# ----------------------------------------------------------------------------------------

# design false-alarm probability of the k-th order statistic test
def os_cfar_pfa(alpha, n_ref, k_rank):
	i = np.arange(k_rank)
	return float(np.exp(np.sum(np.log(n_ref - i) - np.log(n_ref - i + alpha))))

def solve_alpha(pfa, n_ref, k_rank):
	if not 0.0 < pfa < 1.0:
		raise ConfigError(f"pfa must lie in (0, 1), got {pfa!r}")
	if not 1 <= k_rank <= n_ref:
		raise ConfigError(f"k_rank must lie in [1, {n_ref}], got {k_rank!r}")
	target = math.log(pfa)
	i = np.arange(k_rank)
	def f(alpha):
		return float(np.sum(np.log(n_ref - i) - np.log(n_ref - i + alpha))) - target
	hi = 1.0
	while f(hi) > 0:
		hi *= 2.0
	return bisect(f, 0.0, hi, xtol=1e-15, rtol=1e-12, maxiter=500)

# ----------------------------------------------------------------------------------------
#  Config
# ----------------------------------------------------------------------------------------
@attrs.frozen
class OsCfarConfig():
	window: tuple = attrs.field(default=(17, 7), converter=tuple, validator=odd_shape)
	guard: tuple = attrs.field(default=(2, 1), converter=tuple)
	pfa_design: float = attrs.field(default=1e-3, converter=float, validator=open_probability)
	k_rank: int = attrs.field(default=None)
	alpha: float = attrs.field(default=None)

	@guard.validator
	def _check_guard(self, attribute, value):
		if len(value) != 2 or any(int(g) != g or g < 0 for g in value):
			raise ConfigError(f"OsCfarConfig.guard must be two non-negative ints, got {value!r}")
		if 2 * value[0] + 1 > self.window[0] or 2 * value[1] + 1 > self.window[1]:
			raise ConfigError(f"guard {value} does not fit the reference window {self.window}")

	def __attrs_post_init__(self):
		n_ref = self.n_ref
		if n_ref < 1:
			raise ConfigError(f"guard {self.guard} leaves no reference cells in window {self.window}")
		k = self.k_rank if self.k_rank is not None else max(1, int(round(DEFAULT_RANK_FRACTION * n_ref)))
		if int(k) != k or not 1 <= k <= n_ref:
			raise ConfigError(f"k_rank must lie in [1, {n_ref}], got {k!r}")
		object.__setattr__(self, 'k_rank', int(k))
		alpha = self.alpha if self.alpha is not None else solve_alpha(self.pfa_design, n_ref, int(k))
		if not np.isfinite(alpha) or alpha <= 0:
			raise ConfigError(f"alpha must be > 0, got {alpha!r}")
		object.__setattr__(self, 'alpha', float(alpha))

	@property
	def n_ref(self):
		return self.window[0] * self.window[1] - (2 * self.guard[0] + 1) * (2 * self.guard[1] + 1)

	# True on reference cells of the window, False on guard cells and the CUT
	@property
	def reference_mask(self):
		m = np.ones(self.window, dtype=bool)
		hr, hd = self.window[0] // 2, self.window[1] // 2
		m[hr - self.guard[0]:hr + self.guard[0] + 1, hd - self.guard[1]:hd + self.guard[1] + 1] = False
		return m

	@property
	def detector_id(self):
		return f"oscfar@{self.pfa_design:g}"

	@classmethod
	def from_pfa(cls, pfa, **kwargs):
		return cls(pfa_design=pfa, **kwargs)

	def to_dict(self):
		return attrs.asdict(self)


# ----------------------------------------------------------------------------------------
#  Detection
# ----------------------------------------------------------------------------------------
@dataclass(frozen=True)
class CutDetection():
	range_bin: int
	doppler_bin: int
	power: float
	threshold: float

	def to_dict(self):
		return {'cut_range_bin': self.range_bin, 'cut_doppler_bin': self.doppler_bin,
				'power': self.power, 'threshold': self.threshold}


def os_cfar_threshold_map(power, cfg, rows_per_chunk=ROWS_PER_CHUNK):
	"""Threshold of every CUT that owns a full reference window.

	returns ( thresholds, cut_power ), both (n_r, n_d); entry [i, j] belongs to CUT (i + hr, j + hd).
	"""
	power = np.asarray(power, dtype=float)
	if power.shape[0] < cfg.window[0] or power.shape[1] < cfg.window[1]:
		raise ConfigError(f"map {power.shape} smaller than the reference window {cfg.window}")
	windows = sliding_window_view(power, cfg.window)
	n_r, n_d = windows.shape[:2]
	ref_idx = np.flatnonzero(cfg.reference_mask.ravel())
	hr, hd = cfg.window[0] // 2, cfg.window[1] // 2
	thresholds = np.empty((n_r, n_d))
	for r0 in range(0, n_r, rows_per_chunk):
		block = windows[r0:r0 + rows_per_chunk].reshape(-1, n_d, cfg.window[0] * cfg.window[1])
		ref = np.sort(block[..., ref_idx], axis=-1)
		thresholds[r0:r0 + rows_per_chunk] = cfg.alpha * ref[..., cfg.k_rank - 1]
	cut_power = power[hr:hr + n_r, hd:hd + n_d]
	return thresholds, cut_power

# boolean detection mask over the whole map ( edge CUTs are False )
def os_cfar_mask(rd_map, cfg):
	power = rd_map.power if hasattr(rd_map, 'power') else np.asarray(rd_map)
	thresholds, cut_power = os_cfar_threshold_map(power, cfg)
	hr, hd = cfg.window[0] // 2, cfg.window[1] // 2
	mask = np.zeros(power.shape, dtype=bool)
	mask[hr:hr + cut_power.shape[0], hd:hd + cut_power.shape[1]] = cut_power > thresholds
	return mask

def os_cfar_detect(rd_map, cfg=None):
	cfg = cfg or OsCfarConfig()
	power = rd_map.power if hasattr(rd_map, 'power') else np.asarray(rd_map)
	thresholds, cut_power = os_cfar_threshold_map(power, cfg)
	hr, hd = cfg.window[0] // 2, cfg.window[1] // 2
	rows, cols = np.nonzero(cut_power > thresholds)
	return [CutDetection(int(i + hr), int(j + hd), float(cut_power[i, j]), float(thresholds[i, j]))
			for i, j in zip(rows, cols)]

# number of CUTs tested on a map of this shape
def n_tested_cuts(shape, cfg):
	return max(0, shape[0] - cfg.window[0] + 1) * max(0, shape[1] - cfg.window[1] + 1)

def write_detections_csv(detections, file):
	cols = ['cut_range_bin', 'cut_doppler_bin', 'power', 'threshold']
	pd.DataFrame([d.to_dict() for d in detections], columns=cols).to_csv(file, index=False)

# ----------------------------------------------------------------------------------------
#  main
# ----------------------------------------------------------------------------------------
if __name__ == "__main__":
	pass
# ----------------------------------------------------------------------------------------
