""" RD segments and their min-max normalised histogram features
"""
# ----------------------------------------------------------------------------------------
#  Imports
# ----------------------------------------------------------------------------------------
from dataclasses import dataclass

import numpy as np
import pandas as pd
from numpy.lib.stride_tricks import sliding_window_view

from ..exceptions import ConfigError, SegmentError

# ----------------------------------------------------------------------------------------
#  Some PreDefined Static Entries
# ----------------------------------------------------------------------------------------
SEGMENT_SHAPE = (17, 7)             # range x Doppler bins, ~6 m x 2 m/s under the default waveform
SUPPORTED_M_BINS = (5, 10)

# ----------------------------------------------------------------------------------------
#  Segment feature
# ----------------------------------------------------------------------------------------
@dataclass
class SegmentFeature():
	center: tuple                   # (range_bin, doppler_bin)
	cells: np.ndarray               # segment block
	histogram: np.ndarray           # x_0 .. x_{M-1}
	m_bins: int
	degenerate: bool = False        # constant block, all mass in bin 0

	@property
	def n_cells(self):
		return self.cells.size

	def to_dict(self, label=None):
		d = {'center_range_bin': int(self.center[0]), 'center_doppler_bin': int(self.center[1])}
		d.update({f'x{m}': float(v) for m, v in enumerate(self.histogram)})
		if label is not None: d['label'] = int(label)
		return d


# ----------------------------------------------------------------------------------------
#  Functions
# ----------------------------------------------------------------------------------------

def _check_m_bins(m_bins):
	if int(m_bins) != m_bins or m_bins < 1:
		raise ConfigError(f"m_bins must be a positive integer, got {m_bins!r}")
	return int(m_bins)

def _power(rd_map):
	return rd_map.power if hasattr(rd_map, 'power') else np.asarray(rd_map)

# M equal-width bins over [0, 1]
def bin_edges(m_bins):
	return np.linspace(0.0, 1.0, _check_m_bins(m_bins) + 1)

def check_center(shape, center, segment_shape=SEGMENT_SHAPE):
	hr, hd = segment_shape[0] // 2, segment_shape[1] // 2
	r, d = int(center[0]), int(center[1])
	if r - hr < 0 or d - hd < 0 or r + hr > shape[0] - 1 or d + hd > shape[1] - 1:
		raise SegmentError(f"segment centre {(r, d)} closer than {(hr, hd)} bins to the edge of a {tuple(shape)} map")
	return r, d

# copy of the block centred at center, no wraparound
def extract_segment(rd_map, center, segment_shape=SEGMENT_SHAPE):
	power = _power(rd_map)
	r, d = check_center(power.shape, center, segment_shape)
	hr, hd = segment_shape[0] // 2, segment_shape[1] // 2
	return np.array(power[r - hr:r + hr + 1, d - hd:d + hd + 1])

# range of candidate centres that hold a full segment, as (first, last) per axis
def interior_limits(shape, segment_shape=SEGMENT_SHAPE):
	hr, hd = segment_shape[0] // 2, segment_shape[1] // 2
	return (hr, shape[0] - 1 - hr), (hd, shape[1] - 1 - hd)

# every full segment of the map as a read-only (n_r, n_d, 17, 7) view; window [i, j] is centred at (i + hr, j + hd)
def segment_windows(rd_map, segment_shape=SEGMENT_SHAPE):
	power = _power(rd_map)
	if power.shape[0] < segment_shape[0] or power.shape[1] < segment_shape[1]:
		raise SegmentError(f"map {power.shape} smaller than one segment {segment_shape}")
	return sliding_window_view(power, segment_shape)

def histogram_feature(cells, m_bins, center=(0, 0)):
	cells = np.asarray(cells, dtype=float)
	if cells.size == 0:
		raise SegmentError("empty segment")
	hist, degenerate = histogram_features_batch(cells.reshape(1, -1), m_bins)
	return SegmentFeature(center=tuple(int(c) for c in center), cells=cells,
						  histogram=hist[0], m_bins=_check_m_bins(m_bins), degenerate=bool(degenerate[0]))

def histogram_features_batch(blocks, m_bins):
	"""Histogram rows for K blocks at once.

	blocks: (K, ...) array, each block flattened to its cells.
	returns (K, M) heights summing to 1 per row and a (K,) degenerate mask.
	"""
	m_bins = _check_m_bins(m_bins)
	x = np.asarray(blocks, dtype=float)
	k = x.shape[0]
	x = x.reshape(k, -1)
	n_cells = x.shape[1]
	if n_cells == 0:
		raise SegmentError("empty segment")
	lo = x.min(axis=1, keepdims=True)
	span = x.max(axis=1, keepdims=True) - lo
	degenerate = span[:, 0] <= 0
	u = (x - lo) / np.where(span > 0, span, 1.0)
	u[degenerate] = 0.0
	idx = np.searchsorted(bin_edges(m_bins), u.ravel(), side='right') - 1
	idx = np.clip(idx, 0, m_bins - 1)
	idx += np.repeat(np.arange(k) * m_bins, n_cells)
	counts = np.bincount(idx, minlength=k * m_bins).reshape(k, m_bins)
	return counts / n_cells, degenerate

# ------------------------ [ WRITE / OUTPUT ] ------------------------ #

# one row per segment: centre, x0..x_{M-1}, label
def histogram_frame(features, labels=None):
	if labels is None: labels = [None] * len(features)
	return pd.DataFrame([f.to_dict(label) for f, label in zip(features, labels)])

def write_histogram_csv(features, file, labels=None):
	histogram_frame(features, labels).to_csv(file, index=False)

# ----------------------------------------------------------------------------------------
#  main
# ----------------------------------------------------------------------------------------
if __name__ == "__main__":
	pass
# ----------------------------------------------------------------------------------------
