""" Class-balanced labelled RD segments for KAN training and evaluation
"""
# ----------------------------------------------------------------------------------------
#  Imports
# ----------------------------------------------------------------------------------------
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from tqdm import tqdm

from ..exceptions import ConfigError, TrainingError
from ..radar_sim import RadarConfig, ScenarioSpec, derive_geometry, sample_target, ground_truth_box, synth_if_cube
from .rd_map import compute_rd_map
from .segments import SEGMENT_SHAPE, extract_segment, histogram_features_batch, interior_limits

# ----------------------------------------------------------------------------------------
#  Some PreDefined Static Entries
# ----------------------------------------------------------------------------------------
NOISE_SEGMENTS_PER_MAP = 16

# ----------------------------------------------------------------------------------------
#  Dataset
# ----------------------------------------------------------------------------------------
@dataclass
class SegmentDataset():
	cells: np.ndarray               # (K, 17, 7) raw segment power
	labels: np.ndarray              # (K,) 0 = H0 noise, 1 = H1 target
	centers: np.ndarray             # (K, 2)
	snr_db: np.ndarray              # (K,), nan for noise-only segments
	scenario: str = 'nominal'
	_cache: dict = field(default_factory=dict, repr=False, compare=False)

	def __post_init__(self):
		self.cells = np.asarray(self.cells, dtype=float)
		self.labels = np.asarray(self.labels, dtype=np.int64)
		self.centers = np.asarray(self.centers, dtype=np.int64).reshape(-1, 2)
		self.snr_db = np.asarray(self.snr_db, dtype=float)
		k = len(self.cells)
		if not (len(self.labels) == len(self.centers) == len(self.snr_db) == k):
			raise ConfigError("dataset arrays differ in length")

	def __len__(self):
		return len(self.labels)

	@property
	def class_counts(self):
		return int((self.labels == 0).sum()), int((self.labels == 1).sum())

	# (K, M) histogram features, cached per M
	def features(self, m_bins):
		if m_bins not in self._cache:
			self._cache[m_bins] = histogram_features_batch(self.cells, m_bins)[0] if len(self) else np.zeros((0, m_bins))
		return self._cache[m_bins]

	def require_both_classes(self):
		n0, n1 = self.class_counts
		if not n0 or not n1:
			raise TrainingError(f"dataset needs both classes, has H0={n0} H1={n1}")

	def subset(self, idx):
		return SegmentDataset(self.cells[idx], self.labels[idx], self.centers[idx], self.snr_db[idx], self.scenario)

	# shuffled ( train, test ) split
	def split(self, test_fraction, rng):
		if not 0.0 < test_fraction < 1.0:
			raise ConfigError(f"test_fraction must lie in (0, 1), got {test_fraction}")
		order = rng.permutation(len(self))
		n_test = int(round(len(self) * test_fraction))
		return self.subset(order[n_test:]), self.subset(order[:n_test])

	def concat(self, other):
		return SegmentDataset(
			np.concatenate([self.cells, other.cells]),
			np.concatenate([self.labels, other.labels]),
			np.concatenate([self.centers, other.centers]),
			np.concatenate([self.snr_db, other.snr_db]),
			self.scenario if self.scenario == other.scenario else f"{self.scenario}+{other.scenario}",
		)

	def to_frame(self, m_bins):
		x = self.features(m_bins)
		df = pd.DataFrame(x, columns=[f'x{m}' for m in range(m_bins)])
		df.insert(0, 'center_doppler_bin', self.centers[:, 1])
		df.insert(0, 'center_range_bin', self.centers[:, 0])
		df['label'] = self.labels
		df['snr_db'] = self.snr_db
		return df

	def save(self, file):
		np.savez_compressed(file, cells=self.cells, labels=self.labels, centers=self.centers,
							snr_db=self.snr_db, scenario=np.array(self.scenario))

	@classmethod
	def load(cls, file):
		try:
			with np.load(file) as z:
				return cls(z['cells'], z['labels'], z['centers'], z['snr_db'], str(z['scenario']))
		except (OSError, KeyError, ValueError) as e:
			raise ConfigError(f"dataset read error: {file}\n{e}") from e


# ----------------------------------------------------------------------------------------
#  Generation
# ----------------------------------------------------------------------------------------

# peak cell inside the ground-truth box, clamped to the segment interior
def target_peak_center(rd_map, box, segment_shape=SEGMENT_SHAPE):
	block = rd_map.power[box.r0:box.r1 + 1, box.d0:box.d1 + 1]
	i, j = np.unravel_index(np.argmax(block), block.shape)
	(r_lo, r_hi), (d_lo, d_hi) = interior_limits(rd_map.shape, segment_shape)
	return int(np.clip(box.r0 + i, r_lo, r_hi)), int(np.clip(box.d0 + j, d_lo, d_hi))

# one H1 segment: a single target at a random place and SNR
def draw_target_segment(rng, config, scenario, segment_shape=SEGMENT_SHAPE):
	geometry = derive_geometry(config)
	hr = segment_shape[0] // 2 + 1
	r_lo = max(scenario.range_limits[0], (hr + 1) * geometry.range_resolution + scenario.extent_limits[1])
	r_hi = min(scenario.range_limits[1], geometry.max_range - (hr + 1) * geometry.range_resolution - scenario.extent_limits[1])
	range_m = float(rng.uniform(r_lo, r_hi))
	velocity = float(rng.uniform(*scenario.velocity_limits))
	aspect = scenario.aspects[int(rng.integers(len(scenario.aspects)))]
	target = sample_target(rng, range_m, velocity, aspect, config=config, scenario=scenario)
	snr = float(rng.uniform(*scenario.snr_limits))
	rd_map = compute_rd_map(synth_if_cube([target], config, snr_db=snr, rng=rng))
	center = target_peak_center(rd_map, ground_truth_box(target, geometry, dilation=0), segment_shape)
	return extract_segment(rd_map, center, segment_shape), center, snr

# several H0 segments from one noise-only map
def draw_noise_segments(rng, config, n, segment_shape=SEGMENT_SHAPE):
	rd_map = compute_rd_map(synth_if_cube([], config, noise_sigma=1.0, rng=rng))
	(r_lo, r_hi), (d_lo, d_hi) = interior_limits(rd_map.shape, segment_shape)
	centers = np.column_stack([rng.integers(r_lo, r_hi + 1, n), rng.integers(d_lo, d_hi + 1, n)])
	return [(extract_segment(rd_map, c, segment_shape), tuple(int(v) for v in c)) for c in centers]

def generate_segment_dataset(n_samples, config=None, scenario=None, seed=0, segment_shape=SEGMENT_SHAPE,
							 display_progress=False):
	"""Draw n_samples labelled segments, half H1 ( centred on a target's peak cell ) and
	half H0 ( random interior segments of noise-only maps ).
	"""
	if n_samples < 2:
		raise ConfigError(f"n_samples must be >= 2, got {n_samples}")
	config = config or RadarConfig()
	scenario = scenario or ScenarioSpec()
	rng = np.random.default_rng(seed)
	n1 = n_samples // 2
	n0 = n_samples - n1

	cells, labels, centers, snrs = [], [], [], []
	for _ in tqdm(range(n1), desc=f"{scenario.name} H1", disable=not display_progress):
		block, center, snr = draw_target_segment(rng, config, scenario, segment_shape)
		cells.append(block); labels.append(1); centers.append(center); snrs.append(snr)

	pbar = tqdm(total=n0, desc=f"{scenario.name} H0", disable=not display_progress)
	while n0 > 0:
		for block, center in draw_noise_segments(rng, config, min(n0, NOISE_SEGMENTS_PER_MAP), segment_shape):
			cells.append(block); labels.append(0); centers.append(center); snrs.append(np.nan)
			n0 -= 1
			pbar.update(1)
	pbar.close()

	order = rng.permutation(len(labels))
	return SegmentDataset(np.asarray(cells)[order], np.asarray(labels)[order],
						  np.asarray(centers)[order], np.asarray(snrs)[order], scenario.name)

# ----------------------------------------------------------------------------------------
#  main
# ----------------------------------------------------------------------------------------
if __name__ == "__main__":
	pass
# ----------------------------------------------------------------------------------------
