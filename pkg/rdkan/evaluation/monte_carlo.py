""" Monte-Carlo P_D / P_FA study of segment detectors against OS-CFAR
"""
# ----------------------------------------------------------------------------------------
#  Imports
# ----------------------------------------------------------------------------------------
from dataclasses import dataclass, field
import functools
import math
import re
import threading
import time

import numpy as np
import pandas as pd
from nettoolkit.nettoolkit_common import Multi_Execution
from tqdm import tqdm

from ..colorprint import print_banner, display_banner
from ..common import write_debug_log
from ..exceptions import ConfigError, DetectorError
from ..radar_sim import RadarConfig, ScenarioSpec, derive_geometry, ground_truth_box, sample_scene, synth_if_cube
from ..rdmap import SEGMENT_SHAPE, compute_rd_map
from ..detectors import (
	BUILTIN_RULES, OsCfarConfig, builtin_rule, calibrate_operating_point, detect, load_checkpoint, load_rule,
	n_tested_cuts, os_cfar_detect,
)
from .scoring import TrialResult, score_kan_trial, score_cfar_trial

# ----------------------------------------------------------------------------------------
#  Some PreDefined Static Entries
# ----------------------------------------------------------------------------------------
DEFAULT_SNR_GRID = tuple(range(-25, 26, 5))
DEFAULT_TRIALS = 350
DEFAULT_WORKERS = 4
PFA_RANGE = re.compile(r'^oscfar@1e-(\d+)\.\.1e-(\d+)$')
DEFAULT_MAP_PFA = 0.001             # share of noise-only maps allowed a detection
CALIBRATION_MAPS = 500
CALIBRATION_SEED = 104729

# ----------------------------------------------------------------------------------------
#  Detectors under test
# ----------------------------------------------------------------------------------------
@dataclass
class KanPipelineDetector():
	classifier: object              # DecisionRule or KanModel
	detector_id: str
	m_bins: int = None
	stride: int = 1
	segment_shape: tuple = SEGMENT_SHAPE

	def __post_init__(self):
		if self.m_bins is None:
			self.m_bins = self.classifier.m_bins

	def run(self, rd_map):
		return detect(rd_map, self.classifier, self.m_bins, self.stride, self.segment_shape)

	def n_tested(self, shape):
		n_r = shape[0] - self.segment_shape[0] + 1
		n_d = shape[1] - self.segment_shape[1] + 1
		return max(0, math.ceil(n_r / self.stride)) * max(0, math.ceil(n_d / self.stride))

	def score(self, detections, gt_boxes, shape):
		return score_kan_trial(detections, gt_boxes, shape)


@dataclass
class OsCfarDetector():
	cfg: OsCfarConfig = field(default_factory=OsCfarConfig)

	@property
	def detector_id(self):
		return self.cfg.detector_id

	def run(self, rd_map):
		return os_cfar_detect(rd_map, self.cfg)

	def n_tested(self, shape):
		return n_tested_cuts(shape, self.cfg)

	def score(self, detections, gt_boxes, shape):
		return score_cfar_trial(detections, gt_boxes)


# "oscfar@1e-3..1e-6" -> one id per decade
def expand_roster(ids):
	out = []
	for i in ids:
		m = PFA_RANGE.match(i.strip())
		if m:
			lo, hi = sorted((int(m.group(1)), int(m.group(2))))
			out.extend(f"oscfar@1e-{e}" for e in range(lo, hi + 1))
		else:
			out.append(i.strip())
	return out

# noise-only RD maps for operating-point calibration ( scale free, so sigma 1 stands for every SNR )
def noise_maps(n_maps, config=None, seed=CALIBRATION_SEED):
	config = config or RadarConfig()
	rng = np.random.default_rng(seed)
	for _ in range(int(n_maps)):
		yield compute_rd_map(synth_if_cube([], config, noise_sigma=1.0, rng=rng))

@functools.lru_cache(maxsize=None)
def calibrated_builtin(name, map_pfa=DEFAULT_MAP_PFA, config=None, n_maps=CALIBRATION_MAPS, seed=CALIBRATION_SEED):
	"""Builtin rule at the operating point where map_pfa of noise-only maps carry a detection."""
	return calibrate_operating_point(builtin_rule(name), noise_maps(n_maps, config, seed), map_pfa)

def _operating_point(point, detector_id):
	try:
		map_pfa = float(point)
	except ValueError:
		raise DetectorError(f"bad operating point in {detector_id!r}, expected <rule>@raw or <rule>@<map pfa>") from None
	if not 0.0 < map_pfa < 1.0:
		raise DetectorError(f"{detector_id}: map false-alarm share must lie in (0, 1)")
	return map_pfa

def build_detector(detector_id, window=SEGMENT_SHAPE, guard=(2, 1), config=None):
	"""Detector from its id.

	<builtin>            builtin rule at the calibrated default operating point
	<builtin>@<map pfa>  builtin rule calibrated to another share of noise maps with a detection
	<builtin>@raw        builtin rule as published ( bias 0 )
	oscfar@<pfa>, rule:<file.json> ( bias as saved ) or kan:<checkpoint.json>
	"""
	name, _, point = detector_id.partition('@')
	if name in BUILTIN_RULES:
		if point == 'raw':
			return KanPipelineDetector(builtin_rule(name), detector_id)
		map_pfa = _operating_point(point, detector_id) if point else DEFAULT_MAP_PFA
		return KanPipelineDetector(calibrated_builtin(name, map_pfa, config), detector_id)
	if detector_id.startswith('oscfar@'):
		try:
			pfa = float(detector_id[len('oscfar@'):])
		except ValueError:
			raise DetectorError(f"bad OS-CFAR id {detector_id!r}, expected oscfar@<pfa>") from None
		try:
			return OsCfarDetector(OsCfarConfig(window=window, guard=guard, pfa_design=pfa))
		except ConfigError as e:
			raise DetectorError(f"{detector_id}: {e}") from e
	if detector_id.startswith('rule:'):
		return KanPipelineDetector(load_rule(detector_id[len('rule:'):]), detector_id)
	if detector_id.startswith('kan:'):
		model, _ = load_checkpoint(detector_id[len('kan:'):])
		return KanPipelineDetector(model, detector_id)
	raise DetectorError(f"unknown detector id {detector_id!r}")

def build_detectors(ids, config=None):
	ids = expand_roster(ids)
	if not ids:
		raise DetectorError("empty detector roster")
	return [build_detector(i, config=config) for i in ids]

# ----------------------------------------------------------------------------------------
#  Report
# ----------------------------------------------------------------------------------------
@dataclass
class EvalReport():
	curves: pd.DataFrame
	trials: pd.DataFrame
	settings: dict = field(default_factory=dict)
	accuracy: pd.DataFrame = None
	decay_rates: list = field(default_factory=list)
	kde: pd.DataFrame = None
	timing: pd.DataFrame = None
	exponents: dict = field(default_factory=dict)

	@property
	def detectors(self):
		return list(dict.fromkeys(self.curves['detector']))

	@property
	def n_excluded(self):
		if self.trials.empty: return 0
		return int(self.trials.loc[self.trials['excluded'], ['snr_db', 'trial']].drop_duplicates().shape[0])

	def curve(self, detector):
		return self.curves[self.curves['detector'] == detector].reset_index(drop=True)


def aggregate(results, detector_ids):
	rows = []
	df = pd.DataFrame([r.to_dict() for r in results])
	if df.empty:
		return pd.DataFrame(columns=['snr_db', 'detector', 'trials', 'excluded', 'pd', 'pfa', 'fa_count', 'n_tested', 'mean_runtime_ms'])
	for det in detector_ids:
		for snr, g in df[df['detector'] == det].groupby('snr_db', sort=True):
			ok = g[~g['excluded']]
			n_targets = ok['n_targets'].sum()
			n_tested = ok['n_tested'].sum()
			rows.append({
				'snr_db': snr,
				'detector': det,
				'trials': int(len(ok)),
				'excluded': int(g['excluded'].sum()),
				'pd': ok['n_detected'].sum() / n_targets if n_targets else float('nan'),
				'pfa': ok['fa_count'].sum() / n_tested if n_tested else float('nan'),
				'fa_count': int(ok['fa_count'].sum()),
				'n_tested': int(n_tested),
				'mean_runtime_ms': ok['runtime_ns'].mean() / 1e6 if len(ok) else float('nan'),
			})
	return pd.DataFrame(rows)

# ----------------------------------------------------------------------------------------
#  Harness
# ----------------------------------------------------------------------------------------
class MonteCarlo(Multi_Execution):

	banner = 'Monte-Carlo'

	def __init__(self, scenario=None, detectors=(), snr_grid=DEFAULT_SNR_GRID, trials=DEFAULT_TRIALS, seed=0,
				 config=None, max_workers=DEFAULT_WORKERS, display_progress=False, debug_log=None):
		if not detectors:
			raise DetectorError("empty detector roster")
		if int(trials) < 1:
			raise ConfigError(f"trials must be >= 1, got {trials}")
		self.scenario = scenario or ScenarioSpec()
		self.detectors = list(detectors)
		self.snr_grid = [float(s) for s in snr_grid]
		self.trials = int(trials)
		self.seed = int(seed)
		self.config = config or RadarConfig()
		self.geometry = derive_geometry(self.config)
		self.max_workers = max(1, int(max_workers))
		self.display_progress = display_progress
		self.debug_log = debug_log
		self.tasks = [(i, t) for i in range(len(self.snr_grid)) for t in range(self.trials)]
		super().__init__(self.tasks)
		self.max_connections = self.max_workers             ## threads per batch
		self.trial_results = {}
		self._progress = None
		self._lock = threading.Lock()

	@property
	def detector_ids(self):
		return [d.detector_id for d in self.detectors]

	def __call__(self):
		if self.display_progress: display_banner(self.banner, 'green')
		self.trial_results = {}
		with tqdm(total=len(self.tasks), desc="trials", disable=not self.display_progress) as self._progress:
			self.start()
		self._progress = None
		results = sorted((r for task in self.tasks for r in self.trial_results[task]),
						 key=lambda r: (r.snr_db, r.trial, self.detector_ids.index(r.detector)))
		report = EvalReport(curves=aggregate(results, self.detector_ids),
							trials=pd.DataFrame([r.to_dict() for r in results]),
							settings=self.settings())
		self.print_message(f"[+] {len(self.tasks)} trial(s) over {len(self.snr_grid)} SNR point(s) done")
		if report.n_excluded:
			self.print_message(f"[-] {report.n_excluded} trial(s) excluded, see debug log")
		return report

	# Local print function controlled by display_progress
	def print_message(self, msg):
		if not self.display_progress: return
		color = 'red' if msg[0:3] == "[-]" else 'green'
		print_banner(msg, color)

	def settings(self):
		return {
			'scenario': self.scenario.to_dict(),
			'radar': self.config.to_dict(),
			'detectors': self.detector_ids,
			'snr_grid': self.snr_grid,
			'trials': self.trials,
			'seed': self.seed,
		}

	# Kick: one trial, every detector sees the same map
	def execute(self, task):
		results = self.run_trial(task)
		with self._lock:
			self.trial_results[task] = results
			if self._progress is not None: self._progress.update(1)

	def run_trial(self, task):
		snr_idx, trial = task
		snr = self.snr_grid[snr_idx]
		rng = np.random.default_rng([self.seed, snr_idx, trial])
		try:
			scene = sample_scene(rng, self.config, self.scenario)
			rd_map = compute_rd_map(synth_if_cube(scene, self.config, snr_db=snr, rng=rng, noise_sigma=1.0))
			gt_boxes = [ground_truth_box(t, self.geometry) for t in scene]
		except Exception as e:
			return self._excluded(snr, trial, f"scene: {e}")
		results = []
		for det in self.detectors:
			try:
				t0 = time.perf_counter_ns()
				detections = det.run(rd_map)
				runtime = time.perf_counter_ns() - t0
				detected, fa = det.score(detections, gt_boxes, rd_map.shape)
			except Exception as e:
				return self._excluded(snr, trial, f"{det.detector_id}: {type(e).__name__}: {e}")
			results.append(TrialResult(
				snr_db=snr, detector=det.detector_id, trial=trial,
				n_targets=len(gt_boxes), n_detected=int(sum(detected)), fa_count=int(fa),
				n_tested=det.n_tested(rd_map.shape), n_detections=len(detections),
				runtime_ns=int(runtime), ground_truth=gt_boxes,
			))
		return results

	def _excluded(self, snr, trial, error):
		write_debug_log(f"snr {snr:g} dB trial {trial} excluded: {error}", self.debug_log, pfx="[-]")
		return [TrialResult(snr_db=snr, detector=d, trial=trial, excluded=True, error=error) for d in self.detector_ids]


def run_monte_carlo(scenario=None, detectors=(), snr_grid=DEFAULT_SNR_GRID, trials=DEFAULT_TRIALS, seed=0, config=None,
					max_workers=DEFAULT_WORKERS, display_progress=False, debug_log=None):
	names = expand_roster([d for d in detectors if isinstance(d, str)])
	detectors = [build_detector(n, config=config) for n in names] + [d for d in detectors if not isinstance(d, str)]
	mc = MonteCarlo(scenario, detectors, snr_grid, trials, seed, config, max_workers, display_progress, debug_log)
	return mc()

# ----------------------------------------------------------------------------------------
#  main
# ----------------------------------------------------------------------------------------
if __name__ == "__main__":
	pass
# ----------------------------------------------------------------------------------------
