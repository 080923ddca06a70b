""" rdkan command line: simulate | train | snap | detect | eval | bench
"""
# ----------------------------------------------------------------------------------------
#  Imports
# ----------------------------------------------------------------------------------------
import argparse
from pathlib import Path
import sys

import attrs
import numpy as np
import pandas as pd

from .colorprint import print_banner, display_banner
from .common import output_folder, print_report, read_config_file, write_json, positive
from .exceptions import ConfigError, DetectorError
from .radar_sim import (
	RadarConfig, ScenarioSpec, derive_geometry, ground_truth_box, read_scene, sample_scene, synth_if_cube,
	write_cube, write_scene,
)
from .rdmap import SegmentDataset, compute_rd_map, generate_segment_dataset, read_rd_map, write_rd_map
from .detectors import (
	TrainOptions, calibrate_bias, calibrate_operating_point, fine_tune, fit_decay_rates, load_checkpoint, rule_to_string,
	save_checkpoint, save_rule, snap, train_and_prune, write_detections, write_detections_csv,
)
from .evaluation import (
	DEFAULT_MAP_PFA, DEFAULT_SNR_GRID, DEFAULT_TRIALS, EvalReport, accuracy_table, build_detector, build_detectors,
	cfar_window_sweep, kde_export, noise_maps, run_monte_carlo, runtime_compare, write_report,
)
from .evaluation.monte_carlo import CALIBRATION_MAPS, OsCfarDetector

# ----------------------------------------------------------------------------------------
#  Some PreDefined Static Entries
# ----------------------------------------------------------------------------------------
EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3
DEFAULT_ROSTER = ('paper-eq7-m10', 'oscfar@1e-3..1e-6')
DATASET_FILE = 'segments.npz'

# ----------------------------------------------------------------------------------------
#  Experiment configuration
# ----------------------------------------------------------------------------------------
@attrs.define
class ExperimentConfig():
	radar: RadarConfig = attrs.field(factory=RadarConfig)
	scenario: ScenarioSpec = attrs.field(factory=ScenarioSpec)
	detectors: list = attrs.field(factory=lambda: list(DEFAULT_ROSTER), converter=list)
	snr_grid: list = attrs.field(factory=lambda: list(DEFAULT_SNR_GRID), converter=lambda v: [float(s) for s in v])
	trials: int = attrs.field(default=DEFAULT_TRIALS, converter=int, validator=positive)
	seed: int = attrs.field(default=0, converter=int)
	out: str = attrs.field(default='rdkan-out', converter=str)
	max_workers: int = attrs.field(default=4, converter=int, validator=positive)
	m_bins: int = attrs.field(default=10, converter=int, validator=positive)
	n_samples: int = attrs.field(default=26236, converter=int, validator=positive)
	test_fraction: float = attrs.field(default=0.2, converter=float)
	few_shot: int = attrs.field(default=0, converter=int)
	train: TrainOptions = attrs.field(factory=TrainOptions)

	@classmethod
	def from_dict(cls, d):
		d = dict(d or {})
		unknown = set(d) - {a.name for a in attrs.fields(cls)}
		if unknown:
			raise ConfigError(f"unknown experiment field(s): {sorted(unknown)}")
		d['radar'] = RadarConfig.from_dict(d.get('radar'))
		d['scenario'] = ScenarioSpec.from_dict(d.get('scenario'))
		d['train'] = TrainOptions.from_dict(d.get('train'))
		try:
			return cls(**d)
		except (TypeError, ValueError) as e:
			if isinstance(e, ConfigError): raise
			raise ConfigError(f"invalid experiment config: {e}") from e

	@classmethod
	def from_file(cls, file):
		return cls.from_dict(read_config_file(file))

	def to_dict(self):
		return {
			'radar': self.radar.to_dict(),
			'scenario': self.scenario.to_dict(),
			'detectors': list(self.detectors),
			'snr_grid': list(self.snr_grid),
			'trials': self.trials,
			'seed': self.seed,
			'out': self.out,
			'max_workers': self.max_workers,
			'm_bins': self.m_bins,
			'n_samples': self.n_samples,
			'test_fraction': self.test_fraction,
			'few_shot': self.few_shot,
			'train': self.train.to_dict(),
		}


# config document first, then command line flags on top
def experiment_config(args):
	exp = ExperimentConfig.from_file(args.config) if args.config else ExperimentConfig()
	overrides = {}
	for name in ('seed', 'out', 'trials', 'm_bins', 'n_samples', 'few_shot', 'max_workers'):
		v = getattr(args, name, None)
		if v is not None: overrides[name] = v
	if getattr(args, 'detectors', None): overrides['detectors'] = args.detectors
	if getattr(args, 'snr_grid', None): overrides['snr_grid'] = args.snr_grid
	try:
		return attrs.evolve(exp, **overrides)
	except (TypeError, ValueError) as e:
		if isinstance(e, ConfigError): raise
		raise ConfigError(f"invalid command line override: {e}") from e

# ----------------------------------------------------------------------------------------
#  Subcommands
# ----------------------------------------------------------------------------------------

def exec_simulate(args, exp):
	"""Scene json, IF cube, RD map and ground truth; optionally a labelled segment dataset."""
	out = output_folder(exp.out)
	rng = np.random.default_rng(exp.seed)
	if args.scene:
		scene, radar = read_scene(args.scene, rng=rng, scenario=exp.scenario)
	else:
		scene, radar = sample_scene(rng, exp.radar, exp.scenario), exp.radar
	snr = args.snr if args.snr is not None else float(rng.uniform(*exp.scenario.snr_limits))
	cube = synth_if_cube(scene, radar, snr_db=snr, rng=rng)
	rd_map = compute_rd_map(cube)
	geometry = derive_geometry(radar)
	write_scene(scene, out / 'scene.json', radar)
	write_cube(cube, out / 'cube.bin')
	write_rd_map(rd_map, out / 'rd_map.bin')
	pd.DataFrame([{'target': i, 'bbox': ground_truth_box(t, geometry).to_list(), 'range_m': t.range_m,
				   'velocity_mps': t.velocity_mps} for i, t in enumerate(scene)],
				 columns=['target', 'bbox', 'range_m', 'velocity_mps']).to_csv(out / 'ground_truth.csv', index=False)
	print_banner(f"[+] {len(scene)} target(s) at {snr:.1f} dB SNR, map {rd_map.shape} written to {out}")
	if args.segments:
		ds = generate_segment_dataset(args.segments, radar, exp.scenario, seed=exp.seed, display_progress=True)
		ds.save(out / DATASET_FILE)
		ds.to_frame(exp.m_bins).to_csv(out / f'histograms-m{exp.m_bins}.csv', index=False)
		print_banner(f"[+] {len(ds)} segments (H0:H1 {ds.class_counts[0]}:{ds.class_counts[1]}) written")
	return EXIT_OK

def _load_dataset(args, exp):
	if args.dataset:
		p = Path(args.dataset)
		return SegmentDataset.load(p / DATASET_FILE if p.is_dir() else p)
	return generate_segment_dataset(exp.n_samples, exp.radar, exp.scenario, seed=exp.seed, display_progress=True)

def exec_train(args, exp):
	"""Train, prune, snap and report; with few_shot > 0 also fine-tune on the shifted scenario."""
	out = output_folder(exp.out)
	ds = _load_dataset(args, exp)
	ds.require_both_classes()
	train_set, test_set = ds.split(exp.test_fraction, np.random.default_rng(exp.seed))
	train_set.require_both_classes()
	m = exp.m_bins
	x, y = train_set.features(m), train_set.labels
	trained, pre_prune = train_and_prune(x, y, m, exp.train, validation=(test_set.features(m), test_set.labels),
										 display_progress=True)
	rule = snap(trained.model, x, name=f'snapped-m{m}')
	save_checkpoint(trained.model, out / f'kan-m{m}.json', meta={**trained.summary(), 'pre_prune_accuracy': pre_prune})
	save_rule(rule, out / f'rule-m{m}.json')
	print_banner(f"[+] snapped rule ( inputs {sorted(set(rule.h0_expr.inputs) | set(rule.h1_expr.inputs))} )")
	print_banner(rule_to_string(rule), 'cyan')

	classifiers = {'network': trained.model, 'snapped': rule}
	test_sets = {ds.scenario: test_set}
	if exp.few_shot:
		shifted = exp.scenario.shifted()
		shifted_ds = generate_segment_dataset(exp.few_shot + len(test_set), exp.radar, shifted, seed=exp.seed + 1,
											  display_progress=True)
		few, shifted_test = shifted_ds.split(1.0 - exp.few_shot / len(shifted_ds), np.random.default_rng(exp.seed + 1))
		adapted = fine_tune(trained, x, y, few.features(m), few.labels, opts=exp.train,
							validation=(shifted_test.features(m), shifted_test.labels), display_progress=True)
		classifiers['fine-tuned'] = adapted.model
		test_sets[shifted.name] = shifted_test
		save_checkpoint(adapted.model, out / f'kan-m{m}-fine-tuned.json', meta=adapted.summary())

	table = accuracy_table(classifiers, test_sets, train_set, m)
	print_report(table)
	rates = fit_decay_rates(ds.features(m), ds.labels, m)
	report = EvalReport(curves=pd.DataFrame(columns=['snr_db', 'detector', 'pd', 'pfa']), trials=pd.DataFrame(),
						settings=exp.to_dict(), accuracy=table, decay_rates=[rates.to_dict()],
						kde=kde_export(rule, test_set.features(m), test_set.labels))
	write_report(report, out, stem=f'train-m{m}')
	return EXIT_OK

def exec_snap(args, exp):
	out = output_folder(exp.out)
	model, _ = load_checkpoint(args.checkpoint)
	x = SegmentDataset.load(args.dataset).features(model.m_bins) if args.dataset else None
	rule = snap(model, x, name=Path(args.checkpoint).stem, allow_spline=args.allow_spline)
	if args.calibrate_pfa:
		noise = generate_segment_dataset(args.calibration_segments, exp.radar, exp.scenario, seed=exp.seed)
		rule = calibrate_bias(rule, noise.features(rule.m_bins)[noise.labels == 0], args.calibrate_pfa)
	elif not args.raw:
		rule = calibrate_operating_point(rule, noise_maps(args.calibration_maps, exp.radar, exp.seed), args.map_pfa)
	save_rule(rule, out / f'{rule.name}-rule.json')
	print_banner(rule_to_string(rule), 'cyan')
	return EXIT_OK

def exec_detect(args, exp):
	out = output_folder(exp.out)
	rd_map = read_rd_map(args.map)
	det = build_detector(args.detector, config=exp.radar)
	detections = det.run(rd_map)
	if isinstance(det, OsCfarDetector):
		write_detections_csv(detections, out / 'detections.csv')
	else:
		write_detections(detections, out / ('detections.json' if args.json else 'detections.csv'))
	print_banner(f"[+] {det.detector_id}: {len(detections)} detection(s)")
	return EXIT_OK

def exec_eval(args, exp):
	detectors = build_detectors(exp.detectors, config=exp.radar)
	report = run_monte_carlo(exp.scenario, detectors, exp.snr_grid, exp.trials, exp.seed, exp.radar,
							 exp.max_workers, display_progress=True, debug_log=Path(output_folder(exp.out)) / 'eval-debug.log')
	write_report(report, exp.out, stem='eval', display_progress=True)
	return EXIT_OK

def exec_bench(args, exp):
	timing, exponents = runtime_compare(repeats=args.repeats, seed=exp.seed)
	sweep = cfar_window_sweep(repeats=args.repeats, seed=exp.seed)
	print_report(timing)
	print_report(sweep)
	report = EvalReport(curves=pd.DataFrame(columns=['snr_db', 'detector', 'pd', 'pfa']), trials=pd.DataFrame(),
						settings=exp.to_dict(), timing=timing, exponents=exponents)
	files = write_report(report, exp.out, stem='bench')
	sweep.to_csv(Path(exp.out) / 'bench-cfar-windows.csv', index=False)
	write_json(exponents, Path(exp.out) / 'bench-exponents.json')
	print_banner(f"[+] fitted exponents {exponents} ( {files['timing']} )")
	return EXIT_OK

SUBCOMMAND_FUNCTIONS = {
	'simulate': exec_simulate,
	'train': exec_train,
	'snap': exec_snap,
	'detect': exec_detect,
	'eval': exec_eval,
	'bench': exec_bench,
}

# ----------------------------------------------------------------------------------------
#  Argument parsing
# ----------------------------------------------------------------------------------------

def build_parser():
	common = argparse.ArgumentParser(add_help=False)
	common.add_argument('--config', help='experiment config document (json or yaml)')
	common.add_argument('--seed', type=int)
	common.add_argument('--out', help='output folder')

	parser = argparse.ArgumentParser(prog='rdkan', description='Range-Doppler segment detection workbench')
	sub = parser.add_subparsers(dest='command', required=True)

	p = sub.add_parser('simulate', parents=[common], help='synthesize a scene, IF cube and RD map')
	p.add_argument('--scene', help='scene json to render instead of sampling one')
	p.add_argument('--snr', type=float, help='scene SNR in dB')
	p.add_argument('--segments', type=int, default=0, help='also draw this many labelled segments')
	p.add_argument('--m-bins', dest='m_bins', type=int)

	p = sub.add_parser('train', parents=[common], help='train, prune and snap a KAN detector')
	p.add_argument('--dataset', help='segments.npz or a folder holding one')
	p.add_argument('--m-bins', dest='m_bins', type=int)
	p.add_argument('--n-samples', dest='n_samples', type=int)
	p.add_argument('--few-shot', dest='few_shot', type=int)

	p = sub.add_parser('snap', parents=[common], help='snap a saved checkpoint to a decision rule')
	p.add_argument('--checkpoint', required=True)
	p.add_argument('--dataset', help='segments.npz giving the input ranges')
	p.add_argument('--map-pfa', dest='map_pfa', type=float, default=DEFAULT_MAP_PFA,
				   help='share of noise-only maps allowed a detection ( default operating point )')
	p.add_argument('--calibration-maps', dest='calibration_maps', type=int, default=CALIBRATION_MAPS)
	p.add_argument('--calibrate-pfa', dest='calibrate_pfa', type=float, help='per-segment false-alarm target instead')
	p.add_argument('--calibration-segments', dest='calibration_segments', type=int, default=20000)
	p.add_argument('--raw', action='store_true', help='keep the snapped rule at bias 0')
	p.add_argument('--allow-spline', dest='allow_spline', action='store_true',
				   help='keep the sampled spline for edges no library function fits')

	p = sub.add_parser('detect', parents=[common], help='run one detector over a saved RD map')
	p.add_argument('--map', required=True, help='rd_map.bin written by simulate')
	p.add_argument('--detector', default='paper-eq7-m10')
	p.add_argument('--json', action='store_true', help='write json instead of csv')

	p = sub.add_parser('eval', parents=[common], help='Monte-Carlo P_D / P_FA comparison')
	p.add_argument('--detectors', nargs='+')
	p.add_argument('--snr-grid', dest='snr_grid', type=float, nargs='+')
	p.add_argument('--trials', type=int)
	p.add_argument('--max-workers', dest='max_workers', type=int)

	p = sub.add_parser('bench', parents=[common], help='runtime comparison across map sizes')
	p.add_argument('--repeats', type=int, default=3)
	return parser

def main(argv=None):
	args = build_parser().parse_args(argv)
	display_banner(f"rdkan {args.command}")
	try:
		exp = experiment_config(args)
		return SUBCOMMAND_FUNCTIONS[args.command](args, exp)
	except (ConfigError, DetectorError) as e:
		print_banner(f"[-] {e}")
		return EXIT_CONFIG
	except Exception as e:
		print_banner(f"[-] {type(e).__name__}: {e}")
		return EXIT_RUNTIME

# ----------------------------------------------------------------------------------------
#  main
# ----------------------------------------------------------------------------------------
if __name__ == "__main__":
	sys.exit(main())
# ----------------------------------------------------------------------------------------
