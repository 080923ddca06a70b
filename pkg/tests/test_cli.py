""" rdkan command line end to end
"""
# ----------------------------------------------------------------------------------------
#  Imports
# ----------------------------------------------------------------------------------------
import json

import pandas as pd
import pytest

from rdkan.cli import EXIT_CONFIG, EXIT_OK, ExperimentConfig, build_parser, experiment_config, main
from rdkan.evaluation import expand_roster
from rdkan.exceptions import ConfigError

# ----------------------------------------------------------------------------------------

def write_config(path, doc):
	path.write_text(json.dumps(doc))
	return str(path)

@pytest.fixture
def simulated(tmp_path):
	out = tmp_path / 'sim'
	assert main(['simulate', '--seed', '3', '--snr', '15', '--out', str(out)]) == EXIT_OK
	return out

# ------------------------ [ CONFIG ] ------------------------ #

def test_flags_override_config_document(tmp_path):
	cfg = write_config(tmp_path / 'exp.json', {'seed': 1, 'trials': 10, 'radar': {'n_chirps': 64}})
	args = build_parser().parse_args(['eval', '--config', cfg, '--seed', '9'])
	exp = experiment_config(args)
	assert exp.seed == 9
	assert exp.trials == 10
	assert exp.radar.n_chirps == 64

def test_config_round_trip():
	exp = ExperimentConfig(trials=12, detectors=['paper-eq8-m5'])
	assert ExperimentConfig.from_dict(exp.to_dict()) == exp

def test_default_roster_is_rule_plus_four_cfar_designs():
	exp = ExperimentConfig()
	assert exp.detectors == ['paper-eq7-m10', 'oscfar@1e-3..1e-6']
	assert len(expand_roster(exp.detectors)) == 5

def test_unknown_config_field():
	with pytest.raises(ConfigError):
		ExperimentConfig.from_dict({'trails': 3})

@pytest.mark.parametrize('doc', [{'bogus': 1}, {'trials': 0}, {'radar': {'n_chirps': 100}}])
def test_bad_config_exit_code(tmp_path, doc):
	cfg = write_config(tmp_path / 'exp.json', doc)
	assert main(['simulate', '--config', cfg, '--out', str(tmp_path / 'o')]) == EXIT_CONFIG

def test_missing_config_file(tmp_path):
	assert main(['simulate', '--config', str(tmp_path / 'absent.yaml')]) == EXIT_CONFIG

# ------------------------ [ SUBCOMMANDS ] ------------------------ #

def test_simulate_writes_outputs(simulated):
	for name in ('scene.json', 'cube.bin', 'rd_map.bin', 'rd_map.json', 'ground_truth.csv'):
		assert (simulated / name).exists(), name
	gt = pd.read_csv(simulated / 'ground_truth.csv')
	assert list(gt.columns) == ['target', 'bbox', 'range_m', 'velocity_mps']
	assert len(gt) == 1

def test_simulate_is_repeatable(tmp_path, simulated):
	again = tmp_path / 'again'
	assert main(['simulate', '--seed', '3', '--snr', '15', '--out', str(again)]) == EXIT_OK
	for name in ('cube.bin', 'rd_map.bin', 'ground_truth.csv'):
		assert (again / name).read_bytes() == (simulated / name).read_bytes()

def test_detect_csv_and_json(tmp_path, simulated):
	out = tmp_path / 'det'
	base = ['detect', '--map', str(simulated / 'rd_map.bin'), '--detector', 'paper-eq7-m10@raw', '--out', str(out)]
	assert main(base) == EXIT_OK
	assert (out / 'detections.csv').exists()
	assert main(base + ['--json']) == EXIT_OK
	assert 'detections' in json.loads((out / 'detections.json').read_text())

def test_detect_with_oscfar(tmp_path, simulated):
	out = tmp_path / 'cfar'
	assert main(['detect', '--map', str(simulated / 'rd_map.bin'), '--detector', 'oscfar@1e-4', '--out', str(out)]) == EXIT_OK
	assert (out / 'detections.csv').exists()

def test_detect_unknown_detector(tmp_path, simulated):
	assert main(['detect', '--map', str(simulated / 'rd_map.bin'), '--detector', 'magic', '--out', str(tmp_path)]) == EXIT_CONFIG

def test_eval_empty_roster(tmp_path):
	cfg = write_config(tmp_path / 'exp.json', {'detectors': [], 'trials': 1})
	assert main(['eval', '--config', cfg, '--out', str(tmp_path / 'o')]) == EXIT_CONFIG

def test_small_eval(tmp_path):
	out = tmp_path / 'eval'
	argv = ['eval', '--detectors', 'paper-eq7-m10@raw', 'oscfar@1e-3', '--snr-grid', '10', '--trials', '1',
			'--max-workers', '1', '--seed', '2', '--out', str(out)]
	assert main(argv) == EXIT_OK
	curves = pd.read_csv(out / 'eval-curves.csv')
	assert sorted(curves['detector']) == ['oscfar@0.001', 'paper-eq7-m10@raw']
	assert (out / 'eval.xlsx').exists() and (out / 'eval.html').exists()

@pytest.mark.slow
def test_train_then_snap(tmp_path):
	cfg = write_config(tmp_path / 'exp.json', {'n_samples': 400, 'train': {'max_iter': 20}})
	out = tmp_path / 'train'
	assert main(['train', '--config', cfg, '--out', str(out), '--m-bins', '10']) == EXIT_OK
	for name in ('kan-m10.json', 'rule-m10.json', 'train-m10.json', 'train-m10-kde.csv'):
		assert (out / name).exists(), name
	snap = ['snap', '--checkpoint', str(out / 'kan-m10.json'), '--out', str(out), '--calibration-maps', '40']
	assert main(snap) == EXIT_OK
	calibrated = json.loads((out / 'kan-m10-rule.json').read_text())
	assert main(snap + ['--raw']) == EXIT_OK
	raw = json.loads((out / 'kan-m10-rule.json').read_text())
	assert raw['bias'] == 0.0
	assert calibrated['expressions'] == raw['expressions']
	assert 'spline' not in json.dumps(raw)
