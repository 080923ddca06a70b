""" OS-CFAR design and detection
"""
# ----------------------------------------------------------------------------------------
#  Imports
# ----------------------------------------------------------------------------------------
import numpy as np
import pytest

from rdkan.exceptions import ConfigError
from rdkan.detectors import OsCfarConfig, os_cfar_detect, os_cfar_mask, os_cfar_pfa, solve_alpha, n_tested_cuts, write_detections_csv

# ----------------------------------------------------------------------------------------

def test_default_window():
	cfg = OsCfarConfig()
	assert cfg.n_ref == 104
	assert cfg.k_rank == 78
	assert cfg.reference_mask.sum() == 104
	assert not cfg.reference_mask[8, 3]
	assert cfg.detector_id == 'oscfar@0.001'

def test_alpha_solves_design_pfa():
	for pfa in (1e-3, 1e-4, 1e-5, 1e-6):
		alpha = solve_alpha(pfa, 104, 78)
		assert os_cfar_pfa(alpha, 104, 78) == pytest.approx(pfa, rel=1e-9)

def test_alpha_monotone_in_pfa():
	alphas = [solve_alpha(p, 104, 78) for p in (0.5, 1e-1, 1e-3, 1e-4, 1e-5, 1e-6)]
	assert all(a < b for a, b in zip(alphas, alphas[1:]))
	assert solve_alpha(1 - 1e-9, 104, 78) < 1e-6

@pytest.mark.parametrize('pfa', [0.0, 1.0, -0.1, 2.0])
def test_degenerate_pfa_rejected(pfa):
	with pytest.raises(ConfigError):
		solve_alpha(pfa, 104, 78)

def test_bad_window_rejected():
	with pytest.raises(ConfigError):
		OsCfarConfig(window=(16, 7))
	with pytest.raises(ConfigError):
		OsCfarConfig(window=(5, 3), guard=(3, 1))
	with pytest.raises(ConfigError):
		OsCfarConfig(k_rank=105)

def test_flat_map_no_detections():
	assert os_cfar_detect(np.full((64, 32), 5.0)) == []

def test_tone_in_noise_detected(rng):
	power = rng.exponential(size=(64, 32))
	power[30, 15] = 10 ** 2.5 * power.mean()
	cfg = OsCfarConfig()
	detections = os_cfar_detect(power, cfg)
	assert (30, 15) in {(d.range_bin, d.doppler_bin) for d in detections}
	hit = next(d for d in detections if (d.range_bin, d.doppler_bin) == (30, 15))
	ref = power[22:39, 12:19][cfg.reference_mask]
	assert hit.threshold == pytest.approx(cfg.alpha * np.sort(ref)[cfg.k_rank - 1])

def test_scale_invariance(rng):
	power = rng.exponential(size=(64, 32))
	cfg = OsCfarConfig(pfa_design=1e-2)
	np.testing.assert_array_equal(os_cfar_mask(power, cfg), os_cfar_mask(power * 1024.0, cfg))

def test_edge_cuts_skipped():
	power = np.zeros((64, 32))
	power[0, 0] = 1e9
	assert os_cfar_detect(power) == []
	assert n_tested_cuts((256, 128), OsCfarConfig()) == 240 * 122

def test_detections_csv(tmp_path, rng):
	power = rng.exponential(size=(64, 32))
	power[30, 15] = 1e6
	write_detections_csv(os_cfar_detect(power), tmp_path / 'cuts.csv')
	lines = (tmp_path / 'cuts.csv').read_text().splitlines()
	assert lines[0] == 'cut_range_bin,cut_doppler_bin,power,threshold'
	assert len(lines) >= 2

@pytest.mark.slow
@pytest.mark.parametrize('pfa', [1e-3, 1e-4])
def test_empirical_false_alarm_rate(pfa):
	rng = np.random.default_rng(42)
	cfg = OsCfarConfig(pfa_design=pfa)
	alarms = tested = 0
	while tested < 10_000_000:
		power = rng.exponential(size=(512, 512))
		alarms += int(os_cfar_mask(power, cfg).sum())
		tested += n_tested_cuts(power.shape, cfg)
	assert 0.3 * pfa <= alarms / tested <= 3 * pfa
