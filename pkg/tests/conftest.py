""" Shared fixtures and the --runslow switch
"""
# ----------------------------------------------------------------------------------------
#  Imports
# ----------------------------------------------------------------------------------------
import numpy as np
import pytest

from rdkan.detectors import KanModel, TrainOptions, train
from rdkan.radar_sim import RadarConfig, derive_geometry

# ----------------------------------------------------------------------------------------
#  Options
# ----------------------------------------------------------------------------------------

def pytest_addoption(parser):
	parser.addoption('--runslow', action='store_true', default=False, help='run statistical and acceptance tests')

def pytest_configure(config):
	config.addinivalue_line('markers', 'slow: statistical / acceptance test, needs --runslow')

def pytest_collection_modifyitems(config, items):
	if config.getoption('--runslow'):
		return
	skip_slow = pytest.mark.skip(reason='needs --runslow')
	for item in items:
		if 'slow' in item.keywords:
			item.add_marker(skip_slow)

# ----------------------------------------------------------------------------------------
#  Fixtures
# ----------------------------------------------------------------------------------------

@pytest.fixture
def radar_config():
	return RadarConfig.table_default()

@pytest.fixture
def geometry(radar_config):
	return derive_geometry(radar_config)

@pytest.fixture
def rng():
	return np.random.default_rng(1234)

# 1-D separable toy set: H1 iff x0 > 0.8, the rest of the histogram is filler
def make_toy_features():
	rng = np.random.default_rng(7)
	n, m = 400, 5
	x0 = np.concatenate([rng.uniform(0.45, 0.7, n // 2), rng.uniform(0.9, 1.0, n // 2)])
	rest = rng.dirichlet(np.ones(m - 1), n) * (1.0 - x0)[:, None]
	x = np.column_stack([x0, rest])
	y = np.concatenate([np.zeros(n // 2, dtype=np.int64), np.ones(n // 2, dtype=np.int64)])
	order = rng.permutation(n)
	return x[order], y[order]

@pytest.fixture
def toy_features():
	return make_toy_features()

# [5, 2] model trained once per session on the toy set
@pytest.fixture(scope="session")
def toy_model():
	x, y = make_toy_features()
	return train(KanModel([5, 2], seed=0), x, y, TrainOptions(max_iter=60)).model
