""" Spline edges, KAN forward / gradients, training, pruning and checkpoints
"""
# ----------------------------------------------------------------------------------------
#  Imports
# ----------------------------------------------------------------------------------------
import copy
import warnings

import numpy as np
import pytest
import torch
from scipy.interpolate import BSpline
from torch.func import functional_call

from rdkan.exceptions import ConfigError, PruneError, SegmentError, TrainingError
from rdkan.detectors import (
	KanModel, SplineEdge, TrainOptions, accuracy, bspline_basis, bspline_eval, drop_inputs, edge_scores, fine_tune, forward,
	input_scores, load_checkpoint, predict, prune, save_checkpoint, silu, train, train_and_prune,
)
from rdkan.detectors.kan_model import uniform_knots
from rdkan.radar_sim import ScenarioSpec
from rdkan.rdmap import generate_segment_dataset

# ----------------------------------------------------------------------------------------

def zero_model(m=4):
	model = KanModel([m, 2], seed=0)
	with torch.no_grad():
		for p in model.parameters():
			p.zero_()
	return model

# ------------------------ [ EDGES ] ------------------------ #

def test_zero_coefficients_give_silu():
	edge = SplineEdge.uniform()
	assert bspline_eval(edge, 0.0) == 0.0
	xs = np.linspace(-2, 3, 11)
	np.testing.assert_allclose(bspline_eval(edge, xs), silu(xs))

@pytest.mark.parametrize('lo, hi', [(0.0, 1.0), (-0.3, 0.7), (0.2, 0.25)])
def test_partition_of_unity(lo, hi):
	grid = uniform_knots(lo, hi)
	xs = np.linspace(lo, hi, 101)
	np.testing.assert_allclose(bspline_basis(xs, grid).sum(axis=1), 1.0, atol=1e-9)

def test_edge_derivative_matches_finite_difference(rng):
	edge = SplineEdge.uniform(coeffs=rng.normal(size=6), base_scale=0.7, spline_scale=1.3)
	spl = BSpline(edge.grid, edge.coeffs, edge.order)
	h = 1e-5
	for x in (0.1, 0.37, 0.5, 0.93):
		fd = (bspline_eval(edge, x + h) - bspline_eval(edge, x - h)) / (2 * h)
		sig = 1 / (1 + np.exp(-x))
		analytic = 0.7 * (sig + x * sig * (1 - sig)) + 1.3 * spl.derivative()(x)
		assert fd == pytest.approx(analytic, rel=1e-4, abs=1e-8)

def test_linear_extension_outside_grid(rng):
	edge = SplineEdge.uniform(coeffs=rng.normal(size=6), base_scale=0.0)
	spl = BSpline(edge.grid, edge.coeffs, edge.order)
	for x, end in ((1.5, 1.0), (2.0, 1.0), (-0.4, 0.0)):
		assert bspline_eval(edge, x) == pytest.approx(spl(end) + spl.derivative()(end) * (x - end), rel=1e-9)

# ------------------------ [ FORWARD ] ------------------------ #

def test_zero_network_gives_zero_logits(rng):
	np.testing.assert_array_equal(forward(zero_model(), rng.uniform(size=(5, 4))), np.zeros((5, 2)))

def test_single_path(rng):
	model = KanModel([4, 2], seed=3)
	layer = model.layers[0]
	with torch.no_grad():
		layer.mask.zero_()
		layer.mask[1, 0] = 1.0
	x = np.column_stack([np.linspace(-0.2, 1.3, 16), rng.uniform(size=(16, 3))])
	logits = forward(model, x)
	np.testing.assert_array_equal(logits[:, 0], 0.0)
	np.testing.assert_allclose(logits[:, 1], bspline_eval(model.edge(0, 1, 0), x[:, 0]), rtol=1e-9, atol=1e-12)

def test_torch_and_scipy_edges_agree(rng):
	model = KanModel([3, 2], seed=1)
	x = rng.uniform(-0.5, 1.5, size=(32, 3))
	acts = model.edge_activations(x)[0].detach().numpy()
	for q in range(2):
		for r in range(3):
			np.testing.assert_allclose(acts[:, q, r], bspline_eval(model.edge(0, q, r), x[:, r]), rtol=1e-9, atol=1e-12)

def test_edge_extraction_is_warning_free():
	model = KanModel([3, 2], seed=1)
	with warnings.catch_warnings():
		warnings.simplefilter('error')
		edge = model.edge(0, 1, 2)
	assert isinstance(edge.base_scale, float) and isinstance(edge.spline_scale, float)
	assert edge.base_scale == pytest.approx(model.layers[0].base_scale[1, 2].item())

def test_identical_edges_are_symmetric(rng):
	model = KanModel([3, 2], seed=2)
	layer = model.layers[0]
	with torch.no_grad():
		layer.coef[:, 1] = layer.coef[:, 0]
		layer.base_scale[:, 1] = layer.base_scale[:, 0]
		layer.spline_scale[:, 1] = layer.spline_scale[:, 0]
	x = rng.uniform(size=(8, 3))
	np.testing.assert_allclose(forward(model, x), forward(model, x[:, [1, 0, 2]]), rtol=1e-12)

def test_wrong_arity_rejected():
	with pytest.raises(SegmentError):
		forward(KanModel([4, 2]), np.zeros((2, 5)))

def test_bad_width_rejected():
	with pytest.raises(ConfigError):
		KanModel([4])

def test_ties_predict_h0():
	np.testing.assert_array_equal(predict(zero_model(), np.full((3, 4), 0.25)), [0, 0, 0])

# ------------------------ [ GRADIENTS ] ------------------------ #

def test_gradcheck_parameters(rng):
	model = KanModel([3, 2], seed=4)
	x = torch.as_tensor(rng.uniform(-0.2, 1.2, size=(6, 3)), dtype=torch.float64)
	names = ['layers.0.coef', 'layers.0.base_scale', 'layers.0.spline_scale']
	params = tuple(dict(model.named_parameters())[n].detach().clone().requires_grad_(True) for n in names)
	def f(*p):
		return functional_call(model, dict(zip(names, p)), (x,))
	assert torch.autograd.gradcheck(f, params, eps=1e-6, atol=1e-6, rtol=1e-4)

def test_gradcheck_inputs(rng):
	model = KanModel([3, 2], seed=5)
	x = torch.as_tensor(rng.uniform(0.05, 0.95, size=(4, 3)), dtype=torch.float64).requires_grad_(True)
	assert torch.autograd.gradcheck(model, (x,), eps=1e-6, atol=1e-6, rtol=1e-4)

# ------------------------ [ GRID ] ------------------------ #

def test_update_grid_moves_interval_and_keeps_shape(rng):
	model = KanModel([2, 2], seed=6)
	x = torch.as_tensor(rng.uniform(0.3, 0.6, size=(200, 2)), dtype=torch.float64)
	before = model(x).detach()
	model.update_grid(x)
	lo, hi = model.layers[0].interval
	assert float(lo[0]) == pytest.approx(float(x[:, 0].min()) - 1e-3)
	assert float(hi[0]) == pytest.approx(float(x[:, 0].max()) + 1e-3)
	torch.testing.assert_close(model(x).detach(), before, rtol=2e-2, atol=2e-2)

# ------------------------ [ TRAINING ] ------------------------ #

def test_training_separable_toy(toy_features):
	x, y = toy_features
	tm = train(KanModel([5, 2], seed=0), x, y, TrainOptions(max_iter=60))
	assert tm.train_accuracy >= 0.99
	assert tm.n_iter == len(tm.history) <= 60
	assert tm.history[-1] < tm.history[0]
	assert tm.summary()['m_bins'] == 5

def test_entropy_penalty_adds_to_objective(toy_features):
	from rdkan.detectors.kan_train import objective
	x, y = toy_features
	model = KanModel([5, 2], seed=0)
	xt = torch.as_tensor(x, dtype=torch.float64)
	yt = torch.as_tensor(y)
	w = torch.ones(len(y), dtype=torch.float64)
	ce = float(objective(model, xt, yt, w))
	l1 = float(objective(model, xt, yt, w, reg_lambda=0.1))
	both = float(objective(model, xt, yt, w, reg_lambda=0.1, reg_entropy=2.0))
	assert ce < l1 < both
	assert float(objective(model, xt, yt, w, reg_lambda=0.0, reg_entropy=2.0)) == pytest.approx(ce)

def test_training_leaves_input_model_untouched(toy_features):
	x, y = toy_features
	model = KanModel([5, 2], seed=0)
	before = copy.deepcopy(model.state_dict())
	train(model, x, y, TrainOptions(max_iter=5))
	for k, v in model.state_dict().items():
		torch.testing.assert_close(v, before[k])

def test_single_class_rejected(toy_features):
	x, _ = toy_features
	with pytest.raises(TrainingError):
		train(KanModel([5, 2]), x, np.zeros(len(x), dtype=np.int64))

def test_non_finite_features_rejected(toy_features):
	x, y = toy_features
	x = x.copy()
	x[0, 0] = np.nan
	with pytest.raises(TrainingError):
		train(KanModel([5, 2]), x, y)

def test_divergence_exhausts_restarts(toy_features, monkeypatch):
	from rdkan.detectors import kan_train
	monkeypatch.setattr(kan_train, 'objective', lambda *a, **k: torch.tensor(float('nan'), dtype=torch.float64, requires_grad=True))
	x, y = toy_features
	with pytest.raises(TrainingError, match='diverged'):
		train(KanModel([5, 2]), x, y, TrainOptions(max_iter=3, max_restarts=2))

def test_fine_tune_needs_enough_samples(toy_features):
	x, y = toy_features
	tm = train(KanModel([5, 2]), x, y, TrainOptions(max_iter=10))
	with pytest.raises(TrainingError, match='14'):
		fine_tune(tm, x, y, x[:13], y[:13])

def test_fine_tune_same_distribution(toy_features):
	x, y = toy_features
	opts = TrainOptions(max_iter=40)
	tm = train(KanModel([5, 2]), x[:300], y[:300], opts)
	adapted = fine_tune(tm, x[:300], y[:300], x[300:320], y[300:320], opts=opts, validation=(x[320:], y[320:]))
	assert adapted.val_accuracy >= accuracy(tm.model, x[320:], y[320:]) - 0.05

@pytest.mark.slow
def test_fine_tune_recovers_on_shifted_scenario():
	nominal = ScenarioSpec()
	ds = generate_segment_dataset(4000, scenario=nominal, seed=4)
	few, shifted_test = generate_segment_dataset(2000, scenario=nominal.shifted(), seed=5).split(0.9, np.random.default_rng(5))
	x, y = ds.features(10), ds.labels
	opts = TrainOptions(max_iter=100)
	tm = train(KanModel([10, 2]), x, y, opts)
	before = accuracy(tm.model, shifted_test.features(10), shifted_test.labels)
	adapted = fine_tune(tm, x, y, few.features(10), few.labels, opts=opts,
						validation=(shifted_test.features(10), shifted_test.labels))
	assert adapted.val_accuracy >= before - 0.005

# ------------------------ [ PRUNING ] ------------------------ #

def test_zero_thresholds_prune_nothing(toy_features):
	x, _ = toy_features
	model = KanModel([5, 2], seed=1)
	pruned = prune(model, x, 0.0, 0.0)
	assert pruned.active_edges() == model.active_edges()
	np.testing.assert_array_equal(forward(pruned, x), forward(model, x))

def test_pruned_forward_equals_zeroed_edges(toy_features):
	x, _ = toy_features
	model = KanModel([5, 2], seed=1)
	pruned = prune(model, x, 0.0, 0.999)
	assert len(pruned.active_edges()) < 10
	manual = copy.deepcopy(model)
	keep = pruned.layers[0].mask
	with torch.no_grad():
		manual.layers[0].coef.mul_(keep.unsqueeze(-1))
		manual.layers[0].base_scale.mul_(keep)
	np.testing.assert_array_equal(forward(pruned, x), forward(manual, x))

def test_prune_everything_is_an_error(toy_features):
	x, _ = toy_features
	with pytest.raises(PruneError):
		prune(KanModel([5, 2]), x, 0.0, 1.5)

def test_edge_scores_relative(toy_features):
	x, _ = toy_features
	scores = edge_scores(KanModel([5, 2]), x)[0]
	assert scores.shape == (2, 5)
	assert scores.max() == pytest.approx(1.0)

def test_input_scores_follow_surviving_edges(toy_features):
	x, _ = toy_features
	model = KanModel([5, 2], seed=1)
	scores = input_scores(model, x)
	assert scores.shape == (5,) and scores.max() == pytest.approx(1.0)
	dropped = drop_inputs(model, [2, 4])
	after = input_scores(dropped, x)
	assert after[2] == 0.0 and after[4] == 0.0
	assert dropped.active_inputs() == [0, 1, 3]
	assert model.active_inputs() == [0, 1, 2, 3, 4]

def test_drop_inputs_errors():
	with pytest.raises(PruneError):
		drop_inputs(KanModel([3, 2]), [0, 1, 2])
	with pytest.raises(PruneError):
		drop_inputs(KanModel([3, 2]), [3])

def test_train_and_prune_keeps_first_bin(toy_features):
	x, y = toy_features
	opts = TrainOptions(max_iter=60)
	tm, pre = train_and_prune(x, y, 5, opts)
	assert 0 in tm.model.active_inputs()
	assert len(tm.model.active_inputs()) < 5
	assert tm.train_accuracy >= pre - opts.max_accuracy_drop

def test_zero_prune_rounds_keeps_threshold_prune(toy_features):
	x, y = toy_features
	opts = TrainOptions(max_iter=30, prune_rounds=0)
	tm, _ = train_and_prune(x, y, 5, opts)
	trained = train(KanModel([5, 2], seed=0), x, y, opts)
	assert tm.model.active_edges() == prune(trained.model, x, opts.node_threshold, opts.edge_threshold).active_edges()

# ------------------------ [ CHECKPOINT ] ------------------------ #

def test_checkpoint(tmp_path, toy_features):
	x, _ = toy_features
	model = prune(KanModel([5, 2], seed=8), x, 0.0, 0.3)
	save_checkpoint(model, tmp_path / 'kan.json', meta={'note': 'toy'})
	back, meta = load_checkpoint(tmp_path / 'kan.json')
	assert meta == {'note': 'toy'}
	assert back.active_edges() == model.active_edges()
	np.testing.assert_allclose(forward(back, x), forward(model, x), rtol=1e-12)

def test_bad_checkpoint(tmp_path):
	(tmp_path / 'kan.json').write_text('{"width": [5, 2]}')
	with pytest.raises(ConfigError):
		load_checkpoint(tmp_path / 'kan.json')
