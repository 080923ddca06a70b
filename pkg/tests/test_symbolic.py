""" Decision rules, snapping and decay rates
"""
# ----------------------------------------------------------------------------------------
#  Imports
# ----------------------------------------------------------------------------------------
import numpy as np
import pytest
import torch

from rdkan.exceptions import ConfigError, DetectorError, SegmentError
from rdkan.detectors import (
	BUILTIN_RULES, DecisionRule, KanModel, SymbolicExpr, builtin_rule, calibrate_bias, decay_rate_decision,
	eval_rule, fit_decay_rates, forward, load_rule, resolve_rule, rule_to_string, save_rule, snap, snap_edge,
	train_and_prune,
)
from rdkan.detectors.symbolic import decay_rate, fit_candidate, r_squared
from rdkan.rdmap import generate_segment_dataset

# ----------------------------------------------------------------------------------------

def m10(x0, x1=0.0):
	x = np.zeros(10)
	x[0], x[1] = x0, x1
	return x

def m5(x0, x1=0.0):
	x = np.zeros(5)
	x[0], x[1] = x0, x1
	return x

# ------------------------ [ BUILTIN RULES ] ------------------------ #

def test_builtin_example_values():
	rule = builtin_rule('paper-eq7-m10')
	x = m10(0.92, 0.03)
	assert rule.h0_expr(x) == pytest.approx(-1.555, abs=5e-4)
	assert rule.h1_expr(x) == pytest.approx(1.150, abs=5e-4)
	hypothesis, margin = eval_rule(rule, x)
	assert hypothesis == 1
	assert margin == pytest.approx(1.150 + 1.555, abs=1e-3)
	assert eval_rule(rule, m10(0.60))[0] == 0

@pytest.mark.parametrize('name, crossover', [('paper-eq7-m10', 0.7684), ('paper-eq8-m5', 0.8838)])
def test_builtin_crossover(name, crossover):
	rule = builtin_rule(name)
	xs = np.linspace(0.0, 1.0, 100_001)
	x = np.zeros((len(xs), rule.m_bins))
	x[:, 0] = xs
	hypothesis, margin = eval_rule(rule, x)
	flip = xs[np.argmax(hypothesis == 1)]
	assert flip == pytest.approx(crossover, abs=5e-4)
	assert np.all(hypothesis[xs < flip] == 0)
	assert np.all(np.diff(margin) > 0)

def test_m10_sign_change_between_768_and_769():
	rule = builtin_rule('paper-eq7-m10')
	assert eval_rule(rule, m10(0.768))[1] < 0 < eval_rule(rule, m10(0.769))[1]

def test_builtin_decision_ignores_second_bin(rng):
	for name, make, cross in (('paper-eq7-m10', m10, 0.7684), ('paper-eq8-m5', m5, 0.8838)):
		rule = builtin_rule(name)
		for x0 in rng.uniform(0, 1, 200):
			if abs(x0 - cross) < 0.01: continue
			base = eval_rule(rule, make(x0))[0]
			for dx1 in (-0.1, 0.1):
				assert eval_rule(rule, make(x0, max(0.0, 0.05 + dx1)))[0] == base

def test_ties_go_to_h0():
	expr = SymbolicExpr.affine(2, {0: 1.0})
	rule = DecisionRule(expr, expr)
	assert eval_rule(rule, [0.3, 0.2]) == (0, 0.0)

def test_arity_mismatch():
	with pytest.raises(SegmentError):
		eval_rule(builtin_rule('paper-eq7-m10'), np.zeros(5))

def test_unknown_builtin():
	with pytest.raises(DetectorError):
		builtin_rule('no-such-rule')
	assert set(BUILTIN_RULES) == {'paper-eq7-m10', 'paper-eq8-m5'}

def test_rule_string():
	s = rule_to_string(builtin_rule('paper-eq7-m10'))
	assert s.splitlines()[0] == 'h0 = -10.288*x0 - 1.14e-06*x1 + 7.91'
	assert s.splitlines()[1] == 'h1 = 7.5514*x0 - 5.797'

# ------------------------ [ OPERATING POINT ] ------------------------ #

def test_calibrate_bias_limits_false_alarms(rng):
	rule = builtin_rule('paper-eq7-m10')
	noise = np.zeros((1000, 10))
	noise[:, 0] = rng.uniform(0.5, 0.85, 1000)
	calibrated = calibrate_bias(rule, noise, 1e-2)
	hits = eval_rule(calibrated, noise)[0].sum()
	assert hits <= 10
	assert calibrated.bias > 0
	assert 'H1 iff' in rule_to_string(calibrated)

def test_calibrate_bias_bad_target():
	with pytest.raises(ConfigError):
		calibrate_bias(builtin_rule('paper-eq7-m10'), np.zeros((3, 10)), 0.0)

# ------------------------ [ FILES ] ------------------------ #

def test_rule_file(tmp_path):
	rule = builtin_rule('paper-eq8-m5')
	save_rule(rule, tmp_path / 'rule.json')
	back = load_rule(tmp_path / 'rule.json')
	assert back == rule
	assert resolve_rule(f"rule:{tmp_path / 'rule.json'}") == rule
	assert resolve_rule('paper-eq7-m10') is BUILTIN_RULES['paper-eq7-m10']

def test_bad_rule_file(tmp_path):
	(tmp_path / 'rule.json').write_text('{"h0": {"n_inputs": 2, "terms": [{"input_index": 0, "tag": "sinh"}]}, "h1": {"n_inputs": 2}}')
	with pytest.raises(ConfigError):
		load_rule(tmp_path / 'rule.json')
	with pytest.raises(DetectorError):
		resolve_rule('something-else')

# ------------------------ [ SNAPPING ] ------------------------ #

def test_linear_edge_snaps_to_linear():
	xs = np.linspace(0, 1, 512)
	term = snap_edge(0, xs, 3.0 * xs - 2.0)
	assert term.tag == 'linear'
	assert term.fit_r2 >= 0.999
	np.testing.assert_allclose(term(xs), 3.0 * xs - 2.0, atol=1e-9)

def test_constant_edge_snaps_to_const():
	xs = np.linspace(0, 1, 512)
	term = snap_edge(2, xs, np.full_like(xs, 0.4))
	assert term.tag == 'const'
	assert term(xs) == pytest.approx(0.4)

def test_exponential_edge():
	xs = np.linspace(0, 1, 512)
	params, r2 = fit_candidate('exp', xs, 0.5 * np.exp(2.0 * xs) + 1.0)
	assert r2 >= 0.999

def test_rough_edge_keeps_spline_when_allowed():
	xs = np.linspace(0, 1, 512)
	term = snap_edge(1, xs, np.sin(40 * xs), allow_spline=True)
	assert term.tag == 'spline'
	assert not term.symbolic
	assert term(0.5) == pytest.approx(np.sin(20.0), abs=1e-2)

def test_rough_edge_takes_best_library_function():
	xs = np.linspace(0, 1, 512)
	term = snap_edge(1, xs, np.sin(40 * xs))
	assert term.symbolic
	assert term.tag in ('const', 'linear', 'quadratic', 'silu', 'exp')
	assert term.fit_r2 < 0.9

def test_r_squared_bounds():
	y = np.array([1.0, 2.0, 3.0])
	assert r_squared(y, y) == 1.0
	assert r_squared(y, -10 * y) == 0.0

def test_snap_agrees_with_network(toy_model, toy_features):
	x, _ = toy_features
	rule = snap(toy_model, x)
	assert rule.m_bins == 5
	logits = forward(toy_model, x)
	network = (logits[:, 1] > logits[:, 0]).astype(int)
	assert np.mean(eval_rule(rule, x)[0] == network) >= 0.95

def test_snapped_rule_is_purely_symbolic(toy_model, toy_features):
	x, _ = toy_features
	rule = snap(toy_model, x)
	assert rule.h0_expr.symbolic and rule.h1_expr.symbolic
	assert 'spline' not in rule_to_string(rule)

def test_snap_rejects_deep_models():
	with pytest.raises(ConfigError):
		snap(KanModel([5, 3, 2]))

def test_snap_single_edge_model():
	model = KanModel([3, 2], seed=0)
	with torch.no_grad():
		model.layers[0].mask.zero_()
		model.layers[0].mask[1, 0] = 1.0
	rule = snap(model)
	assert rule.h0_expr.terms == ()
	assert rule.h1_expr.inputs == [0]

# ------------------------ [ DECAY RATES ] ------------------------ #

@pytest.mark.parametrize('p0, expected', [(0.9243, 25.809), (0.6062, 9.32), (1 - np.exp(-1), 10.0)])
def test_decay_rate_values(p0, expected):
	assert decay_rate(p0, 10) == pytest.approx(expected, abs=0.01)

def test_decay_rate_degenerate():
	assert decay_rate(1.0, 10) == float('inf')

def test_fit_decay_rates():
	x = np.zeros((4, 10))
	x[:, 0] = [0.9243, 0.9243, 0.6062, 0.6062]
	x[:, 1] = 1 - x[:, 0]
	rates = fit_decay_rates(x, [1, 1, 0, 0], 10)
	assert rates.lambda1 == pytest.approx(25.809, abs=0.01)
	assert rates.lambda0 == pytest.approx(9.32, abs=0.01)
	assert rates.lambda1 > rates.lambda0
	with pytest.raises(ConfigError):
		fit_decay_rates(x, [1, 1, 1, 1], 10)

def test_decay_rate_decision():
	hyp, llr = decay_rate_decision(9.32, 25.809, np.array([m10(0.95), m10(0.6)]), 10)
	assert list(hyp) == [1, 0]
	assert llr[0] > 0 > llr[1]

@pytest.mark.slow
@pytest.mark.parametrize('seed', [0, 1, 2])
def test_target_decays_faster_on_synthetic_batches(seed):
	ds = generate_segment_dataset(2000, seed=seed)
	rates = fit_decay_rates(ds.features(10), ds.labels, 10)
	assert rates.lambda1 > rates.lambda0

# ------------------------ [ TRAINED RULES ] ------------------------ #

@pytest.mark.slow
@pytest.mark.parametrize('m_bins, min_accuracy', [(10, 0.97), (5, 0.96)])
def test_trained_rule_relies_on_first_bin(m_bins, min_accuracy):
	ds = generate_segment_dataset(26236, seed=3)
	train_set, test_set = ds.split(0.2, np.random.default_rng(3))
	x, y = train_set.features(m_bins), train_set.labels
	xt, yt = test_set.features(m_bins), test_set.labels
	tm, _ = train_and_prune(x, y, m_bins, validation=(xt, yt))
	assert tm.val_accuracy >= min_accuracy
	assert 0 in tm.model.active_inputs()
	rule = snap(tm.model, x)
	assert rule.h0_expr.symbolic and rule.h1_expr.symbolic
	decisions, _ = eval_rule(rule, xt)
	only_x0 = np.zeros_like(xt)
	only_x0[:, 0] = xt[:, 0]
	assert np.mean(eval_rule(rule, only_x0)[0] != decisions) <= 0.01
