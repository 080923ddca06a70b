""" Closed-form H0/H1 decision rules snapped from trained KAN edges
"""
# ----------------------------------------------------------------------------------------
#  Imports
# ----------------------------------------------------------------------------------------
from dataclasses import dataclass, field, replace
import math
import warnings

import numpy as np
from scipy.optimize import curve_fit, OptimizeWarning

from ..common import read_config_file, write_json
from ..exceptions import ConfigError, DetectorError, SegmentError
from .kan_model import bspline_eval, silu

# ----------------------------------------------------------------------------------------
#  Some PreDefined Static Entries
# ----------------------------------------------------------------------------------------
SNAP_POINTS = 512
R2_SYMBOLIC = 0.9                   # below this an edge keeps its sampled spline, when splines are allowed
R2_TIE = 1e-4                       # simpler candidate wins within this R^2 distance

# candidate library, simplest first: y = c * f(a * x + b) + d
LIBRARY = {
	'const': lambda u: np.zeros_like(u),
	'linear': lambda u: u,
	'quadratic': lambda u: u ** 2,
	'silu': silu,
	'exp': lambda u: np.exp(np.clip(u, -50.0, 50.0)),
}
H0, H1 = 0, 1

# ----------------------------------------------------------------------------------------
#  Expressions
# ----------------------------------------------------------------------------------------
@dataclass(frozen=True)
class SymbolicTerm():
	input_index: int
	tag: str                        # library key, or 'spline' for a kept sampled spline
	a: float = 1.0
	b: float = 0.0
	c: float = 0.0
	d: float = 0.0
	fit_r2: float = 1.0
	samples: tuple = ()             # ( xs, ys ) when tag == 'spline'

	@property
	def symbolic(self):
		return self.tag != 'spline'

	def __call__(self, x):
		x = np.asarray(x, dtype=float)
		if self.tag == 'spline':
			xs, ys = (np.asarray(s, dtype=float) for s in self.samples)
			return np.interp(x, xs, ys)
		return self.c * LIBRARY[self.tag](self.a * x + self.b) + self.d

	def to_string(self):
		v = f"x{self.input_index}"
		if self.tag == 'const':
			return f"{self.d:.6g}"
		if self.tag == 'linear':
			off = self.c * self.b + self.d
			return f"{self.c * self.a:.6g}*{v}" + (f" {off:+.6g}" if off else "")
		if self.tag == 'spline':
			return f"spline({v})"
		return f"{self.c:.6g}*{self.tag}({self.a:.6g}*{v} {self.b:+.6g})" + (f" {self.d:+.6g}" if self.d else "")

	def to_dict(self):
		d = {'input_index': self.input_index, 'tag': self.tag, 'a': self.a, 'b': self.b,
			 'c': self.c, 'd': self.d, 'fit_r2': self.fit_r2}
		if self.samples: d['samples'] = [list(map(float, s)) for s in self.samples]
		return d

	@classmethod
	def from_dict(cls, d):
		tag = d['tag']
		if tag not in LIBRARY and tag != 'spline':
			raise ConfigError(f"unknown term function {tag!r}")
		samples = tuple(tuple(s) for s in d.get('samples', ()))
		return cls(int(d['input_index']), tag, float(d.get('a', 1.0)), float(d.get('b', 0.0)),
				   float(d.get('c', 0.0)), float(d.get('d', 0.0)), float(d.get('fit_r2', 1.0)), samples)


@dataclass(frozen=True)
class SymbolicExpr():
	n_inputs: int
	terms: tuple = ()
	constant: float = 0.0

	def __call__(self, x):
		x = np.asarray(x, dtype=float)
		x2 = np.atleast_2d(x)
		out = np.full(x2.shape[0], float(self.constant))
		for t in self.terms:
			out = out + t(x2[:, t.input_index])
		return out if x.ndim > 1 else out[0]

	@property
	def inputs(self):
		return sorted({t.input_index for t in self.terms})

	@property
	def symbolic(self):
		return all(t.symbolic for t in self.terms)

	def to_string(self):
		parts = [t.to_string() for t in self.terms]
		if self.constant or not parts: parts.append(f"{self.constant:.6g}")
		return " + ".join(parts).replace("+ -", "- ").replace("+ +", "+ ")

	def to_dict(self):
		return {'n_inputs': self.n_inputs, 'constant': self.constant, 'terms': [t.to_dict() for t in self.terms]}

	@classmethod
	def from_dict(cls, d):
		return cls(int(d['n_inputs']), tuple(SymbolicTerm.from_dict(t) for t in d.get('terms', [])),
				   float(d.get('constant', 0.0)))

	@classmethod
	def affine(cls, n_inputs, weights, constant=0.0):
		terms = tuple(SymbolicTerm(r, 'linear', c=float(w), fit_r2=1.0) for r, w in sorted(weights.items()))
		return cls(n_inputs, terms, float(constant))


@dataclass(frozen=True)
class DecisionRule():
	h0_expr: SymbolicExpr
	h1_expr: SymbolicExpr
	name: str = 'rule'
	bias: float = 0.0               # operating point: H1 iff h1 - h0 > bias

	@property
	def m_bins(self):
		return self.h0_expr.n_inputs

	def to_dict(self):
		return {
			'name': self.name,
			'm_bins': self.m_bins,
			'bias': self.bias,
			'expressions': {'h0': self.h0_expr.to_string(), 'h1': self.h1_expr.to_string()},
			'h0': self.h0_expr.to_dict(),
			'h1': self.h1_expr.to_dict(),
		}

	@classmethod
	def from_dict(cls, d):
		try:
			rule = cls(SymbolicExpr.from_dict(d['h0']), SymbolicExpr.from_dict(d['h1']),
					   d.get('name', 'rule'), float(d.get('bias', 0.0)))
		except (KeyError, TypeError, ValueError) as e:
			if isinstance(e, ConfigError): raise
			raise ConfigError(f"invalid rule document: {e}") from e
		if rule.h0_expr.n_inputs != rule.h1_expr.n_inputs:
			raise ConfigError("h0 and h1 expressions disagree on the number of inputs")
		return rule


# ----------------------------------------------------------------------------------------
#  Builtin reference detectors ( 10-bin and 5-bin affine rules )
# ----------------------------------------------------------------------------------------
BUILTIN_RULES = {
	'paper-eq7-m10': DecisionRule(
		h0_expr=SymbolicExpr.affine(10, {0: -10.288, 1: -1.14e-6}, 7.91),
		h1_expr=SymbolicExpr.affine(10, {0: 7.5514}, -5.797),
		name='paper-eq7-m10',
	),
	'paper-eq8-m5': DecisionRule(
		h0_expr=SymbolicExpr.affine(5, {1: -2.12e-8}, -1.65e-8),
		h1_expr=SymbolicExpr.affine(5, {0: 32.607, 1: -0.00085}, -28.818),
		name='paper-eq8-m5',
	),
}

def builtin_rule(name):
	try:
		return BUILTIN_RULES[name]
	except KeyError:
		raise DetectorError(f"unknown builtin rule {name!r}, expected one of {sorted(BUILTIN_RULES)}") from None

# ----------------------------------------------------------------------------------------
#  Evaluation
# ----------------------------------------------------------------------------------------

def eval_rule(rule, x):
	"""Hypothesis ( 0 = H0, 1 = H1 ) and margin h1 - h0 for one M-vector or a (B, M) batch."""
	x = np.asarray(x, dtype=float)
	if x.shape[-1] != rule.m_bins:
		raise SegmentError(f"rule {rule.name} takes {rule.m_bins} inputs, got {x.shape[-1]}")
	margin = rule.h1_expr(x) - rule.h0_expr(x)
	hypothesis = (margin > rule.bias).astype(np.int64) if np.ndim(margin) else int(margin > rule.bias)
	return hypothesis, margin

# bias so that at most pfa_segment of the noise-only segments cross it
def calibrate_bias(rule, noise_features, pfa_segment):
	if not 0.0 < pfa_segment < 1.0:
		raise ConfigError(f"pfa_segment must lie in (0, 1), got {pfa_segment}")
	noise_features = np.atleast_2d(np.asarray(noise_features, dtype=float))
	if not len(noise_features):
		raise ConfigError("calibration needs noise-only segments")
	_, margin = eval_rule(rule, noise_features)
	ranked = np.sort(np.atleast_1d(margin))[::-1]
	n_allowed = int(math.floor(pfa_segment * len(ranked)))
	bias = float(ranked[min(n_allowed, len(ranked) - 1)])
	return replace(rule, bias=bias)

# ----------------------------------------------------------------------------------------
#  Snapping
# ----------------------------------------------------------------------------------------

def r_squared(y, y_hat):
	ss_res = float(np.sum((y - y_hat) ** 2))
	ss_tot = float(np.sum((y - np.mean(y)) ** 2))
	if ss_tot <= 1e-30:
		return 1.0 if ss_res <= 1e-20 else 0.0
	return float(min(1.0, max(0.0, 1.0 - ss_res / ss_tot)))

# best ( a, b, c, d ) of one library function and its R^2
def fit_candidate(tag, xs, ys):
	if tag == 'const':
		return (1.0, 0.0, 0.0, float(np.mean(ys))), r_squared(ys, np.full_like(ys, np.mean(ys)))
	if tag == 'linear':
		p1, p0 = np.polyfit(xs, ys, 1)
		return (1.0, 0.0, float(p1), float(p0)), r_squared(ys, p1 * xs + p0)
	if tag == 'quadratic':
		p2, p1, p0 = np.polyfit(xs, ys, 2)
		if abs(p2) < 1e-12:
			return None, -math.inf
		b = p1 / (2 * p2)
		params = (1.0, float(b), float(p2), float(p0 - p1 ** 2 / (4 * p2)))
		return params, r_squared(ys, np.polyval([p2, p1, p0], xs))
	f = LIBRARY[tag]
	def model(x, a, b, c, d):
		return c * f(a * x + b) + d
	best, best_r2 = None, -math.inf
	for p0 in ((1.0, 0.0, 1.0, 0.0), (-1.0, 0.0, 1.0, 0.0), (2.0, -1.0, np.ptp(ys) or 1.0, float(np.min(ys)))):
		try:
			with warnings.catch_warnings():
				warnings.simplefilter('ignore', OptimizeWarning)
				warnings.simplefilter('ignore', RuntimeWarning)
				params, _ = curve_fit(model, xs, ys, p0=p0, maxfev=5000)
		except (RuntimeError, ValueError):
			continue
		y_hat = model(xs, *params)
		if not np.all(np.isfinite(y_hat)): continue
		r2 = r_squared(ys, y_hat)
		if r2 > best_r2:
			best, best_r2 = tuple(float(p) for p in params), r2
	return best, best_r2

# snap one sampled edge ( xs, ys ) to the library; a poor fit still takes the best library function
# unless allow_spline keeps the sampled spline instead
def snap_edge(input_index, xs, ys, allow_spline=False):
	fits = {tag: fit_candidate(tag, xs, ys) for tag in LIBRARY}
	top = max(r2 for _, r2 in fits.values())
	if allow_spline and top < R2_SYMBOLIC:
		return SymbolicTerm(input_index, 'spline', fit_r2=max(0.0, top), samples=(tuple(xs), tuple(ys)))
	for tag in LIBRARY:
		params, r2 = fits[tag]
		if params is not None and r2 >= top - R2_TIE:
			a, b, c, d = params
			return SymbolicTerm(input_index, tag, a, b, c, d, fit_r2=r2)

def snap(model, x=None, name='snapped', n_points=SNAP_POINTS, allow_spline=False):
	"""Replace every surviving edge of a single-layer [M, 2] model by a library function.

	Each edge is sampled on n_points over the data range of its input ( x ), or over its knot
	interval when no data is given. The result is purely symbolic unless allow_spline is set.
	"""
	if len(model.layers) != 1 or model.width[-1] != 2:
		raise ConfigError(f"snapping needs a single [M, 2] layer, model width is {model.width}")
	m_bins = model.m_bins
	x = None if x is None else np.asarray(x, dtype=float)
	exprs = []
	for q in (H0, H1):
		terms = []
		for layer, qq, r in model.active_edges():
			if qq != q: continue
			edge = model.edge(layer, q, r)
			lo, hi = (float(x[:, r].min()), float(x[:, r].max())) if x is not None else edge.interval
			if hi - lo < 1e-9: hi = lo + 1e-3
			xs = np.linspace(lo, hi, n_points)
			terms.append(snap_edge(r, xs, bspline_eval(edge, xs), allow_spline))
		exprs.append(SymbolicExpr(m_bins, tuple(terms)))
	return DecisionRule(exprs[H0], exprs[H1], name=name)

# ------------------------ [ RULE FILES ] ------------------------ #

def rule_to_string(rule):
	s = f"h0 = {rule.h0_expr.to_string()}\nh1 = {rule.h1_expr.to_string()}"
	if rule.bias: s += f"\nH1 iff h1 - h0 > {rule.bias:.6g}"
	return s

def save_rule(rule, file):
	write_json(rule.to_dict(), file)

def load_rule(file):
	return DecisionRule.from_dict(read_config_file(file))

# "paper-eq7-m10", "rule:<file.json>" or a plain rule file path
def resolve_rule(spec):
	if spec in BUILTIN_RULES:
		return builtin_rule(spec)
	if spec.startswith('rule:'):
		return load_rule(spec[len('rule:'):])
	if spec.endswith('.json'):
		return load_rule(spec)
	raise DetectorError(f"unknown rule {spec!r}")

# ----------------------------------------------------------------------------------------
#  Decay-rate view of the histogram
# ----------------------------------------------------------------------------------------
@dataclass(frozen=True)
class DecayRates():
	lambda0: float                  # noise
	lambda1: float                  # target
	p0_h0: float                    # mean first-bin mass per class
	p0_h1: float
	m_bins: int
	degenerate: tuple = field(default=(False, False))

	def to_dict(self):
		return {'lambda0': self.lambda0, 'lambda1': self.lambda1, 'p0_h0': self.p0_h0, 'p0_h1': self.p0_h1,
				'm_bins': self.m_bins, 'degenerate_h0': self.degenerate[0], 'degenerate_h1': self.degenerate[1]}


# lambda solving 1 - exp(-lambda / M) = p0; p0 >= 1 gives inf
def decay_rate(p0, m_bins):
	if p0 >= 1.0: return math.inf
	if p0 <= 0.0: return 0.0
	return -math.log(1.0 - p0) * m_bins

def fit_decay_rates(features, labels, m_bins):
	features = np.atleast_2d(np.asarray(features, dtype=float))
	labels = np.asarray(labels)
	if features.shape[1] != m_bins:
		raise SegmentError(f"features have {features.shape[1]} bins, expected {m_bins}")
	if not ((labels == 0).any() and (labels == 1).any()):
		raise ConfigError("decay-rate fit needs both labels")
	p = [float(features[labels == k, 0].mean()) for k in (0, 1)]
	return DecayRates(decay_rate(p[0], m_bins), decay_rate(p[1], m_bins), p[0], p[1], int(m_bins),
					  (p[0] >= 1.0, p[1] >= 1.0))

def decay_rate_decision(lambda0, lambda1, x, m_bins):
	"""Log-likelihood ratio of the first-bin mass under the two exponential fits; H1 iff > 0."""
	x0 = np.asarray(x, dtype=float)[..., 0]
	w = 1.0 / m_bins
	p0 = np.clip(1.0 - np.exp(-lambda0 * w), 1e-12, 1 - 1e-12)
	p1 = np.clip(1.0 - np.exp(-lambda1 * w), 1e-12, 1 - 1e-12)
	llr = x0 * np.log(p1 / p0) + (1.0 - x0) * np.log((1.0 - p1) / (1.0 - p0))
	hypothesis = (llr > 0).astype(np.int64) if np.ndim(llr) else int(llr > 0)
	return hypothesis, llr

# ----------------------------------------------------------------------------------------
#  main
# ----------------------------------------------------------------------------------------
if __name__ == "__main__":
	pass
# ----------------------------------------------------------------------------------------
