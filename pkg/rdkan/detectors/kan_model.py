""" Kolmogorov-Arnold network with spline-plus-silu edges

Every edge carries phi(x) = base_scale * silu(x) + spline_scale * sum_i c_i B_i(x); an output
node sums the activations of its incoming edges. Outside its knot interval a spline is
extended linearly from the boundary value and slope.
"""
# ----------------------------------------------------------------------------------------
#  Imports
# ----------------------------------------------------------------------------------------
from dataclasses import dataclass
import copy

import numpy as np
import torch
import torch.nn.functional as F
from scipy.interpolate import BSpline
from scipy.special import expit

from ..common import read_config_file, write_json
from ..exceptions import ConfigError, PruneError, SegmentError

# ----------------------------------------------------------------------------------------
#  Some PreDefined Static Entries
# ----------------------------------------------------------------------------------------
DTYPE = torch.float64
GRID_COUNT = 3
SPLINE_ORDER = 3
GRID_MARGIN = 1e-3                  # knot interval padding when refitting to data
MIN_GRID_SPAN = 1e-3

# ----------------------------------------------------------------------------------------
#  A single edge, numpy side
# ----------------------------------------------------------------------------------------
@dataclass
class SplineEdge():
	coeffs: np.ndarray              # c_i, len(grid) - order - 1 values
	grid: np.ndarray                # full ( extended ) knot vector
	order: int = SPLINE_ORDER
	base_scale: float = 1.0
	spline_scale: float = 1.0

	@property
	def grid_count(self):
		return len(self.grid) - 2 * self.order - 1

	# knot interval on which the spline is evaluated, outside it the spline is linear
	@property
	def interval(self):
		return float(self.grid[self.order]), float(self.grid[-self.order - 1])

	@classmethod
	def uniform(cls, lo=0.0, hi=1.0, grid_count=GRID_COUNT, order=SPLINE_ORDER, coeffs=None, base_scale=1.0, spline_scale=1.0):
		grid = uniform_knots(lo, hi, grid_count, order)
		if coeffs is None: coeffs = np.zeros(grid_count + order)
		return cls(np.asarray(coeffs, dtype=float), grid, order, base_scale, spline_scale)


def silu(x):
	x = np.asarray(x, dtype=float)
	return x * expit(x)

def uniform_knots(lo, hi, grid_count=GRID_COUNT, order=SPLINE_ORDER):
	h = (hi - lo) / grid_count
	return lo + h * np.arange(-order, grid_count + order + 1)

# (len(x), n_basis) B-spline design matrix for x inside the knot interval
def bspline_basis(x, grid, order=SPLINE_ORDER):
	x = np.atleast_1d(np.asarray(x, dtype=float))
	return BSpline.design_matrix(x, np.asarray(grid, dtype=float), order).toarray()

def spline_value(edge, x):
	spl = BSpline(np.asarray(edge.grid, dtype=float), np.asarray(edge.coeffs, dtype=float), edge.order, extrapolate=True)
	lo, hi = edge.interval
	x = np.asarray(x, dtype=float)
	xc = np.clip(x, lo, hi)
	return spl(xc) + spl.derivative()(xc) * (x - xc)

def bspline_eval(edge, x):
	return edge.base_scale * silu(x) + edge.spline_scale * spline_value(edge, x)


# ----------------------------------------------------------------------------------------
#  Layer
# ----------------------------------------------------------------------------------------
class KanLayer(torch.nn.Module):

	def __init__(self, in_dim, out_dim, grid_count=GRID_COUNT, spline_order=SPLINE_ORDER, grid_range=(0.0, 1.0),
				 generator=None):
		super().__init__()
		self.in_dim = in_dim
		self.out_dim = out_dim
		self.grid_count = grid_count
		self.spline_order = spline_order
		grid = torch.as_tensor(uniform_knots(grid_range[0], grid_range[1], grid_count, spline_order), dtype=DTYPE)
		self.register_buffer('grid', grid.expand(in_dim, -1).contiguous())
		self.register_buffer('mask', torch.ones(out_dim, in_dim, dtype=DTYPE))
		self.coef = torch.nn.Parameter(0.1 * torch.randn(out_dim, in_dim, grid_count + spline_order, dtype=DTYPE, generator=generator))
		bound = 1.0 / np.sqrt(in_dim)
		self.base_scale = torch.nn.Parameter((torch.rand(out_dim, in_dim, dtype=DTYPE, generator=generator) * 2 - 1) * bound)
		self.spline_scale = torch.nn.Parameter(torch.ones(out_dim, in_dim, dtype=DTYPE))

	@property
	def n_basis(self):
		return self.grid_count + self.spline_order

	# Cox-de Boor recursion: x (B, in) -> (B, in, n_knots - order - 1)
	def b_spline_bases(self, x, order=None):
		order = self.spline_order if order is None else order
		grid = self.grid
		x = x.unsqueeze(-1)
		bases = ((x >= grid[:, :-1]) & (x < grid[:, 1:])).to(x.dtype)
		for k in range(1, order + 1):
			bases = (
				(x - grid[:, :-k - 1]) / (grid[:, k:-1] - grid[:, :-k - 1]) * bases[:, :, :-1]
			) + (
				(grid[:, k + 1:] - x) / (grid[:, k + 1:] - grid[:, 1:-k]) * bases[:, :, 1:]
			)
		return bases

	@property
	def interval(self):
		return self.grid[:, self.spline_order], self.grid[:, -self.spline_order - 1]

	# spline part of every edge, linearly extended outside the knot interval: (B, out, in)
	def splines(self, x):
		k = self.spline_order
		lo, hi = self.interval
		xc = torch.minimum(torch.maximum(x, lo), hi)
		value = torch.einsum('bin,oin->boi', self.b_spline_bases(xc), self.coef)
		lower = self.b_spline_bases(xc, order=k - 1)[:, :, 1:-1]                             # (B, in, n_basis - 1)
		span = (self.grid[:, k + 1:-1] - self.grid[:, 1:-k - 1]).unsqueeze(0)               # t_{i+k} - t_i
		dcoef = k * (self.coef[:, :, 1:] - self.coef[:, :, :-1])                            # (out, in, n_basis - 1)
		slope = torch.einsum('bin,oin->boi', lower / span, dcoef)
		return value + slope * (x - xc).unsqueeze(1)

	# phi_{q, r}(x_r) for every edge: (B, out, in)
	def edge_activations(self, x):
		base = F.silu(x).unsqueeze(1) * self.base_scale.unsqueeze(0)
		return self.mask * (base + self.spline_scale * self.splines(x))

	def forward(self, x):
		return self.edge_activations(x).sum(dim=-1)

	@torch.no_grad()
	def update_grid(self, x, margin=GRID_MARGIN):
		"""Move the knot interval of every input to the data range and re-fit the coefficients
		by least squares so the spline part keeps its shape over the data."""
		target = self.splines(x).permute(2, 0, 1)                          # (in, B, out)
		lo = x.min(dim=0).values - margin
		hi = x.max(dim=0).values + margin
		span = torch.clamp(hi - lo, min=MIN_GRID_SPAN)
		hi = lo + span
		steps = torch.arange(-self.spline_order, self.grid_count + self.spline_order + 1, dtype=DTYPE)
		self.grid.copy_(lo.unsqueeze(1) + (span / self.grid_count).unsqueeze(1) * steps.unsqueeze(0))
		a = self.b_spline_bases(torch.minimum(torch.maximum(x, lo), hi)).transpose(0, 1)   # (in, B, n_basis)
		solution = torch.linalg.lstsq(a, target, driver='gelsd').solution  # (in, n_basis, out)
		self.coef.copy_(solution.permute(2, 0, 1))

	def edge(self, q, r):
		return SplineEdge(
			coeffs=self.coef[q, r].detach().numpy().copy(),
			grid=self.grid[r].detach().numpy().copy(),
			order=self.spline_order,
			base_scale=(self.base_scale[q, r] * self.mask[q, r]).detach().item(),
			spline_scale=(self.spline_scale[q, r] * self.mask[q, r]).detach().item(),
		)


# ----------------------------------------------------------------------------------------
#  Network
# ----------------------------------------------------------------------------------------
class KanModel(torch.nn.Module):

	def __init__(self, width, grid_count=GRID_COUNT, spline_order=SPLINE_ORDER, grid_range=(0.0, 1.0), seed=0):
		super().__init__()
		width = [int(w) for w in width]
		if len(width) < 2 or min(width) < 1:
			raise ConfigError(f"KAN width must list at least two positive layer sizes, got {width!r}")
		if grid_count < 1 or spline_order < 1:
			raise ConfigError(f"grid_count and spline_order must be >= 1, got {grid_count}, {spline_order}")
		self.width = width
		self.grid_count = grid_count
		self.spline_order = spline_order
		generator = torch.Generator().manual_seed(int(seed))
		self.layers = torch.nn.ModuleList([
			KanLayer(a, b, grid_count, spline_order, grid_range, generator=generator)
			for a, b in zip(width[:-1], width[1:])
		])

	@property
	def m_bins(self):
		return self.width[0]

	def _check_input(self, x):
		x = torch.as_tensor(x, dtype=DTYPE)
		if x.dim() == 1: x = x.unsqueeze(0)
		if x.shape[-1] != self.width[0]:
			raise SegmentError(f"expected {self.width[0]} histogram inputs, got {x.shape[-1]}")
		return x

	def forward(self, x):
		x = self._check_input(x)
		for layer in self.layers:
			x = layer(x)
		return x

	# per-layer edge activations on a batch, list of (B, out, in)
	def edge_activations(self, x):
		x = self._check_input(x)
		acts = []
		for layer in self.layers:
			a = layer.edge_activations(x)
			acts.append(a)
			x = a.sum(dim=-1)
		return acts

	@torch.no_grad()
	def update_grid(self, x):
		x = self._check_input(x)
		for layer in self.layers:
			layer.update_grid(x)
			x = layer(x)

	def edge(self, layer, q, r):
		return self.layers[layer].edge(q, r)

	# (layer, q, r) of every edge still present
	def active_edges(self):
		return [(l, int(q), int(r)) for l, layer in enumerate(self.layers)
				for q, r in zip(*np.nonzero(layer.mask.numpy()))]

	def active_inputs(self):
		return sorted({r for l, _, r in self.active_edges() if l == 0})


# ----------------------------------------------------------------------------------------
#  Functions
# ----------------------------------------------------------------------------------------

# logits of a frozen model as numpy ( B, n_out )
def forward(model, x):
	with torch.no_grad():
		return model(x).numpy()

# H1 iff logit_1 > logit_0, ties to H0
def predict(model, x):
	logits = forward(model, x)
	return (logits[:, 1] > logits[:, 0]).astype(np.int64)

def accuracy(model, x, y):
	y = np.asarray(y)
	if not len(y): return float('nan')
	return float(np.mean(predict(model, x) == y))

# mean |phi| per edge over x, normalised by the layer maximum
def edge_scores(model, x):
	with torch.no_grad():
		acts = model.edge_activations(x)
	scores = []
	for a in acts:
		s = a.abs().mean(dim=0).numpy()
		top = s.max()
		scores.append(s / top if top > 0 else s)
	return scores

# input node score: summed mean |phi| of its surviving outgoing edges, normalised by the strongest input
def input_scores(model, x):
	with torch.no_grad():
		a = model.edge_activations(x)[0]
	s = (a.abs().mean(dim=0) * model.layers[0].mask).sum(dim=0).numpy()
	top = s.max()
	return s / top if top > 0 else s

def drop_inputs(model, inputs):
	"""Copy of model with every edge leaving the given input nodes masked out."""
	dropped = copy.deepcopy(model)
	mask = dropped.layers[0].mask
	with torch.no_grad():
		for r in inputs:
			if not 0 <= r < dropped.m_bins:
				raise PruneError(f"input {r} out of range for a model with {dropped.m_bins} inputs")
			mask[:, r] = 0.0
	if not (mask > 0).any():
		raise PruneError(f"dropping inputs {sorted(inputs)} leaves no edge")
	return dropped

def prune(model, x, node_threshold=0.01, edge_threshold=0.03):
	"""Return a copy of model with weak edges masked out.

	An edge goes when its relative mean |activation| over x is below edge_threshold; a node goes
	( with all its edges ) when its strongest incident edge is below node_threshold.
	"""
	if node_threshold < 0 or edge_threshold < 0:
		raise ConfigError(f"pruning thresholds must be >= 0, got {node_threshold}, {edge_threshold}")
	pruned = copy.deepcopy(model)
	scores = edge_scores(pruned, x)
	for l, (layer, s) in enumerate(zip(pruned.layers, scores)):
		keep = s >= edge_threshold
		node_in = s.max(axis=0)                 # per input node of this layer
		keep &= (node_in >= node_threshold)[None, :]
		keep &= layer.mask.numpy() > 0
		if not keep.any():
			raise PruneError(f"thresholds ({node_threshold}, {edge_threshold}) remove every edge of layer {l}")
		with torch.no_grad():
			layer.mask.mul_(torch.as_tensor(keep, dtype=DTYPE))
	return pruned

# ------------------------ [ CHECKPOINT ] ------------------------ #

def checkpoint_dict(model, meta=None):
	return {
		'width': model.width,
		'grid_count': model.grid_count,
		'spline_order': model.spline_order,
		'layers': [{
			'grid': layer.grid.tolist(),
			'coef': layer.coef.detach().tolist(),
			'base_scale': layer.base_scale.detach().tolist(),
			'spline_scale': layer.spline_scale.detach().tolist(),
			'mask': layer.mask.tolist(),
		} for layer in model.layers],
		'meta': meta or {},
	}

def model_from_dict(d):
	try:
		model = KanModel(d['width'], d['grid_count'], d['spline_order'])
		with torch.no_grad():
			for layer, ld in zip(model.layers, d['layers']):
				for name in ('grid', 'coef', 'base_scale', 'spline_scale', 'mask'):
					getattr(layer, name).copy_(torch.as_tensor(ld[name], dtype=DTYPE))
	except (KeyError, TypeError, RuntimeError) as e:
		raise ConfigError(f"invalid KAN checkpoint: {e}") from e
	return model

def save_checkpoint(model, file, meta=None):
	write_json(checkpoint_dict(model, meta), file)

def load_checkpoint(file):
	d = read_config_file(file)
	return model_from_dict(d), d.get('meta', {})

# ----------------------------------------------------------------------------------------
#  main
# ----------------------------------------------------------------------------------------
if __name__ == "__main__":
	pass
# ----------------------------------------------------------------------------------------
