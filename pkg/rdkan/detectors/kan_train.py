""" Full-batch LBFGS training, fine-tuning and the train-prune recipe for KanModel
"""
# ----------------------------------------------------------------------------------------
#  Imports
# ----------------------------------------------------------------------------------------
from dataclasses import dataclass, field
import copy
import math

import attrs
import numpy as np
import torch
import torch.nn.functional as F
from tqdm import tqdm

from ..colorprint import print_banner
from ..common import positive, non_negative
from ..exceptions import ConfigError, TrainingError
from .kan_model import DTYPE, KanModel, accuracy, drop_inputs, input_scores, prune

# ----------------------------------------------------------------------------------------
#  Some PreDefined Static Entries
# ----------------------------------------------------------------------------------------
MIN_FEW_SHOT = 14
FEW_SHOT_BOOST = 10.0

# ----------------------------------------------------------------------------------------
#  Options
# ----------------------------------------------------------------------------------------
@attrs.frozen
class TrainOptions():
	max_iter: int = attrs.field(default=200, converter=int, validator=positive)
	tol: float = attrs.field(default=1e-7, converter=float, validator=non_negative)        # loss decrease over `patience` iterations
	patience: int = attrs.field(default=5, converter=int, validator=positive)
	history_size: int = attrs.field(default=10, converter=int, validator=positive)
	lr: float = attrs.field(default=1.0, converter=float, validator=positive)
	max_restarts: int = attrs.field(default=3, converter=int, validator=non_negative)
	grid_refit_iter: int = attrs.field(default=20, converter=int, validator=non_negative)  # 0 disables the mid-training refit
	reg_lambda: float = attrs.field(default=1e-3, converter=float, validator=non_negative)
	reg_entropy: float = attrs.field(default=2.0, converter=float, validator=non_negative)     # weight of edge entropy inside the penalty
	reg_growth: float = attrs.field(default=2.0, converter=float, validator=positive)         # penalty factor per elimination round
	prune_rounds: int = attrs.field(default=12, converter=int, validator=non_negative)        # 0 keeps the threshold prune only
	max_accuracy_drop: float = attrs.field(default=0.02, converter=float, validator=non_negative)
	node_threshold: float = attrs.field(default=0.01, converter=float, validator=non_negative)
	edge_threshold: float = attrs.field(default=0.03, converter=float, validator=non_negative)
	seed: int = attrs.field(default=0, converter=int)

	@classmethod
	def from_dict(cls, d):
		if d is None: return cls()
		unknown = set(d) - {a.name for a in attrs.fields(cls)}
		if unknown:
			raise ConfigError(f"unknown training option(s): {sorted(unknown)}")
		return cls(**d)

	def to_dict(self):
		return attrs.asdict(self)


@dataclass
class TrainedModel():
	model: KanModel
	history: list = field(default_factory=list)
	train_accuracy: float = float('nan')
	val_accuracy: float = float('nan')
	n_iter: int = 0
	restarts: int = 0
	converged: bool = False
	lr: float = 1.0

	@property
	def m_bins(self):
		return self.model.m_bins

	def summary(self):
		return {
			'm_bins': self.m_bins,
			'iterations': self.n_iter,
			'restarts': self.restarts,
			'converged': self.converged,
			'final_loss': self.history[-1] if self.history else float('nan'),
			'train_accuracy': self.train_accuracy,
			'val_accuracy': self.val_accuracy,
		}


# ----------------------------------------------------------------------------------------
#  Loss
# ----------------------------------------------------------------------------------------

# weighted softmax cross-entropy over both logits plus the sparsity penalty:
# reg_lambda * ( L1 of mean |edge activation| + reg_entropy * entropy of the edge shares, per layer )
def objective(model, x, y, w, reg_lambda=0.0, reg_entropy=0.0):
	acts = model.edge_activations(x)
	logits = acts[-1].sum(dim=-1)
	ce = (F.cross_entropy(logits, y, reduction='none') * w).sum() / w.sum()
	if not reg_lambda: return ce
	reg = 0.0
	for a in acts:
		l1 = a.abs().mean(dim=0)
		total = l1.sum()
		reg = reg + total
		if reg_entropy:
			share = l1 / (total + 1e-12)
			reg = reg - reg_entropy * (share * torch.log(share + 1e-12)).sum()
	return ce + reg_lambda * reg

def _as_tensors(x, y, sample_weight):
	x = torch.as_tensor(np.asarray(x, dtype=float), dtype=DTYPE)
	y = torch.as_tensor(np.asarray(y, dtype=np.int64))
	if x.dim() != 2 or x.shape[0] != y.shape[0]:
		raise TrainingError(f"features {tuple(x.shape)} and labels {tuple(y.shape)} do not line up")
	if not torch.isfinite(x).all():
		raise TrainingError("features hold non-finite values")
	labels = set(y.tolist())
	if not labels <= {0, 1}:
		raise TrainingError(f"labels must be 0 / 1, got {sorted(labels)}")
	if labels != {0, 1}:
		raise TrainingError(f"training needs both classes, got only {sorted(labels)}")
	if sample_weight is None:
		w = torch.ones(x.shape[0], dtype=DTYPE)
	else:
		w = torch.as_tensor(np.asarray(sample_weight, dtype=float), dtype=DTYPE)
		if w.shape != y.shape or (w < 0).any() or w.sum() <= 0:
			raise TrainingError("sample weights must be non-negative, one per sample, not all zero")
	return x, y, w

# ----------------------------------------------------------------------------------------
#  Training
# ----------------------------------------------------------------------------------------
@dataclass
class _Run():
	model: KanModel
	x: torch.Tensor
	y: torch.Tensor
	w: torch.Tensor
	opts: TrainOptions
	lr: float
	display_progress: bool = False

	def __post_init__(self):
		self.history = []
		self.converged = False
		self.diverged = False
		self.refit_done = self.opts.grid_refit_iter == 0

	def new_optimizer(self):
		return torch.optim.LBFGS(self.model.parameters(), lr=self.lr, max_iter=1,
								 history_size=self.opts.history_size, line_search_fn='strong_wolfe',
								 tolerance_grad=1e-12, tolerance_change=1e-15)

	def loss(self):
		return objective(self.model, self.x, self.y, self.w, self.opts.reg_lambda, self.opts.reg_entropy)

	def stalled(self, window):
		p = self.opts.patience
		return len(window) > p and window[-p - 1] - window[-1] < self.opts.tol

	def __call__(self):
		self.model.update_grid(self.x)
		optimizer = self.new_optimizer()

		def closure():
			optimizer.zero_grad()
			loss = self.loss()
			loss.backward()
			return loss

		window = []
		for it in tqdm(range(self.opts.max_iter), desc="LBFGS", disable=not self.display_progress):
			optimizer.step(closure)
			with torch.no_grad():
				current = float(self.loss())
			if not math.isfinite(current):
				self.diverged = True
				return
			self.history.append(current)
			window.append(current)
			stalled = self.stalled(window)
			if not self.refit_done and (it + 1 >= self.opts.grid_refit_iter or stalled):
				self.model.update_grid(self.x)
				optimizer = self.new_optimizer()
				self.refit_done = True
				window = []
				continue
			if stalled:
				self.converged = True
				return


def train(model, x, y, opts=None, sample_weight=None, validation=None, display_progress=False):
	"""Fit a copy of model to ( x, y ) and return a TrainedModel.

	A non-finite loss restarts from the initial parameters with the step halved, at most
	opts.max_restarts times.
	"""
	opts = opts or TrainOptions()
	x, y, w = _as_tensors(x, y, sample_weight)
	if x.shape[1] != model.m_bins:
		raise TrainingError(f"model expects {model.m_bins} inputs, features have {x.shape[1]}")
	lr = opts.lr
	for restart in range(opts.max_restarts + 1):
		run = _Run(copy.deepcopy(model), x, y, w, opts, lr, display_progress)
		run()
		if not run.diverged:
			tm = TrainedModel(model=run.model, history=run.history, n_iter=len(run.history),
							  restarts=restart, converged=run.converged, lr=lr)
			tm.train_accuracy = accuracy(tm.model, x, y.numpy())
			if validation is not None:
				tm.val_accuracy = accuracy(tm.model, *validation)
			return tm
		if display_progress:
			print_banner(f"[-] non-finite loss at lr={lr:g}, restarting ({restart + 1}/{opts.max_restarts})", 'red')
		lr *= 0.5
	raise TrainingError(f"training diverged after {opts.max_restarts} restarts")

# continue training on pretrain + few-shot samples, the few-shot ones weighted by boost
def fine_tune(pretrained, x_pretrain, y_pretrain, x_few, y_few, boost=FEW_SHOT_BOOST, opts=None, validation=None,
			  display_progress=False):
	model = pretrained.model if isinstance(pretrained, TrainedModel) else pretrained
	x_few = np.asarray(x_few, dtype=float)
	if len(x_few) < MIN_FEW_SHOT:
		raise TrainingError(f"fine-tuning needs at least {MIN_FEW_SHOT} samples, got {len(x_few)}")
	if boost <= 0:
		raise ConfigError(f"boost must be > 0, got {boost}")
	x = np.concatenate([np.asarray(x_pretrain, dtype=float), x_few])
	y = np.concatenate([np.asarray(y_pretrain), np.asarray(y_few)])
	w = np.concatenate([np.ones(len(x_pretrain)), np.full(len(x_few), float(boost))])
	return train(model, x, y, opts=opts, sample_weight=w, validation=validation, display_progress=display_progress)

def _score(tm, validation):
	return tm.val_accuracy if validation is not None else tm.train_accuracy

def train_and_prune(x, y, m_bins, opts=None, validation=None, display_progress=False):
	"""Train a [M, 2] model, prune it and re-train the surviving edges.

	After the threshold prune, inputs are eliminated one at a time: re-train under a penalty grown by
	reg_growth each round, drop the input with the lowest input score, re-train at the base penalty,
	and keep the result while its accuracy stays within max_accuracy_drop of the unpruned model.
	Returns the final TrainedModel and the unpruned accuracy.
	"""
	opts = opts or TrainOptions()
	model = KanModel([m_bins, 2], seed=opts.seed)
	trained = train(model, x, y, opts, validation=validation, display_progress=display_progress)
	pre_prune = _score(trained, validation)
	polish = attrs.evolve(opts, grid_refit_iter=0)
	best = train(prune(trained.model, x, opts.node_threshold, opts.edge_threshold), x, y, polish,
				 validation=validation, display_progress=display_progress)
	history = trained.history + best.history
	floor = pre_prune - opts.max_accuracy_drop
	reg = opts.reg_lambda
	for _ in range(opts.prune_rounds):
		active = best.model.active_inputs()
		if len(active) <= 1: break
		reg *= opts.reg_growth
		try:
			squeezed = train(best.model, x, y, attrs.evolve(polish, reg_lambda=reg), display_progress=display_progress)
			scores = input_scores(squeezed.model, x)
			weakest = min(active, key=lambda r: (scores[r], -r))
			candidate = train(drop_inputs(squeezed.model, [weakest]), x, y, polish, validation=validation,
							  display_progress=display_progress)
		except TrainingError as e:
			if display_progress: print_banner(f"[-] elimination stopped: {e}")
			break
		if _score(candidate, validation) < floor:
			if display_progress:
				print_banner(f"[-] dropping input x{weakest} costs accuracy, kept inputs {active}", 'yellow')
			break
		history += squeezed.history + candidate.history
		best = candidate
	best.history = history
	if display_progress:
		print_banner(f"[+] pruned to inputs {best.model.active_inputs()}, accuracy "
					 f"{pre_prune:.4f} -> {_score(best, validation):.4f}", 'green')
	return best, pre_prune

# ----------------------------------------------------------------------------------------
#  main
# ----------------------------------------------------------------------------------------
if __name__ == "__main__":
	pass
# ----------------------------------------------------------------------------------------
