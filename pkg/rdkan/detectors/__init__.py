
from .oscfar import (
	OsCfarConfig, CutDetection, solve_alpha, os_cfar_pfa, os_cfar_detect, os_cfar_mask,
	os_cfar_threshold_map, n_tested_cuts, write_detections_csv,
)
from .kan_model import (
	SplineEdge, KanLayer, KanModel, bspline_eval, bspline_basis, silu, forward, predict, accuracy,
	edge_scores, input_scores, drop_inputs, prune, save_checkpoint, load_checkpoint,
)
from .kan_train import TrainOptions, TrainedModel, train, fine_tune, train_and_prune
from .symbolic import (
	SymbolicTerm, SymbolicExpr, DecisionRule, DecayRates, BUILTIN_RULES,
	snap, snap_edge, eval_rule, calibrate_bias, builtin_rule, resolve_rule,
	rule_to_string, save_rule, load_rule, fit_decay_rates, decay_rate_decision,
)
from .pipeline import (
	SegmentDetection, sweep_classify, sweep_margins, recenter, iou, nms, merge_responses, same_response, detect,
	calibrate_operating_point, max_map_margin, write_detections,
)


# ---------------- [Package] ---------------- #

## --- DECLARE --- ##

__all__ = [
	'OsCfarConfig', 'CutDetection', 'solve_alpha', 'os_cfar_pfa', 'os_cfar_detect', 'os_cfar_mask',
	'os_cfar_threshold_map', 'n_tested_cuts', 'write_detections_csv',
	'SplineEdge', 'KanLayer', 'KanModel', 'bspline_eval', 'bspline_basis', 'silu', 'forward', 'predict', 'accuracy',
	'edge_scores', 'input_scores', 'drop_inputs', 'prune', 'save_checkpoint', 'load_checkpoint',
	'TrainOptions', 'TrainedModel', 'train', 'fine_tune', 'train_and_prune',
	'SymbolicTerm', 'SymbolicExpr', 'DecisionRule', 'DecayRates', 'BUILTIN_RULES',
	'snap', 'snap_edge', 'eval_rule', 'calibrate_bias', 'builtin_rule', 'resolve_rule',
	'rule_to_string', 'save_rule', 'load_rule', 'fit_decay_rates', 'decay_rate_decision',
	'SegmentDetection', 'sweep_classify', 'sweep_margins', 'recenter', 'iou', 'nms', 'merge_responses', 'same_response',
	'detect', 'calibrate_operating_point', 'max_map_margin', 'write_detections',
]

## --- INFO --- ##
__version__ = 0.1
__doc__ = '''OS-CFAR baseline, KAN detector, symbolic rules and the segment pipeline'''
