
from .scoring import COVERAGE_THRESHOLD, TrialResult, score_kan_trial, score_cfar_trial
from .monte_carlo import (
	DEFAULT_SNR_GRID, DEFAULT_TRIALS, DEFAULT_MAP_PFA, MonteCarlo, EvalReport, KanPipelineDetector, OsCfarDetector,
	aggregate, build_detector, build_detectors, calibrated_builtin, expand_roster, noise_maps, run_monte_carlo,
)
from .reports import (
	accuracy_table, kde_export, runtime_compare, cfar_window_sweep, loglog_exponent, write_report,
)


# ---------------- [Package] ---------------- #

## --- DECLARE --- ##

__all__ = [
	'COVERAGE_THRESHOLD', 'TrialResult', 'score_kan_trial', 'score_cfar_trial',
	'DEFAULT_SNR_GRID', 'DEFAULT_TRIALS', 'DEFAULT_MAP_PFA', 'MonteCarlo', 'EvalReport', 'KanPipelineDetector',
	'OsCfarDetector',
	'aggregate', 'build_detector', 'build_detectors', 'calibrated_builtin', 'expand_roster', 'noise_maps', 'run_monte_carlo',
	'accuracy_table', 'kde_export', 'runtime_compare', 'cfar_window_sweep', 'loglog_exponent', 'write_report',
]

## --- INFO --- ##
__version__ = 0.1
__doc__ = '''Monte-Carlo P_D / P_FA harness, scoring and reports'''
