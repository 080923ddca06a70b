# ---------------- [Package] ---------------- #
## --- IMPORTS --- ##

from .exceptions import RdkanError, ConfigError, SceneError, SegmentError, TrainingError, PruneError, DetectorError
from .radar_sim import RadarConfig, ScenarioSpec, derive_geometry, sample_scene, synth_if_cube
from .rdmap import RDMap, compute_rd_map, extract_segment, histogram_feature, generate_segment_dataset
from .detectors import (
	OsCfarConfig, os_cfar_detect, KanModel, train, prune, fine_tune, snap, eval_rule, builtin_rule, detect,
)
from .evaluation import run_monte_carlo, write_report


## --- DECLARE --- ##

__all__ = [
	'RdkanError', 'ConfigError', 'SceneError', 'SegmentError', 'TrainingError', 'PruneError', 'DetectorError',
	'RadarConfig', 'ScenarioSpec', 'derive_geometry', 'sample_scene', 'synth_if_cube',
	'RDMap', 'compute_rd_map', 'extract_segment', 'histogram_feature', 'generate_segment_dataset',
	'OsCfarConfig', 'os_cfar_detect', 'KanModel', 'train', 'prune', 'fine_tune', 'snap', 'eval_rule', 'builtin_rule', 'detect',
	'run_monte_carlo', 'write_report',
]

## --- INFO --- ##
__version__ = 0.1
__doc__ = '''Range-Doppler segment detection workbench: FMCW simulation, OS-CFAR, KAN detectors'''


def version():
	return __version__

def doc_str():
	return __doc__
