
from .radar_config import RadarConfig, MapGeometry, BinBox, derive_geometry
from .targets import (
	Scatterer, ExtendedTarget, ScenarioSpec, RCS_BANDS,
	sample_target, sample_scene, ground_truth_box,
	scene_from_dict, scene_to_dict, read_scene, write_scene,
)
from .if_synth import IfDataCube, synth_if_cube, noiseless_cube, write_cube, read_cube


# ---------------- [Package] ---------------- #

## --- DECLARE --- ##

__all__ = [
	'RadarConfig', 'MapGeometry', 'BinBox', 'derive_geometry',
	'Scatterer', 'ExtendedTarget', 'ScenarioSpec', 'RCS_BANDS',
	'sample_target', 'sample_scene', 'ground_truth_box',
	'scene_from_dict', 'scene_to_dict', 'read_scene', 'write_scene',
	'IfDataCube', 'synth_if_cube', 'noiseless_cube', 'write_cube', 'read_cube',
]

## --- INFO --- ##
__version__ = 0.1
__doc__ = '''FMCW scene synthesis: waveform config, extended targets, IF data cube'''
