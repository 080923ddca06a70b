
from .rd_map import RDMap, compute_rd_map, write_rd_map, read_rd_map
from .segments import (
	SEGMENT_SHAPE, SegmentFeature, bin_edges, check_center, extract_segment, interior_limits,
	segment_windows, histogram_feature, histogram_features_batch, histogram_frame, write_histogram_csv,
)
from .dataset import SegmentDataset, generate_segment_dataset


# ---------------- [Package] ---------------- #

## --- DECLARE --- ##

__all__ = [
	'RDMap', 'compute_rd_map', 'write_rd_map', 'read_rd_map',
	'SEGMENT_SHAPE', 'SegmentFeature', 'bin_edges', 'check_center', 'extract_segment', 'interior_limits',
	'segment_windows', 'histogram_feature', 'histogram_features_batch', 'histogram_frame', 'write_histogram_csv',
	'SegmentDataset', 'generate_segment_dataset',
]

## --- INFO --- ##
__version__ = 0.1
__doc__ = '''Range-Doppler maps, RD segments and histogram features'''
