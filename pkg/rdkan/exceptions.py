""" Exceptions raised across the workbench
"""

# ----------------------------------------------------------------------------------------
#  Exception hierarchy
# ----------------------------------------------------------------------------------------

class RdkanError(Exception):
	"""Base class of every workbench failure."""

class ConfigError(RdkanError, ValueError):
	"""Invalid configuration document or parameter value."""

class SceneError(RdkanError, ValueError):
	"""Target outside the unambiguous range/velocity span of the radar."""

class SegmentError(RdkanError, ValueError):
	"""Segment centre too close to the map edge, or feature arity mismatch."""

class TrainingError(RdkanError):
	"""KAN training could not produce a usable model."""

class PruneError(RdkanError):
	"""Pruning thresholds would remove every edge of a layer."""

class DetectorError(RdkanError):
	"""Unknown detector id or a detector failing inside a trial."""

# ----------------------------------------------------------------------------------------
#  main
# ----------------------------------------------------------------------------------------
if __name__ == "__main__":
	pass
# ----------------------------------------------------------------------------------------
