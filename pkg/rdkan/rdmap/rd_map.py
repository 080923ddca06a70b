""" Square-law Range-Doppler map of an IF data cube
"""
# ----------------------------------------------------------------------------------------
#  Imports
# ----------------------------------------------------------------------------------------
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.signal import get_window

from ..common import read_config_file, write_json
from ..exceptions import ConfigError
from ..radar_sim import derive_geometry, MapGeometry

# ----------------------------------------------------------------------------------------
#  Some PreDefined Static Entries
# ----------------------------------------------------------------------------------------
MAP_DTYPE = np.dtype('<f4')

# ----------------------------------------------------------------------------------------
#  RD map
# ----------------------------------------------------------------------------------------
@dataclass
class RDMap():
	power: np.ndarray               # (n_range_bins, n_doppler_bins), >= 0
	geometry: MapGeometry
	doppler_centered: bool = True

	def __post_init__(self):
		self.power = np.array(self.power, dtype=float)
		expected = (self.geometry.n_range_bins, self.geometry.n_doppler_bins)
		if self.power.shape != expected:
			raise ConfigError(f"RD map shape {self.power.shape} does not match geometry {expected}")
		self.power.setflags(write=False)

	@property
	def shape(self):
		return self.power.shape

	@property
	def range_axis(self):
		return self.geometry.range_of_bin(np.arange(self.shape[0]))

	@property
	def velocity_axis(self):
		return self.geometry.velocity_of_bin(np.arange(self.shape[1]))

	# (range m, velocity m/s) of a bin pair
	def cell_position(self, range_bin, doppler_bin):
		return float(self.geometry.range_of_bin(range_bin)), float(self.geometry.velocity_of_bin(doppler_bin))

	def scaled(self, factor):
		return RDMap(self.power * factor, self.geometry, self.doppler_centered)


# ----------------------------------------------------------------------------------------
#  Processing
# ----------------------------------------------------------------------------------------

# range FFT over fast time, Doppler FFT over slow time, |.|^2, Doppler axis centred
def compute_rd_map(cube, window=None):
	z = np.asarray(cube.samples)
	expected = (cube.config.n_samples, cube.config.n_chirps)
	if z.shape != expected:
		raise ConfigError(f"cube shape {z.shape} does not match config {expected}")
	if window:
		try:
			w_range = get_window(window, z.shape[0], fftbins=True)
			w_doppler = get_window(window, z.shape[1], fftbins=True)
		except ValueError as e:
			raise ConfigError(f"unknown window {window!r}: {e}") from e
		z = z * w_range[:, None] * w_doppler[None, :]
	spectrum = np.fft.fft(np.fft.fft(z, axis=0), axis=1)
	spectrum = np.fft.fftshift(spectrum, axes=1)
	return RDMap(power=np.abs(spectrum) ** 2, geometry=derive_geometry(cube.config))

# ----------------------------------------------------------------------------------------
#  Files: float32 grid + JSON sidecar
# ----------------------------------------------------------------------------------------

def sidecar_file(file):
	return Path(file).with_suffix('.json')

def write_rd_map(rd_map, file):
	np.ascontiguousarray(rd_map.power, dtype=MAP_DTYPE).tofile(file)
	write_json({
		'shape': list(rd_map.shape),
		'dtype': MAP_DTYPE.str,
		'doppler_centered': rd_map.doppler_centered,
		'geometry': rd_map.geometry.to_dict(),
		'range_axis_m': rd_map.range_axis,
		'velocity_axis_mps': rd_map.velocity_axis,
	}, sidecar_file(file))

def read_rd_map(file):
	meta = read_config_file(sidecar_file(file))
	try:
		geometry = MapGeometry.from_dict(meta['geometry'])
		shape = tuple(meta['shape'])
		power = np.fromfile(file, dtype=np.dtype(meta.get('dtype', MAP_DTYPE.str)))
	except (KeyError, TypeError) as e:
		raise ConfigError(f"{file}: incomplete RD map sidecar: {e}") from e
	except OSError as e:
		raise ConfigError(f"{file}: RD map read error: {e}") from e
	if power.size != shape[0] * shape[1]:
		raise ConfigError(f"{file}: grid holds {power.size} cells, sidecar says {shape}")
	return RDMap(power=power.reshape(shape), geometry=geometry, doppler_centered=bool(meta.get('doppler_centered', True)))

# ----------------------------------------------------------------------------------------
#  main
# ----------------------------------------------------------------------------------------
if __name__ == "__main__":
	pass
# ----------------------------------------------------------------------------------------
