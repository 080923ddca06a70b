""" Direct synthesis of the down-converted IF data cube ( fast time x slow time )
"""
# ----------------------------------------------------------------------------------------
#  Imports
# ----------------------------------------------------------------------------------------
from dataclasses import dataclass
import math

import numpy as np

from ..common import SPEED_OF_LIGHT
from ..exceptions import ConfigError, SceneError
from .radar_config import RadarConfig, derive_geometry

# ----------------------------------------------------------------------------------------
#  Some PreDefined Static Entries
# ----------------------------------------------------------------------------------------
CUBE_MAGIC = b'RDKCUBE1'
CUBE_HEADER = np.dtype([
	('magic', 'S8'),
	('n_samples', '<u4'),
	('n_chirps', '<u4'),
	('fs', '<f8'),
	('slope', '<f8'),
	('t_cri', '<f8'),
	('f0', '<f8'),
	('noise_sigma', '<f8'),
	('pad', 'V8'),
])                                  # 64 bytes
CUBE_BODY = np.dtype('<c8')

# ----------------------------------------------------------------------------------------
#  Data cube
# ----------------------------------------------------------------------------------------
@dataclass
class IfDataCube():
	samples: np.ndarray             # (n_samples, n_chirps) complex
	config: RadarConfig
	noise_sigma: float = 0.0

	def __post_init__(self):
		self.samples = np.asarray(self.samples)
		expected = (self.config.n_samples, self.config.n_chirps)
		if self.samples.shape != expected:
			raise ConfigError(f"cube shape {self.samples.shape} does not match config {expected}")

	@property
	def shape(self):
		return self.samples.shape

# ----------------------------------------------------------------------------------------
#  Synthesis
# ----------------------------------------------------------------------------------------

# beat and Doppler frequency of every scatterer in the scene, aliasing targets rejected
def scene_tones(scene, config):
	geometry = derive_geometry(config)
	f_r, f_d, amp, ph = [], [], [], []
	for i, target in enumerate(scene):
		dr, dv, a, p = target.scatterer_arrays()
		r = target.range_m + dr
		v = target.velocity_mps + dv
		if len(r) and (r.min() < 0 or r.max() >= geometry.max_range):
			raise SceneError(f"target {i} at {target.range_m:.2f} m spreads outside [0, {geometry.max_range:.2f}) m")
		if len(v) and np.abs(v).max() >= geometry.max_velocity:
			raise SceneError(f"target {i} at {target.velocity_mps:.2f} m/s aliases in Doppler "
							 f"(+/-{geometry.max_velocity:.2f} m/s)")
		f_r.append(2 * config.slope * r / SPEED_OF_LIGHT)
		f_d.append(2 * v * config.f0 / SPEED_OF_LIGHT)
		amp.append(a)
		ph.append(p)
	if not f_r:
		return tuple(np.zeros(0) for _ in range(4))
	return tuple(np.concatenate(x) for x in (f_r, f_d, amp, ph))

# noiseless cube: one complex exponential per scatterer
def noiseless_cube(scene, config):
	f_r, f_d, amp, ph = scene_tones(scene, config)
	n = np.arange(config.n_samples)[:, None]
	l = np.arange(config.n_chirps)[:, None]
	e_range = np.exp(2j * math.pi * (n * f_r[None, :] / config.fs)) * (amp * np.exp(1j * ph))[None, :]
	e_doppler = np.exp(2j * math.pi * (l * f_d[None, :] * config.t_cri))
	return e_range @ e_doppler.T

# noise sigma that puts the peak RD cell snr_db above the mean noise cell ( after 2-D FFT gain )
def sigma_for_snr(clean, snr_db):
	peak = float(np.max(np.abs(np.fft.fft2(clean)) ** 2)) if clean.size else 0.0
	if peak <= 0: return None
	n_cells = clean.shape[0] * clean.shape[1]
	return math.sqrt(peak / (n_cells * 10 ** (snr_db / 10)))

def synth_if_cube(scene, config=None, snr_db=None, rng=None, noise_sigma=None):
	"""Synthesise z(t, l) for a list of ExtendedTarget plus circular complex Gaussian noise.

	snr_db sets the noise level from the strongest RD cell of the scene; without a target
	( or without snr_db ) noise_sigma is used, defaulting to 1.
	"""
	config = config or RadarConfig()
	clean = noiseless_cube(scene, config)
	sigma = None
	if snr_db is not None:
		sigma = sigma_for_snr(clean, float(snr_db))
	if sigma is None:
		sigma = 1.0 if noise_sigma is None else float(noise_sigma)
	if sigma < 0 or not np.isfinite(sigma):
		raise ConfigError(f"noise sigma must be finite and >= 0, got {sigma}")
	samples = clean
	if sigma > 0:
		rng = rng if rng is not None else np.random.default_rng()
		noise = rng.standard_normal(clean.shape) + 1j * rng.standard_normal(clean.shape)
		samples = clean + noise * (sigma / math.sqrt(2))
	return IfDataCube(samples=samples, config=config, noise_sigma=sigma)

# ----------------------------------------------------------------------------------------
#  Binary cube files
# ----------------------------------------------------------------------------------------

def write_cube(cube, file):
	c = cube.config
	header = np.zeros(1, dtype=CUBE_HEADER)
	header['magic'] = CUBE_MAGIC
	header['n_samples'] = c.n_samples
	header['n_chirps'] = c.n_chirps
	header['fs'] = c.fs
	header['slope'] = c.slope
	header['t_cri'] = c.t_cri
	header['f0'] = c.f0
	header['noise_sigma'] = cube.noise_sigma
	with open(file, 'wb') as f:
		f.write(header.tobytes())
		f.write(np.ascontiguousarray(cube.samples, dtype=CUBE_BODY).tobytes())

def read_cube(file):
	with open(file, 'rb') as f:
		raw = f.read()
	if len(raw) < CUBE_HEADER.itemsize:
		raise ConfigError(f"{file}: truncated cube header")
	header = np.frombuffer(raw[:CUBE_HEADER.itemsize], dtype=CUBE_HEADER)[0]
	if bytes(header['magic']) != CUBE_MAGIC:
		raise ConfigError(f"{file}: not a cube file (magic {bytes(header['magic'])!r})")
	n, l = int(header['n_samples']), int(header['n_chirps'])
	body = np.frombuffer(raw[CUBE_HEADER.itemsize:], dtype=CUBE_BODY)
	if body.size != n * l:
		raise ConfigError(f"{file}: body holds {body.size} samples, header says {n}x{l}")
	config = RadarConfig(f0=float(header['f0']), slope=float(header['slope']), t_cri=float(header['t_cri']),
						 fs=float(header['fs']), n_samples=n, n_chirps=l)
	return IfDataCube(samples=body.reshape(n, l).copy(), config=config, noise_sigma=float(header['noise_sigma']))

# ----------------------------------------------------------------------------------------
#  main
# ----------------------------------------------------------------------------------------
if __name__ == "__main__":
	pass
# ----------------------------------------------------------------------------------------
