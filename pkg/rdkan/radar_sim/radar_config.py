""" FMCW waveform configuration and the RD map geometry derived from it
"""
# ----------------------------------------------------------------------------------------
#  Imports
# ----------------------------------------------------------------------------------------
from dataclasses import dataclass

import attrs
import numpy as np

from ..common import SPEED_OF_LIGHT, positive, power_of_two
from ..exceptions import ConfigError

# ----------------------------------------------------------------------------------------
#  Waveform parameters
# ----------------------------------------------------------------------------------------
@attrs.frozen
class RadarConfig():
	f0: float = attrs.field(default=77e9, converter=float, validator=positive)             # carrier Hz
	slope: float = attrs.field(default=16.6672e12, converter=float, validator=positive)    # chirp slope Hz/s, 426.68 MHz sweep over N/fs
	t_cri: float = attrs.field(default=50e-6, converter=float, validator=positive)         # chirp repetition interval s
	fs: float = attrs.field(default=10e6, converter=float, validator=positive)             # ADC rate Hz
	n_samples: int = attrs.field(default=256, converter=int, validator=power_of_two)       # N, fast time
	n_chirps: int = attrs.field(default=128, converter=int, validator=power_of_two)        # L, slow time

	@property
	def bw(self):
		return self.slope * self.n_samples / self.fs

	@property
	def wavelength(self):
		return SPEED_OF_LIGHT / self.f0

	@classmethod
	def table_default(cls):
		return cls()

	@classmethod
	def from_dict(cls, d):
		if d is None: return cls()
		unknown = set(d) - {a.name for a in attrs.fields(cls)}
		if unknown:
			raise ConfigError(f"unknown radar config field(s): {sorted(unknown)}")
		try:
			return cls(**d)
		except (TypeError, ValueError) as e:
			if isinstance(e, ConfigError): raise
			raise ConfigError(f"invalid radar config: {e}") from e

	def to_dict(self):
		return attrs.asdict(self)


# ----------------------------------------------------------------------------------------
#  Map geometry
# ----------------------------------------------------------------------------------------
@dataclass(frozen=True)
class MapGeometry():
	range_resolution: float         # m per range bin
	velocity_resolution: float      # m/s per Doppler bin
	max_range: float                # m, span of the N range bins
	max_velocity: float             # m/s, unambiguous +/- span
	n_range_bins: int
	n_doppler_bins: int

	# Doppler axis is fft-shifted: zero velocity sits in column L/2
	@property
	def zero_doppler_bin(self):
		return self.n_doppler_bins // 2

	def range_bin(self, range_m):
		return range_m / self.range_resolution

	def doppler_bin(self, velocity_mps):
		return velocity_mps / self.velocity_resolution + self.zero_doppler_bin

	def range_of_bin(self, range_bin):
		return range_bin * self.range_resolution

	def velocity_of_bin(self, doppler_bin):
		return (doppler_bin - self.zero_doppler_bin) * self.velocity_resolution

	def to_dict(self):
		return {
			'range_resolution': self.range_resolution,
			'velocity_resolution': self.velocity_resolution,
			'max_range': self.max_range,
			'max_velocity': self.max_velocity,
			'n_range_bins': self.n_range_bins,
			'n_doppler_bins': self.n_doppler_bins,
		}

	@classmethod
	def from_dict(cls, d):
		return cls(**d)


# ----------------------------------------------------------------------------------------
#  Bin rectangle (inclusive on both ends)
# ----------------------------------------------------------------------------------------
@dataclass(frozen=True)
class BinBox():
	r0: int
	r1: int
	d0: int
	d1: int

	@classmethod
	def from_center(cls, center, shape):
		hr, hd = shape[0] // 2, shape[1] // 2
		return cls(center[0] - hr, center[0] + hr, center[1] - hd, center[1] + hd)

	@property
	def n_range(self):
		return self.r1 - self.r0 + 1

	@property
	def n_doppler(self):
		return self.d1 - self.d0 + 1

	@property
	def area(self):
		return max(0, self.n_range) * max(0, self.n_doppler)

	def intersection_area(self, other):
		nr = min(self.r1, other.r1) - max(self.r0, other.r0) + 1
		nd = min(self.d1, other.d1) - max(self.d0, other.d0) + 1
		return max(0, nr) * max(0, nd)

	def contains(self, range_bin, doppler_bin):
		return self.r0 <= range_bin <= self.r1 and self.d0 <= doppler_bin <= self.d1

	def dilate(self, n=1):
		return BinBox(self.r0 - n, self.r1 + n, self.d0 - n, self.d1 + n)

	def clip(self, n_range_bins, n_doppler_bins):
		return BinBox(max(self.r0, 0), min(self.r1, n_range_bins - 1),
					  max(self.d0, 0), min(self.d1, n_doppler_bins - 1))

	# boolean mask of the covered cells on a map of the given shape
	def mask(self, shape):
		m = np.zeros(shape, dtype=bool)
		b = self.clip(*shape)
		if b.area: m[b.r0:b.r1 + 1, b.d0:b.d1 + 1] = True
		return m

	def to_list(self):
		return [int(self.r0), int(self.r1), int(self.d0), int(self.d1)]


# resolutions and spans computed from the config alone
def derive_geometry(config):
	if not isinstance(config, RadarConfig):
		raise ConfigError(f"expected RadarConfig, got {type(config).__name__}")
	attrs.validate(config)
	range_resolution = SPEED_OF_LIGHT * (config.fs / config.n_samples) / (2 * config.slope)
	velocity_resolution = config.wavelength / (2 * config.n_chirps * config.t_cri)
	return MapGeometry(
		range_resolution=range_resolution,
		velocity_resolution=velocity_resolution,
		max_range=range_resolution * config.n_samples,
		max_velocity=config.wavelength / (4 * config.t_cri),
		n_range_bins=config.n_samples,
		n_doppler_bins=config.n_chirps,
	)

# ----------------------------------------------------------------------------------------
#  main
# ----------------------------------------------------------------------------------------
if __name__ == "__main__":
	pass
# ----------------------------------------------------------------------------------------
