""" Extended Swerling-3 targets: scatterer clouds around a range/velocity centre
"""
# ----------------------------------------------------------------------------------------
#  Imports
# ----------------------------------------------------------------------------------------
from dataclasses import dataclass, field
import math

import attrs
import numpy as np

from ..common import ordered_pair, non_negative, read_config_file, write_json
from ..exceptions import ConfigError, SceneError
from .radar_config import RadarConfig, BinBox, derive_geometry

# ----------------------------------------------------------------------------------------
#  Some PreDefined Static Entries
# ----------------------------------------------------------------------------------------
# aspect dependent RCS bands, dBsm ( cars, SUVs and trucks )
RCS_BANDS = {
	'front': (8.7, 20.5),
	'rear':  (14.4, 24.6),
	'side':  (19.0, 22.0),
}
REFERENCE_RANGE_M = 10.0            # R^-4 link budget is normalised to this range
CHI2_DOF = 4                        # Swerling-3 scatterer power statistics

# ----------------------------------------------------------------------------------------
#  Target model
# ----------------------------------------------------------------------------------------
@dataclass(frozen=True)
class Scatterer():
	delta_r: float                  # range offset m
	delta_v: float                  # velocity offset m/s
	amplitude: float                # linear volts
	phase: float                    # rad

	def to_dict(self):
		return {'delta_r': self.delta_r, 'delta_v': self.delta_v, 'amplitude': self.amplitude, 'phase': self.phase}


@dataclass(frozen=True)
class ExtendedTarget():
	range_m: float
	velocity_mps: float
	rcs_dbsm: float
	aspect: str = 'side'
	half_extent: float = 0.0        # delta R_k, m
	scatterers: tuple = field(default_factory=tuple)

	@property
	def n_scatterers(self):
		return len(self.scatterers)

	@property
	def total_power(self):
		return float(sum(s.amplitude ** 2 for s in self.scatterers))

	# parallel arrays, handy for the synthesiser
	def scatterer_arrays(self):
		a = np.array([(s.delta_r, s.delta_v, s.amplitude, s.phase) for s in self.scatterers], dtype=float)
		if not len(a): a = np.zeros((0, 4))
		return a[:, 0], a[:, 1], a[:, 2], a[:, 3]

	def to_dict(self):
		return {
			'range_m': self.range_m,
			'velocity_mps': self.velocity_mps,
			'rcs_dbsm': self.rcs_dbsm,
			'aspect': self.aspect,
			'half_extent': self.half_extent,
			'scatterers': [s.to_dict() for s in self.scatterers],
		}

	@classmethod
	def from_dict(cls, d):
		return cls(
			range_m=float(d['range_m']),
			velocity_mps=float(d['velocity_mps']),
			rcs_dbsm=float(d.get('rcs_dbsm', 0.0)),
			aspect=d.get('aspect', 'side'),
			half_extent=float(d.get('half_extent', 0.0)),
			scatterers=tuple(Scatterer(**s) for s in d['scatterers']),
		)


# ----------------------------------------------------------------------------------------
#  Scenario: where and how targets are drawn
# ----------------------------------------------------------------------------------------
def _aspects(instance, attribute, value):
	bad = [a for a in value if a not in RCS_BANDS]
	if not value or bad:
		raise ConfigError(f"ScenarioSpec.aspects must be taken from {sorted(RCS_BANDS)}, got {value!r}")

def _scatterer_counts(instance, attribute, value):
	ordered_pair(instance, attribute, value)
	if value[0] < 1:
		raise ConfigError(f"ScenarioSpec.scatterer_limits must be >= 1, got {value!r}")

@attrs.frozen
class ScenarioSpec():
	name: str = 'nominal'
	n_targets: int = attrs.field(default=1, converter=int, validator=non_negative)
	range_limits: tuple = attrs.field(default=(10.0, 80.0), converter=tuple, validator=ordered_pair)
	velocity_limits: tuple = attrs.field(default=(-15.0, 15.0), converter=tuple, validator=ordered_pair)
	aspects: tuple = attrs.field(default=('front', 'rear', 'side'), converter=tuple, validator=_aspects)
	extent_limits: tuple = attrs.field(default=(1.5, 3.0), converter=tuple, validator=ordered_pair)
	scatterer_limits: tuple = attrs.field(default=(50, 100), converter=tuple, validator=_scatterer_counts)
	doppler_spread_limits: tuple = attrs.field(default=(0.0, 0.15), converter=tuple, validator=ordered_pair)
	rcs_offset_db: float = attrs.field(default=0.0, converter=float)
	snr_limits: tuple = attrs.field(default=(12.0, 25.0), converter=tuple, validator=ordered_pair)
	min_separation_m: float = attrs.field(default=12.0, converter=float, validator=non_negative)

	# denser scatterers, wider Doppler spread and a lower RCS band
	def shifted(self):
		return attrs.evolve(self, name='shifted', scatterer_limits=(150, 300),
							doppler_spread_limits=(0.3, 0.8), rcs_offset_db=self.rcs_offset_db - 6.0)

	@classmethod
	def from_dict(cls, d):
		if d is None: return cls()
		unknown = set(d) - {a.name for a in attrs.fields(cls)}
		if unknown:
			raise ConfigError(f"unknown scenario field(s): {sorted(unknown)}")
		try:
			return cls(**d)
		except (TypeError, ValueError) as e:
			if isinstance(e, ConfigError): raise
			raise ConfigError(f"invalid scenario: {e}") from e

	def to_dict(self):
		return attrs.asdict(self)


# ----------------------------------------------------------------------------------------
#  Sampling
# ----------------------------------------------------------------------------------------

# draw one extended target at the given centre
def sample_target(rng, range_m, velocity_mps, aspect='side', config=None, scenario=None):
	config = config or RadarConfig()
	scenario = scenario or ScenarioSpec()
	geometry = derive_geometry(config)
	if aspect not in RCS_BANDS:
		raise SceneError(f"unknown aspect {aspect!r}, expected one of {sorted(RCS_BANDS)}")
	if not 0.0 < range_m < geometry.max_range:
		raise SceneError(f"target range {range_m} m outside (0, {geometry.max_range:.2f}) m")
	if abs(velocity_mps) >= geometry.max_velocity:
		raise SceneError(f"target velocity {velocity_mps} m/s outside +/-{geometry.max_velocity:.2f} m/s")

	n = int(rng.integers(scenario.scatterer_limits[0], scenario.scatterer_limits[1] + 1))
	half_extent = float(rng.uniform(*scenario.extent_limits))
	doppler_spread = float(rng.uniform(*scenario.doppler_spread_limits))
	delta_r = rng.uniform(-half_extent, half_extent, n)
	delta_v = rng.uniform(-doppler_spread, doppler_spread, n)

	lo, hi = RCS_BANDS[aspect]
	rcs_dbsm = float(rng.uniform(lo, hi)) + scenario.rcs_offset_db
	total_power = 10 ** (rcs_dbsm / 10) * (REFERENCE_RANGE_M / range_m) ** 4
	powers = rng.chisquare(CHI2_DOF, n)
	powers *= total_power / powers.sum()

	phi_k = rng.uniform(0.0, 2 * math.pi)
	phases = np.mod(phi_k + rng.uniform(0.0, 2 * math.pi, n), 2 * math.pi)

	scatterers = tuple(Scatterer(float(dr), float(dv), float(np.sqrt(p)), float(ph))
					   for dr, dv, p, ph in zip(delta_r, delta_v, powers, phases))
	return ExtendedTarget(range_m=float(range_m), velocity_mps=float(velocity_mps), rcs_dbsm=rcs_dbsm,
						  aspect=aspect, half_extent=half_extent, scatterers=scatterers)

# draw a full scene of scenario.n_targets targets, keeping them min_separation_m apart in range
def sample_scene(rng, config=None, scenario=None, max_attempts=100):
	config = config or RadarConfig()
	scenario = scenario or ScenarioSpec()
	ranges = []
	for _ in range(scenario.n_targets):
		for _ in range(max_attempts):
			r = float(rng.uniform(*scenario.range_limits))
			if all(abs(r - x) >= scenario.min_separation_m for x in ranges):
				ranges.append(r)
				break
		else:
			raise SceneError(f"cannot place {scenario.n_targets} targets {scenario.min_separation_m} m apart "
							 f"within {scenario.range_limits}")
	scene = []
	for r in ranges:
		v = float(rng.uniform(*scenario.velocity_limits))
		aspect = scenario.aspects[int(rng.integers(len(scenario.aspects)))]
		scene.append(sample_target(rng, r, v, aspect, config=config, scenario=scenario))
	return scene

# ----------------------------------------------------------------------------------------
#  Ground truth
# ----------------------------------------------------------------------------------------

# bin rectangle of the true scatterer extent, dilated and clipped to the map
def ground_truth_box(target, geometry, dilation=1):
	dr, dv, _, _ = target.scatterer_arrays()
	if not len(dr): dr, dv = np.zeros(1), np.zeros(1)
	r_bins = geometry.range_bin(target.range_m + dr)
	d_bins = geometry.doppler_bin(target.velocity_mps + dv)
	box = BinBox(int(np.floor(r_bins.min() + 0.5)), int(np.floor(r_bins.max() + 0.5)),
				 int(np.floor(d_bins.min() + 0.5)), int(np.floor(d_bins.max() + 0.5)))
	return box.dilate(dilation).clip(geometry.n_range_bins, geometry.n_doppler_bins)

# ----------------------------------------------------------------------------------------
#  Scene documents ( JSON )
# ----------------------------------------------------------------------------------------

# a scene entry either lists its scatterers or only the target centre ( drawn with rng )
def scene_from_dict(d, rng=None, config=None, scenario=None):
	scene = []
	for t in d.get('targets', []):
		if 'scatterers' in t:
			scene.append(ExtendedTarget.from_dict(t))
			continue
		if rng is None: rng = np.random.default_rng()
		scene.append(sample_target(rng, float(t['range_m']), float(t['velocity_mps']),
								   t.get('aspect', 'side'), config=config, scenario=scenario))
	return scene

def scene_to_dict(scene, config=None):
	d = {'targets': [t.to_dict() for t in scene]}
	if config is not None: d['radar'] = config.to_dict()
	return d


# scene json document -> ( targets, radar config )
def read_scene(file, rng=None, scenario=None):
	d = read_config_file(file)
	config = RadarConfig.from_dict(d.get('radar'))
	return scene_from_dict(d, rng=rng, config=config, scenario=scenario), config

def write_scene(scene, file, config=None):
	write_json(scene_to_dict(scene, config), file)

# ----------------------------------------------------------------------------------------
#  main
# ----------------------------------------------------------------------------------------
if __name__ == "__main__":
	pass
# ----------------------------------------------------------------------------------------
