import json
import math
from dataclasses import asdict, dataclass, field, fields, replace
from typing import List, Optional

import numpy as np

from cluster_pack.commons import ConfigError
from cluster_pack.graph import from_adjacency, grid_graph
from cluster_pack.synthesis import POLICIES
from my_utils import get_hash

SWEEP_KINDS = ('kappa_delta', 'gamma_T')
OMEGA0_UNITS = ('hz', 'rad/s')


def _number(value, key):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f'{key} must be a number, got {value!r}.')
    if not math.isfinite(value):
        raise ConfigError(f'{key} must be finite.')
    return float(value)


def _integer(value, key):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f'{key} must be an integer, got {value!r}.')
    return value


def _text(value, key):
    if not isinstance(value, str):
        raise ConfigError(f'{key} must be a string, got {value!r}.')
    return value


def _optional(parse):
    def inner(value, key):
        return None if value is None else parse(value, key)
    return inner


def _numbers(value, key):
    if not isinstance(value, list):
        raise ConfigError(f'{key} must be a list, got {value!r}.')
    return [_number(v, key) for v in value]


def _matrix(value, key):
    if not isinstance(value, list) or not all(isinstance(row, list) for row in value):
        raise ConfigError(f'{key} must be a list of rows.')
    return [_numbers(row, key) for row in value]


def _axis(value, key):
    # [start, stop, count]
    if not isinstance(value, list) or len(value) != 3:
        raise ConfigError(f'{key} must be [start, stop, count].')
    return [_number(value[0], key), _number(value[1], key), _integer(value[2], key)]


def parsed(default, parse):
    if isinstance(default, list):
        return field(default_factory=lambda: list(default), metadata={'parse': parse})
    return field(default=default, metadata={'parse': parse})


@dataclass
class GraphConfig:
    rows: int = parsed(1, _integer)
    cols: int = parsed(3, _integer)
    adjacency: Optional[List[List[float]]] = parsed(None, _optional(_matrix))


@dataclass
class TargetConfig:
    J0: float = parsed(3.4e-3, _number)
    J: float = parsed(6e-4, _number)
    z: Optional[float] = parsed(None, _optional(_number))
    row_phase: str = parsed('theta', _text)
    drive_phase: Optional[float] = parsed(None, _optional(_number))


@dataclass
class PhysicsConfig:
    omega0: float = parsed(1e9, _number)
    omega0_unit: str = parsed('hz', _text)
    kappa: float = parsed(0.01, _number)
    kappa0: Optional[float] = parsed(None, _optional(_number))
    delta: float = parsed(30.0, _number)
    delta0: float = parsed(1.0, _number)
    gamma: float = parsed(1e-8, _number)
    temperature: float = parsed(0.01, _number)
    r: float = parsed(1.0, _number)
    phi0: float = parsed(0.0, _number)
    eps_L0: float = parsed(1.0, _number)
    delta_omega: Optional[List[float]] = parsed(None, _optional(_numbers))
    bare_couplings: Optional[List[List[float]]] = parsed(None, _optional(_matrix))


@dataclass
class SynthesisConfig:
    policy: str = parsed('mixed', _text)
    rank_tol: float = parsed(1e-10, _number)


@dataclass
class NumericsConfig:
    tol: float = parsed(1e-10, _number)
    method: str = parsed('auto', _text)
    time: float = parsed(0.0, _number)
    adiabatic_thresholds: List[float] = parsed([0.05, 0.05, 0.1], _numbers)


@dataclass
class SweepConfig:
    kind: str = parsed('kappa_delta', _text)
    x: list = parsed([1e-3, 0.1, 20], _axis)
    y: list = parsed([1.0, 30.0, 20], _axis)
    spacing: str = parsed('log', _text)
    workers: int = parsed(1, _integer)


@dataclass
class OptimizeConfig:
    J0_bounds: List[float] = parsed([1e-4, 1e-2], _numbers)
    J_bounds: List[float] = parsed([1e-4, 1e-2], _numbers)
    grid: int = parsed(12, _integer)
    max_evals: int = parsed(200, _integer)


@dataclass
class OutputConfig:
    dir: str = parsed('run_output', _text)


SECTIONS = {
    'graph': GraphConfig,
    'target': TargetConfig,
    'physics': PhysicsConfig,
    'synthesis': SynthesisConfig,
    'numerics': NumericsConfig,
    'sweep': SweepConfig,
    'optimize': OptimizeConfig,
    'output': OutputConfig,
}


def _load_section(cls, data, section):
    if not isinstance(data, dict):
        raise ConfigError(f'Section {section!r} must be an object.')
    known = {f.name: f for f in fields(cls)}
    unknown = sorted(set(data) - set(known))
    if unknown:
        raise ConfigError(f'Unknown key(s) in {section!r}: {", ".join(unknown)}.')
    values = {name: known[name].metadata['parse'](value, f'{section}.{name}')
              for name, value in data.items()}
    return cls(**values)


@dataclass
class RunConfig:
    graph: GraphConfig = field(default_factory=GraphConfig)
    target: TargetConfig = field(default_factory=TargetConfig)
    physics: PhysicsConfig = field(default_factory=PhysicsConfig)
    synthesis: SynthesisConfig = field(default_factory=SynthesisConfig)
    numerics: NumericsConfig = field(default_factory=NumericsConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    optimize: OptimizeConfig = field(default_factory=OptimizeConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict):
            raise ConfigError('Config root must be an object.')
        unknown = sorted(set(data) - set(SECTIONS))
        if unknown:
            raise ConfigError(f'Unknown section(s): {", ".join(unknown)}.')
        cfg = cls(**{name: _load_section(SECTIONS[name], body, name) for name, body in data.items()})
        cfg.validate()
        return cfg

    @classmethod
    def from_json(cls, path):
        try:
            with open(path, 'r') as f:
                data = json.load(f)
        except OSError as e:
            raise ConfigError(f'Cannot read config {path}: {e}')
        except json.JSONDecodeError as e:
            raise ConfigError(f'Config {path} is not valid JSON: {e}')
        return cls.from_dict(data)

    def to_dict(self):
        return asdict(self)

    @property
    def run_id(self):
        return get_hash(json.dumps(self.to_dict(), sort_keys=True))

    def validate(self):
        g, t, p = self.graph, self.target, self.physics
        if self.graph.adjacency is None and (g.rows < 1 or g.cols < 1):
            raise ConfigError(f'graph.rows and graph.cols must be positive, got {g.rows}x{g.cols}.')
        if t.J0 <= 0 or t.J <= 0:
            raise ConfigError('target.J0 and target.J must be positive.')
        if t.z is not None and t.z < 0:
            raise ConfigError('target.z must be non-negative.')
        if t.row_phase not in ('theta', 'printed'):
            raise ConfigError(f'target.row_phase must be theta or printed, got {t.row_phase!r}.')
        if p.omega0_unit not in OMEGA0_UNITS:
            raise ConfigError(f'physics.omega0_unit must be one of {OMEGA0_UNITS}.')
        for key in ('omega0', 'kappa', 'delta', 'gamma'):
            if getattr(p, key) <= 0:
                raise ConfigError(f'physics.{key} must be positive.')
        if p.kappa0 is not None and p.kappa0 <= 0:
            raise ConfigError('physics.kappa0 must be positive.')
        if p.temperature < 0 or p.r < 0:
            raise ConfigError('physics.temperature and physics.r must be non-negative.')
        n = self.n_nodes
        if p.delta_omega is not None and len(p.delta_omega) != n:
            raise ConfigError(f'physics.delta_omega needs {n} entries.')
        if self.synthesis.policy not in POLICIES:
            raise ConfigError(f'synthesis.policy must be one of {POLICIES}.')
        if self.numerics.method not in ('auto', 'kron', 'schur'):
            raise ConfigError('numerics.method must be auto, kron or schur.')
        if len(self.numerics.adiabatic_thresholds) != 3:
            raise ConfigError('numerics.adiabatic_thresholds needs three values.')
        s = self.sweep
        if s.kind not in SWEEP_KINDS:
            raise ConfigError(f'sweep.kind must be one of {SWEEP_KINDS}.')
        if s.spacing not in ('log', 'linear'):
            raise ConfigError('sweep.spacing must be log or linear.')
        for axis in (s.x, s.y):
            if axis[2] < 1 or (s.spacing == 'log' and min(axis[0], axis[1]) <= 0):
                raise ConfigError('Sweep axes need a positive count and positive bounds on log spacing.')
        if s.workers < 1:
            raise ConfigError('sweep.workers must be at least 1.')
        o = self.optimize
        for bounds in (o.J0_bounds, o.J_bounds):
            if len(bounds) != 2 or bounds[0] <= 0 or bounds[1] < bounds[0]:
                raise ConfigError('Optimizer bounds must be [low, high] with 0 < low <= high.')
        if o.grid < 1 or o.max_evals < 0:
            raise ConfigError('optimize.grid must be positive and optimize.max_evals non-negative.')

    @property
    def n_nodes(self):
        if self.graph.adjacency is not None:
            return len(self.graph.adjacency)
        return self.graph.rows * self.graph.cols

    def build_graph(self):
        if self.graph.adjacency is not None:
            return from_adjacency(self.graph.adjacency)
        return grid_graph(self.graph.rows, self.graph.cols)

    @property
    def z(self):
        return self.physics.r if self.target.z is None else self.target.z

    @property
    def kappa0(self):
        return self.physics.kappa if self.physics.kappa0 is None else self.physics.kappa0

    @property
    def omega0_rad(self):
        p = self.physics
        return 2 * np.pi * p.omega0 if p.omega0_unit == 'hz' else p.omega0

    def axis_values(self, axis):
        start, stop, count = axis
        if self.sweep.spacing == 'log':
            return np.geomspace(start, stop, count)
        return np.linspace(start, stop, count)

    def with_overrides(self, **values):
        """Copy with physics/target keys replaced (kappa, delta, gamma, temperature, J0, J, ...)."""
        physics_keys = {f.name for f in fields(PhysicsConfig)}
        target_keys = {f.name for f in fields(TargetConfig)}
        phys = {k: v for k, v in values.items() if k in physics_keys}
        targ = {k: v for k, v in values.items() if k in target_keys}
        unknown = set(values) - physics_keys - target_keys
        if unknown:
            raise ConfigError(f'Cannot override {", ".join(sorted(unknown))}.')
        cfg = replace(self, physics=replace(self.physics, **phys), target=replace(self.target, **targ))
        cfg.validate()
        return cfg
