import json

import numpy as np
import pytest

from cluster_pack.commons import ConfigError
from conftest import base_dict
from config import RunConfig


def test_defaults_are_valid():
    cfg = RunConfig()
    cfg.validate()
    assert cfg.n_nodes == 3
    assert cfg.z == cfg.physics.r
    assert cfg.kappa0 == cfg.physics.kappa
    assert cfg.omega0_rad == pytest.approx(2 * np.pi * 1e9)


def test_from_json(tmp_path):
    path = tmp_path / 'run.json'
    path.write_text(json.dumps(base_dict(2, 3, kappa0=0.02)))
    cfg = RunConfig.from_json(str(path))
    assert cfg.n_nodes == 6
    assert cfg.kappa0 == 0.02
    assert cfg.build_graph().shape == (2, 3)


@pytest.mark.parametrize('data', [
    {'physic': {}},
    {'physics': {'kapa': 0.1}},
    {'physics': {'kappa': '0.1'}},
    {'physics': {'kappa': -0.1}},
    {'graph': {'rows': 1.5}},
    {'physics': {'delta_omega': [0.0, 0.0]}},
    {'synthesis': {'policy': 'negative'}},
    {'sweep': {'kind': 'gamma_kappa'}},
    {'sweep': {'x': [0.0, 1.0, 5]}},
    {'optimize': {'J0_bounds': [1e-2, 1e-4]}},
    {'target': {'row_phase': 'columns'}},
    [],
])
def test_rejects_invalid(data):
    with pytest.raises(ConfigError):
        RunConfig.from_dict(data)


def test_unreadable_files(tmp_path):
    with pytest.raises(ConfigError):
        RunConfig.from_json(str(tmp_path / 'missing.json'))
    broken = tmp_path / 'broken.json'
    broken.write_text('{"graph": ')
    with pytest.raises(ConfigError):
        RunConfig.from_json(str(broken))


def test_adjacency_graph():
    cfg = RunConfig.from_dict({'graph': {'adjacency': [[0, 1], [1, 0]]}})
    assert cfg.n_nodes == 2
    assert cfg.build_graph().shape is None


def test_overrides(base_config):
    moved = base_config.with_overrides(kappa=0.05, J=1e-3)
    assert moved.physics.kappa == 0.05
    assert moved.target.J == 1e-3
    assert base_config.physics.kappa == 0.01
    assert moved.run_id != base_config.run_id
    with pytest.raises(ConfigError):
        base_config.with_overrides(rows=2)
    with pytest.raises(ConfigError):
        base_config.with_overrides(kappa=-1.0)


def test_run_id_is_stable():
    assert RunConfig.from_dict(base_dict()).run_id == RunConfig.from_dict(base_dict()).run_id
    assert len(RunConfig().run_id) == 11


def test_axis_values(base_config):
    assert np.allclose(base_config.axis_values([1e-3, 1e-1, 3]), [1e-3, 1e-2, 1e-1])
