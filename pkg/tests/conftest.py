"""Shared fixtures: shipped configs, walk engines, and induced chains."""
import os

import pytest

from relwalk import FreeProductEngine, induce_first_return, load_config

CONFIG_DIR = os.path.join(os.path.dirname(__file__), os.pardir, "configs")


def config_path(name: str) -> str:
    return os.path.join(CONFIG_DIR, name)


@pytest.fixture(scope="session")
def f2_cfg():
    return load_config(config_path("f2.json"))


@pytest.fixture(scope="session")
def f2a_cfg():
    return load_config(config_path("f2_over_a.json"))


@pytest.fixture(scope="session")
def z2_cfg():
    return load_config(config_path("z2_free_z.json"))


@pytest.fixture(scope="session")
def lat_cfg():
    return load_config(config_path("lattice_1d.json"))


@pytest.fixture(scope="session")
def f2_engine(f2_cfg):
    return FreeProductEngine(f2_cfg.group, f2_cfg.measure, radius=f2_cfg.radius)


@pytest.fixture(scope="session")
def f2a_chain(f2a_cfg, f2_engine):
    return induce_first_return(f2_engine, factor=0, eta=0)


@pytest.fixture(scope="session")
def z2_engine(z2_cfg):
    return FreeProductEngine(z2_cfg.group, z2_cfg.measure, radius=z2_cfg.radius)


@pytest.fixture(scope="session")
def z2_chain_eta0(z2_engine):
    return induce_first_return(z2_engine, factor=0, eta=0)


@pytest.fixture(scope="session")
def z2_chain_eta2(z2_engine):
    return induce_first_return(z2_engine, factor=0, eta=2)
