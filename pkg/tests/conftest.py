"""Shared pytest fixtures for FGLSS Lab tests."""

from fractions import Fraction

import pytest

from fglss_lab.config import (
    ENV_GOOD_QUERY_CAP,
    ENV_LC_ENUM_CAP,
    ENV_LOG_LEVEL,
    ENV_MC_BLOCK_SIZE,
    ENV_MWIS_MAX_VERTICES,
    ENV_SUPPORT_CAP,
)
from fglss_lab.label_cover import Edge, LabelCoverInstance, gen_planted
from fglss_lab.pcp import VerifierConfig

ALL_ENV_VARS = (
    ENV_LC_ENUM_CAP,
    ENV_SUPPORT_CAP,
    ENV_GOOD_QUERY_CAP,
    ENV_MWIS_MAX_VERTICES,
    ENV_LOG_LEVEL,
    ENV_MC_BLOCK_SIZE,
)


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    """Run every test against the default configuration."""
    for name in ALL_ENV_VARS:
        monkeypatch.delenv(name, raising=False)


@pytest.fixture
def mock_env_vars(monkeypatch):
    """Fixture to set every configuration variable to a non-default value."""
    values = {
        ENV_LC_ENUM_CAP: "1000",
        ENV_SUPPORT_CAP: "2048",
        ENV_GOOD_QUERY_CAP: "5000",
        ENV_MWIS_MAX_VERTICES: "12",
        ENV_LOG_LEVEL: "debug",
        ENV_MC_BLOCK_SIZE: "256",
    }
    for name, value in values.items():
        monkeypatch.setenv(name, value)
    return values


@pytest.fixture
def tiny_planted():
    """Tiny planted instance: U=2, V=3, L=2, d=2, 4 edges, seed 7."""
    return gen_planted(2, 3, 2, 2, 4, 7)


@pytest.fixture
def tiny_instance(tiny_planted):
    return tiny_planted[0]


@pytest.fixture
def tiny_labeling(tiny_planted):
    return tiny_planted[1]


@pytest.fixture
def unsat_instance():
    """Two edges from one u whose projections force contradictory u labels."""
    return LabelCoverInstance(
        u_count=1,
        v_count=1,
        L=2,
        R=2,
        d=1,
        edges=(
            Edge(0, 0, Fraction(1, 2), (0, 1)),
            Edge(0, 0, Fraction(1, 2), (1, 0)),
        ),
    )


@pytest.fixture
def cfg_r2():
    """r = 2 verifier with the default noise 1/K^2 = 1/9."""
    return VerifierConfig(r=2, seed=1)


@pytest.fixture
def cfg_r2_noise_free():
    return VerifierConfig(r=2, eta=0, seed=1)
