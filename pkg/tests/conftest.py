from __future__ import annotations

import pytest

from sarnaklab.sieve import build_liouville, build_mobius

SMALL = 10**6 + 10**4
MID = 10**7 + 10**4
BIG = 10**8 + 10**4


@pytest.fixture(scope="session")
def lam_small():
    return build_liouville(SMALL)


@pytest.fixture(scope="session")
def mu_small():
    return build_mobius(SMALL)


@pytest.fixture(scope="session")
def lam_mid():
    return build_liouville(MID)


@pytest.fixture(scope="session")
def mu_mid():
    return build_mobius(MID)


@pytest.fixture(scope="session")
def lam_big():
    return build_liouville(BIG)


@pytest.fixture(scope="session")
def mu_big():
    return build_mobius(BIG)


@pytest.fixture
def cache_env(tmp_path, monkeypatch):
    monkeypatch.setenv("SARNAK_CACHE_DIR", str(tmp_path / "cache"))
    return tmp_path
