import socket

import pytest

from guidedog import assets, world


@pytest.fixture(scope="session")
def office():
    return world.load_map(assets.bundled_path("map", "office"))


@pytest.fixture(scope="session")
def small():
    return world.load_map(assets.bundled_path("map", "small"))


@pytest.fixture(scope="session")
def ablation():
    return world.load_map(assets.bundled_path("map", "ablation"))


@pytest.fixture
def no_network(monkeypatch):
    """Refuse every socket connection for the duration of a test."""

    def explode(*args, **kwargs):
        raise OSError("network access attempted in a no-network test")

    monkeypatch.setattr(socket.socket, "connect", explode)
    monkeypatch.setattr(socket, "create_connection", explode)
