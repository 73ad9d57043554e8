from __future__ import annotations

import pytest
from hypothesis import HealthCheck, settings

from braidkit.models import build_model

settings.register_profile("braidkit", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("braidkit")

ALL_MODELS = ["quantum_plane:2", "quantum_plane:3", "q_euclidean_4", "q_minkowski_4"]
FOUR_DIM = ["q_euclidean_4", "q_minkowski_4"]


@pytest.fixture(scope="session")
def plane2():
    return build_model("quantum_plane:2")


@pytest.fixture(scope="session")
def plane3():
    return build_model("quantum_plane:3")


@pytest.fixture(scope="session")
def euclid():
    return build_model("q_euclidean_4")


@pytest.fixture(scope="session")
def mink():
    return build_model("q_minkowski_4")


@pytest.fixture(scope="session", params=ALL_MODELS)
def any_model(request):
    return build_model(request.param)


@pytest.fixture(scope="session", params=FOUR_DIM)
def four_dim(request):
    return build_model(request.param)
