"""Shared gallery instances and cached reference solutions."""

import numpy as np
import pytest

from dualprox.problems import (RandomBoxQpSpec, builtin_problem,
                               make_instance, reference_solve)


@pytest.fixture(scope="session")
def toy():
    return builtin_problem("tv1d-toy")


@pytest.fixture(scope="session")
def toy_ref(toy):
    return reference_solve(toy, "enumerate")


@pytest.fixture(scope="session")
def tv64():
    return builtin_problem("tv1d-n64", seed=7)


@pytest.fixture(scope="session")
def tv64_ref(tv64):
    return reference_solve(tv64, "longrun")


@pytest.fixture(scope="session")
def boxqp():
    return make_instance(RandomBoxQpSpec(seed=42, n=8, m=4))


@pytest.fixture(scope="session")
def boxqp_ref(boxqp):
    return reference_solve(boxqp, "enumerate")


@pytest.fixture(scope="session")
def boxqp_box():
    return make_instance(RandomBoxQpSpec(seed=42, n=8, m=4, g_kind="box"))


@pytest.fixture(scope="session")
def interproj():
    return builtin_problem("interproj-toy")


@pytest.fixture(scope="session")
def interproj_ref(interproj):
    return reference_solve(interproj, "longrun")


@pytest.fixture(scope="session")
def resalloc():
    return builtin_problem("resalloc-toy")


@pytest.fixture(scope="session")
def resalloc_ref(resalloc):
    return reference_solve(resalloc, "longrun")


@pytest.fixture(scope="session")
def gallery(toy, tv64, boxqp, boxqp_box, interproj, resalloc):
    return [toy, tv64, boxqp, boxqp_box, interproj, resalloc]


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
