from __future__ import annotations

from pathlib import Path

import pytest

from morselab.cayley import build_ball
from morselab.presentations import GroupSpec, load_spec

DATA = Path(__file__).resolve().parent.parent / "data"


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA


@pytest.fixture(scope="session")
def free2() -> GroupSpec:
    return GroupSpec.free(2)


@pytest.fixture(scope="session")
def zz() -> GroupSpec:
    return GroupSpec.free_abelian(2)


@pytest.fixture(scope="session")
def p3() -> GroupSpec:
    return GroupSpec.raag(3, [("a", "b"), ("b", "c")])


@pytest.fixture(scope="session")
def surface2() -> GroupSpec:
    return load_spec(DATA / "surface2.grp")


@pytest.fixture(scope="session")
def free_ball8(free2):
    return build_ball(free2, 8)


@pytest.fixture(scope="session")
def zz_ball8(zz):
    return build_ball(zz, 8)


@pytest.fixture(scope="session")
def p3_ball8(p3):
    return build_ball(p3, 8)


@pytest.fixture(scope="session")
def p3_ball4(p3):
    return build_ball(p3, 4)


@pytest.fixture(scope="session")
def surface_ball4(surface2):
    return build_ball(surface2, 4)
